import numpy as np
import pytest

from jacobi_spectra import (PotentialSpec, TolTooSmall, TridiagonalMatrix,
                            bands_from_dense, build_bilateral, build_unilateral,
                            eigenvalues, eigenvalues_stack,
                            filtration_degree_window, sturm_count, sturm_counts,
                            tridiagonal_bands)

TWO_COS_1 = 1.0806046117362795
TWO_COS_2 = -0.8322936730942848


def free_eigs(n: int) -> np.ndarray:
    """Closed-form spectrum of the zero-diagonal matrix: 2 cos(k pi / (n+1))."""
    k = np.arange(n, 0, -1)
    return 2.0 * np.cos(k * np.pi / (n + 1))


def dense(A: TridiagonalMatrix) -> np.ndarray:
    m = np.diag(A.diag)
    idx = np.arange(A.n - 1)
    m[idx, idx + 1] = 1.0
    m[idx + 1, idx] = 1.0
    return m


# --------------------------------------------------------------------------
# Construction
# --------------------------------------------------------------------------


def test_build_unilateral_constant():
    A = build_unilateral(PotentialSpec.const(0.0), 3)
    assert A.diag.tolist() == [0.0, 0.0, 0.0]
    assert A.origin == 1 and A.n == 3


def test_build_unilateral_quarter_turn():
    A = build_unilateral(PotentialSpec.cosine([0.0, 2.0], np.pi / 2), 4)
    assert np.allclose(A.diag, [0.0, -2.0, 0.0, 2.0], atol=1e-12)


def test_build_unilateral_cosine_values():
    A = build_unilateral(PotentialSpec.cosine([0.0, 2.0], 1.0), 2)
    assert A.diag == pytest.approx([TWO_COS_1, TWO_COS_2], abs=1e-14)


def test_build_unilateral_offset_window():
    spec = PotentialSpec.cosine([0.0, 2.0], 1.0)
    A = build_unilateral(spec, 5, offset=10)
    assert A.origin == 11
    assert np.array_equal(A.diag, build_unilateral(spec, 20).diag[10:15])


def test_build_bilateral():
    assert build_bilateral(PotentialSpec.const(1.25), 1).diag.tolist() == [1.25] * 3
    B = build_bilateral(PotentialSpec.explicit([7, 8, 9], origin=-1), 1)
    assert B.diag.tolist() == [7.0, 8.0, 9.0] and B.origin == -1
    C = build_bilateral(PotentialSpec.cosine([0.0, 2.0], 1.0), 1)
    assert C.diag == pytest.approx([TWO_COS_1, 2.0, TWO_COS_1], abs=1e-14)
    assert C.n == 3


def test_gershgorin_encloses_spectrum():
    rng = np.random.default_rng(5)
    A = TridiagonalMatrix(rng.uniform(-2, 2, 30))
    lo, hi = A.gershgorin()
    eig = eigenvalues(A, 1e-10).values
    assert lo <= eig[0] and eig[-1] <= hi


# --------------------------------------------------------------------------
# Sturm counts
# --------------------------------------------------------------------------


def test_sturm_count_outside_spectrum():
    A = TridiagonalMatrix(np.zeros(3))
    assert sturm_count(A, -3.0) == 0
    assert sturm_count(A, 3.0) == 3


def test_sturm_count_two_by_two():
    # eigenvalues of [[0,1],[1,0]] are -1 and +1
    A = TridiagonalMatrix(np.zeros(2))
    assert sturm_count(A, 0.0) == 1
    assert sturm_count(A, -1.5) == 0
    assert sturm_count(A, 1.5) == 2


@pytest.mark.parametrize("seed", [3, 11])
def test_sturm_monotone_and_boundary(seed):
    rng = np.random.default_rng(seed)
    A = TridiagonalMatrix(rng.uniform(-2, 2, 64))
    xs = np.sort(rng.uniform(-5, 5, 200))
    counts = sturm_counts(A, xs)
    assert np.all(np.diff(counts) >= 0)
    lo, hi = A.gershgorin()
    assert sturm_count(A, lo - 0.5) == 0
    assert sturm_count(A, hi + 0.5) == A.n


# --------------------------------------------------------------------------
# Eigenvalues
# --------------------------------------------------------------------------


def test_eigenvalues_one_by_one():
    eig = eigenvalues(TridiagonalMatrix(np.asarray([5.0])), 1e-10)
    assert eig.values[0] == pytest.approx(5.0, abs=1e-10)


def test_eigenvalues_two_by_two():
    eig = eigenvalues(TridiagonalMatrix(np.zeros(2)), 1e-12)
    assert eig.values == pytest.approx([-1.0, 1.0], abs=1e-12)


def test_eigenvalues_free_case_closed_form():
    A = build_unilateral(PotentialSpec.const(0.0), 10)
    eig = eigenvalues(A, 1e-10)
    assert np.max(np.abs(eig.values - free_eigs(10))) < 1e-10


def test_eigenvalues_tol_too_small():
    A = TridiagonalMatrix(np.zeros(4))
    with pytest.raises(TolTooSmall):
        eigenvalues(A, 1e-30)
    with pytest.raises(ValueError):
        eigenvalues(A, 0.0)


def test_eigenvalue_list_strictly_increasing_and_consistent():
    rng = np.random.default_rng(7)
    A = TridiagonalMatrix(rng.uniform(-2, 2, 120))
    eig = eigenvalues(A, 1e-10)
    gaps = np.diff(eig.values)
    assert np.all(gaps > 0)
    # simplicity resolved at this tolerance
    assert np.all(gaps > 2 * eig.certified_radius)
    # count consistency at resolved thresholds
    xs = rng.uniform(*A.gershgorin(), 300)
    resolved = np.min(np.abs(eig.values[None, :] - xs[:, None]), axis=1) \
        > eig.certified_radius
    xs = xs[resolved]
    assert np.array_equal(sturm_counts(A, xs),
                          np.searchsorted(eig.values, xs, side="right"))


def test_interlacing_with_leading_submatrix():
    # True interlacing lam_i < mu_i < lam_{i+1} is strict, but the gaps can
    # sit far below any certifiable resolution (localized eigenvectors barely
    # feel the last row), so the check carries the certified slack.
    rng = np.random.default_rng(13)
    d = rng.uniform(-2, 2, 80)
    full = eigenvalues(TridiagonalMatrix(d), 1e-11)
    sub = eigenvalues(TridiagonalMatrix(d[:-1]), 1e-11)
    slack = full.certified_radius + sub.certified_radius
    lam, mu = full.values, sub.values
    assert np.all(mu >= lam[:-1] - slack) and np.all(mu <= lam[1:] + slack)


def charpoly_roots(diag: np.ndarray, samples: int = 20001) -> np.ndarray:
    """Independent oracle: roots of det(T - xI) via the three-term recurrence."""
    diag = np.asarray(diag, dtype=float)

    def value(x: float) -> float:
        pm1, p = 1.0, diag[0] - x
        for d in diag[1:]:
            pm1, p = p, (d - x) * p - pm1
        return p

    lo, hi = diag.min() - 2.0, diag.max() + 2.0
    xs = np.linspace(lo - 0.01, hi + 0.01, samples)
    vals = np.asarray([value(x) for x in xs])
    roots = []
    for i in range(samples - 1):
        a, b, fa, fb = xs[i], xs[i + 1], vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = value(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return np.asarray(roots)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_eigenvalues_match_characteristic_polynomial(n):
    rng = np.random.default_rng(100 + n)
    d = rng.uniform(-2, 2, n)
    eig = eigenvalues(TridiagonalMatrix(d), 1e-11)
    roots = charpoly_roots(d)
    assert roots.size == n
    assert np.max(np.abs(eig.values - roots)) < 10 * 1e-11


def test_eigenvalues_cross_check_dense_solver():
    rng = np.random.default_rng(42)
    A = TridiagonalMatrix(rng.uniform(-2, 2, 50))
    ours = eigenvalues(A, 1e-12).values
    ref = np.linalg.eigvalsh(dense(A))
    assert np.max(np.abs(ours - ref)) < 1e-9


def test_eigenvalues_stack_matches_single_runs():
    rng = np.random.default_rng(21)
    diags = rng.uniform(-2, 2, size=(5, 40))
    vals, radius = eigenvalues_stack(diags, 1e-10)
    for i in range(5):
        single = eigenvalues(TridiagonalMatrix(diags[i]), 1e-10)
        assert np.array_equal(single.values, vals[i])
        assert single.certified_radius <= radius + 1e-18


# --------------------------------------------------------------------------
# Degree window
# --------------------------------------------------------------------------


def test_degree_diagonal_matrix_has_rank_zero():
    report = filtration_degree_window({0: np.arange(1.0, 9.0)}, 8, 7)
    assert report.ranks.tolist() == [0] * 7


def test_degree_tridiagonal_is_one():
    rng = np.random.default_rng(3)
    A = TridiagonalMatrix(rng.uniform(-2, 2, 16))
    report = filtration_degree_window(tridiagonal_bands(A), 16, 15)
    assert np.all(report.ranks == 1)


def test_degree_product_subadditive_and_svd_oracle():
    rng = np.random.default_rng(9)
    n = 24
    a = dense(TridiagonalMatrix(rng.uniform(-2, 2, n)))
    b = dense(TridiagonalMatrix(rng.uniform(-2, 2, n)))
    product = a @ b  # pentadiagonal
    bands = bands_from_dense(product, 2)
    report = filtration_degree_window(bands, n, n - 1)
    assert np.all(report.ranks <= 2)  # bandwidth bound == degree-sum bound 1+1
    for k in range(1, n):
        oracle = np.linalg.matrix_rank(product[:k, k:])
        assert report.ranks[k - 1] == oracle


def test_degree_input_validation():
    with pytest.raises(ValueError):
        filtration_degree_window({0: np.zeros(4)}, 4, 4)
    with pytest.raises(ValueError):
        filtration_degree_window({0: np.zeros(3)}, 4, 2)
