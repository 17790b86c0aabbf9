"""Finite tridiagonal compressions: Sturm counts, bisection, degree windows.

All matrices here are real symmetric tridiagonal with every off-diagonal
entry equal to 1.  That makes them unreduced, so eigenvalues are always
simple, and it makes the eigenvalue counting function N(x) = #{lambda <= x}
computable in O(n) by the LDL^T sign-count recurrence, which is the
workhorse of the whole package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .potentials import PotentialSpec, sample_sequence

__all__ = [
    "TolTooSmall",
    "TridiagonalMatrix",
    "EigenvalueList",
    "DegreeReport",
    "build_unilateral",
    "build_bilateral",
    "sturm_count",
    "sturm_counts",
    "eigenvalues",
    "eigenvalues_stack",
    "tridiagonal_bands",
    "bands_from_dense",
    "filtration_degree_window",
    "matrix_to_csv",
    "eigenvalues_to_csv",
]

EPS = float(np.finfo(np.float64).eps)


class TolTooSmall(Exception):
    """Requested certification radius is below what bisection can deliver."""


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix with unit off-diagonals.

    origin is the bilateral index of diag[0]: 1 for a unilateral compression
    over d_1..d_n, -m for the bilateral window d_{-m}..d_{m}.
    """

    diag: np.ndarray
    origin: int = 1

    def __post_init__(self) -> None:
        d = np.asarray(self.diag, dtype=np.float64).copy()
        if d.ndim != 1 or d.size < 1:
            raise ValueError("diag must be a nonempty 1-d array")
        if not np.all(np.isfinite(d)):
            raise ValueError("diag entries must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "origin", int(self.origin))

    @property
    def n(self) -> int:
        return int(self.diag.size)

    def gershgorin(self) -> tuple[float, float]:
        """Interval [min(diag)-2, max(diag)+2] enclosing all eigenvalues."""
        return float(self.diag.min() - 2.0), float(self.diag.max() + 2.0)


def build_unilateral(spec: PotentialSpec, n: int, offset: int = 0) -> TridiagonalMatrix:
    """n x n compression over diagonal indices 1+offset .. n+offset."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    off = int(offset)
    return TridiagonalMatrix(sample_sequence(spec, 1 + off, n + off), origin=1 + off)


def build_bilateral(spec: PotentialSpec, m: int) -> TridiagonalMatrix:
    """(2m+1) x (2m+1) compression over diagonal indices -m .. m."""
    m = int(m)
    if m < 0:
        raise ValueError("m must be >= 0")
    return TridiagonalMatrix(sample_sequence(spec, -m, m), origin=-m)


# --------------------------------------------------------------------------
# Sturm counts
# --------------------------------------------------------------------------


def _pivot_floor(diag_2d: np.ndarray) -> np.ndarray:
    """Per-matrix pivot floor: machine epsilon times the Gershgorin width."""
    width = (diag_2d.max(axis=1) - diag_2d.min(axis=1)) + 4.0
    return EPS * width


def _sturm_counts_2d(diag_2d: np.ndarray, xs_2d: np.ndarray,
                     pivmin: np.ndarray) -> np.ndarray:
    """Counts #{lambda <= x} for a stack of same-size matrices.

    diag_2d: (M, n) diagonals; xs_2d: (M, B) thresholds; pivmin: (M,).
    The LDL^T pivots of (T - x I) are q_1 = d_1 - x,
    q_{k+1} = (d_{k+1} - x) - 1/q_k; the number of negative pivots equals
    the number of eigenvalues <= x.  Pivots with |q| below the floor are
    replaced by -floor (standard bisection safeguard; perturbs x by at most
    the floor and keeps counts monotone).
    """
    pm = pivmin[:, None]
    q = diag_2d[:, 0][:, None] - xs_2d
    q = np.where(np.abs(q) < pm, -pm, q)
    count = (q < 0).astype(np.int64)
    for k in range(1, diag_2d.shape[1]):
        q = (diag_2d[:, k][:, None] - xs_2d) - 1.0 / q
        q = np.where(np.abs(q) < pm, -pm, q)
        count += q < 0
    return count


def sturm_counts(A: TridiagonalMatrix, xs: Sequence[float]) -> np.ndarray:
    """Vectorized eigenvalue counting: N(x) = #{lambda <= x} for each x."""
    xs_arr = np.asarray(xs, dtype=np.float64)
    if not np.all(np.isfinite(xs_arr)):
        raise ValueError("thresholds must be finite")
    diag_2d = A.diag[None, :]
    out = _sturm_counts_2d(diag_2d, xs_arr.reshape(1, -1), _pivot_floor(diag_2d))
    return out.reshape(xs_arr.shape)


def sturm_count(A: TridiagonalMatrix, x: float) -> int:
    """Number of eigenvalues of A in (-inf, x]."""
    return int(sturm_counts(A, np.asarray([float(x)]))[0])


# --------------------------------------------------------------------------
# Eigenvalues by bisection
# --------------------------------------------------------------------------


def _certifiable_floor(lo: float, hi: float) -> float:
    return 16.0 * EPS * max(hi - lo, abs(lo), abs(hi))


def _bisect_stack(diag_2d: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Lockstep bisection for every eigenvalue of a stack of matrices.

    Returns (values (M, n) sorted per row, certified radius).  Each bracket
    keeps the invariant N(lo) < i <= N(hi) for eigenvalue index i, so the
    i-th eigenvalue stays inside it; the midpoint is reported once the width
    drops below tol.
    """
    m, n = diag_2d.shape
    glo = diag_2d.min(axis=1) - 2.0
    ghi = diag_2d.max(axis=1) + 2.0
    floor = max(_certifiable_floor(float(glo.min()), float(ghi.max())), 5e-324)
    if tol < floor:
        raise TolTooSmall(
            f"tol={tol:g} is below the certifiable floor {floor:g} "
            "for this spectral interval")
    pivmin = _pivot_floor(diag_2d)
    lo = np.repeat(glo[:, None], n, axis=1)
    hi = np.repeat(ghi[:, None], n, axis=1)
    idx = np.arange(1, n + 1, dtype=np.int64)[None, :]
    # uniform halving: iterate until every bracket is narrower than tol
    max_iter = 64 + int(math.ceil(math.log2(max(float(np.max(ghi - glo)), 1.0))))
    for _ in range(max_iter):
        width = hi - lo
        if float(width.max()) <= tol:
            break
        mid = 0.5 * (lo + hi)
        ge = _sturm_counts_2d(diag_2d, mid, pivmin) >= idx
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    values = 0.5 * (lo + hi)
    radius = 0.5 * float(np.max(hi - lo))
    return values, radius


def _enforce_strict_increase(row: np.ndarray) -> np.ndarray:
    """Break exact ties (possible only below the certified resolution)."""
    if np.all(np.diff(row) > 0):
        return row
    out = row.copy()
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


@dataclass(frozen=True, eq=False)
class EigenvalueList:
    """Strictly increasing eigenvalues with a certified enclosure radius.

    Every true eigenvalue lies within certified_radius of the reported one
    (and conversely), so counts #{values <= x} are exact for any x farther
    than certified_radius from all reported values.
    """

    values: np.ndarray
    certified_radius: float
    n: int

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64).copy()
        if v.ndim != 1 or v.size != self.n:
            raise ValueError("values must be 1-d of length n")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("values must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def eigenvalues(A: TridiagonalMatrix, tol: float) -> EigenvalueList:
    """All n eigenvalues of A, each within certified_radius <= tol/2.

    Bisection on the Sturm count, started from the Gershgorin interval.
    Raises TolTooSmall when tol is under ~16 eps times the spectral scale,
    where bisection cannot certify against round-off.
    """
    tol = float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    values, radius = _bisect_stack(A.diag[None, :], tol)
    row = _enforce_strict_increase(values[0])
    return EigenvalueList(values=row, certified_radius=radius, n=A.n)


def eigenvalues_stack(diags: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Eigenvalues of a stack of same-size tridiagonals in one lockstep run.

    diags: (M, n) array of diagonals.  Returns ((M, n) sorted values, radius).
    Results are identical to calling `eigenvalues` row by row; stacking only
    amortizes the per-iteration overhead.
    """
    d = np.asarray(diags, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("diags must be 2-d (stack of diagonals)")
    tol = float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    values, radius = _bisect_stack(d, tol)
    fixed = np.vstack([_enforce_strict_increase(row) for row in values])
    return fixed, radius


# --------------------------------------------------------------------------
# CSV serialization: one value per line, 17 significant digits (enough to
# round-trip a double), header comments carrying the window metadata.
# --------------------------------------------------------------------------


def _csv17(x: float) -> str:
    return format(float(x), ".17g")


def matrix_to_csv(A: TridiagonalMatrix) -> str:
    """Diagonal of A as CSV text with a `# n=..., origin=...` header."""
    lines = [f"# n={A.n}, origin={A.origin}"]
    lines += [_csv17(v) for v in A.diag]
    return "\n".join(lines) + "\n"


def eigenvalues_to_csv(eig: EigenvalueList, origin: int, tol: float) -> str:
    """Eigenvalue list as CSV text with a `# n=..., origin=..., tol=...` header."""
    lines = [f"# n={eig.n}, origin={int(origin)}, tol={_csv17(tol)}",
             f"# certified_radius={_csv17(eig.certified_radius)}"]
    lines += [_csv17(v) for v in eig.values]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Filtration-degree diagnostics on a finite window
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DegreeReport:
    """Numerical ranks of the cut-coupling blocks for cuts k = 1..K.

    ranks[k-1] is the rank of the block of A mapping coordinates > k into
    coordinates <= k.  A bandwidth-b matrix has every such rank <= b; for
    symmetric A the commutator P_k A - A P_k has rank exactly twice the
    reported block rank (the two corner blocks are transposes).
    """

    ranks: np.ndarray
    degree_window: int
    rank_tol: float


def tridiagonal_bands(A: TridiagonalMatrix) -> dict[int, np.ndarray]:
    """Band form {offset: values} of a unit-off-diagonal tridiagonal."""
    ones = np.ones(max(A.n - 1, 0))
    bands = {0: np.asarray(A.diag)}
    if A.n > 1:
        bands[1] = ones
        bands[-1] = ones
    return bands


def bands_from_dense(a: np.ndarray, bandwidth: int) -> dict[int, np.ndarray]:
    """Extract bands -bandwidth..bandwidth from a dense square matrix."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    return {o: np.diagonal(a, o).copy() for o in range(-bandwidth, bandwidth + 1)
            if abs(o) < n}


def _dense_from_bands(bands: Mapping[int, np.ndarray], size: int) -> np.ndarray:
    a = np.zeros((size, size))
    for offset, vals in bands.items():
        vals = np.asarray(vals, dtype=np.float64)
        expect = size - abs(int(offset))
        if expect < 0 or vals.size != expect:
            raise ValueError(f"band {offset} must have length {expect}")
        idx = np.arange(expect)
        if offset >= 0:
            a[idx, idx + offset] = vals
        else:
            a[idx - offset, idx] = vals
    return a


def filtration_degree_window(bands: Mapping[int, np.ndarray], size: int,
                             max_cut: int, rank_tol: float | None = None) -> DegreeReport:
    """Rank of the coupling across each cut k = 1..max_cut of a banded matrix.

    For the cut after coordinate k the coupling block is A[:k, k:]; its
    numerical rank is the number of singular values above rank_tol
    (default 10 * size * eps * ||A||_inf, fixed so reports are reproducible).
    """
    size = int(size)
    max_cut = int(max_cut)
    if not 1 <= max_cut < size:
        raise ValueError("need 1 <= max_cut < size")
    a = _dense_from_bands(bands, size)
    if rank_tol is None:
        norm_inf = float(np.max(np.sum(np.abs(a), axis=1)))
        rank_tol = 10.0 * size * EPS * norm_inf
    ranks = np.zeros(max_cut, dtype=np.int64)
    for k in range(1, max_cut + 1):
        block = a[:k, k:]
        if block.size:
            sv = np.linalg.svd(block, compute_uv=False)
            ranks[k - 1] = int(np.count_nonzero(sv > rank_tol))
    return DegreeReport(ranks=ranks, degree_window=max_cut, rank_tol=float(rank_tol))
