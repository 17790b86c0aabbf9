"""Bounded bilateral diagonal sequences and their symmetric Cesaro means.

The sequences generated here are the diagonals d_n of doubly infinite
tridiagonal operators with unit off-diagonals.  The interesting family is
d_n = v(cos(n*theta)) with theta an irrational multiple of pi, which is
almost periodic but never periodic; constant and explicitly tabulated
sequences are kept around as exact test material.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ExplicitOutOfRange",
    "PotentialSpec",
    "MeanEstimate",
    "PeriodicityResult",
    "sample_sequence",
    "von_neumann_mean",
    "default_mean_offsets",
    "periodicity_check",
    "claimed_nonperiodic",
]

MAX_POLY_DEGREE = 64

_KINDS = ("cosine_composed", "trig_polynomial", "constant", "explicit")


class ExplicitOutOfRange(Exception):
    """Requested indices fall outside the stored samples of an explicit sequence."""


# --------------------------------------------------------------------------
# Extended-precision reduction of n*theta modulo 2*pi.
#
# A plain double product n*theta loses up to ~n ulps before the cosine is
# even taken, which is fatal for reproducible eigenvalue data at n ~ 1e7.
# The usual fix: error-free transforms (Dekker two_prod / two_sum) plus a
# two-word representation of 2*pi, which keeps the absolute error of the
# reduced angle at a few 1e-16 for |n| <= 1e7.
# --------------------------------------------------------------------------

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitter
_TWOPI_HI = 6.283185307179586
_TWOPI_LO = 2.4492935982947064e-16


def _two_sum(a, b):
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def _two_prod(a, b):
    p = a * b
    ta = _SPLIT * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLIT * b
    bhi = tb - (tb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _reduce_mod_twopi(n: np.ndarray, theta: float) -> np.ndarray:
    """Return n*theta reduced into [-pi-eps, pi+eps], elementwise over n."""
    p, e = _two_prod(n, theta)
    k = np.rint((p + e) / _TWOPI_HI)
    q, qe = _two_prod(k, _TWOPI_HI)
    s, t = _two_sum(p, -q)
    return s + (((e - qe) - k * _TWOPI_LO) + t)


def _reduce_scalar(x: float) -> float:
    return float(_reduce_mod_twopi(np.asarray([1.0]), float(x))[0])


# --------------------------------------------------------------------------
# Specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """Symbolic description of a bounded real bilateral sequence d_n.

    kinds:
      cosine_composed   d_n = v(cos(n*theta)), v a real polynomial on [-1, 1]
                        given by ascending coefficients `coeffs`
      trig_polynomial   d_n = sum_i amp_i * cos(n*freq_i + phase_i)
      constant          d_n = value
      explicit          d_n tabulated on a finite index window (test material;
                        not genuinely almost periodic)
    """

    kind: str
    coeffs: tuple[float, ...] | None = None
    theta: float | None = None
    terms: tuple[tuple[float, float, float], ...] | None = None
    value: float | None = None
    samples: tuple[float, ...] | None = None
    origin: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "cosine_composed":
            if not self.coeffs:
                raise ValueError("cosine_composed requires polynomial coeffs")
            if len(self.coeffs) > MAX_POLY_DEGREE + 1:
                raise ValueError(f"polynomial degree above {MAX_POLY_DEGREE}")
            if self.theta is None or not math.isfinite(self.theta):
                raise ValueError("cosine_composed requires a finite theta")
            _require_finite(self.coeffs, "coeffs")
        elif self.kind == "trig_polynomial":
            if self.terms is None:
                raise ValueError("trig_polynomial requires terms")
            for term in self.terms:
                if len(term) != 3:
                    raise ValueError("each term must be (amplitude, frequency, phase)")
                _require_finite(term, "terms")
        elif self.kind == "constant":
            if self.value is None or not math.isfinite(self.value):
                raise ValueError("constant requires a finite value")
        else:
            if self.samples is None or len(self.samples) == 0:
                raise ValueError("explicit requires at least one sample")
            _require_finite(self.samples, "samples")

    @classmethod
    def cosine(cls, coeffs: Sequence[float], theta: float) -> "PotentialSpec":
        return cls(kind="cosine_composed", coeffs=tuple(float(c) for c in coeffs),
                   theta=float(theta))

    @classmethod
    def trig(cls, terms: Sequence[Sequence[float]]) -> "PotentialSpec":
        return cls(kind="trig_polynomial",
                   terms=tuple(tuple(float(x) for x in t) for t in terms))

    @classmethod
    def const(cls, value: float) -> "PotentialSpec":
        return cls(kind="constant", value=float(value))

    @classmethod
    def explicit(cls, samples: Sequence[float], origin: int = 0) -> "PotentialSpec":
        return cls(kind="explicit", samples=tuple(float(s) for s in samples),
                   origin=int(origin))

    def bound(self) -> float:
        """A computable B with sup_n |d_n| <= B."""
        if self.kind == "cosine_composed":
            return float(sum(abs(c) for c in self.coeffs))
        if self.kind == "trig_polynomial":
            return float(sum(abs(a) for a, _, _ in self.terms))
        if self.kind == "constant":
            return abs(self.value)
        return float(max(abs(s) for s in self.samples))


def _require_finite(values, name: str) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite entry in {name}")


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def sample_sequence(spec: PotentialSpec, lo: int, hi: int) -> np.ndarray:
    """Evaluate d_n for n = lo..hi inclusive.

    Deterministic: the value at index n depends on (spec, n) only, never on
    the window, so overlapping windows agree bit for bit.
    """
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"empty index range [{lo}, {hi}]")
    count = hi - lo + 1
    if spec.kind == "constant":
        return np.full(count, spec.value, dtype=np.float64)
    if spec.kind == "explicit":
        first = spec.origin
        last = spec.origin + len(spec.samples) - 1
        if lo < first or hi > last:
            raise ExplicitOutOfRange(
                f"indices [{lo}, {hi}] outside stored range [{first}, {last}]")
        return np.asarray(spec.samples[lo - first:hi - first + 1], dtype=np.float64)
    n = np.arange(lo, hi + 1, dtype=np.float64)
    if spec.kind == "cosine_composed":
        c = np.cos(_reduce_mod_twopi(n, spec.theta))
        acc = np.zeros(count)
        for coef in reversed(spec.coeffs):
            acc = acc * c + coef
        return acc
    out = np.zeros(count)
    for amp, freq, phase in spec.terms:
        out += amp * np.cos(_reduce_mod_twopi(n, freq) + _reduce_scalar(phase))
    return out


@dataclass(frozen=True)
class MeanEstimate:
    """Windowed symmetric average of d_n with a translation-uniformity probe.

    uniformity_defect is the worst deviation, over the tested offsets k, of
    the window average centred at k from the one centred at 0.  For an
    almost periodic sequence it tends to 0 as the window grows.
    """

    value: float
    window_radius: int
    uniformity_defect: float


def default_mean_offsets(window_radius: int) -> tuple[int, ...]:
    """Cheap probe set reaching far translates: {0, +-n, +-2n, +-5n, +-10n}."""
    n = int(window_radius)
    out = {0}
    for mult in (1, 2, 5, 10):
        out.add(mult * n)
        out.add(-mult * n)
    return tuple(sorted(out))


def von_neumann_mean(spec: PotentialSpec, window_radius: int,
                     offsets: Sequence[int]) -> MeanEstimate:
    """Estimate the invariant mean M(d) = lim (2n+1)^-1 sum_{|j|<=n} d_j.

    value is the window average centred at 0; uniformity_defect is
    max_k |average centred at k - value| over the given offsets.
    """
    n = int(window_radius)
    if n < 1:
        raise ValueError("window_radius must be >= 1")
    offs = [int(k) for k in offsets]
    if not offs:
        raise ValueError("offsets must be nonempty")
    lo = min(min(offs), 0) - n
    hi = max(max(offs), 0) + n
    a = sample_sequence(spec, lo, hi)
    csum = np.concatenate(([0.0], np.cumsum(a)))
    width = 2 * n + 1

    def window_mean(k: int) -> float:
        i0 = k - n - lo
        return float((csum[i0 + width] - csum[i0]) / width)

    value = window_mean(0)
    defect = max(abs(window_mean(k) - value) for k in offs)
    return MeanEstimate(value=value, window_radius=n, uniformity_defect=defect)


@dataclass(frozen=True)
class PeriodicityResult:
    """Outcome of a finite periodicity scan.

    period is the least p <= max_period with sup |d_{n+p} - d_n| <= tol over
    the test window, or None when no such p exists.  A None is evidence of
    non-periodicity, never a proof: the scan sees finitely many indices.
    """

    period: int | None
    max_period: int
    tol: float
    test_window: int

    @property
    def is_periodic(self) -> bool:
        return self.period is not None


def periodicity_check(spec: PotentialSpec, max_period: int, tol: float,
                      test_window: int = 1024) -> PeriodicityResult:
    """Scan p = 1..max_period for an approximate period of the sequence."""
    max_period = int(max_period)
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    w = max(2, int(test_window))
    half = w // 2
    a = sample_sequence(spec, -half, half - 1 + max_period)
    base = a[:w]
    for p in range(1, max_period + 1):
        if float(np.max(np.abs(a[p:p + w] - base))) <= tol:
            return PeriodicityResult(period=p, max_period=max_period, tol=tol,
                                     test_window=w)
    return PeriodicityResult(period=None, max_period=max_period, tol=tol,
                             test_window=w)


def claimed_nonperiodic(spec: PotentialSpec, max_period: int = 10_000,
                        tol: float = 1e-9) -> bool:
    """True when no period up to max_period is found.

    Irrationality of theta/pi cannot be certified from a float, so this flag
    is a finite heuristic standing in for the non-periodicity hypothesis.
    """
    return not periodicity_check(spec, max_period, tol).is_periodic
