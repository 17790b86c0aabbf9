"""Spectra of tridiagonal operators with almost-periodic diagonals.

Compute the limit distribution of the eigenvalues of growing finite
compressions of a doubly infinite symmetric tridiagonal operator with unit
off-diagonals, locate its spectrum and spectral gaps from counting
evidence, and cross-validate everything against independent trace-moment
and bilateral-compression estimates.
"""

from .potentials import (ExplicitOutOfRange, MeanEstimate, PeriodicityResult,
                         PotentialSpec, claimed_nonperiodic, default_mean_offsets,
                         periodicity_check, sample_sequence, von_neumann_mean)
from .specmeasure import (CrosscheckReport, EmpiricalMeasure, MomentMatchReport,
                          SpectralDistributionEstimate, SpectrumReport,
                          TraceMoments, UnresolvedEndpoint, bilateral_crosscheck,
                          cesaro_functional, classify_spectrum, counting,
                          empirical_measure, estimate_distribution, gap_intervals,
                          moment_match, trace_moments)
from .tridiag import (DegreeReport, EigenvalueList, TolTooSmall,
                      TridiagonalMatrix, bands_from_dense, build_bilateral,
                      build_unilateral, eigenvalues, eigenvalues_stack,
                      eigenvalues_to_csv, filtration_degree_window,
                      matrix_to_csv, sturm_count, sturm_counts,
                      tridiagonal_bands)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ExplicitOutOfRange", "MeanEstimate", "PeriodicityResult", "PotentialSpec",
    "claimed_nonperiodic", "default_mean_offsets", "periodicity_check",
    "sample_sequence", "von_neumann_mean",
    "DegreeReport", "EigenvalueList", "TolTooSmall", "TridiagonalMatrix",
    "bands_from_dense", "build_bilateral", "build_unilateral", "eigenvalues",
    "eigenvalues_stack", "eigenvalues_to_csv", "filtration_degree_window",
    "matrix_to_csv", "sturm_count", "sturm_counts", "tridiagonal_bands",
    "CrosscheckReport", "EmpiricalMeasure", "MomentMatchReport",
    "SpectralDistributionEstimate", "SpectrumReport", "TraceMoments",
    "UnresolvedEndpoint", "bilateral_crosscheck", "cesaro_functional",
    "classify_spectrum", "counting", "empirical_measure",
    "estimate_distribution", "gap_intervals", "moment_match", "trace_moments",
]
