"""projcurv: a Monte Carlo laboratory for curvatures of random complex projective submanifolds.

Random degree-d polynomial systems on complex projective n-space, drawn from
the unitarily invariant Gaussian ensemble, have zero loci whose curvature can
be computed exactly from 2-jets of the defining sections.  This package
provides: jet sampling in adapted frames, the exact finite-degree jet
covariance and its large-degree limit, curvature reports from the second
fundamental form, distances to discriminant varieties with empirical tail
exponents, Kac-Rice ratio estimators of expected curvature-sign volume
fractions with degree-decay fits, direct zero-locus sampling with a
finite-difference curvature oracle, and a deterministic experiment CLI.
"""

from .curvature import (
    CurvatureKind,
    CurvatureReport,
    FilterVerdict,
    OptimizerOpts,
    ambient_hbc,
    batch_curvature_values,
    curvature_report,
    hb_tilde_filter,
    hbc_at,
    kernel_basis,
)
from .discriminant import (
    DiscCase,
    MinOpts,
    SymBilinear,
    TailResult,
    codim,
    dist_to_discriminant,
    min_sphere_norm,
    tail_experiment,
)
from .errors import NumericalFailure, RegimeError
from .estimator import (
    DecayResult,
    EstimateWithCI,
    decay_curve,
    expected_density_above,
    theorem_exponent,
    volume_identity,
    wishart_check,
)
from .geometry import (
    ZeroLocusPoint,
    empirical_density,
    fd_curvature,
    flat_graph_curvature,
    slice_points,
)
from .jetlaw import (
    CovarianceModel,
    bargmann_fock_kernel,
    cov_bf,
    density_at_zero,
    kostlan_jet_covariance,
    sample_jet,
    sample_jet_batch,
    sample_sym_gaussian,
    sigma_goe,
    sym_gaussian_logdensity,
    sym_pairs,
)
from .kostlan import (
    Convention,
    Dims,
    Jet2,
    JetScale,
    MetricContext,
    PolySystem,
    adapted_frame,
    adapted_frames,
    jet_batch_points,
    jet_batch_systems,
    kernel_normalization,
    kostlan_basis_coeff,
    kostlan_weights,
    physical_jet,
    rescale_jet,
    sample_system,
)
from .streams import BLOCK_SIZE, complex_normal, iter_blocks, stream

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # kostlan
    "Convention", "Dims", "Jet2", "JetScale", "MetricContext", "PolySystem",
    "adapted_frame", "adapted_frames", "jet_batch_points", "jet_batch_systems",
    "kernel_normalization", "kostlan_basis_coeff", "kostlan_weights",
    "physical_jet", "rescale_jet", "sample_system",
    # jetlaw
    "CovarianceModel", "bargmann_fock_kernel", "cov_bf", "density_at_zero",
    "kostlan_jet_covariance", "sample_jet", "sample_jet_batch",
    "sample_sym_gaussian", "sigma_goe", "sym_gaussian_logdensity", "sym_pairs",
    # curvature
    "CurvatureKind", "CurvatureReport", "FilterVerdict", "OptimizerOpts",
    "ambient_hbc", "batch_curvature_values", "curvature_report",
    "hb_tilde_filter", "hbc_at", "kernel_basis",
    # discriminant
    "DiscCase", "MinOpts", "SymBilinear", "TailResult", "codim",
    "dist_to_discriminant", "min_sphere_norm", "tail_experiment",
    # estimator
    "DecayResult", "EstimateWithCI", "decay_curve", "expected_density_above",
    "theorem_exponent", "volume_identity", "wishart_check",
    # geometry
    "ZeroLocusPoint", "empirical_density", "fd_curvature",
    "flat_graph_curvature", "slice_points",
    # plumbing
    "BLOCK_SIZE", "complex_normal", "iter_blocks", "stream",
    "NumericalFailure", "RegimeError",
]
