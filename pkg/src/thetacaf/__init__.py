"""Lattice theta series and compute-and-forward toolkit."""

from . import catalog
from .errors import (
    ConfigError,
    Degenerate,
    DimensionMismatch,
    DomainError,
    EnumerationBudgetExceeded,
    GeneratorUnavailable,
    InconsistentBundle,
    NonIntegerLattice,
    NotNested,
    NumericallyRankDeficient,
    RankDeficient,
    Singular,
    ThetacafError,
    UnknownForm,
    UnknownLattice,
)
from .lattice import (
    Lattice,
    LatticePoint,
    NestedCode,
    build_nested_code,
    closest_point,
    enumerate_within,
    lattice_from_spec,
    load_lattice_file,
    minimal_norm,
    mod_lattice,
    scaled,
    successive_minima,
)
from .matrixkit import (
    column_hnf_square,
    hnf_zero_block,
    int_det,
    orthogonal_zero_block,
    unimodular_inverse,
)
from .theta import (
    ThetaSeries,
    flatness_factor,
    jacobi_theta,
    lattice_gaussian,
    sigma2_to_q,
    theta_approx,
    theta_closed_form,
    theta_exact,
    theta_form_coefficients,
    truncated_sum_baseline,
)
from .cafsim import (
    ChannelInstance,
    DecompositionBundle,
    build_decomposition,
    computation_rate,
    ml_decode,
    ml_metric,
    ml_metric_decomposed,
    mmse_alpha,
    optimal_coeffs,
    sample_channel,
    scaled_equivalence_check,
    sum_lattice_probe,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
