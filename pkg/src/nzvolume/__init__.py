"""Dehn-filling volumes from Neumann-Zagier data.

The package evaluates the asymptotic volume series of fillings of a 1-cusped
hyperbolic 3-manifold, enumerates lattice points of the associated binary
quadratic form and searches for distinct fillings with equal volume.
"""

__version__ = "0.1.0"

from .nz_volume import (
    Coefficient,
    CoefficientWarning,
    InsufficientCoefficientsError,
    InvalidInputError,
    InvalidMatrixError,
    ManifoldNZData,
    MissingDataError,
    NZVolumeError,
    ThetaEvaluator,
    VolumeValue,
    basis_change_cusp_shape,
    chart_psi,
    chart_term_identity_check,
    filled_volume,
    leading_term,
    tail_estimate,
    theta_truncated,
)
from .quad_form import (
    BinaryQuadraticForm,
    DiagonalizationResult,
    NotPositiveDefiniteError,
    automorphisms,
    form_from_cusp_shape,
    lattice_points_in_band,
    lattice_points_on_level,
    normalize_to_diagonal,
    primitive_only,
    q_value,
)
from .quadratic import QuadraticNumber
from .slopes import Slope, UnimodularMatrix, primitive_slopes
from .equal_volume import (
    CollisionRecord,
    FiberQuery,
    claim_inequality_holds,
    claim_polynomial_form,
    density_count,
    empirical_error_constant,
    fiber_integer_points,
    gap_bound,
    height,
    search_collisions,
)
from .presets import PRESET_NAMES, preset
from .verifier import level_set_discrepancy, obstruction_nullspace, run_invariant_suite
