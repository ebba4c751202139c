"""Exact drag bounds for infinite-cavity flow at a given lift coefficient.

The package evaluates the integral functionals ``I`` and ``J`` that determine
lift and drag in the Helmholtz-Kirchhoff cavity model, builds the closed-form
extremals of ``J`` at fixed ``I``, and turns them into ``C_Dmin`` / ``C_Dmax``
and lift-to-drag bounds. A brute-force discrete oracle cross-checks the
extremal curves.
"""

from .bounds import (
    C_D_AT_C_L_MAX,
    C_L_MAX,
    Band,
    BoundPoint,
    DragMaxConfig,
    FlatPlatePoint,
    SplitSpec,
    bound_curve,
    bound_point,
    bound_points,
    c_d_max,
    c_d_min,
    classify_point,
    flat_plate,
    flat_plate_curve,
    kappa_max,
    kappa_min,
)
from .errors import (
    BrillouinViolationError,
    CavityBoundsError,
    ConvergenceError,
    DegenerateDistributionError,
    DomainError,
    InvalidDistributionError,
)
from .extremals import (
    Branch,
    ExtremalDescriptor,
    J_max_curve,
    J_min_curve,
    build_max_extremal,
    build_min_extremal,
    euler_residual,
    q_max_const,
    q_star,
    transversality_residual,
)
from .functionals import (
    BrillouinReport,
    Coefficients,
    LambdaFunction,
    QuadratureConfig,
    VelocityDistribution,
    assemble_coefficients,
    eval_I,
    eval_I_lambda,
    eval_J,
    eval_J_lambda,
    lambda_from_u,
    read_distribution_csv,
    u_from_lambda,
    validate_brillouin,
    write_distribution_csv,
)
from .oracle import DiscreteDistribution, compare_report, discrete_I, discrete_J, tolerance
from .oracle import optimize as oracle_optimize

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
