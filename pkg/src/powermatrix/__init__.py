"""Truncated formal power series, power matrices and formal Loewner evolution."""

from .errors import *  # noqa: F401,F403
from .series import (
    Center,
    FormalSeries,
    Tolerance,
    DEFAULT_TOL,
    comp_inverse,
    compose,
    constant,
    derivative,
    identity,
    make_series,
    max_abs_difference,
    multiply,
    polynomial,
    power,
    reciprocal,
    series_close,
    transform_zero_infinity,
    zero_series,
)
from .pmatrix import (
    MatrixBlock,
    PowerMatrixBlock,
    RowRelationReport,
    Window,
    first_row_series,
    mat_mul,
    power_matrix,
    sandwich_identity_check,
    sandwich_residual,
    verify_row_relations,
)
from .witt import (
    InfMatrixBlock,
    basis_element,
    bracket_matrix,
    bracket_series,
    commutator,
    exp_bound,
    exp_derivation,
    exp_inverse,
    infinitesimal_matrix,
    interior_mask,
    mexp,
    mlog,
    power_bound,
    unipotent_log,
)
from .loewner import (
    ApproxPlan,
    Kind,
    LoewnerProblem,
    evolve_const,
    evolve_ode_const,
    evolve_pde_const,
    evolve_truncated_polynomial,
    exponential_tail_bound,
    integrate_coefficient_ode,
    recover_ode_generator,
    recover_pde_generator,
    taylor_degree_for_problem,
    taylor_degree_for_tolerance,
)
