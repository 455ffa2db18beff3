"""Closed discrete planar curves and the tri-Hamiltonian periodic Toda lattice.

The canonical bracket ``{x_i, y_i} = 1/2`` on the vertices of a closed
polygon induces, through the Flaschka-Manakov variables

    a_k = g_k**-2,    b_k = u_k / (g_{k-1} g_k) - lam,

a bracket that is quadratic in the spectral parameter lam; its three
coefficients are the Toda brackets P1, P2 and P3 of degrees one to three.
"""

from .brackets import (
    P1,
    P2,
    P3,
    BracketTable,
    FMState,
    GradedBrackets,
    StructureFunctions,
    canonical_bracket,
    closed_form_bracket,
    closed_form_table,
    fd_gradients,
    fm_gradients,
    fm_map,
    full_bracket,
    jacobi_residual,
    lambda_grade,
    numerical_bracket_table,
    realize_state,
    verify_theorem2,
)
from .curves import (
    CurveState,
    DetInvariants,
    LaxData,
    compute_invariants,
    frame,
    generate_curve,
    hexagon,
    lax_matrices,
    monodromy,
    perturbed_polygon,
    reconstruct_curve,
    regular_polygon,
)
from .dynamics import (
    Trajectory,
    consistency_check,
    fm_spectral_invariants,
    integrate,
    spectral_invariants,
    toda_flow_on_curve,
    toda_vector_field_ab,
    trace_bracket,
)
from .errors import (
    DegeneracyCrossing,
    DegenerateInvariant,
    DegenerateSum,
    GenerationFailure,
    SolverFailure,
    TodaCurveError,
    UnsupportedSize,
)
from .flows import (
    FlowCoefficients,
    VMatrixEntries,
    alpha_beta_from_v,
    curve_velocity,
    g_dot,
    u_dot,
    v_matrix,
    zero_curvature_residual,
)

__version__ = "0.1.0"
