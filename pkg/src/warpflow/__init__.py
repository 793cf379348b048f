"""warpflow: graphical mean curvature flow in warped product manifolds.

A desk-scale numerical laboratory for flows of closed hypersurfaces that
are geodesic graphs over a totally geodesic slice: warp admissibility
certification, the de Sitter-Schwarzschild construction, parallel-slice
barrier ODEs with their conservation law, an explicit graph-flow solver
with angle/containment monitors, and identity-residual validation.
"""

__version__ = "0.1.0"

from .barrier import BarrierSolution, f_bar_closed_form, solve_barrier
from .base import (
    BaseManifold,
    ScalarField,
    flat_torus,
    gradient_sq_N,
    integrate,
    laplace_beltrami_N,
    refine,
    sphere_axisym,
    volume_weights,
)
from .flow import (
    DiagnosticsRecord,
    FlowConfig,
    FlowRun,
    inequality_slack_field,
    full_identity_residuals,
    nonparametric_rate,
    residual_cor26,
    residual_thm31,
    run_flow,
    step,
    theta_sq_rate,
)
from .geometry import (
    GraphGeometry,
    GraphState,
    IdentityResiduals,
    compute_second_fundamental_form,
    compute_theta,
    duality_gap,
    graph_geometry,
    identity_residuals,
    mean_curvature_route_B,
    ricci_ambient_nn,
    route_gap,
    surface_laplacian,
)
from .initial import build_initial, calibrated_sine_product, random_smooth_graph
from .warp import (
    ConditionsReport,
    DssParameters,
    DssReport,
    WarpError,
    WarpingFunction,
    angle_threshold,
    build_dss_warp,
    check_conditions,
    make_builtin_warp,
)
