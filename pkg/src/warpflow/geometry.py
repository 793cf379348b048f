"""Geometry of geodesic graphs S = {(x, u(x))} in the warped metric.

For the metric dr^2 + h^2(r) g_N and a height field u on the base:

  tangent frame   e_i = d_i + u_i d_r
  induced metric  gamma_ij = h^2 (g_N)_ij + u_i u_j
  unit normal     nu = Theta (d_r - h^{-2} grad_N u),  <nu, d_r> = Theta > 0
  angle           Theta = (1 + h^{-2} |grad_N u|^2)^{-1/2}
  shape operator  a_ij = Theta (-(Hess_N u)_ij + h h' (g_N)_ij + 2 (h'/h) u_i u_j)

Orientation: the sign of a_ij is pinned so that the parallel slice at
height a > 0 has H = (n-1) h'(a)/h(a) > 0, which makes the flow move it
toward the totally geodesic slice. The mean curvature convention is the
sum of principal curvatures.

Two independent mean-curvature routes are provided: route A contracts the
shape operator; route B inverts the height identity
Delta_S u = (h'/h)(n - 2 + Theta^2) - H Theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .base import BaseManifold, ScalarField, _sphere_derivs
from .warp import WarpingFunction

__all__ = [
    "GraphState",
    "GraphGeometry",
    "IdentityResiduals",
    "compute_theta",
    "compute_second_fundamental_form",
    "surface_laplacian",
    "mean_curvature_route_B",
    "ricci_ambient_nn",
    "graph_geometry",
    "identity_residuals",
    "duality_gap",
    "route_gap",
    "base_grad",
    "base_grad_pairing",
    "induced_pairing",
    "radial_pairing",
    "GraphicalityError",
]

THETA_FLOOR_DEFAULT = 1e-3


class GraphicalityError(RuntimeError):
    """Angle function at or below the guard threshold."""


@dataclass(frozen=True)
class GraphState:
    """Height field over the base at flow time t; the evolving hypersurface."""

    u: ScalarField
    t: float
    warp: WarpingFunction
    base: BaseManifold

    def __post_init__(self):
        if self.u.base != self.base:
            raise ValueError("height field lives on a different base grid")
        v = self.u.values
        if float(np.max(v)) >= self.warp.r_bar:
            raise ValueError("height field leaves the warp domain (above)")
        lo = self.warp.r_min - 1e-12
        if float(np.min(v)) < lo:
            raise ValueError("height field leaves the warp domain (below)")

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return self.base.dim + 1

    def warp_arrays(self, second: bool = True):
        u = self.u.values
        h = np.asarray(self.warp.h(u), dtype=float)
        hp = np.asarray(self.warp.h_prime(u), dtype=float)
        if not second:
            return h, hp
        hpp = np.asarray(self.warp.h_double_prime(u), dtype=float)
        return h, hp, hpp


@dataclass(frozen=True)
class GraphGeometry:
    theta: ScalarField
    H: ScalarField
    A_sq: ScalarField
    surf_lap_u: ScalarField


@dataclass(frozen=True)
class IdentityResiduals:
    """Pointwise defects of the static identities on a graph state."""

    prop_delta_u: ScalarField  # Delta_S u - (h'/h)(n-2+Theta^2) + H Theta
    ricci_nn: ScalarField  # ambient radial Ricci -(n-1) h''/h along the graph
    theta_sq_evolution: ScalarField | None = None
    inequality_slack: ScalarField | None = None


# --- raw-array geometry per base variant -------------------------------------


def _t1_fields(u, h, hp, dx):
    ux, uxx = kernels.t1_derivs(u, dx)
    lam2 = h * h + ux * ux
    theta = h / np.sqrt(lam2)
    a11 = theta * (-uxx + h * hp + 2.0 * (hp / h) * ux * ux)
    H = a11 / lam2
    return theta, H, H * H


def _sphere_fields(u, h, hp, theta_nodes, dtheta, m):
    up, upp = _sphere_derivs(u, dtheta)
    lam2 = h * h + up * up
    ang = h / np.sqrt(lam2)
    kap_t = ang * (-upp + h * hp + 2.0 * (hp / h) * up * up) / lam2
    kap_a = np.empty_like(u)
    kap_a[1:-1] = (
        ang[1:-1]
        * (h[1:-1] * hp[1:-1] - up[1:-1] / np.tan(theta_nodes[1:-1]))
        / (h[1:-1] * h[1:-1])
    )
    kap_a[0] = kap_t[0]
    kap_a[-1] = kap_t[-1]
    H = kap_t + (m - 1) * kap_a
    a_sq = kap_t * kap_t + (m - 1) * kap_a * kap_a
    return ang, H, a_sq


def _raw_fields(state: GraphState):
    """(theta, H, A_sq) arrays for any base variant."""
    u = state.u.values
    h, hp = state.warp_arrays(second=False)
    b = state.base
    if b.variant == "FlatTorus":
        if b.dim == 2:
            return kernels.t2_graph_fields(u, h, hp, b.spacing[0], b.spacing[1])
        return _t1_fields(u, h, hp, b.spacing[0])
    return _sphere_fields(u, h, hp, b.theta_nodes, b.spacing[0], b.dim)


def _t1_surface_laplacian(w, u, h, dx):
    ux, _ = kernels.t1_derivs(u, dx)
    lam = np.sqrt(h * h + ux * ux)
    p = 1.0 / lam
    flux = 0.5 * (p + np.roll(p, -1)) * (np.roll(w, -1) - w) / dx
    return (flux - np.roll(flux, 1)) / (dx * lam)


def _sphere_surface_laplacian(w, u, warp, theta_nodes, dtheta, m):
    up, _ = _sphere_derivs(u, dtheta)
    h = np.asarray(warp.h(u), dtype=float)
    # conductivity at interval midpoints; poles handled by the smooth limit
    u_mid = 0.5 * (u[:-1] + u[1:])
    th_mid = 0.5 * (theta_nodes[:-1] + theta_nodes[1:])
    up_mid = (u[1:] - u[:-1]) / dtheta
    h_mid = np.asarray(warp.h(u_mid), dtype=float)
    cond = h_mid ** (m - 1) * np.sin(th_mid) ** (m - 1) / np.sqrt(h_mid**2 + up_mid**2)
    flux = cond * (w[1:] - w[:-1]) / dtheta
    jac = h ** (m - 1) * np.sin(theta_nodes) ** (m - 1) * np.sqrt(h * h + up * up)
    out = np.empty_like(w)
    out[1:-1] = (flux[1:] - flux[:-1]) / (dtheta * jac[1:-1])
    out[0] = 2.0 * m * (w[1] - w[0]) / (dtheta * dtheta * h[0] * h[0])
    out[-1] = 2.0 * m * (w[-2] - w[-1]) / (dtheta * dtheta * h[-1] * h[-1])
    return out


def base_grad(base: BaseManifold, values: np.ndarray):
    """Coordinate components of the intrinsic gradient (tuple per axis)."""
    if base.variant == "FlatTorus":
        if base.dim == 1:
            ux, _ = kernels.t1_derivs(values, base.spacing[0])
            return (ux,)
        ux, uy, _, _, _ = kernels.t2_derivs(values, base.spacing[0], base.spacing[1])
        return (ux, uy)
    up, _ = _sphere_derivs(values, base.spacing[0])
    return (up,)


def base_grad_pairing(base: BaseManifold, ga, gb) -> np.ndarray:
    """<grad a, grad b>_{g_N} from coordinate gradient components.

    Axisymmetric sphere fields have only the theta component, and
    g_N(d_theta, d_theta) = 1, so the flat dot product applies everywhere.
    """
    out = ga[0] * gb[0]
    for i in range(1, len(ga)):
        out = out + ga[i] * gb[i]
    return out


def induced_pairing(state: GraphState, ga, gb) -> np.ndarray:
    """gamma^{ij} a_i b_j from coordinate gradient components of a and b."""
    h, _ = state.warp_arrays(second=False)
    gu = base_grad(state.base, state.u.values)
    lam2 = h * h + base_grad_pairing(state.base, gu, gu)
    dot_ab = base_grad_pairing(state.base, ga, gb)
    dot_ua = base_grad_pairing(state.base, gu, ga)
    dot_ub = base_grad_pairing(state.base, gu, gb)
    return (dot_ab - dot_ua * dot_ub / lam2) / (h * h)


def radial_pairing(state: GraphState, gw) -> np.ndarray:
    """<n, grad_S w> = gamma^{ij} u_i w_j: pairing of the tangential part of
    the radial field with the induced gradient of w."""
    gu = base_grad(state.base, state.u.values)
    return induced_pairing(state, gu, gw)


# --- public operations --------------------------------------------------------


def compute_theta(state: GraphState) -> ScalarField:
    """Angle function Theta = (1 + h^{-2} |grad_N u|^2)^{-1/2} in (0, 1]."""
    theta, _, _ = _raw_fields(state)
    return ScalarField(theta, state.base)


def compute_second_fundamental_form(state: GraphState):
    """(|A|^2, H) by the shape-operator route (route A)."""
    _, H, a_sq = _raw_fields(state)
    return ScalarField(a_sq, state.base), ScalarField(H, state.base)


def surface_laplacian(state: GraphState, w: ScalarField) -> ScalarField:
    """Divergence-form Laplace-Beltrami of the induced metric applied to w."""
    if w.base != state.base:
        raise ValueError("field lives on a different base grid")
    u = state.u.values
    b = state.base
    if b.variant == "FlatTorus":
        h, _ = state.warp_arrays(second=False)
        if b.dim == 2:
            out = kernels.t2_surface_laplacian(w.values, u, h, b.spacing[0], b.spacing[1])
        else:
            out = _t1_surface_laplacian(w.values, u, h, b.spacing[0])
        return ScalarField(out, b)
    out = _sphere_surface_laplacian(
        w.values, u, state.warp, b.theta_nodes, b.spacing[0], b.dim
    )
    return ScalarField(out, b)


def mean_curvature_route_B(
    state: GraphState, theta_floor: float = THETA_FLOOR_DEFAULT
) -> ScalarField:
    """H from the height identity: [(h'/h)(n-2+Theta^2) - Delta_S u] / Theta.

    Independent cross-check of the shape-operator route; refuses to divide
    by angles at or below the guard threshold.
    """
    theta, _, _ = _raw_fields(state)
    tmin = float(theta.min())
    if tmin < theta_floor:
        raise GraphicalityError(f"min Theta = {tmin} below guard {theta_floor}")
    h, hp = state.warp_arrays(second=False)
    lap_u = surface_laplacian(state, state.u).values
    n = state.n
    H = ((hp / h) * (n - 2 + theta * theta) - lap_u) / theta
    return ScalarField(H, state.base)


def ricci_ambient_nn(warp: WarpingFunction, r: float, n: int) -> float:
    """Ambient Ricci curvature in the radial direction: -(n-1) h''(r)/h(r)."""
    warp.require_inside(r)
    return float(-(n - 1) * warp.h_double_prime(r) / warp.h(r))


def graph_geometry(state: GraphState) -> GraphGeometry:
    """All pointwise geometric fields of the graph in one pass."""
    theta, H, a_sq = _raw_fields(state)
    lap_u = surface_laplacian(state, state.u)
    b = state.base
    return GraphGeometry(
        theta=ScalarField(theta, b),
        H=ScalarField(H, b),
        A_sq=ScalarField(a_sq, b),
        surf_lap_u=lap_u,
    )


def duality_gap(state: GraphState) -> float:
    """max |gamma^{ij} u_i u_j + Theta^2 - 1|: the angle-gradient duality
    defect, identically zero in exact arithmetic for these discretizations."""
    theta, _, _ = _raw_fields(state)
    gu = base_grad(state.base, state.u.values)
    grad_u_sq_induced = induced_pairing(state, gu, gu)
    return float(np.max(np.abs(grad_u_sq_induced + theta * theta - 1.0)))


def route_gap(state: GraphState, theta_floor: float = THETA_FLOOR_DEFAULT) -> float:
    """max |H_routeA - H_routeB|: disagreement of the two mean-curvature routes."""
    _, H = compute_second_fundamental_form(state)
    HB = mean_curvature_route_B(state, theta_floor)
    return float(np.max(np.abs(H.values - HB.values)))


def identity_residuals(state: GraphState) -> IdentityResiduals:
    """Static identity defects: the height identity and the radial Ricci."""
    theta, H, _ = _raw_fields(state)
    h, hp, hpp = state.warp_arrays()
    lap_u = surface_laplacian(state, state.u).values
    n = state.n
    res = lap_u - (hp / h) * (n - 2 + theta * theta) + H * theta
    ric = -(n - 1) * hpp / h
    return IdentityResiduals(
        prop_delta_u=ScalarField(res, state.base),
        ricci_nn=ScalarField(ric, state.base),
    )
