"""Hot stencil kernels for the periodic 2D torus, with selectable backend.

The explicit flow loop evaluates these at every Runge-Kutta stage, so they
dominate runtime at 64^2/128^2 resolution. Each kernel has a pure-numpy
reference implementation here and a numba @njit twin in kernels_numba.py;
the active backend is chosen once at import from the environment:

    WARPFLOW_NUMBA=auto   use numba when importable (default)
    WARPFLOW_NUMBA=1      require numba, fail loudly if missing
    WARPFLOW_NUMBA=0      force the pure-numpy path

The 1D torus and axisymmetric-sphere paths run on O(100)-point grids and
are served by numpy directly (see geometry.py). Grid convention:
u[ix, iy], axis 0 is x, axis 1 is y, both periodic.

All kernels take the warp samples h = h(u), hp = h'(u) as arrays so that
closed-form and tabulated warps are treated uniformly; warp evaluation
stays outside the jitted code.

benchmarks/kernel_bench.py compares the two backends.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "t2_derivs",
    "t2_graph_fields",
    "t2_flow_rhs",
    "t2_surface_laplacian",
    "t1_derivs",
]


def _np_t2_derivs(u, dx, dy):
    """Periodic central first/second/mixed derivatives on the 2D torus."""
    up_x = np.roll(u, -1, axis=0)
    um_x = np.roll(u, 1, axis=0)
    up_y = np.roll(u, -1, axis=1)
    um_y = np.roll(u, 1, axis=1)
    ux = (up_x - um_x) / (2.0 * dx)
    uy = (up_y - um_y) / (2.0 * dy)
    uxx = (up_x - 2.0 * u + um_x) / (dx * dx)
    uyy = (up_y - 2.0 * u + um_y) / (dy * dy)
    uxy = (
        np.roll(up_x, -1, axis=1)
        - np.roll(up_x, 1, axis=1)
        - np.roll(um_x, -1, axis=1)
        + np.roll(um_x, 1, axis=1)
    ) / (4.0 * dx * dy)
    return ux, uy, uxx, uyy, uxy


def _np_t2_graph_fields(u, h, hp, dx, dy):
    """Angle, mean curvature and |A|^2 of the graph over the flat 2-torus.

    Shape operator route: a_ij = Theta * (-u_ij + h h' delta_ij + 2(h'/h) u_i u_j)
    contracted with the inverse induced metric. Returns (theta, H, A_sq).
    """
    ux, uy, uxx, uyy, uxy = _np_t2_derivs(u, dx, dy)
    h2 = h * h
    lam2 = h2 + ux * ux + uy * uy
    theta = h / np.sqrt(lam2)
    w = hp / h
    a11 = theta * (-uxx + h * hp + 2.0 * w * ux * ux)
    a12 = theta * (-uxy + 2.0 * w * ux * uy)
    a22 = theta * (-uyy + h * hp + 2.0 * w * uy * uy)
    det = h2 * lam2
    gi11 = (h2 + uy * uy) / det
    gi12 = -(ux * uy) / det
    gi22 = (h2 + ux * ux) / det
    m11 = gi11 * a11 + gi12 * a12
    m12 = gi11 * a12 + gi12 * a22
    m21 = gi12 * a11 + gi22 * a12
    m22 = gi12 * a12 + gi22 * a22
    H = m11 + m22
    a_sq = m11 * m11 + m22 * m22 + 2.0 * m12 * m21
    return theta, H, a_sq


def _np_t2_flow_rhs(u, h, hp, dx, dy):
    """Non-parametric flow speed -H/Theta and the grid minimum of Theta."""
    theta, H, _ = _np_t2_graph_fields(u, h, hp, dx, dy)
    return -H / theta, float(theta.min())


def _np_t2_surface_laplacian(w, u, h, dx, dy):
    """Divergence-form Laplace-Beltrami of the induced metric applied to w.

    Centered flux differences: P^ij = sqrt(gamma) gamma^ij at nodes,
    averaged to faces; cross-derivatives at faces average the two nodal
    central derivatives.
    """
    ux, uy, _, _, _ = _np_t2_derivs(u, dx, dy)
    h2 = h * h
    lam2 = h2 + ux * ux + uy * uy
    sg = h * np.sqrt(lam2)
    p11 = (h2 + uy * uy) / sg
    p12 = -(ux * uy) / sg
    p22 = (h2 + ux * ux) / sg

    wx = (np.roll(w, -1, axis=0) - np.roll(w, 1, axis=0)) / (2.0 * dx)
    wy = (np.roll(w, -1, axis=1) - np.roll(w, 1, axis=1)) / (2.0 * dy)

    fx = 0.5 * (p11 + np.roll(p11, -1, axis=0)) * (np.roll(w, -1, axis=0) - w) / dx
    fx += 0.5 * (p12 + np.roll(p12, -1, axis=0)) * 0.5 * (wy + np.roll(wy, -1, axis=0))
    fy = 0.5 * (p22 + np.roll(p22, -1, axis=1)) * (np.roll(w, -1, axis=1) - w) / dy
    fy += 0.5 * (p12 + np.roll(p12, -1, axis=1)) * 0.5 * (wx + np.roll(wx, -1, axis=1))

    div = (fx - np.roll(fx, 1, axis=0)) / dx + (fy - np.roll(fy, 1, axis=1)) / dy
    return div / sg


def _np_t1_derivs(u, dx):
    up = np.roll(u, -1)
    um = np.roll(u, 1)
    return (up - um) / (2.0 * dx), (up - 2.0 * u + um) / (dx * dx)


def _resolve_backend() -> str:
    flag = os.environ.get("WARPFLOW_NUMBA", "auto").strip().lower()
    if flag in ("0", "off", "false", "no"):
        return "numpy"
    if flag in ("1", "on", "true", "yes", "require"):
        from . import kernels_numba  # noqa: F401  (raises if numba missing)

        return "numba"
    try:
        from . import kernels_numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from . import kernels_numba as _nb

    t2_derivs = _nb.t2_derivs
    t2_graph_fields = _nb.t2_graph_fields
    t2_flow_rhs = _nb.t2_flow_rhs
    t2_surface_laplacian = _nb.t2_surface_laplacian
else:
    t2_derivs = _np_t2_derivs
    t2_graph_fields = _np_t2_graph_fields
    t2_flow_rhs = _np_t2_flow_rhs
    t2_surface_laplacian = _np_t2_surface_laplacian

t1_derivs = _np_t1_derivs

# reference implementations, importable regardless of backend (benchmark, tests)
numpy_impls = {
    "t2_derivs": _np_t2_derivs,
    "t2_graph_fields": _np_t2_graph_fields,
    "t2_flow_rhs": _np_t2_flow_rhs,
    "t2_surface_laplacian": _np_t2_surface_laplacian,
}
