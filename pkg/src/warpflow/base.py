"""Discretized closed base manifolds and their intrinsic operators.

Two variants:

* FlatTorus: uniform periodic grid on T^m, m in {1, 2}, per-axis periods
  (default 1.0). Flat metric, Ricci lower bound rho = 0.
* SphereAxisym: the unit sphere S^m (m >= 2) reduced to the polar angle
  theta in [0, pi], uniform nodes including both poles. Axisymmetric
  fields only; rho = (m-1)/m and Ric_N(v,v) = m-1 for unit directions.

Operators are second-order central stencils; the sphere regularizes the
cot(theta) singularity through the smoothness condition u'(pole) = 0
(ghost-node reflection), which gives Delta u = m u''(pole) at the poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "BaseManifold",
    "ScalarField",
    "flat_torus",
    "sphere_axisym",
    "laplace_beltrami_N",
    "gradient_sq_N",
    "volume_weights",
    "integrate",
    "refine",
]


@dataclass(frozen=True)
class BaseManifold:
    variant: str  # "FlatTorus" | "SphereAxisym"
    dim: int  # m = n - 1
    shape: tuple
    spacing: tuple
    periods: tuple | None
    rho: float
    ric_vv: float

    @property
    def theta_nodes(self) -> np.ndarray:
        if self.variant != "SphereAxisym":
            raise ValueError("theta_nodes only defined for SphereAxisym")
        return np.linspace(0.0, math.pi, self.shape[0])

    def zeros(self) -> "ScalarField":
        return ScalarField(np.zeros(self.shape), self)

    def constant(self, value: float) -> "ScalarField":
        return ScalarField(np.full(self.shape, float(value)), self)


@dataclass(frozen=True)
class ScalarField:
    """Real field aligned with a base grid; values must be finite."""

    values: np.ndarray
    base: BaseManifold

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.base.shape:
            raise ValueError(f"field shape {v.shape} != grid shape {self.base.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def flat_torus(shape, periods=None) -> BaseManifold:
    """Uniform periodic grid on T^m with the given per-axis point counts."""
    shape = tuple(int(s) for s in (shape if hasattr(shape, "__len__") else (shape,)))
    m = len(shape)
    if m not in (1, 2):
        raise ValueError(f"FlatTorus supports m in {{1, 2}}, got {m}")
    if any(s < 4 for s in shape):
        raise ValueError("need at least 4 points per axis")
    if periods is None:
        periods = (1.0,) * m
    periods = tuple(float(p) for p in periods)
    if len(periods) != m or any(p <= 0 for p in periods):
        raise ValueError(f"bad periods {periods}")
    spacing = tuple(p / s for p, s in zip(periods, shape))
    return BaseManifold(
        variant="FlatTorus",
        dim=m,
        shape=shape,
        spacing=spacing,
        periods=periods,
        rho=0.0,
        ric_vv=0.0,
    )


def sphere_axisym(dim: int = 2, nodes: int = 65) -> BaseManifold:
    """Unit S^m reduced to theta in [0, pi]; both poles are grid nodes."""
    if dim < 2:
        raise ValueError(f"SphereAxisym needs m >= 2, got {dim}")
    if nodes < 5:
        raise ValueError("need at least 5 theta nodes")
    dtheta = math.pi / (nodes - 1)
    return BaseManifold(
        variant="SphereAxisym",
        dim=dim,
        shape=(int(nodes),),
        spacing=(dtheta,),
        periods=None,
        rho=(dim - 1) / dim,
        ric_vv=float(dim - 1),
    )


def _check_same_base(base: BaseManifold, field: ScalarField) -> None:
    if field.base is not base and field.base != base:
        raise ValueError("field is defined on a different base manifold")


def _sphere_derivs(u: np.ndarray, dtheta: float):
    """(u', u'') with ghost-node reflection at the poles (u'(pole) = 0)."""
    up = np.empty_like(u)
    upp = np.empty_like(u)
    up[1:-1] = (u[2:] - u[:-2]) / (2.0 * dtheta)
    up[0] = 0.0
    up[-1] = 0.0
    upp[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dtheta * dtheta)
    upp[0] = 2.0 * (u[1] - u[0]) / (dtheta * dtheta)
    upp[-1] = 2.0 * (u[-2] - u[-1]) / (dtheta * dtheta)
    return up, upp


def laplace_beltrami_N(base: BaseManifold, u: ScalarField) -> ScalarField:
    """Intrinsic Laplacian of the base metric."""
    _check_same_base(base, u)
    v = u.values
    if base.variant == "FlatTorus":
        if base.dim == 1:
            _, uxx = kernels.t1_derivs(v, base.spacing[0])
            return ScalarField(uxx, base)
        _, _, uxx, uyy, _ = kernels.t2_derivs(v, base.spacing[0], base.spacing[1])
        return ScalarField(uxx + uyy, base)
    m = base.dim
    dtheta = base.spacing[0]
    theta = base.theta_nodes
    up, upp = _sphere_derivs(v, dtheta)
    out = np.empty_like(v)
    out[1:-1] = upp[1:-1] + (m - 1) / np.tan(theta[1:-1]) * up[1:-1]
    out[0] = m * upp[0]
    out[-1] = m * upp[-1]
    return ScalarField(out, base)


def gradient_sq_N(base: BaseManifold, u: ScalarField) -> ScalarField:
    """Pointwise squared g_N-norm of the intrinsic gradient."""
    _check_same_base(base, u)
    v = u.values
    if base.variant == "FlatTorus":
        if base.dim == 1:
            ux, _ = kernels.t1_derivs(v, base.spacing[0])
            return ScalarField(ux * ux, base)
        ux, uy, _, _, _ = kernels.t2_derivs(v, base.spacing[0], base.spacing[1])
        return ScalarField(ux * ux + uy * uy, base)
    up, _ = _sphere_derivs(v, base.spacing[0])
    return ScalarField(up * up, base)


def volume_weights(base: BaseManifold) -> np.ndarray:
    """Quadrature weights: uniform dx^m on the torus; trapezoid
    Omega_{m-1} sin^{m-1}(theta) dtheta on the sphere (zero at the poles)."""
    if base.variant == "FlatTorus":
        cell = math.prod(base.spacing)
        return np.full(base.shape, cell)
    m = base.dim
    omega = 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)
    w = omega * np.sin(base.theta_nodes) ** (m - 1) * base.spacing[0]
    w[0] = 0.0  # exact pole zeros (sin(pi) only vanishes to roundoff)
    w[-1] = 0.0
    return w


def integrate(base: BaseManifold, field: ScalarField) -> float:
    _check_same_base(base, field)
    return float(np.sum(field.values * volume_weights(base)))


def refine(base: BaseManifold) -> BaseManifold:
    """Same manifold at doubled resolution (for convergence studies)."""
    if base.variant == "FlatTorus":
        return flat_torus(tuple(2 * s for s in base.shape), base.periods)
    return sphere_axisym(base.dim, 2 * (base.shape[0] - 1) + 1)
