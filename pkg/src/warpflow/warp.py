"""Warping functions h(r) and their admissibility certificates.

A warped product metric dr^2 + h(r)^2 g_N is admissible for the flow when

  (C1) h(0) = h0 and h'(0) = 0   (h0 = 1 for the built-in families),
  (C2) h' > 0 for r > 0 and h' < 0 for r < 0,
  (C3) h h'' - h'^2 + rho >= c   with c = max(0, rho),

where rho is the Ricci lower-bound constant of the base. The module also
builds the de Sitter-Schwarzschild warp from its lapse profile
omega(s) = 1 - m s^(2-n) - kappa s^2 by the change of variable
dr/ds = omega(s)^(-1/2), producing a tabulated warp with h(r) = s,
h'(r) = sqrt(omega(s)), h''(r) = omega'(s)/2.

Normalization: constructions with h(0) != 1 (the dSS family has
h(0) = s_lower) are handled by recording h0 = h(0); the graphing-angle
threshold becomes sqrt(1 - h0^2/h^2(a0)).

Note on c: for a hyperbolic base with rho = -1/2 the definition
c = max(0, rho) gives c = 0 (and a (C3) margin of 1/2 for the cosh warp);
some references quote c = 1/2 for that example, but this module applies
the definition literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

__all__ = [
    "WarpingFunction",
    "ConditionsReport",
    "DssParameters",
    "DssReport",
    "WarpError",
    "make_builtin_warp",
    "check_conditions",
    "angle_threshold",
    "build_dss_warp",
    "tabulated_warp_from_columns",
]

_DOMAIN_TOL = 1e-12


class WarpError(ValueError):
    """Invalid warp construction or evaluation outside the warp domain."""


@dataclass(frozen=True)
class WarpingFunction:
    """Evaluable triple (h, h', h'') on an interval around the base slice.

    ``domain`` is the open interval (-r_bar, r_bar), or the half-open
    [0, r_bar) when ``half_open`` is set (the dSS construction). All three
    callables accept and return numpy arrays or scalars. Instances are
    immutable and safe to share across threads.
    """

    h: Callable
    h_prime: Callable
    h_double_prime: Callable
    r_bar: float
    kind: str = "closed_form"  # closed_form | tabulated
    half_open: bool = False
    h0: float = 1.0
    provenance: dict = field(default_factory=dict)
    # tabulated kind only: strictly increasing node grid in r + rule name
    r_nodes: np.ndarray | None = None
    interpolation: str | None = None

    @property
    def r_min(self) -> float:
        return 0.0 if self.half_open else -self.r_bar

    def contains(self, r) -> bool:
        r = np.asarray(r, dtype=float)
        return bool(np.all(r >= self.r_min - _DOMAIN_TOL) and np.all(r < self.r_bar))

    def require_inside(self, r) -> None:
        if not self.contains(r):
            raise WarpError(
                f"radius outside warp domain [{self.r_min}, {self.r_bar})"
                if self.half_open
                else f"radius outside warp domain (-{self.r_bar}, {self.r_bar})"
            )

    def eval_all(self, r):
        """h, h', h'' at r, validated against the domain."""
        self.require_inside(r)
        return self.h(r), self.h_prime(r), self.h_double_prime(r)


@dataclass(frozen=True)
class ConditionsReport:
    """Outcome of certifying (C1)-(C3) on a probe grid."""

    rho: float
    c: float
    h0: float
    c1_pass: bool
    c2_pass: bool
    c3_pass: bool
    c3_margin: float
    samples: np.ndarray  # rows (r, h, h', h'', c3_value)
    numerical_tolerance: float

    @property
    def all_pass(self) -> bool:
        return self.c1_pass and self.c2_pass and self.c3_pass

    def angle_threshold(self, a0: float) -> float:
        """Minimum initial graphing angle guaranteeing convergence from height a0."""
        h_a0 = float(np.interp(a0, self.samples[:, 0], self.samples[:, 1]))
        return math.sqrt(max(0.0, 1.0 - self.h0**2 / h_a0**2))

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "c": self.c,
            "h0": self.h0,
            "c1_pass": self.c1_pass,
            "c2_pass": self.c2_pass,
            "c3_pass": self.c3_pass,
            "c3_margin": self.c3_margin,
            "all_pass": self.all_pass,
            "numerical_tolerance": self.numerical_tolerance,
            "samples": {
                "columns": ["r", "h", "h_prime", "h_double_prime", "c3_value"],
                "rows": self.samples.tolist(),
            },
        }


def make_builtin_warp(family: str, params=(), r_max: float = math.inf) -> WarpingFunction:
    """Closed-form warp from the built-in catalog.

    cosh:      h(r) = cosh(r), entire line (pass r_max=inf).
    quadratic: h(r) = 1 + alpha r^2 with params = [alpha], alpha > 0.

    Both satisfy h(0) = 1, h'(0) = 0 by construction.
    """
    if not (r_max > 0):
        raise WarpError(f"r_max must be positive, got {r_max}")
    if family == "cosh":
        if params:
            raise WarpError("cosh family takes no parameters")
        return WarpingFunction(
            h=np.cosh,
            h_prime=np.sinh,
            h_double_prime=np.cosh,
            r_bar=float(r_max),
            provenance={"family": "cosh", "params": []},
        )
    if family == "quadratic":
        if len(params) != 1:
            raise WarpError("quadratic family takes params=[alpha]")
        alpha = float(params[0])
        if alpha <= 0:
            raise WarpError(f"quadratic warp needs alpha > 0, got {alpha}")
        if not math.isfinite(r_max):
            raise WarpError("quadratic warp needs a finite r_max")
        return WarpingFunction(
            h=lambda r: 1.0 + alpha * np.asarray(r, dtype=float) ** 2,
            h_prime=lambda r: 2.0 * alpha * np.asarray(r, dtype=float),
            h_double_prime=lambda r: np.full_like(np.asarray(r, dtype=float), 2.0 * alpha),
            r_bar=float(r_max),
            provenance={"family": "quadratic", "params": [alpha]},
        )
    raise WarpError(f"unknown warp family {family!r}")


def check_conditions(
    warp: WarpingFunction,
    rho: float,
    r_probe: np.ndarray,
    numerical_tolerance: float = 1e-9,
) -> ConditionsReport:
    """Certify (C1)-(C3) for ``warp`` against the Ricci constant ``rho``.

    Sample-based on the probe grid (which must lie inside the domain and
    contain r = 0); symbolic verification is out of scope.
    """
    r = np.asarray(r_probe, dtype=float)
    if r.size == 0:
        raise WarpError("empty probe grid")
    warp.require_inside(r)
    if not np.any(np.isclose(r, 0.0, atol=1e-15)):
        raise WarpError("probe grid must contain r = 0")

    h, hp, hpp = warp.h(r), warp.h_prime(r), warp.h_double_prime(r)
    if np.any(h <= 0):
        raise WarpError("warping function must be positive on the probe grid")
    c = max(0.0, rho)
    c3 = h * hpp - hp**2 + rho - c
    margin = float(np.min(c3))

    h_at0 = float(warp.h(0.0))
    hp_at0 = float(warp.h_prime(0.0))
    c1 = abs(h_at0 - warp.h0) <= numerical_tolerance and abs(hp_at0) <= numerical_tolerance

    pos = r > _DOMAIN_TOL
    neg = r < -_DOMAIN_TOL
    c2 = bool(np.all(hp[pos] > 0.0)) and bool(np.all(hp[neg] < 0.0))

    samples = np.column_stack([r, h, hp, hpp, c3])
    return ConditionsReport(
        rho=float(rho),
        c=c,
        h0=warp.h0,
        c1_pass=bool(c1),
        c2_pass=c2,
        c3_pass=margin >= -numerical_tolerance,
        c3_margin=margin,
        samples=samples,
        numerical_tolerance=numerical_tolerance,
    )


def angle_threshold(warp: WarpingFunction, a0: float) -> float:
    """sqrt(1 - h0^2 / h^2(a0)), clamped at 0 against roundoff.

    The initial-angle bound below which graphicality is no longer
    guaranteed to persist from initial height a0.
    """
    warp.require_inside(a0)
    h_a0 = float(warp.h(a0))
    return math.sqrt(max(0.0, 1.0 - warp.h0**2 / h_a0**2))


# --- de Sitter-Schwarzschild -------------------------------------------------


@dataclass(frozen=True)
class DssParameters:
    """Lapse-profile parameters omega(s) = 1 - m s^(2-n) - kappa s^2."""

    n: int
    mass: float
    kappa: float

    def __post_init__(self):
        if self.n < 3:
            raise WarpError(f"ambient dimension must be >= 3, got {self.n}")
        if self.mass <= 0:
            raise WarpError(f"mass must be positive, got {self.mass}")

    def omega(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 - self.mass * s ** (2 - self.n) - self.kappa * s**2

    def omega_prime(self, s):
        s = np.asarray(s, dtype=float)
        return self.mass * (self.n - 2) * s ** (1 - self.n) - 2.0 * self.kappa * s

    @property
    def s_star(self) -> float:
        """(m n / 2)^(1/(n-2)): the height where h h'' - h'^2 changes sign."""
        return (self.mass * self.n / 2.0) ** (1.0 / (self.n - 2))

    @property
    def admissible(self) -> bool:
        """kappa <= 0, or n^n m^2 kappa^(n-2) < 4 (n-2)^(n-2)."""
        if self.kappa <= 0:
            return True
        lhs = self.n**self.n * self.mass**2 * self.kappa ** (self.n - 2)
        return lhs < 4.0 * (self.n - 2) ** (self.n - 2)


@dataclass(frozen=True)
class DssReport:
    """Roots, admissibility and identity verification for a built dSS warp."""

    n: int
    mass: float
    kappa: float
    s_lower: float
    s_upper: float  # inf when kappa <= 0
    s_star: float
    s_cap: float
    r_max: float
    h0: float
    grid_size: int
    identity_max_err: float  # |(h h''-h'^2) - (m n s^(2-n)/2 - 1)| over the table
    speed_max_err: float  # |h'^2 - omega(s)| over the table
    verification: np.ndarray  # rows (s, h h''-h'^2, m n s^(2-n)/2 - 1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mass": self.mass,
            "kappa": self.kappa,
            "s_lower": self.s_lower,
            "s_upper": self.s_upper if math.isfinite(self.s_upper) else "inf",
            "s_star": self.s_star,
            "s_cap": self.s_cap,
            "r_max": self.r_max,
            "h0": self.h0,
            "grid_size": self.grid_size,
            "identity_max_err": self.identity_max_err,
            "speed_max_err": self.speed_max_err,
        }


def _locate_roots(p: DssParameters) -> tuple[float, float]:
    """Bracketed roots of omega: (s_lower, s_upper); s_upper = inf for kappa <= 0."""
    lo = 1e-8 * min(1.0, p.mass ** (1.0 / (p.n - 2)))
    if p.kappa > 0:
        s_peak = ((p.n - 2) * p.mass / (2.0 * p.kappa)) ** (1.0 / p.n)
        if p.omega(s_peak) <= 0:
            raise WarpError(
                "omega has no positive interior: parameters violate "
                "n^n m^2 kappa^(n-2) < 4 (n-2)^(n-2)"
            )
        s_lower = brentq(p.omega, lo, s_peak, xtol=1e-15, rtol=8 * np.finfo(float).eps)
        hi = 2.0 * s_peak
        while p.omega(hi) > 0:
            hi *= 2.0
        s_upper = brentq(p.omega, s_peak, hi, xtol=1e-15, rtol=8 * np.finfo(float).eps)
        return float(s_lower), float(s_upper)
    hi = max(2.0, 2.0 * p.mass ** (1.0 / (p.n - 2)))
    while p.omega(hi) <= 0:
        hi *= 2.0
    s_lower = brentq(p.omega, lo, hi, xtol=1e-15, rtol=8 * np.finfo(float).eps)
    return float(s_lower), math.inf


def build_dss_warp(
    p: DssParameters,
    grid_size: int = 1024,
    s_cap: float | None = None,
) -> tuple[WarpingFunction, DssReport]:
    """Tabulated warp for the de Sitter-Schwarzschild profile.

    Integrates r(s) = int_{s_lower}^{s} omega(sigma)^(-1/2) dsigma with the
    substitution s = s_lower + tau^2 (removes the inverse-square-root
    endpoint singularity), then tabulates h(r) = s, h'(r) = sqrt(omega),
    h''(r) = omega'/2 on [0, r(s_cap)). The default cap is 90% of the way
    to s_upper when kappa > 0, else s_lower + 4.
    """
    if grid_size < 64:
        raise WarpError(f"grid_size must be >= 64, got {grid_size}")
    if not p.admissible:
        raise WarpError("inadmissible dSS parameters (omega never positive)")
    s_lower, s_upper = _locate_roots(p)
    if s_cap is None:
        s_cap = s_lower + 0.9 * (s_upper - s_lower) if p.kappa > 0 else s_lower + 4.0
    if s_cap >= s_upper:
        raise WarpError(f"s_cap={s_cap} must lie strictly below s_upper={s_upper}")
    if s_cap <= s_lower:
        raise WarpError(f"s_cap={s_cap} must lie strictly above s_lower={s_lower}")

    tau = np.linspace(0.0, math.sqrt(s_cap - s_lower), grid_size)
    s = s_lower + tau**2
    s[0] = s_lower
    omega = p.omega(s)
    omega[0] = 0.0
    # integrand 2 tau / sqrt(omega(s_lower + tau^2)); even and smooth at tau = 0
    g = np.empty_like(tau)
    g[0] = 2.0 / math.sqrt(p.omega_prime(s_lower))
    g[1:] = 2.0 * tau[1:] / np.sqrt(omega[1:])
    r = np.concatenate([[0.0], cumulative_simpson(g, x=tau)])

    h_nodes = s
    hp_nodes = np.sqrt(np.maximum(omega, 0.0))
    hpp_nodes = 0.5 * p.omega_prime(s)

    warp = tabulated_warp_from_columns(
        r,
        h_nodes,
        hp_nodes,
        hpp_nodes,
        provenance={
            "family": "dss",
            "n": p.n,
            "mass": p.mass,
            "kappa": p.kappa,
            "s_cap": float(s_cap),
        },
    )

    lhs = h_nodes * hpp_nodes - hp_nodes**2
    rhs = 0.5 * p.mass * p.n * s ** (2 - p.n) - 1.0
    report = DssReport(
        n=p.n,
        mass=p.mass,
        kappa=p.kappa,
        s_lower=s_lower,
        s_upper=s_upper,
        s_star=p.s_star,
        s_cap=float(s_cap),
        r_max=float(r[-1]),
        h0=float(s_lower),
        grid_size=grid_size,
        identity_max_err=float(np.max(np.abs(lhs - rhs))),
        speed_max_err=float(np.max(np.abs(hp_nodes**2 - omega))),
        verification=np.column_stack([s, lhs, rhs]),
    )
    if not (s_lower < p.s_star < s_upper):
        raise WarpError(
            f"s_star={p.s_star} outside (s_lower, s_upper)=({s_lower}, {s_upper})"
        )
    return warp, report


def tabulated_warp_from_columns(
    r_nodes, h_nodes, hp_nodes, hpp_nodes, provenance=None
) -> WarpingFunction:
    """Tabulated warp from strictly increasing r nodes and column samples.

    h and h' are interpolated by cubic Hermite splines using the exact
    nodal derivatives the table carries (h' and h''), so dh/dr stays
    consistent with the h' column between nodes; h'' uses a monotone cubic
    (PCHIP). Monotonicity of h away from 0, required by the admissibility
    conditions, is verified on a dense sample at construction.
    """
    r_nodes = np.asarray(r_nodes, dtype=float)
    if np.any(np.diff(r_nodes) <= 0):
        raise WarpError("tabulated warp needs a strictly increasing r grid")
    h_nodes = np.asarray(h_nodes, dtype=float)
    hp_arr = np.asarray(hp_nodes, dtype=float)
    if np.any(h_nodes <= 0):
        raise WarpError("tabulated warp needs h > 0 at every node")
    h_i = CubicHermiteSpline(r_nodes, h_nodes, hp_arr, extrapolate=False)
    hp_i = CubicHermiteSpline(
        r_nodes, hp_arr, np.asarray(hpp_nodes, dtype=float), extrapolate=False
    )
    hpp_i = PchipInterpolator(r_nodes, np.asarray(hpp_nodes, dtype=float), extrapolate=False)
    if np.all(hp_arr[1:] > 0.0):
        dense = np.linspace(r_nodes[0], r_nodes[-1], 8 * r_nodes.size)
        if np.any(np.diff(h_i(dense)) <= 0.0):
            raise WarpError("tabulated h lost monotonicity between nodes")

    def _wrap(interp):
        def f(r):
            rr = np.clip(np.asarray(r, dtype=float), r_nodes[0], r_nodes[-1])
            out = interp(rr)
            return float(out) if np.isscalar(r) or np.ndim(r) == 0 else out

        return f

    return WarpingFunction(
        h=_wrap(h_i),
        h_prime=_wrap(hp_i),
        h_double_prime=_wrap(hpp_i),
        r_bar=float(r_nodes[-1]),
        kind="tabulated",
        half_open=True,
        h0=float(h_nodes[0]),
        provenance=provenance or {"family": "tabulated"},
        r_nodes=r_nodes,
        interpolation="pchip",
    )
