"""Comparison ODEs for the parallel-slice flow and the angle lower bound.

The flow of an equidistant slice at height R(t) obeys

    dR/dt = -(n-1) h'(R)/h(R),        R(0) = a,

and the comparison angle-squared bound f_bar obeys

    df_bar/dt = -2(n-1)(1-f_bar) h'(R)^2 / h^2(R),   f_bar(0) = f0_bar,

whose coupling conserves Lambda(t) = (1 - f_bar(t)) h^2(R(t)) exactly.
The limit of f_bar is 1 - (1 - f0_bar) h^2(a)/h0^2 (h0 = h(0); the
normalization factor matters for warps with h(0) != 1).

Fixed-step classical RK4 (the right sides are globally smooth along the
trajectory); fixed stepping keeps CSV outputs bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .warp import WarpingFunction

__all__ = ["BarrierSolution", "solve_barrier", "f_bar_closed_form"]


@dataclass(frozen=True)
class BarrierSolution:
    """Sampled trajectories of the coupled comparison ODEs."""

    warp: WarpingFunction
    n: int
    a: float
    f0_bar: float
    times: np.ndarray
    R: np.ndarray
    f_bar: np.ndarray
    lambda0: float
    f_limit: float

    def lambda_of_t(self) -> np.ndarray:
        return (1.0 - self.f_bar) * np.asarray(self.warp.h(self.R)) ** 2

    def lambda_drift(self) -> np.ndarray:
        """Relative conservation defect per sample (absolute when Lambda0=0)."""
        d = self.lambda_of_t() - self.lambda0
        if self.lambda0 > 0:
            return np.abs(d) / self.lambda0
        return np.abs(d)

    def _spline(self, y, dy):
        return CubicHermiteSpline(self.times, y, dy)

    def R_at(self, t):
        """R interpolated with the exact nodal slopes (cubic Hermite)."""
        self._require_range(t)
        dR = -(self.n - 1) * np.asarray(self.warp.h_prime(self.R)) / np.asarray(
            self.warp.h(self.R)
        )
        return self._spline(self.R, dR)(t)

    def f_bar_at(self, t):
        self._require_range(t)
        hR = np.asarray(self.warp.h(self.R))
        hpR = np.asarray(self.warp.h_prime(self.R))
        df = -2.0 * (self.n - 1) * (1.0 - self.f_bar) * (hpR / hR) ** 2
        return self._spline(self.f_bar, df)(t)

    def _require_range(self, t):
        t = np.asarray(t)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.times[-1] + 1e-12):
            raise ValueError(f"time outside solved range [0, {self.times[-1]}]")


def _rhs(warp: WarpingFunction, n: int, R: float, f: float):
    # clamp guards roundoff excursions below the half-open domain endpoint
    lo = warp.r_min
    Rc = min(max(R, lo), warp.r_bar - 1e-15) if np.isfinite(warp.r_bar) else max(R, lo)
    h = float(warp.h(Rc))
    hp = float(warp.h_prime(Rc))
    w = hp / h
    return -(n - 1) * w, -2.0 * (n - 1) * (1.0 - f) * w * w


def solve_barrier(
    warp: WarpingFunction,
    n: int,
    a: float,
    f0_bar: float,
    t_end: float,
    dt: float = 1e-3,
) -> BarrierSolution:
    """Integrate the coupled system with classical RK4 at fixed dt."""
    if not (dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    if not (0.0 <= f0_bar <= 1.0):
        raise ValueError(f"f0_bar must lie in [0, 1], got {f0_bar}")
    warp.require_inside(a)
    if a < 0 and warp.half_open:
        raise ValueError("initial height below a half-open domain")

    steps = int(round(t_end / dt))
    times = np.empty(steps + 1)
    Rs = np.empty(steps + 1)
    fs = np.empty(steps + 1)
    R, f = float(a), float(f0_bar)
    times[0], Rs[0], fs[0] = 0.0, R, f
    for k in range(steps):
        k1R, k1f = _rhs(warp, n, R, f)
        k2R, k2f = _rhs(warp, n, R + 0.5 * dt * k1R, f + 0.5 * dt * k1f)
        k3R, k3f = _rhs(warp, n, R + 0.5 * dt * k2R, f + 0.5 * dt * k2f)
        k4R, k4f = _rhs(warp, n, R + dt * k3R, f + dt * k3f)
        R += dt / 6.0 * (k1R + 2.0 * k2R + 2.0 * k3R + k4R)
        f += dt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
        times[k + 1] = (k + 1) * dt
        Rs[k + 1] = R
        fs[k + 1] = f

    h_a = float(warp.h(a))
    lambda0 = (1.0 - f0_bar) * h_a * h_a
    f_limit = 1.0 - lambda0 / warp.h0**2
    return BarrierSolution(
        warp=warp,
        n=n,
        a=float(a),
        f0_bar=float(f0_bar),
        times=times,
        R=Rs,
        f_bar=fs,
        lambda0=lambda0,
        f_limit=f_limit,
    )


def f_bar_closed_form(warp: WarpingFunction, sol: BarrierSolution, t) -> float:
    """Conservation law solved for f_bar: 1 - Lambda0 / h^2(R(t))."""
    R = sol.R_at(t)
    h = np.asarray(warp.h(R), dtype=float)
    out = 1.0 - sol.lambda0 / (h * h)
    return float(out) if np.ndim(t) == 0 else out
