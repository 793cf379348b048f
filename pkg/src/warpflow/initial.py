"""Initial height fields from a small, config-addressable catalog.

Kinds: constant, sine-product, gaussian-bump. The sine-product kind
optionally calibrates its amplitude so the discrete minimum of the angle
function lands on angle_factor * threshold(a0), escalating the mode number
when the height budget sup|u0| <= a0 cannot reach the target slope at the
current mode. Calibration is deterministic (bisection on the discrete
angle) and its outcome belongs in the run manifest.
"""

from __future__ import annotations

import math

import numpy as np

from .base import BaseManifold, ScalarField
from .geometry import GraphState, compute_theta
from .warp import WarpingFunction, angle_threshold

__all__ = [
    "build_initial",
    "calibrated_sine_product",
    "random_smooth_graph",
    "INITIAL_KINDS",
]

INITIAL_KINDS = ("constant", "sine-product", "gaussian-bump")


def _coords(base: BaseManifold):
    if base.variant == "FlatTorus":
        axes = [
            np.arange(s) * base.spacing[i] for i, s in enumerate(base.shape)
        ]
        if base.dim == 1:
            return (axes[0],)
        return np.meshgrid(*axes, indexing="ij")
    return (base.theta_nodes,)


def _sine_product(base: BaseManifold, offset, amp, kx=1, ky=1):
    c = _coords(base)
    if base.variant == "FlatTorus":
        lx = base.periods[0]
        if base.dim == 1:
            v = offset + amp * np.sin(2.0 * math.pi * kx * c[0] / lx)
        else:
            ly = base.periods[1]
            v = offset + amp * np.sin(2.0 * math.pi * kx * c[0] / lx) * np.cos(
                2.0 * math.pi * ky * c[1] / ly
            )
    else:
        # axisymmetric analogue: a Chebyshev mode in cos(theta), smooth at poles
        v = offset + amp * np.cos(kx * c[0])
    return ScalarField(np.asarray(v, dtype=float), base)


def _gaussian_bump(base: BaseManifold, offset, amp, sigma, center=None):
    if sigma <= 0:
        raise ValueError("gaussian-bump needs sigma > 0")
    c = _coords(base)
    if base.variant == "FlatTorus":
        if center is None:
            center = tuple(p / 2.0 for p in base.periods)
        d2 = 0.0
        for i in range(base.dim):
            p = base.periods[i]
            d = np.mod(c[i] - center[i] + 0.5 * p, p) - 0.5 * p  # wrapped offset
            d2 = d2 + d * d
    else:
        c0 = math.pi / 2.0 if center is None else float(center[0])
        d = c[0] - c0
        d2 = d * d
    v = offset + amp * np.exp(-d2 / (2.0 * sigma * sigma))
    return ScalarField(np.asarray(v, dtype=float), base)


def calibrated_sine_product(
    base: BaseManifold,
    warp: WarpingFunction,
    a0: float,
    angle_factor: float,
    max_mode: int = 8,
) -> tuple[ScalarField, dict]:
    """Sine-product field with sup|u0| = a0 and min Theta = angle_factor * threshold(a0).

    Amplitude solved by bisection on the discrete angle minimum with
    offset = a0 - amp; the mode number escalates when the full height
    budget cannot produce a slope steep enough for the target.
    """
    if a0 <= 0:
        raise ValueError("calibration needs a0 > 0")
    target = angle_factor * angle_threshold(warp, a0)
    if not (0.0 < target < 1.0):
        raise ValueError(f"target angle {target} outside (0, 1)")

    def min_theta(amp: float, k: int) -> float:
        u = _sine_product(base, a0 - amp, amp, kx=k, ky=k)
        return float(
            compute_theta(GraphState(u, 0.0, warp, base)).values.min()
        )

    amp_hi = a0 * (1.0 - 1e-9)
    for k in range(1, max_mode + 1):
        if min_theta(amp_hi, k) <= target:
            lo, hi = 0.0, amp_hi  # theta(lo)=1 > target >= theta(hi)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if min_theta(mid, k) > target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-15 * a0:
                    break
            amp = 0.5 * (lo + hi)
            field = _sine_product(base, a0 - amp, amp, kx=k, ky=k)
            info = {
                "kind": "sine-product",
                "calibrated": True,
                "mode": k,
                "amp": amp,
                "offset": a0 - amp,
                "target_min_theta": target,
                "achieved_min_theta": min_theta(amp, k),
            }
            return field, info
    raise ValueError(
        f"cannot reach min Theta = {target} with modes up to {max_mode} and sup|u0| <= {a0}"
    )


def random_smooth_graph(
    base: BaseManifold,
    warp: WarpingFunction,
    seed: int,
    offset: float = 0.25,
    amplitude: float = 0.12,
    modes: int = 2,
) -> ScalarField:
    """Seeded band-limited random height field, resolution-independent.

    The Fourier coefficients depend only on the seed, so refining the grid
    samples the same continuum field (as convergence studies require).
    Coefficients decay like 1/(1 + |k|^2); the result is rescaled to the
    requested amplitude around the offset.
    """
    rng = np.random.default_rng(seed)
    c = _coords(base)
    coef_sq = 0.0
    if base.variant == "FlatTorus" and base.dim == 2:
        x = 2.0 * math.pi * c[0] / base.periods[0]
        y = 2.0 * math.pi * c[1] / base.periods[1]
        v = np.zeros(base.shape)
        for k in range(0, modes + 1):
            for l in range(-modes, modes + 1):
                if k == 0 and l <= 0:
                    continue
                a, bb = rng.standard_normal(2) / (1.0 + k * k + l * l)
                coef_sq += a * a + bb * bb
                v = v + a * np.cos(k * x + l * y) + bb * np.sin(k * x + l * y)
    elif base.variant == "FlatTorus":
        x = 2.0 * math.pi * c[0] / base.periods[0]
        v = np.zeros(base.shape)
        for k in range(1, modes + 1):
            a, bb = rng.standard_normal(2) / (1.0 + k * k)
            coef_sq += a * a + bb * bb
            v = v + a * np.cos(k * x) + bb * np.sin(k * x)
    else:
        v = np.zeros(base.shape)
        for k in range(1, modes + 1):
            (a,) = rng.standard_normal(1) / (1.0 + k * k)
            coef_sq += a * a
            v = v + a * np.cos(k * c[0])
    # normalize by the coefficient norm, not the grid peak, so the continuum
    # field is identical across resolutions
    if coef_sq > 0:
        v = v * (amplitude / math.sqrt(coef_sq))
    return ScalarField(offset + v, base)


def build_initial(
    base: BaseManifold, warp: WarpingFunction, spec: dict
) -> tuple[ScalarField, dict]:
    """Instantiate a catalog entry; returns (field, resolved parameters)."""
    kind = spec.get("kind")
    if kind == "constant":
        v = float(spec["value"])
        return base.constant(v), {"kind": "constant", "value": v}
    if kind == "sine-product":
        if spec.get("angle_factor") is not None:
            return calibrated_sine_product(
                base,
                warp,
                float(spec["a0"]),
                float(spec["angle_factor"]),
                max_mode=int(spec.get("max_mode", 8)),
            )
        offset = float(spec.get("offset", 0.0))
        amp = float(spec["amp"])
        kx = int(spec.get("kx", 1))
        ky = int(spec.get("ky", 1))
        f = _sine_product(base, offset, amp, kx, ky)
        return f, {"kind": kind, "offset": offset, "amp": amp, "kx": kx, "ky": ky}
    if kind == "gaussian-bump":
        offset = float(spec.get("offset", 0.0))
        amp = float(spec["amp"])
        sigma = float(spec["sigma"])
        f = _gaussian_bump(base, offset, amp, sigma)
        return f, {"kind": kind, "offset": offset, "amp": amp, "sigma": sigma}
    raise ValueError(f"unknown initial-data kind {kind!r} (choose from {INITIAL_KINDS})")
