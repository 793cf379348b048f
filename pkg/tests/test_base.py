import math

import numpy as np
import pytest

from warpflow import (
    ScalarField,
    flat_torus,
    gradient_sq_N,
    integrate,
    laplace_beltrami_N,
    refine,
    sphere_axisym,
    volume_weights,
)


def t1_field(n, fn):
    base = flat_torus((n,))
    x = np.arange(n) / n
    return base, ScalarField(fn(x), base)


def t2_field(n, fn):
    base = flat_torus((n, n))
    x = np.arange(n) / n
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return base, ScalarField(fn(xx, yy), base)


def sphere_field(nodes, fn):
    base = sphere_axisym(2, nodes)
    return base, ScalarField(fn(base.theta_nodes), base)


def test_constants_are_harmonic():
    base = flat_torus((16, 16))
    lap = laplace_beltrami_N(base, base.constant(3.0))
    assert np.max(np.abs(lap.values)) == 0.0
    bs = sphere_axisym(2, 33)
    assert np.max(np.abs(laplace_beltrami_N(bs, bs.constant(3.0)).values)) == 0.0


def test_t1_sine_eigenfunction():
    n = 256
    base, u = t1_field(n, lambda x: np.sin(2 * np.pi * x))
    lap = laplace_beltrami_N(base, u).values
    err = np.max(np.abs(lap + 4 * np.pi**2 * u.values))
    # Taylor remainder bound of the central stencil
    assert err <= (2 * np.pi) ** 4 * (1.0 / n) ** 2 / 12 * 1.0001


def test_t1_gradient_sq():
    n = 256
    base, u = t1_field(n, lambda x: np.sin(2 * np.pi * x))
    g = gradient_sq_N(base, u).values
    x = np.arange(n) / n
    exact = 4 * np.pi**2 * np.cos(2 * np.pi * x) ** 2
    # |(u')^2 - exact| <= 2|u'| * central-stencil remainder = (2pi)^4/3 dx^2
    assert np.max(np.abs(g - exact)) < (2 * np.pi) ** 4 / 3 * (1.0 / n) ** 2 * 1.001


def test_gradient_of_constant_vanishes():
    base = flat_torus((32, 32))
    assert np.max(gradient_sq_N(base, base.constant(5.0)).values) == 0.0


def test_sphere_cos_eigenfunction():
    # cos(theta) is a first spherical harmonic: eigenvalue -2 on S^2
    base, u = sphere_field(129, np.cos)
    lap = laplace_beltrami_N(base, u).values
    dth = base.spacing[0]
    assert np.max(np.abs(lap + 2 * u.values)) < dth**2


def test_sphere_gradient_sq():
    base, u = sphere_field(129, np.cos)
    g = gradient_sq_N(base, u).values
    exact = np.sin(base.theta_nodes) ** 2
    assert np.max(np.abs(g - exact)) < 2 * base.spacing[0] ** 2


@pytest.mark.parametrize("variant", ["t1", "t2", "sphere"])
def test_refinement_order(variant):
    errs = []
    for level in range(2):
        if variant == "t1":
            n = 64 * 2**level
            base, u = t1_field(n, lambda x: np.sin(2 * np.pi * x) + 0.3 * np.cos(4 * np.pi * x))
            x = np.arange(n) / n
            lap_exact = -4 * np.pi**2 * np.sin(2 * np.pi * x) - 0.3 * 16 * np.pi**2 * np.cos(
                4 * np.pi * x
            )
            grad_exact = (
                2 * np.pi * np.cos(2 * np.pi * x) - 1.2 * np.pi * np.sin(4 * np.pi * x)
            ) ** 2
        elif variant == "t2":
            n = 32 * 2**level
            base, u = t2_field(
                n, lambda xx, yy: np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy)
            )
            x = np.arange(n) / n
            xx, yy = np.meshgrid(x, x, indexing="ij")
            lap_exact = -8 * np.pi**2 * u.values
            grad_exact = (2 * np.pi * np.cos(2 * np.pi * xx) * np.cos(2 * np.pi * yy)) ** 2 + (
                2 * np.pi * np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy)
            ) ** 2
        else:
            nodes = 65 * 2**level - (2**level - 1)  # 65 -> 129
            base, u = sphere_field(nodes, lambda th: np.cos(th) + 0.2 * np.cos(2 * th))
            th = base.theta_nodes
            # Delta cos = -2 cos; Delta cos(2th) = -4cos2th - 2 cot th sin 2th
            lap_exact = -2 * np.cos(th) + 0.2 * (-4 * np.cos(2 * th) - _cot_sin(th))
            grad_exact = (np.sin(th) + 0.4 * np.sin(2 * th)) ** 2
        e_lap = np.max(np.abs(laplace_beltrami_N(base, u).values - lap_exact))
        e_grad = np.max(np.abs(gradient_sq_N(base, u).values - grad_exact))
        errs.append((e_lap, e_grad))
    for k in range(2):
        ratio = errs[0][k] / errs[1][k]
        assert 3.5 <= ratio <= 4.5, f"{variant} op {k}: ratio {ratio}"


def _cot_sin(th):
    # cot(th) * 2 sin(2th) with the pole limit 2*2*cos(2th)->4 at th in {0, pi}
    out = np.empty_like(th)
    inner = slice(1, -1)
    out[inner] = 2 * np.sin(2 * th[inner]) / np.tan(th[inner])
    out[0] = 4.0
    out[-1] = 4.0
    return out


class TestIntegrationByParts:
    def test_torus_self_adjoint_exact(self):
        rng = np.random.default_rng(0)
        base = flat_torus((32, 32))
        u = ScalarField(rng.standard_normal(base.shape), base)
        w = ScalarField(rng.standard_normal(base.shape), base)
        lhs = integrate(base, ScalarField(u.values * laplace_beltrami_N(base, w).values, base))
        rhs = integrate(base, ScalarField(w.values * laplace_beltrami_N(base, u).values, base))
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))

    def test_torus_forward_difference_pairing_exact(self):
        # Delta = D+ D-, so sum u Delta w = -sum (D+ u)(D+ w) to roundoff
        rng = np.random.default_rng(1)
        n = 32
        base = flat_torus((n, n))
        u = rng.standard_normal((n, n))
        w = rng.standard_normal((n, n))
        dx = base.spacing[0]
        lap_w = laplace_beltrami_N(base, ScalarField(w, base)).values
        lhs = np.sum(u * lap_w) * dx * dx
        pair = 0.0
        for ax in (0, 1):
            pair += np.sum(
                (np.roll(u, -1, ax) - u) / dx * (np.roll(w, -1, ax) - w) / dx
            ) * dx * dx
        assert abs(lhs + pair) < 1e-11

    def test_torus_central_pairing_second_order(self):
        gaps = []
        for n in (32, 64):
            base, u = t2_field(n, lambda xx, yy: np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy))
            w = ScalarField(np.cos(2 * np.pi * np.arange(n)[:, None] / n) * np.ones(n), base)
            lap_w = laplace_beltrami_N(base, w)
            lhs = integrate(base, ScalarField(u.values * lap_w.values, base))
            dx = base.spacing[0]
            ux = (np.roll(u.values, -1, 0) - np.roll(u.values, 1, 0)) / (2 * dx)
            uy = (np.roll(u.values, -1, 1) - np.roll(u.values, 1, 1)) / (2 * dx)
            wx = (np.roll(w.values, -1, 0) - np.roll(w.values, 1, 0)) / (2 * dx)
            wy = (np.roll(w.values, -1, 1) - np.roll(w.values, 1, 1)) / (2 * dx)
            rhs = -np.sum(ux * wx + uy * wy) * dx * dx
            gaps.append(abs(lhs - rhs))
        assert gaps[0] < 0.05
        assert gaps[0] / max(gaps[1], 1e-300) > 3.0 or gaps[1] < 1e-12

    def test_sphere_pairing_second_order(self):
        gaps = []
        for nodes in (65, 129):
            base, u = sphere_field(nodes, lambda th: np.cos(th))
            w = ScalarField(np.cos(2 * base.theta_nodes), base)
            lap_w = laplace_beltrami_N(base, w)
            lhs = integrate(base, ScalarField(u.values * lap_w.values, base))
            up = np.gradient(u.values, base.spacing[0])
            wp = np.gradient(w.values, base.spacing[0])
            rhs = -np.sum(up * wp * volume_weights(base))
            gaps.append(abs(lhs - rhs))
        assert gaps[1] < gaps[0]


def test_sphere_weights_total_area():
    base = sphere_axisym(2, 513)
    total = float(np.sum(volume_weights(base)))
    assert abs(total - 4 * math.pi) < 1e-4
    assert volume_weights(base)[0] == 0.0 and volume_weights(base)[-1] == 0.0


def test_refine_doubles_resolution():
    assert refine(flat_torus((16, 16))).shape == (32, 32)
    assert refine(sphere_axisym(2, 65)).shape == (129,)
    assert refine(flat_torus((16, 16), (2.0, 2.0))).periods == (2.0, 2.0)


def test_scalar_field_validation():
    base = flat_torus((8, 8))
    with pytest.raises(ValueError):
        ScalarField(np.zeros((4, 4)), base)
    with pytest.raises(ValueError):
        ScalarField(np.full((8, 8), np.nan), base)
    other = flat_torus((16, 16))
    with pytest.raises(ValueError):
        laplace_beltrami_N(other, base.constant(1.0))


def test_ricci_constants_per_variant():
    # flat torus: flat base; unit S^m: Ric = (m-1) g, lower bound (m-1)/m
    t = flat_torus((16, 16))
    assert t.rho == 0.0 and t.ric_vv == 0.0
    s2 = sphere_axisym(2, 33)
    assert s2.rho == pytest.approx(0.5) and s2.ric_vv == 1.0
    s3 = sphere_axisym(3, 33)
    assert s3.rho == pytest.approx(2.0 / 3.0) and s3.ric_vv == 2.0


def test_bad_grid_construction():
    with pytest.raises(ValueError):
        flat_torus((8, 8, 8))
    with pytest.raises(ValueError):
        flat_torus((8,), periods=(-1.0,))
    with pytest.raises(ValueError):
        sphere_axisym(1, 65)
