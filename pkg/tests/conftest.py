import time

import numpy as np
import pytest

from warpflow import (
    DssParameters,
    FlowConfig,
    ScalarField,
    build_dss_warp,
    flat_torus,
    make_builtin_warp,
    run_flow,
)


@pytest.fixture(scope="session")
def cosh_warp():
    return make_builtin_warp("cosh")


@pytest.fixture(scope="session")
def quad_warp():
    return make_builtin_warp("quadratic", [0.5], 2.0)


@pytest.fixture(scope="session")
def dss_flat():
    """kappa = 0 de Sitter-Schwarzschild warp (n=3, m=1) plus its report."""
    return build_dss_warp(DssParameters(3, 1.0, 0.0), grid_size=1024)


@pytest.fixture(scope="session")
def dss_curved():
    """kappa = 0.05 de Sitter-Schwarzschild warp (n=3, m=1) plus its report."""
    return build_dss_warp(DssParameters(3, 1.0, 0.05), grid_size=1024)


@pytest.fixture(scope="session")
def torus64():
    return flat_torus((64, 64))


def witness_initial(base):
    """The convergence-witness initial data: 0.3 + 0.1 sin(2 pi x) cos(2 pi y)."""
    nx, ny = base.shape
    x = np.arange(nx) / nx * base.periods[0]
    y = np.arange(ny) / ny * base.periods[1]
    xx, yy = np.meshgrid(x, y, indexing="ij")
    return ScalarField(0.3 + 0.1 * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy), base)


@pytest.fixture(scope="session")
def witness_run(cosh_warp, torus64):
    """Shared full convergence-witness run (a0=0.5 on the 64^2 torus).

    Returns (run, wall_seconds); the timing feeds the runtime budget check.
    """
    cfg = FlowConfig(dt_safety=0.8, t_end=5.0, output_stride=200, a0=0.5)
    t0 = time.perf_counter()
    run = run_flow(witness_initial(torus64), cosh_warp, torus64, cfg)
    return run, time.perf_counter() - t0
