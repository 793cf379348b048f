"""Command-line entry point.

Subcommands: check-conditions, dss-build, run-barrier, run-flow,
validate-identities, sweep. Every run reads a flat key = value config file,
writes its artifacts (CSV + JSON) into --out, and records a manifest.json
from which the run can be reconstructed.

Config format: one `key = value` per line, `#` starts a comment, keys are
dot-namespaced (warp.family, base.nx, flow.t_end, ...). Unknown and
duplicate keys are rejected with the offending line. All numeric values
are decimal text.

Exit codes: 0 success, 2 config error, 3 numerical abort
(graphicality_lost / domain_exit), 4 internal error.
"""

from __future__ import annotations

import argparse
import math
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .barrier import solve_barrier
from .base import BaseManifold, flat_torus, sphere_axisym
from .base import refine
from .flow import DIAGNOSTIC_COLUMNS, DomainExitError, FlowConfig, run_flow
from .geometry import (
    GraphicalityError,
    GraphState,
    duality_gap,
    identity_residuals,
    route_gap,
)
from .initial import build_initial, random_smooth_graph
from .io import write_csv, write_json, write_scalar_field_csv
from .warp import (
    DssParameters,
    WarpError,
    build_dss_warp,
    check_conditions,
    make_builtin_warp,
)

__all__ = ["main", "parse_config", "ExperimentConfig", "ConfigError"]


class ConfigError(ValueError):
    """Malformed or invalid configuration; maps to exit code 2."""


class NumericalAbort(RuntimeError):
    """Flow stopped by graphicality loss or domain exit; exit code 3."""


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    values: dict
    path: str

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


# --- config schema -------------------------------------------------------------

_REQUIRED = object()


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a decimal number, got {s!r}")


def _pos_float(s: str) -> float:
    v = _float(s)
    if v <= 0:
        raise ConfigError(f"must be > 0, got {s}")
    return v


def _int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}")


def _pos_int(s: str) -> int:
    v = _int(s)
    if v <= 0:
        raise ConfigError(f"must be a positive integer, got {s}")
    return v


def _str(s: str) -> str:
    return s


def _choice(*options):
    def parse(s: str) -> str:
        if s not in options:
            raise ConfigError(f"must be one of {options}, got {s!r}")
        return s

    return parse


def _float_list(s: str):
    return tuple(_float(tok.strip()) for tok in s.split(",") if tok.strip())


def _str_list(s: str):
    return tuple(tok.strip() for tok in s.split(",") if tok.strip())


_WARP_KEYS = {
    "warp.family": (_choice("cosh", "quadratic", "dss"), _REQUIRED),
    "warp.alpha": (_pos_float, None),
    "warp.r_max": (_pos_float, math.inf),
}
# optional in warp-carrying subcommands (validated when warp.family = dss);
# required for dss-build itself
_DSS_KEYS = {
    "dss.n": (_pos_int, 3),
    "dss.mass": (_pos_float, None),
    "dss.kappa": (_float, None),
    "dss.grid_size": (_pos_int, 1024),
    "dss.s_cap": (_pos_float, None),
}
_DSS_KEYS_REQUIRED = {
    **_DSS_KEYS,
    "dss.mass": (_pos_float, _REQUIRED),
    "dss.kappa": (_float, _REQUIRED),
}
_BASE_KEYS = {
    "base.variant": (_choice("flat_torus", "sphere"), "flat_torus"),
    "base.nx": (_pos_int, 64),
    "base.ny": (_pos_int, None),
    "base.period_x": (_pos_float, 1.0),
    "base.period_y": (_pos_float, 1.0),
    "base.dim": (_pos_int, 2),
    "base.nodes": (_pos_int, 65),
}
_INITIAL_KEYS = {
    "initial.kind": (_choice("constant", "sine-product", "gaussian-bump"), _REQUIRED),
    "initial.value": (_float, None),
    "initial.offset": (_float, 0.0),
    "initial.amp": (_float, None),
    "initial.kx": (_pos_int, 1),
    "initial.ky": (_pos_int, 1),
    "initial.sigma": (_pos_float, None),
    "initial.angle_factor": (_pos_float, None),
    "initial.max_mode": (_pos_int, 8),
}
_FLOW_KEYS = {
    "flow.dt_safety": (_pos_float, 0.25),
    "flow.t_end": (_pos_float, 5.0),
    "flow.output_stride": (_pos_int, 100),
    "flow.theta_floor": (_pos_float, 1e-3),
    "flow.convergence_eps": (_pos_float, 1e-4),
    "flow.residual_checks": (_str_list, ("cor26", "thm31", "ineq32")),
    "flow.a0": (_pos_float, None),
    "flow.tol_avoid": (_pos_float, 1e-3),
    "flow.tol_angle": (_pos_float, 1e-3),
    "flow.barrier_dt": (_pos_float, 1e-3),
}
_SEED_KEYS = {"seed": (_int, 0)}

_SCHEMAS = {
    "check-conditions": {
        **_WARP_KEYS,
        **_DSS_KEYS,
        **_SEED_KEYS,
        "conditions.rho": (_float, _REQUIRED),
        "conditions.r_lo": (_float, None),
        "conditions.r_hi": (_float, None),
        "conditions.points": (_pos_int, 1024),
    },
    "dss-build": {**_DSS_KEYS_REQUIRED, **_SEED_KEYS},
    "run-barrier": {
        **_WARP_KEYS,
        **_DSS_KEYS,
        **_SEED_KEYS,
        "barrier.n": (_pos_int, 3),
        "barrier.a": (_float, _REQUIRED),
        "barrier.f0_bar": (_float, _REQUIRED),
        "barrier.t_end": (_pos_float, 10.0),
        "barrier.dt": (_pos_float, 1e-3),
        "barrier.output_stride": (_pos_int, 10),
    },
    "run-flow": {**_WARP_KEYS, **_DSS_KEYS, **_BASE_KEYS, **_INITIAL_KEYS, **_FLOW_KEYS, **_SEED_KEYS},
    "validate-identities": {
        **_WARP_KEYS,
        **_DSS_KEYS,
        **_BASE_KEYS,
        **_SEED_KEYS,
        "validate.offset": (_float, 0.25),
        "validate.amplitude": (_pos_float, 0.12),
        "validate.modes": (_pos_int, 2),
    },
    "sweep": None,  # filled below: run-flow keys + sweep controls
}
_SCHEMAS["sweep"] = {
    **_SCHEMAS["run-flow"],
    "sweep.key": (_str, _REQUIRED),
    "sweep.values": (_float_list, _REQUIRED),
}


def parse_config(path, subcommand: str) -> ExperimentConfig:
    """Read, type-check and default-fill a config file for a subcommand."""
    schema = _SCHEMAS[subcommand]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")

    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if key not in schema:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} for {subcommand}")
        raw[key] = value

    values: dict = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except ConfigError as exc:
                raise ConfigError(f"{path}: key {key!r}: {exc}")
        elif default is _REQUIRED:
            raise ConfigError(f"{path}: missing required key {key!r}")
        else:
            values[key] = default
    return ExperimentConfig(subcommand=subcommand, values=values, path=str(path))


# --- shared builders -----------------------------------------------------------


def _build_warp(cfg: ExperimentConfig):
    family = cfg["warp.family"]
    if family == "cosh":
        return make_builtin_warp("cosh", [], cfg["warp.r_max"])
    if family == "quadratic":
        if cfg.get("warp.alpha") is None:
            raise ConfigError("quadratic warp requires warp.alpha")
        r_max = cfg["warp.r_max"]
        if not math.isfinite(r_max):
            raise ConfigError("quadratic warp requires a finite warp.r_max")
        return make_builtin_warp("quadratic", [cfg["warp.alpha"]], r_max)
    # dss
    if cfg.get("dss.mass") is None or cfg.get("dss.kappa") is None:
        raise ConfigError("dss warp requires dss.mass and dss.kappa")
    p = DssParameters(cfg["dss.n"], cfg["dss.mass"], cfg["dss.kappa"])
    warp, _ = build_dss_warp(p, cfg["dss.grid_size"], cfg.get("dss.s_cap"))
    return warp


def _build_base(cfg: ExperimentConfig) -> BaseManifold:
    if cfg["base.variant"] == "flat_torus":
        nx = cfg["base.nx"]
        ny = cfg.get("base.ny")
        if ny is None:
            return flat_torus((nx, nx), (cfg["base.period_x"], cfg["base.period_x"]))
        return flat_torus((nx, ny), (cfg["base.period_x"], cfg["base.period_y"]))
    return sphere_axisym(cfg["base.dim"], cfg["base.nodes"])


def _manifest(out: Path, cfg: ExperimentConfig, extra: dict | None = None) -> None:
    payload = {
        "artifact": "warpflow",
        "version": __version__,
        "backend": kernels.BACKEND,
        "subcommand": cfg.subcommand,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.values.items()},
    }
    if extra:
        payload.update(extra)
    write_json(out / "manifest.json", payload)


def _serializable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# --- subcommands -----------------------------------------------------------------


def cmd_check_conditions(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    warp = _build_warp(cfg)
    hi_default = warp.r_bar * 0.98 if math.isfinite(warp.r_bar) else 2.0
    r_hi = cfg.get("conditions.r_hi")
    r_hi = hi_default if r_hi is None else r_hi
    r_lo = cfg.get("conditions.r_lo")
    if r_lo is None:
        r_lo = 0.0 if warp.half_open else -r_hi
    grid = np.linspace(r_lo, r_hi, cfg["conditions.points"])
    if not np.any(np.isclose(grid, 0.0, atol=1e-15)):
        grid = np.sort(np.append(grid, 0.0))
    report = check_conditions(warp, cfg["conditions.rho"], grid)
    payload = report.to_dict()
    nonneg = report.samples[:, 0] >= 0.0
    payload["angle_threshold_rows"] = [
        [float(r), report.angle_threshold(float(r))] for r in report.samples[nonneg, 0]
    ]
    write_json(out / "conditions.json", payload)
    _manifest(out, cfg)
    if not quiet:
        print(
            f"conditions: c1={report.c1_pass} c2={report.c2_pass} c3={report.c3_pass} "
            f"margin={report.c3_margin:.6g} (c={report.c})"
        )
    return 0


def cmd_dss_build(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    p = DssParameters(cfg["dss.n"], cfg["dss.mass"], cfg["dss.kappa"])
    warp, report = build_dss_warp(p, cfg["dss.grid_size"], cfg.get("dss.s_cap"))
    rows = zip(
        warp.r_nodes,
        warp.h(warp.r_nodes),
        warp.h_prime(warp.r_nodes),
        warp.h_double_prime(warp.r_nodes),
    )
    write_csv(out / "warp.csv", ("r", "h", "h_prime", "h_double_prime"), rows)
    write_csv(
        out / "dss_verification.csv",
        ("s", "condition_value", "identity_value"),
        report.verification,
    )
    write_json(out / "dss_report.json", report.to_dict())
    _manifest(out, cfg)
    if not quiet:
        print(
            f"dss: s_lower={report.s_lower:.12g} s_star={report.s_star:.12g} "
            f"s_upper={report.s_upper:.6g} identity_err={report.identity_max_err:.3g}"
        )
    return 0


def cmd_run_barrier(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    warp = _build_warp(cfg)
    sol = solve_barrier(
        warp,
        cfg["barrier.n"],
        cfg["barrier.a"],
        cfg["barrier.f0_bar"],
        cfg["barrier.t_end"],
        cfg["barrier.dt"],
    )
    stride = cfg["barrier.output_stride"]
    idx = np.arange(0, sol.times.size, stride)
    if idx[-1] != sol.times.size - 1:
        idx = np.append(idx, sol.times.size - 1)
    drift = sol.lambda_drift()
    rows = zip(sol.times[idx], sol.R[idx], sol.f_bar[idx], drift[idx])
    write_csv(out / "barrier.csv", ("t", "R", "f_bar", "lambda_drift"), rows)
    write_json(
        out / "summary.json",
        {
            "a": sol.a,
            "f0_bar": sol.f0_bar,
            "lambda0": sol.lambda0,
            "f_limit": sol.f_limit,
            "final_R": float(sol.R[-1]),
            "final_f_bar": float(sol.f_bar[-1]),
            "max_lambda_drift": float(np.max(drift)),
        },
    )
    _manifest(out, cfg)
    if not quiet:
        print(f"barrier: final R={sol.R[-1]:.3e} f_limit={sol.f_limit:.6g}")
    return 0


def _flow_config(cfg: ExperimentConfig) -> FlowConfig:
    try:
        return FlowConfig(
            dt_safety=cfg["flow.dt_safety"],
            t_end=cfg["flow.t_end"],
            output_stride=cfg["flow.output_stride"],
            theta_floor=cfg["flow.theta_floor"],
            convergence_eps=cfg["flow.convergence_eps"],
            residual_checks=frozenset(cfg["flow.residual_checks"]),
            a0=cfg.get("flow.a0"),
            tol_avoid=cfg["flow.tol_avoid"],
            tol_angle=cfg["flow.tol_angle"],
            barrier_dt=cfg["flow.barrier_dt"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _initial_spec(cfg: ExperimentConfig) -> dict:
    kind = cfg["initial.kind"]
    spec = {"kind": kind}
    if kind == "constant":
        if cfg.get("initial.value") is None:
            raise ConfigError("initial.kind=constant requires initial.value")
        spec["value"] = cfg["initial.value"]
        return spec
    if kind == "sine-product":
        if cfg.get("initial.angle_factor") is not None:
            if cfg.get("flow.a0") is None:
                raise ConfigError("initial.angle_factor requires flow.a0")
            spec["angle_factor"] = cfg["initial.angle_factor"]
            spec["a0"] = cfg["flow.a0"]
            spec["max_mode"] = cfg["initial.max_mode"]
            return spec
        if cfg.get("initial.amp") is None:
            raise ConfigError("initial.kind=sine-product requires initial.amp")
        spec.update(
            offset=cfg["initial.offset"],
            amp=cfg["initial.amp"],
            kx=cfg["initial.kx"],
            ky=cfg["initial.ky"],
        )
        return spec
    if cfg.get("initial.amp") is None or cfg.get("initial.sigma") is None:
        raise ConfigError("initial.kind=gaussian-bump requires initial.amp and initial.sigma")
    spec.update(offset=cfg["initial.offset"], amp=cfg["initial.amp"], sigma=cfg["initial.sigma"])
    return spec


def _execute_flow(cfg: ExperimentConfig, out: Path, quiet: bool) -> dict:
    warp = _build_warp(cfg)
    base = _build_base(cfg)
    try:
        u0, initial_info = build_initial(base, warp, _initial_spec(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc))
    fcfg = _flow_config(cfg)
    run = run_flow(u0, warp, base, fcfg)
    write_csv(out / "diagnostics.csv", DIAGNOSTIC_COLUMNS, (d.row() for d in run.diagnostics))
    write_scalar_field_csv(out / "final_state.csv", run.final_state.u)
    summary = {k: _serializable(v) for k, v in run.summary().items()}
    summary["barrier"] = {
        "a": run.barrier.a,
        "f0_bar": run.barrier.f0_bar,
        "lambda0": run.barrier.lambda0,
        "f_limit": run.barrier.f_limit,
    }
    summary["initial_data"] = initial_info
    write_json(out / "summary.json", summary)
    _manifest(out, cfg, extra={"initial_data": initial_info})
    if not quiet:
        print(
            f"flow: outcome={run.outcome} steps={run.n_steps} t_final={run.t_final:.4g} "
            f"sup_u={summary['final_sup_u']:.3e} angle_slack={run.min_angle_slack:.3e}"
        )
    return summary


def cmd_run_flow(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    summary = _execute_flow(cfg, out, quiet)
    if summary["outcome"] in ("graphicality_lost", "domain_exit"):
        raise NumericalAbort(f"flow stopped: {summary['outcome']}")
    return 0


def cmd_validate_identities(cfg: ExperimentConfig, out: Path, quiet: bool) -> int:
    warp = _build_warp(cfg)
    base = _build_base(cfg)
    seed = cfg["seed"]
    norms: dict[str, list] = {"prop_delta_u": [], "duality": [], "route_gap": []}
    resolutions = []
    b = base
    for _ in range(2):
        u = random_smooth_graph(
            b, warp, seed, cfg["validate.offset"], cfg["validate.amplitude"], cfg["validate.modes"]
        )
        st = GraphState(u, 0.0, warp, b)
        res = identity_residuals(st)
        norms["prop_delta_u"].append(float(np.max(np.abs(res.prop_delta_u.values))))
        norms["duality"].append(duality_gap(st))
        norms["route_gap"].append(route_gap(st))
        resolutions.append(list(b.shape))
        b = refine(b)
    orders = {
        k: (math.log2(v[0] / v[1]) if v[1] > 0 else math.inf) for k, v in norms.items()
    }
    payload = {
        "seed": seed,
        "resolutions": resolutions,
        "residual_max_norms": norms,
        "observed_orders": orders,
    }
    write_json(out / "identities.json", payload)
    _manifest(out, cfg)
    if not quiet:
        for k in norms:
            print(f"{k}: norms={norms[k]} order={orders[k]:.3f}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: Path, quiet: bool, threads: int) -> int:
    key = cfg["sweep.key"]
    if key not in _SCHEMAS["run-flow"]:
        raise ConfigError(f"sweep.key {key!r} is not a run-flow key")
    values = cfg["sweep.values"]
    parse, _ = _SCHEMAS["run-flow"][key]

    def one(idx_value):
        idx, value = idx_value
        row_out = out / f"run_{idx:03d}"
        row_out.mkdir(parents=True, exist_ok=True)
        child_values = dict(cfg.values)
        for k in ("sweep.key", "sweep.values"):
            child_values.pop(k, None)
        try:
            child_values[key] = parse(format(value, ".17g"))
            child = ExperimentConfig("run-flow", child_values, cfg.path)
            summary = _execute_flow(child, row_out, quiet=True)
            return (
                value,
                summary["outcome"],
                summary["min_angle_slack"],
                summary["final_sup_u"],
                "",
            )
        except Exception as exc:  # row isolation: record, keep sweeping
            return (value, "error", math.nan, math.nan, f"{type(exc).__name__}: {exc}")

    tasks = list(enumerate(values))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]

    write_csv(
        out / "sweep_summary.csv",
        (key, "outcome", "min_angle_slack", "final_sup_u", "error"),
        rows,
    )
    _manifest(out, cfg)
    if not quiet:
        for row in rows:
            print(f"sweep {key}={row[0]}: {row[1]} angle_slack={row[2]}")
    return 0


# --- entry point ---------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="warpflow",
        description="Graphical mean curvature flow in warped products: "
        "solver, barriers, and admissibility checks.",
    )
    parser.add_argument("subcommand", choices=sorted(_SCHEMAS))
    parser.add_argument("--config", required=True, help="path to the key = value config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, args.subcommand)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.subcommand == "check-conditions":
            return cmd_check_conditions(cfg, out, args.quiet)
        if args.subcommand == "dss-build":
            return cmd_dss_build(cfg, out, args.quiet)
        if args.subcommand == "run-barrier":
            return cmd_run_barrier(cfg, out, args.quiet)
        if args.subcommand == "run-flow":
            return cmd_run_flow(cfg, out, args.quiet)
        if args.subcommand == "validate-identities":
            return cmd_validate_identities(cfg, out, args.quiet)
        return cmd_sweep(cfg, out, args.quiet, max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalAbort, GraphicalityError, DomainExitError, WarpError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 4


if __name__ == "__main__":
    sys.exit(main())
