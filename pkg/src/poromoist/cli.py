"""Command-line front end.

Subcommands:

* run                time-march one configured problem and certify it
* mms                manufactured-solution convergence study
* ladder             regularization-refinement (Cauchy) study
* sweep              cartesian parameter sweep with per-cell isolation
* validate-saturation  structural checks on the configured model

Exit codes: 0 all requested certifications passed, 1 a certification or
the solver failed, 2 the configuration was unusable.  All file outputs
are deterministic: floats are written with repr (shortest round-trip
form), JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import apply_override, build_setup, load_config, validate_config
from .diagnostics import RECORD_FIELDS, certify_run
from .errors import ConfigError, PoromoistError
from .harness import make_default_mms_case, mms_study, regularization_ladder, sweep
from .model import darcy_velocity, validate_saturation_assumptions
from .stepper import run

MMS_ORDER_FLOOR = {"central": 1.9, "upwind": 0.9}
LADDER_VARIATION_CAP = 0.10


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _load_with_flags(args) -> dict:
    data = load_config(args.config)
    if getattr(args, "cadence", None) is not None:
        data = json.loads(json.dumps(data))
        data.setdefault("output", {})["cadence"] = args.cadence
        validate_config(data)
    if getattr(args, "advection", None) is not None:
        data = json.loads(json.dumps(data))
        data["stepping"]["advection"] = args.advection
        validate_config(data)
    return data


def _snapshot_indices(steps: int, cadence: float, dt: float) -> list[int]:
    every = max(1, int(round(cadence / dt)))
    picked = set(range(0, steps + 1, every))
    picked.add(steps)
    return sorted(picked)


def _cmd_run(args) -> int:
    setup = build_setup(_load_with_flags(args))
    result = run(setup.initial, setup.step, setup.reg, setup.params,
                 setup.model, setup.grid)
    cert = certify_run(result)

    os.makedirs(args.out, exist_ok=True)
    series_path = os.path.join(args.out, "series.csv")
    _write_csv(series_path, RECORD_FIELDS,
               ([_fmt(getattr(rec, name)) for name in RECORD_FIELDS]
                for rec in result.records))

    snap_path = os.path.join(args.out, "snapshots.csv")
    steps = len(result.states) - 1
    rows = []
    for k in _snapshot_indices(steps, setup.cadence, setup.step.dt):
        state = result.states[k]
        u_face = darcy_velocity(state, params=setup.params, s=setup.reg.s).values
        u_cell = 0.5 * (u_face[:-1] + u_face[1:])
        for i, x in enumerate(setup.grid.centers):
            rows.append((_fmt(state.t), _fmt(float(x)),
                         _fmt(float(state.rho.values[i])),
                         _fmt(float(state.theta.values[i])),
                         _fmt(float(u_cell[i]))))
    _write_csv(snap_path, ("t", "x", "rho", "theta", "u"), rows)

    report = {
        "command": "run",
        "n": setup.grid.n,
        "dt": setup.step.dt,
        "t_end": result.t_end,
        "steps": steps,
        "advection": setup.step.advection,
        "eps": setup.reg.eps,
        "nu": setup.reg.nu,
        "certification": cert.summary(),
        "picard_total": int(sum(r.picard_iterations for r in result.records)),
        "picard_max": int(max(r.picard_iterations for r in result.records)),
    }
    _write_json(os.path.join(args.out, "report.json"), report)

    verdict = "PASS" if cert.passed else "FAIL"
    _say(args, f"certification: {verdict} "
               f"(mass residual {cert.max_mass_residual:.3e}, "
               f"envelope slack {cert.envelope.min_slack:.3e})")
    for failure in cert.failures:
        _say(args, f"  - {failure}")
    return 0 if cert.passed else 1


def _cmd_mms(args) -> int:
    data = load_config(args.config)
    setup = build_setup(data)
    opts = data.get("mms", {})
    advection = args.advection or opts.get("advection", "central")
    case = make_default_mms_case(setup.params, setup.model)
    report = mms_study(
        case, setup.params, setup.model,
        grid_sizes=tuple(opts.get("grid_sizes", (16, 32, 64, 128))),
        t_end=opts.get("t_end", 0.1),
        steps_coarse=opts.get("steps_coarse", 10 if advection == "central" else 20),
        advection=advection,
        eps=opts.get("eps", 1e-8),
        nu=opts.get("nu", 5e-9),
    )
    floor = MMS_ORDER_FLOOR[advection]
    passed = (report.rho_orders[-1] >= floor and report.theta_orders[-1] >= floor)

    os.makedirs(args.out, exist_ok=True)
    rows = []
    for i, n in enumerate(report.grid_sizes):
        rows.append((str(n), _fmt(report.dts[i]),
                     _fmt(float(report.rho_errors[i])),
                     _fmt(float(report.theta_errors[i])),
                     _fmt(float(report.rho_orders[i - 1])) if i else "",
                     _fmt(float(report.theta_orders[i - 1])) if i else ""))
    _write_csv(os.path.join(args.out, "mms.csv"),
               ("n", "dt", "rho_error", "theta_error", "rho_order", "theta_order"),
               rows)
    _write_json(os.path.join(args.out, "report.json"), {
        "command": "mms",
        "case": case.name,
        "advection": advection,
        "order_floor": floor,
        "grid_sizes": list(report.grid_sizes),
        "dts": list(report.dts),
        "rho_errors": report.rho_errors.tolist(),
        "theta_errors": report.theta_errors.tolist(),
        "rho_orders": report.rho_orders.tolist(),
        "theta_orders": report.theta_orders.tolist(),
        "passed": bool(passed),
    })
    _say(args, f"observed orders (finest pair): rho {report.rho_orders[-1]:.3f}, "
               f"theta {report.theta_orders[-1]:.3f} (floor {floor})")
    return 0 if passed else 1


def _cmd_ladder(args) -> int:
    data = load_config(args.config)
    setup = build_setup(data)
    opts = data.get("ladder", {})
    report = regularization_ladder(
        setup.initial, setup.step, setup.params, setup.model, setup.grid,
        t_end=opts.get("t_end"),
        eps0=opts.get("eps0", 0.1),
        rungs=opts.get("rungs", 4),
        factor=opts.get("factor", 2.0),
        nu_ratio=opts.get("nu_ratio", 0.5),
        inject_non_monotone=opts.get("inject_non_monotone", False),
    )
    variation_ok = all(v <= LADDER_VARIATION_CAP for v in report.monitor_variation.values())
    passed = report.monotone and variation_ok

    os.makedirs(args.out, exist_ok=True)
    rows = []
    for j, (eps_j, nu_j) in enumerate(zip(report.eps_values, report.nu_values)):
        diff = _fmt(float(report.differences[j - 1])) if j else ""
        rows.append((str(j), _fmt(eps_j), _fmt(nu_j), diff,
                     _fmt(float(report.entropy_monitors[j])),
                     _fmt(float(report.l4_monitors[j]))))
    _write_csv(os.path.join(args.out, "ladder.csv"),
               ("rung", "eps", "nu", "difference", "entropy", "l4"), rows)
    _write_json(os.path.join(args.out, "report.json"), {
        "command": "ladder",
        "eps_values": list(report.eps_values),
        "nu_values": list(report.nu_values),
        "differences": report.differences.tolist(),
        "entropy_monitors": report.entropy_monitors.tolist(),
        "l4_monitors": report.l4_monitors.tolist(),
        "monotone": bool(report.monotone),
        "monitor_variation": report.monitor_variation,
        "variation_cap": LADDER_VARIATION_CAP,
        "passed": bool(passed),
    })
    _say(args, f"ladder: monotone={report.monotone}, "
               f"variation={report.monitor_variation}")
    return 0 if passed else 1


def _cmd_sweep(args) -> int:
    data = load_config(args.config)
    if "sweep" not in data:
        raise ConfigError(f"{args.config}: config has no sweep section")
    axes = data["sweep"]["axes"]

    def run_cell(overrides: dict):
        cell = data
        for path, value in overrides.items():
            cell = apply_override(cell, path, value)
        setup = build_setup(cell)
        result = run(setup.initial, setup.step, setup.reg, setup.params,
                     setup.model, setup.grid)
        return certify_run(result).summary()

    report = sweep(axes, run_cell)
    keys = sorted(axes)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    all_ok = True
    for cell in report.cells:
        certified = cell.status == "ok" and cell.payload["passed"]
        all_ok = all_ok and certified
        rows.append(tuple(_fmt(cell.overrides[k]) for k in keys)
                    + (cell.status, str(certified).lower(), cell.detail))
    _write_csv(os.path.join(args.out, "sweep.csv"),
               tuple(keys) + ("status", "certified", "detail"), rows)
    _write_json(os.path.join(args.out, "report.json"), {
        "command": "sweep",
        "axes": {k: list(v) for k, v in axes.items()},
        "cells": [
            {"overrides": cell.overrides, "status": cell.status,
             "detail": cell.detail,
             "certification": cell.payload if cell.status == "ok" else None}
            for cell in report.cells
        ],
        "passed": all_ok,
    })
    _say(args, f"sweep: {len(report.cells)} cells, "
               f"{len(report.failures)} raised, passed={all_ok}")
    return 0 if all_ok else 1


def _cmd_validate_saturation(args) -> int:
    setup = build_setup(load_config(args.config))
    report = validate_saturation_assumptions(setup.model)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "report.json"), {
            "command": "validate-saturation",
            **report.summary(),
        })
    verdict = "PASS" if report.passed else "FAIL"
    _say(args, f"saturation model: {verdict} "
               f"(zero limit {report.zero_limit_pass}, "
               f"unbounded growth {report.infinity_limit_pass})")
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poromoist",
        description="Verified solver for coupled vapor/heat transport in a porous slab.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cadence=False, advection=False):
        p.add_argument("config", help="path to a JSON config file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--quiet", action="store_true", help="suppress console summary")
        if cadence:
            p.add_argument("--cadence", type=float, default=None,
                           help="override snapshot cadence (time units)")
        if advection:
            p.add_argument("--advection", choices=("upwind", "central"), default=None,
                           help="override the advection discretization")

    common(sub.add_parser("run", help="time-march one problem and certify it"),
           cadence=True, advection=True)
    common(sub.add_parser("mms", help="manufactured-solution convergence study"),
           advection=True)
    common(sub.add_parser("ladder", help="regularization refinement study"))
    common(sub.add_parser("sweep", help="cartesian parameter sweep"))
    p_val = sub.add_parser("validate-saturation",
                           help="structural checks on the saturation model")
    p_val.add_argument("config", help="path to a JSON config file")
    p_val.add_argument("--out", default=None, help="optional report directory")
    p_val.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "mms": _cmd_mms,
        "ladder": _cmd_ladder,
        "sweep": _cmd_sweep,
        "validate-saturation": _cmd_validate_saturation,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PoromoistError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
