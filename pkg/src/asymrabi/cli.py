"""Command-line front end.

Exit codes: 0 success, 1 no displacement sign transition found,
2 invalid arguments, 3 solver non-convergence on a single-point command.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict

import numpy as np
import scipy

from . import __version__
from .eigensolver import IterationLimit, NonConvergence, SolverOptions, ground_state
from .model import ModelParams
from .observables import observables
from .sweep import SCAN_COLUMNS, NoSignChange, evaluate_point, find_epsilon_c, find_g0, scan_g
from .variational import METHODS, solve_variational
from .wavefunction import (
    check_recurrence,
    default_grid,
    occupied_levels,
    polaron_weights,
    synthesize,
)

log = logging.getLogger("asymrabi")

EXIT_OK, EXIT_NO_TRANSITION, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

DEFAULTS = {
    "Omega": 1.0,
    "epsilon": 0.0,
    "tol_residual": 1e-10,
    "tail_weight": 1e-13,
    "max_nmax": 8192,
    "workers": 1,
    "format": None,
    "points": 41,
    "grid_points": 4096,
    "method": "gvm",
}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Shortest round-trip text for numbers; lowercase booleans."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _shared_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("model and solver")
    g.add_argument("--omega", type=float, help="oscillator frequency (units of Omega)")
    g.add_argument("--Omega", type=float, help="tunneling rate (default 1)")
    g.add_argument("--epsilon", type=float, help="asymmetry strength (default 0)")
    g.add_argument("--g", type=float, help="coupling strength")
    g.add_argument("--nmax", type=int, help="fixed Fock truncation, disables adaptivity")
    g.add_argument("--tol-residual", type=float, help="relative eigenpair residual (default 1e-10)")
    g.add_argument("--tail-weight", type=float, help="Fock tail-weight threshold (default 1e-13)")
    g.add_argument("--max-nmax", type=int, help="truncation cap (default 8192)")
    g.add_argument("--workers", type=int, help="parallel workers for sweeps (default 1)")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), help="output format")
    g.add_argument("--config", help="JSON file with default values; flags override it")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_parser()
    parser = argparse.ArgumentParser(
        prog="asymrabi",
        description="Ground state, polaron structure and transition points of the "
                    "asymmetric quantum Rabi model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ground", parents=[shared], help="ground state and observables at one point")

    p = sub.add_parser("scan-g", parents=[shared], help="sweep the coupling strength")
    p.add_argument("--g-min", type=float, help="lower coupling (default 0)")
    p.add_argument("--g-max", type=float, help="upper coupling")
    p.add_argument("--points", type=int, help="number of couplings (default 41)")
    p.add_argument("--in-gc", action="store_true", default=None,
                   help="read --g-min/--g-max in units of g_c")

    p = sub.add_parser("wavefunction", parents=[shared], help="phi_+(x), phi_-(x) on a grid")
    p.add_argument("--grid-points", type=int, help="grid size (default 4096)")

    p = sub.add_parser("find-g0", parents=[shared], help="displacement transition coupling")
    p.add_argument("--tol", type=float, help="bracket width (default 1e-4 g_c)")

    p = sub.add_parser("find-ec", parents=[shared], help="critical asymmetry strength")
    p.add_argument("--tol", type=float, help="bracket width (default 1e-4 omega)")

    p = sub.add_parser("variational", parents=[shared], help="coherent-state variational energy")
    p.add_argument("--method", choices=METHODS, help="ansatz (default gvm)")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    cfg.update({k: v for k, v in vars(args).items() if v is not None})
    return cfg


def _require(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise UsageError("missing required value(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _params(cfg, with_g=True) -> ModelParams:
    _require(cfg, "omega", *(["g"] if with_g else []))
    try:
        return ModelParams(omega=float(cfg["omega"]), epsilon=float(cfg["epsilon"]),
                           g=float(cfg["g"]) if with_g else 0.0, Omega=float(cfg["Omega"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _options(cfg) -> SolverOptions:
    nmax = cfg.get("nmax")
    if nmax is not None and int(nmax) < 2:
        raise UsageError(f"--nmax must be at least 2, got {nmax}")
    return SolverOptions(
        nmax=int(nmax) if nmax is not None else None,
        tol_residual=float(cfg["tol_residual"]),
        tail_weight=float(cfg["tail_weight"]),
        max_nmax=int(cfg["max_nmax"]),
    )


def _meta(options: SolverOptions) -> dict:
    return {
        "asymrabi": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "options": asdict(options),
    }


def cmd_ground(cfg):
    p, opts = _params(cfg), _options(cfg)
    gs = ground_state(p, opts)
    row = evaluate_point(p, opts, solver=lambda *_: gs)
    if (cfg["format"] or "json") == "csv":
        return dump_csv(SCAN_COLUMNS, [row.values()])
    out = {"params": p.as_dict(), "g_c": p.g_c, "energy": gs.energy,
           "observables": observables(gs).as_dict(),
           "overweighted_plus": row.overweighted_plus,
           "nmax": gs.nmax, "residual": gs.residual, "tail_weight": gs.tail_weight,
           "meta": _meta(opts)}
    return dump_json(out)


def cmd_scan(cfg):
    p, opts = _params(cfg, with_g=False), _options(cfg)
    _require(cfg, "g_max")
    lo, hi = float(cfg.get("g_min") or 0.0), float(cfg["g_max"])
    if cfg.get("in_gc"):
        lo, hi = lo * p.g_c, hi * p.g_c
    try:
        result = scan_g(p, lo, hi, int(cfg["points"]), opts, workers=int(cfg["workers"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result.meta = _meta(opts)
    if (cfg["format"] or "csv") == "json":
        return dump_json(result.as_dict())
    return dump_csv(SCAN_COLUMNS, [r.values() for r in result.rows])


def cmd_wavefunction(cfg):
    p, opts = _params(cfg), _options(cfg)
    gs = ground_state(p, opts)
    grid = default_grid(p, points=int(cfg["grid_points"]))
    try:
        wf = synthesize(gs, p, grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    log.info("recurrence self-test: worst norm error %.2e",
             check_recurrence(p.omega, wf.grid, occupied_levels(gs)))
    if (cfg["format"] or "csv") == "json":
        return dump_json({"params": p.as_dict(), "x0": wf.x0,
                          "weights": asdict(polaron_weights(wf)),
                          "x": wf.grid.tolist(), "phi_plus": wf.phi_plus.tolist(),
                          "phi_minus": wf.phi_minus.tolist()})
    return dump_csv(("x", "phi_plus", "phi_minus"), zip(wf.grid, wf.phi_plus, wf.phi_minus))


def _transition_output(cfg, tp, extra):
    if (cfg["format"] or "json") == "csv":
        return dump_csv(("kind", "value", "bracket_lo", "bracket_hi", "iterations"),
                        [(tp.kind, tp.value, tp.bracket[0], tp.bracket[1], tp.iterations)])
    return dump_json({**tp.as_dict(), **extra})


def cmd_find_g0(cfg):
    p, opts = _params(cfg, with_g=False), _options(cfg)
    if p.Omega <= 0:
        raise UsageError("find-g0 needs Omega > 0")
    tol = float(cfg.get("tol") or 1e-4 * p.g_c)
    tp = find_g0(p, tol, opts)
    return _transition_output(cfg, tp, {"g_over_gc": tp.value / p.g_c, "params": p.as_dict()})


def cmd_find_ec(cfg):
    _require(cfg, "omega")
    omega, Omega = float(cfg["omega"]), float(cfg["Omega"])
    if not (omega > 0 and Omega > 0):
        raise UsageError("find-ec needs omega > 0 and Omega > 0")
    opts = _options(cfg)
    tol = float(cfg.get("tol") or 1e-4 * omega)
    tp = find_epsilon_c(omega, tol, Omega=Omega, options=opts)
    return _transition_output(cfg, tp, {"over_omega": tp.value / omega, "omega": omega,
                                        "Omega": Omega})


def cmd_variational(cfg):
    p = _params(cfg)
    try:
        sol = solve_variational(p, cfg["method"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if (cfg["format"] or "json") == "csv":
        keys = sorted(sol.params)
        return dump_csv(("ansatz", "energy", "converged", "iterations", *keys),
                        [(sol.ansatz, sol.energy, sol.converged, sol.iterations,
                          *[sol.params[k] for k in keys])])
    return dump_json({"model": p.as_dict(), **sol.as_dict()})


COMMANDS = {
    "ground": cmd_ground,
    "scan-g": cmd_scan,
    "wavefunction": cmd_wavefunction,
    "find-g0": cmd_find_g0,
    "find-ec": cmd_find_ec,
    "variational": cmd_variational,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _merge(args)
        text = COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    except (NonConvergence, IterationLimit) as exc:
        print(f"{parser.prog}: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except NoSignChange as exc:
        print(f"{parser.prog}: NoSignChange: {exc}", file=sys.stderr)
        return EXIT_NO_TRANSITION
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
