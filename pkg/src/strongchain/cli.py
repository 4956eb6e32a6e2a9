"""Command-line front end.

Subcommands ``solve``, ``simulate``, ``sweep``, ``verify`` and ``degenerate``
read one JSON config (optional; defaults apply) and write CSV/JSON artifacts
under ``<out-dir>/<subcommand>/``.

Exit codes: 0 success, 2 bad config, 3 no fixed point, 4 integrator
stiffness, 5 a verification suite failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import SUITES, ConfigError, load_config
from .dynamics import ChainState, random_state, simulate
from .exceptions import ChainError, NoSolutionError, StiffnessError
from .fixedpoint import oracle_minimize, shoot_solve, zero_force_solution
from .model import AffineField, ChainParams, ConstantField
from .potential import PowerLaw

logger = logging.getLogger("strongchain")

EXIT_OK, EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_STIFF, EXIT_VERIFY = 0, 2, 3, 4, 5


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # repr round-trips exactly
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _out_dir(cfg, command):
    path = Path(cfg.output_dir) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def _residual_tol(cfg):
    tol = cfg.solver.get("residual_tol")
    if tol is not None:
        return tol
    p = cfg.params
    return 1e-8 * float(p.law.force(p.length / p.n_particles))


def positions_rows(x):
    gaps = np.concatenate([[np.nan], np.diff(x)])
    return [(i + 1, xi, None if i == 0 else g) for i, (xi, g) in enumerate(zip(x, gaps))]


def cmd_solve(cfg):
    out = _out_dir(cfg, "solve")
    try:
        res = shoot_solve(cfg.params, cfg.solver.get("tol_position"))
    except NoSolutionError as exc:
        write_json(out / "result.json", {"error": "no_solution", "message": str(exc), "bracket": exc.bracket})
        return EXIT_NO_SOLUTION
    write_csv(out / "positions.csv", ["index", "position", "gap"], positions_rows(res.configuration))
    payload = res.to_dict()
    payload["residual_tol"] = _residual_tol(cfg)
    write_json(out / "result.json", payload)
    if res.residual_max >= payload["residual_tol"]:
        return EXIT_NO_SOLUTION
    return EXIT_OK


def _initial_state(cfg):
    p, init = cfg.params, cfg.simulation["init"]
    kind = init["kind"]
    if kind == "random":
        rng = np.random.default_rng(init.get("seed", 0))
        return random_state(p, rng, init.get("max_speed", 1.0))
    if kind == "equispaced":
        return ChainState.at_rest(p, zero_force_solution(p.n_particles, p.length))
    if kind == "fixed_point":
        return ChainState.at_rest(p, shoot_solve(p).configuration)
    return ChainState.at_rest(p, init["positions"], init.get("velocities"))


def cmd_simulate(cfg):
    p, sim = cfg.params, cfg.simulation
    out = _out_dir(cfg, "simulate")
    target = None
    try:
        target = shoot_solve(p).configuration
    except NoSolutionError:
        logger.warning("no fixed point found; trajectory written without rho")
    try:
        state = _initial_state(cfg)
        rec = simulate(p, state, sim["t_end"], sim["sample_dt"], target=target, dt=sim["dt"], tol_rho=sim["tol_rho"])
    except StiffnessError as exc:
        st = exc.state
        write_json(out / "error.json", {
            "error": "stiffness",
            "message": str(exc),
            "state": None if st is None else {"t": st.time, "positions": st.positions, "velocities": st.velocities},
        })
        return EXIT_STIFF
    write_csv(out / "trajectory.csv", ["t", "H", "rho", "events"], rec.rows())
    write_csv(out / "wall_events.csv", ["t", "side", "v_pre"], [e.to_row() for e in rec.wall_events])
    H = rec.energies
    summary = {"t_end": float(rec.times[-1]), "n_wall_events": len(rec.wall_events), "first_passage": rec.first_passage}
    if p.damping > 0:
        slack = 1e-9 * (1 + np.abs(H[:-1]))
        summary["energy_monotone"] = bool(np.all(np.diff(H) <= slack))
    else:
        # impacts are inelastic, so only impact-free sample intervals must conserve H;
        # Verlet keeps a bounded O(dt^2) oscillation
        quiet = np.diff(rec.events_so_far) == 0
        drift = np.abs(np.diff(H))[quiet]
        summary["energy_conserved_between_impacts"] = bool(np.all(drift < 1e-4 * (1 + np.abs(H[:-1][quiet]))))
    if rec.distances is not None:
        summary["final_rho"] = float(rec.distances[-1])
    write_json(out / "summary.json", summary)
    return EXIT_OK


def _report_rows(report):
    return [(r.N, r.D, r.E, r.b_measured, r.b_predicted) for r in report.records]


def cmd_sweep(cfg):
    p = cfg.params
    out = _out_dir(cfg, "sweep")
    n_list = sorted(cfg.sweep["n_list"])
    law = p.law
    theorem2_ok = p.field.is_constant() and isinstance(law, PowerLaw) and law.alpha == 1.0
    try:
        if theorem2_ok:
            report = analysis.check_theorem2(p, n_list, tol_position=cfg.solver.get("tol_position"))
        else:
            report = _plain_sweep(p, n_list, cfg.solver.get("tol_position"))
    except NoSolutionError as exc:
        write_json(out / "summary.json", {"error": "no_solution", "message": str(exc)})
        return EXIT_NO_SOLUTION
    write_csv(out / "report.csv", ["N", "D", "E", "b_measured", "b_predicted"], _report_rows(report))
    summary = report.to_dict()
    summary["key"] = {"a": getattr(law, "a", None), "L": p.length, "field": p.field.fingerprint()}
    write_json(out / "summary.json", summary)
    return EXIT_OK


def _plain_sweep(params, n_list, tol_position):
    records = []
    for n in n_list:
        res = shoot_solve(params.with_n(n), tol_position)
        prof = analysis.gap_profile(res.configuration, params.length)
        records.append(analysis.TheoremRecord(n, prof.max_deviation, b_measured=prof.b, residual_max=res.residual_max))
    return analysis.TheoremReport("sweep", records, True)


def run_oracle_suite(n, a=2.0):
    """Solver vs minimiser for constant and linear fields; pass if rho < 1e-6 N."""
    out = {}
    for name, fld in (("constant_1", ConstantField(1.0)), ("one_minus_x", AffineField(1.0, -1.0))):
        p = ChainParams(n, 1.0, law=PowerLaw(a), field=fld)
        x_solve = shoot_solve(p).configuration
        x_oracle = oracle_minimize(p, zero_force_solution(n, 1.0), tol_grad=1e-9)
        out[name] = float(np.sum(np.abs(x_solve - x_oracle)))
    return {"rho": out, "passed": all(v < 1e-6 * n for v in out.values())}


def cmd_verify(cfg):
    ver = cfg.verify
    out = _out_dir(cfg, "verify")
    a = cfg.params.law.a if isinstance(cfg.params.law, PowerLaw) else 2.0
    law = PowerLaw(a)
    summary, report_rows = {}, None
    for suite in [s for s in SUITES if s in ver["suites"]]:
        try:
            if suite == "theorem1":
                p = ChainParams(3, 1.0, law=law, field=AffineField(1.0, -1.0))
                rep = analysis.check_theorem1(p, ver["theorem1_n_list"])
                summary[suite] = rep.to_dict()
                report_rows = report_rows or _report_rows(rep)
            elif suite == "theorem2":
                p = ChainParams(3, 1.0, law=law, field=ConstantField(1.0))
                rep = analysis.check_theorem2(p, ver["theorem2_n_list"])
                summary[suite] = rep.to_dict()
                report_rows = _report_rows(rep)
            elif suite == "lemma2":
                p = ChainParams(3, 1.0, law=law, field=ConstantField(1.0))
                n0, later = analysis.lemma2_witness(p)
                summary[suite] = {"N0": n0, "infeasible_at": {str(k): v for k, v in later.items()}, "passed": all(later.values())}
            elif suite == "continuum":
                rep = analysis.continuum_study(law, ver["continuum_y"])
                summary[suite] = {
                    "y": rep.y, "samples": len(rep.x2), "max_residual": rep.max_residual,
                    "n_fixed_points": rep.n_fixed_points, "passed": rep.passed,
                }
            elif suite == "oracle":
                summary[suite] = run_oracle_suite(ver["oracle_n"], a)
        except ChainError as exc:
            summary[suite] = {"passed": False, "error": str(exc)}
    if report_rows is not None:
        write_csv(out / "report.csv", ["N", "D", "E", "b_measured", "b_predicted"], report_rows)
    failing = [name for name, s in summary.items() if not s["passed"]]
    write_json(out / "summary.json", {"suites": summary, "failing": failing, "passed": not failing})
    return EXIT_VERIFY if failing else EXIT_OK


def cmd_degenerate(cfg):
    deg = cfg.degenerate
    out = _out_dir(cfg, "degenerate")
    law = cfg.params.law
    rep = analysis.continuum_study(law, deg["y"], deg["samples"], deg["table_points"], deg["tol"])
    write_csv(out / "degenerate.csv", ["x2", "residual"], zip(rep.x2, rep.residuals))
    write_json(out / "summary.json", {
        "y": rep.y, "max_residual": rep.max_residual, "n_fixed_points": rep.n_fixed_points,
        "tol": rep.tol, "passed": rep.passed,
    })
    return EXIT_OK if rep.passed else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "degenerate": cmd_degenerate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="strongchain", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", nargs="?", help="JSON config file (defaults apply when omitted)")
        sp.add_argument("--n", type=int, help="override n_particles")
        sp.add_argument("--a", type=float, help="override the power-law exponent")
        sp.add_argument("--force-const", type=float, help="replace the field by a constant")
        sp.add_argument("--out-dir", help="output root (default: $CHAIN_OUT_DIR or ./chain_out)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {"n": args.n, "a": args.a, "force_const": args.force_const, "out_dir": args.out_dir}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
