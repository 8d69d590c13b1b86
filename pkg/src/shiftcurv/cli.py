"""Command-line entry point: solve, verify, bounds, export.

Exit codes: 0 success, 1 verification failed, 2 unreadable/invalid input,
3 non-positive f~, 4 continuation failure.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import horo, solver, verify
from .config import ConfigError, build_problem, parse_config
from .errors import ContinuationError, NonPositiveDataError
from .horo import SupportFunction
from .sphere import ScalarField

log = logging.getLogger("shiftcurv")

SOLUTION_FORMAT = "shiftcurv-solution/1"
REPORT_FORMAT = "shiftcurv-report/1"

EXPORT_FORMATS = ("obj", "csv")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DATA, EXIT_CONTINUATION = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_config(path):
    try:
        return parse_config(_read_json(path))
    except ConfigError as exc:
        raise InputError(str(exc)) from exc


def solution_payload(cfg, spec, state, status="converged", reason=None):
    phi = state.phi.phi.values
    lo, hi = solver.apriori_bounds(spec)
    payload = {
        "format": SOLUTION_FORMAT,
        "status": status,
        "config": cfg.to_dict(),
        "gamma": spec.gamma,
        "t": state.t,
        "phi": phi.tolist(),
        "u": state.phi.u.values.tolist(),
        "residual_norm": state.residual_norm,
        "min_eig_A": state.min_eig_A,
        "diagnostics": {
            "max_eig_A": state.max_eig_A,
            "step_history": [[float(t), int(i), float(r)] for t, i, r in state.step_history],
            "bounds": {"phi_low": lo, "phi_high": hi},
            "midpoint_check": solver.midpoint_check(state.phi),
        },
    }
    if reason is not None:
        payload["reason"] = reason
    return payload


def load_solution(path):
    """Return (config, spec, support function, payload) from a solution file."""
    data = _read_json(path)
    if not isinstance(data, dict) or data.get("format") != SOLUTION_FORMAT:
        raise InputError(f"{path} is not a solution file")
    try:
        cfg = parse_config(data["config"])
        spec = build_problem(cfg)
        if data.get("gamma") is not None:
            spec = solver.ProblemSpec(spec.n, spec.k, spec.f_tilde, float(data["gamma"]), spec.f)
        phi = ScalarField(spec.grid, np.asarray(data["phi"], dtype=float))
        sf = SupportFunction.from_phi(phi)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid solution file {path}: {exc}") from exc
    return cfg, spec, sf, data


def cmd_solve(args):
    cfg = load_config(args.config)
    try:
        spec = build_problem(cfg)
    except NonPositiveDataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    try:
        state = solver.continuation_solve(spec, steps=cfg.steps, tol=cfg.tol,
                                          max_iter=cfg.max_iter, min_dt=cfg.min_dt)
    except ContinuationError as exc:
        log.error("%s", exc)
        if exc.state is not None:
            _write_json(args.out, solution_payload(cfg, spec, exc.state, "failed",
                                                   f"continuation_failure: {exc}"))
        return EXIT_CONTINUATION
    _write_json(args.out, solution_payload(cfg, spec, state))
    log.info("solved: residual %.3e, min eig A %.4g", state.residual_norm, state.min_eig_A)
    return EXIT_OK


def cmd_verify(args):
    cfg, spec, sf, _ = load_solution(args.solution)
    try:
        report = verify.verify_solution(spec, sf)
    except ValueError as exc:
        _write_json(args.report, {"format": REPORT_FORMAT, "pass": False,
                                  "failed": ["geometry"], "reason": str(exc)})
        log.error("verification aborted: %s", exc)
        return EXIT_FAIL
    failed = report.failed()
    if report.linf_rel_error > cfg.verify_tol:
        failed.append("linf_rel_error")
    payload = {"format": REPORT_FORMAT, "pass": not failed, "failed": failed,
               "tolerance": cfg.verify_tol}
    payload.update(report.to_dict())
    _write_json(args.report, payload)
    for name in failed:
        log.error("monitor failed: %s", name)
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_bounds(args):
    cfg = load_config(args.config)
    try:
        spec = build_problem(cfg)
    except NonPositiveDataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    lo, hi = solver.apriori_bounds(spec)
    print(json.dumps({"phi_low": lo, "phi_high": hi,
                      "u_low": float(np.log(lo)), "u_high": float(np.log(hi))}))
    return EXIT_OK


def _fmt(x):
    return format(float(x), ".17g")


def export_obj(sf, path):
    grid = sf.grid
    pts = horo.to_poincare(horo.embed(sf))
    if grid.n == 1:
        pts = np.concatenate([pts, np.zeros((grid.size, 1))], axis=1)
    lines = ["v " + " ".join(_fmt(c) for c in p) for p in pts]
    if grid.n == 1:
        lines.append("l " + " ".join(str(i + 1) for i in range(grid.size)) + " 1")
    else:
        N, M = grid.n_theta, grid.n_phi
        idx = np.arange(grid.size).reshape(N, M) + 1
        for i in range(N - 1):
            for j in range(M):
                jn = (j + 1) % M
                lines.append(f"f {idx[i, j]} {idx[i, jn]} {idx[i + 1, jn]} {idx[i + 1, j]}")
        lines.append("f " + " ".join(str(v) for v in idx[0, ::-1]))
        lines.append("f " + " ".join(str(v) for v in idx[-1]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_csv(sf, k, path):
    grid = sf.grid
    W = horo.shifted_weingarten(sf, horo.build_A(sf))
    curv = horo.shifted_curvatures(W, k)
    header = ["theta", "varphi", "phi", "u"]
    header += [f"kappa_tilde_{i + 1}" for i in range(grid.n)] + [f"H_tilde_{k}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(grid.size):
            row = [grid.theta[i], grid.phi[i], sf.phi.values[i], sf.u.values[i]]
            row += list(curv.kappa_tilde[i]) + [curv.H_tilde_k[i]]
            writer.writerow([_fmt(v) for v in row])


def cmd_export(args):
    if args.format not in EXPORT_FORMATS:
        raise InputError(f"unknown export format '{args.format}'")
    cfg, spec, sf, _ = load_solution(args.solution)
    if args.format == "obj":
        export_obj(sf, args.out)
    else:
        export_csv(sf, spec.k, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shiftcurv",
        description="Prescribed shifted mean curvature solver for h-convex hypersurfaces.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run continuation and write a solution file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-measure curvatures of a solution")
    p.add_argument("--solution", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="print analytic C0 bounds for a config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("export", help="export the Poincare-ball surface")
    p.add_argument("--solution", required=True)
    p.add_argument("--format", required=True, help="obj or csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
