"""Command-line entry point: ``stocs solve | verify | plot | bench``."""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time

from .mpcc import MpccConfig, MpccProblem
from .oracle import OracleConfig
from .result import load_result, save_result, save_stats
from .scenario import load_scenario
from .solver import StocsConfig, solve
from .trace import emit_trace
from .verify import VerifyConfig, verify

# keys accepted by --set key=value on `solve` and `bench`
_TUNING = {
    "sigma0": float, "sigma_decay": float, "sigma_min": float,
    "inner_iters": int, "penalty0": float,
    "weights.u": float, "weights.v": float, "weights.z": float,
    "goal_tol_pos": float, "goal_tol_rot": float,
}
_TUNING_ATTR = {
    "weights.u": "w_u", "weights.v": "w_v", "weights.z": "w_z",
}


def _apply_tuning(mpcc: MpccConfig, pairs: list[str]):
    for pair in pairs:
        key, _, raw = pair.partition("=")
        if key not in _TUNING or not raw:
            known = ", ".join(sorted(_TUNING))
            raise SystemExit(f"error: bad tuning option {pair!r} "
                             f"(known keys: {known})")
        setattr(mpcc, _TUNING_ATTR.get(key, key), _TUNING[key](raw))


def _solver_config(args) -> StocsConfig:
    oracle_cfg = OracleConfig(
        d_max=args.dmax, dedup=args.dedup, n_t=args.ts,
        disturbances=[float(s) for s in args.sd.split(",") if s])
    mpcc = MpccConfig()
    _apply_tuning(mpcc, args.set or [])
    return StocsConfig(oracle=args.oracle, oracle_cfg=oracle_cfg,
                       mode=args.mode, mpcc=mpcc)


def _add_solve_flags(p: argparse.ArgumentParser):
    p.add_argument("--oracle", choices=("mvo", "tamvo"), default="mvo")
    p.add_argument("--sd", default="1e-2", metavar="s1,s2,...",
                   help="spatial disturbance magnitudes (m)")
    p.add_argument("--ts", type=int, default=1, metavar="n_t",
                   help="time-smoothing half window")
    p.add_argument("--dmax", type=float, default=0.05,
                   help="max distance for oracle candidates (m)")
    p.add_argument("--dedup", type=float, default=1e-3,
                   help="min spacing between index points (m)")
    p.add_argument("--mode", choices=("quasistatic", "quasidynamic"),
                   default="quasistatic")
    p.add_argument("--set", action="append", metavar="key=value",
                   help="tuning override (e.g. sigma0=1e-2, weights.u=1.0)")


def _cmd_solve(args) -> int:
    scen = load_scenario(args.scenario)
    res = solve(scen, _solver_config(args))
    print(f"status: {res.status}")
    print(f"outer iterations: {len(res.stats)}")
    print(f"mean index points: {res.index_set.mean_count():.2f}")
    print(f"objective: {res.objective:.6g}")
    if args.out:
        save_result(args.out, res)
        print(f"result written to {args.out}")
    if args.stats:
        save_stats(args.stats, res.stats)
        print(f"stats written to {args.stats}")
    return 0 if res.converged else 2


def _cmd_verify(args) -> int:
    scen = load_scenario(args.scenario)
    res = load_result(args.result)
    rep = verify(scen, res, VerifyConfig(strict=args.strict))
    print(rep.table())
    print("verdict:", "PASS" if rep.passed else "FAIL")
    return 0 if rep.passed else 1


def _cmd_plot(args) -> int:
    scen = load_scenario(args.scenario)
    res = load_result(args.result)
    verified = verify(scen, res).passed if res.converged else False
    paths = emit_trace(scen, res, args.out, verified=verified)
    print(f"{len(paths)} SVG files written to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    rows = []
    for path in args.scenarios:
        scen = load_scenario(path)
        cfg = _solver_config(args)
        t0 = time.perf_counter()
        res = solve(scen, cfg)
        wall = time.perf_counter() - t0
        problem = MpccProblem(scen, res.index_set, res.q, cfg.mpcc, cfg.mode)
        vanilla = problem.vanilla_complementarity_rows()
        inst = problem.n_complementarity
        rows.append({
            "scenario": scen.name,
            "points": len(scen.cloud),
            "status": res.status,
            "outer_iters": len(res.stats),
            "mean_index_points": f"{res.index_set.mean_count():.3f}",
            "time_s": f"{wall:.2f}",
            "comp_rows_vanilla": vanilla,
            "comp_rows_instantiated": inst,
            "comp_row_ratio": f"{vanilla / max(inst, 1):.1f}",
        })
        print(f"{scen.name}: {res.status}, {len(res.stats)} outer, "
              f"{res.index_set.mean_count():.2f} mean pts, {wall:.1f}s, "
              f"comp rows {vanilla} vs {inst}")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
        print(f"CSV written to {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stocs",
        description="Contact-implicit trajectory optimization for "
                    "quasi-static rigid-object manipulation.")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="plan a trajectory for a scenario")
    ps.add_argument("scenario")
    _add_solve_flags(ps)
    ps.add_argument("--out", metavar="result.json")
    ps.add_argument("--stats", metavar="stats.csv")
    ps.set_defaults(fn=_cmd_solve)

    pv = sub.add_parser("verify", help="check a result against its scenario")
    pv.add_argument("scenario")
    pv.add_argument("result")
    pv.add_argument("--strict", action="store_true",
                    help="halve all tolerances")
    pv.set_defaults(fn=_cmd_verify)

    pp = sub.add_parser("plot", help="render SVG trajectory traces")
    pp.add_argument("scenario")
    pp.add_argument("result")
    pp.add_argument("--out", default="trace", metavar="DIR")
    pp.set_defaults(fn=_cmd_plot)

    pb = sub.add_parser("bench", help="solve a scenario list, emit a CSV")
    pb.add_argument("scenarios", nargs="+")
    _add_solve_flags(pb)
    pb.add_argument("--out", metavar="bench.csv")
    pb.set_defaults(fn=_cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
