"""Solve a bundled scenario and print per-iteration stats plus verification.

Usage:
    python3 tools/run_scenario.py <name> [mvo|tamvo] [key=value ...]

Override keys: dedup, n_t, d_max (oracle); w_u, w_v, w_z, inner_iters,
sigma0, sigma_decay, sigma_min (inner problem); inner_majors, n_max (outer).
"""
import sys
import time

from stocs.mpcc import MpccConfig
from stocs.oracle import OracleConfig
from stocs.scenario import load_scenario
from stocs.solver import StocsConfig, solve
from stocs.verify import VerifyConfig, verify

name = sys.argv[1]
oracle = sys.argv[2] if len(sys.argv) > 2 else "tamvo"
overrides = dict(kv.split("=") for kv in sys.argv[3:])

ORACLE_KEYS = {"dedup": float, "n_t": int, "d_max": float}
MPCC_KEYS = {"w_u": float, "w_v": float, "w_z": float, "inner_iters": int,
             "sigma0": float, "sigma_decay": float, "sigma_min": float}
SOLVER_KEYS = {"inner_majors": int, "n_max": int}

scen = load_scenario(f"/root/pkg/assets/{name}.yaml")


def live(s):
    rn = s.residual_norms
    print(f"  k={s.k} pts={s.mean_points:.2f} merit={s.merit_after:.4g} "
          f"alpha={s.alpha:.3g} sigma={s.sigma:.3g} "
          f"step={rn['step']:.2e} "
          f"(q={rn['step_q']:.1e} v={rn['step_v']:.1e} u={rn['step_u']:.1e} "
          f"z={rn['step_z']:.1e}) gap={rn['gap']:.2e} "
          f"bal={rn['balance']:.2e} pen={rn['penetration']:.2e} "
          f"feas={rn['feasibility']:.2e} t={s.wall_time:.0f}s", flush=True)


ocfg = OracleConfig(**{k: fn(overrides[k])
                       for k, fn in ORACLE_KEYS.items() if k in overrides})
mcfg = MpccConfig(**{k: fn(overrides[k])
                     for k, fn in MPCC_KEYS.items() if k in overrides})
extra = {k: fn(overrides[k])
         for k, fn in SOLVER_KEYS.items() if k in overrides}
unknown = set(overrides) - set(ORACLE_KEYS) - set(MPCC_KEYS) - set(SOLVER_KEYS)
if unknown:
    sys.exit(f"unknown override keys: {sorted(unknown)}")

cfg = StocsConfig(oracle=oracle, oracle_cfg=ocfg, mpcc=mcfg,
                  on_iteration=live, **extra)
t0 = time.perf_counter()
res = solve(scen, cfg)
dt = time.perf_counter() - t0
print(f"{name} [{oracle}] status={res.status} outer={len(res.stats)} "
      f"mean_pts={res.index_set.mean_count():.2f} time={dt:.1f}s", flush=True)
rep = verify(scen, res, VerifyConfig())
print(rep.table())
print("VERIFY:", "PASS" if rep.passed else "FAIL", flush=True)
