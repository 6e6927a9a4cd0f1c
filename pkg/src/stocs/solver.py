"""Outer exchange loop: oracle growth, inner solves, merit line search,
convergence testing, and per-iteration statistics."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import cloud_distances
from .mpcc import MpccConfig, MpccProblem
from .nlp import SolverFailure
from .oracle import ORACLES, IndexSet, OracleConfig
from .result import IterationStats, StocsResult
from .scenario import Scenario, ScenarioError


@dataclass
class StocsConfig:
    eps_x: float = 1e-4          # step size tolerance
    eps_gap: float = 1e-4        # complementarity gap tolerance
    eps_s: float = 1e-3          # balance tolerance (N / N*m)
    eps_p: float = 1e-4          # penetration tolerance (m)
    n_max: int = 30              # outer iterations
    n_ls: int = 20               # line search trials
    inner_majors: int = 50       # S: major iterations per inner solve
    merit_penalty: float = 1e2
    beta: float = 0.5            # line-search shrink factor
    oracle: str = "mvo"
    oracle_cfg: OracleConfig = field(default_factory=OracleConfig)
    mode: str = "quasistatic"
    mpcc: MpccConfig = field(default_factory=MpccConfig)
    on_iteration: object = None  # optional callable(IterationStats)

    def __post_init__(self):
        for name in ("eps_x", "eps_gap", "eps_s", "eps_p"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.oracle not in ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}")


def shortest_arc(a0: float, a1: float) -> float:
    """Angle increment from a0 to a1 along the shorter arc."""
    return (a1 - a0 + math.pi) % (2.0 * math.pi) - math.pi


def initialize_trajectory(q_start: np.ndarray, q_goal: np.ndarray, T: int,
                          dt: float, dim: int):
    """Linear interpolation from start to goal; angles take the shorter arc.
    Velocities are the constant finite-difference rates; forces start at 0."""
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    delta = q_goal - q_start
    for a in range(dim, len(q_start)):
        delta[a] = shortest_arc(q_start[a], q_goal[a])
    ts = np.arange(T + 1)[:, None] / T
    q = q_start[None, :] + ts * delta[None, :]
    v = np.tile(delta / (T * dt), (T + 1, 1))
    return q, v


def penetration_guard(scenario: Scenario, q: np.ndarray) -> float:
    """Sum over steps of the full-cloud deepest penetration |g*-(q_t)|."""
    total = 0.0
    for t in range(len(q)):
        d = float(np.min(cloud_distances(q[t], scenario.cloud, scenario.grid)))
        total += max(0.0, -d)
    return total


def merit(problem: MpccProblem, x: np.ndarray, mu: float) -> float:
    """phi = objective + mu * (L1 violation on the instantiated set plus the
    full-cloud deep-penetration guard)."""
    f, _ = problem.objective(x)
    report = problem.residual_report(x)
    q, _, _, _ = problem.layout.split(x)
    return f + mu * (report.l1() + penetration_guard(problem.scenario, q))


def line_search(problem: MpccProblem, x: np.ndarray, delta: np.ndarray,
                cfg: StocsConfig) -> tuple[float, np.ndarray, float, float]:
    """Backtracking over the exact-problem merit: try 1, beta, beta^2, ...;
    accept the first non-increasing step, else alpha = 0."""
    phi0 = merit(problem, x, cfg.merit_penalty)
    alpha = 1.0
    for _ in range(cfg.n_ls):
        cand = x + alpha * delta
        phi = merit(problem, cand, cfg.merit_penalty)
        if phi <= phi0:
            return alpha, cand, phi0, phi
        alpha *= cfg.beta
    return 0.0, x.copy(), phi0, phi0


def complementarity_measure(problem: MpccProblem, x: np.ndarray) -> float:
    """|zN|^T |g|  +  sum_j |slip_j|^T |cone| over the instantiated set."""
    lay = problem.layout
    q, v, _, _ = lay.split(x)
    g, _ = problem._distances(q)
    s, _, _ = problem._slips(q, v)
    total = 0.0
    for p in range(problem.P):
        t, i = problem.pair_t[p], problem.pair_i[p]
        zs = lay.z_slice(t, i)
        zN = x[zs.start]
        zD = x[zs.start + 1:zs.stop - 1]
        cone = problem.scenario.mu_env * zN - float(np.sum(zD))
        total += abs(zN) * abs(g[p])
        total += float(np.sum(np.abs(s[p]))) * abs(cone)
    return total


@dataclass
class ConvergenceReport:
    step_small: bool
    gap_small: bool
    balanced: bool
    non_penetrating: bool
    feasible: bool
    values: dict[str, float]

    @property
    def converged(self) -> bool:
        return (self.step_small and self.gap_small and self.balanced
                and self.non_penetrating and self.feasible)

    def failing(self) -> list[str]:
        names = ("step_small", "gap_small", "balanced", "non_penetrating",
                 "feasible")
        return [n for n in names if not getattr(self, n)]


def converged(problem: MpccProblem, x: np.ndarray, alpha: float,
              delta: np.ndarray, cfg: StocsConfig) -> ConvergenceReport:
    """Convergence test on the post-line-search iterate.

    Conditions: step size, complementarity gap, force-torque balance, and
    full-cloud penetration, each with a size-scaled budget; plus a plain
    feasibility gate on the remaining instantiated constraints so that a
    converged result always passes the independent verifier.
    """
    lay = problem.layout
    T = lay.T
    report = problem.residual_report(x)
    q, _, _, _ = lay.split(x)

    step = alpha * float(np.linalg.norm(delta))
    n_xz = lay.nx
    gap = complementarity_measure(problem, x)
    n_cc = max(problem.n_complementarity, 1)
    balance = report.inf_norm("balance")
    pen = penetration_guard(problem.scenario, q)
    feas = max(report.inf_norm("dynamics"), report.inf_norm("terminal"),
               report.inf_norm("distance"), report.inf_norm("manip_cone"),
               report.inf_norm("env_cone"), report.inf_norm("slip"))
    return ConvergenceReport(
        step_small=step <= cfg.eps_x * n_xz,
        gap_small=gap <= cfg.eps_gap * n_cc,
        balanced=balance <= cfg.eps_s * T,
        non_penetrating=pen < cfg.eps_p * T,
        feasible=feas <= cfg.eps_s,
        values={"step": step, "gap": gap, "balance": balance,
                "penetration": pen, "feasibility": feas})


def solve(scenario: Scenario, cfg: StocsConfig | None = None) -> StocsResult:
    """Run the full exchange method on a scenario."""
    cfg = cfg or StocsConfig()
    scen = scenario
    if cfg.mode == "quasidynamic" and scen.inertia is None:
        raise ScenarioError(
            "quasidynamic mode needs the object's rotational inertia, "
            "which this scenario does not provide")
    T, nq = scen.T, scen.nq
    oracle_fn = ORACLES[cfg.oracle]

    q, v = initialize_trajectory(scen.q_start, scen.q_goal, T, scen.dt,
                                 scen.dim)
    C = len(scen.manip_contacts)
    mc = 1 + (scen.manip_contacts[0].d if C else 0)
    u = np.zeros((T + 1, C, mc))
    index_set = IndexSet.empty(T)
    warm: dict[tuple[int, int], np.ndarray] = {}
    stats: list[IterationStats] = []
    stalled = 0
    status = "not-converged"
    problem = None
    x = None

    for k in range(1, cfg.n_max + 1):
        tic = time.perf_counter()
        grown = oracle_fn(q, scen.cloud, scen.grid, index_set,
                          cfg.oracle_cfg, k)
        added = grown.total() - index_set.total()
        index_set = grown

        problem = MpccProblem(scen, index_set, q, cfg.mpcc, cfg.mode)
        x = problem.initial_vector(q, v, u, warm)
        sigma = cfg.mpcc.sigma_at(k)
        relaxed = problem.relax(sigma)
        try:
            it = relaxed.nlp_step(
                x, max_major=cfg.inner_majors,
                tol_feas=min(1e-6, 0.1 * cfg.eps_s),
                tol_stat=1e-6, merit_penalty=cfg.merit_penalty)
        except SolverFailure as e:
            return StocsResult("error", q, v, u, index_set,
                               _forces_from(problem, x), stats,
                               mode=cfg.mode, objective=float("nan"),
                               metadata={"error": str(e),
                                         **_meta(scen, cfg)})
        delta = it.x - x
        alpha, x, phi0, phi1 = line_search(problem, x, delta, cfg)

        q, v, u, _ = problem.layout.split(x)
        q, v, u = q.copy(), v.copy(), u.copy()
        warm = problem.warm_force_map(x)

        conv = converged(problem, x, alpha, delta, cfg)
        report = problem.residual_report(x)
        lay = problem.layout
        block_steps = {
            "step_q": alpha * float(np.linalg.norm(delta[lay.off_q:lay.off_v])),
            "step_v": alpha * float(np.linalg.norm(delta[lay.off_v:lay.off_u])),
            "step_u": alpha * float(np.linalg.norm(delta[lay.off_u:lay.off_z])),
            "step_z": alpha * float(np.linalg.norm(delta[lay.off_z:]))}
        stats.append(IterationStats(
            k=k, counts=index_set.counts(),
            mean_points=index_set.mean_count(),
            merit_before=phi0, merit_after=phi1, alpha=alpha, sigma=sigma,
            residual_norms={**report.inf_norms(), **conv.values,
                            **block_steps},
            wall_time=time.perf_counter() - tic))
        if cfg.on_iteration is not None:
            cfg.on_iteration(stats[-1])

        if conv.converged:
            # frames above were placed at the previous iterate; confirm on a
            # problem assembled at the accepted trajectory so an independent
            # re-check of the result agrees
            problem = MpccProblem(scen, index_set, q, cfg.mpcc, cfg.mode)
            if converged(problem, x, alpha, delta, cfg).converged:
                status = "converged"
                break
        moved = alpha * float(np.linalg.norm(delta)) > 0.0
        if added == 0 and not moved and sigma <= cfg.mpcc.sigma_min:
            break  # next iteration would be identical
        if alpha == 0.0 and added == 0:
            stalled += 1
            if stalled >= 2:
                break
        else:
            stalled = 0

    obj, _ = problem.objective(x)
    return StocsResult(status, q, v, u, index_set,
                       _forces_from(problem, x), stats, mode=cfg.mode,
                       objective=float(obj), metadata=_meta(scen, cfg))


def _forces_from(problem: MpccProblem, x: np.ndarray) -> list[list[np.ndarray]]:
    lay = problem.layout
    return [[x[lay.z_slice(t, i)].copy() for i in range(lay.counts[t])]
            for t in range(lay.T + 1)]


def _meta(scen: Scenario, cfg: StocsConfig) -> dict:
    return {
        "scenario": scen.name,
        "oracle": cfg.oracle,
        "objective_form": "w_u*|u|^2 + w_v*|v|^2 + w_z*|z|^2",
        "weights": {"u": cfg.mpcc.w_u, "v": cfg.mpcc.w_v, "z": cfg.mpcc.w_z},
        "tolerances": {"eps_x": cfg.eps_x, "eps_gap": cfg.eps_gap,
                       "eps_s": cfg.eps_s, "eps_p": cfg.eps_p},
    }
