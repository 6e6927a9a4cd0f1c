"""Contact-point selection between outer iterations.

Two strategies grow the per-time-step index sets: the maximum-violation
oracle (closest point per step, broadcast to every step) and the time-active
variant (closest point kept near the step where it was found, optionally with
pose perturbations and a +-n_t window broadcast).  Index sets only ever grow.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SdfGrid, SurfaceCloud, closest_point


@dataclass(frozen=True)
class IndexPoint:
    t: int
    cloud_index: int
    point: np.ndarray      # object frame
    created_iter: int


@dataclass
class IndexSet:
    """Ordered per-time-step lists of instantiated contact points."""
    steps: list[list[IndexPoint]]

    @staticmethod
    def empty(T: int) -> "IndexSet":
        return IndexSet([[] for _ in range(T + 1)])

    def copy(self) -> "IndexSet":
        return IndexSet([list(s) for s in self.steps])

    def counts(self) -> list[int]:
        return [len(s) for s in self.steps]

    def mean_count(self) -> float:
        return float(np.mean(self.counts()))

    def total(self) -> int:
        return sum(self.counts())

    def contains_superset_of(self, other: "IndexSet") -> bool:
        for mine, theirs in zip(self.steps, other.steps):
            have = {(p.t, p.cloud_index) for p in mine}
            if any((p.t, p.cloud_index) not in have for p in theirs):
                return False
        return True


@dataclass
class OracleConfig:
    d_max: float = 0.05          # max object-environment distance for adding
    dedup: float = 1e-3          # min object-frame spacing within one step
    n_t: int = 1                 # time smoothing half-window
    disturbances: list[float] = field(default_factory=lambda: [1e-2])

    def __post_init__(self):
        if not (self.d_max > 0):
            raise ValueError("d_max must be positive")
        if self.dedup < 0 or self.n_t < 0:
            raise ValueError("dedup and n_t must be nonnegative")


def dedup_gate(candidate: np.ndarray, existing: list[IndexPoint],
               threshold: float) -> bool:
    """True iff candidate is strictly farther than `threshold` from every
    already-instantiated point at that time step (object frame)."""
    c = np.asarray(candidate, dtype=float)
    return all(np.linalg.norm(c - p.point) > threshold for p in existing)


def mvo_update(traj_q: np.ndarray, cloud: SurfaceCloud, grid: SdfGrid,
               prev: IndexSet, cfg: OracleConfig, iteration: int = 0) -> IndexSet:
    """Maximum-violation oracle: each step's closest point, broadcast to all
    steps, with the dedup test applied per destination step."""
    result = prev.copy()
    T = len(traj_q) - 1
    for t in range(T + 1):
        cp = closest_point(traj_q[t], cloud, grid)
        if cp.distance >= cfg.d_max:
            continue
        y = cloud.points[cp.index]
        if not dedup_gate(y, result.steps[t], cfg.dedup):
            continue
        for t2 in range(T + 1):
            if dedup_gate(y, result.steps[t2], cfg.dedup):
                result.steps[t2].append(
                    IndexPoint(t2, cp.index, y.copy(), iteration))
    return result


def tamvo_update(traj_q: np.ndarray, cloud: SurfaceCloud, grid: SdfGrid,
                 prev: IndexSet, cfg: OracleConfig,
                 iteration: int = 0) -> IndexSet:
    """Time-active maximum-violation oracle with spatial disturbance and
    time smoothing.

    Stage 1 finds the unperturbed closest point per step; stage 2 repeats the
    search under +-s perturbations of each configuration coordinate; stage 3
    offers every staged point of step t to the steps within the +-n_t window,
    subject to the per-step dedup gate.
    """
    result = prev.copy()
    T = len(traj_q) - 1
    nq = traj_q.shape[1]
    staged: list[list[int]] = [[] for _ in range(T + 1)]
    for t in range(T + 1):
        cp = closest_point(traj_q[t], cloud, grid)
        if cp.distance < cfg.d_max:
            staged[t].append(cp.index)
        for s in cfg.disturbances:
            for axis in range(nq):
                for sign in (1.0, -1.0):
                    qp = traj_q[t].copy()
                    qp[axis] += sign * s
                    cps = closest_point(qp, cloud, grid)
                    if cps.distance < cfg.d_max:
                        staged[t].append(cps.index)
    for t in range(T + 1):
        for t2 in range(max(0, t - cfg.n_t), min(T, t + cfg.n_t) + 1):
            for idx in staged[t]:
                y = cloud.points[idx]
                if dedup_gate(y, result.steps[t2], cfg.dedup):
                    result.steps[t2].append(
                        IndexPoint(t2, idx, y.copy(), iteration))
    return result


ORACLES = {"mvo": mvo_update, "tamvo": tamvo_update}
