"""Solve results, per-iteration statistics, and their JSON/CSV round trips."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .oracle import IndexPoint, IndexSet

SCHEMA_VERSION = "1"


class ResultFormatError(ValueError):
    pass


@dataclass
class IterationStats:
    k: int
    counts: list[int]              # |Y_t| per step
    mean_points: float
    merit_before: float
    merit_after: float
    alpha: float
    sigma: float
    residual_norms: dict[str, float]
    wall_time: float


@dataclass
class StocsResult:
    status: str                    # converged | not-converged | error
    q: np.ndarray                  # (T+1, nq)
    v: np.ndarray                  # (T+1, nq)
    u: np.ndarray                  # (T+1, C, mc)
    index_set: IndexSet
    forces: list[list[np.ndarray]]  # per (t, i): (zN, zD1..zDd, gamma)
    stats: list[IterationStats]
    mode: str = "quasistatic"
    objective: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _index_set_to_json(ix: IndexSet) -> list:
    return [[{"t": p.t, "index": p.cloud_index,
              "point": [float(c) for c in p.point],
              "iter": p.created_iter} for p in step]
            for step in ix.steps]


def _index_set_from_json(raw: list) -> IndexSet:
    steps = []
    for step in raw:
        steps.append([IndexPoint(int(p["t"]), int(p["index"]),
                                 np.array(p["point"], dtype=float),
                                 int(p["iter"])) for p in step])
    return IndexSet(steps)


def result_to_dict(res: StocsResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "status": res.status,
        "mode": res.mode,
        "objective": res.objective,
        "q": res.q.tolist(),
        "v": res.v.tolist(),
        "u": res.u.tolist(),
        "index_set": _index_set_to_json(res.index_set),
        "forces": [[f.tolist() for f in step] for step in res.forces],
        "stats": [{
            "k": s.k, "counts": s.counts, "mean_points": s.mean_points,
            "merit_before": s.merit_before, "merit_after": s.merit_after,
            "alpha": s.alpha, "sigma": s.sigma,
            "residual_norms": s.residual_norms, "wall_time": s.wall_time,
        } for s in res.stats],
        "metadata": res.metadata,
    }


def result_from_dict(doc: dict) -> StocsResult:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ResultFormatError(
            f"result schema version {version!r} not supported "
            f"(this build reads {SCHEMA_VERSION!r})")
    stats = [IterationStats(int(s["k"]), list(s["counts"]),
                            float(s["mean_points"]), float(s["merit_before"]),
                            float(s["merit_after"]), float(s["alpha"]),
                            float(s["sigma"]), dict(s["residual_norms"]),
                            float(s["wall_time"]))
             for s in doc["stats"]]
    return StocsResult(
        status=doc["status"],
        q=np.array(doc["q"], dtype=float),
        v=np.array(doc["v"], dtype=float),
        u=np.array(doc["u"], dtype=float),
        index_set=_index_set_from_json(doc["index_set"]),
        forces=[[np.array(f, dtype=float) for f in step]
                for step in doc["forces"]],
        stats=stats, mode=doc.get("mode", "quasistatic"),
        objective=float(doc.get("objective", 0.0)),
        metadata=doc.get("metadata", {}))


def save_result(path: str, res: StocsResult) -> None:
    with open(path, "w") as f:
        json.dump(result_to_dict(res), f, indent=1)
        f.write("\n")


def load_result(path: str) -> StocsResult:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ResultFormatError(f"{path}: invalid result file: {e}") from e
    return result_from_dict(doc)


STATS_COLUMNS = ["k", "mean_points", "merit_before", "merit_after",
                 "alpha", "sigma", "wall_time"]


def stats_to_csv(stats: list[IterationStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    for s in stats:
        w.writerow([s.k, repr(s.mean_points), repr(s.merit_before),
                    repr(s.merit_after), repr(s.alpha), repr(s.sigma),
                    repr(s.wall_time)])
    return buf.getvalue()


def save_stats(path: str, stats: list[IterationStats]) -> None:
    with open(path, "w") as f:
        f.write(stats_to_csv(stats))
