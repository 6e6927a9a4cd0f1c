"""Independent result checking.

Every residual here is computed from scratch, directly from the trajectory,
forces, and scene description; nothing is shared with the solver's own
constraint assembly beyond the geometry queries.  A result that the solver
reports as converged must pass this module's checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .geometry import SdfGrid, pose_from_config, transform_points
from .result import StocsResult
from .scenario import Scenario


@dataclass
class VerifyConfig:
    tol_eq: float = 1e-3         # dynamics, terminal, balance (per row)
    tol_ineq: float = 1e-3       # cone, distance, slip-slack violations
    tol_gap: float = 1e-4        # complementarity, scaled by product count
    tol_pen: float = 1e-4        # deep penetration, scaled by step count
    goal_tol_pos: float = 1e-3
    goal_tol_rot: float = 1e-2
    strict: bool = False

    def scaled(self):
        f = 0.5 if self.strict else 1.0
        return (self.tol_eq * f, self.tol_ineq * f, self.tol_gap * f,
                self.tol_pen * f)


@dataclass
class Check:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.value <= self.tol


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = [f"{'check':<{width}}  {'max violation':>14}  "
                 f"{'tolerance':>10}  result"]
        for c in self.checks:
            lines.append(f"{c.name:<{width}}  {c.value:>14.3e}  "
                         f"{c.tol:>10.1e}  {'pass' if c.ok else 'FAIL'}")
        return "\n".join(lines)


def _rot(q: np.ndarray, dim: int) -> np.ndarray:
    if dim == 2:
        c, s = math.cos(q[2]), math.sin(q[2])
        return np.array([[c, -s], [s, c]])
    r, p, y = q[3], q[4], q[5]
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return Rz @ Ry @ Rx


def _omega(q: np.ndarray, v: np.ndarray, dim: int):
    """World angular velocity from configuration rates."""
    if dim == 2:
        return v[2]
    _, p, y = q[3], q[4], q[5]
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    E = np.array([[cy * cp, -sy, 0.0],
                  [sy * cp, cy, 0.0],
                  [-sp, 0.0, 1.0]])
    return E @ v[3:]


def _contact_basis(grid: SdfGrid, w: np.ndarray, d: int):
    """Normal from the field gradient, tangents from a projected world axis.
    Returns (normal, tangents (d, dim))."""
    dim = grid.dim
    g = grid.gradients_at(w[None, :])[0]
    nrm = np.linalg.norm(g)
    if nrm < 1e-9:
        n = np.zeros(dim)
        n[grid.up_axis] = 1.0
    else:
        n = g / nrm
    axis = np.zeros(dim)
    axis[0] = 1.0
    t1 = axis - (axis @ n) * n
    if np.linalg.norm(t1) < 1e-6:
        axis = np.zeros(dim)
        axis[1] = 1.0
        t1 = axis - (axis @ n) * n
    t1 = t1 / np.linalg.norm(t1)
    if dim == 2 or d == 2:
        return n, np.stack([t1, -t1])
    t2 = np.cross(n, t1)
    angles = 2.0 * math.pi * np.arange(d) / d
    return n, np.outer(np.cos(angles), t1) + np.outer(np.sin(angles), t2)


def _cross(r, f, dim):
    if dim == 2:
        return np.atleast_1d(r[0] * f[1] - r[1] * f[0])
    return np.cross(r, f)


def verify(scenario: Scenario, result: StocsResult,
           config: VerifyConfig | None = None) -> VerificationReport:
    """Re-derive every condition the result claims to satisfy and grade it."""
    cfg = config or VerifyConfig()
    tol_eq, tol_ineq, tol_gap, tol_pen = cfg.scaled()
    scen = scenario
    dim, nq, T, dt = scen.dim, scen.nq, scen.T, scen.dt
    d = scen.friction_dirs
    q = np.asarray(result.q, dtype=float)
    v = np.asarray(result.v, dtype=float)
    u = np.asarray(result.u, dtype=float)

    # boundary conditions
    start_err = float(np.max(np.abs(q[0] - scen.q_start)))
    tp = scen.goal_tol_pos if scen.goal_tol_pos is not None \
        else cfg.goal_tol_pos
    tr = scen.goal_tol_rot if scen.goal_tol_rot is not None \
        else cfg.goal_tol_rot
    gt = np.concatenate([np.full(dim, tp), np.full(nq - dim, tr)])
    goal_err = float(np.max(np.maximum(
        0.0, np.abs(q[T] - scen.q_goal) - gt)))

    # first-order integration consistency
    dyn_err = float(np.max(np.abs(q[:-1] - q[1:] + dt * v[1:]))) if T else 0.0

    bal_err = 0.0
    dist_err = 0.0
    cone_err = 0.0
    mnp_cone_err = 0.0
    slip_err = 0.0
    nonneg_err = 0.0
    push_err = 0.0
    gap = 0.0
    n_products = 0
    pen = 0.0

    for t in range(T + 1):
        R = _rot(q[t], dim)
        pos = q[t, :dim]
        w = _omega(q[t], v[t], dim)

        # deepest full-cloud penetration at this step
        dists = scen.grid.values_at(scen.cloud.points @ R.T + pos)
        pen += max(0.0, -float(np.min(dists)))

        force = scen.mass * scen.gravity.copy()
        torque = np.zeros(1 if dim == 2 else 3)

        for c, mc in enumerate(scen.manip_contacts):
            comps = u[t, c]
            nonneg_cap = float(np.max(np.maximum(0.0, -comps)))
            push_err = max(push_err, nonneg_cap,
                           float(np.max(comps) - scen.u_max))
            mnp_cone_err = max(mnp_cone_err,
                               float(np.sum(comps[1:])
                                     - scen.mu_mnp * comps[0]))
            fl = comps[0] * mc.normal + comps[1:] @ mc.tangents
            fw = R @ fl
            rw = R @ (mc.point - scen.com)
            force = force + fw
            torque = torque + _cross(rw, fw, dim)

        for i, p in enumerate(result.index_set.steps[t]):
            z = np.asarray(result.forces[t][i], dtype=float)
            zN, zD, gamma = z[0], z[1:1 + d], z[1 + d]
            nonneg_err = max(nonneg_err, float(np.max(np.maximum(0.0, -z))))

            wpt = transform_points(q[t], p.point)
            n, tangents = _contact_basis(scen.grid, wpt, d)
            g = float(scen.grid.values_at(wpt[None, :])[0])
            dist_err = max(dist_err, -g)

            cone = scen.mu_env * zN - float(np.sum(zD))
            cone_err = max(cone_err, -cone)

            rw = wpt - (pos + R @ scen.com)
            if dim == 2:
                pv = v[t, :2] + w * np.array([-rw[1], rw[0]])
            else:
                pv = v[t, :3] + np.cross(w, rw)
            slips = tangents @ pv

            gap += abs(zN * g) + abs(cone * gamma)
            n_products += 2
            for j in range(d):
                slack = gamma + slips[j]
                slip_err = max(slip_err, -slack)
                gap += abs(slack * zD[j])
                n_products += 1

            fw = zN * n + zD @ tangents
            force = force + fw
            torque = torque + _cross(rw, fw, dim)

        if result.mode == "quasidynamic":
            force = force - scen.mass * v[t, :dim] / dt
            if dim == 2:
                torque = torque - float(scen.inertia) * v[t, 2] / dt
            else:
                torque = torque - np.asarray(scen.inertia) @ (v[t, 3:] / dt)
        bal_err = max(bal_err, float(np.max(np.abs(force))),
                      float(np.max(np.abs(torque))))

    bounds_err = max(
        float(np.max(np.maximum(0.0, scen.q_low - q))),
        float(np.max(np.maximum(0.0, q - scen.q_high))),
        float(np.max(np.maximum(0.0, scen.v_low - v))),
        float(np.max(np.maximum(0.0, v - scen.v_high))))

    rep = VerificationReport()
    add = rep.checks.append
    add(Check("start configuration", start_err, tol_eq))
    add(Check("goal region", goal_err, tol_eq))
    add(Check("integration", dyn_err, tol_eq))
    add(Check("force-torque balance", bal_err, tol_eq * max(T, 1)))
    add(Check("bounds", bounds_err, tol_ineq))
    add(Check("non-penetration (contacts)", dist_err, tol_ineq))
    add(Check("non-penetration (cloud)", pen, tol_pen * max(T, 1)))
    add(Check("contact friction cones", cone_err, tol_ineq))
    add(Check("manipulator friction cones",
              max(mnp_cone_err, push_err), tol_ineq))
    add(Check("force nonnegativity", nonneg_err, tol_ineq))
    add(Check("slip slack", slip_err, tol_ineq))
    add(Check("complementarity gap", gap, tol_gap * max(n_products, 1)))
    return rep


def static_feasibility_oracle(scenario: Scenario, q: np.ndarray,
                              contact_points: np.ndarray,
                              mode: str = "quasistatic",
                              v: np.ndarray | None = None):
    """Can any admissible forces balance the object at configuration q?

    Solves a linear feasibility problem over manipulator and contact force
    components (cones and nonnegativity as rows, balance as equalities).
    Returns (feasible, witness) where witness maps variable groups to the
    minimizing force components found.
    """
    scen = scenario
    dim = scen.dim
    d = scen.friction_dirs
    q = np.asarray(q, dtype=float)
    contact_points = np.atleast_2d(np.asarray(contact_points, dtype=float))
    R = _rot(q, dim)
    pos = q[:dim]
    nr = 1 if dim == 2 else 3
    C = len(scen.manip_contacts)
    mc = 1 + (scen.manip_contacts[0].d if C else 0)
    n_var = C * mc + len(contact_points) * (1 + d)

    A_eq = np.zeros((dim + nr, n_var))
    b_eq = -scen.mass * scen.gravity.astype(float)
    if mode == "quasidynamic":
        if v is None:
            raise ValueError("quasidynamic feasibility needs velocities")
        b_eq = b_eq + scen.mass * np.asarray(v[:dim]) / scen.dt
    trq = np.zeros(nr)
    if mode == "quasidynamic":
        if dim == 2:
            trq = trq + float(scen.inertia) * v[2] / scen.dt
        else:
            trq = trq + np.asarray(scen.inertia) @ (np.asarray(v[3:])
                                                    / scen.dt)
    b_eq = np.concatenate([b_eq, trq])

    rows_ub = []
    rhs_ub = []
    col = 0
    for c in range(C):
        mcs = scen.manip_contacts[c]
        basis = np.column_stack([mcs.normal, mcs.tangents.T])
        WB = R @ basis
        rw = R @ (mcs.point - scen.com)
        for j in range(mc):
            A_eq[:dim, col + j] = WB[:, j]
            A_eq[dim:, col + j] = _cross(rw, WB[:, j], dim)
        row = np.zeros(n_var)
        row[col] = -scen.mu_mnp
        row[col + 1:col + mc] = 1.0
        rows_ub.append(row)
        rhs_ub.append(0.0)
        col += mc
    for p in contact_points:
        wpt = transform_points(q, p)
        n, tangents = _contact_basis(scen.grid, wpt, d)
        rw = wpt - (pos + R @ scen.com)
        basis = np.column_stack([n, tangents.T])
        for j in range(1 + d):
            A_eq[:dim, col + j] = basis[:, j]
            A_eq[dim:, col + j] = _cross(rw, basis[:, j], dim)
        row = np.zeros(n_var)
        row[col] = -scen.mu_env
        row[col + 1:col + 1 + d] = 1.0
        rows_ub.append(row)
        rhs_ub.append(0.0)
        col += 1 + d

    res = linprog(c=np.ones(n_var), A_ub=np.array(rows_ub),
                  b_ub=np.array(rhs_ub), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n_var, method="highs")
    witness = None
    if res.success:
        witness = {"manipulator": res.x[:C * mc].reshape(C, mc),
                   "contacts": res.x[C * mc:].reshape(len(contact_points),
                                                      1 + d)}
    return bool(res.success), witness
