"""Finite MPCC assembly over an instantiated index set.

Builds the inner optimization of the exchange loop: trajectory, manipulator
force, and contact force variables; dynamics, friction-cone, complementarity,
and force-torque balance constraints; and the relaxation of complementarity
products a*b = 0 into a*b <= sigma.  Contact frames are placed from the
trajectory supplied at assembly time and held fixed during one inner solve.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from . import nlp
from .contact import (ContactFrame, build_frame, deuler_rate_matrix,
                      euler_rate_matrix)
from .geometry import pose_from_config, rotation_jacobians, transform_points
from .oracle import IndexSet
from .scenario import Scenario


class AssemblyError(ValueError):
    pass


@dataclass
class MpccConfig:
    """Inner-problem knobs: objective weights, relaxation schedule, solver."""
    w_u: float = 1.0
    w_v: float = 0.1
    w_z: float = 1e-3
    sigma0: float = 1e-2
    sigma_decay: float = 0.2
    sigma_min: float = 1e-4
    inner_iters: int = 600
    penalty0: float = 10.0
    goal_tol_pos: float = 1e-3
    goal_tol_rot: float = 1e-2

    def sigma_at(self, k: int) -> float:
        """Relaxation after k-1 tightenings (k = 1 is the first solve)."""
        return max(self.sigma_min, self.sigma0 * self.sigma_decay ** (k - 1))


class VarLayout:
    """Flat-vector layout: [q | v | u | z], z sized per time step."""

    def __init__(self, scenario: Scenario, counts: list[int]):
        self.nq = scenario.nq
        self.dim = scenario.dim
        self.T = scenario.T
        self.C = len(scenario.manip_contacts)
        self.d = scenario.friction_dirs
        self.mc = 1 + (scenario.manip_contacts[0].d if self.C else 0)
        self.zc = 2 + self.d  # zN, zD1..zDd, gamma
        self.counts = list(counts)
        if len(self.counts) != self.T + 1:
            raise AssemblyError("index set length must be T+1")
        n_qv = (self.T + 1) * self.nq
        self.off_q = 0
        self.off_v = n_qv
        self.off_u = 2 * n_qv
        self.off_z = 2 * n_qv + (self.T + 1) * self.C * self.mc
        self.z_start = np.concatenate(
            [[0], np.cumsum([c * self.zc for c in self.counts])]) + self.off_z
        self.nx = int(self.z_start[-1])

    def q_slice(self, t: int) -> slice:
        return slice(self.off_q + t * self.nq, self.off_q + (t + 1) * self.nq)

    def v_slice(self, t: int) -> slice:
        return slice(self.off_v + t * self.nq, self.off_v + (t + 1) * self.nq)

    def u_slice(self, t: int, c: int) -> slice:
        start = self.off_u + (t * self.C + c) * self.mc
        return slice(start, start + self.mc)

    def z_slice(self, t: int, i: int) -> slice:
        start = int(self.z_start[t]) + i * self.zc
        return slice(start, start + self.zc)

    def split(self, x: np.ndarray):
        q = x[self.off_q:self.off_v].reshape(self.T + 1, self.nq)
        v = x[self.off_v:self.off_u].reshape(self.T + 1, self.nq)
        u = x[self.off_u:self.off_z].reshape(self.T + 1, self.C, self.mc)
        z = [x[int(self.z_start[t]):int(self.z_start[t + 1])]
             .reshape(self.counts[t], self.zc) for t in range(self.T + 1)]
        return q, v, u, z


_EXACT_FAMILIES = ("terminal", "dynamics", "balance", "distance",
                   "manip_cone", "env_cone", "slip",
                   "comp_distance", "comp_cone", "comp_slip")


@dataclass
class ResidualReport:
    """Per-family violation vectors under the exact (sigma = 0) semantics."""
    blocks: dict[str, np.ndarray]

    def inf_norm(self, name: str) -> float:
        b = self.blocks[name]
        return float(np.max(np.abs(b))) if b.size else 0.0

    def inf_norms(self) -> dict[str, float]:
        return {k: self.inf_norm(k) for k in _EXACT_FAMILIES}

    def l1(self) -> float:
        return float(sum(np.sum(np.abs(b)) for b in self.blocks.values()))

    def complementarity_sum(self) -> float:
        return float(sum(np.sum(np.abs(self.blocks[k]))
                         for k in ("comp_distance", "comp_cone", "comp_slip")))


class MpccProblem:
    """One instantiated finite MPCC P(Y~) with frozen contact frames."""

    def __init__(self, scenario: Scenario, index_set: IndexSet,
                 frame_traj: np.ndarray, config: MpccConfig,
                 mode: str = "quasistatic", sigma: float = 0.0):
        if mode not in ("quasistatic", "quasidynamic"):
            raise AssemblyError(f"unknown mode {mode!r}")
        if mode == "quasidynamic" and scenario.inertia is None:
            raise AssemblyError("quasidynamic mode requires rotational inertia")
        frame_traj = np.asarray(frame_traj, dtype=float)
        if frame_traj.shape != (scenario.T + 1, scenario.nq):
            raise AssemblyError("frame trajectory shape mismatch with scenario")
        self.scenario = scenario
        self.index_set = index_set
        self.config = config
        self.mode = mode
        self.sigma = sigma
        self.layout = VarLayout(scenario, index_set.counts())

        lay = self.layout
        scen = scenario
        dim, nq, T = lay.dim, lay.nq, lay.T

        # frozen environment contact frames at the assembly-time trajectory
        self.frames: list[list[ContactFrame]] = []
        for t in range(T + 1):
            step = []
            for p in index_set.steps[t]:
                w = transform_points(frame_traj[t], p.point)
                step.append(build_frame(scen.grid, w, lay.d))
            self.frames.append(step)

        # flattened (t, i) pair bookkeeping
        self.pair_t: list[int] = []
        self.pair_i: list[int] = []
        for t in range(T + 1):
            for i in range(lay.counts[t]):
                self.pair_t.append(t)
                self.pair_i.append(i)
        self.P = len(self.pair_t)
        self.pair_y = np.array(
            [index_set.steps[t][i].point
             for t, i in zip(self.pair_t, self.pair_i)]).reshape(self.P, dim)
        self.pair_a = self.pair_y - scen.com  # lever arms, object frame
        # world force basis per pair: columns [normal, tangents...]
        self.pair_W = np.array(
            [np.column_stack([fr.normal, fr.tangents.T])
             for step in self.frames for fr in step]).reshape(
                 self.P, dim, 1 + lay.d)

        # manipulator force bases, object frame
        self.manip_B = [np.column_stack([c.normal, c.tangents.T])
                        for c in scen.manip_contacts]
        self.manip_a = [c.point - scen.com for c in scen.manip_contacts]

        self._build_bounds()
        self._build_constant_jacs()
        self._build_pair_index()

    def _build_pair_index(self):
        """Constant scatter indices for vectorized constraint assembly."""
        lay = self.layout
        P = self.P
        self.pt = np.asarray(self.pair_t, dtype=int)
        self.z_n_col = np.empty(P, dtype=int)
        self.z_d_col = np.empty((P, lay.d), dtype=int)
        self.z_g_col = np.empty(P, dtype=int)
        self.q_cols = np.empty((P, lay.nq), dtype=int)
        self.v_cols = np.empty((P, lay.nq), dtype=int)
        for p in range(P):
            t, i = self.pair_t[p], self.pair_i[p]
            zs = lay.z_slice(t, i)
            self.z_n_col[p] = zs.start
            self.z_d_col[p] = np.arange(zs.start + 1, zs.stop - 1)
            self.z_g_col[p] = zs.stop - 1
            self.q_cols[p] = np.arange(lay.q_slice(t).start,
                                       lay.q_slice(t).stop)
            self.v_cols[p] = np.arange(lay.v_slice(t).start,
                                       lay.v_slice(t).stop)

    def _rot_stack(self, q: np.ndarray):
        """R_t and its angle-partials dR_t,k stacked over time."""
        T1 = self.layout.T + 1
        dim = self.layout.dim
        na = self.layout.nq - dim
        R = np.empty((T1, dim, dim))
        dR = np.empty((T1, na, dim, dim))
        for t in range(T1):
            R[t], _ = pose_from_config(q[t])
            for k, dRk in enumerate(rotation_jacobians(q[t])):
                dR[t, k] = dRk
        return R, dR

    # -- assembly helpers ---------------------------------------------------

    def _goal_tol(self) -> np.ndarray:
        """Per-coordinate goal box half-width; scenario overrides defaults."""
        scen, cfg, lay = self.scenario, self.config, self.layout
        tp = scen.goal_tol_pos if scen.goal_tol_pos is not None \
            else cfg.goal_tol_pos
        tr = scen.goal_tol_rot if scen.goal_tol_rot is not None \
            else cfg.goal_tol_rot
        return np.concatenate([np.full(lay.dim, tp),
                               np.full(lay.nq - lay.dim, tr)])

    def _build_bounds(self):
        lay, scen, cfg = self.layout, self.scenario, self.config
        dim, nq, T = lay.dim, lay.nq, lay.T
        lb = np.full(lay.nx, -np.inf)
        ub = np.full(lay.nx, np.inf)
        for t in range(T + 1):
            lb[lay.q_slice(t)] = scen.q_low
            ub[lay.q_slice(t)] = scen.q_high
            lb[lay.v_slice(t)] = scen.v_low
            ub[lay.v_slice(t)] = scen.v_high
        # terminal sets: start pinned, goal as an inf-norm box
        lb[lay.q_slice(0)] = scen.q_start
        ub[lay.q_slice(0)] = scen.q_start
        tol = self._goal_tol()
        lb[lay.q_slice(T)] = np.maximum(scen.q_low, scen.q_goal - tol)
        ub[lay.q_slice(T)] = np.minimum(scen.q_high, scen.q_goal + tol)
        # push-only manipulator forces; nonnegative contact force components
        lb[lay.off_u:lay.nx] = 0.0
        ub[lay.off_u:lay.off_z] = scen.u_max
        self.lb, self.ub = lb, ub

    def _build_constant_jacs(self):
        lay = self.layout
        nq, T = lay.nq, lay.T
        self.n_dyn = T * nq
        self.nr = 1 if lay.dim == 2 else 3
        self.n_bal = (T + 1) * (lay.dim + self.nr)
        self.n_eq = self.n_dyn + self.n_bal
        J = np.zeros((self.n_dyn, lay.nx))
        dt = self.scenario.dt
        for t in range(T):
            rows = slice(t * nq, (t + 1) * nq)
            J[rows, lay.q_slice(t)] = np.eye(nq)
            J[rows, lay.q_slice(t + 1)] = -np.eye(nq)
            J[rows, lay.v_slice(t + 1)] = dt * np.eye(nq)
        self.J_dyn = J

        # inequality family row offsets
        P, d, C = self.P, lay.d, lay.C
        sizes = {"manip_cone": (T + 1) * C, "distance": P,
                 "comp_distance": P, "env_cone": P, "slip": P * d,
                 "comp_cone": P, "comp_slip": P * d}
        self.ineq_off = {}
        off = 0
        for name in ("manip_cone", "distance", "comp_distance", "env_cone",
                     "slip", "comp_cone", "comp_slip"):
            self.ineq_off[name] = off
            off += sizes[name]
        self.n_ineq = off

    # -- public counts ------------------------------------------------------

    @property
    def n_complementarity(self) -> int:
        """Number of complementarity product rows in this instantiation."""
        return self.P * (2 + self.layout.d)

    def vanilla_complementarity_rows(self) -> int:
        """Product rows if every cloud point were instantiated at every step."""
        return len(self.scenario.cloud) * (self.layout.T + 1) * \
            (2 + self.layout.d)

    # -- initialization -----------------------------------------------------

    def initial_vector(self, q: np.ndarray, v: np.ndarray, u: np.ndarray,
                       warm_forces: dict[tuple[int, int], np.ndarray] | None
                       = None) -> np.ndarray:
        """Pack trajectory variables and warm-start the force variables.

        New contact points get zN = m|g| / |Y_t| with zero tangentials and
        slack; persisting points copy their previous values exactly.
        """
        lay, scen = self.layout, self.scenario
        x = np.zeros(lay.nx)
        x[lay.off_q:lay.off_v] = np.asarray(q, dtype=float).ravel()
        x[lay.off_v:lay.off_u] = np.asarray(v, dtype=float).ravel()
        if lay.C:
            x[lay.off_u:lay.off_z] = np.asarray(u, dtype=float).ravel()
        weight = scen.mass * float(np.linalg.norm(scen.gravity))
        warm_forces = warm_forces or {}
        for t in range(lay.T + 1):
            n_t = lay.counts[t]
            for i, p in enumerate(self.index_set.steps[t]):
                sl = lay.z_slice(t, i)
                key = (t, p.cloud_index)
                if key in warm_forces:
                    x[sl] = warm_forces[key]
                else:
                    x[sl.start] = weight / max(n_t, 1)
        return np.clip(x, self.lb, self.ub)

    def warm_force_map(self, x: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
        lay = self.layout
        out = {}
        for t in range(lay.T + 1):
            for i, p in enumerate(self.index_set.steps[t]):
                out[(t, p.cloud_index)] = x[lay.z_slice(t, i)].copy()
        return out

    # -- objective ----------------------------------------------------------

    def objective(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Quadratic effort/velocity/force regularizer and its gradient."""
        lay, cfg = self.layout, self.config
        grad = np.zeros(lay.nx)
        v = x[lay.off_v:lay.off_u]
        u = x[lay.off_u:lay.off_z]
        f = cfg.w_v * float(v @ v) + cfg.w_u * float(u @ u)
        grad[lay.off_v:lay.off_u] = 2.0 * cfg.w_v * v
        grad[lay.off_u:lay.off_z] = 2.0 * cfg.w_u * u
        fz = 0.0
        for t in range(lay.T + 1):
            for i in range(lay.counts[t]):
                sl = lay.z_slice(t, i)
                comps = x[sl.start:sl.stop - 1]  # exclude gamma
                fz += float(comps @ comps)
                grad[sl.start:sl.stop - 1] = 2.0 * cfg.w_z * comps
        return f + cfg.w_z * fz, grad

    # -- equality constraints (dynamics + balance) ---------------------------

    @staticmethod
    def _cross_rows(r: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Row-wise torque of forces about lever arms; (..., 1) in 2D."""
        if r.shape[-1] == 2:
            return (r[..., 0] * f[..., 1] - r[..., 1] * f[..., 0])[..., None]
        return np.cross(r, f)

    def eq_constraints(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lay, scen = self.layout, self.scenario
        dim, nq, T, nr = lay.dim, lay.nq, lay.T, self.nr
        na = nq - dim
        T1 = T + 1
        q, v, u, z = lay.split(x)
        vals = np.zeros(self.n_eq)
        J = np.zeros((self.n_eq, lay.nx))
        vals[:self.n_dyn] = (q[:-1] - q[1:] + scen.dt * v[1:]).ravel()
        J[:self.n_dyn] = self.J_dyn

        R, dR = self._rot_stack(q)
        force = np.tile(scen.mass * scen.gravity, (T1, 1))
        torque = np.zeros((T1, nr))
        # views into the balance block, indexed [t, row-within-step, column]
        Jb = J[self.n_dyn:].reshape(T1, dim + nr, lay.nx)
        q_ang = np.array([lay.q_slice(t).start + dim + np.arange(na)
                          for t in range(T1)])  # (T1, na)

        for c in range(lay.C):
            B = self.manip_B[c]
            comps = u[:, c]                                 # (T1, mc)
            fl = comps @ B.T                                # local force
            fw = np.einsum("tij,tj->ti", R, fl)
            rw = np.einsum("tij,j->ti", R, self.manip_a[c])
            force += fw
            torque += self._cross_rows(rw, fw)
            WB = np.einsum("tij,jk->tik", R, B)             # (T1, dim, mc)
            ucols = np.array([np.arange(lay.u_slice(t, c).start,
                                        lay.u_slice(t, c).stop)
                              for t in range(T1)])
            tt = np.arange(T1)
            Jb[tt[:, None, None], np.arange(dim)[None, :, None],
               ucols[:, None, :]] = WB
            tq_u = self._cross_rows(rw[:, None, :],
                                    WB.transpose(0, 2, 1))  # (T1, mc, nr)
            Jb[tt[:, None, None], dim + np.arange(nr)[None, None, :],
               ucols[:, :, None]] = tq_u
            dfl = np.einsum("tkij,tj->tki", dR, fl)         # (T1, na, dim)
            da = np.einsum("tkij,j->tki", dR, self.manip_a[c])
            dtq = self._cross_rows(da, fw[:, None, :]) \
                + self._cross_rows(rw[:, None, :], dfl)     # (T1, na, nr)
            for k in range(na):
                np.add.at(Jb, (tt, slice(0, dim), q_ang[:, k]), dfl[:, k])
                np.add.at(Jb, (tt, slice(dim, dim + nr), q_ang[:, k]),
                          dtq[:, k])

        if self.P:
            comps = np.concatenate(
                [x[self.z_n_col][:, None], x[self.z_d_col]], axis=1)
            fw = np.einsum("pij,pj->pi", self.pair_W, comps)
            rw = np.einsum("pij,pj->pi", R[self.pt], self.pair_a)
            np.add.at(force, self.pt, fw)
            np.add.at(torque, self.pt, self._cross_rows(rw, fw))
            zcols = np.concatenate(
                [self.z_n_col[:, None], self.z_d_col], axis=1)  # (P, 1+d)
            Jb[self.pt[:, None, None], np.arange(dim)[None, :, None],
               zcols[:, None, :]] = self.pair_W
            tq_z = self._cross_rows(
                rw[:, None, :], self.pair_W.transpose(0, 2, 1))  # (P,1+d,nr)
            Jb[self.pt[:, None, None], dim + np.arange(nr)[None, None, :],
               zcols[:, :, None]] = tq_z
            da = np.einsum("pkij,pj->pki", dR[self.pt], self.pair_a)
            dtq = self._cross_rows(da, fw[:, None, :])       # (P, na, nr)
            for k in range(na):
                np.add.at(Jb, (self.pt, slice(dim, dim + nr),
                               q_ang[self.pt, k]), dtq[:, k])

        if self.mode == "quasidynamic":
            force -= scen.mass * v[:, :dim] / scen.dt
            tt = np.arange(T1)
            vcols = np.array([lay.v_slice(t).start for t in range(T1)])
            for i in range(dim):
                Jb[tt, i, vcols + i] -= scen.mass / scen.dt
            if dim == 2:
                torque[:, 0] -= float(scen.inertia) * v[:, 2] / scen.dt
                Jb[tt, dim, vcols + 2] -= float(scen.inertia) / scen.dt
            else:
                M = np.asarray(scen.inertia)
                torque -= v[:, 3:] @ M.T / scen.dt
                for i in range(nr):
                    for j in range(nr):
                        Jb[tt, dim + i, vcols + 3 + j] -= M[i, j] / scen.dt
        bal = np.concatenate([force, torque], axis=1)        # (T1, dim+nr)
        vals[self.n_dyn:] = bal.ravel()
        return vals, J

    @staticmethod
    def _cross(r: np.ndarray, f: np.ndarray) -> np.ndarray:
        if len(r) == 2:
            return np.array([r[0] * f[1] - r[1] * f[0]])
        return np.cross(r, f)

    # -- distance and slip kernels -------------------------------------------

    def _distances(self, q: np.ndarray):
        """g and dg/dq for every pair, one batched field query for all."""
        lay, scen = self.layout, self.scenario
        if self.P == 0:
            return np.zeros(0), np.zeros((0, lay.nq))
        R, dR = self._rot_stack(q)
        world = np.einsum("pij,pj->pi", R[self.pt], self.pair_y) \
            + q[self.pt, :lay.dim]
        g = scen.grid.values_at(world)
        grads = scen.grid.gradients_at(world)
        dg = np.zeros((self.P, lay.nq))
        dg[:, :lay.dim] = grads
        rotated = np.einsum("pkde,pe->pkd", dR[self.pt], self.pair_y)
        dg[:, lay.dim:] = np.einsum("pd,pkd->pk", grads, rotated)
        return g, dg

    def _slips(self, q: np.ndarray, v: np.ndarray):
        """Tangential slip values and d(slip)/d(q_t, v_t) per pair/tangent."""
        lay = self.layout
        dim, nq, d = lay.dim, lay.nq, lay.d
        s = np.zeros((self.P, d))
        dsq = np.zeros((self.P, d, nq))  # w.r.t. q_t
        dsv = np.zeros((self.P, d, nq))  # w.r.t. v_t
        if dim == 2 and self.P:
            th = q[self.pt, 2]
            c, sn = np.cos(th), np.sin(th)
            ax, ay = self.pair_a[:, 0], self.pair_a[:, 1]
            rx = c * ax - sn * ay
            ry = sn * ax + c * ay
            omega = v[self.pt, 2]
            Tg = self.pair_W[:, :, 1:].transpose(0, 2, 1)  # (P, d, dim)
            pv = np.stack([v[self.pt, 0] - omega * ry,
                           v[self.pt, 1] + omega * rx], axis=1)
            s[:] = np.einsum("pdi,pi->pd", Tg, pv)
            dsv[:, :, :2] = Tg
            dsv[:, :, 2] = np.einsum(
                "pdi,pi->pd", Tg, np.stack([-ry, rx], axis=1))
            drx = -sn * ax - c * ay   # d(rx)/dtheta
            dry = c * ax - sn * ay
            dsq[:, :, 2] = omega[:, None] * np.einsum(
                "pdi,pi->pd", Tg, np.stack([-dry, drx], axis=1))
            return s, dsq, dsv
        for p in range(self.P):
            t = self.pair_t[p]
            qt, vt = q[t], v[t]
            a = self.pair_a[p]
            Tg = self.pair_W[p][:, 1:].T  # (d, dim) tangents
            R, _ = pose_from_config(qt)
            dRs = rotation_jacobians(qt)
            r = R @ a
            if dim == 2:
                omega = vt[2]
                perp = np.array([-r[1], r[0]])
                pv = vt[:2] + omega * perp
                s[p] = Tg @ pv
                dsv[p, :, :2] = Tg
                dsv[p, :, 2] = Tg @ perp
                dr = dRs[0] @ a
                dperp = np.array([-dr[1], dr[0]])
                dsq[p, :, 2] = omega * (Tg @ dperp)
            else:
                rpy = qt[3:]
                E = euler_rate_matrix(rpy)
                dEs = deuler_rate_matrix(rpy)
                omega = E @ vt[3:]
                pv = vt[:3] + np.cross(omega, r)
                s[p] = Tg @ pv
                dsv[p, :, :3] = Tg
                for k in range(3):
                    dsv[p, :, 3 + k] = Tg @ np.cross(E[:, k], r)
                    dpv = (np.cross(dEs[k] @ vt[3:], r)
                           + np.cross(omega, dRs[k] @ a))
                    dsq[p, :, 3 + k] = Tg @ dpv
        return s, dsq, dsv

    # -- inequality constraints (all expressed as value >= 0) ----------------

    def ineq_constraints(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lay, scen = self.layout, self.scenario
        d, nq = lay.d, lay.nq
        q, v, u, z = lay.split(x)
        vals = np.zeros(self.n_ineq)
        J = np.zeros((self.n_ineq, lay.nx))
        off = self.ineq_off

        # manipulator friction cones
        row = off["manip_cone"]
        for t in range(lay.T + 1):
            for c in range(lay.C):
                us = lay.u_slice(t, c)
                vals[row] = scen.mu_mnp * u[t, c, 0] - np.sum(u[t, c, 1:])
                J[row, us.start] = scen.mu_mnp
                J[row, us.start + 1:us.stop] = -1.0
                row += 1

        if self.P == 0:
            return vals, J
        g, dg = self._distances(q)
        s, dsq, dsv = self._slips(q, v)
        P = self.P
        pr = np.arange(P)
        zN = x[self.z_n_col]
        zD = x[self.z_d_col]
        gamma = x[self.z_g_col]
        cone = scen.mu_env * zN - zD.sum(axis=1)

        r = off["distance"] + pr
        vals[r] = g
        J[r[:, None], self.q_cols] = dg

        r = off["comp_distance"] + pr
        vals[r] = self.sigma - zN * g
        J[r[:, None], self.q_cols] = -zN[:, None] * dg
        J[r, self.z_n_col] = -g

        r = off["env_cone"] + pr
        vals[r] = cone
        J[r, self.z_n_col] = scen.mu_env
        J[r[:, None], self.z_d_col] = -1.0

        r = off["comp_cone"] + pr
        vals[r] = self.sigma - cone * gamma
        J[r, self.z_n_col] = -scen.mu_env * gamma
        J[r[:, None], self.z_d_col] = gamma[:, None]
        J[r, self.z_g_col] = -cone

        # per-tangent rows, flattened to (P*d,)
        rs = (off["slip"] + pr[:, None] * d + np.arange(d)).ravel()
        q_rep = np.repeat(self.q_cols, d, axis=0)
        v_rep = np.repeat(self.v_cols, d, axis=0)
        slack = gamma[:, None] + s
        vals[rs] = slack.ravel()
        J[rs, np.repeat(self.z_g_col, d)] = 1.0
        J[rs[:, None], q_rep] = dsq.reshape(P * d, nq)
        J[rs[:, None], v_rep] = dsv.reshape(P * d, nq)

        rs = (off["comp_slip"] + pr[:, None] * d + np.arange(d)).ravel()
        vals[rs] = self.sigma - (slack * zD).ravel()
        J[rs, self.z_d_col.ravel()] = -slack.ravel()
        J[rs, np.repeat(self.z_g_col, d)] = -zD.ravel()
        J[rs[:, None], q_rep] = (-zD[..., None] * dsq).reshape(P * d, nq)
        J[rs[:, None], v_rep] = (-zD[..., None] * dsv).reshape(P * d, nq)
        return vals, J

    # -- relaxation and residual reporting ------------------------------------

    def relax(self, sigma: float) -> "MpccProblem":
        """Copy of this problem with complementarity products relaxed to
        a*b <= sigma; everything else shared."""
        other = copy.copy(self)
        other.sigma = sigma
        return other

    def residual_report(self, x: np.ndarray) -> ResidualReport:
        """Violation vectors under the exact MPCC semantics (sigma = 0);
        complementarity families report |a*b| gaps."""
        lay, scen, cfg = self.layout, self.scenario, self.config
        eq, _ = self.eq_constraints(x)
        exact = self.relax(0.0)
        ineq, _ = exact.ineq_constraints(x)
        off = self.ineq_off
        q, _, _, _ = lay.split(x)

        def fam(name, size):
            return ineq[off[name]:off[name] + size]

        d, P = lay.d, self.P
        tol = self._goal_tol()
        terminal = np.concatenate([
            q[0] - scen.q_start,
            np.maximum(0.0, np.abs(q[-1] - scen.q_goal) - tol)])
        blocks = {
            "terminal": terminal,
            "dynamics": eq[:self.n_dyn].copy(),
            "balance": eq[self.n_dyn:].copy(),
            "distance": np.maximum(0.0, -fam("distance", P)),
            "manip_cone": np.maximum(
                0.0, -fam("manip_cone", (lay.T + 1) * lay.C)),
            "env_cone": np.maximum(0.0, -fam("env_cone", P)),
            "slip": np.maximum(0.0, -fam("slip", P * d)),
            # with sigma = 0 the relaxed rows equal -(a*b)
            "comp_distance": np.abs(fam("comp_distance", P)),
            "comp_cone": np.abs(fam("comp_cone", P)),
            "comp_slip": np.abs(fam("comp_slip", P * d)),
        }
        return ResidualReport(blocks)

    # -- inner solve ----------------------------------------------------------

    def nlp_step(self, x0: np.ndarray, max_major: int = 50,
                 tol_feas: float = 1e-8, tol_stat: float = 1e-8,
                 merit_penalty: float = 100.0) -> nlp.NlpIterate:
        """Run at most `max_major` major iterations of the bundled
        augmented-Lagrangian stepper on the relaxed problem."""
        return nlp.solve_al(self.objective, self.eq_constraints,
                            self.ineq_constraints, self.lb, self.ub, x0,
                            max_major=max_major,
                            inner_iters=self.config.inner_iters,
                            penalty0=self.config.penalty0,
                            tol_feas=tol_feas, tol_stat=tol_stat,
                            merit_penalty=merit_penalty)
