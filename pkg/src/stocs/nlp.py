"""Self-contained augmented-Lagrangian NLP stepper.

Solves min f(x) s.t. h(x) = 0, c(x) >= 0, lb <= x <= ub by a classic
augmented Lagrangian with L-BFGS-B bound-constrained inner minimization.
The stepper contract: bounds hold exactly at the returned iterate, the
internal merit (objective + penalty * L1 violation) never increases (else
the start point is returned flagged no-progress), and results are
deterministic for identical inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize


class SolverFailure(RuntimeError):
    """Non-finite values encountered; carries the last finite iterate."""

    def __init__(self, message: str, last_iterate: np.ndarray | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass
class NlpIterate:
    x: np.ndarray
    objective: float
    eq: np.ndarray
    ineq: np.ndarray
    stationarity: float
    majors: int = 0
    no_progress: bool = False

    @property
    def max_violation(self) -> float:
        ve = np.max(np.abs(self.eq)) if self.eq.size else 0.0
        vi = np.max(np.maximum(-self.ineq, 0.0)) if self.ineq.size else 0.0
        return max(ve, vi)


# objective/constraint callbacks: x -> (value(s), jacobian)
ObjFn = Callable[[np.ndarray], tuple[float, np.ndarray]]
ConFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def _merit(fval: float, h: np.ndarray, c: np.ndarray, penalty: float) -> float:
    viol = (np.sum(np.abs(h)) if h.size else 0.0) + \
        (np.sum(np.maximum(-c, 0.0)) if c.size else 0.0)
    return fval + penalty * viol


def _max_viol(h: np.ndarray, c: np.ndarray) -> float:
    return max(np.max(np.abs(h)) if h.size else 0.0,
               np.max(np.maximum(-c, 0.0)) if c.size else 0.0)


def project_feasible(eq_con: ConFn, ineq_con: ConFn, lb: np.ndarray,
                     ub: np.ndarray, x: np.ndarray, rounds: int = 15,
                     tol: float = 1e-11) -> np.ndarray:
    """Gauss-Newton feasibility polish: repeatedly take the minimum-norm
    step that zeroes the linearized equality rows and the violated
    inequality rows.  Stays local to `x`, never worsens the worst
    violation, and returns a bounds-respecting iterate."""
    x = np.clip(np.asarray(x, dtype=float), lb, ub)
    for _ in range(rounds):
        h, Jh = eq_con(x)
        c, Jc = ineq_con(x)
        viol = _max_viol(h, c)
        if viol <= tol:
            break
        rows, rhs = [], []
        if h.size:
            rows.append(Jh)
            rhs.append(-h)
        # Violated rows are driven to zero; barely-satisfied rows are held
        # in place so fixing one row cannot tip its neighbours negative.
        margin = max(10.0 * viol, 1e-8)
        active = c < margin
        if np.any(active):
            rows.append(Jc[active])
            rhs.append(np.maximum(-c[active], 0.0))
        A = np.vstack(rows)
        b = np.concatenate(rhs)
        dx = np.linalg.lstsq(A, b, rcond=None)[0]
        if not np.all(np.isfinite(dx)):
            break
        step = 1.0
        for _ in range(12):
            xn = np.clip(x + step * dx, lb, ub)
            hn, _ = eq_con(xn)
            cn, _ = ineq_con(xn)
            if np.all(np.isfinite(hn)) and np.all(np.isfinite(cn)) \
                    and _max_viol(hn, cn) < viol:
                break
            step *= 0.5
        else:
            break
        x = xn
    return x


def solve_al(objective: ObjFn,
             eq_con: ConFn,
             ineq_con: ConFn,
             lb: np.ndarray,
             ub: np.ndarray,
             x0: np.ndarray,
             max_major: int = 50,
             inner_iters: int = 150,
             penalty0: float = 10.0,
             tol_feas: float = 1e-8,
             tol_stat: float = 1e-8,
             merit_penalty: float = 100.0) -> NlpIterate:
    """Run at most `max_major` augmented-Lagrangian major iterations."""
    x0 = np.clip(np.asarray(x0, dtype=float), lb, ub)
    f0, _ = objective(x0)
    h0, _ = eq_con(x0)
    c0, _ = ineq_con(x0)
    if not (np.isfinite(f0) and np.all(np.isfinite(h0)) and np.all(np.isfinite(c0))):
        raise SolverFailure("non-finite residuals at the start iterate", x0)
    merit0 = _merit(f0, h0, c0, merit_penalty)

    lam_eq = np.zeros(len(h0))
    lam_ineq = np.zeros(len(c0))
    rho = penalty0
    x = x0.copy()
    bounds = list(zip(lb, ub))
    last_finite = x0.copy()
    viol_prev = np.inf
    eta = max(np.max(np.abs(h0)) if h0.size else 0.0,
              np.max(np.maximum(-c0, 0.0)) if c0.size else 0.0,
              10.0 * tol_feas)
    stationarity = np.inf
    majors = 0

    for major in range(max_major):
        majors = major + 1

        def al_value_grad(xv, _lam_eq=lam_eq, _lam_ineq=lam_ineq, _rho=rho):
            f, gf = objective(xv)
            h, Jh = eq_con(xv)
            c, Jc = ineq_con(xv)
            val = f
            grad = gf.copy()
            if h.size:
                w = _lam_eq + _rho * h
                val += float(_lam_eq @ h + 0.5 * _rho * (h @ h))
                grad += Jh.T @ w
            if c.size:
                m = np.maximum(0.0, _lam_ineq - _rho * c)
                val += float(np.sum(m ** 2 - _lam_ineq ** 2)) / (2.0 * _rho)
                grad -= Jc.T @ m
            return val, grad

        res = minimize(al_value_grad, x, jac=True, method="L-BFGS-B",
                       bounds=bounds,
                       options={"maxiter": inner_iters, "ftol": 1e-14,
                                "gtol": 1e-10})
        x_new = np.clip(res.x, lb, ub)
        if not np.all(np.isfinite(x_new)):
            raise SolverFailure("inner minimization produced non-finite iterate",
                                last_finite)
        x = x_new
        last_finite = x.copy()

        h, _ = eq_con(x)
        c, _ = ineq_con(x)
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(c))):
            raise SolverFailure("non-finite constraint values", last_finite)
        viol = max(np.max(np.abs(h)) if h.size else 0.0,
                   np.max(np.maximum(-c, 0.0)) if c.size else 0.0)
        # projected-gradient stationarity of the AL at the solution
        _, g = al_value_grad(x)
        proj = np.clip(x - g, lb, ub) - x
        stationarity = float(np.max(np.abs(proj))) if proj.size else 0.0

        # update multipliers only when the violation target is met, else
        # raise the penalty and keep the current estimates
        if viol <= max(eta, tol_feas):
            lam_eq = lam_eq + rho * h
            lam_ineq = np.maximum(0.0, lam_ineq - rho * c)
            eta = max(0.2 * eta, 0.1 * tol_feas)
        else:
            rho = min(rho * 5.0, 1e7)
        viol_prev = min(viol_prev, viol)

        if viol <= tol_feas and stationarity <= tol_stat:
            break

    x = project_feasible(eq_con, ineq_con, lb, ub, x, tol=tol_feas * 1e-3)
    f, _ = objective(x)
    h, _ = eq_con(x)
    c, _ = ineq_con(x)
    if _merit(f, h, c, merit_penalty) > merit0 + 1e-12:
        return NlpIterate(x0, f0, h0, c0, stationarity, majors,
                          no_progress=True)
    return NlpIterate(x, f, h, c, stationarity, majors)
