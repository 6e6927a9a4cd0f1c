import numpy as np
import pytest

from stocs import IndexSet, MpccConfig, MpccProblem, OracleConfig, \
    initialize_trajectory, mvo_update
from stocs.oracle import IndexPoint

from conftest import resting_box_scenario


def build_problem(scen=None, T=3, mode="quasistatic"):
    scen = scen or resting_box_scenario(T=T)
    q, _ = initialize_trajectory(scen.q_start, scen.q_goal, scen.T,
                                 scen.dt, scen.dim)
    ix = mvo_update(q, scen.cloud, scen.grid, IndexSet.empty(scen.T),
                    OracleConfig())
    return scen, MpccProblem(scen, ix, q, MpccConfig(), mode), q


def random_iterate(problem, rng, scale=0.05):
    lay = problem.layout
    x = problem.initial_vector(
        np.tile(problem.scenario.q_start, (lay.T + 1, 1)),
        np.zeros((lay.T + 1, problem.scenario.nq)),
        np.zeros((lay.T + 1, max(lay.C, 1), 1 + lay.d))[:, :lay.C or 0])
    return x + rng.uniform(-scale, scale, lay.nx)


def test_complementarity_census_hand_count():
    scen, problem, _ = build_problem(T=3)
    d = scen.friction_dirs
    P = problem.P
    assert P == sum(len(s) for s in problem.index_set.steps)
    # zN*g, gamma*cone, and d slip products per instantiated point
    assert problem.n_complementarity == P * (2 + d)
    assert problem.vanilla_complementarity_rows() == \
        len(scen.cloud) * (scen.T + 1) * (2 + d)


def test_constraint_jacobians_match_finite_differences(rng):
    eps = 1e-7
    for mode in ("quasistatic", "quasidynamic"):
        scen, problem, _ = build_problem(T=2, mode=mode)
        problem = problem.relax(1e-2)
        for _ in range(5):
            x = random_iterate(problem, rng)
            for fn in (problem.eq_constraints, problem.ineq_constraints):
                val, J = fn(x)
                cols = rng.choice(problem.layout.nx,
                                  min(12, problem.layout.nx), replace=False)
                for k in cols:
                    dx = np.zeros(problem.layout.nx)
                    dx[k] = eps
                    fd = (fn(x + dx)[0] - fn(x - dx)[0]) / (2 * eps)
                    err = np.max(np.abs(J[:, k] - fd))
                    denom = max(1.0, np.max(np.abs(fd)))
                    assert err / denom < 1e-5


def test_objective_gradient_matches_finite_differences(rng):
    _, problem, _ = build_problem(T=2)
    eps = 1e-7
    x = random_iterate(problem, rng)
    f, g = problem.objective(x)
    for k in rng.choice(problem.layout.nx, 15, replace=False):
        dx = np.zeros(problem.layout.nx)
        dx[k] = eps
        fd = (problem.objective(x + dx)[0]
              - problem.objective(x - dx)[0]) / (2 * eps)
        assert g[k] == pytest.approx(fd, abs=1e-5)


def test_relaxation_loosens_monotonically(rng):
    _, problem, _ = build_problem(T=2)
    x = random_iterate(problem, rng)
    prev = None
    for sigma in (0.0, 1e-4, 1e-3, 1e-2, 1e-1):
        vals, _ = problem.relax(sigma).ineq_constraints(x)
        if prev is not None:
            assert np.all(vals >= prev - 1e-15)
        prev = vals


def test_initial_vector_force_heuristic():
    scen, problem, q0 = build_problem(T=3)
    lay = problem.layout
    x = problem.initial_vector(q0, np.zeros_like(q0),
                               np.zeros((scen.T + 1, 1, 1 + lay.d)))
    W = scen.mass * np.linalg.norm(scen.gravity)
    for t in range(scen.T + 1):
        n_t = len(problem.index_set.steps[t])
        for i in range(n_t):
            z = x[lay.z_slice(t, i)]
            assert z[0] == pytest.approx(W / n_t)
            assert np.allclose(z[1:], 0.0)


def test_warm_start_preserves_forces(rng):
    scen, problem, q0 = build_problem(T=3)
    lay = problem.layout
    x = random_iterate(problem, rng)
    x = np.clip(x, problem.lb, problem.ub)
    warm = problem.warm_force_map(x)
    # a fresh problem over the same index set restores every force exactly
    again = MpccProblem(scen, problem.index_set, q0, MpccConfig(),
                        "quasistatic")
    q, v, u, _ = lay.split(x)
    x2 = again.initial_vector(q, v, u, warm_forces=warm)
    for t in range(scen.T + 1):
        for i in range(len(problem.index_set.steps[t])):
            assert np.array_equal(x2[lay.z_slice(t, i)],
                                  x[lay.z_slice(t, i)])


def test_residual_report_families():
    scen, problem, q0 = build_problem(T=2)
    x = problem.initial_vector(q0, np.zeros_like(q0),
                               np.zeros((scen.T + 1, 1, 3)))
    rep = problem.residual_report(x)
    norms = rep.inf_norms()
    for fam in ("terminal", "dynamics", "balance", "distance", "manip_cone",
                "env_cone", "slip", "comp_distance", "comp_cone",
                "comp_slip"):
        assert fam in norms
    assert rep.l1() >= 0.0
    # resting start: no penetration, so the distance family is clean
    assert norms["distance"] < 1e-9


def test_goal_band_terminal_residual():
    scen = resting_box_scenario(T=2, push=0.5)
    q, _ = initialize_trajectory(scen.q_start, scen.q_goal, scen.T,
                                 scen.dt, scen.dim)
    ix = mvo_update(q, scen.cloud, scen.grid, IndexSet.empty(scen.T),
                    OracleConfig())
    problem = MpccProblem(scen, ix, q, MpccConfig(), "quasistatic")
    x = problem.initial_vector(q, np.zeros_like(q), np.zeros((scen.T + 1, 1, 3)))
    rep = problem.residual_report(x)
    # endpoint interpolation reaches the goal: inside the tolerance band
    assert rep.inf_norm("terminal") < 1e-9


def test_nlp_step_solves_trivial_resting_problem():
    scen, problem, q0 = build_problem(T=2)
    problem = problem.relax(1e-2)
    x0 = problem.initial_vector(q0, np.zeros_like(q0),
                                np.zeros((scen.T + 1, 1, 3)))
    it = problem.nlp_step(x0, max_major=30, tol_feas=1e-7, tol_stat=1e-7)
    assert it.max_violation < 1e-5
