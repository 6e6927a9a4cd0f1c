import numpy as np
import pytest

from stocs import StocsConfig, solve, static_feasibility_oracle, verify
from stocs.verify import VerifyConfig

from conftest import resting_box_scenario


@pytest.fixture(scope="module")
def resting_solution():
    scen = resting_box_scenario(T=3)
    res = solve(scen, StocsConfig(oracle="mvo"))
    assert res.converged
    return scen, res


def test_converged_result_passes(resting_solution):
    scen, res = resting_solution
    rep = verify(scen, res)
    assert rep.passed, rep.table()
    assert rep.table().count("pass") >= 10


def test_strict_mode_halves_tolerances():
    strict = VerifyConfig(strict=True).scaled()
    base = VerifyConfig().scaled()
    assert strict == tuple(v / 2 for v in base)


def test_penetrated_trajectory_fails(resting_solution):
    scen, res = resting_solution
    import copy
    bad = copy.deepcopy(res)
    bad.q[1, 1] = -0.01
    rep = verify(scen, bad)
    assert not rep.passed
    names = [c.name for c in rep.failures()]
    assert any("penetration" in n for n in names)


def test_missed_goal_fails(resting_solution):
    scen, res = resting_solution
    import copy
    bad = copy.deepcopy(res)
    bad.q[-1, 0] += 0.3
    rep = verify(scen, bad)
    names = [c.name for c in rep.failures()]
    assert "goal region" in names


def test_negative_force_fails(resting_solution):
    scen, res = resting_solution
    import copy
    bad = copy.deepcopy(res)
    found = False
    for t in range(scen.T + 1):
        if bad.forces[t]:
            bad.forces[t][0] = bad.forces[t][0].copy()
            bad.forces[t][0][0] = -0.5
            found = True
            break
    assert found
    rep = verify(scen, bad)
    names = [c.name for c in rep.failures()]
    assert "force nonnegativity" in names or "force-torque balance" in names


def test_static_oracle_resting_box_feasible():
    scen = resting_box_scenario()
    ok, witness = static_feasibility_oracle(
        scen, scen.q_start, np.array([[0.0, 0.0]]))
    assert ok
    # the witness carries the full weight on the normal component
    W = scen.mass * np.linalg.norm(scen.gravity)
    assert witness["contacts"][0, 0] == pytest.approx(W, rel=1e-6)


def test_static_oracle_detects_imbalance():
    scen = resting_box_scenario()
    # support at the far corner only: gravity torque cannot be cancelled
    ok, _ = static_feasibility_oracle(
        scen, scen.q_start, np.array([[-0.05, 0.0]]))
    assert not ok


def test_static_oracle_two_corners_feasible():
    scen = resting_box_scenario()
    ok, _ = static_feasibility_oracle(
        scen, scen.q_start, np.array([[-0.05, 0.0], [0.05, 0.0]]))
    assert ok


def test_static_oracle_quasidynamic_requires_velocity():
    scen = resting_box_scenario()
    with pytest.raises(ValueError):
        static_feasibility_oracle(scen, scen.q_start,
                                  np.array([[0.0, 0.0]]),
                                  mode="quasidynamic")
