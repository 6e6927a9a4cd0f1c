import numpy as np
import pytest

from stocs import IndexSet, OracleConfig, closest_point, mvo_update, \
    tamvo_update
from stocs.oracle import dedup_gate

from conftest import plane_grid_2d, small_box_cloud


def random_trajectory(rng, T=5):
    q = rng.uniform([-0.3, 0.0, -0.5], [0.3, 0.08, 0.5], size=(T + 1, 3))
    return q


def test_dedup_gate():
    from stocs.oracle import IndexPoint
    existing = [IndexPoint(0, 3, np.array([0.0, 0.0]), 0)]
    assert dedup_gate(np.array([0.01, 0.0]), existing, 1e-3)
    assert not dedup_gate(np.array([0.0005, 0.0]), existing, 1e-3)
    assert dedup_gate(np.array([5.0, 5.0]), [], 0.5)


@pytest.mark.parametrize("update", [mvo_update, tamvo_update])
def test_oracle_monotone_and_deduplicated(update, rng):
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    cfg = OracleConfig()
    for trial in range(100):
        q = random_trajectory(rng)
        prev = IndexSet.empty(len(q) - 1)
        for it in range(3):
            new = update(q, cloud, grid, prev, cfg, iteration=it)
            # the updated set contains everything it started from
            assert new.contains_superset_of(prev)
            # no two instantiated points within the dedup radius
            for step in new.steps:
                for i, a in enumerate(step):
                    for b in step[i + 1:]:
                        assert np.linalg.norm(a.point - b.point) > cfg.dedup
            prev = new


def test_mvo_adds_the_closest_point(rng):
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    cfg = OracleConfig(d_max=1.0)
    q = random_trajectory(rng, T=4)
    out = mvo_update(q, cloud, grid, IndexSet.empty(4), cfg)
    for t in range(5):
        cp = closest_point(q[t], cloud, grid)
        found = {p.cloud_index for p in out.steps[t]}
        assert cp.index in found


def test_mvo_broadcasts_to_all_steps(rng):
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    cfg = OracleConfig(d_max=1.0, dedup=0.0)
    q = np.zeros((4, 3))        # identical steps: one candidate
    out = mvo_update(q, cloud, grid, IndexSet.empty(3), cfg)
    idx = [sorted(p.cloud_index for p in step) for step in out.steps]
    assert all(s == idx[0] for s in idx)


def test_dmax_filters_faraway_objects():
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    cfg = OracleConfig(d_max=0.05)
    q = np.tile([0.0, 0.5, 0.0], (4, 1))   # hovering far above the floor
    for update in (mvo_update, tamvo_update):
        out = update(q, cloud, grid, IndexSet.empty(3), cfg)
        assert out.total() == 0


def test_tamvo_time_window(rng):
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    T = 8
    # only step 4 is near the floor; candidates may spread to 4 +- n_t only
    q = np.tile([0.0, 0.5, 0.0], (T + 1, 1))
    q[4] = [0.0, 0.01, 0.0]
    for n_t in (0, 1, 2):
        cfg = OracleConfig(n_t=n_t, disturbances=[1e-2])
        out = tamvo_update(q, cloud, grid, IndexSet.empty(T), cfg)
        for t in range(T + 1):
            if abs(t - 4) > n_t:
                assert len(out.steps[t]) == 0
            else:
                assert len(out.steps[t]) > 0


def test_tamvo_spatial_disturbance_adds_support_spread():
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    q = np.zeros((3, 3))   # box resting flat
    base = tamvo_update(q, cloud, grid, IndexSet.empty(2),
                        OracleConfig(disturbances=[]))
    spread = tamvo_update(q, cloud, grid, IndexSet.empty(2),
                          OracleConfig(disturbances=[1e-2]))
    assert spread.total() > base.total()


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(d_max=0.0)
    with pytest.raises(ValueError):
        OracleConfig(n_t=-1)
