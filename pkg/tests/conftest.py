import os

import numpy as np
import pytest

from stocs import (ManipulatorContact, Scenario, SdfGrid, SurfaceCloud,
                   load_scenario)

ASSETS = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                      os.pardir, "assets")


def asset(name: str) -> str:
    return os.path.join(ASSETS, name)


def plane_grid_2d(height: float = 0.0) -> SdfGrid:
    return SdfGrid.from_function(lambda p: p[:, 1] - height,
                                 [-1.0, -0.3], [1.0, 0.7], 0.05)


def plane_grid_3d(height: float = 0.0) -> SdfGrid:
    return SdfGrid.from_function(lambda p: p[:, 2] - height,
                                 [-0.4, -0.4, -0.2], [0.4, 0.4, 0.4], 0.1)


def small_box_cloud(w: float = 0.1, h: float = 0.1,
                    n: int = 6) -> SurfaceCloud:
    """Sparse box outline, origin at the bottom-center; the under-center
    bottom point is listed first."""
    pts, nrm = [[0.0, 0.0]], [[0.0, -1.0]]
    for k in range(1, n):
        x = -w / 2 + w * k / n
        if abs(x) > 1e-12:
            pts.append([x, 0.0])
            nrm.append([0.0, -1.0])
    for k in range(n + 1):
        y = h * k / n
        pts += [[-w / 2, y], [w / 2, y]]
        nrm += [[-1.0, 0.0], [1.0, 0.0]]
    for k in range(1, n):
        pts.append([-w / 2 + w * k / n, h])
        nrm.append([0.0, 1.0])
    return SurfaceCloud(np.array(pts, dtype=float),
                        np.array(nrm, dtype=float))


def resting_box_scenario(T: int = 3, push: float = 0.0) -> Scenario:
    """Tiny 2D box on a flat floor; goal is `push` meters to the right."""
    cloud = small_box_cloud()
    grid = plane_grid_2d()
    manip = [ManipulatorContact.build([-0.05, 0.05], [1.0, 0.0], 2, 1.0)]
    big = np.array([10.0, 10.0, 10.0])
    return Scenario(
        name="resting_box", dim=2, cloud=cloud, grid=grid,
        mass=0.1, com=np.array([0.0, 0.05]), inertia=1.667e-4,
        mu_env=0.8, mu_mnp=1.0, friction_dirs=2, manip_contacts=manip,
        q_start=np.zeros(3), q_goal=np.array([push, 0.0, 0.0]),
        T=T, dt=0.1, q_low=-big, q_high=big, v_low=-big, v_high=big,
        u_max=10.0, gravity=np.array([0.0, -9.8]))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def box_pivot_scenario():
    return load_scenario(asset("box2d_pivot.yaml"))
