import numpy as np
import pytest

from stocs import ContactForce, ManipulatorContact, Wrench, \
    balance_residual, build_frame, net_wrench, tangent_basis
from stocs.contact import ContactError, cone_residual, point_velocity, \
    slip_velocity, world_force
from stocs.geometry import transform_points

from conftest import plane_grid_2d, plane_grid_3d


def _unit(v):
    return v / np.linalg.norm(v)


def test_tangent_basis_2d():
    t = tangent_basis(np.array([0.0, 1.0]), 2)
    assert np.allclose(t[0], [1.0, 0.0])
    assert np.allclose(t[1], -t[0])
    with pytest.raises(ContactError):
        tangent_basis(np.array([0.0, 1.0]), 4)


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_tangent_basis_3d_properties(d, rng):
    for _ in range(20):
        n = _unit(rng.normal(size=3))
        t = tangent_basis(n, d)
        assert t.shape == (d, 3)
        assert np.allclose(np.linalg.norm(t, axis=1), 1.0)
        assert np.allclose(t @ n, 0.0, atol=1e-12)
        # closed under negation, so the cone spans the tangent plane
        for row in t:
            assert np.min(np.linalg.norm(t + row, axis=1)) < 1e-9


def test_tangent_basis_3d_rejects_odd_counts():
    with pytest.raises(ContactError):
        tangent_basis(np.array([0.0, 0.0, 1.0]), 5)


def test_build_frame_on_plane():
    f2 = build_frame(plane_grid_2d(), np.array([0.2, 0.0]), 2)
    assert np.allclose(f2.normal, [0.0, 1.0], atol=1e-9)
    assert not f2.degenerate
    f3 = build_frame(plane_grid_3d(), np.array([0.1, -0.1, 0.0]), 4)
    assert np.allclose(f3.normal, [0.0, 0.0, 1.0], atol=1e-9)


def test_cone_residual_sign():
    f = ContactForce(1.0, [0.3, 0.2])
    assert cone_residual(0.5, f) == pytest.approx(0.0)
    assert cone_residual(0.4, f) < 0
    assert cone_residual(0.6, f) > 0


def test_world_force_composition():
    frame = build_frame(plane_grid_2d(), np.array([0.0, 0.0]), 2)
    f = world_force(frame, ContactForce(2.0, [0.5, 0.0]))
    assert np.allclose(f, [0.5, 2.0], atol=1e-9)


@pytest.mark.parametrize("nq", [3, 6])
def test_point_velocity_finite_differences(nq, rng):
    eps = 1e-7
    for _ in range(20):
        q = rng.uniform(-1.0, 1.0, nq)
        v = rng.uniform(-1.0, 1.0, nq)
        y = rng.uniform(-0.1, 0.1, 2 if nq == 3 else 3)
        com = np.zeros(2 if nq == 3 else 3)
        pv = point_velocity(q, v, y, com)
        fd = (transform_points(q + eps * v, y)
              - transform_points(q - eps * v, y)) / (2 * eps)
        assert np.allclose(pv, fd, atol=1e-6)


def test_slip_velocity_projects_tangentially():
    grid = plane_grid_2d()
    frame = build_frame(grid, np.array([0.0, 0.0]), 2)
    q = np.zeros(3)
    v = np.array([0.3, 0.0, 0.0])     # pure sliding
    s = slip_velocity(q, v, np.array([0.0, 0.0]), np.array([0.0, 0.05]),
                      frame)
    assert np.allclose(s, [0.3, -0.3])


def test_net_wrench_gravity_only():
    q = np.zeros(3)
    w = net_wrench(q, [], [], [], mass=0.2,
                   gravity=np.array([0.0, -9.8]), com=np.array([0.0, 0.05]))
    assert np.allclose(w.force, [0.0, -1.96])
    assert np.allclose(w.torque, [0.0])


def test_balanced_resting_box():
    """Upward contact force under the CoM exactly cancels gravity."""
    grid = plane_grid_2d()
    q = np.zeros(3)
    com = np.array([0.0, 0.05])
    frame = build_frame(grid, np.array([0.0, 0.0]), 2)
    f = ContactForce(0.1 * 9.8, [0.0, 0.0])
    w = net_wrench(q, [], [], [(np.array([0.0, 0.0]), f, frame)],
                   mass=0.1, gravity=np.array([0.0, -9.8]), com=com)
    assert np.allclose(balance_residual(w, "quasistatic"), 0.0, atol=1e-12)


def test_quasidynamic_balance_residual():
    w = Wrench(np.array([1.0, 0.0]), np.array([0.5]))
    r = balance_residual(w, "quasidynamic", mass=2.0, inertia=0.1,
                         v=np.array([0.2, 0.0, 1.0]), dt=0.1)
    # w - M v/dt
    assert np.allclose(r, [1.0 - 2.0 * 2.0, 0.0, 0.5 - 0.1 * 10.0])
    with pytest.raises(ContactError):
        balance_residual(w, "quasidynamic")
    with pytest.raises(ContactError):
        balance_residual(w, "dynamic")


def test_manipulator_contact_push_only_geometry():
    mc = ManipulatorContact.build([-0.05, 0.05], [2.0, 0.0], 2, 1.0)
    assert np.allclose(mc.normal, [1.0, 0.0])     # normalized
    f = mc.local_force(np.array([1.0, 0.25, 0.0]))
    assert np.allclose(f, [1.0, 0.25])
