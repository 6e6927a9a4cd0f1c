"""Finite-difference spot check of MPCC constraint Jacobians (dev tool)."""
import numpy as np

from stocs.contact import ManipulatorContact
from stocs.geometry import SdfGrid, SurfaceCloud
from stocs.mpcc import MpccConfig, MpccProblem
from stocs.oracle import IndexPoint, IndexSet
from stocs.scenario import Scenario

rng = np.random.default_rng(0)


def tiny_scenario(dim):
    nq = 3 if dim == 2 else 6
    if dim == 2:
        pts = np.array([[-.05, 0], [.05, 0], [.05, .1], [-.05, .1],
                        [0, 0], [-.05, .05]])
        grid = SdfGrid.from_function(lambda p: p[:, 1], [-1, -1], [1, 1], .05)
        manip = [ManipulatorContact.build([-.05, .05], [1, 0], 2, .5)]
        inertia = 1e-3
        grav = np.array([0, -9.8])
    else:
        pts = np.array([[-.05, -.05, 0], [.05, .05, 0], [.05, -.05, .1],
                        [-.05, .05, .1], [0, 0, 0], [-.05, 0, .05]])
        grid = SdfGrid.from_function(lambda p: p[:, 2],
                                     [-1, -1, -1], [1, 1, 1], .1)
        manip = [ManipulatorContact.build([-.05, 0, .05], [1, 0, 0], 4, .5)]
        inertia = np.eye(3) * 1e-3
        grav = np.array([0, 0, -9.8])
    cloud = SurfaceCloud(pts)
    return Scenario(
        name="tiny", dim=dim, cloud=cloud, grid=grid, mass=.1,
        com=np.zeros(dim) + (0 if dim == 2 else 0), inertia=inertia,
        mu_env=.5, mu_mnp=.5, friction_dirs=2 if dim == 2 else 4,
        manip_contacts=manip,
        q_start=np.zeros(nq), q_goal=np.zeros(nq), T=3, dt=.1,
        q_low=np.full(nq, -10), q_high=np.full(nq, 10),
        v_low=np.full(nq, -10), v_high=np.full(nq, 10),
        u_max=50.0, gravity=grav)


def check(dim, mode):
    scen = tiny_scenario(dim)
    iset = IndexSet.empty(scen.T)
    for t in range(scen.T + 1):
        for i in (0, 1):
            iset.steps[t].append(
                IndexPoint(t, i, scen.cloud.points[i].copy(), 1))
    traj = rng.normal(scale=.05, size=(scen.T + 1, scen.nq))
    prob = MpccProblem(scen, iset, traj, MpccConfig(), mode, sigma=1e-2)
    worst = 0.0
    for trial in range(20):
        x = rng.normal(scale=.2, size=prob.layout.nx)
        for fn in (prob.eq_constraints, prob.ineq_constraints,
                   lambda xx: (np.atleast_1d(prob.objective(xx)[0]),
                               prob.objective(xx)[1][None, :])):
            v0, J = fn(x)
            h = 1e-6
            Jfd = np.empty_like(J)
            for j in range(prob.layout.nx):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                Jfd[:, j] = (fn(xp)[0] - fn(xm)[0]) / (2 * h)
            err = np.max(np.abs(J - Jfd)) / max(1.0, np.max(np.abs(J)))
            worst = max(worst, err)
    print(f"dim={dim} mode={mode}: worst rel FD error {worst:.3e}")
    assert worst < 1e-4, "jacobian mismatch"


for dim in (2, 3):
    for mode in ("quasistatic", "quasidynamic"):
        check(dim, mode)
print("all jacobians OK")
