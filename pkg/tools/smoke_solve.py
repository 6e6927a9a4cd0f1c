"""End-to-end dev smoke: resting box must converge and pass verification."""
import numpy as np

from stocs.contact import ManipulatorContact
from stocs.geometry import SdfGrid, SurfaceCloud
from stocs.scenario import Scenario
from stocs.solver import StocsConfig, solve
from stocs.verify import VerifyConfig, verify


def box_cloud(hx, hy, n):
    pts = [[0.0, -hy]]  # under-center support point first; ties pick it
    for i in range(n):
        s = -hx + 2 * hx * i / n
        pts.append([s, -hy])
        pts.append([-s, hy])
    for i in range(n):
        s = -hy + 2 * hy * i / n
        pts.append([hx, s])
        pts.append([-hx, -s])
    return SurfaceCloud(np.array(pts))


cloud = box_cloud(0.05, 0.05, 10)
grid = SdfGrid.from_function(lambda p: p[:, 1], [-1, -1], [1, 1], 0.02)
manip = [ManipulatorContact.build([-0.05, 0.0], [1, 0], 2, 0.5)]
nq = 3
scen = Scenario(
    name="rest", dim=2, cloud=cloud, grid=grid, mass=0.1,
    com=np.zeros(2), inertia=1e-4, mu_env=0.5, mu_mnp=0.5,
    friction_dirs=2, manip_contacts=manip,
    q_start=np.array([0.0, 0.05, 0.0]), q_goal=np.array([0.0, 0.05, 0.0]),
    T=5, dt=0.1,
    q_low=np.array([-1, 0.0, -np.pi]), q_high=np.array([1, 1, np.pi]),
    v_low=np.full(nq, -10.0), v_high=np.full(nq, 10.0),
    u_max=10.0, gravity=np.array([0.0, -9.8]))

for oracle in ("mvo", "tamvo"):
    cfg = StocsConfig(oracle=oracle)
    res = solve(scen, cfg)
    print(f"[{oracle}] status={res.status} iters={len(res.stats)} "
          f"mean_pts={res.index_set.mean_count():.2f} obj={res.objective:.4e}")
    for st in res.stats:
        print(f"  k={st.k} alpha={st.alpha:.3f} sigma={st.sigma:.1e} "
              f"merit {st.merit_before:.4e}->{st.merit_after:.4e} "
              f"pts={st.mean_points:.2f} "
              f"step={st.residual_norms['step']:.2e} "
              f"gap={st.residual_norms['gap']:.2e} "
              f"bal={st.residual_norms['balance']:.2e} "
              f"pen={st.residual_norms['penetration']:.2e} "
              f"feas={st.residual_norms['feasibility']:.2e} "
              f"t={st.wall_time:.2f}s")
    rep = verify(scen, res, VerifyConfig())
    print(rep.table())
    assert res.status == "converged", oracle
    assert rep.passed, oracle
print("smoke OK")
