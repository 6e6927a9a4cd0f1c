"""Generate the bundled clouds, SDF grids, and scenario files in assets/."""
import math
import os

import numpy as np

from stocs.geometry import SdfGrid, SurfaceCloud, save_cloud, save_sdf

HERE = os.path.dirname(os.path.abspath(__file__))
ASSETS = os.path.join(HERE, os.pardir, "assets")
os.makedirs(ASSETS, exist_ok=True)


def sample_polygon(vertices, counts):
    """Sample a CCW polygon boundary: `counts[i]` points on edge i, half-open
    so every vertex appears exactly once.  Outward normals per edge."""
    vertices = np.asarray(vertices, dtype=float)
    pts, nrm = [], []
    n = len(vertices)
    for e in range(n):
        a, b = vertices[e], vertices[(e + 1) % n]
        d = b - a
        length = np.linalg.norm(d)
        d = d / length
        outward = np.array([d[1], -d[0]])
        for k in range(counts[e]):
            pts.append(a + d * (length * k / counts[e]))
            nrm.append(outward)
    return SurfaceCloud(np.array(pts), np.array(nrm))


def box_cloud_2d(w, h, n_short, n_long):
    """Box [-w/2, w/2] x [0, h], origin at the bottom-center."""
    return sample_polygon(
        [[-w / 2, 0], [w / 2, 0], [w / 2, h], [-w / 2, h]],
        [n_short, n_long, n_short, n_long])


def polygon_sdf(vertices):
    """Signed distance to a simple polygon (negative inside)."""
    V = np.asarray(vertices, dtype=float)
    E = np.roll(V, -1, axis=0) - V

    def fn(p):
        p = np.atleast_2d(p)
        d = np.full(len(p), np.inf)
        inside = np.zeros(len(p), dtype=bool)
        for i in range(len(V)):
            a, e = V[i], E[i]
            w = p - a
            tt = np.clip((w @ e) / (e @ e), 0.0, 1.0)
            d = np.minimum(d, np.linalg.norm(w - tt[:, None] * e, axis=1))
            b = V[(i + 1) % len(V)]
            crosses = (a[1] <= p[:, 1]) != (b[1] <= p[:, 1])
            xi = a[0] + (p[:, 1] - a[1]) * e[0] / e[1] if e[1] != 0 else None
            if xi is not None:
                inside ^= crosses & (p[:, 0] < xi)
        return np.where(inside, -d, d)

    return fn


def main():
    # 212-point box for the pivoting task
    save_cloud(os.path.join(ASSETS, "box212.xyz"),
               box_cloud_2d(0.1, 0.3, 26, 80))

    # 543-point dented block: notch in the top face, flat bottom.  Bottom
    # samples are ordered center-out so distance ties resolve under the
    # center of mass; the flat span rides on several ripple crests at once.
    xs = np.linspace(-0.08, 0.08, 223)[1:-1]     # corners come from the walls
    xs = xs[np.argsort(np.abs(xs), kind="stable")]
    bot = SurfaceCloud(np.stack([xs, np.zeros(len(xs))], axis=1),
                       np.tile([0.0, -1.0], (len(xs), 1)))
    walls = sample_polygon(
        [[0.08, 0.0], [0.08, 0.1], [0.02, 0.1], [0, 0.06],
         [-0.02, 0.1], [-0.08, 0.1], [-0.08, 0.0]],
        [75, 44, 42, 42, 44, 75, 0])       # open bottom: supplied above
    dent = SurfaceCloud(np.vstack([bot.points, walls.points]),
                        np.vstack([bot.normals, walls.normals]))
    save_cloud(os.path.join(ASSETS, "dent543.xyz"), dent)

    # 214-point peg
    save_cloud(os.path.join(ASSETS, "peg214.xyz"),
               box_cloud_2d(0.04, 0.12, 11, 96))

    # 40-point box for the planar-embedding pair; the under-center bottom
    # point leads so the closest-point tie-break lands on a balanceable pick
    emb = box_cloud_2d(0.1, 0.1, 10, 10)
    lead = int(np.argmin(np.linalg.norm(emb.points, axis=1)))
    order = [lead] + [i for i in range(len(emb)) if i != lead]
    emb = SurfaceCloud(emb.points[order], emb.normals[order])
    save_cloud(os.path.join(ASSETS, "embedbox.xyz"), emb)
    pts3 = np.stack([emb.points[:, 0], np.zeros(len(emb)),
                     emb.points[:, 1]], axis=1)
    nrm3 = np.stack([emb.normals[:, 0], np.zeros(len(emb)),
                     emb.normals[:, 1]], axis=1)
    save_cloud(os.path.join(ASSETS, "embedbox_3d.xyz"),
               SurfaceCloud(pts3, nrm3))

    # 500-point sphere, radius 0.05, with one exact point for the pusher
    n = 499
    i = np.arange(n)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    zc = 1.0 - 2.0 * (i + 0.5) / n
    rr = np.sqrt(1.0 - zc ** 2)
    sph = np.stack([rr * np.cos(phi), rr * np.sin(phi), zc], axis=1)
    sph = np.vstack([[-1.0, 0.0, 0.0], sph]) * 0.05
    save_cloud(os.path.join(ASSETS, "sphere500.xyz"),
               SurfaceCloud(sph, sph / 0.05))

    # flat ground fields
    save_sdf(os.path.join(ASSETS, "plane2d.sdf"),
             SdfGrid.from_function(lambda p: p[:, 1],
                                   [-1.0, -0.2], [1.0, 0.8], 0.05))
    save_sdf(os.path.join(ASSETS, "plane3d.sdf"),
             SdfGrid.from_function(lambda p: p[:, 2],
                                   [-0.5, -0.5, -0.2], [0.5, 0.5, 0.6], 0.1),
             binary=True)

    # short-wavelength ripples: the 0.16 m flat bottom always spans two or
    # three crests, so the support straddles the center of mass everywhere
    amp, wl = 0.0005, 0.08
    save_sdf(os.path.join(ASSETS, "uneven2d.sdf"),
             SdfGrid.from_function(
                 lambda p: p[:, 1] - amp * np.cos(2 * math.pi * p[:, 0] / wl),
                 [-0.3, -0.06], [0.5, 0.3], 0.002))

    # tilted slot: two blocks below y = 0 leaving an angled channel
    tilt = math.radians(15.0)
    ax = np.array([math.sin(tilt), -math.cos(tilt)])   # channel axis, downward
    nh = np.array([math.cos(tilt), math.sin(tilt)])    # channel cross axis
    half = 0.022
    depth = 0.25
    mouth_l = -half / math.cos(tilt)
    mouth_r = half / math.cos(tilt)
    bot_l = -half * nh + depth * ax
    bot_r = half * nh + depth * ax
    left = polygon_sdf([[-0.6, 0], [mouth_l, 0], bot_l, [-0.6, -0.6]])
    right = polygon_sdf([[mouth_r, 0], [0.6, 0], [0.6, -0.6], bot_r])
    save_sdf(os.path.join(ASSETS, "slot2d.sdf"),
             SdfGrid.from_function(
                 lambda p: np.minimum(left(p), right(p)),
                 [-0.25, -0.12], [0.25, 0.3], 0.004))

    for name, text in SCENARIOS.items():
        with open(os.path.join(ASSETS, name), "w") as f:
            f.write(text)
    print("assets written to", os.path.abspath(ASSETS))


SCENARIOS = {
    "box2d_pivot.yaml": """\
# Pivot a tall box 40 degrees about its bottom-right corner.
name: box2d_pivot
dim: 2
object:
  cloud: box212.xyz
  mass: 0.1
  com: [0.0, 0.15]
  inertia: 8.333e-4
environment:
  sdf: plane2d.sdf
friction:
  mu_env: 0.5
  mu_mnp: 1.0
  dirs: 2
manipulator_contacts:
  - point: [0.0, 0.3]          # top face, pressing down
q_start: [0.0, 0.0, 0.0]
q_goal: [0.011698, 0.032139, "-40 deg"]
T: 20
dt: 0.1
bounds:
  v_low: [-3.0, -3.0, -3.0]
  v_high: [3.0, 3.0, 3.0]
  u_max: 10.0
""",
    "dented_on_uneven.yaml": """\
# Slide a dented block two ripple wavelengths along a corrugated floor.
name: dented_on_uneven
dim: 2
object:
  cloud: dent543.xyz
  mass: 0.2
  com: [0.0, 0.05]
  inertia: 5.9e-4
environment:
  sdf: uneven2d.sdf
friction:
  mu_env: 0.5
  mu_mnp: 1.0
  dirs: 2
manipulator_contacts:
  - point: [-0.08, 0.02]        # low on the left face, pushing right
q_start: [0.0, 0.0005, 0.0]
q_goal: [0.16, 0.0005, 0.0]
T: 10
dt: 0.1
goal_tol_pos: 2.0e-3
goal_tol_rot: 0.05
bounds:
  v_low: [-3.0, -3.0, -3.0]
  v_high: [3.0, 3.0, 3.0]
  u_max: 20.0
""",
    "tilted_peg.yaml": """\
# Insert a gripped peg into a channel tilted 15 degrees from vertical.
name: tilted_peg
dim: 2
object:
  cloud: peg214.xyz
  mass: 0.05
  com: [0.0, 0.06]
  inertia: 6.67e-5
environment:
  sdf: slot2d.sdf
friction:
  mu_env: 0.5
  mu_mnp: 1.0
  dirs: 2
manipulator_contacts:
  - point: [0.02, 0.09]         # opposing squeeze, right face
  - point: [-0.02, 0.09]        # opposing squeeze, left face
q_start: [-0.002, 0.02, "25 deg"]
q_goal: [0.020706, -0.077274, "15 deg"]
T: 10
dt: 0.1
goal_tol_pos: 2.0e-3
goal_tol_rot: 0.03
bounds:
  v_low: [-3.0, -3.0, -3.0]
  v_high: [3.0, 3.0, 3.0]
  u_max: 20.0
""",
    "sphere3d_roll.yaml": """\
# Roll a sphere 4 cm along the floor.
name: sphere3d_roll
dim: 3
object:
  cloud: sphere500.xyz
  mass: 0.1
  com: [0.0, 0.0, 0.0]
  inertia: 1.0e-4
environment:
  sdf: plane3d.sdf
friction:
  mu_env: 1.0
  mu_mnp: 1.0
  dirs: 4
manipulator_contacts:
  - point: [-0.05, 0.0, 0.0]    # behind the sphere, pushing forward
q_start: [0.0, 0.0, 0.05, 0.0, 0.0, 0.0]
q_goal: [0.04, 0.0, 0.05, 0.0, 0.8, 0.0]
T: 10
dt: 0.1
goal_tol_pos: 1.0e-3
goal_tol_rot: 0.05
bounds:
  v_low: [-3.0, -3.0, -3.0, -6.0, -6.0, -6.0]
  v_high: [3.0, 3.0, 3.0, 6.0, 6.0, 6.0]
  u_max: 10.0
""",
    "embed_box2d.yaml": """\
# Planar half of the 2D/3D consistency pair: a box holding still on the floor.
name: embed_box2d
dim: 2
object:
  cloud: embedbox.xyz
  mass: 0.1
  com: [0.0, 0.05]
  inertia: 1.667e-4
environment:
  sdf: plane2d.sdf
friction:
  mu_env: 0.5
  mu_mnp: 1.0
  dirs: 2
manipulator_contacts:
  - point: [-0.05, 0.05]
q_start: [0.0, 0.0, 0.0]
q_goal: [0.0, 0.0, 0.0]
T: 5
dt: 0.1
bounds:
  v_low: [-3.0, -3.0, -3.0]
  v_high: [3.0, 3.0, 3.0]
  u_max: 10.0
""",
    "embed_box3d.yaml": """\
# Spatial half of the 2D/3D consistency pair: same task in the x-z plane.
name: embed_box3d
dim: 3
object:
  cloud: embedbox_3d.xyz
  mass: 0.1
  com: [0.0, 0.0, 0.05]
  inertia: 1.667e-4
environment:
  sdf: plane3d.sdf
friction:
  mu_env: 0.5
  mu_mnp: 1.0
  dirs: 2
manipulator_contacts:
  - point: [-0.05, 0.0, 0.05]
q_start: [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
q_goal: [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
T: 5
dt: 0.1
bounds:
  v_low: [-3.0, -3.0, -3.0, -6.0, -6.0, -6.0]
  v_high: [3.0, 3.0, 3.0, 6.0, 6.0, 6.0]
  u_max: 10.0
""",
}


if __name__ == "__main__":
    main()
