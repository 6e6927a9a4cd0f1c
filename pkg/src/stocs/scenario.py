"""Scenario files: a human-editable YAML document referencing cloud/SDF assets.

Relative asset paths resolve against the scenario file's directory, or the
STOCS_ASSETS environment variable when set.  Angles are radians; a string
entry like "-90 deg" is accepted anywhere a rotation coordinate appears.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .contact import ManipulatorContact
from .geometry import SdfGrid, SurfaceCloud, load_cloud, load_sdf


class ScenarioError(ValueError):
    pass


def parse_angle(v) -> float:
    """Radians from a number, or from a '<value> deg'/'<value>deg' string."""
    if isinstance(v, str):
        s = v.strip()
        if s.endswith("deg"):
            return math.radians(float(s[:-3].strip()))
        return float(s)
    return float(v)


def _vector(raw, n, name, angles_from: int | None = None) -> np.ndarray:
    if raw is None or len(raw) != n:
        raise ScenarioError(f"{name}: expected {n} entries, got {raw!r}")
    out = np.empty(n)
    for i, v in enumerate(raw):
        if angles_from is not None and i >= angles_from:
            out[i] = parse_angle(v)
        else:
            if isinstance(v, str):
                raise ScenarioError(f"{name}[{i}]: unit suffixes are only "
                                    "accepted on angle entries")
            out[i] = float(v)
    return out


@dataclass
class Scenario:
    """Everything that defines one manipulation planning task."""
    name: str
    dim: int
    cloud: SurfaceCloud
    grid: SdfGrid
    mass: float
    com: np.ndarray
    inertia: float | np.ndarray | None  # 2D scalar / 3D 3x3; quasidynamic only
    mu_env: float
    mu_mnp: float
    friction_dirs: int              # tangent directions d per env contact
    manip_contacts: list[ManipulatorContact]
    q_start: np.ndarray
    q_goal: np.ndarray
    T: int
    dt: float
    q_low: np.ndarray
    q_high: np.ndarray
    v_low: np.ndarray
    v_high: np.ndarray
    u_max: float
    gravity: np.ndarray
    goal_tol_pos: float | None = None   # None: solver default applies
    goal_tol_rot: float | None = None
    cloud_path: str = ""
    sdf_path: str = ""

    @property
    def nq(self) -> int:
        return 3 if self.dim == 2 else 6

    def __post_init__(self):
        nq = self.nq
        if self.cloud.dim != self.dim or self.grid.dim != self.dim:
            raise ScenarioError("cloud/SDF dimension mismatch with scenario dim")
        if not (self.mass > 0):
            raise ScenarioError("mass must be positive")
        if self.mu_env < 0 or self.mu_mnp < 0:
            raise ScenarioError("friction coefficients must be nonnegative")
        if self.T < 1 or not (self.dt > 0):
            raise ScenarioError("T must be >= 1 and dt > 0")
        for name, vec in (("q_start", self.q_start), ("q_goal", self.q_goal),
                          ("q_low", self.q_low), ("q_high", self.q_high),
                          ("v_low", self.v_low), ("v_high", self.v_high)):
            if len(vec) != nq:
                raise ScenarioError(f"{name} must have {nq} coordinates")
        for c in self.manip_contacts:
            d2 = np.min(np.linalg.norm(self.cloud.points - c.point, axis=1))
            if d2 > 1e-6:
                raise ScenarioError(
                    f"manipulator contact {c.point.tolist()} is {d2:.2e} m "
                    "from the nearest cloud point (must be within 1e-6)")


def _resolve(path: str, base_dir: str) -> str:
    if os.path.isabs(path):
        return path
    prefix = os.environ.get("STOCS_ASSETS", base_dir)
    return os.path.join(prefix, path)


def load_scenario(path: str) -> Scenario:
    with open(path) as f:
        try:
            doc = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ScenarioError(f"{path}: not valid YAML: {e}") from e
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    base = os.path.dirname(os.path.abspath(path))

    def need(section, key):
        if key not in section:
            raise ScenarioError(f"{path}: missing field {key!r}")
        return section[key]

    dim = int(need(doc, "dim"))
    if dim not in (2, 3):
        raise ScenarioError(f"{path}: dim must be 2 or 3")
    nq = 3 if dim == 2 else 6
    obj = need(doc, "object")
    env = need(doc, "environment")
    fric = need(doc, "friction")

    cloud_path = _resolve(str(need(obj, "cloud")), base)
    sdf_path = _resolve(str(need(env, "sdf")), base)
    cloud = load_cloud(cloud_path)
    grid = load_sdf(sdf_path)

    mass = float(need(obj, "mass"))
    com = _vector(need(obj, "com"), dim, "object.com")
    inertia_raw = obj.get("inertia")   # optional: only quasidynamic needs it
    if inertia_raw is None:
        inertia = None
    elif dim == 2:
        inertia = float(inertia_raw)
        if inertia <= 0:
            raise ScenarioError(f"{path}: inertia must be positive")
    else:
        inertia = np.asarray(inertia_raw, dtype=float)
        if inertia.shape == ():
            inertia = float(inertia) * np.eye(3)
        if inertia.shape != (3, 3):
            raise ScenarioError(f"{path}: 3D inertia must be a 3x3 matrix")

    mu_env = float(need(fric, "mu_env"))
    mu_mnp = float(need(fric, "mu_mnp"))
    if mu_env < 0 or mu_mnp < 0:
        raise ScenarioError(f"{path}: friction coefficients must be >= 0")
    dirs = int(fric.get("dirs", 2 if dim == 2 else 4))

    manip = []
    for entry in doc.get("manipulator_contacts", []):
        pt = _vector(need(entry, "point"), dim, "manipulator point")
        if "normal" in entry:
            normal = _vector(entry["normal"], dim, "manipulator normal")
        else:
            if cloud.normals is None:
                raise ScenarioError(
                    f"{path}: manipulator contact without a normal requires a "
                    "cloud with per-point normals")
            i = int(np.argmin(np.linalg.norm(cloud.points - pt, axis=1)))
            normal = -cloud.normals[i]  # inward
        manip.append(ManipulatorContact.build(pt, normal, dirs, mu_mnp))

    q_start = _vector(need(doc, "q_start"), nq, "q_start", angles_from=dim)
    q_goal = _vector(need(doc, "q_goal"), nq, "q_goal", angles_from=dim)

    bounds = doc.get("bounds", {})
    big = 10.0
    q_low = _vector(bounds["q_low"], nq, "q_low", angles_from=dim) \
        if "q_low" in bounds else np.concatenate(
            [np.minimum(q_start[:dim], q_goal[:dim]) - big,
             np.full(nq - dim, -2 * math.pi)])
    q_high = _vector(bounds["q_high"], nq, "q_high", angles_from=dim) \
        if "q_high" in bounds else np.concatenate(
            [np.maximum(q_start[:dim], q_goal[:dim]) + big,
             np.full(nq - dim, 2 * math.pi)])
    v_low = _vector(bounds["v_low"], nq, "v_low") if "v_low" in bounds \
        else np.full(nq, -10.0)
    v_high = _vector(bounds["v_high"], nq, "v_high") if "v_high" in bounds \
        else np.full(nq, 10.0)
    u_max = float(bounds.get("u_max", 100.0))

    grav_raw = doc.get("gravity", 9.8)
    if isinstance(grav_raw, (int, float)):
        gravity = np.zeros(dim)
        gravity[dim - 1] = -float(grav_raw)
    else:
        gravity = _vector(grav_raw, dim, "gravity")

    return Scenario(
        name=doc.get("name", os.path.splitext(os.path.basename(path))[0]),
        dim=dim, cloud=cloud, grid=grid, mass=mass, com=com, inertia=inertia,
        mu_env=mu_env, mu_mnp=mu_mnp, friction_dirs=dirs,
        manip_contacts=manip, q_start=q_start, q_goal=q_goal,
        T=int(need(doc, "T")), dt=float(need(doc, "dt")),
        q_low=q_low, q_high=q_high, v_low=v_low, v_high=v_high, u_max=u_max,
        gravity=gravity,
        goal_tol_pos=(float(doc["goal_tol_pos"])
                      if "goal_tol_pos" in doc else None),
        goal_tol_rot=(parse_angle(doc["goal_tol_rot"])
                      if "goal_tol_rot" in doc else None),
        cloud_path=cloud_path, sdf_path=sdf_path)
