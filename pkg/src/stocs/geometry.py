"""Rigid transforms, surface point clouds, and signed-distance-field grids.

Conventions: 2D configurations are (x, y, theta); 3D configurations are
(x, y, z, roll, pitch, yaw) with ZYX Euler angles, so R = Rz(yaw) Ry(pitch)
Rx(roll).  All queries here are pure and read-only after load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Malformed geometry input (grid/cloud/configuration mismatch)."""


# ---------------------------------------------------------------------------
# configurations and rigid transforms
# ---------------------------------------------------------------------------

def config_dim(q: np.ndarray) -> int:
    """Spatial dimension implied by a configuration vector (3 coords -> 2D)."""
    n = len(q)
    if n == 3:
        return 2
    if n == 6:
        return 3
    raise GeometryError(f"configuration must have 3 or 6 coordinates, got {n}")


@dataclass(frozen=True)
class Configuration:
    """Object pose: translation plus planar angle (2D) or ZYX Euler angles (3D).

    3D rotations use roll/pitch/yaw; scenarios must stay away from
    pitch = +-pi/2 (gimbal lock).
    """
    dim: int
    translation: np.ndarray
    rotation: np.ndarray  # shape (1,) in 2D, (3,) = (roll, pitch, yaw) in 3D

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float)
        r = np.atleast_1d(np.asarray(self.rotation, dtype=float))
        if self.dim not in (2, 3):
            raise GeometryError(f"dim must be 2 or 3, got {self.dim}")
        if t.shape != (self.dim,) or r.shape != (1 if self.dim == 2 else 3,):
            raise GeometryError("translation/rotation shape mismatch with dim")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(r))):
            raise GeometryError("configuration entries must be finite")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @staticmethod
    def from_coords(q: np.ndarray) -> "Configuration":
        q = np.asarray(q, dtype=float)
        d = config_dim(q)
        return Configuration(d, q[:d], q[d:])

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.translation, self.rotation])


def rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def drotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[-s, -c], [c, -s]])


def _axis_rots(rpy):
    roll, pitch, yaw = rpy
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rx, Ry, Rz


def rotation_zyx(rpy: np.ndarray) -> np.ndarray:
    Rx, Ry, Rz = _axis_rots(rpy)
    return Rz @ Ry @ Rx


def drotation_zyx(rpy: np.ndarray) -> list[np.ndarray]:
    """Partials of R = Rz Ry Rx w.r.t. (roll, pitch, yaw)."""
    roll, pitch, yaw = rpy
    Rx, Ry, Rz = _axis_rots(rpy)
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    dRx = np.array([[0, 0, 0], [0, -sr, -cr], [0, cr, -sr]])
    dRy = np.array([[-sp, 0, cp], [0, 0, 0], [-cp, 0, -sp]])
    dRz = np.array([[-sy, -cy, 0], [cy, -sy, 0], [0, 0, 0]])
    return [Rz @ Ry @ dRx, Rz @ dRy @ Rx, dRz @ Ry @ Rx]


def pose_from_config(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rigid transform (R, p) mapping object-frame points to the world."""
    q = np.asarray(q, dtype=float)
    d = config_dim(q)
    R = rotation_2d(q[2]) if d == 2 else rotation_zyx(q[3:])
    return R, q[:d]


def transform_points(q: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply T_q to one point (dim,) or a batch (N, dim)."""
    R, p = pose_from_config(q)
    return np.asarray(pts, dtype=float) @ R.T + p


def rotation_jacobians(q: np.ndarray) -> list[np.ndarray]:
    """dR/d(angle) for each rotational coordinate of q."""
    d = config_dim(np.asarray(q))
    if d == 2:
        return [drotation_2d(q[2])]
    return drotation_zyx(np.asarray(q)[3:])


def transform_jacobian(q: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(T_q y)/dq, shape (dim, nq)."""
    q = np.asarray(q, dtype=float)
    y = np.asarray(y, dtype=float)
    d = config_dim(q)
    J = np.zeros((d, len(q)))
    J[:, :d] = np.eye(d)
    for k, dR in enumerate(rotation_jacobians(q)):
        J[:, d + k] = dR @ y
    return J


# ---------------------------------------------------------------------------
# surface point clouds
# ---------------------------------------------------------------------------

@dataclass
class SurfaceCloud:
    """Dense object-surface sample, in the object's local frame."""
    points: np.ndarray                       # (N, dim)
    normals: np.ndarray | None = None        # (N, dim) outward unit, optional

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] not in (2, 3):
            raise GeometryError("cloud points must be (N,2) or (N,3)")
        if len(self.points) == 0:
            raise GeometryError("cloud must be nonempty")
        if not np.all(np.isfinite(self.points)):
            raise GeometryError("cloud contains non-finite points")
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=float)
            if self.normals.shape != self.points.shape:
                raise GeometryError("normals shape must match points")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


def load_cloud(path: str) -> SurfaceCloud:
    """Read a whitespace-separated point cloud file.

    One point per line: 2 or 3 coordinates, optionally followed by the same
    number of normal components.  '#' starts a comment.
    """
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            vals = [float(v) for v in body.split()]
            if len(vals) not in (2, 3, 4, 6):
                raise GeometryError(
                    f"{path}:{lineno}: expected 2-3 coords (+ optional normals), "
                    f"got {len(vals)} fields")
            rows.append(vals)
    if not rows:
        raise GeometryError(f"{path}: empty point cloud")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise GeometryError(f"{path}: inconsistent column counts {sorted(widths)}")
    arr = np.array(rows)
    w = arr.shape[1]
    if w in (2, 3):
        return SurfaceCloud(arr)
    d = w // 2
    return SurfaceCloud(arr[:, :d], arr[:, d:])


def save_cloud(path: str, cloud: SurfaceCloud) -> None:
    with open(path, "w") as f:
        for i in range(len(cloud)):
            cols = list(cloud.points[i])
            if cloud.normals is not None:
                cols += list(cloud.normals[i])
            f.write(" ".join(repr(float(c)) for c in cols) + "\n")


# ---------------------------------------------------------------------------
# signed distance field grids
# ---------------------------------------------------------------------------

@dataclass
class SdfGrid:
    """Uniform grid of signed distances with bi/trilinear interpolation.

    `values` is indexed values[ix, iy(, iz)].  Outside the grid box, queries
    clamp to the boundary cell and add the Euclidean distance from the query
    to the box, which never under-reports penetration.
    """
    origin: np.ndarray
    h: float
    values: np.ndarray
    up_axis: int = field(init=False)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim not in (2, 3):
            raise GeometryError("grid must be 2D or 3D")
        if self.origin.shape != (self.values.ndim,):
            raise GeometryError("origin dimension must match grid values")
        if any(n < 2 for n in self.values.shape):
            raise GeometryError("grid needs at least 2 vertices per axis")
        if not (self.h > 0):
            raise GeometryError("cell size must be positive")
        if not np.all(np.isfinite(self.values)):
            raise GeometryError("grid values must be finite")
        self.up_axis = self.values.ndim - 1

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.h * (np.array(self.dims) - 1)

    def _locate(self, X: np.ndarray):
        """Cell indices and local coords for clamped points (batch)."""
        u = (X - self.origin) / self.h
        n = np.array(self.dims)
        idx = np.floor(u).astype(int)
        # low-coordinate tie break: a point exactly on a shared face belongs
        # to the lower cell
        on_face = (u == idx) & (idx > 0)
        idx = np.where(on_face, idx - 1, idx)
        idx = np.clip(idx, 0, n - 2)
        loc = u - idx
        return idx, loc

    def values_at(self, X: np.ndarray) -> np.ndarray:
        """Interpolated signed distance at a batch of world points (N, dim)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xc = np.clip(X, self.origin, self.upper)
        outside = np.linalg.norm(X - Xc, axis=1)
        idx, loc = self._locate(Xc)
        if self.dim == 2:
            i, j = idx[:, 0], idx[:, 1]
            fx, fy = loc[:, 0], loc[:, 1]
            v = self.values
            val = (v[i, j] * (1 - fx) * (1 - fy)
                   + v[i + 1, j] * fx * (1 - fy)
                   + v[i, j + 1] * (1 - fx) * fy
                   + v[i + 1, j + 1] * fx * fy)
        else:
            i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
            fx, fy, fz = loc[:, 0], loc[:, 1], loc[:, 2]
            v = self.values
            val = ((v[i, j, k] * (1 - fx) * (1 - fy)
                    + v[i + 1, j, k] * fx * (1 - fy)
                    + v[i, j + 1, k] * (1 - fx) * fy
                    + v[i + 1, j + 1, k] * fx * fy) * (1 - fz)
                   + (v[i, j, k + 1] * (1 - fx) * (1 - fy)
                      + v[i + 1, j, k + 1] * fx * (1 - fy)
                      + v[i, j + 1, k + 1] * (1 - fx) * fy
                      + v[i + 1, j + 1, k + 1] * fx * fy) * fz)
        return val + outside

    def value(self, x: np.ndarray) -> float:
        return float(self.values_at(np.asarray(x)[None, :])[0])

    def gradients_at(self, X: np.ndarray) -> np.ndarray:
        """Gradient of the interpolant (batch).  Outside the box, clamped
        axes contribute the unit direction away from the box instead."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xc = np.clip(X, self.origin, self.upper)
        delta = X - Xc
        dist = np.linalg.norm(delta, axis=1)
        idx, loc = self._locate(Xc)
        g = np.empty_like(X)
        if self.dim == 2:
            i, j = idx[:, 0], idx[:, 1]
            fx, fy = loc[:, 0], loc[:, 1]
            v = self.values
            g[:, 0] = ((v[i + 1, j] - v[i, j]) * (1 - fy)
                       + (v[i + 1, j + 1] - v[i, j + 1]) * fy) / self.h
            g[:, 1] = ((v[i, j + 1] - v[i, j]) * (1 - fx)
                       + (v[i + 1, j + 1] - v[i + 1, j]) * fx) / self.h
        else:
            i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
            fx, fy, fz = loc[:, 0], loc[:, 1], loc[:, 2]
            v = self.values
            def lerp3(a, b, t):
                return a * (1 - t) + b * t
            # x-partial
            gx0 = lerp3(v[i + 1, j, k] - v[i, j, k],
                        v[i + 1, j + 1, k] - v[i, j + 1, k], fy)
            gx1 = lerp3(v[i + 1, j, k + 1] - v[i, j, k + 1],
                        v[i + 1, j + 1, k + 1] - v[i, j + 1, k + 1], fy)
            g[:, 0] = lerp3(gx0, gx1, fz) / self.h
            gy0 = lerp3(v[i, j + 1, k] - v[i, j, k],
                        v[i + 1, j + 1, k] - v[i + 1, j, k], fx)
            gy1 = lerp3(v[i, j + 1, k + 1] - v[i, j, k + 1],
                        v[i + 1, j + 1, k + 1] - v[i + 1, j, k + 1], fx)
            g[:, 1] = lerp3(gy0, gy1, fz) / self.h
            gz0 = lerp3(v[i, j, k + 1] - v[i, j, k],
                        v[i + 1, j, k + 1] - v[i + 1, j, k], fx)
            gz1 = lerp3(v[i, j + 1, k + 1] - v[i, j + 1, k],
                        v[i + 1, j + 1, k + 1] - v[i + 1, j + 1, k], fx)
            g[:, 2] = lerp3(gz0, gz1, fy) / self.h
        out = dist > 0
        if np.any(out):
            unit = delta[out] / dist[out, None]
            clamped = delta[out] != 0
            g[out] = np.where(clamped, unit, g[out])
        return g

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradients_at(np.asarray(x)[None, :])[0]

    def normal(self, x: np.ndarray) -> np.ndarray:
        """Unit outward environment normal at x; falls back to the up axis
        when the interpolant gradient vanishes."""
        g = self.gradient(x)
        n = np.linalg.norm(g)
        if n < 1e-12:
            up = np.zeros(self.dim)
            up[self.up_axis] = 1.0
            return up
        return g / n

    @staticmethod
    def from_function(fn, origin, upper, h: float) -> "SdfGrid":
        """Sample an analytic signed-distance function onto a grid."""
        origin = np.asarray(origin, dtype=float)
        upper = np.asarray(upper, dtype=float)
        dims = np.maximum(np.round((upper - origin) / h).astype(int) + 1, 2)
        axes = [origin[a] + h * np.arange(dims[a]) for a in range(len(dims))]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = np.asarray(fn(pts), dtype=float).reshape(tuple(dims))
        return SdfGrid(origin, h, vals)


def sdf_value(grid: SdfGrid, x: np.ndarray) -> float:
    return grid.value(x)


def sdf_gradient(grid: SdfGrid, x: np.ndarray) -> np.ndarray:
    return grid.gradient(x)


def load_sdf(path: str) -> SdfGrid:
    """Read an SDF grid file: header lines dim/origin/cellsize/dims, then
    values row-major with x fastest.  A 'binary' token at the end of the
    header switches the payload to raw little-endian float64."""
    with open(path, "rb") as f:
        header: dict[str, list[str]] = {}
        binary = False
        while True:
            line = f.readline().decode("ascii")
            if not line:
                raise GeometryError(f"{path}: truncated header")
            toks = line.split()
            if not toks:
                continue
            key = toks[0]
            header[key] = toks[1:]
            if key == "dims":
                nxt = f.readline()
                if nxt.split()[:1] == [b"binary"]:
                    binary = True
                else:
                    f.seek(-len(nxt), 1)
                break
        try:
            dim = int(header["dim"][0])
            origin = np.array([float(v) for v in header["origin"]])
            h = float(header["cellsize"][0])
            dims = [int(v) for v in header["dims"]]
        except (KeyError, IndexError, ValueError) as e:
            raise GeometryError(f"{path}: bad SDF header: {e}") from e
        if len(origin) != dim or len(dims) != dim:
            raise GeometryError(f"{path}: header dims/origin mismatch with dim")
        count = int(np.prod(dims))
        if binary:
            raw = f.read(8 * count)
            if len(raw) != 8 * count:
                raise GeometryError(f"{path}: expected {count} binary values")
            flat = np.frombuffer(raw, dtype="<f8")
        else:
            flat = np.array(f.read().decode("ascii").split(), dtype=float)
            if flat.size != count:
                raise GeometryError(
                    f"{path}: expected {count} values, got {flat.size}")
    # file order is x fastest -> numpy needs Fortran-style reshape
    values = flat.reshape(tuple(reversed(dims))).T if dim == 2 else \
        flat.reshape(tuple(reversed(dims))).transpose(2, 1, 0)
    return SdfGrid(origin, h, values)


def save_sdf(path: str, grid: SdfGrid, binary: bool = False) -> None:
    dims = grid.dims
    with open(path, "wb") as f:
        hdr = (f"dim {grid.dim}\n"
               f"origin {' '.join(repr(float(v)) for v in grid.origin)}\n"
               f"cellsize {grid.h!r}\n"
               f"dims {' '.join(str(n) for n in dims)}\n")
        f.write(hdr.encode("ascii"))
        flat = (grid.values.T if grid.dim == 2
                else grid.values.transpose(2, 1, 0)).ravel()
        if binary:
            f.write(b"binary\n")
            f.write(flat.astype("<f8").tobytes())
        else:
            lines = []
            for i in range(0, flat.size, 8):
                lines.append(" ".join(repr(float(v)) for v in flat[i:i + 8]))
            f.write(("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# semi-infinite constraint g(q, y) = psi(T_q y)
# ---------------------------------------------------------------------------

def signed_distance(q: np.ndarray, y: np.ndarray, grid: SdfGrid) -> float:
    """g(q, y): signed distance of object point y under configuration q."""
    return grid.value(transform_points(q, y))


def signed_distance_grad(q: np.ndarray, y: np.ndarray,
                         grid: SdfGrid) -> tuple[float, np.ndarray]:
    """g and its chain-rule gradient dg/dq."""
    x = transform_points(q, y)
    g = grid.value(x)
    grad_psi = grid.gradient(x)
    return g, grad_psi @ transform_jacobian(q, y)


@dataclass(frozen=True)
class ClosestPointResult:
    index: int
    world_point: np.ndarray
    distance: float


def cloud_distances(q: np.ndarray, cloud: SurfaceCloud,
                    grid: SdfGrid) -> np.ndarray:
    """g(q, y) for every point in the cloud (vectorized)."""
    return grid.values_at(transform_points(q, cloud.points))


def closest_point(q: np.ndarray, cloud: SurfaceCloud,
                  grid: SdfGrid) -> ClosestPointResult:
    """Exact argmin of g over the cloud; ties go to the lowest index."""
    world = transform_points(q, cloud.points)
    d = grid.values_at(world)
    i = int(np.argmin(d))
    return ClosestPointResult(i, world[i], float(d[i]))
