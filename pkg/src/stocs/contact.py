"""Contact frames, polyhedral friction cones, slip velocities, and wrenches.

All functions are pure; frames are plain data so they can be frozen for the
duration of one inner solve and rebuilt between outer iterations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (SdfGrid, config_dim, pose_from_config,
                       rotation_jacobians, transform_points)


class ContactError(ValueError):
    pass


@dataclass(frozen=True)
class ContactFrame:
    """World contact point with outward environment normal and d tangents."""
    point: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray  # (d, dim)
    degenerate: bool = False  # normal came from the zero-gradient fallback

    @property
    def d(self) -> int:
        return len(self.tangents)


@dataclass
class ContactForce:
    """Per-contact force decomposition: normal, d tangentials, slip slack."""
    zN: float
    zD: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        self.zD = np.atleast_1d(np.asarray(self.zD, dtype=float))

    @property
    def components(self) -> np.ndarray:
        return np.concatenate([[self.zN], self.zD])


@dataclass
class Wrench:
    force: np.ndarray
    torque: np.ndarray  # shape (1,) in 2D, (3,) in 3D

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.force + other.force, self.torque + other.torque)

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


def tangent_basis(normal: np.ndarray, d: int) -> np.ndarray:
    """d unit tangents orthogonal to `normal`.

    The first tangent is the world x-axis projected onto the tangent plane
    (y-axis when degenerate); in 3D the rest are evenly spaced in the plane,
    so even d is closed under negation.  In 2D, d must be 2 and the second
    tangent is the negation of the first.
    """
    n = np.asarray(normal, dtype=float)
    dim = len(n)
    for axis in (0, 1):
        e = np.zeros(dim)
        e[axis] = 1.0
        t1 = e - np.dot(e, n) * n
        norm = np.linalg.norm(t1)
        if norm > 1e-9:
            t1 /= norm
            break
    else:
        raise ContactError("cannot build tangent basis for normal %s" % n)
    if dim == 2:
        if d != 2:
            raise ContactError("2D friction model requires d = 2")
        return np.stack([t1, -t1])
    if d == 2:
        return np.stack([t1, -t1])
    if d < 3 or d % 2 != 0:
        raise ContactError("3D tangent count must be 2 or an even number >= 4")
    t2 = np.cross(n, t1)
    angles = 2.0 * math.pi * np.arange(d) / d
    return np.outer(np.cos(angles), t1) + np.outer(np.sin(angles), t2)


def build_frame(grid: SdfGrid, point: np.ndarray, d: int) -> ContactFrame:
    """Environment contact frame at a world point, normal from the SDF."""
    point = np.asarray(point, dtype=float)
    g = grid.gradient(point)
    norm = np.linalg.norm(g)
    degenerate = norm < 1e-12
    if degenerate:
        n = np.zeros(grid.dim)
        n[grid.up_axis] = 1.0
    else:
        n = g / norm
    return ContactFrame(point, n, tangent_basis(n, d), degenerate)


def cone_residual(mu: float, f: ContactForce) -> float:
    """mu * zN - sum of tangential components; negative means infeasible."""
    return mu * f.zN - float(np.sum(f.zD))


def world_force(frame: ContactFrame, f: ContactForce) -> np.ndarray:
    return f.zN * frame.normal + f.zD @ frame.tangents


@dataclass(frozen=True)
class ManipulatorContact:
    """Sticking manipulator contact, fixed in the object frame.

    `normal` is the inward object-surface normal; pushes only (all force
    components nonnegative), so there is no slip slack.
    """
    point: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray
    mu: float

    @staticmethod
    def build(point, inward_normal, d: int, mu: float) -> "ManipulatorContact":
        n = np.asarray(inward_normal, dtype=float)
        n = n / np.linalg.norm(n)
        return ManipulatorContact(np.asarray(point, dtype=float), n,
                                  tangent_basis(n, d), mu)

    @property
    def d(self) -> int:
        return len(self.tangents)

    def local_force(self, comps: np.ndarray) -> np.ndarray:
        """Object-frame force from (uN, uD1..uDd) components."""
        return comps[0] * self.normal + comps[1:] @ self.tangents


def euler_rate_matrix(rpy: np.ndarray) -> np.ndarray:
    """E mapping ZYX Euler rates (roll', pitch', yaw') to world omega."""
    _, pitch, yaw = rpy
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array([[cy * cp, -sy, 0.0],
                     [sy * cp, cy, 0.0],
                     [-sp, 0.0, 1.0]])


def deuler_rate_matrix(rpy: np.ndarray) -> list[np.ndarray]:
    """Partials of E w.r.t. (roll, pitch, yaw)."""
    _, pitch, yaw = rpy
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    dp = np.array([[-cy * sp, 0.0, 0.0],
                   [-sy * sp, 0.0, 0.0],
                   [-cp, 0.0, 0.0]])
    dy = np.array([[-sy * cp, -cy, 0.0],
                   [cy * cp, -sy, 0.0],
                   [0.0, 0.0, 0.0]])
    return [np.zeros((3, 3)), dp, dy]


def world_angular_velocity(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """World angular velocity from configuration-rate coordinates v."""
    d = config_dim(q)
    if d == 2:
        return np.array([v[2]])
    return euler_rate_matrix(q[3:]) @ v[3:]


def point_velocity(q: np.ndarray, v: np.ndarray, y: np.ndarray,
                   com: np.ndarray) -> np.ndarray:
    """World velocity of object material point y: v_trans + omega x r."""
    d = config_dim(q)
    R, _ = pose_from_config(q)
    r = R @ (np.asarray(y) - np.asarray(com))
    if d == 2:
        omega = v[2]
        return v[:2] + omega * np.array([-r[1], r[0]])
    omega = world_angular_velocity(q, v)
    return v[:3] + np.cross(omega, r)


def slip_velocity(q: np.ndarray, v: np.ndarray, y: np.ndarray,
                  com: np.ndarray, frame: ContactFrame) -> np.ndarray:
    """Tangential projections of the contact point's world velocity."""
    return frame.tangents @ point_velocity(q, v, y, com)


def cross_torque(r: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Torque of force f applied at lever arm r (scalar cross in 2D)."""
    if len(r) == 2:
        return np.array([r[0] * f[1] - r[1] * f[0]])
    return np.cross(r, f)


def contact_wrench(q: np.ndarray, y: np.ndarray, f: ContactForce,
                   frame: ContactFrame, com: np.ndarray) -> Wrench:
    """Wrench about the (world) center of mass from one environment contact."""
    force = world_force(frame, f)
    r = transform_points(q, y) - transform_points(q, com)
    return Wrench(force, cross_torque(r, force))


def net_wrench(q: np.ndarray,
               manip: list[ManipulatorContact],
               u: list[np.ndarray],
               contacts: list[tuple[np.ndarray, ContactForce, ContactFrame]],
               mass: float, gravity: np.ndarray, com: np.ndarray) -> Wrench:
    """Gravity + manipulator + environment-contact wrench about the CoM."""
    d = config_dim(q)
    R, _ = pose_from_config(q)
    total = Wrench(mass * np.asarray(gravity, dtype=float),
                   np.zeros(1 if d == 2 else 3))
    for c, comps in zip(manip, u):
        f_world = R @ c.local_force(np.asarray(comps, dtype=float))
        r = R @ (c.point - com)
        total = total + Wrench(f_world, cross_torque(r, f_world))
    for y, f, frame in contacts:
        total = total + contact_wrench(q, y, f, frame, com)
    return total


def balance_residual(w: Wrench, mode: str, mass: float | None = None,
                     inertia: np.ndarray | float | None = None,
                     v: np.ndarray | None = None,
                     dt: float | None = None) -> np.ndarray:
    """Force-torque balance: w = 0 (quasistatic) or w = M vdot with
    vdot approximated as v / dt (quasidynamic)."""
    if mode == "quasistatic":
        return w.stacked
    if mode != "quasidynamic":
        raise ContactError(f"unknown balance mode {mode!r}")
    if mass is None or inertia is None or v is None or dt is None:
        raise ContactError("quasidynamic mode requires mass, inertia, v, dt")
    dim = len(w.force)
    vdot = np.asarray(v, dtype=float) / dt
    trans = w.force - mass * vdot[:dim]
    if dim == 2:
        rot = w.torque - np.atleast_1d(float(inertia) * vdot[2])
    else:
        rot = w.torque - np.asarray(inertia) @ vdot[3:]
    return np.concatenate([trans, rot])
