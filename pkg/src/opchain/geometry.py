"""Minimal pose arithmetic for the kinematic worlds.

Poses are position + unit quaternion (w, x, y, z), stored as plain float
tuples: the worlds evaluate predicates every tick and small-tuple math beats
array round-trips at this size.  Rotation helpers follow the shortest arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

IDENTITY_QUAT: Quat = (1.0, 0.0, 0.0, 0.0)


def vec_add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vec_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vec_scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vec_dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vec_norm(a: Vec3) -> float:
    return math.sqrt(vec_dot(a, a))


def vec_dist(a: Vec3, b: Vec3) -> float:
    return vec_norm(vec_sub(a, b))


def quat_normalize(q: Quat) -> Quat:
    n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if n == 0.0:
        raise ValueError("zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def quat_multiply(a: Quat, b: Quat) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_conjugate(q: Quat) -> Quat:
    return (q[0], -q[1], -q[2], -q[3])


def quat_rotate(q: Quat, v: Vec3) -> Vec3:
    # v' = q * (0, v) * q~, expanded
    w, x, y, z = q
    vx, vy, vz = v
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return (
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    )


def rotation_angle(a: Quat, b: Quat) -> float:
    """Magnitude of the axis-angle rotation taking orientation a to b."""
    dot = abs(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3])
    return 2.0 * math.acos(min(1.0, dot))


def quat_step(current: Quat, target: Quat, max_angle: float) -> Quat:
    """Rotate from current toward target by at most max_angle (shortest arc)."""
    angle = rotation_angle(current, target)
    if angle <= max_angle or angle == 0.0:
        return target
    t = max_angle / angle
    # shortest-arc slerp
    dot = (
        current[0] * target[0]
        + current[1] * target[1]
        + current[2] * target[2]
        + current[3] * target[3]
    )
    tgt = target if dot >= 0 else tuple(-c for c in target)
    theta = angle / 2.0
    sin_theta = math.sin(theta)
    wa = math.sin((1.0 - t) * theta) / sin_theta
    wb = math.sin(t * theta) / sin_theta
    return quat_normalize(
        (
            wa * current[0] + wb * tgt[0],
            wa * current[1] + wb * tgt[1],
            wa * current[2] + wb * tgt[2],
            wa * current[3] + wb * tgt[3],
        )
    )


def vec_step(current: Vec3, target: Vec3, max_dist: float) -> Vec3:
    delta = vec_sub(target, current)
    d = vec_norm(delta)
    if d <= max_dist or d == 0.0:
        return target
    return vec_add(current, vec_scale(delta, max_dist / d))


def point_segment_projection(p: Vec3, a: Vec3, b: Vec3) -> tuple[float, float]:
    """Return (radial distance to the segment's line, projection parameter t).

    t is the unclamped position of p's projection along a->b (0 at a, 1 at b);
    callers decide whether the axial extent is acceptable.
    """
    ab = vec_sub(b, a)
    denom = vec_dot(ab, ab)
    if denom == 0.0:
        return vec_dist(p, a), 0.0
    t = vec_dot(vec_sub(p, a), ab) / denom
    closest = vec_add(a, vec_scale(ab, t))
    return vec_dist(p, closest), t


@dataclass(frozen=True)
class Pose:
    """Rigid transform: translation plus unit quaternion (w, x, y, z)."""

    position: Vec3
    orientation: Quat = IDENTITY_QUAT

    def __post_init__(self):
        q = self.orientation
        n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
        if abs(n - 1.0) > 1e-9:
            object.__setattr__(self, "orientation", quat_normalize(q))

    def compose(self, local: "Pose") -> "Pose":
        """self applied first, then `local` expressed in self's frame."""
        return Pose(
            vec_add(self.position, quat_rotate(self.orientation, local.position)),
            quat_multiply(self.orientation, local.orientation),
        )

    def inverse(self) -> "Pose":
        inv_q = quat_conjugate(self.orientation)
        return Pose(quat_rotate(inv_q, vec_scale(self.position, -1.0)), inv_q)

    def relative_to(self, base: "Pose") -> "Pose":
        """Express self in base's frame: base.compose(result) == self."""
        return base.inverse().compose(self)

    def distance_to(self, other: "Pose") -> float:
        return vec_dist(self.position, other.position)

    def angle_to(self, other: "Pose") -> float:
        return rotation_angle(self.orientation, other.orientation)
