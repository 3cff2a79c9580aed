"""Vector/pose algebra, collision primitives, and optical measurability checks.

Conventions used throughout the package:

* Lengths are millimeters, angles are radians internally (degrees only at
  file/CLI boundaries and for view angles, which are reported in degrees).
* A probe pose is a position plus (roll, pitch, yaw), with rotation matrix
  ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
* The laser beam leaves the probe along the probe frame's -Z axis; the
  stripe plane is the probe XZ plane.  A head-on measurement therefore has
  the probe +Z axis aligned with the surface normal of the target point.
* Product surfaces are discretized point clouds with per-point normals;
  fixtures and robot links are capsules.  All distance queries are exact
  closed forms on segments.

Everything in this module is a pure function over immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Reason codes returned by `measurable`.
REASON_DEPTH = "depth"
REASON_VIEW_ANGLE = "view-angle"
REASON_STRIPE = "stripe"
REASON_OCCLUSION = "occlusion"

# Radius of the exclusion ball around the target point so the measured
# surface point does not occlude its own beam.
MP_EXCLUSION_RADIUS = 2.0

_UNIT_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Build a 3-vector (float64)."""
    return np.array([x, y, z], dtype=float)


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize ``v``; raises ValueError on (near-)zero vectors."""
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a zero-length vector")
    return np.asarray(v, dtype=float) / n


def is_unit(v: np.ndarray, tol: float = _UNIT_TOL) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol


def wrap_angle(a):
    """Wrap angle(s) to [-pi, pi)."""
    return (np.asarray(a, dtype=float) + math.pi) % (2.0 * math.pi) - math.pi


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation matrix for (roll, pitch, yaw): R = Rz(yaw) Ry(pitch) Rx(roll)."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_rpy(R: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rpy_to_matrix`; pitch is reported in [-pi/2, pi/2].

    At the gimbal-lock singularity (|pitch| = pi/2) roll is set to 0 and the
    remaining freedom is folded into yaw.
    """
    sp = -float(R[2, 0])
    sp = max(-1.0, min(1.0, sp))
    pitch = math.asin(sp)
    if abs(sp) < 1.0 - 1e-12:
        roll = math.atan2(R[2, 1], R[2, 2])
        yaw = math.atan2(R[1, 0], R[0, 0])
    else:
        roll = 0.0
        yaw = math.atan2(-R[0, 1] * sp, R[1, 1])
    return np.array([roll, pitch, yaw])


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    ux, uy, uz = unit(axis)
    c, s = math.cos(angle), math.sin(angle)
    K = np.array([[0.0, -uz, uy], [uz, 0.0, -ux], [-uy, ux, 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def rotation_vector(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector (axis * angle) of a rotation matrix."""
    tr = float(np.trace(R))
    cos_a = max(-1.0, min(1.0, (tr - 1.0) / 2.0))
    angle = math.acos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    if angle > math.pi - 1e-6:
        # Near pi the skew part degenerates; recover the axis from R + I.
        A = (R + np.eye(3)) / 2.0
        axis = unit(np.array([math.sqrt(max(A[i, i], 0.0)) for i in range(3)]))
        # Fix signs from the off-diagonal terms.
        if A[0, 1] < 0.0:
            axis[1] = -abs(axis[1])
        if A[0, 2] < 0.0:
            axis[2] = -abs(axis[2])
        return axis * angle
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return w * (angle / (2.0 * math.sin(angle)))


@dataclass(frozen=True, eq=False)
class Pose:
    """Position (mm) plus roll/pitch/yaw orientation, wrapped to [-pi, pi)."""

    position: np.ndarray
    rpy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "rpy", wrap_angle(np.asarray(self.rpy, dtype=float).reshape(3)))
        if not np.all(np.isfinite(self.position)) or not np.all(np.isfinite(self.rpy)):
            raise ValueError("pose components must be finite")

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T: np.ndarray) -> "Pose":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, 3].copy(), matrix_to_rpy(T[:3, :3]))

    @property
    def rotation(self) -> np.ndarray:
        r, p, y = self.rpy
        return rpy_to_matrix(r, p, y)

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.position
        return T

    @property
    def beam_direction(self) -> np.ndarray:
        """Direction the laser travels: the probe frame's -Z axis, in world."""
        return -self.rotation[:, 2]

    def compose(self, other: "Pose") -> "Pose":
        return Pose.from_matrix(self.matrix @ other.matrix)

    def allclose(self, other: "Pose", pos_tol: float = 1e-9, ang_tol: float = 1e-9) -> bool:
        if not np.allclose(self.position, other.position, atol=pos_tol):
            return False
        d = rotation_vector(self.rotation.T @ other.rotation)
        return float(np.linalg.norm(d)) <= ang_tol

    def __repr__(self):  # compact, mm / rad
        p, a = self.position, self.rpy
        return f"Pose(({p[0]:.3f}, {p[1]:.3f}, {p[2]:.3f}), rpy=({a[0]:.5f}, {a[1]:.5f}, {a[2]:.5f}))"


@dataclass(frozen=True, eq=False)
class Capsule:
    """Segment from ``a`` to ``b`` swept by a sphere of ``radius`` mm."""

    a: np.ndarray
    b: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("capsule endpoints must be finite")
        if not self.radius > 0.0:
            raise ValueError("capsule radius must be > 0")

    def transformed(self, T: np.ndarray) -> "Capsule":
        R, t = T[:3, :3], T[:3, 3]
        return Capsule(R @ self.a + t, R @ self.b + t, self.radius)


@dataclass(frozen=True, eq=False)
class Scene:
    """Static geometry: discretized product surface plus fixture capsules."""

    product_points: np.ndarray
    product_normals: np.ndarray
    fixtures: tuple = ()
    clearance_margin: float = 10.0

    def __post_init__(self):
        pts = np.asarray(self.product_points, dtype=float).reshape(-1, 3)
        nrm = np.asarray(self.product_normals, dtype=float).reshape(-1, 3)
        if pts.shape != nrm.shape:
            raise ValueError("product points and normals must have matching shapes")
        if self.clearance_margin < 0.0:
            raise ValueError("clearance_margin must be >= 0")
        object.__setattr__(self, "product_points", pts)
        object.__setattr__(self, "product_normals", nrm)
        object.__setattr__(self, "fixtures", tuple(self.fixtures))

    @classmethod
    def empty(cls, clearance_margin: float = 10.0) -> "Scene":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), (), clearance_margin)


@dataclass(frozen=True)
class OpticalSpec:
    """Probe optics: depth-of-field band, view-angle cone, stripe reach.

    ``theta_max`` is in degrees; all lengths in mm.
    """

    dof_nominal: float = 100.0
    dof_tolerance: float = 25.0
    theta_max: float = 15.0
    stripe_half_length: float = 50.0

    def __post_init__(self):
        if not self.dof_nominal > 0.0:
            raise ValueError("dof_nominal must be > 0")
        if self.dof_tolerance < 0.0:
            raise ValueError("dof_tolerance must be >= 0")
        if not 0.0 < self.theta_max < 90.0:
            raise ValueError("theta_max must be in (0, 90) degrees")
        if not self.stripe_half_length > 0.0:
            raise ValueError("stripe_half_length must be > 0")

    @property
    def depth_band(self) -> tuple:
        return (self.dof_nominal - self.dof_tolerance, self.dof_nominal + self.dof_tolerance)


@dataclass(frozen=True)
class MeasurabilityResult:
    """Verdict of :func:`measurable` with the set of violated reason codes."""

    ok: bool
    reasons: frozenset = field(default_factory=frozenset)

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# distance queries
# ---------------------------------------------------------------------------

def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point (...,3) to segment [a, b]."""
    points = np.asarray(points, dtype=float)
    d = b - a
    dd = float(np.dot(d, d))
    if dd < 1e-18:
        return np.linalg.norm(points - a, axis=-1)
    t = np.clip(((points - a) @ d) / dd, 0.0, 1.0)
    closest = a + t[..., None] * d
    return np.linalg.norm(points - closest, axis=-1)


def segment_segment_distance(p1, q1, p2, q2):
    """Minimum distance between segments [p1,q1] and [p2,q2].

    Broadcasts over leading dimensions; degenerate (zero-length) segments are
    handled.  Closest-point parameters follow Ericson's clamped formulation.
    """
    p1 = np.asarray(p1, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    s, t = _segment_segment_parameters(p1, q1, p2, q2)
    c1 = p1 + s[..., None] * (q1 - p1)
    c2 = p2 + t[..., None] * (q2 - p2)
    return np.linalg.norm(c1 - c2, axis=-1)


def segment_segment_closest_points(p1, q1, p2, q2):
    """Closest points (c1, c2) between two single segments."""
    s, t = _segment_segment_parameters(p1, q1, p2, q2)
    c1 = np.asarray(p1, float) + s * (np.asarray(q1, float) - p1)
    c2 = np.asarray(p2, float) + t * (np.asarray(q2, float) - p2)
    return c1, c2


def _segment_segment_parameters(p1, q1, p2, q2):
    eps = 1e-12
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    denom = a * e - b * b

    a_deg = a <= eps
    e_deg = e <= eps

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > eps, np.clip((b * f - c * e) / np.where(denom > eps, denom, 1.0), 0.0, 1.0), 0.0)
        # Where only segment 2 is a point, minimize along segment 1 directly.
        s = np.where(e_deg & ~a_deg, np.clip(-c / np.where(a_deg, 1.0, a), 0.0, 1.0), s)
        t = np.where(e_deg, 0.0, (b * s + f) / np.where(e_deg, 1.0, e))
        t_cl = np.clip(t, 0.0, 1.0)
        # Re-derive s where t was clamped.
        s_new = np.clip((b * t_cl - c) / np.where(a_deg, 1.0, a), 0.0, 1.0)
        s = np.where((t != t_cl) & ~a_deg, s_new, s)
        s = np.where(a_deg, 0.0, s)
    return s, t_cl


def capsule_capsule_distance(a: Capsule, b: Capsule) -> float:
    """Surface-to-surface distance of two capsules, clamped at 0 on overlap."""
    d = float(segment_segment_distance(a.a, a.b, b.a, b.b))
    return max(0.0, d - a.radius - b.radius)


def capsule_points_clearance(c: Capsule, points: np.ndarray) -> float:
    """Smallest point-to-capsule-surface distance, clamped at 0.

    Raises ValueError for an empty point set.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if points.shape[0] == 0:
        raise ValueError("capsule_points_clearance requires a non-empty point set")
    d = point_segment_distance(points, c.a, c.b)
    return max(0.0, float(np.min(d)) - c.radius)


# ---------------------------------------------------------------------------
# optical constraints
# ---------------------------------------------------------------------------

def view_angle(probe: Pose, mp) -> float:
    """View angle in degrees between the probe's beam and the point's normal.

    Measured between the probe frame's +Z axis (the beam axis pointing back
    from the surface toward the probe) and ``mp.normal``, so a head-on pose
    reads 0 deg.  Range [0, 180].
    """
    normal = np.asarray(mp.normal, dtype=float)
    if not is_unit(normal):
        raise ValueError(f"mp normal must be unit length, got |n| = {np.linalg.norm(normal)!r}")
    back_axis = probe.rotation[:, 2]
    cosang = max(-1.0, min(1.0, float(np.dot(back_axis, normal))))
    return math.degrees(math.acos(cosang))


def beam_axis_offset(probe: Pose, point: np.ndarray) -> float:
    """Radial distance from ``point`` to the infinite beam axis of ``probe``."""
    d = probe.beam_direction
    rel = np.asarray(point, dtype=float) - probe.position
    return float(np.linalg.norm(rel - np.dot(rel, d) * d))


def measurable(probe: Pose, mp, scene: Scene, spec: OpticalSpec) -> MeasurabilityResult:
    """Check the four optical constraints for measuring ``mp`` from ``probe``.

    Passes iff (a) the probe-to-point distance lies in the depth-of-field
    band, (b) the view angle is within ``theta_max``, (c) the point lies
    within ``stripe_half_length`` of the beam axis (stripe center line), and
    (d) the straight beam segment from the probe origin to the point is not
    blocked by product points (within ``scene.clearance_margin``, excluding a
    small ball around the target itself) or by fixture capsules.

    Only the incident beam segment is checked; reflected-beam interference
    is not modeled.
    """
    reasons = set()
    target = np.asarray(mp.position, dtype=float)

    depth = float(np.linalg.norm(target - probe.position))
    lo, hi = spec.depth_band
    if not (lo <= depth <= hi):
        reasons.add(REASON_DEPTH)

    if view_angle(probe, mp) > spec.theta_max:
        reasons.add(REASON_VIEW_ANGLE)

    if beam_axis_offset(probe, target) > spec.stripe_half_length:
        reasons.add(REASON_STRIPE)

    if _beam_occluded(probe.position, target, scene):
        reasons.add(REASON_OCCLUSION)

    return MeasurabilityResult(ok=not reasons, reasons=frozenset(reasons))


def _beam_occluded(origin: np.ndarray, target: np.ndarray, scene: Scene) -> bool:
    pts = scene.product_points
    if pts.shape[0]:
        d = point_segment_distance(pts, origin, target)
        keep = np.linalg.norm(pts - target, axis=1) > MP_EXCLUSION_RADIUS
        if np.any(d[keep] < scene.clearance_margin):
            return True
    for cap in scene.fixtures:
        if float(segment_segment_distance(origin, target, cap.a, cap.b)) < cap.radius:
            return True
    return False
