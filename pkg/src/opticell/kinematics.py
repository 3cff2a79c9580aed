"""Configurable 6R serial-arm model: FK/IK, motion timing, workspace sampling.

Arms are described by standard Denavit-Hartenberg rows (link length ``a``,
twist ``alpha``, offset ``d``, home angle offset ``theta_home``) with per
joint limits and maximum speeds.  The motion-time model is a rectangular
velocity profile: the slowest joint dominates and acceleration is ignored.

Lengths mm, joint angles rad, speeds rad/s, times seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .geom import (
    Capsule,
    OpticalSpec,
    Pose,
    Scene,
    capsule_capsule_distance,
    capsule_points_clearance,
    measurable,
    rotation_about_axis,
    rotation_vector,
    rpy_to_matrix,
    unit,
)


@dataclass(frozen=True)
class Joint:
    """One revolute joint: DH row, limits [q_min, q_max] rad, speed rad/s."""

    a: float
    alpha: float
    d: float
    theta_home: float
    q_min: float
    q_max: float
    max_speed: float

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValueError("joint limits must satisfy q_min < q_max")
        if not self.max_speed > 0.0:
            raise ValueError("joint max_speed must be > 0")


@dataclass(eq=False)
class SerialArm:
    """A 6R arm with link collision capsules and a probe mounted on the flange.

    ``link_capsules[i]`` is expressed in the frame of link ``i+1`` (the frame
    reached after applying joint ``i+1``'s DH transform).  Treat instances as
    immutable values; all operations on them are pure.
    """

    id: str
    base: Pose
    joints: tuple
    link_capsules: tuple
    tool_offset: Pose
    home_q: np.ndarray = None
    capacity: int = 14

    def __post_init__(self):
        self.joints = tuple(self.joints)
        self.link_capsules = tuple(self.link_capsules)
        if len(self.joints) != 6:
            raise ValueError("SerialArm models a fixed 6-joint arm class")
        if len(self.link_capsules) != 6:
            raise ValueError("expected one collision capsule per link")
        if self.home_q is None:
            self.home_q = np.zeros(6)
        self.home_q = np.asarray(self.home_q, dtype=float).reshape(6)
        self._base_T = self.base.matrix
        self._tool_T = self.tool_offset.matrix
        self._cap_pts = np.array([[c.a, c.b] for c in self.link_capsules])  # (6,2,3)
        self._cap_radii = np.array([c.radius for c in self.link_capsules])

    @property
    def q_min(self) -> np.ndarray:
        return np.array([j.q_min for j in self.joints])

    @property
    def q_max(self) -> np.ndarray:
        return np.array([j.q_max for j in self.joints])

    @property
    def max_speeds(self) -> np.ndarray:
        return np.array([j.max_speed for j in self.joints])

    def within_limits(self, q: np.ndarray, tol: float = 1e-9) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.q_min - tol) and np.all(q <= self.q_max + tol))

    def reach_bound(self) -> float:
        """Upper bound on probe distance from the base origin."""
        r = 0.0
        for j in self.joints:
            r += abs(j.a) + abs(j.d)
        r += float(np.linalg.norm(self.tool_offset.position))
        return r

    def lever_arms(self) -> np.ndarray:
        """Per joint: upper bound on the distance of any downstream link point
        from that joint's axis.  Drives sound swept-volume sampling steps."""
        extra = float(np.linalg.norm(self.tool_offset.position)) + float(np.max(self._cap_radii))
        levers = np.empty(6)
        lever = 0.0
        for i in range(5, -1, -1):
            j = self.joints[i]
            lever += abs(j.a) + abs(j.d)
            levers[i] = lever + extra
        return levers

    def displacement_bound(self, dq: np.ndarray) -> float:
        """Upper bound (mm) on how far any link point moves for a joint step."""
        return float(np.sum(np.abs(np.asarray(dq, dtype=float)) * self.lever_arms()))

    def tip_speed_bound(self) -> float:
        """Conservative bound on any link point's speed, mm/s.

        Sums each joint's max speed times the longest lever arm downstream of
        it; used to derive sound sampling steps for swept-volume checks.
        """
        return float(np.sum(self.max_speeds * self.lever_arms()))


def _dh_matrix(joint: Joint, q: float) -> np.ndarray:
    th = q + joint.theta_home
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(joint.alpha), math.sin(joint.alpha)
    A = np.zeros((4, 4))
    A[0, 0] = ct
    A[0, 1] = -st * ca
    A[0, 2] = st * sa
    A[0, 3] = joint.a * ct
    A[1, 0] = st
    A[1, 1] = ct * ca
    A[1, 2] = -ct * sa
    A[1, 3] = joint.a * st
    A[2, 1] = sa
    A[2, 2] = ca
    A[2, 3] = joint.d
    A[3, 3] = 1.0
    return A


def _chain_transforms(arm: SerialArm, q: np.ndarray):
    """World transforms of every link frame plus the probe frame."""
    Ts = []
    T = arm._base_T
    for joint, qi in zip(arm.joints, q):
        T = T @ _dh_matrix(joint, float(qi))
        Ts.append(T)
    return Ts, Ts[-1] @ arm._tool_T


def forward_kinematics(arm: SerialArm, q: np.ndarray):
    """Probe pose and world-frame link capsules at configuration ``q``.

    Raises ValueError when ``q`` violates joint limits.
    """
    q = np.asarray(q, dtype=float).reshape(6)
    if not arm.within_limits(q):
        raise ValueError(f"joint vector outside limits for arm {arm.id}: {q}")
    Ts, probe_T = _chain_transforms(arm, q)
    capsules = [cap.transformed(T) for cap, T in zip(arm.link_capsules, Ts)]
    return Pose.from_matrix(probe_T), capsules


def fk_probe_matrix(arm: SerialArm, q: np.ndarray) -> np.ndarray:
    """Probe frame as a 4x4 matrix (no limit check; internal fast path)."""
    _, probe_T = _chain_transforms(arm, np.asarray(q, dtype=float))
    return probe_T


def fk_batch(arm: SerialArm, Q: np.ndarray):
    """Vectorized FK over configurations ``Q`` (N,6).

    Returns (probe_T (N,4,4), cap_pts (N,6,2,3), cap_radii (6,)).
    """
    Q = np.asarray(Q, dtype=float).reshape(-1, 6)
    n = Q.shape[0]
    T = np.broadcast_to(arm._base_T, (n, 4, 4)).copy()
    cap_pts = np.empty((n, 6, 2, 3))
    for i, joint in enumerate(arm.joints):
        th = Q[:, i] + joint.theta_home
        ct, st = np.cos(th), np.sin(th)
        ca, sa = math.cos(joint.alpha), math.sin(joint.alpha)
        A = np.zeros((n, 4, 4))
        A[:, 0, 0] = ct
        A[:, 0, 1] = -st * ca
        A[:, 0, 2] = st * sa
        A[:, 0, 3] = joint.a * ct
        A[:, 1, 0] = st
        A[:, 1, 1] = ct * ca
        A[:, 1, 2] = -ct * sa
        A[:, 1, 3] = joint.a * st
        A[:, 2, 1] = sa
        A[:, 2, 2] = ca
        A[:, 2, 3] = joint.d
        A[:, 3, 3] = 1.0
        T = T @ A
        ends = arm._cap_pts[i]  # (2,3)
        cap_pts[:, i] = np.einsum("nij,kj->nki", T[:, :3, :3], ends) + T[:, None, :3, 3]
    probe_T = T @ arm._tool_T
    return probe_T, cap_pts, arm._cap_radii


def world_capsule_arrays(arm: SerialArm, q: np.ndarray):
    """Link capsules at ``q`` as raw arrays (pts (6,2,3), radii (6,))."""
    _, cap_pts, radii = fk_batch(arm, np.asarray(q, dtype=float).reshape(1, 6))
    return cap_pts[0], radii


def jacobian(arm: SerialArm, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian of the probe frame (rows: velocity mm/s, rad/s)."""
    q = np.asarray(q, dtype=float).reshape(6)
    Ts, probe_T = _chain_transforms(arm, q)
    p_e = probe_T[:3, 3]
    J = np.zeros((6, 6))
    prev = arm._base_T
    for i in range(6):
        z = prev[:3, 2]
        p = prev[:3, 3]
        J[:3, i] = np.cross(z, p_e - p)
        J[3:, i] = z
        prev = Ts[i]
    return J


def motion_time(arm: SerialArm, q_from: np.ndarray, q_to: np.ndarray) -> float:
    """Leg duration under the rectangular profile: max_j |dq_j| / speed_j."""
    q_from = np.asarray(q_from, dtype=float).reshape(6)
    q_to = np.asarray(q_to, dtype=float).reshape(6)
    if not arm.within_limits(q_from) or not arm.within_limits(q_to):
        raise ValueError("motion_time endpoints must be within joint limits")
    return float(np.max(np.abs(q_to - q_from) / arm.max_speeds))


def motion_time_matrix(arm: SerialArm, configs: np.ndarray) -> np.ndarray:
    """Pairwise motion times for a stack of configurations (K,6)."""
    configs = np.asarray(configs, dtype=float)
    diff = np.abs(configs[:, None, :] - configs[None, :, :]) / arm.max_speeds
    return diff.max(axis=2)


# ---------------------------------------------------------------------------
# inverse kinematics
# ---------------------------------------------------------------------------

IK_POS_TOL = 0.1      # mm
IK_ROT_TOL = math.radians(0.2)
_IK_ROT_SCALE = 250.0  # mm per rad, balances the mixed-unit error vector
_IK_RNG_SEED = 0x5EED  # fixed so restart perturbations are reproducible


def inverse_kinematics(
    arm: SerialArm,
    target: Pose,
    seed: np.ndarray = None,
    *,
    pos_tol: float = IK_POS_TOL,
    rot_tol: float = IK_ROT_TOL,
    max_iters: int = 200,
    damping: float = 1e-3,
    restarts: int = 16,
    max_kicks: int = None,
):
    """Damped least-squares IK.  Returns a joint vector or None if unreachable.

    Starts from ``seed`` (home configuration when omitted) and, on failure,
    retries from up to ``restarts`` perturbed/random seeds.  A success is
    guaranteed to satisfy the FK round-trip tolerances and joint limits.
    """
    target_p = target.position
    target_R = target.rotation
    if float(np.linalg.norm(target_p - arm.base.position)) > arm.reach_bound() + 1.0:
        return None
    if seed is None:
        seed = arm.home_q
    seed = np.clip(np.asarray(seed, dtype=float).reshape(6), arm.q_min, arm.q_max)
    rng = np.random.default_rng(_IK_RNG_SEED)
    span = arm.q_max - arm.q_min

    starts = [seed]
    starts.extend(_warm_start_seeds(arm, target_p, target_R))
    for attempt in range(restarts + 1):
        if attempt < len(starts):
            q0 = starts[attempt]
        elif attempt % 2 == 1:
            sigma = 0.2 + 0.1 * attempt
            q0 = np.clip(seed + rng.normal(0.0, sigma, 6), arm.q_min, arm.q_max)
        else:
            q0 = arm.q_min + rng.random(6) * span
        q = _dls_solve(arm, q0, target_p, target_R, pos_tol, rot_tol, max_iters, damping, rng)
        if q is not None:
            return q
    return None


_SEED_CLOUD_N = 4096
_SEED_CLOUD_SEED = 0xA11


def _warm_start_seeds(arm: SerialArm, target_p, target_R, k: int = 4):
    """Joint vectors of cached workspace samples near the target pose.

    The per-arm sample is derived data with a fixed seed, so memoizing it on
    the instance keeps every call deterministic.
    """
    cloud = getattr(arm, "_ik_seed_cloud", None)
    if cloud is None:
        cloud = sample_workspace(arm, _SEED_CLOUD_N, _SEED_CLOUD_SEED)
        arm._ik_seed_cloud = cloud
    _, idx = cloud._kdtree.query(target_p, k=min(16, cloud.sample_count))
    idx = np.atleast_1d(idx)
    # Rank the positional neighbours by orientation agreement.
    scored = []
    for i in idx:
        R = rpy_to_matrix(*cloud.rpys[i])
        ang = float(np.linalg.norm(rotation_vector(target_R @ R.T)))
        scored.append((ang, int(i)))
    scored.sort()
    return [cloud.joints[i] for _, i in scored[:k]]


def _ik_state(arm, q, target_p, target_R):
    Ts, probe_T = _chain_transforms(arm, q)
    e_pos = target_p - probe_T[:3, 3]
    e_rot = rotation_vector(target_R @ probe_T[:3, :3].T)
    err = math.hypot(float(np.linalg.norm(e_pos)), float(np.linalg.norm(e_rot)) * _IK_ROT_SCALE)
    return Ts, probe_T, e_pos, e_rot, err


def _jacobian_from_chain(arm, Ts, probe_T):
    p_e = probe_T[:3, 3]
    J = np.empty((6, 6))
    prev = arm._base_T
    for i in range(6):
        zx, zy, zz = prev[0, 2], prev[1, 2], prev[2, 2]
        rx = p_e[0] - prev[0, 3]
        ry = p_e[1] - prev[1, 3]
        rz = p_e[2] - prev[2, 3]
        J[0, i] = zy * rz - zz * ry
        J[1, i] = zz * rx - zx * rz
        J[2, i] = zx * ry - zy * rx
        J[3, i] = zx
        J[4, i] = zy
        J[5, i] = zz
        prev = Ts[i]
    return J


def _dls_solve(arm, q0, target_p, target_R, pos_tol, rot_tol, max_iters, damping, rng=None):
    # Damped least squares with adaptive damping: failed steps raise the
    # damping factor instead of advancing, which keeps the solve stable
    # through singular configurations.  When the descent stalls in a local
    # minimum, a random joint-space kick restarts it within the same budget.
    q = q0.copy()
    lam = max(damping, 1e-6)
    Ts, probe_T, e_pos, e_rot, err = _ik_state(arm, q, target_p, target_R)
    span = arm.q_max - arm.q_min
    eye6 = np.eye(6)
    for _ in range(max_iters):
        if float(np.linalg.norm(e_pos)) <= pos_tol and float(np.linalg.norm(e_rot)) <= rot_tol:
            return np.clip(q, arm.q_min, arm.q_max)
        J = _jacobian_from_chain(arm, Ts, probe_T)
        J = np.vstack([J[:3], J[3:] * _IK_ROT_SCALE])
        e = np.concatenate([e_pos, e_rot * _IK_ROT_SCALE])
        JtJ = J.T @ J
        Jte = J.T @ e
        accepted = False
        for _retry in range(6):
            try:
                dq = np.linalg.solve(JtJ + lam * lam * eye6, Jte)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            step = float(np.max(np.abs(dq)))
            if step > 0.6:
                dq *= 0.6 / step
            q_new = np.clip(q + dq, arm.q_min, arm.q_max)
            trial = _ik_state(arm, q_new, target_p, target_R)
            if trial[4] < err:
                q = q_new
                Ts, probe_T, e_pos, e_rot, err = trial
                lam = max(lam * 0.5, 1e-6)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            if rng is None:
                return None
            q = np.clip(q + rng.normal(0.0, 0.15, 6) * span, arm.q_min, arm.q_max)
            Ts, probe_T, e_pos, e_rot, err = _ik_state(arm, q, target_p, target_R)
            lam = max(damping, 1e-6)
    if float(np.linalg.norm(e_pos)) <= pos_tol and float(np.linalg.norm(e_rot)) <= rot_tol:
        return np.clip(q, arm.q_min, arm.q_max)
    return None


def ik_error(arm: SerialArm, q: np.ndarray, target: Pose):
    """FK round-trip errors (position mm, orientation rad) for a solution."""
    _, probe_T = _chain_transforms(arm, np.asarray(q, dtype=float))
    e_pos = float(np.linalg.norm(target.position - probe_T[:3, 3]))
    e_rot = float(np.linalg.norm(rotation_vector(target.rotation @ probe_T[:3, :3].T)))
    return e_pos, e_rot


# ---------------------------------------------------------------------------
# workspace sampling
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ReachabilityCloud:
    """Monte Carlo sample of reachable probe poses with generating joints."""

    joints: np.ndarray     # (n,6)
    positions: np.ndarray  # (n,3)
    rpys: np.ndarray       # (n,3)
    seed: int

    @property
    def sample_count(self) -> int:
        return self.joints.shape[0]

    @cached_property
    def _kdtree(self):
        return cKDTree(self.positions)

    @cached_property
    def _hull_equations(self):
        if self.positions.shape[0] < 8:
            return None
        try:
            return ConvexHull(self.positions).equations
        except Exception:
            return None

    def contains(self, point: np.ndarray, inflate: float = 100.0) -> bool:
        """True when ``point`` lies in the convex support inflated by ``inflate`` mm."""
        eq = self._hull_equations
        if eq is None:
            d, _ = self._kdtree.query(np.asarray(point, dtype=float))
            return bool(d <= inflate)
        v = eq[:, :3] @ np.asarray(point, dtype=float) + eq[:, 3]
        return bool(np.max(v) <= inflate)

    def nearest_joints(self, point: np.ndarray, k: int = 3) -> np.ndarray:
        """Joint vectors of the k samples closest in probe position."""
        k = min(k, self.sample_count)
        _, idx = self._kdtree.query(np.asarray(point, dtype=float), k=k)
        idx = np.atleast_1d(idx)
        return self.joints[idx]


def sample_workspace(arm: SerialArm, n: int, seed: int = 0) -> ReachabilityCloud:
    """Uniform Monte Carlo sample of ``n`` in-limit configurations, via FK.

    Deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    Q = arm.q_min + rng.random((n, 6)) * (arm.q_max - arm.q_min)
    probe_T, _, _ = fk_batch(arm, Q)
    positions = probe_T[:, :3, 3].copy()
    sy = np.clip(-probe_T[:, 2, 0], -1.0, 1.0)
    pitch = np.arcsin(sy)
    roll = np.arctan2(probe_T[:, 2, 1], probe_T[:, 2, 2])
    yaw = np.arctan2(probe_T[:, 1, 0], probe_T[:, 0, 0])
    return ReachabilityCloud(Q, positions, np.stack([roll, pitch, yaw], axis=1), seed)


# ---------------------------------------------------------------------------
# feasible probe poses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoseGrid:
    """Discretization of the acceptable probe space around a target normal.

    View-angle tilts run in ``view_step_deg`` increments out to theta_max
    along two orthogonal cone axes; beam roll in ``roll_step_deg`` steps;
    depths are offsets from the nominal depth (defaults to -tol/0/+tol).
    """

    view_step_deg: float = 5.0
    roll_step_deg: float = 30.0
    depth_offsets: tuple = None
    ik_restarts: int = 2
    ik_max_iters: int = 80

    def depths(self, spec: OpticalSpec) -> tuple:
        if self.depth_offsets is not None:
            return tuple(spec.dof_nominal + o for o in self.depth_offsets)
        if spec.dof_tolerance > 0.0:
            # Nominal first: preferred when several depths are feasible.
            return (spec.dof_nominal, spec.dof_nominal - spec.dof_tolerance,
                    spec.dof_nominal + spec.dof_tolerance)
        return (spec.dof_nominal,)


def candidate_probe_poses(mp, spec: OpticalSpec, grid: PoseGrid):
    """Unfiltered candidate poses on the discretized cone, sorted by |view angle|.

    Yields (view_angle_deg, Pose) in deterministic order.
    """
    normal = unit(np.asarray(mp.normal, dtype=float))
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(ref, normal))) > 0.99:
        ref = np.array([1.0, 0.0, 0.0])
    e1 = unit(np.cross(normal, ref))
    e2 = np.cross(normal, e1)
    if grid.view_step_deg <= 0.0 or grid.roll_step_deg <= 0.0:
        raise ValueError("pose grid steps must be positive")

    tilts = [0.0]
    t = grid.view_step_deg
    while t <= spec.theta_max + 1e-9:
        tilts.append(t)
        t += grid.view_step_deg
    rolls = np.deg2rad(np.arange(0.0, 360.0, grid.roll_step_deg))
    depths = grid.depths(spec)
    target = np.asarray(mp.position, dtype=float)

    out = []
    for tilt in tilts:
        if tilt == 0.0:
            dirs = [normal]
        else:
            rad = math.radians(tilt)
            dirs = [rotation_about_axis(axis, sgn * rad) @ normal
                    for axis in (e1, e2) for sgn in (1.0, -1.0)]
        for z_axis in dirs:
            x0 = e1 - np.dot(e1, z_axis) * z_axis
            if np.linalg.norm(x0) < 1e-9:
                x0 = e2 - np.dot(e2, z_axis) * z_axis
            x0 = unit(x0)
            y0 = np.cross(z_axis, x0)
            R0 = np.column_stack([x0, y0, z_axis])
            for roll in rolls:
                c, s = math.cos(roll), math.sin(roll)
                Rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
                R = R0 @ Rz
                for depth in depths:
                    T = np.eye(4)
                    T[:3, :3] = R
                    T[:3, 3] = target + depth * z_axis
                    out.append((tilt, Pose.from_matrix(T)))
    return out


def static_clearance(arm: SerialArm, q: np.ndarray, scene: Scene) -> float:
    """Smallest clearance of the arm's world link capsules to the scene."""
    cap_pts, radii = world_capsule_arrays(arm, q)
    best = math.inf
    pts = scene.product_points
    for i in range(cap_pts.shape[0]):
        cap = Capsule(cap_pts[i, 0], cap_pts[i, 1], float(radii[i]))
        if pts.shape[0]:
            best = min(best, capsule_points_clearance(cap, pts))
        for fix in scene.fixtures:
            best = min(best, capsule_capsule_distance(cap, fix))
        if best == 0.0:
            return 0.0
    return best if best != math.inf else math.inf


# Static poses (and swept-path samples, see pathplan) must clear the scene
# by margin * this factor; the extra headroom makes the sampled swept-volume
# guarantee hold continuously.
PLANNING_PAD = 1.25


def feasible_probe_poses(
    arm: SerialArm,
    mp,
    scene: Scene,
    spec: OpticalSpec,
    grid: PoseGrid = PoseGrid(),
    *,
    cloud: ReachabilityCloud = None,
    max_poses: int = None,
    ik_fail_limit: int = 24,
):
    """Probe poses from which ``arm`` can measure ``mp``.

    Enumerates the candidate grid in ascending |view angle| order and keeps
    candidates that (1) satisfy :func:`opticell.geom.measurable` and (2) have
    an IK solution whose world link capsules clear the scene by at least
    ``scene.clearance_margin * PLANNING_PAD`` (the pad is planning
    headroom: swept-path validation needs endpoint clearance above the plain
    margin).  Returns a list of (Pose, joint_vector); an empty list means the
    point is unreachable for this arm.

    ``cloud`` enables two reachability pre-filters (whole-point and
    per-candidate convex-support tests) and seeds IK from the nearest
    workspace samples.  ``max_poses`` stops the scan early once that many
    feasible poses were found; ``ik_fail_limit`` abandons the scan after
    that many consecutive IK failures (pass None to force the full scan,
    e.g. when comparing against a brute-force enumeration).
    """
    target = np.asarray(mp.position, dtype=float)
    head_on = target + spec.dof_nominal * np.asarray(mp.normal, float)
    if cloud is not None and not cloud.contains(head_on) and not cloud.contains(target):
        return []

    seeds = [arm.home_q]
    if cloud is not None:
        seeds = list(cloud.nearest_joints(head_on, k=3)) + seeds

    results = []
    last_q = None
    fails = 0
    for _, pose in candidate_probe_poses(mp, spec, grid):
        if cloud is not None and not cloud.contains(pose.position):
            continue
        if not measurable(pose, mp, scene, spec):
            continue
        trial_seeds = ([last_q] if last_q is not None else []) + seeds
        q = None
        for s in trial_seeds:
            q = inverse_kinematics(arm, pose, s, max_iters=grid.ik_max_iters,
                                   restarts=grid.ik_restarts)
            if q is not None:
                break
        if q is None:
            fails += 1
            if ik_fail_limit is not None and fails >= ik_fail_limit:
                break
            continue
        fails = 0
        last_q = q
        if static_clearance(arm, q, scene) < scene.clearance_margin * PLANNING_PAD:
            continue
        results.append((pose, q))
        if max_poses is not None and len(results) >= max_poses:
            break
    return results


# ---------------------------------------------------------------------------
# example arm
# ---------------------------------------------------------------------------

def example_arm(arm_id: str = "R1", base: Pose = None, capacity: int = 14) -> SerialArm:
    """A generic 2 m-reach 6R arm with documented DH rows and link capsules.

    Stands in for the unpublished kinematics of typical large industrial
    inspection robots; speeds are in the 100-230 deg/s range.
    """
    if base is None:
        base = Pose.identity()
    rows = [
        # a,     alpha,        d,     theta_home
        (150.0, -math.pi / 2, 450.0, 0.0),
        (700.0, 0.0, 0.0, -math.pi / 2),
        (150.0, -math.pi / 2, 0.0, 0.0),
        (0.0, math.pi / 2, 720.0, 0.0),
        (0.0, -math.pi / 2, 0.0, 0.0),
        (0.0, 0.0, 110.0, 0.0),
    ]
    limits = [
        (-2.96, 2.96, math.radians(130.0)),
        (-1.75, 2.53, math.radians(115.0)),
        (-2.44, 2.44, math.radians(125.0)),
        (-3.31, 3.31, math.radians(180.0)),
        (-2.18, 2.18, math.radians(180.0)),
        (-6.28, 6.28, math.radians(230.0)),
    ]
    joints = tuple(
        Joint(a, alpha, d, th, lo, hi, sp)
        for (a, alpha, d, th), (lo, hi, sp) in zip(rows, limits)
    )
    radii = [110.0, 90.0, 80.0, 70.0, 55.0, 40.0]
    capsules = []
    for i, joint in enumerate(joints):
        A_inv = np.linalg.inv(_dh_matrix(joint, 0.0))
        prev_origin = A_inv[:3, 3]
        tip = np.zeros(3)
        if i == 5:
            # Last link capsule also covers the mounted probe body.
            tip = np.array([0.0, 0.0, 60.0])
        capsules.append(Capsule(prev_origin, tip, radii[i]))
    # The probe sits 120 mm past the flange and looks onward along the
    # flange +Z axis; the roll-pi flip makes its -Z beam point away from
    # the arm (beam along -Z is the package-wide probe convention).
    tool = Pose(np.array([0.0, 0.0, 120.0]), np.array([math.pi, 0.0, 0.0]))
    home = np.array([0.0, math.radians(-30.0), math.radians(15.0), 0.0,
                     math.radians(25.0), 0.0])
    return SerialArm(arm_id, base, joints, tuple(capsules), tool, home, capacity)
