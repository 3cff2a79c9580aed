"""Single-robot planning: collision-free local paths, tour sequencing, timing.

Local paths interpolate straight in joint space and, when the sampled swept
volume hits the scene, insert avoidance waypoints by retreating the probe
along its beam axis.  Visit orders come from simulated annealing over the
joint-space motion-time metric.  The result is a time-parameterized
trajectory (piecewise-linear joints between timestamped waypoints) with a
dwell interval at every measurement point.

Clearance soundness: sampling steps are chosen so no link point moves more
than half the clearance margin between samples, and samples must clear the
scene by ``margin * PLANNING_PAD``.  Together these guarantee the continuous
swept volume clears the scene by at least the margin, so any finer re-check
at the plain margin passes.  Static pose filters elsewhere (feasible probe
poses, home configurations) apply the same padded threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geom import Pose, Scene, point_segment_distance, segment_segment_distance
from .kinematics import (
    PLANNING_PAD,
    SerialArm,
    fk_batch,
    fk_probe_matrix,
    inverse_kinematics,
    motion_time,
    motion_time_matrix,
    world_capsule_arrays,
)
from .geom import Capsule

BASE = "BASE"

DEFAULT_RETREAT = 150.0  # mm, probe back-off along its beam axis
MAX_RETREATS = 3


class PathPlanningError(RuntimeError):
    """A leg could not be planned; carries the failing endpoints."""

    def __init__(self, robot_id, from_id, to_id):
        self.robot_id = robot_id
        self.leg = (from_id, to_id)
        super().__init__(f"robot {robot_id}: no collision-free path {from_id} -> {to_id}")


@dataclass(frozen=True, eq=False)
class PlannedTask:
    """A measurement point with its chosen probe pose and IK solution."""

    mp: object
    pose: Pose
    q: np.ndarray


@dataclass(frozen=True, eq=False)
class LocalPath:
    """Joint-space path between two stops (or a stop and the base)."""

    from_id: str
    to_id: str
    waypoints: np.ndarray          # (k, 6); k == 1 for a zero-length path
    duration: float                # seconds, sum of per-pair motion times
    avoidance_points_inserted: int = 0
    modified: bool = False         # set when coordination replanned this leg


@dataclass(frozen=True, eq=False)
class Segment:
    path: LocalPath
    dwell: float = 0.0


@dataclass(frozen=True, eq=False)
class Stop:
    mp: object
    pose: Pose
    q: np.ndarray
    t_arrive: float
    t_depart: float


@dataclass(eq=False)
class TimedTrajectory:
    """Per-robot schedule: waypoints with timestamps plus stop metadata.

    ``times``/``joints`` define the piecewise-linear joint motion;
    ``segments`` keep the per-leg decomposition (leg, dwell at destination);
    ``holds`` records coordination-inserted idle intervals (t, duration,
    kind).  ``total_time`` always equals ``times[-1]``.
    """

    robot_id: str
    segments: tuple
    stops: tuple
    times: np.ndarray
    joints: np.ndarray
    total_time: float
    speed_bound: float             # mm/s bound on any link point, conservative
    holds: tuple = ()
    _sample_cache: dict = field(default_factory=dict, repr=False)

    @property
    def visit_order(self):
        return tuple(stop.mp.id for stop in self.stops)

    def motion_decomposition(self):
        """(home->first, inter-MP legs, last->home, dwell total) in seconds."""
        legs = [seg.path.duration for seg in self.segments]
        dwell = sum(seg.dwell for seg in self.segments)
        if not legs:
            return 0.0, [], 0.0, 0.0
        return legs[0], legs[1:-1], legs[-1], dwell


def joints_at(traj: TimedTrajectory, t):
    """Joint vector(s) at time(s) ``t``; clamps to the final (home) waypoint."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("trajectory time must be >= 0")
    out = np.empty(t.shape + (6,))
    for j in range(6):
        out[..., j] = np.interp(t, traj.times, traj.joints[:, j])
    return out


def pose_at(traj: TimedTrajectory, t: float, arm: SerialArm):
    """Joint vector and world link capsules at time ``t``."""
    q = joints_at(traj, float(t))
    cap_pts, radii = world_capsule_arrays(arm, q)
    caps = [Capsule(cap_pts[i, 0], cap_pts[i, 1], float(radii[i])) for i in range(cap_pts.shape[0])]
    return q, caps


def sampled_capsules(traj: TimedTrajectory, arm: SerialArm, times: np.ndarray):
    """World link capsule endpoints over ``times``: (N, L, 2, 3) plus radii.

    Results are memoized per (start, step, count) so repeated conflict scans
    against an unchanged trajectory are cheap.
    """
    times = np.asarray(times, dtype=float)
    key = (round(float(times[0]), 9), round(float(times[-1]), 9), len(times))
    hit = traj._sample_cache.get(key)
    if hit is not None:
        return hit
    Q = joints_at(traj, times)
    _, cap_pts, radii = fk_batch(arm, Q)
    traj._sample_cache[key] = (cap_pts, radii)
    return cap_pts, radii


def probe_trace(traj: TimedTrajectory, arm: SerialArm, dt: float = 0.1) -> np.ndarray:
    """Probe-tip positions sampled every ``dt`` seconds (always includes T)."""
    if traj.total_time <= 0.0:
        times = np.array([0.0])
    else:
        times = np.arange(0.0, traj.total_time, dt)
        if times[-1] < traj.total_time:
            times = np.append(times, traj.total_time)
    probe_T, _, _ = fk_batch(arm, joints_at(traj, times))
    return probe_T[:, :3, 3]


# ---------------------------------------------------------------------------
# local path planning
# ---------------------------------------------------------------------------

def _leg_samples(arm: SerialArm, q_a, q_b, margin: float):
    dq = q_b - q_a
    disp = arm.displacement_bound(dq)
    steps = max(1, int(math.ceil(disp / (margin / 2.0))))
    s = np.linspace(0.0, 1.0, steps + 1)
    return q_a[None, :] + s[:, None] * dq[None, :]


def _clearances(arm: SerialArm, Q: np.ndarray, scene: Scene) -> np.ndarray:
    """Min scene clearance per sampled configuration (vectorized)."""
    _, cap_pts, radii = fk_batch(arm, Q)
    n = Q.shape[0]
    best = np.full(n, np.inf)
    pts = scene.product_points
    for l in range(cap_pts.shape[1]):
        a = cap_pts[:, l, 0]
        b = cap_pts[:, l, 1]
        if pts.shape[0]:
            d = b - a                                   # (n,3)
            dd = np.einsum("ij,ij->i", d, d)
            rel = pts[None, :, :] - a[:, None, :]        # (n,P,3)
            t = np.einsum("npk,nk->np", rel, d) / np.maximum(dd, 1e-18)[:, None]
            t = np.clip(t, 0.0, 1.0)
            closest = a[:, None, :] + t[..., None] * d[:, None, :]
            dist = np.linalg.norm(pts[None, :, :] - closest, axis=2).min(axis=1)
            best = np.minimum(best, dist - radii[l])
        for fix in scene.fixtures:
            dist = segment_segment_distance(a, b, np.broadcast_to(fix.a, a.shape),
                                            np.broadcast_to(fix.b, b.shape))
            best = np.minimum(best, dist - radii[l] - fix.radius)
    return best


def _plan_segment(arm, q_a, q_b, scene, margin, retreat, depth):
    required = margin * PLANNING_PAD
    Q = _leg_samples(arm, q_a, q_b, margin)
    clear = _clearances(arm, Q, scene)
    bad = np.flatnonzero(clear < required)
    if bad.size == 0:
        return [q_a, q_b], 0
    if depth <= 0:
        return None, 0
    q_c = Q[int(bad[0])]
    probe_T = fk_probe_matrix(arm, q_c)
    q_r = None
    for mult in (1.0, 2.0, 3.0):
        target = Pose.from_matrix(probe_T)
        target = Pose(probe_T[:3, 3] + mult * retreat * probe_T[:3, 2], target.rpy)
        cand = inverse_kinematics(arm, target, q_c, max_iters=120, restarts=4)
        if cand is None:
            continue
        if float(np.min(_clearances(arm, cand[None, :], scene))) >= required:
            q_r = cand
            break
    if q_r is None:
        return None, 0
    left, nl = _plan_segment(arm, q_a, q_r, scene, margin, retreat, depth - 1)
    if left is None:
        return None, 0
    right, nr = _plan_segment(arm, q_r, q_b, scene, margin, retreat, depth - 1)
    if right is None:
        return None, 0
    return left + right[1:], nl + nr + 1


def plan_local_path(arm: SerialArm, q_a, q_b, scene: Scene, *,
                    retreat: float = DEFAULT_RETREAT,
                    max_retreats: int = MAX_RETREATS,
                    from_id: str = BASE, to_id: str = BASE):
    """Collision-free joint path from ``q_a`` to ``q_b``, or None.

    Tries the straight joint-space interpolation first; on a detected
    swept-volume collision, inserts an avoidance waypoint by retreating the
    probe along its beam axis at the colliding parameter (growing multiples
    of ``retreat`` until the waypoint itself is clear), recursing up to
    ``max_retreats`` levels per side.
    """
    q_a = np.asarray(q_a, dtype=float).reshape(6)
    q_b = np.asarray(q_b, dtype=float).reshape(6)
    if np.array_equal(q_a, q_b):
        return LocalPath(from_id, to_id, q_a[None, :].copy(), 0.0, 0)
    waypoints, inserted = _plan_segment(arm, q_a, q_b, scene,
                                        scene.clearance_margin, retreat, max_retreats)
    if waypoints is None:
        return None
    wp = np.array(waypoints)
    duration = sum(motion_time(arm, wp[i], wp[i + 1]) for i in range(len(wp) - 1))
    return LocalPath(from_id, to_id, wp, float(duration), inserted)


# ---------------------------------------------------------------------------
# sequencing (simulated annealing on the motion-time metric)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnealParams:
    alpha: float = 0.97
    iters_per_temp: int = 200
    stop_fraction: float = 1e-3   # stop when T < stop_fraction * T0


def sequence_tasks(arm: SerialArm, tasks, *, seed: int = 0,
                   params: AnnealParams = AnnealParams(), home_q=None):
    """Visit order minimizing the estimated closed-tour motion time.

    Runs simulated annealing (2-opt reversals and single-task relocations,
    geometric cooling) from a nearest-neighbour start and polishes the best
    order with a final 2-opt descent, so the result is never worse than the
    nearest-neighbour tour.
    """
    tasks = list(tasks)
    n = len(tasks)
    if n <= 1:
        return tasks
    home = arm.home_q if home_q is None else np.asarray(home_q, dtype=float)
    configs = np.vstack([home[None, :]] + [t.q[None, :] for t in tasks])
    M = motion_time_matrix(arm, configs)  # index 0 is home

    def cost(order):
        idx = np.asarray(order) + 1
        c = M[0, idx[0]] + M[idx[-1], 0]
        c += float(np.sum(M[idx[:-1], idx[1:]]))
        return c

    # Nearest-neighbour start from home.
    remaining = list(range(n))
    cur = 0
    order = []
    while remaining:
        nxt = min(remaining, key=lambda k: M[cur, k + 1])
        order.append(nxt)
        remaining.remove(nxt)
        cur = nxt + 1
    best = list(order)
    best_cost = cost(best)

    rng = np.random.default_rng(seed)
    cur_order = list(best)
    cur_cost = best_cost

    # Initial temperature: average |delta| of random candidate moves.
    deltas = []
    for _ in range(max(10, 2 * n)):
        cand = _random_neighbour(cur_order, rng)
        deltas.append(abs(cost(cand) - cur_cost))
    t0 = float(np.mean(deltas))
    if t0 > 0.0:
        T = t0
        while T >= params.stop_fraction * t0:
            for _ in range(params.iters_per_temp):
                cand = _random_neighbour(cur_order, rng)
                c = cost(cand)
                d = c - cur_cost
                if d < 0.0 or rng.random() < math.exp(-d / T):
                    cur_order, cur_cost = cand, c
                    if c < best_cost:
                        best, best_cost = list(cand), c
            T *= params.alpha

    best = _descend_order(best, cost)
    return [tasks[i] for i in best]


def _random_neighbour(order, rng):
    n = len(order)
    cand = list(order)
    if n >= 2 and rng.random() < 0.5:
        i, k = sorted(rng.choice(n, size=2, replace=False))
        cand[i:k + 1] = cand[i:k + 1][::-1]
    else:
        i = int(rng.integers(n))
        task = cand.pop(i)
        j = int(rng.integers(n))
        cand.insert(j, task)
    return cand


def _descend_order(order, cost):
    n = len(order)
    best_cost = cost(order)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for k in range(i + 1, n):
                cand = order[:i] + order[i:k + 1][::-1] + order[k + 1:]
                c = cost(cand)
                if c < best_cost - 1e-12:
                    order, best_cost = cand, c
                    improved = True
    return order


# ---------------------------------------------------------------------------
# trajectory assembly
# ---------------------------------------------------------------------------

def build_trajectory(arm: SerialArm, planned_tasks, scene: Scene, *,
                     home_q=None, retreat: float = DEFAULT_RETREAT,
                     max_retreats: int = MAX_RETREATS,
                     mark_modified: frozenset = frozenset()) -> TimedTrajectory:
    """Concatenate local paths home -> tasks -> home with dwell intervals.

    Total time decomposes exactly as first leg + intermediate legs + return
    leg + (number of stops) * dwell.  Raises :class:`PathPlanningError` with
    the failing leg when any local path cannot be planned.
    """
    home = arm.home_q if home_q is None else np.asarray(home_q, dtype=float).reshape(6)
    planned_tasks = list(planned_tasks)
    if float(np.min(_clearances(arm, home[None, :], scene))) < scene.clearance_margin * PLANNING_PAD:
        raise PathPlanningError(arm.id, BASE, BASE)

    nodes = [(BASE, home)] + [(t.mp.id, t.q) for t in planned_tasks] + [(BASE, home)]
    legs = []
    for (fid, qa), (tid, qb) in zip(nodes, nodes[1:]):
        path = plan_local_path(arm, qa, qb, scene, retreat=retreat,
                               max_retreats=max_retreats, from_id=fid, to_id=tid)
        if path is None:
            raise PathPlanningError(arm.id, fid, tid)
        if (fid, tid) in mark_modified:
            path = replace(path, modified=True)
        legs.append(path)
    return _assemble(arm, planned_tasks, legs, home)


def _assemble(arm: SerialArm, planned_tasks, legs, home):
    times = [0.0]
    joints = [home]
    stops = []
    segments = []
    t = 0.0
    for i, leg in enumerate(legs):
        wp = leg.waypoints
        for a, b in zip(wp[:-1], wp[1:]):
            t += motion_time(arm, a, b)
            times.append(t)
            joints.append(b)
        dwell = 0.0
        if i < len(planned_tasks):
            task = planned_tasks[i]
            dwell = task.mp.dwell_time
            t_arrive = t
            t += dwell
            times.append(t)
            joints.append(task.q)
            stops.append(Stop(task.mp, task.pose, task.q, t_arrive, t))
        segments.append(Segment(leg, dwell))
    leg_sum = sum(leg.duration for leg in legs)
    dwell_sum = sum(seg.dwell for seg in segments)
    total = leg_sum + dwell_sum
    times_arr = np.array(times)
    joints_arr = np.vstack(joints)
    return TimedTrajectory(
        robot_id=arm.id,
        segments=tuple(segments),
        stops=tuple(stops),
        times=times_arr,
        joints=joints_arr,
        total_time=float(total),
        speed_bound=_speed_bound(arm, times_arr, joints_arr),
    )


def _speed_bound(arm: SerialArm, times: np.ndarray, joints: np.ndarray) -> float:
    if len(times) < 2:
        return 0.0
    dt = np.diff(times)
    dq = np.abs(np.diff(joints, axis=0))
    moving = dt > 1e-12
    if not np.any(moving):
        return 0.0
    disp = dq[moving] @ arm.lever_arms()
    return float(np.max(disp / dt[moving]))


# ---------------------------------------------------------------------------
# trajectory surgery (used by the coordination strategies)
# ---------------------------------------------------------------------------

def shift_start(traj: TimedTrajectory, delay: float) -> TimedTrajectory:
    """Delay the whole schedule; the robot idles at home until ``delay``."""
    if delay <= 0.0:
        return traj
    times = np.concatenate([[0.0], traj.times + delay])
    joints = np.vstack([traj.joints[:1], traj.joints])
    stops = tuple(replace(s, t_arrive=s.t_arrive + delay, t_depart=s.t_depart + delay)
                  for s in traj.stops)
    return TimedTrajectory(
        robot_id=traj.robot_id,
        segments=traj.segments,
        stops=stops,
        times=times,
        joints=joints,
        total_time=float(traj.total_time + delay),
        speed_bound=traj.speed_bound,
        holds=traj.holds + ((0.0, float(delay), "delay"),),
    )


def insert_hold(traj: TimedTrajectory, t_hold: float, duration: float) -> TimedTrajectory:
    """Pause the robot at its ``t_hold`` position for ``duration`` seconds."""
    if duration <= 0.0:
        return traj
    t_hold = float(min(max(t_hold, 0.0), traj.total_time))
    q_hold = joints_at(traj, t_hold)
    before = traj.times < t_hold - 1e-12
    after = traj.times > t_hold + 1e-12
    times = np.concatenate([traj.times[before], [t_hold, t_hold + duration],
                            traj.times[after] + duration])
    joints = np.vstack([traj.joints[before], q_hold[None, :], q_hold[None, :],
                        traj.joints[after]])
    stops = tuple(
        replace(s,
                t_arrive=s.t_arrive + (duration if s.t_arrive > t_hold + 1e-12 else 0.0),
                t_depart=s.t_depart + (duration if s.t_depart > t_hold + 1e-12 else 0.0))
        for s in traj.stops)
    return TimedTrajectory(
        robot_id=traj.robot_id,
        segments=traj.segments,
        stops=stops,
        times=times,
        joints=joints,
        total_time=float(traj.total_time + duration),
        speed_bound=traj.speed_bound,
        holds=traj.holds + ((t_hold, float(duration), "hold"),),
    )
