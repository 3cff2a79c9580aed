"""Task allocation: reachability partition, local-robust point sets, set cover.

The shared measurement points of each robot pair are grouped into "robust
sets" (points close in space with overlapping orientation cones, cheapest to
measure consecutively by one robot).  A minimum-cost exact cover picks the
groups, and a greedy pairwise assignment (cheaper-tour-wins with capacity
caps) folds them into per-robot task lists.

Times are seconds; tour costs convert Euclidean path length to seconds via a
nominal probe speed, so allocation costs and trajectory times share a unit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import unit
from .kinematics import PoseGrid, feasible_probe_poses

DEFAULT_PROBE_SPEED = 500.0  # mm/s, nominal Cartesian speed for cost estimates
DEFAULT_EPSILON = 300.0      # mm, adjacency threshold for robust sets
DEFAULT_COVER_BUDGET = 10_000
EXACT_COVER_COLUMNS = 20     # instances at or below this width are solved to optimality
EXACT_TOUR_TASKS = 10        # exact Held-Karp threshold for tour_cost


class UnreachableTaskError(ValueError):
    """Raised when some measurement points cannot be reached by any robot."""

    def __init__(self, mp_ids):
        self.mp_ids = tuple(mp_ids)
        super().__init__(f"measurement points unreachable by every robot: {', '.join(self.mp_ids)}")


class InfeasibleError(RuntimeError):
    """Raised when capacities or cover constraints cannot be satisfied."""


@dataclass(frozen=True, eq=False)
class MeasurementPoint:
    """One inspection task: a surface position with an outward unit normal.

    ``orientation_spec`` is the half-angle (degrees) of the acceptable probe
    orientation cone around the normal; ``dwell_time`` the fixed measuring
    time in seconds.
    """

    id: str
    position: np.ndarray
    normal: np.ndarray
    orientation_spec: float = 15.0
    dwell_time: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        n = np.asarray(self.normal, dtype=float).reshape(3)
        ln = float(np.linalg.norm(n))
        if abs(ln - 1.0) > 1e-3:
            raise ValueError(f"MP {self.id}: normal must be unit length (|n| = {ln:.6f})")
        object.__setattr__(self, "normal", n / ln)
        if not 0.0 < self.orientation_spec <= 90.0:
            raise ValueError(f"MP {self.id}: orientation_spec must be in (0, 90] degrees")
        if not self.dwell_time > 0.0:
            raise ValueError(f"MP {self.id}: dwell_time must be > 0")


@dataclass
class TaskPartition:
    """Reachability split: per-robot exclusive sets and per-pair shared sets.

    Every MP id appears in exactly one exclusive or shared bucket.  The
    ``probe_hints`` cache keeps the first feasible (pose, joints) found per
    (robot, MP) during classification.
    """

    exclusive: dict
    shared: dict
    reachable: dict
    probe_hints: dict = field(default_factory=dict)

    def robots_for(self, mp_id: str):
        return self.reachable[mp_id]


def partition_tasks(mps, robots, scene, spec, *, grid: PoseGrid = None, clouds: dict = None):
    """Classify MPs by which robots can measure them.

    An MP reachable by one robot lands in that robot's exclusive set; an MP
    reachable by several robots lands in the shared set of the two
    lowest-index reachers.  MPs reachable by no robot raise
    :class:`UnreachableTaskError` listing the offending ids.
    """
    grid = grid or PoseGrid()
    clouds = clouds or {}
    exclusive = {arm.id: [] for arm in robots}
    shared = {}
    reachable = {}
    hints = {}
    dead = []
    for mp in mps:
        reachers = []
        for arm in robots:
            poses = feasible_probe_poses(arm, mp, scene, spec, grid,
                                         cloud=clouds.get(arm.id), max_poses=1)
            if poses:
                reachers.append(arm.id)
                hints[(arm.id, mp.id)] = poses[0]
        if not reachers:
            dead.append(mp.id)
            continue
        reachable[mp.id] = tuple(reachers)
        if len(reachers) == 1:
            exclusive[reachers[0]].append(mp.id)
        else:
            pair = tuple(sorted(reachers, key=lambda rid: _robot_index(robots, rid))[:2])
            shared.setdefault(pair, []).append(mp.id)
    if dead:
        raise UnreachableTaskError(dead)
    return TaskPartition(exclusive, dict(sorted(shared.items())), reachable, hints)


def _robot_index(robots, rid):
    for i, arm in enumerate(robots):
        if arm.id == rid:
            return i
    raise KeyError(rid)


# ---------------------------------------------------------------------------
# robust sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RobustSet:
    """A seed MP with all shared MPs nearby and orientation-compatible."""

    seed_id: str
    member_ids: tuple
    cost: float


def build_robust_sets(shared_ids, mps_by_id, epsilon: float, *, base_positions,
                      probe_speed: float = DEFAULT_PROBE_SPEED):
    """One candidate set per shared MP: its neighbours within ``epsilon`` mm
    whose orientation cones overlap (angle between normals < sum of the two
    cone half-angles).

    ``base_positions`` holds the base points of the robot pair sharing these
    MPs; each set's cost is the cheaper robot's open-path time through the
    members, in seconds.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be > 0")
    ids = list(shared_ids)
    pos = np.array([mps_by_id[i].position for i in ids])
    nrm = np.array([mps_by_id[i].normal for i in ids])
    half = np.radians([mps_by_id[i].orientation_spec for i in ids])

    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    cosang = np.clip(nrm @ nrm.T, -1.0, 1.0)
    ang = np.arccos(cosang)
    compatible = (d < epsilon) & (ang < half[:, None] + half[None, :])

    sets = []
    for j, seed in enumerate(ids):
        members = tuple(ids[k] for k in range(len(ids)) if compatible[j, k])
        member_pos = pos[compatible[j]]
        cost = min(open_path_cost(member_pos, b, probe_speed=probe_speed).cost
                   for b in base_positions)
        sets.append(RobustSet(seed, members, cost))
    return sets


# ---------------------------------------------------------------------------
# set cover via penalty + auxiliary-function descent
# ---------------------------------------------------------------------------

@dataclass
class CoverMatrix:
    """0-1 incidence of shared MPs (rows) versus candidate sets (columns).

    ``mu`` is the penalty factor making any uncovered row dearer than any
    cover; ``beta`` records the selection vector of the last solve.
    """

    row_ids: tuple
    col_ids: tuple
    matrix: np.ndarray
    costs: np.ndarray
    mu: float
    beta: np.ndarray = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=bool)
        self.costs = np.asarray(self.costs, dtype=float)
        if self.matrix.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValueError("cover matrix shape mismatch")
        if not np.all(self.matrix.any(axis=1)):
            missing = [self.row_ids[i] for i in np.flatnonzero(~self.matrix.any(axis=1))]
            raise InfeasibleError(f"rows not coverable by any set: {missing}")
        if not self.mu > 0.0:
            raise ValueError("penalty factor mu must be > 0")

    @classmethod
    def from_robust_sets(cls, robust_sets, mu: float = None):
        sets = sorted(robust_sets, key=lambda s: s.seed_id)
        row_ids = tuple(sorted({m for s in sets for m in s.member_ids}))
        col_ids = tuple(s.seed_id for s in sets)
        row_index = {r: i for i, r in enumerate(row_ids)}
        m = np.zeros((len(row_ids), len(col_ids)), dtype=bool)
        costs = np.empty(len(col_ids))
        for j, s in enumerate(sets):
            costs[j] = s.cost
            for mid in s.member_ids:
                m[row_index[mid], j] = True
        if mu is None:
            mu = 10.0 * float(np.max(costs)) if len(costs) else 1.0
        return cls(row_ids, col_ids, m, costs, mu)


@dataclass
class SetCoverSearchState:
    """Bookkeeping of the auxiliary-function search (for inspection/tests)."""

    current: np.ndarray
    local_min: np.ndarray
    best: np.ndarray
    k: float
    evaluations: int = 0
    escapes: int = 0


@dataclass(frozen=True)
class SetCoverSolution:
    selected: tuple            # column indices
    cost: float
    assignment: dict           # row id -> column id (exact-cover extraction)
    subsets: tuple             # (col id, tuple(row ids)) per selected column
    evaluations: int
    escapes: int
    used_exact_fallback: bool


def solve_set_cover(cm: CoverMatrix, *, budget: int = DEFAULT_COVER_BUDGET) -> SetCoverSolution:
    """Minimum-cost cover of all rows, returned as an exact partition.

    The search minimizes f(x) = sum(c_j x_j) + mu * (#uncovered rows) by
    first-improvement bit-flip descent, escaping local minima through the
    auxiliary function T(x, k) = f(x) + k*|x - x0| (applied where f(x) is not
    yet better than the incumbent), with k doubled until escape or budget.
    Instances at or below ``EXACT_COVER_COLUMNS`` columns are verified
    against an internal branch-and-bound solver so the returned cost is the
    optimum there.

    After selection, each row is assigned to exactly one selected column
    (ties to the lower seed id), mirroring the row-zeroing exact-cover
    reading of the model.
    """
    ncols = len(cm.col_ids)
    masks = _column_masks(cm.matrix)
    full = (1 << len(cm.row_ids)) - 1
    costs = cm.costs
    mu = cm.mu

    def f(sel_mask: int) -> float:
        covered = 0
        total = 0.0
        m = sel_mask
        j = 0
        while m:
            if m & 1:
                covered |= masks[j]
                total += costs[j]
            m >>= 1
            j += 1
        uncovered = len(cm.row_ids) - _popcount(covered & full)
        return total + mu * uncovered

    state, best_mask = _auxiliary_search(masks, costs, mu, full, budget, f)

    used_exact = False
    if ncols <= EXACT_COVER_COLUMNS:
        opt_mask, opt_cost = _branch_and_bound(masks, costs, full)
        if opt_cost < f(best_mask) - 1e-12:
            best_mask = opt_mask
            used_exact = True

    selected = tuple(j for j in range(ncols) if best_mask >> j & 1)
    assignment = {}
    subsets = []
    remaining = set(range(len(cm.row_ids)))
    # Assign rows to the selected column with the lowest seed id first.
    for j in sorted(selected, key=lambda j: cm.col_ids[j]):
        rows = [r for r in range(len(cm.row_ids)) if cm.matrix[r, j] and r in remaining]
        remaining -= set(rows)
        subsets.append((cm.col_ids[j], tuple(cm.row_ids[r] for r in rows)))
        for r in rows:
            assignment[cm.row_ids[r]] = cm.col_ids[j]
    if remaining:
        raise InfeasibleError("set cover search returned an incomplete cover")
    cost = float(sum(costs[j] for j in selected))
    cm.beta = np.zeros(ncols, dtype=int)
    cm.beta[list(selected)] = 1
    return SetCoverSolution(selected, cost, assignment,
                            tuple(subsets), state.evaluations, state.escapes, used_exact)


def _column_masks(matrix: np.ndarray):
    masks = []
    for j in range(matrix.shape[1]):
        m = 0
        for r in np.flatnonzero(matrix[:, j]):
            m |= 1 << int(r)
        masks.append(m)
    return masks


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _greedy_cover(masks, costs, full) -> int:
    sel = 0
    covered = 0
    while covered != full:
        best_j, best_ratio = -1, math.inf
        for j, m in enumerate(masks):
            if sel >> j & 1:
                continue
            gain = _popcount(m & full & ~covered)
            if gain == 0:
                continue
            ratio = costs[j] / gain
            if ratio < best_ratio - 1e-15:
                best_ratio, best_j = ratio, j
        if best_j < 0:
            break
        sel |= 1 << best_j
        covered |= masks[best_j]
    return sel


def _auxiliary_search(masks, costs, mu, full, budget, f):
    ncols = len(masks)
    evals = [0]

    def fe(x):
        evals[0] += 1
        return f(x)

    def descend(x, value_fn):
        val = value_fn(x)
        improved = True
        while improved and evals[0] < budget:
            improved = False
            for j in range(ncols):
                y = x ^ (1 << j)
                vy = value_fn(y)
                if vy < val - 1e-12:
                    x, val = y, vy
                    improved = True
                    break
        return x, val

    x0 = _greedy_cover(masks, costs, full)
    x0, f0 = descend(x0, fe)
    best, f_best = x0, f0
    escapes = 0
    state = SetCoverSearchState(np.array([x0]), np.array([x0]), np.array([best]), 0.0)

    while evals[0] < budget:
        escaped = False
        k = 1.0
        while evals[0] < budget and k <= mu * (ncols + 1):
            def T(x, _k=k, _x0=x0):
                v = fe(x)
                if v >= f_best:
                    return v + _k * _popcount(x ^ _x0)
                return v
            for j in range(ncols):
                start = x0 ^ (1 << j)
                y, _ = descend(start, T)
                fy = fe(y)
                if fy < f_best - 1e-12:
                    x0, f0 = descend(y, fe)
                    best, f_best = x0, f0
                    escaped = True
                    escapes += 1
                    break
                if evals[0] >= budget:
                    break
            if escaped:
                break
            k *= 2.0
        if not escaped:
            break

    state.current = best
    state.local_min = x0
    state.best = best
    state.k = 0.0
    state.evaluations = evals[0]
    state.escapes = escapes
    return state, best


def _branch_and_bound(masks, costs, full):
    """Exact minimum-cost cover by row-driven branch and bound."""
    order = sorted(range(len(masks)), key=lambda j: costs[j])
    best_cost = [math.inf]
    best_sel = [0]
    greedy = _greedy_cover(masks, costs, full)
    if greedy:
        c = sum(costs[j] for j in range(len(masks)) if greedy >> j & 1)
        best_cost[0], best_sel[0] = c, greedy

    cover_cols = {}
    for r in range(full.bit_length()):
        cover_cols[r] = [j for j in order if masks[j] >> r & 1]

    def lb(uncovered):
        # Admissible: each uncovered row pays the cheapest cost share of any
        # column covering it.
        total = 0.0
        m = uncovered
        r = 0
        while m:
            if m & 1:
                best = math.inf
                for j in cover_cols[r]:
                    share = costs[j] / _popcount(masks[j] & uncovered)
                    if share < best:
                        best = share
                total += best
            m >>= 1
            r += 1
        return total

    def rec(covered, sel, cost):
        if covered == full:
            if cost < best_cost[0]:
                best_cost[0], best_sel[0] = cost, sel
            return
        if cost + lb(full & ~covered) >= best_cost[0] - 1e-12:
            return
        # Branch on the uncovered row with the fewest covering columns.
        uncovered = full & ~covered
        row, fewest = -1, math.inf
        m, r = uncovered, 0
        while m:
            if m & 1:
                cnt = len(cover_cols[r])
                if cnt < fewest:
                    fewest, row = cnt, r
            m >>= 1
            r += 1
        for j in cover_cols[row]:
            rec(covered | masks[j], sel | (1 << j), cost + costs[j])

    rec(0, 0, 0.0)
    return best_sel[0], best_cost[0]


# ---------------------------------------------------------------------------
# tour costs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TourResult:
    order: tuple     # indices into the input points, visit order
    length: float    # mm
    cost: float      # seconds at the nominal probe speed


def tour_cost(points, base, probe_speed: float = DEFAULT_PROBE_SPEED, *,
              method: str = "auto", seed: int = 0, restarts: int = 50) -> TourResult:
    """Closed tour base -> points -> base minimizing Euclidean length.

    Exact dynamic programming up to ``EXACT_TOUR_TASKS`` points, otherwise
    nearest-neighbour plus seeded 2-opt restarts (never worse than the
    nearest-neighbour start).  Cost is length / probe_speed seconds.
    """
    return _solve_tour(points, base, probe_speed, closed=True,
                       method=method, seed=seed, restarts=restarts)


def open_path_cost(points, base, probe_speed: float = DEFAULT_PROBE_SPEED, *,
                   method: str = "auto", seed: int = 0, restarts: int = 50) -> TourResult:
    """Open path base -> points (no return leg); used for robust-set costs."""
    return _solve_tour(points, base, probe_speed, closed=False,
                       method=method, seed=seed, restarts=restarts)


def _solve_tour(points, base, probe_speed, *, closed, method, seed, restarts):
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    base = np.asarray(base, dtype=float).reshape(3)
    n = points.shape[0]
    if n == 0:
        raise ValueError("tour requires at least one task")
    d_base = np.linalg.norm(points - base, axis=1)
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    if method == "auto":
        method = "exact" if n <= EXACT_TOUR_TASKS else "heuristic"
    if method == "exact":
        order, length = _held_karp(d_base, d, closed)
    elif method == "heuristic":
        order, length = _two_opt_tour(d_base, d, closed, seed, restarts)
    else:
        raise ValueError(f"unknown tour method: {method}")
    return TourResult(tuple(order), float(length), float(length) / probe_speed)


def _tour_length(order, d_base, d, closed):
    length = d_base[order[0]]
    for a, b in zip(order, order[1:]):
        length += d[a, b]
    if closed:
        length += d_base[order[-1]]
    return length


def _held_karp(d_base, d, closed):
    n = len(d_base)
    if n == 1:
        return [0], _tour_length([0], d_base, d, closed)
    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int64)
    idx = np.arange(n)
    for j in range(n):
        dp[1 << j, j] = d_base[j]
    for mask in range(1, size):
        row = dp[mask]
        active = np.flatnonzero(np.isfinite(row))
        if active.size == 0:
            continue
        free = np.flatnonzero(~((mask >> idx) & 1).astype(bool))
        if free.size == 0:
            continue
        cand = row[active, None] + d[np.ix_(active, free)]
        arg = np.argmin(cand, axis=0)
        vals = cand[arg, np.arange(free.size)]
        nmasks = mask | (1 << free)
        better = vals < dp[nmasks, free]
        dp[nmasks[better], free[better]] = vals[better]
        parent[nmasks[better], free[better]] = active[arg[better]]
    full = size - 1
    totals = dp[full] + (d_base if closed else 0.0)
    end = int(np.argmin(totals))
    length = float(totals[end])
    order = []
    mask, j = full, end
    while j >= 0:
        order.append(j)
        pj = parent[mask, j]
        mask ^= 1 << j
        j = int(pj)
    order.reverse()
    return order, length


def _two_opt_tour(d_base, d, closed, seed, restarts):
    n = len(d_base)
    rng = np.random.default_rng(seed)
    nn = _nearest_neighbour(d_base, d)
    starts = [nn]
    for _ in range(max(0, restarts - 1)):
        starts.append(list(rng.permutation(n)))
    best_order, best_len = None, math.inf
    for start in starts:
        order = _two_opt_improve(list(start), d_base, d, closed)
        length = _tour_length(order, d_base, d, closed)
        if length < best_len - 1e-12:
            best_order, best_len = order, length
    return best_order, best_len


def _nearest_neighbour(d_base, d):
    n = len(d_base)
    unvisited = set(range(n))
    cur = int(np.argmin(d_base))
    order = [cur]
    unvisited.remove(cur)
    while unvisited:
        nxt = min(unvisited, key=lambda k: d[cur, k])
        order.append(nxt)
        unvisited.remove(nxt)
        cur = nxt
    return order


def _extended_distances(d_base, d, closed):
    # Node n is the start sentinel (the base); node n+1 the end sentinel,
    # which duplicates the base for closed tours and costs nothing for open
    # paths.
    n = len(d_base)
    ext = np.zeros((n + 2, n + 2))
    ext[:n, :n] = d
    ext[n, :n] = d_base
    ext[:n, n] = d_base
    if closed:
        ext[n + 1, :n] = d_base
        ext[:n, n + 1] = d_base
    return ext


def _two_opt_improve(order, d_base, d, closed):
    # Best-improvement 2-opt with all segment-reversal deltas evaluated in
    # one vectorized pass per step.
    n = len(order)
    if n < 3:
        return list(order)
    ext = _extended_distances(d_base, d, closed)
    seq = np.empty(n + 2, dtype=np.int64)
    seq[0] = n
    seq[-1] = n + 1
    seq[1:-1] = order
    tri = np.triu(np.ones((n, n), dtype=bool), k=1)
    while True:
        a = seq[0:n]       # predecessor of position i (1-based inner index)
        b = seq[1:n + 1]   # element at position i
        c = seq[1:n + 1]   # element at position k
        e = seq[2:n + 2]   # successor of position k
        added = ext[a[:, None], c[None, :]] + ext[b[:, None], e[None, :]]
        removed = ext[a, b][:, None] + ext[c, e][None, :]
        delta = np.where(tri, added - removed, np.inf)
        i, k = np.unravel_index(np.argmin(delta), delta.shape)
        if delta[i, k] >= -1e-9:
            break
        seq[i + 1:k + 2] = seq[i + 1:k + 2][::-1]
    return [int(x) for x in seq[1:-1]]


# ---------------------------------------------------------------------------
# allocation (pairwise greedy over minimum-cover subsets)
# ---------------------------------------------------------------------------

@dataclass
class Allocation:
    """Final partition of all MPs into per-robot ordered task lists."""

    tasks: dict          # robot id -> tuple of MP ids, tour order
    capacities: dict     # robot id -> max task count
    tour_costs: dict     # robot id -> estimated closed-tour seconds
    method: str = "local-robust"

    def validate(self, all_mp_ids):
        seen = []
        for rid, ids in self.tasks.items():
            if len(ids) > self.capacities[rid]:
                raise InfeasibleError(f"robot {rid} exceeds capacity: {len(ids)} > {self.capacities[rid]}")
            seen.extend(ids)
        if len(seen) != len(set(seen)):
            raise InfeasibleError("allocation assigns some MP twice")
        if set(seen) != set(all_mp_ids):
            raise InfeasibleError("allocation does not cover all MPs")
        return True


def allocate(partition: TaskPartition, mps_by_id, robots, *,
             epsilon: float = DEFAULT_EPSILON,
             mu: float = None,
             probe_speed: float = DEFAULT_PROBE_SPEED,
             cover_budget: int = DEFAULT_COVER_BUDGET) -> Allocation:
    """Greedy pairwise allocation of the minimum-cover subsets.

    Each robot starts from its exclusive set.  For every robot pair sharing
    MPs (processed in index order) the shared set is grouped into robust
    sets, a minimum-cost cover is solved, and each resulting subset goes to
    whichever robot of the pair adds it at the smaller closed-tour cost
    (infinite when it would exceed the robot's capacity; ties to the
    lower-index robot).
    """
    by_id = {arm.id: arm for arm in robots}
    tasks = {arm.id: list(partition.exclusive.get(arm.id, [])) for arm in robots}
    caps = {arm.id: arm.capacity for arm in robots}
    for rid, ids in tasks.items():
        if len(ids) > caps[rid]:
            raise InfeasibleError(f"exclusive set of {rid} already exceeds its capacity")

    for (rid_i, rid_l), shared_ids in partition.shared.items():
        arm_i, arm_l = by_id[rid_i], by_id[rid_l]
        rsets = build_robust_sets(
            shared_ids, mps_by_id, epsilon,
            base_positions=(arm_i.base.position, arm_l.base.position),
            probe_speed=probe_speed)
        cm = CoverMatrix.from_robust_sets(rsets, mu=mu)
        solution = solve_set_cover(cm, budget=cover_budget)
        for _, subset_ids in solution.subsets:
            if not subset_ids:
                continue
            cost_i = _augmented_cost(tasks[rid_i], subset_ids, caps[rid_i], mps_by_id,
                                     arm_i.base.position, probe_speed)
            cost_l = _augmented_cost(tasks[rid_l], subset_ids, caps[rid_l], mps_by_id,
                                     arm_l.base.position, probe_speed)
            if math.isinf(cost_i) and math.isinf(cost_l):
                raise InfeasibleError(
                    f"both {rid_i} and {rid_l} lack capacity for subset {subset_ids}")
            if cost_i <= cost_l:
                tasks[rid_i].extend(subset_ids)
            else:
                tasks[rid_l].extend(subset_ids)

    ordered = {}
    costs = {}
    for arm in robots:
        ids = tasks[arm.id]
        if not ids:
            ordered[arm.id] = ()
            costs[arm.id] = 0.0
            continue
        pts = np.array([mps_by_id[i].position for i in ids])
        res = tour_cost(pts, arm.base.position, probe_speed)
        ordered[arm.id] = tuple(ids[k] for k in res.order)
        costs[arm.id] = res.cost

    alloc = Allocation(ordered, caps, costs)
    alloc.validate(list(mps_by_id.keys()) if isinstance(mps_by_id, dict) else [m.id for m in mps_by_id])
    return alloc


def _augmented_cost(current_ids, subset_ids, capacity, mps_by_id, base, probe_speed):
    if len(current_ids) + len(subset_ids) > capacity:
        return math.inf
    ids = list(current_ids) + list(subset_ids)
    pts = np.array([mps_by_id[i].position for i in ids])
    return tour_cost(pts, base, probe_speed).cost
