"""Offline planning and batch simulation for multi-robot optical inspection cells.

The pipeline: classify which robots can measure each point (kinematics),
allocate points to robots via local-robust set cover (allocation), plan
collision-free per-robot tours (pathplan), then remove inter-robot conflicts
by probe-pose perturbation or the delay / fixed-priority benchmark
strategies (coordination).  The harness subpackage adds scene files,
scenario templates, the experiment runner, SVG charts, and the CLI.
"""

from .geom import (
    Capsule,
    MeasurabilityResult,
    OpticalSpec,
    Pose,
    Scene,
    capsule_capsule_distance,
    capsule_points_clearance,
    measurable,
    vec3,
    view_angle,
)
from .kinematics import (
    Joint,
    PoseGrid,
    ReachabilityCloud,
    SerialArm,
    example_arm,
    feasible_probe_poses,
    forward_kinematics,
    inverse_kinematics,
    motion_time,
    sample_workspace,
)
from .allocation import (
    Allocation,
    CoverMatrix,
    InfeasibleError,
    MeasurementPoint,
    RobustSet,
    TaskPartition,
    UnreachableTaskError,
    allocate,
    build_robust_sets,
    open_path_cost,
    partition_tasks,
    solve_set_cover,
    tour_cost,
)
from .pathplan import (
    BASE,
    LocalPath,
    PathPlanningError,
    PlannedTask,
    TimedTrajectory,
    build_trajectory,
    plan_local_path,
    pose_at,
    sequence_tasks,
)
from .coordination import (
    ConflictRecord,
    CoordinationInfeasibleError,
    CoordinationParams,
    CoordinationReport,
    DeadlockError,
    PerturbationCandidate,
    STRATEGIES,
    assign_priority,
    coordinate,
    detect_conflicts,
    resolve_by_delay,
    resolve_by_fixed_priority,
    resolve_by_perturbation,
)

__version__ = "0.1.0"
