//! Multi-robot kinodynamic motion planning via conflict-based search.
//!
//! The library plans simultaneous collision-free trajectories for rigid
//! car-like robots in a bounded 2D workspace. A constrained kinodynamic
//! RRT plans one robot at a time; a high-level constraint-tree search
//! resolves robot-robot collisions by turning them into moving-obstacle
//! constraints, and pairs that keep conflicting are composed into
//! meta-robots and re-planned jointly. Centralized and prioritized RRT
//! baselines share the same low-level machinery.

pub mod baselines;
pub mod conflicts;
pub mod dynamics;
pub mod geometry;
pub mod kcbs;
pub mod low_level;
pub mod trajectory;
pub mod validator;

pub use baselines::{crrt_plan, prrt_plan, BaselineFailure};
pub use conflicts::{
    make_constraints, motion_violates_constraints, validate_plan, Conflict, Constraint, Motion,
    Plan, PlanViolation,
};
pub use dynamics::{
    eval_field, propagate, wrap_angle, BodyPlacement, ControlSpace, ControlVec, DimBound,
    GoalDisc, MetricWeights, ModelError, RobotModel, StateSpace, StateVec, VectorFieldSpec,
};
pub use geometry::{
    footprint, inside_workspace, polygons_intersect, BodySpec, ConvexPolygon, GeometryError,
    Point, Pose, Workspace,
};
pub use kcbs::{
    merge_models, merge_pair, should_merge, solve, ConflictCounter, MergeEvent, SolveConfig,
    SolveError, SolveStats, Solved,
};
pub use low_level::{
    cstr_plan, tree_to_trajectory, Deadline, IterBudget, LowLevelOutcome, MotionTree,
    PlannerConfig, TreeNode, ViolationTally,
};
pub use trajectory::{time_grid, Segment, Trajectory};
pub use validator::{rebase_plan, validate_solution, SolutionViolation};
