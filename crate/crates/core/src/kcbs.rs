//! High-level constraint-tree search with merge-and-restart.
//!
//! A best-first queue of constraint-tree nodes is expanded: plan-bearing
//! nodes are validated and branch on their earliest conflict, nodes whose
//! replan ran out of iterations keep their motion tree and are resumed
//! later. When a robot pair accumulates more than `B` conflict events the
//! pair is composed into a meta-robot and the search restarts on the
//! reduced problem, carrying over the remaining wall-clock budget. In the
//! worst case everything merges and the search becomes a centralized
//! planner, which is what makes the method complete.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conflicts::{make_constraints, validate_plan, Constraint, Plan};
use crate::dynamics::{ControlSpace, ControlVec, RobotModel, StateSpace, StateVec, VectorFieldSpec};
use crate::geometry::{ConvexPolygon, Workspace};
use crate::low_level::{cstr_plan, Deadline, IterBudget, LowLevelOutcome, MotionTree, PlannerConfig};
use crate::trajectory::{Segment, Trajectory};

/// High-level solver parameters.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Low-level iterations per branch or retry episode.
    pub n: u64,
    /// Merge threshold: a pair merges once its conflict events exceed B.
    pub b: u64,
    pub seed: u64,
    pub deadline: Duration,
    pub planner: PlannerConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            n: 4000,
            b: 20,
            seed: 0,
            deadline: Duration::from_secs(60),
            planner: PlannerConfig::default(),
        }
    }
}

/// Symmetric pairwise conflict-event counts among the current robots.
#[derive(Debug, Clone)]
pub struct ConflictCounter {
    k: usize,
    counts: Vec<u64>,
}

impl ConflictCounter {
    pub fn new(k: usize) -> Self {
        ConflictCounter { k, counts: vec![0; k * k] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        lo * self.k + hi
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[self.idx(i, j)]
    }

    pub fn increment(&mut self, i: usize, j: usize) -> u64 {
        let idx = self.idx(i, j);
        self.counts[idx] += 1;
        self.counts[idx]
    }
}

/// Merge rule: strictly more than `b` conflict events between the pair.
pub fn should_merge(counter: &ConflictCounter, i: usize, j: usize, b: u64) -> bool {
    counter.count(i, j) > b
}

/// One merge-and-restart event.
#[derive(Debug, Clone)]
pub struct MergeEvent {
    /// Indices within the model list that was active when the merge fired.
    pub i: usize,
    pub j: usize,
    pub names: (String, String),
    /// Number of merges performed before this one.
    pub depth: usize,
    /// Conflict events recorded for the pair when the merge fired.
    pub pair_events: u64,
}

/// Observable counters of one solve call, including the quantities bounded
/// by the completeness argument (merges, per-node retries, per-pair events).
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub ct_nodes_expanded: u64,
    pub low_level_calls: u64,
    pub branches: u64,
    pub merge_events: Vec<MergeEvent>,
    pub wall_time: f64,
    pub final_robot_count: usize,
    pub max_node_retries: u64,
    pub max_pair_events: u64,
    /// Every popped node in expansion order, for diagnostics and tests.
    pub node_trace: Vec<NodeTrace>,
    /// Trace id of the node whose plan was returned.
    pub solution_node: Option<u64>,
}

impl SolveStats {
    pub fn merges(&self) -> usize {
        self.merge_events.len()
    }
}

/// Snapshot of a constraint-tree node at the moment it was popped.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub id: u64,
    pub parent: Option<u64>,
    pub cost: f64,
    pub had_plan: bool,
    /// Constraint-set size per robot (current model list order).
    pub constraint_counts: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("deadline exceeded before a collision-free plan was found")]
    Timeout { stats: SolveStats },
    #[error("constraint tree exhausted without a plan")]
    Exhausted { stats: SolveStats },
}

impl SolveError {
    pub fn stats(&self) -> &SolveStats {
        match self {
            SolveError::Timeout { stats } | SolveError::Exhausted { stats } => stats,
        }
    }
}

#[derive(Debug)]
pub struct Solved {
    /// One trajectory per *original* robot (meta-robot plans are split back).
    pub plan: Plan,
    pub stats: SolveStats,
}

/// Span of one original robot inside a (possibly composite) model.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PartRef {
    pub original: usize,
    pub state_off: usize,
    pub state_dim: usize,
    pub control_off: usize,
    pub control_dim: usize,
}

/// A current model together with the original robots it carries.
#[derive(Debug, Clone)]
pub(crate) struct ModelSlot {
    pub model: Arc<RobotModel>,
    pub parts: Vec<PartRef>,
}

pub(crate) fn identity_slots(models: &[Arc<RobotModel>]) -> Vec<ModelSlot> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| ModelSlot {
            model: m.clone(),
            parts: vec![PartRef {
                original: i,
                state_off: 0,
                state_dim: m.state_dim(),
                control_off: 0,
                control_dim: m.control_dim(),
            }],
        })
        .collect()
}

/// Compose two models into one meta-robot: concatenated spaces, composite
/// field, both bodies, conjunction of goals.
pub fn merge_pair(a: &RobotModel, b: &RobotModel, workspace: &Workspace) -> Arc<RobotModel> {
    let state_dims: Vec<_> = a
        .state_space
        .dims
        .iter()
        .chain(&b.state_space.dims)
        .cloned()
        .collect();
    let control_dims: Vec<_> = a
        .control_space
        .dims
        .iter()
        .chain(&b.control_space.dims)
        .cloned()
        .collect();
    let mut components = a.field.components();
    components.extend(b.field.components());
    let offset = a.state_dim();
    let mut bodies = a.bodies.clone();
    bodies.extend(b.bodies.iter().map(|body| {
        let mut shifted = body.clone();
        shifted.position_dims = [body.position_dims[0] + offset, body.position_dims[1] + offset];
        shifted.heading_dim = body.heading_dim + offset;
        shifted
    }));
    let start: Vec<f64> = a
        .start
        .as_slice()
        .iter()
        .chain(b.start.as_slice())
        .cloned()
        .collect();
    let mut goals = a.goals.clone();
    goals.extend(b.goals.iter().cloned());
    RobotModel::new(
        format!("{}+{}", a.name, b.name),
        StateSpace { dims: state_dims },
        ControlSpace { dims: control_dims },
        VectorFieldSpec::Composite(components),
        bodies,
        StateVec::from_slice(&start),
        goals,
        workspace,
    )
    .expect("merging two valid models yields a valid model")
}

/// Replace models i and j by their composition; the meta-robot takes
/// position min(i, j) and the rest keep their relative order.
pub fn merge_models(
    models: &[Arc<RobotModel>],
    i: usize,
    j: usize,
    workspace: &Workspace,
) -> Vec<Arc<RobotModel>> {
    assert!(i != j && i < models.len() && j < models.len());
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let merged = merge_pair(&models[lo], &models[hi], workspace);
    let mut out = Vec::with_capacity(models.len() - 1);
    for (idx, m) in models.iter().enumerate() {
        if idx == lo {
            out.push(merged.clone());
        } else if idx != hi {
            out.push(m.clone());
        }
    }
    out
}

pub(crate) fn merge_slots(
    slots: &[ModelSlot],
    i: usize,
    j: usize,
    workspace: &Workspace,
) -> Vec<ModelSlot> {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let model = merge_pair(&slots[lo].model, &slots[hi].model, workspace);
    let state_off = slots[lo].model.state_dim();
    let control_off = slots[lo].model.control_dim();
    let mut parts = slots[lo].parts.clone();
    parts.extend(slots[hi].parts.iter().map(|p| PartRef {
        original: p.original,
        state_off: p.state_off + state_off,
        state_dim: p.state_dim,
        control_off: p.control_off + control_off,
        control_dim: p.control_dim,
    }));
    let mut out = Vec::with_capacity(slots.len() - 1);
    for (idx, slot) in slots.iter().enumerate() {
        if idx == lo {
            out.push(ModelSlot { model: model.clone(), parts: parts.clone() });
        } else if idx != hi {
            out.push(slot.clone());
        }
    }
    out
}

/// Carve one original robot's trajectory out of a composite trajectory.
/// Exact because composite components evolve independently.
pub(crate) fn slice_trajectory(
    traj: &Trajectory,
    model: Arc<RobotModel>,
    part: &PartRef,
    step: f64,
) -> Trajectory {
    let start = StateVec::from_slice(
        &traj.start_state().as_slice()[part.state_off..part.state_off + part.state_dim],
    );
    let segments: Vec<Segment> = traj
        .segments()
        .iter()
        .map(|s| Segment {
            control: ControlVec::from_slice(
                &s.control.as_slice()[part.control_off..part.control_off + part.control_dim],
            ),
            duration: s.duration,
        })
        .collect();
    Trajectory::new(model, start, segments, step)
}

pub(crate) fn split_to_originals(
    slots: &[ModelSlot],
    trajs: &[Arc<Trajectory>],
    originals: &[Arc<RobotModel>],
    step: f64,
) -> Plan {
    let mut out: Vec<Option<Arc<Trajectory>>> = vec![None; originals.len()];
    for (slot, traj) in slots.iter().zip(trajs) {
        if slot.parts.len() == 1 && slot.parts[0].state_off == 0 {
            // Unmerged robot: reuse the trajectory as-is.
            out[slot.parts[0].original] = Some(traj.clone());
            continue;
        }
        for part in &slot.parts {
            let model = originals[part.original].clone();
            out[part.original] = Some(Arc::new(slice_trajectory(traj, model, part, step)));
        }
    }
    Plan::new(out.into_iter().map(|t| t.expect("every robot covered")).collect())
}

struct PendingReplan {
    robot: usize,
    tree: MotionTree,
}

struct CtNode {
    id: u64,
    parent: Option<u64>,
    trajs: Vec<Arc<Trajectory>>,
    has_plan: bool,
    pending: Option<PendingReplan>,
    constraints: Vec<Vec<Constraint>>,
    retries: u64,
    cost: f64,
}

struct QueueEntry {
    cost: f64,
    seq: u64,
    node: CtNode,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min cost first, insertion order (FIFO) on ties.
        self.cost.total_cmp(&other.cost).then(self.seq.cmp(&other.seq))
    }
}

/// Solve the multi-robot problem. The returned plan has one trajectory per
/// robot in the order of `models`; if merges happened, meta-robot
/// trajectories are split back into their constituents.
pub fn solve(
    models: &[Arc<RobotModel>],
    workspace: &Workspace,
    obstacles: &[ConvexPolygon],
    cfg: &SolveConfig,
) -> Result<Solved, SolveError> {
    assert!(!models.is_empty() && cfg.n >= 1 && cfg.b >= 1 && cfg.planner.dt > 0.0);
    let t0 = Instant::now();
    let deadline = Deadline::within(cfg.deadline);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let original_k = models.len();
    let mut slots = identity_slots(models);
    let mut stats = SolveStats { final_robot_count: original_k, ..SolveStats::default() };
    let mut next_id: u64 = 0;

    let finish = |stats: &mut SolveStats, slots: &[ModelSlot]| {
        stats.wall_time = t0.elapsed().as_secs_f64();
        stats.final_robot_count = slots.len();
    };

    'restart: loop {
        let k = slots.len();
        let mut counter = ConflictCounter::new(k);

        // Root: plan every robot individually, ignoring the others. The
        // iteration budget is unbounded; only the deadline stops it.
        let mut root_trajs = Vec::with_capacity(k);
        for slot in &slots {
            stats.low_level_calls += 1;
            match cstr_plan(
                &slot.model,
                workspace,
                obstacles,
                &[],
                None,
                IterBudget::Unbounded,
                deadline,
                &cfg.planner,
                &mut rng,
            ) {
                LowLevelOutcome::Solution(t) => root_trajs.push(Arc::new(t)),
                LowLevelOutcome::Exhausted { .. } => {
                    finish(&mut stats, &slots);
                    return Err(SolveError::Timeout { stats });
                }
            }
        }

        let mut queue: BinaryHeap<Reverse<QueueEntry>> = BinaryHeap::new();
        let mut seq: u64 = 0;
        let push = |queue: &mut BinaryHeap<Reverse<QueueEntry>>, seq: &mut u64, node: CtNode| {
            let entry = QueueEntry { cost: node.cost, seq: *seq, node };
            *seq += 1;
            queue.push(Reverse(entry));
        };

        let root_cost: f64 = root_trajs.iter().map(|t| t.duration()).sum();
        let root = CtNode {
            id: next_id,
            parent: None,
            trajs: root_trajs,
            has_plan: true,
            pending: None,
            constraints: vec![Vec::new(); k],
            retries: 0,
            cost: root_cost,
        };
        next_id += 1;
        push(&mut queue, &mut seq, root);

        loop {
            if deadline.expired() {
                finish(&mut stats, &slots);
                return Err(SolveError::Timeout { stats });
            }
            let Some(Reverse(entry)) = queue.pop() else {
                // Every pending node was discarded and no plan survived.
                finish(&mut stats, &slots);
                return Err(SolveError::Exhausted { stats });
            };
            let mut node = entry.node;
            stats.ct_nodes_expanded += 1;
            stats.node_trace.push(NodeTrace {
                id: node.id,
                parent: node.parent,
                cost: node.cost,
                had_plan: node.has_plan,
                constraint_counts: node.constraints.iter().map(|c| c.len()).collect(),
            });

            if node.has_plan {
                let plan = Plan::new(node.trajs.clone());
                let conflicts = validate_plan(&plan, obstacles, cfg.planner.dt)
                    .expect("low-level plans are obstacle-free on the detection grid");
                if conflicts.is_empty() {
                    stats.solution_node = Some(node.id);
                    finish(&mut stats, &slots);
                    let plan = split_to_originals(&slots, &node.trajs, models, cfg.planner.step);
                    return Ok(Solved { plan, stats });
                }

                let conflict = conflicts[0];
                let events = counter.increment(conflict.i, conflict.j);
                stats.max_pair_events = stats.max_pair_events.max(events);
                assert!(events <= cfg.b + 1, "pair events exceed the merge bound");
                if should_merge(&counter, conflict.i, conflict.j, cfg.b) {
                    stats.merge_events.push(MergeEvent {
                        i: conflict.i,
                        j: conflict.j,
                        names: (
                            slots[conflict.i].model.name.clone(),
                            slots[conflict.j].model.name.clone(),
                        ),
                        depth: stats.merge_events.len(),
                        pair_events: events,
                    });
                    assert!(stats.merges() <= original_k - 1, "more merges than robots");
                    slots = merge_slots(&slots, conflict.i, conflict.j, workspace);
                    continue 'restart;
                }

                let (on_i, on_j) = make_constraints(&conflict, &plan);
                for (robot, constraint) in [(conflict.i, on_i), (conflict.j, on_j)] {
                    stats.branches += 1;
                    let mut child_constraints = node.constraints.clone();
                    child_constraints[robot].push(constraint);
                    stats.low_level_calls += 1;
                    let out = cstr_plan(
                        &slots[robot].model,
                        workspace,
                        obstacles,
                        &child_constraints[robot],
                        None,
                        IterBudget::Bounded(cfg.n),
                        deadline,
                        &cfg.planner,
                        &mut rng,
                    );
                    let child = match out {
                        LowLevelOutcome::Solution(t) => {
                            let mut trajs = node.trajs.clone();
                            trajs[robot] = Arc::new(t);
                            let cost = trajs.iter().map(|t| t.duration()).sum();
                            CtNode {
                                id: next_id,
                                parent: Some(node.id),
                                trajs,
                                has_plan: true,
                                pending: None,
                                constraints: child_constraints,
                                retries: 0,
                                cost,
                            }
                        }
                        LowLevelOutcome::Exhausted { tree, .. } => CtNode {
                            id: next_id,
                            parent: Some(node.id),
                            trajs: node.trajs.clone(),
                            has_plan: false,
                            pending: Some(PendingReplan { robot, tree }),
                            constraints: child_constraints,
                            retries: 0,
                            cost: f64::INFINITY,
                        },
                    };
                    next_id += 1;
                    push(&mut queue, &mut seq, child);
                }
            } else {
                // Pending node: give the stored tree N more iterations under
                // the same constraint set.
                let PendingReplan { robot, tree } = node.pending.take().expect("pending node");
                node.retries += 1;
                stats.max_node_retries = stats.max_node_retries.max(node.retries);
                assert!(node.retries <= cfg.b, "retries exceed the per-node bound");
                stats.low_level_calls += 1;
                let out = cstr_plan(
                    &slots[robot].model,
                    workspace,
                    obstacles,
                    &node.constraints[robot],
                    Some(tree),
                    IterBudget::Bounded(cfg.n),
                    deadline,
                    &cfg.planner,
                    &mut rng,
                );
                match out {
                    LowLevelOutcome::Solution(t) => {
                        node.trajs[robot] = Arc::new(t);
                        node.has_plan = true;
                        node.pending = None;
                        node.cost = node.trajs.iter().map(|t| t.duration()).sum();
                        push(&mut queue, &mut seq, node);
                    }
                    LowLevelOutcome::Exhausted { tree, c_max, .. } => {
                        if let Some(ci) = c_max {
                            let other = node.constraints[robot][ci].other;
                            let events = counter.increment(robot, other);
                            stats.max_pair_events = stats.max_pair_events.max(events);
                            assert!(events <= cfg.b + 1, "pair events exceed the merge bound");
                            if should_merge(&counter, robot, other, cfg.b) {
                                stats.merge_events.push(MergeEvent {
                                    i: robot.min(other),
                                    j: robot.max(other),
                                    names: (
                                        slots[robot.min(other)].model.name.clone(),
                                        slots[robot.max(other)].model.name.clone(),
                                    ),
                                    depth: stats.merge_events.len(),
                                    pair_events: events,
                                });
                                assert!(stats.merges() <= original_k - 1, "more merges than robots");
                                slots = merge_slots(&slots, robot, other, workspace);
                                continue 'restart;
                            }
                        }
                        if node.retries < cfg.b {
                            node.pending = Some(PendingReplan { robot, tree });
                            push(&mut queue, &mut seq, node);
                        }
                        // else: the node spent its retry budget and is dropped.
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate, BodyPlacement, DimBound, GoalDisc};
    use crate::geometry::{BodySpec, Point};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn car_model(name: &str, ws: &Workspace, start: [f64; 5], goal: (f64, f64)) -> Arc<RobotModel> {
        RobotModel::new(
            name.into(),
            StateSpace {
                dims: vec![
                    DimBound::linear(ws.xmin, ws.xmax),
                    DimBound::linear(ws.ymin, ws.ymax),
                    DimBound::angular(),
                    DimBound::linear(-1.0, 2.0),
                    DimBound::linear(-FRAC_PI_4, FRAC_PI_4),
                ],
            },
            ControlSpace { dims: vec![(-1.0, 1.0), (-0.5, 0.5)] },
            VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 },
            vec![BodyPlacement {
                body: BodySpec::new(0.7, 0.5).unwrap(),
                position_dims: [0, 1],
                heading_dim: 2,
            }],
            StateVec::from_slice(&start),
            vec![GoalDisc { center: Point::new(goal.0, goal.1), radius: 0.5 }],
            ws,
        )
        .unwrap()
    }

    #[test]
    fn counter_and_merge_rule_boundaries() {
        let mut c = ConflictCounter::new(3);
        assert!(!should_merge(&c, 0, 1, 5));
        for _ in 0..5 {
            c.increment(0, 1);
        }
        assert_eq!(c.count(0, 1), 5);
        assert_eq!(c.count(1, 0), 5);
        assert!(!should_merge(&c, 0, 1, 5), "5 events do not exceed B = 5");
        c.increment(1, 0);
        assert!(should_merge(&c, 0, 1, 5));
        assert!(!should_merge(&c, 1, 2, 5));
    }

    #[test]
    fn merged_model_dimensions() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let a = car_model("a", &ws, [1.0, 1.0, 0.0, 0.0, 0.0], (9.0, 9.0));
        let b = car_model("b", &ws, [9.0, 1.0, 0.0, 0.0, 0.0], (1.0, 9.0));
        let c = car_model("c", &ws, [5.0, 1.0, 0.0, 0.0, 0.0], (5.0, 9.0));

        let merged = merge_models(&[a.clone(), b.clone(), c.clone()], 0, 1, &ws);
        assert_eq!(merged.len(), 2);
        let meta = &merged[0];
        assert_eq!(meta.state_dim(), 10);
        assert_eq!(meta.control_dim(), 4);
        assert_eq!(meta.bodies.len(), 2);
        assert_eq!(meta.bodies[1].position_dims, [5, 6]);
        assert_eq!(merged[1].name, "c");

        // Nested composition flattens.
        let merged2 = merge_models(&merged, 0, 1, &ws);
        assert_eq!(merged2.len(), 1);
        assert_eq!(merged2[0].state_dim(), 15);
        assert_eq!(merged2[0].control_dim(), 6);
        assert_eq!(merged2[0].bodies.len(), 3);
        match &merged2[0].field {
            VectorFieldSpec::Composite(parts) => assert_eq!(parts.len(), 3),
            other => panic!("expected a flat composite, got {other:?}"),
        }
    }

    #[test]
    fn meta_propagation_matches_componentwise() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let a = car_model("a", &ws, [1.0, 1.0, 0.2, 0.5, 0.1], (9.0, 9.0));
        let b = car_model("b", &ws, [9.0, 1.0, 2.0, 1.0, -0.1], (1.0, 9.0));
        let meta = merge_pair(&a, &b, &ws);

        let ua = [0.4, -0.2];
        let ub = [-0.3, 0.1];
        let uc: Vec<f64> = ua.iter().chain(&ub).cloned().collect();
        let ra = propagate(&a.field, &a.state_space, a.start.as_slice(), &ua, 1.7, 0.05);
        let rb = propagate(&b.field, &b.state_space, b.start.as_slice(), &ub, 1.7, 0.05);
        let rc = propagate(&meta.field, &meta.state_space, meta.start.as_slice(), &uc, 1.7, 0.05);
        for i in 0..5 {
            assert_abs_diff_eq!(rc[i], ra[i], epsilon = 1e-12);
            assert_abs_diff_eq!(rc[5 + i], rb[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn single_robot_solves_at_first_expansion() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let model = car_model("solo", &ws, [2.0, 5.0, 0.0, 0.0, 0.0], (8.0, 5.0));
        let cfg = SolveConfig { seed: 7, ..SolveConfig::default() };
        let solved = solve(&[model.clone()], &ws, &[], &cfg).unwrap();
        assert_eq!(solved.stats.ct_nodes_expanded, 1);
        assert_eq!(solved.stats.merges(), 0);
        assert_eq!(solved.stats.branches, 0);
        assert_eq!(solved.stats.final_robot_count, 1);
        let end = solved.plan.trajectories[0].final_state();
        assert!(model.satisfies_goal(end.as_slice()));
    }

    #[test]
    fn non_interacting_lanes_return_the_root_plan() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let a = car_model("a", &ws, [1.0, 2.0, 0.0, 0.0, 0.0], (9.0, 2.0));
        let b = car_model("b", &ws, [1.0, 8.0, 0.0, 0.0, 0.0], (9.0, 8.0));
        let cfg = SolveConfig { seed: 3, ..SolveConfig::default() };
        let solved = solve(&[a, b], &ws, &[], &cfg).unwrap();
        assert_eq!(solved.stats.ct_nodes_expanded, 1);
        assert_eq!(solved.stats.branches, 0);
        assert_eq!(solved.stats.merges(), 0);
    }

    #[test]
    fn slicing_recovers_component_trajectories() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let a = car_model("a", &ws, [1.0, 1.0, 0.0, 0.5, 0.0], (9.0, 9.0));
        let b = car_model("b", &ws, [9.0, 1.0, 1.5, 0.2, 0.0], (1.0, 9.0));
        let meta = merge_pair(&a, &b, &ws);
        let segments = vec![
            Segment { control: ControlVec::from_slice(&[0.3, 0.1, -0.2, 0.05]), duration: 0.5 },
            Segment { control: ControlVec::from_slice(&[-0.1, 0.0, 0.4, -0.05]), duration: 0.8 },
        ];
        let traj = Trajectory::new(meta.clone(), meta.start.clone(), segments, 0.05);
        let part_b = PartRef { original: 1, state_off: 5, state_dim: 5, control_off: 2, control_dim: 2 };
        let sliced = slice_trajectory(&traj, b.clone(), &part_b, 0.05);
        for t in [0.0, 0.3, 0.6, 1.0, 1.3] {
            let whole = traj.state_at(t);
            let part = sliced.state_at(t);
            for d in 0..5 {
                assert_abs_diff_eq!(part[d], whole[5 + d], epsilon = 1e-12);
            }
        }
    }
}
