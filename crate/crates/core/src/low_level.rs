//! Constrained, resumable kinodynamic RRT for one robot or meta-robot.
//!
//! The planner grows a motion tree by sampling a target state, extending
//! the nearest node with a uniformly sampled control held for a random
//! multiple of the integration step, and keeping the motion only if it
//! stays within bounds, clear of static obstacles and clear of every
//! moving-obstacle constraint. With no constraints and no seed tree it
//! is a plain goal-biased RRT. On failure it hands back the whole tree
//! (so a later call can resume it) together with the constraint it
//! violated most often.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::conflicts::{sample_motion, violated_constraint_in_samples, Constraint, Motion};
use crate::dynamics::{ControlVec, MetricWeights, RobotModel, StateVec};
use crate::geometry::{footprint, inside_workspace, polygons_intersect, ConvexPolygon, Point, Workspace};
use crate::trajectory::{Segment, Trajectory};

/// Shared low-level planner parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// RK4 integration step (s). Segment durations are multiples of it.
    pub step: f64,
    /// Validity / conflict detection resolution (s).
    pub dt: f64,
    /// Probability of sampling the goal state as the extension target.
    pub goal_bias: f64,
    /// Control durations are k * step with k uniform in 1..=max_duration_steps.
    pub max_duration_steps: u32,
    pub weights: MetricWeights,
    /// Horizon factor for prioritized planning shadows.
    pub prrt_horizon_factor: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            step: 0.05,
            dt: 0.1,
            goal_bias: 0.05,
            max_duration_steps: 20,
            weights: MetricWeights::default(),
            prrt_horizon_factor: 2.0,
        }
    }
}

/// Wall-clock budget; `None` never expires.
#[derive(Debug, Clone, Copy)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Self {
        Deadline(None)
    }

    pub fn within(budget: Duration) -> Self {
        Deadline(Some(Instant::now() + budget))
    }

    pub fn at(instant: Instant) -> Self {
        Deadline(Some(instant))
    }

    pub fn expired(&self) -> bool {
        self.0.map_or(false, |t| Instant::now() >= t)
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_some()
    }
}

/// Iteration budget of one planning episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterBudget {
    Bounded(u64),
    /// Runs until a solution or the deadline; requires a finite deadline.
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: StateVec,
    pub parent: Option<usize>,
    pub control: Option<ControlVec>,
    pub duration: f64,
    /// Absolute time at which this state is reached from the root.
    pub arrival_time: f64,
}

/// Resumable RRT tree; node 0 is the root at the model's start state.
#[derive(Debug, Clone)]
pub struct MotionTree {
    pub nodes: Vec<TreeNode>,
}

impl MotionTree {
    pub fn new(root: StateVec) -> Self {
        MotionTree {
            nodes: vec![TreeNode {
                state: root,
                parent: None,
                control: None,
                duration: 0.0,
                arrival_time: 0.0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }
}

/// Per-constraint violation counts of one planning episode.
#[derive(Debug, Clone, Default)]
pub struct ViolationTally(pub Vec<u64>);

impl ViolationTally {
    fn new(n: usize) -> Self {
        ViolationTally(vec![0; n])
    }

    /// Index of the most-violated constraint; ties go to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let (best, &count) = self
            .0
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))?;
        (count > 0).then_some(best)
    }
}

#[derive(Debug)]
pub enum LowLevelOutcome {
    Solution(Trajectory),
    /// Budget exhausted (iterations or deadline). `c_max` is the index of
    /// the most-violated constraint, present iff any violation occurred.
    Exhausted {
        tree: MotionTree,
        c_max: Option<usize>,
        tally: ViolationTally,
    },
}

impl LowLevelOutcome {
    pub fn is_solution(&self) -> bool {
        matches!(self, LowLevelOutcome::Solution(_))
    }
}

/// Uniform sample over the state space; with probability `goal_bias` the
/// goal state instead (goal centers on the position dims, headings uniform,
/// everything else zero clamped into bounds).
pub fn sample_target(model: &RobotModel, cfg: &PlannerConfig, rng: &mut impl Rng) -> StateVec {
    if rng.gen::<f64>() < cfg.goal_bias {
        let mut x: Vec<f64> = model
            .state_space
            .dims
            .iter()
            .map(|d| if d.angular { 0.0 } else { 0.0f64.clamp(d.lo, d.hi) })
            .collect();
        for (body, goal) in model.bodies.iter().zip(&model.goals) {
            x[body.position_dims[0]] = goal.center.x;
            x[body.position_dims[1]] = goal.center.y;
        }
        for body in &model.bodies {
            x[body.heading_dim] = rng.gen_range(-PI..PI);
        }
        StateVec::from_slice(&x)
    } else {
        let x: Vec<f64> = model
            .state_space
            .dims
            .iter()
            .map(|d| {
                if d.angular {
                    rng.gen_range(-PI..PI)
                } else {
                    rng.gen_range(d.lo..=d.hi)
                }
            })
            .collect();
        StateVec::from_slice(&x)
    }
}

/// True iff the sampled target equals the goal position sample (used by the
/// goal-bias statistics check).
pub fn is_goal_sample(model: &RobotModel, x: &StateVec) -> bool {
    model.bodies.iter().zip(&model.goals).all(|(b, g)| {
        x[b.position_dims[0]] == g.center.x && x[b.position_dims[1]] == g.center.y
    })
}

fn nearest(tree: &MotionTree, model: &RobotModel, target: &StateVec, w: &MetricWeights) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, node) in tree.nodes.iter().enumerate() {
        let d = model.distance(node.state.as_slice(), target.as_slice(), w);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

struct ObstacleSet<'a> {
    polys: &'a [ConvexPolygon],
    centers: Vec<Point>,
    radii: Vec<f64>,
}

impl<'a> ObstacleSet<'a> {
    fn new(polys: &'a [ConvexPolygon]) -> Self {
        ObstacleSet {
            polys,
            centers: polys.iter().map(|p| p.centroid()).collect(),
            radii: polys.iter().map(|p| p.circumradius()).collect(),
        }
    }

    fn hits(&self, poly: &ConvexPolygon, center: Point, radius: f64) -> bool {
        for i in 0..self.polys.len() {
            if center.dist(self.centers[i]) > radius + self.radii[i] {
                continue;
            }
            if polygons_intersect(poly, &self.polys[i]) {
                return true;
            }
        }
        false
    }
}

enum Reject {
    Static,
    Constraint(usize),
}

fn validate_samples(
    model: &RobotModel,
    workspace: &Workspace,
    obstacles: &ObstacleSet,
    constraints: &[Constraint],
    samples: &[(f64, StateVec)],
) -> Result<(), Reject> {
    for (_, state) in samples {
        if !model.state_space.contains(state.as_slice()) {
            return Err(Reject::Static);
        }
        let mut polys = Vec::with_capacity(model.bodies.len());
        for b in &model.bodies {
            let pose = b.pose_of(state.as_slice());
            let poly = footprint(b.body, pose);
            if !inside_workspace(&poly, workspace) {
                return Err(Reject::Static);
            }
            if obstacles.hits(&poly, Point::new(pose.x, pose.y), b.body.circumradius()) {
                return Err(Reject::Static);
            }
            polys.push(poly);
        }
        // Meta-robots must not collide with themselves.
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                if polygons_intersect(&polys[i], &polys[j]) {
                    return Err(Reject::Static);
                }
            }
        }
    }
    if let Some(ci) = violated_constraint_in_samples(&model.bodies, samples, constraints) {
        return Err(Reject::Constraint(ci));
    }
    Ok(())
}

/// Constrained kinodynamic RRT (one planning episode).
///
/// Resumes `seed_tree` when given one; a seed tree must have been grown for
/// the same model under the same constraint set, otherwise previously
/// accepted edges could violate the new constraints.
#[allow(clippy::too_many_arguments)]
pub fn cstr_plan(
    model: &Arc<RobotModel>,
    workspace: &Workspace,
    obstacles: &[ConvexPolygon],
    constraints: &[Constraint],
    seed_tree: Option<MotionTree>,
    budget: IterBudget,
    deadline: Deadline,
    cfg: &PlannerConfig,
    rng: &mut impl Rng,
) -> LowLevelOutcome {
    assert!(
        !matches!(budget, IterBudget::Unbounded) || deadline.is_finite(),
        "unbounded planning requires a finite deadline"
    );
    let mut tree = seed_tree.unwrap_or_else(|| MotionTree::new(model.start.clone()));
    debug_assert_eq!(tree.root().state.dim(), model.state_dim());
    let obstacle_set = ObstacleSet::new(obstacles);
    let mut tally = ViolationTally::new(constraints.len());

    let mut it: u64 = 0;
    loop {
        match budget {
            IterBudget::Bounded(n) if it >= n => break,
            _ => {}
        }
        if deadline.expired() {
            break;
        }
        it += 1;

        let target = sample_target(model, cfg, rng);
        let near = nearest(&tree, model, &target, &cfg.weights);

        let control: Vec<f64> = model
            .control_space
            .dims
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        let k = rng.gen_range(1..=cfg.max_duration_steps);
        let duration = k as f64 * cfg.step;

        let motion = Motion {
            start: tree.nodes[near].state.as_slice(),
            control: &control,
            duration,
            start_time: tree.nodes[near].arrival_time,
        };
        let samples = sample_motion(model, &motion, cfg.dt, cfg.step);
        match validate_samples(model, workspace, &obstacle_set, constraints, &samples) {
            Err(Reject::Static) => continue,
            Err(Reject::Constraint(ci)) => {
                tally.0[ci] += 1;
                continue;
            }
            Ok(()) => {}
        }

        let new_state = samples.last().unwrap().1.clone();
        let arrival = tree.nodes[near].arrival_time + duration;
        let reaches_goal = model.satisfies_goal(new_state.as_slice());
        tree.nodes.push(TreeNode {
            state: new_state,
            parent: Some(near),
            control: Some(ControlVec::from_slice(&control)),
            duration,
            arrival_time: arrival,
        });
        if reaches_goal {
            let leaf = tree.len() - 1;
            return LowLevelOutcome::Solution(tree_to_trajectory(&tree, leaf, model.clone(), cfg.step));
        }
    }

    let c_max = tally.argmax();
    LowLevelOutcome::Exhausted { tree, c_max, tally }
}

/// Extract the root-to-leaf path as a trajectory.
pub fn tree_to_trajectory(
    tree: &MotionTree,
    leaf: usize,
    model: Arc<RobotModel>,
    step: f64,
) -> Trajectory {
    let mut segments = Vec::new();
    let mut at = leaf;
    while let Some(parent) = tree.nodes[at].parent {
        segments.push(Segment {
            control: tree.nodes[at].control.clone().expect("non-root node has a control"),
            duration: tree.nodes[at].duration,
        });
        at = parent;
    }
    segments.reverse();
    Trajectory::new(model, tree.root().state.clone(), segments, step)
}
