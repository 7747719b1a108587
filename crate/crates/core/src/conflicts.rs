//! Plan validation over continuous time and moving-obstacle constraints.
//!
//! A conflict is a maximal interval during which two robots' bodies
//! intersect along their trajectories. Resolving a conflict constrains
//! one robot to avoid the other's body, replayed from the other's
//! trajectory as a time-dependent obstacle over that interval.

use std::sync::Arc;

use thiserror::Error;

use crate::dynamics::{rk4_step, split_duration, BodyPlacement, RobotModel, StateVec};
use crate::geometry::{footprint, polygons_intersect, ConvexPolygon, Point};
use crate::trajectory::{time_grid, Trajectory};

/// Two robots' bodies intersect throughout [t_start, t_end] (endpoints are
/// detection-grid samples; a single colliding sample gives t_start == t_end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conflict {
    pub i: usize,
    pub j: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// Requirement on `robot` to avoid `other`'s body over [t_start, t_end],
/// with `other`'s motion frozen as the shadow trajectory.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub robot: usize,
    pub other: usize,
    pub t_start: f64,
    pub t_end: f64,
    shadow: Arc<Trajectory>,
}

impl Constraint {
    pub fn new(robot: usize, other: usize, t_start: f64, t_end: f64, shadow: Arc<Trajectory>) -> Self {
        Constraint { robot, other, t_start, t_end, shadow }
    }

    pub fn shadow(&self) -> &Arc<Trajectory> {
        &self.shadow
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }

    /// Body polygons of the shadowed robot at absolute time `t`.
    pub fn shadow_polygons_at(&self, t: f64) -> Vec<ConvexPolygon> {
        let state = self.shadow.state_at(t);
        self.shadow
            .model()
            .bodies
            .iter()
            .map(|b| footprint(b.body, b.pose_of(state.as_slice())))
            .collect()
    }
}

/// One trajectory per robot, indexed consistently with the model list.
#[derive(Debug, Clone)]
pub struct Plan {
    pub trajectories: Vec<Arc<Trajectory>>,
}

impl Plan {
    pub fn new(trajectories: Vec<Arc<Trajectory>>) -> Self {
        Plan { trajectories }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Sum of trajectory durations (the constraint-tree node cost).
    pub fn cost(&self) -> f64 {
        self.trajectories.iter().map(|t| t.duration()).sum()
    }

    /// Longest single trajectory duration (the plan horizon t_f).
    pub fn horizon(&self) -> f64 {
        self.trajectories
            .iter()
            .map(|t| t.duration())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanViolation {
    #[error("robot {robot} collides with an obstacle at t = {time}")]
    ObstacleCollision { robot: usize, time: f64 },
}

struct SampledBody {
    polygon: ConvexPolygon,
    center: Point,
    radius: f64,
}

fn sampled_bodies(model: &RobotModel, state: &StateVec) -> Vec<SampledBody> {
    model
        .bodies
        .iter()
        .map(|b| {
            let pose = b.pose_of(state.as_slice());
            SampledBody {
                polygon: footprint(b.body, pose),
                center: Point::new(pose.x, pose.y),
                radius: b.body.circumradius(),
            }
        })
        .collect()
}

fn bodies_intersect(a: &[SampledBody], b: &[SampledBody]) -> bool {
    for pa in a {
        for pb in b {
            if pa.center.dist(pb.center) > pa.radius + pb.radius {
                continue;
            }
            if polygons_intersect(&pa.polygon, &pb.polygon) {
                return true;
            }
        }
    }
    false
}

/// Sample all trajectories on the grid 0, dt, ..., t_f (hold-at-end for the
/// shorter ones) and extract every pairwise conflict as a maximal run of
/// colliding samples. The result is sorted by start time, then (i, j);
/// intervals of a fixed pair are disjoint. Obstacle contact is a hard
/// error: a well-formed low-level plan never contains one.
pub fn validate_plan(
    plan: &Plan,
    obstacles: &[ConvexPolygon],
    dt: f64,
) -> Result<Vec<Conflict>, PlanViolation> {
    assert!(dt > 0.0);
    let grid = time_grid(plan.horizon(), dt);
    let k = plan.len();

    // Footprints of every robot at every sample.
    let mut frames: Vec<Vec<Vec<SampledBody>>> = Vec::with_capacity(k);
    for (r, traj) in plan.trajectories.iter().enumerate() {
        let mut per_time = Vec::with_capacity(grid.len());
        for &t in &grid {
            let state = traj.state_at(t);
            let bodies = sampled_bodies(traj.model(), &state);
            for sb in &bodies {
                for obstacle in obstacles {
                    if polygons_intersect(&sb.polygon, obstacle) {
                        return Err(PlanViolation::ObstacleCollision { robot: r, time: t });
                    }
                }
            }
            per_time.push(bodies);
        }
        frames.push(per_time);
    }

    let mut conflicts = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let mut run_start: Option<usize> = None;
            for (ti, _) in grid.iter().enumerate() {
                let colliding = bodies_intersect(&frames[i][ti], &frames[j][ti]);
                match (colliding, run_start) {
                    (true, None) => run_start = Some(ti),
                    (false, Some(s)) => {
                        conflicts.push(Conflict { i, j, t_start: grid[s], t_end: grid[ti - 1] });
                        run_start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = run_start {
                conflicts.push(Conflict { i, j, t_start: grid[s], t_end: *grid.last().unwrap() });
            }
        }
    }
    conflicts.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    Ok(conflicts)
}

/// The dual pair of constraints induced by a conflict: each robot must
/// avoid the other's current trajectory over the conflict interval.
pub fn make_constraints(k: &Conflict, plan: &Plan) -> (Constraint, Constraint) {
    let on_i = Constraint::new(k.i, k.j, k.t_start, k.t_end, plan.trajectories[k.j].clone());
    let on_j = Constraint::new(k.j, k.i, k.t_start, k.t_end, plan.trajectories[k.i].clone());
    (on_i, on_j)
}

/// A constant-control motion starting at an absolute time along its branch.
#[derive(Debug, Clone, Copy)]
pub struct Motion<'a> {
    pub start: &'a [f64],
    pub control: &'a [f64],
    pub duration: f64,
    pub start_time: f64,
}

/// Discretize a motion into absolute times: its start, every multiple of
/// `dt` strictly inside, and its end; states come from the fixed-step
/// integration grid plus at most one partial step each.
pub fn sample_motion(
    model: &RobotModel,
    motion: &Motion,
    dt: f64,
    step: f64,
) -> Vec<(f64, StateVec)> {
    assert!(dt > 0.0 && step > 0.0 && motion.start_time >= 0.0);
    let (full, rem) = split_duration(motion.duration, step);
    let mut grid_states: Vec<StateVec> = Vec::with_capacity(full + 2);
    grid_states.push(StateVec::from_slice(motion.start));
    let mut state = grid_states[0].clone();
    for _ in 0..full {
        rk4_step(&model.field, &model.state_space, &mut state.0, motion.control, step);
        grid_states.push(state.clone());
    }
    let end_state = if rem > 0.0 {
        rk4_step(&model.field, &model.state_space, &mut state.0, motion.control, rem);
        state.clone()
    } else {
        grid_states.last().unwrap().clone()
    };

    let end_time = motion.start_time + motion.duration;
    let tol = 1e-9 * end_time.max(1.0);
    let state_at_rel = |rel: f64| -> StateVec {
        let idx = (((rel / step) + 1e-9).floor() as usize).min(full);
        let partial = rel - idx as f64 * step;
        if partial <= step * 1e-9 {
            grid_states[idx].clone()
        } else {
            let mut s = grid_states[idx].clone();
            rk4_step(&model.field, &model.state_space, &mut s.0, motion.control, partial);
            s
        }
    };

    let mut out = vec![(motion.start_time, grid_states[0].clone())];
    let mut m = (motion.start_time / dt).floor() as u64;
    while m as f64 * dt <= motion.start_time + tol {
        m += 1;
    }
    loop {
        let t = m as f64 * dt;
        if t >= end_time - tol {
            break;
        }
        out.push((t, state_at_rel(t - motion.start_time)));
        m += 1;
    }
    out.push((end_time, end_state));
    out
}

/// First constraint violated by the already-sampled motion: earliest sample
/// time wins, ties broken by constraint order. Returns an index into
/// `constraints`.
pub fn violated_constraint_in_samples(
    bodies: &[BodyPlacement],
    samples: &[(f64, StateVec)],
    constraints: &[Constraint],
) -> Option<usize> {
    for (t, state) in samples {
        let own: Vec<SampledBody> = bodies
            .iter()
            .map(|b| {
                let pose = b.pose_of(state.as_slice());
                SampledBody {
                    polygon: footprint(b.body, pose),
                    center: Point::new(pose.x, pose.y),
                    radius: b.body.circumradius(),
                }
            })
            .collect();
        for (ci, c) in constraints.iter().enumerate() {
            if !c.active_at(*t) {
                continue;
            }
            let shadow_state = c.shadow.state_at(*t);
            let shadow = sampled_bodies(c.shadow.model(), &shadow_state);
            if bodies_intersect(&own, &shadow) {
                return Some(ci);
            }
        }
    }
    None
}

/// Discretize the motion at resolution `dt` and return the first violated
/// constraint, if any.
pub fn motion_violates_constraints(
    model: &RobotModel,
    motion: &Motion,
    constraints: &[Constraint],
    dt: f64,
    step: f64,
) -> Option<usize> {
    if constraints.is_empty() {
        return None;
    }
    let samples = sample_motion(model, motion, dt, step);
    violated_constraint_in_samples(&model.bodies, &samples, constraints)
}
