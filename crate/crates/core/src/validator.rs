//! Independent post-hoc validation of complete solutions.
//!
//! Planners accept plans on their own detection grid; this module
//! re-checks a finished plan at an arbitrary (typically much finer)
//! resolution against the true robot bodies: no robot-robot collision,
//! no obstacle contact, every footprint inside the workspace, every
//! robot parked inside its goal disc.

use std::sync::Arc;

use thiserror::Error;

use crate::conflicts::{validate_plan, Conflict, Plan, PlanViolation};
use crate::dynamics::RobotModel;
use crate::geometry::{footprint, inside_workspace, ConvexPolygon, Workspace};
use crate::trajectory::{time_grid, Trajectory};

#[derive(Debug, Error)]
pub enum SolutionViolation {
    #[error("robot-robot conflicts remain: {0:?}")]
    Conflicts(Vec<Conflict>),
    #[error(transparent)]
    Obstacle(#[from] PlanViolation),
    #[error("robot {robot} leaves the workspace at t = {time}")]
    OutOfWorkspace { robot: usize, time: f64 },
    #[error("robot {robot} does not end inside its goal disc")]
    GoalMissed { robot: usize },
}

/// Rebuild the plan's trajectories on `models` (same segments and starts).
/// Used to swap planning bodies (e.g. margin-inflated) for the true ones
/// before validation or export.
pub fn rebase_plan(plan: &Plan, models: &[Arc<RobotModel>], step: f64) -> Plan {
    assert_eq!(plan.len(), models.len());
    let trajectories = plan
        .trajectories
        .iter()
        .zip(models)
        .map(|(traj, model)| {
            assert_eq!(traj.start_state().dim(), model.state_dim());
            Arc::new(Trajectory::new(
                model.clone(),
                traj.start_state().clone(),
                traj.segments().to_vec(),
                step,
            ))
        })
        .collect();
    Plan::new(trajectories)
}

/// Check a complete solution at resolution `dt`.
pub fn validate_solution(
    plan: &Plan,
    workspace: &Workspace,
    obstacles: &[ConvexPolygon],
    dt: f64,
) -> Result<(), SolutionViolation> {
    let grid = time_grid(plan.horizon(), dt);
    for (r, traj) in plan.trajectories.iter().enumerate() {
        let model = traj.model();
        for &t in &grid {
            let state = traj.state_at(t);
            for b in &model.bodies {
                let poly = footprint(b.body, b.pose_of(state.as_slice()));
                if !inside_workspace(&poly, workspace) {
                    return Err(SolutionViolation::OutOfWorkspace { robot: r, time: t });
                }
            }
        }
        if !model.satisfies_goal(traj.final_state().as_slice()) {
            return Err(SolutionViolation::GoalMissed { robot: r });
        }
    }
    let conflicts = validate_plan(plan, obstacles, dt)?;
    if !conflicts.is_empty() {
        return Err(SolutionViolation::Conflicts(conflicts));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflicts::Plan;
    use crate::dynamics::{
        BodyPlacement, ControlSpace, ControlVec, DimBound, GoalDisc, StateSpace, StateVec,
        VectorFieldSpec,
    };
    use crate::geometry::{BodySpec, Point};
    use crate::trajectory::Segment;
    use std::f64::consts::FRAC_PI_4;

    fn model(ws: &Workspace, start: [f64; 5], goal: (f64, f64)) -> Arc<RobotModel> {
        RobotModel::new(
            "car".into(),
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
    fn goal_miss_and_workspace_exit_are_detected() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let m = model(&ws, [2.0, 5.0, 0.0, 1.0, 0.0], (8.0, 5.0));
        // Parked at the start: goal missed.
        let parked = Plan::new(vec![Arc::new(Trajectory::new(
            m.clone(),
            m.start.clone(),
            vec![],
            0.05,
        ))]);
        assert!(matches!(
            validate_solution(&parked, &ws, &[], 0.01),
            Err(SolutionViolation::GoalMissed { robot: 0 })
        ));

        // Driving straight for 10 s leaves the 10 m workspace.
        let runaway = Plan::new(vec![Arc::new(Trajectory::new(
            m.clone(),
            m.start.clone(),
            vec![Segment { control: ControlVec::from_slice(&[0.0, 0.0]), duration: 10.0 }],
            0.05,
        ))]);
        assert!(matches!(
            validate_solution(&runaway, &ws, &[], 0.01),
            Err(SolutionViolation::OutOfWorkspace { robot: 0, .. })
        ));
    }

    #[test]
    fn rebase_swaps_bodies_without_changing_motion() {
        let ws = Workspace::new(0.0, 10.0, 0.0, 10.0).unwrap();
        let planning = model(&ws, [2.0, 5.0, 0.0, 1.0, 0.0], (8.0, 5.0));
        let traj = Trajectory::new(
            planning.clone(),
            planning.start.clone(),
            vec![Segment { control: ControlVec::from_slice(&[0.1, 0.05]), duration: 2.0 }],
            0.05,
        );
        let plan = Plan::new(vec![Arc::new(traj)]);
        let rebased = rebase_plan(&plan, &[planning.clone()], 0.05);
        let a = plan.trajectories[0].state_at(1.3);
        let b = rebased.trajectories[0].state_at(1.3);
        assert_eq!(a, b);
    }
}
