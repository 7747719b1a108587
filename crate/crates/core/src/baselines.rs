//! Baseline planners: centralized RRT and prioritized RRT.
//!
//! cRRT composes every robot into one meta-robot and plans in the joint
//! space; pRRT plans robots one at a time, treating every earlier robot's
//! trajectory as a timed obstacle. Both run the same low-level planner as
//! the conflict-based search and are subject to the same validation.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conflicts::{Constraint, Plan};
use crate::dynamics::RobotModel;
use crate::geometry::{ConvexPolygon, Workspace};
use crate::kcbs::{identity_slots, split_to_originals, ModelSlot, SolveConfig};
use crate::low_level::{cstr_plan, Deadline, IterBudget, LowLevelOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineFailure {
    #[error("deadline exceeded")]
    Timeout,
}

fn compose_all(models: &[Arc<RobotModel>], workspace: &Workspace) -> Vec<ModelSlot> {
    let mut slots = identity_slots(models);
    while slots.len() > 1 {
        slots = crate::kcbs::merge_slots(&slots, 0, 1, workspace);
    }
    slots
}

/// Centralized RRT: plan in the composite space of all robots, then split
/// the joint trajectory back into per-robot trajectories.
pub fn crrt_plan(
    models: &[Arc<RobotModel>],
    workspace: &Workspace,
    obstacles: &[ConvexPolygon],
    cfg: &SolveConfig,
) -> Result<Plan, BaselineFailure> {
    assert!(!models.is_empty());
    let deadline = Deadline::within(cfg.deadline);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let slots = compose_all(models, workspace);
    match cstr_plan(
        &slots[0].model,
        workspace,
        obstacles,
        &[],
        None,
        IterBudget::Unbounded,
        deadline,
        &cfg.planner,
        &mut rng,
    ) {
        LowLevelOutcome::Solution(t) => {
            Ok(split_to_originals(&slots, &[Arc::new(t)], models, cfg.planner.step))
        }
        LowLevelOutcome::Exhausted { .. } => Err(BaselineFailure::Timeout),
    }
}

/// Prioritized RRT: plan robots in `order`, each under constraints that
/// shadow all previously planned robots over a conservative horizon
/// (hold-at-end makes earlier robots permanent obstacles at their goals,
/// so the horizon extends past the sum of planned durations).
pub fn prrt_plan(
    models: &[Arc<RobotModel>],
    workspace: &Workspace,
    obstacles: &[ConvexPolygon],
    cfg: &SolveConfig,
    order: &[usize],
) -> Result<Plan, BaselineFailure> {
    assert_eq!(order.len(), models.len());
    {
        let mut seen = vec![false; models.len()];
        for &r in order {
            assert!(!seen[r], "order must be a permutation");
            seen[r] = true;
        }
    }
    let deadline = Deadline::within(cfg.deadline);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut planned: Vec<Option<Arc<crate::trajectory::Trajectory>>> = vec![None; models.len()];
    let mut planned_indices: Vec<usize> = Vec::new();

    for &r in order {
        let prior_sum: f64 = planned_indices
            .iter()
            .map(|&q| planned[q].as_ref().unwrap().duration())
            .sum();
        let horizon = cfg.planner.prrt_horizon_factor * prior_sum;
        let constraints: Vec<Constraint> = planned_indices
            .iter()
            .map(|&q| Constraint::new(r, q, 0.0, horizon, planned[q].clone().unwrap()))
            .collect();
        match cstr_plan(
            &models[r],
            workspace,
            obstacles,
            &constraints,
            None,
            IterBudget::Unbounded,
            deadline,
            &cfg.planner,
            &mut rng,
        ) {
            LowLevelOutcome::Solution(t) => {
                planned[r] = Some(Arc::new(t));
                planned_indices.push(r);
            }
            LowLevelOutcome::Exhausted { .. } => return Err(BaselineFailure::Timeout),
        }
    }
    Ok(Plan::new(planned.into_iter().map(|t| t.unwrap()).collect()))
}
