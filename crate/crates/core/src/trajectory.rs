//! Time-parameterized trajectories from piecewise-constant controls.
//!
//! All trajectories start at t = 0 and hold their final state forever
//! once the last segment ends. States at every integration step are
//! cached at construction, so `state_at` is a lookup plus at most one
//! partial RK4 step; plan validation makes millions of such calls.

use std::sync::Arc;

use crate::dynamics::{rk4_step, split_duration, ControlVec, RobotModel, StateVec};

/// One constant-control piece of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub control: ControlVec,
    pub duration: f64,
}

#[derive(Debug, Clone)]
struct CacheEntry {
    /// Absolute time of this state.
    t: f64,
    state: StateVec,
    /// Segment governing times immediately after `t` (clamped to last).
    segment: usize,
}

/// Immutable replayable trajectory with hold-at-end semantics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    model: Arc<RobotModel>,
    start: StateVec,
    segments: Vec<Segment>,
    step: f64,
    cache: Vec<CacheEntry>,
    total: f64,
}

impl Trajectory {
    /// Replay `segments` from `start` with integration step `step`,
    /// caching the state after every step.
    pub fn new(model: Arc<RobotModel>, start: StateVec, segments: Vec<Segment>, step: f64) -> Self {
        assert_eq!(start.dim(), model.state_dim());
        assert!(step > 0.0);
        debug_assert!(segments.iter().all(|s| s.duration > 0.0));
        let mut cache = Vec::new();
        let mut state = start.clone();
        let mut t = 0.0;
        cache.push(CacheEntry { t, state: state.clone(), segment: 0 });
        for (si, seg) in segments.iter().enumerate() {
            let (full, rem) = split_duration(seg.duration, step);
            let seg_end = t + seg.duration;
            for _ in 0..full {
                rk4_step(
                    &model.field,
                    &model.state_space,
                    &mut state.0,
                    seg.control.as_slice(),
                    step,
                );
                t += step;
                cache.push(CacheEntry { t, state: state.clone(), segment: si });
            }
            if rem > 0.0 {
                rk4_step(
                    &model.field,
                    &model.state_space,
                    &mut state.0,
                    seg.control.as_slice(),
                    rem,
                );
                cache.push(CacheEntry { t: seg_end, state: state.clone(), segment: si });
            } else if let Some(last) = cache.last_mut() {
                // Land the boundary exactly on the segment-duration sum so
                // state_at(duration()) always hits the hold-at-end branch.
                last.t = seg_end;
            }
            t = seg_end;
        }
        let total = t;
        Trajectory { model, start, segments, step, cache, total }
    }

    pub fn model(&self) -> &Arc<RobotModel> {
        &self.model
    }

    pub fn start_state(&self) -> &StateVec {
        &self.start
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Sum of segment durations.
    pub fn duration(&self) -> f64 {
        self.total
    }

    /// Final state, held for all times at or beyond `duration()`.
    pub fn final_state(&self) -> &StateVec {
        &self.cache.last().unwrap().state
    }

    /// State at absolute time `time`; exact cache hit or cached state plus
    /// one partial integration step.
    pub fn state_at(&self, time: f64) -> StateVec {
        assert!(time >= 0.0);
        if time >= self.total {
            return self.final_state().clone();
        }
        // Last cache entry with t <= time.
        let idx = self.cache.partition_point(|e| e.t <= time) - 1;
        let entry = &self.cache[idx];
        let offset = time - entry.t;
        if offset <= self.step * 1e-9 {
            return entry.state.clone();
        }
        let seg = &self.segments[entry.segment.min(self.segments.len() - 1)];
        let mut state = entry.state.clone();
        rk4_step(
            &self.model.field,
            &self.model.state_space,
            &mut state.0,
            seg.control.as_slice(),
            offset,
        );
        state
    }

    /// States at 0, dt, 2dt, ... plus a final sample exactly at `horizon`,
    /// using hold-at-end beyond the trajectory's own duration.
    pub fn sample_times(&self, horizon: f64, dt: f64) -> Vec<(f64, StateVec)> {
        time_grid(horizon, dt)
            .into_iter()
            .map(|t| (t, self.state_at(t)))
            .collect()
    }
}

/// The sampling grid 0, dt, 2dt, ... with a final point exactly at `horizon`.
pub fn time_grid(horizon: f64, dt: f64) -> Vec<f64> {
    assert!(dt > 0.0 && horizon >= 0.0);
    let tol = 1e-9 * horizon.max(1.0);
    let mut ts = Vec::with_capacity((horizon / dt) as usize + 2);
    let mut i = 0u64;
    loop {
        let t = i as f64 * dt;
        if t < horizon - tol {
            ts.push(t);
            i += 1;
        } else {
            break;
        }
    }
    ts.push(horizon);
    ts
}
