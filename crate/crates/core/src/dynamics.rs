//! State/control spaces, car vector fields and fixed-step RK4 propagation.
//!
//! Two car models are provided: a second-order car with a 5-dimensional
//! state (x, y, heading, velocity, steering angle) and acceleration /
//! steering-rate inputs, and a kinematic car with a 3-dimensional state
//! driving at constant forward speed under a steering-angle input.
//! Composite fields stack several cars into one meta-robot; components
//! evolve independently.

use std::f64::consts::PI;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::geometry::{BodySpec, Point, Pose, Workspace};

/// Wrap an angle into [-pi, pi).
pub fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// State vector; per-dimension meaning is defined by the owning space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec(pub SmallVec<[f64; 8]>);

/// Control (input) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVec(pub SmallVec<[f64; 4]>);

impl StateVec {
    pub fn from_slice(v: &[f64]) -> Self {
        StateVec(SmallVec::from_slice(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl ControlVec {
    pub fn from_slice(v: &[f64]) -> Self {
        ControlVec(SmallVec::from_slice(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for StateVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::Index<usize> for ControlVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Bounds and angular flag for one state dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimBound {
    pub lo: f64,
    pub hi: f64,
    pub angular: bool,
}

impl DimBound {
    pub fn linear(lo: f64, hi: f64) -> Self {
        DimBound { lo, hi, angular: false }
    }

    pub fn angular() -> Self {
        DimBound { lo: -PI, hi: PI, angular: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub dims: Vec<DimBound>,
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// True iff every non-angular coordinate is within bounds. Angular
    /// coordinates are always in range after wrapping.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dims.len());
        self.dims
            .iter()
            .zip(x)
            .all(|(d, &v)| d.angular || (v >= d.lo && v <= d.hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSpace {
    pub dims: Vec<(f64, f64)>,
}

impl ControlSpace {
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        self.dims.len() == u.len()
            && self.dims.iter().zip(u).all(|(&(lo, hi), &v)| v >= lo && v <= hi)
    }
}

/// Vector field of a robot. Composite fields are kept flat: components
/// are always primitive car kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorFieldSpec {
    /// x' = v cos(th), y' = v sin(th), th' = (v/l) tan(phi), v' = u0, phi' = u1.
    SecondOrderCar { wheelbase: f64 },
    /// Constant forward speed; the single input is the steering angle:
    /// x' = s cos(th), y' = s sin(th), th' = (s/l) tan(u0).
    KinematicCar { wheelbase: f64, speed: f64 },
    Composite(Vec<VectorFieldSpec>),
}

impl VectorFieldSpec {
    pub fn state_dim(&self) -> usize {
        match self {
            VectorFieldSpec::SecondOrderCar { .. } => 5,
            VectorFieldSpec::KinematicCar { .. } => 3,
            VectorFieldSpec::Composite(parts) => parts.iter().map(|p| p.state_dim()).sum(),
        }
    }

    pub fn control_dim(&self) -> usize {
        match self {
            VectorFieldSpec::SecondOrderCar { .. } => 2,
            VectorFieldSpec::KinematicCar { .. } => 1,
            VectorFieldSpec::Composite(parts) => parts.iter().map(|p| p.control_dim()).sum(),
        }
    }

    /// Flat list of primitive components (self for primitive kinds).
    pub fn components(&self) -> Vec<VectorFieldSpec> {
        match self {
            VectorFieldSpec::Composite(parts) => parts.clone(),
            other => vec![other.clone()],
        }
    }

    fn eval_into(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        match self {
            VectorFieldSpec::SecondOrderCar { wheelbase } => {
                let (sin, cos) = x[2].sin_cos();
                let v = x[3];
                dx[0] = v * cos;
                dx[1] = v * sin;
                dx[2] = v / wheelbase * x[4].tan();
                dx[3] = u[0];
                dx[4] = u[1];
            }
            VectorFieldSpec::KinematicCar { wheelbase, speed } => {
                let (sin, cos) = x[2].sin_cos();
                dx[0] = speed * cos;
                dx[1] = speed * sin;
                dx[2] = speed / wheelbase * u[0].tan();
            }
            VectorFieldSpec::Composite(parts) => {
                let mut sx = 0;
                let mut su = 0;
                for part in parts {
                    let (nx, nu) = (part.state_dim(), part.control_dim());
                    part.eval_into(&x[sx..sx + nx], &u[su..su + nu], &mut dx[sx..sx + nx]);
                    sx += nx;
                    su += nu;
                }
            }
        }
    }
}

/// Time derivative of the state under `field` at (x, u).
pub fn eval_field(field: &VectorFieldSpec, x: &[f64], u: &[f64]) -> StateVec {
    assert_eq!(x.len(), field.state_dim(), "state dimension mismatch");
    assert_eq!(u.len(), field.control_dim(), "control dimension mismatch");
    let mut dx = SmallVec::from_elem(0.0, x.len());
    field.eval_into(x, u, &mut dx);
    StateVec(dx)
}

/// One classical RK4 step of size `h`, wrapping angular dims afterwards.
pub fn rk4_step(field: &VectorFieldSpec, space: &StateSpace, x: &mut [f64], u: &[f64], h: f64) {
    let n = x.len();
    let mut k1 = SmallVec::<[f64; 8]>::from_elem(0.0, n);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = SmallVec::<[f64; 8]>::from_elem(0.0, n);

    field.eval_into(x, u, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    field.eval_into(&tmp, u, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    field.eval_into(&tmp, u, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    field.eval_into(&tmp, u, &mut k4);
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (i, d) in space.dims.iter().enumerate() {
        if d.angular {
            x[i] = wrap_angle(x[i]);
        }
    }
}

/// Number of full integration steps plus an optional final partial step
/// needed to cover `duration` at step size `step`.
pub(crate) fn split_duration(duration: f64, step: f64) -> (usize, f64) {
    let n = (duration / step).floor() as usize;
    let rem = duration - n as f64 * step;
    if rem > step * 1e-9 {
        (n, rem)
    } else {
        (n, 0.0)
    }
}

/// Fixed-step RK4 over `duration`; the final partial step lands exactly on
/// `duration`. State bounds are not enforced here.
pub fn propagate(
    field: &VectorFieldSpec,
    space: &StateSpace,
    x0: &[f64],
    u: &[f64],
    duration: f64,
    step: f64,
) -> StateVec {
    assert!(duration >= 0.0 && step > 0.0);
    let mut x = SmallVec::from_slice(x0);
    let (n, rem) = split_duration(duration, step);
    for _ in 0..n {
        rk4_step(field, space, &mut x, u, step);
    }
    if rem > 0.0 {
        rk4_step(field, space, &mut x, u, rem);
    }
    StateVec(x)
}

/// Disc goal region on the workspace position of one body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalDisc {
    pub center: Point,
    pub radius: f64,
}

/// Placement of one rigid body within a (possibly composite) state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyPlacement {
    pub body: BodySpec,
    pub position_dims: [usize; 2],
    pub heading_dim: usize,
}

impl BodyPlacement {
    pub fn pose_of(&self, x: &[f64]) -> Pose {
        Pose {
            x: x[self.position_dims[0]],
            y: x[self.position_dims[1]],
            theta: x[self.heading_dim],
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("start state has dimension {got}, state space has {want}")]
    StartDim { got: usize, want: usize },
    #[error("start state coordinate {0} is out of bounds")]
    StartOutOfBounds(usize),
    #[error("goal radius must be positive, got {0}")]
    BadGoalRadius(f64),
    #[error("goal disc for body {0} is not inside the workspace")]
    GoalOutsideWorkspace(usize),
    #[error("model needs one goal per body: {bodies} bodies, {goals} goals")]
    GoalCount { bodies: usize, goals: usize },
    #[error("field dimensions ({fs} state / {fc} control) do not match spaces ({ss} / {cs})")]
    FieldDims { fs: usize, fc: usize, ss: usize, cs: usize },
}

/// Everything the planner needs to know about one robot (or meta-robot):
/// spaces, dynamics, bodies, start state and goal discs (one per body;
/// all must be reached simultaneously).
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub state_space: StateSpace,
    pub control_space: ControlSpace,
    pub field: VectorFieldSpec,
    pub bodies: Vec<BodyPlacement>,
    pub start: StateVec,
    pub goals: Vec<GoalDisc>,
    /// State dims that are neither a position nor a heading of any body.
    other_dims: Vec<usize>,
}

impl RobotModel {
    pub fn new(
        name: String,
        state_space: StateSpace,
        control_space: ControlSpace,
        field: VectorFieldSpec,
        bodies: Vec<BodyPlacement>,
        start: StateVec,
        goals: Vec<GoalDisc>,
        workspace: &Workspace,
    ) -> Result<Arc<Self>, ModelError> {
        if start.dim() != state_space.dim() {
            return Err(ModelError::StartDim { got: start.dim(), want: state_space.dim() });
        }
        if field.state_dim() != state_space.dim() || field.control_dim() != control_space.dim() {
            return Err(ModelError::FieldDims {
                fs: field.state_dim(),
                fc: field.control_dim(),
                ss: state_space.dim(),
                cs: control_space.dim(),
            });
        }
        for (i, (d, &v)) in state_space.dims.iter().zip(start.as_slice()).enumerate() {
            if !d.angular && !(v >= d.lo && v <= d.hi) {
                return Err(ModelError::StartOutOfBounds(i));
            }
        }
        if goals.len() != bodies.len() {
            return Err(ModelError::GoalCount { bodies: bodies.len(), goals: goals.len() });
        }
        for (i, g) in goals.iter().enumerate() {
            if g.radius <= 0.0 {
                return Err(ModelError::BadGoalRadius(g.radius));
            }
            let inside = g.center.x - g.radius >= workspace.xmin
                && g.center.x + g.radius <= workspace.xmax
                && g.center.y - g.radius >= workspace.ymin
                && g.center.y + g.radius <= workspace.ymax;
            if !inside {
                return Err(ModelError::GoalOutsideWorkspace(i));
            }
        }
        let mut covered = vec![false; state_space.dim()];
        for b in &bodies {
            covered[b.position_dims[0]] = true;
            covered[b.position_dims[1]] = true;
            covered[b.heading_dim] = true;
        }
        let other_dims = (0..state_space.dim()).filter(|&i| !covered[i]).collect();
        Ok(Arc::new(RobotModel {
            name,
            state_space,
            control_space,
            field,
            bodies,
            start,
            goals,
            other_dims,
        }))
    }

    pub fn state_dim(&self) -> usize {
        self.state_space.dim()
    }

    pub fn control_dim(&self) -> usize {
        self.control_space.dim()
    }

    pub fn propagate(&self, x0: &[f64], u: &[f64], duration: f64, step: f64) -> StateVec {
        propagate(&self.field, &self.state_space, x0, u, duration, step)
    }

    /// True iff every body's position lies within its goal disc.
    pub fn satisfies_goal(&self, x: &[f64]) -> bool {
        self.bodies.iter().zip(&self.goals).all(|(b, g)| {
            let p = Point::new(x[b.position_dims[0]], x[b.position_dims[1]]);
            p.dist(g.center) <= g.radius
        })
    }

    /// Weighted planning metric: Euclidean on each body position, shortest
    /// angular arc on each heading, absolute difference elsewhere.
    pub fn distance(&self, a: &[f64], b: &[f64], w: &MetricWeights) -> f64 {
        let mut d = 0.0;
        for body in &self.bodies {
            let [ix, iy] = body.position_dims;
            d += w.position * ((a[ix] - b[ix]).powi(2) + (a[iy] - b[iy]).powi(2)).sqrt();
            let dh = wrap_angle(a[body.heading_dim] - b[body.heading_dim]).abs();
            d += w.heading * dh;
        }
        for &i in &self.other_dims {
            d += w.other * (a[i] - b[i]).abs();
        }
        d
    }
}

/// Weights of the planning metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricWeights {
    pub position: f64,
    pub heading: f64,
    pub other: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        MetricWeights { position: 1.0, heading: 0.5, other: 0.2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    pub(crate) fn car_space(ws: &Workspace) -> StateSpace {
        StateSpace {
            dims: vec![
                DimBound::linear(ws.xmin, ws.xmax),
                DimBound::linear(ws.ymin, ws.ymax),
                DimBound::angular(),
                DimBound::linear(-1.0, 2.0),
                DimBound::linear(-FRAC_PI_4, FRAC_PI_4),
            ],
        }
    }

    fn big_space() -> StateSpace {
        let ws = Workspace::new(-1e6, 1e6, -1e6, 1e6).unwrap();
        car_space(&ws)
    }

    #[test]
    fn second_order_car_field_values() {
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        let dx = eval_field(&f, &[0.0, 0.0, 0.0, 1.0, 0.0], &[0.0, 0.0]);
        assert_eq!(dx.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0]);

        let dx = eval_field(&f, &[0.0, 0.0, FRAC_PI_2, 2.0, 0.0], &[0.5, -0.1]);
        assert_abs_diff_eq!(dx[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dx[1], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dx[2], 0.0, epsilon = 1e-9);
        assert_eq!(dx[3], 0.5);
        assert_eq!(dx[4], -0.1);

        // theta' = (v/l) tan(phi) evaluated independently.
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 1.0 };
        let dx = eval_field(&f, &[0.0, 0.0, 0.0, 1.0, FRAC_PI_4], &[0.0, 0.0]);
        assert_abs_diff_eq!(dx[2], FRAC_PI_4.tan(), epsilon = 1e-12);
        assert_abs_diff_eq!(dx[2], 1.0, epsilon = 1e-9);
    }

    #[test]
    #[should_panic(expected = "state dimension mismatch")]
    fn field_rejects_dimension_mismatch() {
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        eval_field(&f, &[0.0, 0.0, 0.0], &[0.0, 0.0]);
    }

    #[test]
    fn straight_line_is_exact() {
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        let x = propagate(&f, &big_space(), &[0.0, 0.0, 0.0, 1.0, 0.0], &[0.0, 0.0], 2.0, 0.05);
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[3], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_acceleration_matches_closed_form() {
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        let x = propagate(&f, &big_space(), &[0.0, 0.0, 0.0, 0.0, 0.0], &[1.0, 0.0], 2.0, 0.05);
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-6); // 0.5 * a * t^2
        assert_abs_diff_eq!(x[3], 2.0, epsilon = 1e-6); // a * t
    }

    #[test]
    fn kinematic_car_closes_a_circle() {
        // Constant steering: theta' = tan(phi), so one full turn takes 2*pi/tan(phi).
        let f = VectorFieldSpec::KinematicCar { wheelbase: 1.0, speed: 1.0 };
        let space = StateSpace {
            dims: vec![
                DimBound::linear(-1e6, 1e6),
                DimBound::linear(-1e6, 1e6),
                DimBound::angular(),
            ],
        };
        let phi: f64 = 0.5;
        let period = 2.0 * PI / phi.tan();
        let x = propagate(&f, &space, &[0.0, 0.0, 0.0], &[phi], period, 1e-3);
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-4);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-4);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        let x0 = [0.0, 0.0, 0.2, 1.0, 0.3];
        let u = [0.3, 0.2];
        let endpoint = |h: f64| propagate(&f, &big_space(), &x0, &u, 1.0, h);
        let diff = |a: &StateVec, b: &StateVec| -> f64 {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let (c1, c2, c3) = (endpoint(0.1), endpoint(0.05), endpoint(0.025));
        let ratio = diff(&c1, &c2) / diff(&c2, &c3);
        assert!((8.0..=32.0).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn composite_equals_independent_propagation() {
        let fa = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
        let fb = VectorFieldSpec::KinematicCar { wheelbase: 0.5, speed: 1.0 };
        let composite = VectorFieldSpec::Composite(vec![fa.clone(), fb.clone()]);
        let space_a = big_space();
        let space_b = StateSpace {
            dims: vec![
                DimBound::linear(-1e6, 1e6),
                DimBound::linear(-1e6, 1e6),
                DimBound::angular(),
            ],
        };
        let mut dims = space_a.dims.clone();
        dims.extend(space_b.dims.clone());
        let space_c = StateSpace { dims };

        let xa = [0.1, 0.2, 0.3, 1.0, 0.1];
        let xb = [-1.0, 2.0, -0.5];
        let ua = [0.4, -0.2];
        let ub = [0.3];
        let xc: Vec<f64> = xa.iter().chain(&xb).cloned().collect();
        let uc: Vec<f64> = ua.iter().chain(&ub).cloned().collect();

        let ra = propagate(&fa, &space_a, &xa, &ua, 1.35, 0.05);
        let rb = propagate(&fb, &space_b, &xb, &ub, 1.35, 0.05);
        let rc = propagate(&composite, &space_c, &xc, &uc, 1.35, 0.05);
        for i in 0..5 {
            assert_abs_diff_eq!(rc[i], ra[i], epsilon = 1e-12);
        }
        for i in 0..3 {
            assert_abs_diff_eq!(rc[5 + i], rb[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI + 0.1), -PI + 0.1, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn propagated_heading_stays_wrapped(
            theta in -3.0..3.0f64, v in -1.0..2.0f64, phi in -0.7..0.7f64,
            u0 in -1.0..1.0f64, u1 in -0.5..0.5f64, dur in 0.0..5.0f64,
        ) {
            let f = VectorFieldSpec::SecondOrderCar { wheelbase: 0.7 };
            let x = propagate(&f, &big_space(), &[0.0, 0.0, theta, v, phi], &[u0, u1], dur, 0.05);
            prop_assert!(x[2] >= -PI && x[2] < PI);
        }
    }
}
