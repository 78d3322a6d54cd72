//! Finite representation of exploding cadlag paths.
//!
//! A [`StepPath`] is held constant on `[t_i, t_{i+1})`, sits at the cemetery
//! Δ from its explosion time `ξ` on, and may record the left limit at `ξ`
//! when the path converges inside `S`. Continuous processes are stored as
//! fine grids ([`PathKind::Grid`]); genuinely discontinuous processes mark
//! their knots as recorded jumps ([`PathKind::Jump`]).

mod csv;
mod stopping;
mod times;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::speed::SpeedFunction;
use crate::state_space::{OpenInterval, StatePoint};

pub use self::csv::{read_csv, read_csv_file, write_csv, write_csv_file};
pub use self::stopping::StoppingSpec;
pub use self::times::Times;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// Knots are discretization nodes of a continuous process.
    #[default]
    Grid,
    /// Knots are recorded jumps.
    Jump,
}

/// Intrinsic clock of a time-changed path: the original path and the speeds
/// applied so far. Knot times of the time-changed path are always recomputed
/// from this record, so successive time changes compose exactly.
#[derive(Clone, Debug)]
pub(crate) struct Clock {
    pub base: StepPath,
    pub speeds: Vec<SpeedFunction>,
}

#[derive(Clone, Debug)]
pub struct StepPath {
    times: Times,
    values: Arc<[f64]>,
    xi: f64,
    left_limit: Option<f64>,
    kind: PathKind,
    clock: Option<Arc<Clock>>,
}

impl StepPath {
    /// Builds a path from explicit knots. Knot times must start at 0, be
    /// strictly increasing and lie below `xi`.
    pub fn new(times: Vec<f64>, values: Vec<f64>, xi: f64) -> Result<Self> {
        let path = Self {
            times: Times::from_vec(times),
            values: values.into(),
            xi,
            left_limit: None,
            kind: PathKind::Grid,
            clock: None,
        };
        path.validate()?;
        Ok(path)
    }

    /// Path on the regular grid `k·dt`.
    pub fn grid(dt: f64, values: Vec<f64>, xi: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidPath(format!("grid step must be positive, got {dt}")));
        }
        let path = Self {
            times: Times::Regular { dt, len: values.len() },
            values: values.into(),
            xi,
            left_limit: None,
            kind: PathKind::Grid,
            clock: None,
        };
        path.validate()?;
        Ok(path)
    }

    /// Samples a closed-form function on the grid `k·dt < min(until, xi)`.
    pub fn from_fn<F: Fn(f64) -> f64>(dt: f64, until: f64, xi: f64, f: F) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidPath(format!("grid step must be positive, got {dt}")));
        }
        let end = until.min(xi);
        let values: Vec<f64> = (0..)
            .map(|k| k as f64 * dt)
            .take_while(|&t| t < end || t == 0.0)
            .map(f)
            .collect();
        Self::grid(dt, values, xi)
    }

    pub fn constant(a: f64) -> Self {
        Self::new(vec![0.0], vec![a], f64::INFINITY).expect("finite constant")
    }

    /// The path started at Δ: `ξ = 0`, no knots.
    pub fn dead() -> Self {
        Self {
            times: Times::Explicit(Arc::from(Vec::new())),
            values: Arc::from(Vec::new()),
            xi: 0.0,
            left_limit: None,
            kind: PathKind::Grid,
            clock: None,
        }
    }

    pub(crate) fn from_parts(
        times: Times,
        values: Arc<[f64]>,
        xi: f64,
        left_limit: Option<f64>,
        kind: PathKind,
        clock: Option<Arc<Clock>>,
    ) -> Self {
        Self { times, values, xi, left_limit, kind, clock }
    }

    pub fn with_kind(mut self, kind: PathKind) -> Self {
        self.kind = kind;
        self
    }

    /// Records `lim_{t↑ξ} x_t`. Only meaningful for finite `ξ`.
    pub fn with_left_limit(mut self, left_limit: Option<f64>) -> Result<Self> {
        if left_limit.is_some() && !self.xi.is_finite() {
            return Err(Error::InvalidPath("left limit at explosion needs a finite ξ".into()));
        }
        if let Some(l) = left_limit {
            if !l.is_finite() {
                return Err(Error::InvalidPath(format!("left limit {l} is not a point of S")));
            }
        }
        self.left_limit = left_limit;
        Ok(self)
    }

    /// Checks the structural invariants of the representation.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n != self.values.len() {
            return Err(Error::InvalidPath(format!(
                "{} knot times but {} values",
                n,
                self.values.len()
            )));
        }
        if self.xi.is_nan() || self.xi < 0.0 {
            return Err(Error::InvalidPath(format!("explosion time {} is invalid", self.xi)));
        }
        if n == 0 {
            if self.xi != 0.0 {
                return Err(Error::InvalidPath("a path without knots must have ξ = 0".into()));
            }
            return Ok(());
        }
        if self.times.get(0) != 0.0 {
            return Err(Error::InvalidPath("first knot must be at t = 0".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let t = self.times.get(i);
            if !(t > prev) {
                return Err(Error::InvalidPath(format!("knot times not increasing at index {i}")));
            }
            if !(t < self.xi) {
                return Err(Error::InvalidPath(format!("knot {t} not below ξ = {}", self.xi)));
            }
            if !self.values[i].is_finite() {
                return Err(Error::InvalidPath(format!("value at index {i} is not finite")));
            }
            prev = t;
        }
        if self.left_limit.is_some() && !self.xi.is_finite() {
            return Err(Error::InvalidPath("left limit recorded for a non-exploding path".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ξ = 0`: the path starts at Δ.
    pub fn is_dead(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> &Times {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times.get(i)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_arc(&self) -> &Arc<[f64]> {
        &self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub(crate) fn clock(&self) -> Option<&Arc<Clock>> {
        self.clock.as_ref()
    }

    /// End of the `i`-th constancy segment (the next knot, or `ξ`).
    pub fn segment_end(&self, i: usize) -> f64 {
        if i + 1 < self.len() {
            self.times.get(i + 1)
        } else {
            self.xi
        }
    }

    pub fn explosion_time(&self) -> f64 {
        self.xi
    }

    pub fn left_limit_at_explosion(&self) -> Option<f64> {
        self.left_limit
    }

    pub fn start(&self) -> StatePoint {
        self.values.first().map_or(StatePoint::Delta, |&v| StatePoint::Interior(v))
    }

    /// `x_t`, right-continuous, Δ from `ξ` on. Negative times read `x_0`.
    pub fn evaluate(&self, t: f64) -> StatePoint {
        if t >= self.xi {
            return StatePoint::Delta;
        }
        match self.times.locate(t) {
            Some(i) => StatePoint::Interior(self.values[i]),
            None => self.start(),
        }
    }

    /// `x_{t−}`: the value held on the segment ending at `t`. At `t = ξ` this
    /// is the recorded left limit, or Δ for paths escaping to infinity.
    pub fn left_limit(&self, t: f64) -> Result<StatePoint> {
        if !(t > 0.0) {
            return Err(Error::LeftLimitAtZero(t));
        }
        if t > self.xi {
            return Ok(StatePoint::Delta);
        }
        if t == self.xi {
            return Ok(self.left_limit.map_or(StatePoint::Delta, StatePoint::Interior));
        }
        let i = self.times.count_lt(t) - 1;
        Ok(StatePoint::Interior(self.values[i]))
    }

    /// `x_{t−}` with the convention `x_{0−} = x_0`.
    pub fn left_limit_or_start(&self, t: f64) -> StatePoint {
        if t <= 0.0 {
            self.start()
        } else {
            self.left_limit(t).expect("t > 0")
        }
    }

    /// `τ^U = inf{t ≥ 0 | x_{t−} ∉ U or x_t ∉ U} ∧ ξ`.
    ///
    /// On a step path a left limit outside `U` at a knot means the previous
    /// segment already lay outside, so only knot values need scanning.
    pub fn exit_time(&self, u: &OpenInterval) -> f64 {
        match self.values.iter().position(|&v| !u.contains_value(v)) {
            Some(i) => self.times.get(i),
            None => self.xi,
        }
    }

    /// `x^τ_t = x_{τ∧t}`.
    pub fn stop(&self, spec: &StoppingSpec) -> StepPath {
        self.stop_at(spec.eval(self))
    }

    /// Freezes the path at time `tau`. Stopping at or after `ξ` leaves it
    /// unchanged; stopping strictly before gives a path that never explodes
    /// and forgets any time-change record.
    pub fn stop_at(&self, tau: f64) -> StepPath {
        if tau >= self.xi {
            return self.clone();
        }
        let keep = self.times.count_le(tau.max(0.0)).max(1);
        let values: Arc<[f64]> = if keep == self.len() {
            self.values.clone()
        } else {
            self.values[..keep].into()
        };
        StepPath {
            times: self.times.truncated(keep),
            values,
            xi: f64::INFINITY,
            left_limit: None,
            kind: self.kind,
            clock: None,
        }
    }

    /// `∫_from^to h(x_u) du`, with the integrand switched off from `ξ` on.
    pub fn integrate<F: Fn(f64) -> f64>(&self, from: f64, to: f64, h: F) -> f64 {
        let to = to.min(self.xi);
        if !(to > from) || self.is_empty() {
            return 0.0;
        }
        let mut i = self.times.locate(from).unwrap_or(0);
        let mut acc = 0.0;
        while i < self.len() {
            let a = self.times.get(i).max(from);
            let b = self.segment_end(i).min(to);
            if b > a {
                acc += (b - a) * h(self.values[i]);
            }
            if self.segment_end(i) >= to {
                break;
            }
            i += 1;
        }
        acc
    }

    /// Whether the path has a recorded jump exactly at `t`.
    pub fn has_jump_at(&self, t: f64) -> bool {
        if self.kind != PathKind::Jump {
            return false;
        }
        if t == self.xi {
            return self.left_limit.is_some();
        }
        if t <= 0.0 || t > self.xi {
            return false;
        }
        match self.times.locate(t) {
            Some(i) if i > 0 && self.times.get(i) == t => self.values[i] != self.values[i - 1],
            _ => false,
        }
    }

    /// Index of the first knot satisfying `pred`.
    pub fn first_knot_where<P: Fn(f64) -> bool>(&self, pred: P) -> Option<usize> {
        self.values.iter().position(|&v| pred(v))
    }

    /// Bitwise equality of knot times, values, `ξ` and the recorded left limit.
    pub fn same_knots(&self, other: &StepPath) -> bool {
        self.times.bitwise_eq(&other.times)
            && self.values.len() == other.values.len()
            && self.values.iter().zip(other.values.iter()).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.xi.to_bits() == other.xi.to_bits()
            && self.left_limit.map(f64::to_bits) == other.left_limit.map(f64::to_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn jump_0_to_2_at_1() -> StepPath {
        StepPath::new(vec![0.0, 1.0], vec![0.0, 2.0], f64::INFINITY).unwrap().with_kind(PathKind::Jump)
    }

    /// `tan` sampled on `k·dt < π/2`, exploding at `π/2`.
    fn tan_path(dt: f64) -> StepPath {
        StepPath::from_fn(dt, FRAC_PI_2, FRAC_PI_2, f64::tan).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(StepPath::constant(1.0).evaluate(7.0), StatePoint::Interior(1.0));
        assert_eq!(jump_0_to_2_at_1().evaluate(1.0), StatePoint::Interior(2.0));
        let p = StepPath::new(vec![0.0], vec![3.0], 0.5).unwrap();
        assert_eq!(p.evaluate(0.5), StatePoint::Delta);
        assert_eq!(p.evaluate(0.49), StatePoint::Interior(3.0));
    }

    #[test]
    fn left_limit_examples() {
        assert_eq!(jump_0_to_2_at_1().left_limit(1.0).unwrap(), StatePoint::Interior(0.0));
        let tan = tan_path(1e-4);
        let l = tan.left_limit(1.0).unwrap().coord().unwrap();
        // one grid step of tan' = 1 + tan² ≈ 3.43 at t = 1
        assert_abs_diff_eq!(l, 1.0f64.tan(), epsilon = 4e-4);
        let p = StepPath::new(vec![0.0], vec![3.0], 0.5).unwrap();
        assert_eq!(p.left_limit(0.5).unwrap(), StatePoint::Delta);
        assert!(matches!(p.left_limit(0.0), Err(Error::LeftLimitAtZero(_))));
        let q = p.with_left_limit(Some(4.0)).unwrap();
        assert_eq!(q.left_limit(0.5).unwrap(), StatePoint::Interior(4.0));
    }

    #[test]
    fn explosion_time_examples() {
        assert_eq!(StepPath::constant(1.0).explosion_time(), f64::INFINITY);
        // closed-form flow a/(1 − a t) from a = 2 blows up at 1/a
        let a = 2.0;
        let dt = 1e-4;
        let p = StepPath::from_fn(dt, 1.0, 1.0 / a, |t| a / (1.0 - a * t)).unwrap();
        assert_eq!(p.explosion_time(), 0.5);
    }

    #[test]
    fn exit_time_examples() {
        let u = OpenInterval::new(-2.0, 2.0);
        assert_eq!(StepPath::constant(0.0).exit_time(&u), f64::INFINITY);
        let tan = tan_path(1e-4);
        assert_abs_diff_eq!(tan.exit_time(&u), 2.0f64.atan(), epsilon = 1e-4);
        assert_eq!(StepPath::constant(5.0).exit_time(&u), 0.0);
        assert_eq!(tan.exit_time(&OpenInterval::whole()), tan.explosion_time());
    }

    #[test]
    fn stop_examples() {
        let tan = tan_path(1e-4);
        let at0 = tan.stop(&StoppingSpec::Time(0.0));
        assert!(at0.same_knots(&StepPath::constant(0.0)));
        let spec = StoppingSpec::Exit(OpenInterval::new(-2.0, 2.0));
        let once = tan.stop(&spec);
        assert!(once.stop(&spec).same_knots(&once));
        assert_eq!(once.explosion_time(), f64::INFINITY);
        let frozen = once.evaluate(1.5).coord().unwrap();
        assert!((2.0..2.001).contains(&frozen), "{frozen}");
        assert_eq!(once.evaluate(100.0), once.evaluate(1.5));
    }

    #[test]
    fn invalid_paths_rejected() {
        assert!(StepPath::new(vec![0.0, 0.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(StepPath::new(vec![0.1], vec![1.0], 1.0).is_err());
        assert!(StepPath::new(vec![0.0, 2.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(StepPath::new(vec![0.0], vec![f64::NAN], 1.0).is_err());
        assert!(StepPath::constant(1.0).with_left_limit(Some(1.0)).is_err());
    }

    #[test]
    fn integrate_is_exact_on_steps() {
        let p = StepPath::new(vec![0.0, 1.0, 2.5], vec![1.0, 3.0, -1.0], 4.0).unwrap();
        assert_eq!(p.integrate(0.0, 10.0, |v| v), 1.0 + 4.5 - 1.5);
        assert_eq!(p.integrate(0.5, 2.0, |v| v), 0.5 + 3.0);
    }

    #[test]
    fn jumps_only_recorded_on_jump_paths() {
        assert!(jump_0_to_2_at_1().has_jump_at(1.0));
        assert!(!jump_0_to_2_at_1().has_jump_at(0.999));
        let grid = StepPath::grid(0.5, vec![0.0, 1.0, 2.0], f64::INFINITY).unwrap();
        assert!(!grid.has_jump_at(1.0));
    }

    fn arb_path() -> impl Strategy<Value = StepPath> {
        (prop::collection::vec((0.01f64..1.0, -4.0f64..4.0), 1..12), prop::option::of(0.01f64..1.0)).prop_map(
            |(steps, tail)| {
                let mut t = 0.0;
                let mut times = Vec::new();
                let mut values = Vec::new();
                for (i, (gap, v)) in steps.iter().enumerate() {
                    if i > 0 {
                        t += gap;
                    }
                    times.push(t);
                    values.push(*v);
                }
                let xi = tail.map_or(f64::INFINITY, |g| t + g);
                StepPath::new(times, values, xi).unwrap().with_kind(PathKind::Jump)
            },
        )
    }

    proptest! {
        #[test]
        fn exit_time_of_whole_space_is_xi(p in arb_path()) {
            prop_assert_eq!(p.exit_time(&OpenInterval::whole()), p.explosion_time());
        }

        #[test]
        fn exit_time_monotone_in_set(p in arb_path(), r in 0.5f64..5.0, extra in 0.0f64..3.0) {
            let small = OpenInterval::new(-r, r);
            let big = OpenInterval::new(-r - extra, r + extra);
            prop_assert!(p.exit_time(&small) <= p.exit_time(&big));
        }

        #[test]
        fn stopping_commutes_with_evaluation(p in arb_path(), tau in 0.0f64..8.0, r in 0.5f64..5.0) {
            for spec in [StoppingSpec::Time(tau), StoppingSpec::Exit(OpenInterval::new(-r, r))] {
                let stopped = p.stop(&spec);
                prop_assert!(stopped.validate().is_ok());
                let at = spec.eval(&p);
                for k in 0..60 {
                    let t = k as f64 * 0.15;
                    prop_assert_eq!(stopped.evaluate(t), p.evaluate(t.min(at)));
                }
            }
        }
    }
}
