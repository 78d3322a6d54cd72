//! Nonnegative continuous speed functions used by random time changes.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Closed-form nonnegative continuous function on `S`, together with an
/// analytically known zero set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedFunction {
    Const { c: f64 },
    /// `1 + x²`
    OnePlusX2,
    /// `1 / (1 + x²)`
    InvOnePlusX2,
    /// `(level − x)⁺`, vanishing on `[level, ∞)`.
    Ramp { level: f64 },
    /// `(min(x − lo, hi − x))⁺`, vanishing off `(lo, hi)`.
    Hat { lo: f64, hi: f64 },
    /// Smooth profile `(1 − u²)²` on `(lo, hi)` with `u` the rescaled
    /// position, zero elsewhere.
    Bump { lo: f64, hi: f64 },
    /// `min(g, max)`.
    Clamp { inner: Box<SpeedFunction>, max: f64 },
    /// Pointwise product.
    Product { left: Box<SpeedFunction>, right: Box<SpeedFunction> },
}

/// Union of closed intervals (ends may be infinite).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSet {
    pub intervals: Vec<(f64, f64)>,
}

impl ZeroSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn everything() -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    fn union(mut self, other: ZeroSet) -> Self {
        self.intervals.extend(other.intervals);
        self
    }
}

impl SpeedFunction {
    pub fn constant(c: f64) -> Self {
        assert!(c >= 0.0, "speed must be nonnegative");
        SpeedFunction::Const { c }
    }

    pub fn product(self, other: SpeedFunction) -> Self {
        SpeedFunction::Product { left: Box::new(self), right: Box::new(other) }
    }

    pub fn clamped(self, max: f64) -> Self {
        SpeedFunction::Clamp { inner: Box::new(self), max }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SpeedFunction::Const { c } => *c,
            SpeedFunction::OnePlusX2 => 1.0 + x * x,
            SpeedFunction::InvOnePlusX2 => 1.0 / (1.0 + x * x),
            SpeedFunction::Ramp { level } => (level - x).max(0.0),
            SpeedFunction::Hat { lo, hi } => (x - lo).min(hi - x).max(0.0),
            SpeedFunction::Bump { lo, hi } => {
                if x <= *lo || x >= *hi {
                    return 0.0;
                }
                let u = (2.0 * x - lo - hi) / (hi - lo);
                let w = 1.0 - u * u;
                w * w
            }
            SpeedFunction::Clamp { inner, max } => inner.eval(x).min(*max),
            SpeedFunction::Product { left, right } => left.eval(x) * right.eval(x),
        }
    }

    /// Whether `g(x) ≤ tol`, judged factor by factor for products so that
    /// `g₁g₂` vanishes exactly where one of its factors does.
    pub fn vanishes_at(&self, x: f64, tol: f64) -> bool {
        match self {
            SpeedFunction::Product { left, right } => {
                left.vanishes_at(x, tol) || right.vanishes_at(x, tol)
            }
            _ => self.eval(x) <= tol,
        }
    }

    pub fn zero_set(&self) -> ZeroSet {
        match self {
            SpeedFunction::Const { c } if *c == 0.0 => ZeroSet::everything(),
            SpeedFunction::Const { .. }
            | SpeedFunction::OnePlusX2
            | SpeedFunction::InvOnePlusX2 => ZeroSet::empty(),
            SpeedFunction::Ramp { level } => ZeroSet { intervals: vec![(*level, f64::INFINITY)] },
            SpeedFunction::Hat { lo, hi } | SpeedFunction::Bump { lo, hi } => ZeroSet {
                intervals: vec![(f64::NEG_INFINITY, *lo), (*hi, f64::INFINITY)],
            },
            SpeedFunction::Clamp { inner, max } => {
                if *max <= 0.0 {
                    ZeroSet::everything()
                } else {
                    inner.zero_set()
                }
            }
            SpeedFunction::Product { left, right } => left.zero_set().union(right.zero_set()),
        }
    }

    /// `sup g < ∞` over the whole line.
    pub fn is_bounded(&self) -> bool {
        match self {
            SpeedFunction::Const { .. }
            | SpeedFunction::InvOnePlusX2
            | SpeedFunction::Hat { .. }
            | SpeedFunction::Bump { .. }
            | SpeedFunction::Clamp { .. } => true,
            SpeedFunction::OnePlusX2 | SpeedFunction::Ramp { .. } => false,
            SpeedFunction::Product { left, right } => left.is_bounded() && right.is_bounded(),
        }
    }

    /// `inf g > 0` over the whole line.
    pub fn is_strictly_positive(&self) -> bool {
        self.zero_set().intervals.is_empty()
    }
}

impl fmt::Display for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeedFunction::Const { c } => write!(f, "const({c})"),
            SpeedFunction::OnePlusX2 => write!(f, "1+x^2"),
            SpeedFunction::InvOnePlusX2 => write!(f, "1/(1+x^2)"),
            SpeedFunction::Ramp { level } => write!(f, "({level}-x)+"),
            SpeedFunction::Hat { lo, hi } => write!(f, "hat({lo},{hi})"),
            SpeedFunction::Bump { lo, hi } => write!(f, "bump({lo},{hi})"),
            SpeedFunction::Clamp { inner, max } => write!(f, "min({inner},{max})"),
            SpeedFunction::Product { left, right } => write!(f, "({left})*({right})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dictionary() -> Vec<SpeedFunction> {
        vec![
            SpeedFunction::constant(2.0),
            SpeedFunction::constant(0.0),
            SpeedFunction::OnePlusX2,
            SpeedFunction::InvOnePlusX2,
            SpeedFunction::Ramp { level: 2.0 },
            SpeedFunction::Hat { lo: -1.5, hi: 3.0 },
            SpeedFunction::Bump { lo: -2.0, hi: 2.0 },
            SpeedFunction::OnePlusX2.clamped(3.0),
            SpeedFunction::Ramp { level: 1.0 }.product(SpeedFunction::Hat { lo: -2.0, hi: 4.0 }),
        ]
    }

    #[test]
    fn declared_zero_set_matches_evaluation() {
        for g in dictionary() {
            let zs = g.zero_set();
            for i in 0..=4000 {
                let x = -10.0 + i as f64 * 0.005;
                let v = g.eval(x);
                assert!(v >= 0.0 && v.is_finite(), "{g} at {x}");
                assert_eq!(v == 0.0, zs.contains(x), "{g} at {x}: value {v}");
            }
        }
    }

    #[test]
    fn product_vanishes_factorwise() {
        let g = SpeedFunction::Const { c: 1e-200 }.product(SpeedFunction::Const { c: 1e-200 });
        assert_eq!(g.eval(0.0), 0.0);
        assert!(!g.vanishes_at(0.0, 0.0));
        let h = SpeedFunction::Ramp { level: 0.0 }.product(SpeedFunction::OnePlusX2);
        assert!(h.vanishes_at(1.0, 1e-12));
    }

    #[test]
    fn config_names() {
        let g: SpeedFunction = serde_json::from_str(r#"{"name": "one_plus_x2"}"#).unwrap();
        assert_eq!(g, SpeedFunction::OnePlusX2);
        let g: SpeedFunction = serde_json::from_str(r#"{"name": "const", "c": 2.0}"#).unwrap();
        assert_eq!(g.eval(5.0), 2.0);
        assert!(serde_json::from_str::<SpeedFunction>(r#"{"name": "const", "c": 2.0, "z": 1}"#).is_err());
    }
}
