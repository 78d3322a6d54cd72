//! One-dimensional state spaces, the cemetery point and the metric on the
//! one-point compactification.
//!
//! Three kinds of space are built in: the real line, a bounded open interval
//! and a finite grid. Each carries a metric `d` on `S ∪ {Δ}` (normalized so
//! that `d ≤ 1`) and a compact exhaustion `U_1 ⋐ U_2 ⋐ …` described by open
//! intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of `S ∪ {Δ}`. Serialized as a number, or the string `"delta"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointRepr", try_from = "PointRepr")]
pub enum StatePoint {
    Interior(f64),
    Delta,
}

impl StatePoint {
    pub fn is_delta(self) -> bool {
        matches!(self, StatePoint::Delta)
    }

    /// Coordinate of an interior point.
    pub fn coord(self) -> Option<f64> {
        match self {
            StatePoint::Interior(x) => Some(x),
            StatePoint::Delta => None,
        }
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Coord(f64),
    Name(String),
}

impl From<StatePoint> for PointRepr {
    fn from(a: StatePoint) -> Self {
        match a {
            StatePoint::Interior(x) => PointRepr::Coord(x),
            StatePoint::Delta => PointRepr::Name("delta".into()),
        }
    }
}

impl TryFrom<PointRepr> for StatePoint {
    type Error = String;

    fn try_from(r: PointRepr) -> Result<Self, String> {
        match r {
            PointRepr::Coord(x) if x.is_finite() => Ok(StatePoint::Interior(x)),
            PointRepr::Coord(x) => Err(format!("state point {x} is not finite")),
            PointRepr::Name(n) if n == "delta" || n == "Δ" => Ok(StatePoint::Delta),
            PointRepr::Name(n) => Err(format!("unknown state point {n:?}, expected a number or \"delta\"")),
        }
    }
}

impl From<f64> for StatePoint {
    fn from(x: f64) -> Self {
        StatePoint::Interior(x)
    }
}

impl fmt::Display for StatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatePoint::Interior(x) => write!(f, "{x}"),
            StatePoint::Delta => write!(f, "Δ"),
        }
    }
}

/// Open interval `(lo, hi)`; bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn whole() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// `a ∈ U`. The cemetery is never contained.
    pub fn contains(&self, a: StatePoint) -> bool {
        match a {
            StatePoint::Interior(x) => self.lo < x && x < self.hi,
            StatePoint::Delta => false,
        }
    }

    pub fn contains_value(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_subset_of(&self, other: &OpenInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Closed interval `[lo, hi]`, used for compact sets and conditioning bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, a: StatePoint) -> bool {
        match a {
            StatePoint::Interior(x) => self.lo <= x && x <= self.hi,
            StatePoint::Delta => false,
        }
    }

    pub fn contains_value(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceKind {
    RealLine,
    /// The open interval `(lo, hi)`; its two ends are glued into Δ.
    BoundedInterval { lo: f64, hi: f64 },
    /// The points `lo + k·step`, `0 ≤ k ≤ K`. Δ is isolated.
    FiniteGrid { lo: f64, hi: f64, step: f64 },
}

/// How distances to and near the cemetery are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaChart {
    /// Map `S` onto `(-1, 1)` and glue both ends into Δ. A genuine metric on
    /// `S ∪ {Δ}`; on the real line `d(a, Δ) = 1/(1+|a|)`.
    #[default]
    Rational,
    /// `d(a, b) = |a − b| ∧ 1` on `S`, with the same Δ-distance as
    /// `Rational`. Only a metric on `S`: large points are not close to each
    /// other, so it is meant for comparing Δ-free paths.
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    kind: SpaceKind,
    chart: DeltaChart,
    exhaustion_step: f64,
}

impl Default for StateSpace {
    fn default() -> Self {
        Self::real_line()
    }
}

impl StateSpace {
    pub fn real_line() -> Self {
        Self { kind: SpaceKind::RealLine, chart: DeltaChart::Rational, exhaustion_step: 1.0 }
    }

    pub fn bounded_interval(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval ({lo}, {hi})");
        Self {
            kind: SpaceKind::BoundedInterval { lo, hi },
            chart: DeltaChart::Rational,
            exhaustion_step: 1.0,
        }
    }

    pub fn finite_grid(lo: f64, hi: f64, step: f64) -> Self {
        assert!(lo <= hi && step > 0.0, "bad grid [{lo}, {hi}] step {step}");
        Self {
            kind: SpaceKind::FiniteGrid { lo, hi, step },
            chart: DeltaChart::Rational,
            exhaustion_step: 1.0,
        }
    }

    pub fn with_chart(mut self, chart: DeltaChart) -> Self {
        self.chart = chart;
        self
    }

    pub fn with_exhaustion_step(mut self, step: f64) -> Self {
        assert!(step > 0.0);
        self.exhaustion_step = step;
        self
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn chart(&self) -> DeltaChart {
        self.chart
    }

    /// Whether `a` lies in `S ∪ {Δ}`.
    pub fn contains_point(&self, a: StatePoint) -> bool {
        let StatePoint::Interior(x) = a else { return true };
        match self.kind {
            SpaceKind::RealLine => x.is_finite(),
            SpaceKind::BoundedInterval { lo, hi } => lo < x && x < hi,
            SpaceKind::FiniteGrid { lo, hi, step } => {
                if x < lo - 1e-9 * step || x > hi + 1e-9 * step {
                    return false;
                }
                let k = ((x - lo) / step).round();
                (lo + k * step - x).abs() <= 1e-9 * step.max(1.0)
            }
        }
    }

    /// Position of an interior point in the chart `(-1, 1)`.
    fn chart_coord(&self, x: f64) -> f64 {
        match self.kind {
            SpaceKind::RealLine => x / (1.0 + x.abs()),
            SpaceKind::BoundedInterval { lo, hi } => (2.0 * x - lo - hi) / (hi - lo),
            SpaceKind::FiniteGrid { .. } => unreachable!("grids have no chart"),
        }
    }

    /// `d(a, Δ)` for an interior point.
    fn escape_distance(&self, x: f64) -> f64 {
        match (self.kind, self.chart) {
            (SpaceKind::FiniteGrid { .. }, _) => 1.0,
            (SpaceKind::RealLine, _) => 1.0 / (1.0 + x.abs()),
            (SpaceKind::BoundedInterval { .. }, DeltaChart::Rational) => {
                1.0 - self.chart_coord(x).abs()
            }
            (SpaceKind::BoundedInterval { lo, hi }, DeltaChart::Truncated) => {
                (x - lo).min(hi - x).clamp(0.0, 1.0)
            }
        }
    }

    /// The metric on `S ∪ {Δ}`.
    pub fn metric(&self, a: StatePoint, b: StatePoint) -> f64 {
        match (a, b) {
            (StatePoint::Delta, StatePoint::Delta) => 0.0,
            (StatePoint::Interior(x), StatePoint::Delta)
            | (StatePoint::Delta, StatePoint::Interior(x)) => self.escape_distance(x),
            (StatePoint::Interior(x), StatePoint::Interior(y)) => self.interior_metric(x, y),
        }
    }

    /// Metric between two interior coordinates.
    pub fn interior_metric(&self, x: f64, y: f64) -> f64 {
        if x == y {
            return 0.0;
        }
        match (self.kind, self.chart) {
            (_, DeltaChart::Truncated) => (x - y).abs().min(1.0),
            (SpaceKind::FiniteGrid { lo, hi, .. }, DeltaChart::Rational) => {
                let width = (hi - lo).max(f64::MIN_POSITIVE);
                ((x - y).abs() / width).min(1.0)
            }
            (_, DeltaChart::Rational) => {
                let (u, v) = (self.chart_coord(x), self.chart_coord(y));
                let direct = (u - v).abs();
                let through_delta = (1.0 - u.abs()) + (1.0 - v.abs());
                direct.min(through_delta)
            }
        }
    }

    /// The `n`-th set of the exhaustion (`n ≥ 1`; `0` is treated as `1`).
    pub fn exhaustion(&self, n: usize) -> OpenInterval {
        let n = n.max(1);
        match self.kind {
            SpaceKind::RealLine => {
                let r = n as f64 * self.exhaustion_step;
                OpenInterval::new(-r, r)
            }
            SpaceKind::BoundedInterval { lo, hi } => {
                let margin = (hi - lo) / (2.0 * (n as f64 + 1.0));
                OpenInterval::new(lo + margin, hi - margin)
            }
            SpaceKind::FiniteGrid { lo, hi, step } => {
                let count = ((hi - lo) / step).round() as usize;
                let layers = (count / 2).saturating_sub(n);
                let pad = layers as f64 * step - 0.5 * step;
                OpenInterval::new(lo + pad, hi - pad)
            }
        }
    }

    /// `a ∈ U_n`.
    pub fn contains(&self, n: usize, a: StatePoint) -> bool {
        self.exhaustion(n).contains(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn metric_examples() {
        let s = StateSpace::real_line();
        assert_eq!(s.metric(0.0.into(), 0.0.into()), 0.0);
        let t = StateSpace::real_line().with_chart(DeltaChart::Truncated);
        assert_eq!(t.metric(0.0.into(), 3.0.into()), 1.0);
        assert_abs_diff_eq!(s.metric(10.0.into(), StatePoint::Delta), 1.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.metric(StatePoint::Delta, (-10.0).into()), 1.0 / 11.0, epsilon = 1e-15);
        assert_eq!(s.metric(StatePoint::Delta, StatePoint::Delta), 0.0);
    }

    #[test]
    fn far_points_on_opposite_sides_are_close() {
        let s = StateSpace::real_line();
        let d = s.metric(1e6.into(), (-1e6).into());
        assert!(d < 3e-6, "{d}");
    }

    #[test]
    fn contains_examples() {
        let u = OpenInterval::new(-5.0, 5.0);
        assert!(u.contains(0.0.into()));
        assert!(!u.contains(5.0.into()));
        assert!(!u.contains(StatePoint::Delta));
    }

    #[test]
    fn exhaustion_real_line_defaults() {
        let s = StateSpace::real_line();
        assert_eq!(s.exhaustion(3), OpenInterval::new(-3.0, 3.0));
        assert!(s.contains(3, 2.9.into()));
        assert!(!s.contains(3, 3.0.into()));
    }

    #[test]
    fn grid_exhaustion_eventually_covers() {
        let s = StateSpace::finite_grid(0.0, 10.0, 1.0);
        assert!(!s.contains(1, 0.0.into()));
        assert!(s.contains(1, 5.0.into()));
        assert!(s.contains(5, 0.0.into()) && s.contains(5, 10.0.into()));
        assert!(s.contains_point(3.0.into()));
        assert!(!s.contains_point(3.5.into()));
        assert_eq!(s.metric(3.0.into(), StatePoint::Delta), 1.0);
    }

    #[test]
    fn interval_exhaustion_is_relatively_compact() {
        let s = StateSpace::bounded_interval(0.0, 1.0);
        for n in 1..20 {
            let u = s.exhaustion(n);
            assert!(u.lo > 0.0 && u.hi < 1.0);
            assert!(u.is_subset_of(&s.exhaustion(n + 1)));
        }
    }

    #[test]
    fn state_point_serde() {
        let p: StatePoint = serde_json::from_str("1.5").unwrap();
        assert_eq!(p, StatePoint::Interior(1.5));
        assert_eq!(serde_json::from_str::<StatePoint>("\"delta\"").unwrap(), StatePoint::Delta);
        assert_eq!(serde_json::from_str::<StatePoint>("\"Δ\"").unwrap(), StatePoint::Delta);
        assert!(serde_json::from_str::<StatePoint>("\"infinity\"").is_err());
        assert!(serde_json::from_str::<StatePoint>("1e400").is_err());
        for p in [StatePoint::Interior(-0.25), StatePoint::Delta] {
            let back: StatePoint = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            assert_eq!(back, p);
        }
    }

    fn point() -> impl Strategy<Value = StatePoint> {
        prop_oneof![
            1 => Just(StatePoint::Delta),
            6 => (-1e3f64..1e3).prop_map(StatePoint::Interior),
            2 => (-3f64..3.0).prop_map(StatePoint::Interior),
        ]
    }

    proptest! {
        #[test]
        fn rational_chart_is_a_metric(a in point(), b in point(), c in point()) {
            for s in [StateSpace::real_line(), StateSpace::bounded_interval(-1e3, 1e3)] {
                if ![a, b, c].iter().all(|p| s.contains_point(*p)) { continue; }
                let ab = s.metric(a, b);
                prop_assert!((0.0..=1.0 + 1e-15).contains(&ab));
                prop_assert_eq!(ab, s.metric(b, a));
                prop_assert!(ab <= s.metric(a, c) + s.metric(c, b) + 1e-12);
            }
        }

        #[test]
        fn truncated_chart_is_a_metric_on_interior(x in -50f64..50.0, y in -50f64..50.0, z in -50f64..50.0) {
            let s = StateSpace::real_line().with_chart(DeltaChart::Truncated);
            let (a, b, c) = (x.into(), y.into(), z.into());
            prop_assert!(s.metric(a, b) <= s.metric(a, c) + s.metric(c, b) + 1e-12);
        }

        #[test]
        fn exhaustion_is_nested(n in 1usize..50, x in -100f64..100.0) {
            let s = StateSpace::real_line().with_exhaustion_step(0.7);
            if s.contains(n, x.into()) {
                prop_assert!(s.contains(n + 1, x.into()));
            }
        }

        #[test]
        fn escape_distance_monotone(x in 0f64..1e6, dx in 0f64..1e6) {
            let s = StateSpace::real_line();
            prop_assert!(s.metric((x + dx).into(), StatePoint::Delta) <= s.metric(x.into(), StatePoint::Delta));
        }
    }
}
