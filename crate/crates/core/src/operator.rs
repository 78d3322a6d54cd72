//! Operators as finite lists of pairs `(f, g)` with `g = Lf`, scaling by a
//! speed function, and grid probing of the positive maximum principle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Coefficient, TestFunction};
use crate::speed::SpeedFunction;

/// Rule producing `g` from `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// `drift·f′ + sigma²·f″/2 + potential·f`.
    Local {
        #[serde(default = "zero")]
        drift: Coefficient,
        #[serde(default = "zero")]
        sigma: Coefficient,
        #[serde(default = "zero")]
        potential: Coefficient,
    },
    /// `rate·(f(x + step) + f(x − step) − 2f(x))/2`.
    Jump { rate: f64, step: f64 },
    /// `speed · inner`.
    Scaled { speed: SpeedFunction, inner: Box<Generator> },
}

fn zero() -> Coefficient {
    Coefficient::Zero
}

impl Generator {
    /// `f″/2`.
    pub fn brownian() -> Self {
        Generator::Local { drift: Coefficient::Zero, sigma: Coefficient::One, potential: Coefficient::Zero }
    }

    /// `n(f(x + n^{−1/2}) + f(x − n^{−1/2}) − 2f(x))/2`.
    pub fn chain(n: f64) -> Self {
        Generator::Jump { rate: n, step: 1.0 / n.sqrt() }
    }

    /// `g = f`.
    pub fn identity() -> Self {
        Generator::Local { drift: Coefficient::Zero, sigma: Coefficient::Zero, potential: Coefficient::One }
    }

    pub fn apply(&self, f: &TestFunction, x: f64) -> f64 {
        match self {
            Generator::Local { drift, sigma, potential } => {
                let mut g = 0.0;
                if !drift.is_zero() {
                    g += drift.eval(x) * f.deriv(x, 1);
                }
                if !sigma.is_zero() {
                    let s = sigma.eval(x);
                    g += 0.5 * s * s * f.deriv(x, 2);
                }
                if !potential.is_zero() {
                    g += potential.eval(x) * f.eval(x);
                }
                g
            }
            Generator::Jump { rate, step } => 0.5 * rate * (f.eval(x + step) + f.eval(x - step) - 2.0 * f.eval(x)),
            Generator::Scaled { speed, inner } => speed.eval(x) * inner.apply(f, x),
        }
    }

    /// Whether `g` is bounded for every compactly supported `f`; decided
    /// from the closed forms.
    pub fn is_bounded(&self) -> bool {
        match self {
            Generator::Local { drift, sigma, potential } => {
                drift.is_bounded() && sigma.is_bounded() && potential.is_bounded()
            }
            Generator::Jump { .. } => true,
            Generator::Scaled { speed, inner } => inner.is_bounded() && speed.is_bounded(),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Local { drift, sigma, potential } => {
                write!(f, "({drift})f' + ({sigma})^2 f''/2 + ({potential})f")
            }
            Generator::Jump { rate, step } => write!(f, "{rate}*(f(x+{step})+f(x-{step})-2f(x))/2"),
            Generator::Scaled { speed, inner } => write!(f, "({speed})*[{inner}]"),
        }
    }
}

/// One element `(f, g)` of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub f: TestFunction,
    pub g: Generator,
}

impl Pair {
    pub fn new(f: TestFunction, g: Generator) -> Self {
        Self { f, g }
    }

    pub fn g_at(&self, x: f64) -> f64 {
        self.g.apply(&self.f, x)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.f, self.g)
    }
}

/// Finite subset of `C_0(S) × C(S)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Operator {
    pairs: Vec<Pair>,
}

impl Operator {
    /// Rejects an `f` listed twice with different `g`.
    pub fn new(pairs: Vec<Pair>) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|q| q.f == p.f && q.g != p.g) {
                return Err(Error::InvalidParameter(format!("{} listed with two different images", p.f)));
            }
        }
        Ok(Self { pairs })
    }

    pub fn from_generator(fs: &[TestFunction], g: &Generator) -> Self {
        let mut pairs: Vec<Pair> = Vec::new();
        for f in fs {
            if !pairs.iter().any(|p| &p.f == f) {
                pairs.push(Pair::new(f.clone(), g.clone()));
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn domain(&self) -> impl Iterator<Item = &TestFunction> {
        self.pairs.iter().map(|p| &p.f)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `hL = {(f, h·g) | (f, g) ∈ L}`.
pub fn scale_operator(l: &Operator, h: &SpeedFunction) -> Operator {
    let pairs = l
        .pairs
        .iter()
        .map(|p| Pair::new(p.f.clone(), Generator::Scaled { speed: h.clone(), inner: Box::new(p.g.clone()) }))
        .collect();
    Operator { pairs }
}

pub const DEFAULT_PMP_TOL: f64 = 1e-8;
pub const DEFAULT_PMP_POINTS: usize = 4001;

#[derive(Clone, Debug, PartialEq)]
pub struct PmpViolation {
    pub pair: usize,
    pub at: f64,
    pub f_value: f64,
    pub g_value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PmpReport {
    pub violations: Vec<PmpViolation>,
    /// Pairs whose grid argmax sits on the boundary of the probe grid.
    pub boundary_warnings: Vec<usize>,
}

impl PmpReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `n` equally spaced probes over the union of the supports of `L`'s domain.
pub fn default_probe_grid(l: &Operator, n: usize) -> Vec<f64> {
    let (lo, hi) = l
        .domain()
        .filter(|f| !matches!(f, TestFunction::Zero))
        .map(TestFunction::support)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
    if !lo.is_finite() {
        return vec![0.0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// For each pair, locates the maximum of `f` on the probe grid (ties go to
/// the smallest coordinate) and polishes it by Newton steps on `f′` inside
/// the neighbouring cells. A pair violates the principle when
/// `f(a₀) ≥ 0` and `g(a₀) > tol`.
pub fn pmp_check(l: &Operator, probe_grid: &[f64], tol: f64) -> PmpReport {
    let mut report = PmpReport::default();
    for (idx, pair) in l.pairs.iter().enumerate() {
        let Some((k, _)) = probe_grid
            .iter()
            .map(|&x| pair.f.eval(x))
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                Some((_, b)) if v <= b => best,
                _ => Some((i, v)),
            })
        else {
            continue;
        };
        if k == 0 || k + 1 == probe_grid.len() {
            report.boundary_warnings.push(idx);
        }
        let lo = probe_grid[k.saturating_sub(1)];
        let hi = probe_grid[(k + 1).min(probe_grid.len() - 1)];
        let a0 = polish_argmax(&pair.f, probe_grid[k], lo, hi);
        let f_value = pair.f.eval(a0);
        let g_value = pair.g_at(a0);
        if f_value >= 0.0 && g_value > tol {
            report.violations.push(PmpViolation { pair: idx, at: a0, f_value, g_value });
        }
    }
    report
}

fn polish_argmax(f: &TestFunction, x0: f64, lo: f64, hi: f64) -> f64 {
    let mut x = x0;
    for _ in 0..50 {
        let d1 = f.deriv(x, 1);
        let d2 = f.deriv(x, 2);
        if !(d2 < 0.0) {
            break;
        }
        let next = (x - d1 / d2).clamp(lo, hi);
        if f.eval(next) < f.eval(x) || next == x {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bump() -> TestFunction {
        TestFunction::gaussian_bump(0.0, 1.0)
    }

    #[test]
    fn scaling_examples() {
        let l = Operator::from_generator(&[bump()], &Generator::brownian());
        let same = scale_operator(&l, &SpeedFunction::constant(1.0));
        for i in 0..50 {
            let x = -3.0 + 0.12 * i as f64;
            assert_eq!(same.pairs()[0].g_at(x), l.pairs()[0].g_at(x));
            let doubled = scale_operator(&l, &SpeedFunction::constant(2.0));
            assert_eq!(doubled.pairs()[0].g_at(x), bump().deriv(x, 2));
        }
        let h = scale_operator(&l, &SpeedFunction::OnePlusX2);
        assert_abs_diff_eq!(h.pairs()[0].g_at(1.0), bump().deriv(1.0, 2), epsilon = 1e-15);
    }

    #[test]
    fn duplicate_domain_entries_rejected() {
        let a = Pair::new(bump(), Generator::brownian());
        let b = Pair::new(bump(), Generator::identity());
        assert!(Operator::new(vec![a.clone(), a.clone()]).is_ok());
        assert!(Operator::new(vec![a, b]).is_err());
    }

    #[test]
    fn pmp_examples() {
        let bm = Operator::from_generator(&[bump()], &Generator::brownian());
        let grid = default_probe_grid(&bm, DEFAULT_PMP_POINTS);
        assert_eq!(grid.len(), 4001);
        assert!(pmp_check(&bm, &grid, DEFAULT_PMP_TOL).passed());

        let bad = Operator::from_generator(&[bump()], &Generator::identity());
        let r = pmp_check(&bad, &grid, DEFAULT_PMP_TOL);
        assert_eq!(r.violations.len(), 1);
        assert_abs_diff_eq!(r.violations[0].at, 0.0, epsilon = 1e-9);

        let zero = Operator::new(vec![Pair::new(TestFunction::Zero, Generator::Local {
            drift: Coefficient::Zero,
            sigma: Coefficient::Zero,
            potential: Coefficient::Zero,
        })])
        .unwrap();
        let grid = default_probe_grid(&zero, DEFAULT_PMP_POINTS);
        assert!(pmp_check(&zero, &grid, DEFAULT_PMP_TOL).passed());
    }

    #[test]
    fn ties_go_to_smallest_coordinate() {
        let plateau = TestFunction::Plateau { lo: -1.0, hi: 1.0, ramp: 0.5 };
        let l = Operator::from_generator(&[plateau], &Generator::identity());
        // probes are spaced 0.0075 apart from −1.5; the first one on the plateau is −0.9975
        let r = pmp_check(&l, &default_probe_grid(&l, 401), 0.0);
        assert_abs_diff_eq!(r.violations[0].at, -0.9975, epsilon = 1e-12);
    }

    #[test]
    fn off_grid_maximum_polished_for_fine_jump_generators() {
        // a grid argmax a few ulps away from the true maximum would make the
        // n = 10⁴ chain generator look positive
        let f = TestFunction::gaussian_bump(0.123456, 0.7);
        let l = Operator::from_generator(&[f], &Generator::chain(1e4));
        let grid = default_probe_grid(&l, DEFAULT_PMP_POINTS);
        assert!(pmp_check(&l, &grid, DEFAULT_PMP_TOL).passed());
    }

    #[test]
    fn boundary_argmax_warned() {
        let l = Operator::from_generator(&[bump()], &Generator::brownian());
        let r = pmp_check(&l, &[1.0, 2.0, 3.0], DEFAULT_PMP_TOL);
        assert_eq!(r.boundary_warnings, vec![0]);
    }

    #[test]
    fn chain_generator_taylor_limit() {
        let f = bump();
        let g = Generator::chain(1e4).apply(&f, 0.0);
        assert_abs_diff_eq!(g, -1.0, epsilon = 2e-4);
    }
}
