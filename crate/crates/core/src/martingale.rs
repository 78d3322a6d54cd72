//! Monte-Carlo checks of the martingale local problem and of the semigroup
//! properties of a family: stopped martingale statistics, generator limits,
//! semigroup values, the Feller tail condition, quasi-continuity and the
//! Markov property at a stopping time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::operator::{default_probe_grid, Operator, Pair, DEFAULT_PMP_POINTS};
use crate::path::{StepPath, StoppingSpec};
use crate::simulators::{derive_seed, map_paths, Ensemble, FamilySimulator, Horizon, InitialLaw};
use crate::state_space::{ClosedInterval, OpenInterval, StatePoint};
use crate::stats::{suite_threshold, z_score, MeanEstimate, Z_SINGLE};

/// Minimum ensemble size for a martingale statistic.
pub const MIN_PATHS: usize = 100;

/// Minimum number of conditioning hits for the Markov check.
pub const MIN_BIN_HITS: usize = 100;

/// Width of a confidence interval in standard errors.
pub const CI_SE: f64 = 4.0;

/// Fraction of early exits above which a generator estimate is flagged.
pub const EXIT_FLAG_FRACTION: f64 = 0.1;

/// Tail probability below which a family is called Feller-consistent.
pub const FELLER_TAIL_THRESHOLD: f64 = 1e-3;

/// Weight factor `φ(x_time)` of a martingale statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weight {
    pub time: f64,
    pub phi: TestFunction,
}

/// One cell of a martingale suite: the pair, the localising set (`None` for
/// the unstopped variant), the increment window `s < t` and the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleCell {
    pub pair: Pair,
    pub u: Option<OpenInterval>,
    pub s: f64,
    pub t: f64,
    pub weights: Vec<Weight>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleStatistic {
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub n: usize,
    pub cell: MartingaleCell,
}

fn check_window(ens: &Ensemble, s: f64, t: f64, weights: &[Weight]) -> Result<()> {
    if ens.len() < MIN_PATHS {
        return Err(Error::TooFewPaths { needed: MIN_PATHS, got: ens.len() });
    }
    if !(0.0 <= s && s < t) {
        return Err(Error::InvalidParameter(format!("need 0 ≤ s < t, got s = {s}, t = {t}")));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0 <= w.time && w.time <= s)) {
        return Err(Error::InvalidParameter(format!("weight time {} outside [0, s = {s}]", w.time)));
    }
    ens.require_horizon(t)?;
    let dead = ens.paths.iter().filter(|p| p.explosion_time() <= s).count();
    if 2 * dead > ens.len() {
        return Err(Error::Vacuous { dead, total: ens.len(), s });
    }
    Ok(())
}

/// `[f(x_{t∧τ}) − f(x_{s∧τ}) − ∫_{s∧τ}^{t∧τ} g(x_u) du] · Π φ_i(x_{s_i})`
/// with `τ = τ^U ∧ ξ`, or `τ = ξ` without `U`.
fn increment(path: &StepPath, cell: &MartingaleCell) -> f64 {
    let tau = cell.u.as_ref().map_or(path.explosion_time(), |u| path.exit_time(u));
    let (a, b) = (cell.s.min(tau), cell.t.min(tau));
    let f = &cell.pair.f;
    let mut v = f.eval_point(path.evaluate(b)) - f.eval_point(path.evaluate(a)) - path.integrate(a, b, |x| cell.pair.g_at(x));
    for w in &cell.weights {
        v *= w.phi.eval_point(path.evaluate(w.time));
    }
    v
}

fn statistic(ens: &Ensemble, cell: MartingaleCell) -> MartingaleStatistic {
    let samples: Vec<f64> = ens.paths.par_iter().map(|p| increment(p, &cell)).collect();
    let e = MeanEstimate::from_samples(&samples);
    MartingaleStatistic { estimate: e.mean, se: e.se, z: e.z(), n: e.n, cell }
}

/// Weighted increment of the stopped process `f(X_{·∧τ^U}) − ∫_0^{·∧τ^U} g`,
/// whose mean vanishes when the ensemble solves the martingale local problem
/// for `(f, g)`.
pub fn martingale_statistic(
    ens: &Ensemble,
    pair: &Pair,
    u: &OpenInterval,
    s: f64,
    t: f64,
    weights: &[Weight],
) -> Result<MartingaleStatistic> {
    check_window(ens, s, t, weights)?;
    let cell = MartingaleCell { pair: pair.clone(), u: Some(*u), s, t, weights: weights.to_vec() };
    Ok(statistic(ens, cell))
}

/// The same increment without localisation, for bounded `g`; the integral
/// stops at `ξ` and `f(Δ) = 0`.
pub fn unstopped_martingale_statistic(
    ens: &Ensemble,
    pair: &Pair,
    s: f64,
    t: f64,
    weights: &[Weight],
) -> Result<MartingaleStatistic> {
    if !pair.g.is_bounded() {
        let op = Operator::new(vec![pair.clone()])?;
        let sup = default_probe_grid(&op, DEFAULT_PMP_POINTS).into_iter().map(|x| pair.g_at(x).abs()).fold(0.0, f64::max);
        return Err(Error::UnboundedGenerator(sup));
    }
    check_window(ens, s, t, weights)?;
    let cell = MartingaleCell { pair: pair.clone(), u: None, s, t, weights: weights.to_vec() };
    Ok(statistic(ens, cell))
}

fn cell_statistic(ens: &Ensemble, cell: &MartingaleCell) -> Result<MartingaleStatistic> {
    match &cell.u {
        Some(u) => martingale_statistic(ens, &cell.pair, u, cell.s, cell.t, &cell.weights),
        None => unstopped_martingale_statistic(ens, &cell.pair, cell.s, cell.t, &cell.weights),
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub statistics: Vec<MartingaleStatistic>,
    /// Bonferroni threshold on `|z|` for this many cells.
    pub threshold: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.statistics.iter().all(|s| s.z.abs() <= self.threshold)
    }

    pub fn rejected(&self) -> usize {
        self.statistics.iter().filter(|s| !(s.z.abs() <= self.threshold)).count()
    }
}

/// Runs every cell on one ensemble and applies the suite threshold.
pub fn martingale_suite(ens: &Ensemble, cells: &[MartingaleCell]) -> Result<SuiteReport> {
    let statistics = cells.iter().map(|c| cell_statistic(ens, c)).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport { statistics, threshold: suite_threshold(cells.len()) })
}

/// Cells `(pair, U, s, t)` over the product of an operator's pairs, the open
/// sets and the time windows, without weights.
pub fn suite_cells(l: &Operator, opens: &[OpenInterval], windows: &[(f64, f64)]) -> Vec<MartingaleCell> {
    let mut cells = Vec::new();
    for p in l.pairs() {
        for u in opens {
            for &(s, t) in windows {
                cells.push(MartingaleCell { pair: p.clone(), u: Some(*u), s, t, weights: Vec::new() });
            }
        }
    }
    cells
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorEstimate {
    /// `(t, (E_a[f(X_{t∧τ^U})] − f(a))/t)` for every grid time and for half
    /// the smallest one.
    pub quotients: Vec<(f64, MeanEstimate)>,
    /// `2Q(t/2) − Q(t)` at the smallest grid time.
    pub extrapolated: MeanEstimate,
    pub ci_half_width: f64,
    /// Fraction of paths with `τ^U` before the largest grid time.
    pub early_exit_fraction: f64,
    pub flagged: bool,
}

/// Difference quotients of the stopped semigroup at `a` and their
/// Richardson extrapolation. All quotients use the same paths.
pub fn generator_estimate(
    fam: &FamilySimulator,
    a: StatePoint,
    f: &TestFunction,
    u: &OpenInterval,
    t_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<GeneratorEstimate> {
    if !u.contains(a) {
        return Err(Error::InvalidParameter(format!("start point {a:?} is not in {u}")));
    }
    if n < 2 || t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("need n ≥ 2 and positive grid times".into()));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let mut times = t_grid.to_vec();
    times.push(0.5 * t_min);
    let fa = f.eval_point(a);
    let fam_t = fam.with_horizon(Horizon::Fixed(t_max));
    let rows: Vec<(Vec<f64>, bool)> = map_paths(&fam_t, &InitialLaw::dirac(a), n, seed, |_, p, h| {
        let tau = p.exit_time(u);
        let q = times
            .iter()
            .map(|&t| {
                debug_assert!(t <= h);
                (f.eval_point(p.evaluate(t.min(tau))) - fa) / t
            })
            .collect();
        (q, tau < t_max)
    });
    let k = times.len();
    let quotients = (0..k)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
            (times[j], MeanEstimate::from_samples(&col))
        })
        .collect();
    let j_min = times.iter().position(|&t| t == t_min).expect("t_min is a grid time");
    let combined: Vec<f64> = rows.iter().map(|r| 2.0 * r.0[k - 1] - r.0[j_min]).collect();
    let extrapolated = MeanEstimate::from_samples(&combined);
    let early = rows.iter().filter(|r| r.1).count() as f64 / n as f64;
    Ok(GeneratorEstimate {
        quotients,
        ci_half_width: CI_SE * extrapolated.se,
        extrapolated,
        early_exit_fraction: early,
        flagged: early > EXIT_FLAG_FRACTION,
    })
}

/// `T_t f(a) = E_a[f(X_t)]` at every probe point, with `f(Δ) = 0`.
pub fn semigroup_estimate(
    fam: &FamilySimulator,
    f: &TestFunction,
    t: f64,
    probe: &[StatePoint],
    n: usize,
    seed: u64,
) -> Result<Vec<MeanEstimate>> {
    if !(t >= 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need t ≥ 0 and n ≥ 1, got t = {t}, n = {n}")));
    }
    if t == 0.0 {
        return Ok(probe.iter().map(|&a| MeanEstimate { mean: f.eval_point(a), se: 0.0, n }).collect());
    }
    let fam_t = fam.with_horizon(Horizon::Fixed(t));
    Ok(probe
        .iter()
        .map(|&a| {
            let xs = map_paths(&fam_t, &InitialLaw::dirac(a), n, seed, |_, p, _| f.eval_point(p.evaluate(t)));
            MeanEstimate::from_samples(&xs)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub a: f64,
    /// `P_a(X_t ∈ K)`.
    pub in_k: MeanEstimate,
    /// `P_a(τ^{S∖K} < t ∧ ξ)`: the path enters `K` before `t`.
    pub enters_k: MeanEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FellerVerdict {
    FellerConsistent,
    LocallyFellerOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FellerTailReport {
    pub rows: Vec<TailRow>,
    pub threshold: f64,
    pub verdict: FellerVerdict,
}

/// Estimates both tail probabilities along a sequence of start points
/// escaping to `Δ`. The verdict reads the last start point.
pub fn feller_tail_check(
    fam: &FamilySimulator,
    k: &ClosedInterval,
    t: f64,
    a_seq: &[f64],
    n: usize,
    seed: u64,
) -> Result<FellerTailReport> {
    if a_seq.is_empty() || n == 0 || !(t > 0.0) {
        return Err(Error::InvalidParameter("need start points, n ≥ 1 and t > 0".into()));
    }
    let fam_t = fam.with_horizon(Horizon::Fixed(t));
    let enter = StoppingSpec::Enter(*k);
    let rows: Vec<TailRow> = a_seq
        .iter()
        .map(|&a| {
            let hits = map_paths(&fam_t, &InitialLaw::dirac(a), n, seed, |_, p, _| {
                let inside = k.contains(p.evaluate(t));
                let entered = enter.eval(p) < t.min(p.explosion_time());
                (f64::from(u8::from(inside)), f64::from(u8::from(entered)))
            });
            let (xs, ys): (Vec<f64>, Vec<f64>) = hits.into_iter().unzip();
            TailRow { a, in_k: MeanEstimate::from_samples(&xs), enters_k: MeanEstimate::from_samples(&ys) }
        })
        .collect();
    let last = rows.last().expect("nonempty");
    let verdict = if last.in_k.mean < FELLER_TAIL_THRESHOLD && last.enters_k.mean < FELLER_TAIL_THRESHOLD {
        FellerVerdict::FellerConsistent
    } else {
        FellerVerdict::LocallyFellerOnly
    };
    Ok(FellerTailReport { rows, threshold: FELLER_TAIL_THRESHOLD, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiContinuity {
    pub jumps: usize,
    pub n: usize,
    pub fraction: f64,
}

impl QuasiContinuity {
    pub fn passed(&self) -> bool {
        self.jumps == 0
    }
}

/// Fraction of paths with a recorded jump exactly at the fixed time `t`.
pub fn quasi_continuity_check(ens: &Ensemble, t: f64) -> Result<QuasiContinuity> {
    if ens.is_empty() {
        return Err(Error::TooFewPaths { needed: 1, got: 0 });
    }
    ens.require_horizon(t)?;
    let jumps = ens.paths.par_iter().filter(|p| p.has_jump_at(t)).count();
    Ok(QuasiContinuity { jumps, n: ens.len(), fraction: jumps as f64 / ens.len() as f64 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport {
    pub hits: usize,
    /// `f(X_{τ+u})` over paths with `X_τ` in the bin.
    pub conditioned: MeanEstimate,
    /// `f(X_u)` over fresh paths started at the conditioned `X_τ` values.
    pub fresh: MeanEstimate,
    pub z: f64,
}

impl MarkovReport {
    pub fn passed(&self) -> bool {
        self.z.abs() <= Z_SINGLE
    }
}

/// Compares `f(X_{τ+u})` given `X_τ ∈ bin` with a fresh start from the same
/// points. Paths whose faithful horizon ends before `τ + u` are left out;
/// that event is decided at time `τ`, so the comparison stays fair.
#[allow(clippy::too_many_arguments)]
pub fn markov_conditioning_check(
    fam: &FamilySimulator,
    init: &InitialLaw,
    tau: &StoppingSpec,
    bin: &ClosedInterval,
    f: &TestFunction,
    u: f64,
    n: usize,
    seed: u64,
) -> Result<MarkovReport> {
    if !(u >= 0.0) {
        return Err(Error::InvalidParameter(format!("lag must be nonnegative, got {u}")));
    }
    let hits: Vec<(f64, f64)> = map_paths(fam, init, n, seed, |_, p, h| {
        let s = tau.eval(p);
        if !(s + u <= h) {
            return None;
        }
        match p.evaluate(s) {
            StatePoint::Interior(x) if bin.contains_value(x) => Some((x, f.eval_point(p.evaluate(s + u)))),
            _ => None,
        }
    })
    .into_iter()
    .flatten()
    .collect();
    if hits.len() < MIN_BIN_HITS {
        return Err(Error::SparseBin { hits: hits.len(), needed: MIN_BIN_HITS });
    }
    let fresh_fam = fam.with_horizon(Horizon::Fixed(u));
    let fresh_master = derive_seed(seed, u64::MAX);
    let fresh: Vec<f64> = hits
        .par_iter()
        .enumerate()
        .map(|(i, &(x, _))| {
            let (p, _) = fresh_fam.simulate(StatePoint::Interior(x), derive_seed(fresh_master, i as u64));
            f.eval_point(p.evaluate(u))
        })
        .collect();
    let conditioned: Vec<f64> = hits.iter().map(|h| h.1).collect();
    let (c, fr) = (MeanEstimate::from_samples(&conditioned), MeanEstimate::from_samples(&fresh));
    let se = (c.se * c.se + fr.se * fr.se).sqrt();
    Ok(MarkovReport { hits: hits.len(), z: z_score(c.mean - fr.mean, se), conditioned: c, fresh: fr })
}
