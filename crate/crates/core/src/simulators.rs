//! Built-in example families with known generators, and seeded ensembles.
//!
//! Every path is a deterministic function of its start point and its derived
//! seed, so ensembles are reproducible regardless of how work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Coefficient, TestFunction};
use crate::operator::{Generator, Operator};
use crate::path::{PathKind, StepPath};
use crate::speed::SpeedFunction;
use crate::state_space::StatePoint;

pub const DEFAULT_ESCAPE: f64 = 1e8;

pub const CLOCK_MARGIN: f64 = 1e-9;

fn default_escape() -> f64 {
    DEFAULT_ESCAPE
}

fn unit_step() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    /// Explicit Euler flow of `x′ = drift(x)`.
    Ode {
        drift: Coefficient,
        dt: f64,
        #[serde(default = "default_escape")]
        r_escape: f64,
    },
    /// Euler–Maruyama scheme for `dX = drift(X)dt + sigma(X)dW`.
    Diffusion {
        drift: Coefficient,
        sigma: Coefficient,
        dt: f64,
        #[serde(default = "default_escape")]
        r_escape: f64,
    },
    /// Compound Poisson process with rate `rate` and fair `±step` jumps.
    Cpoisson {
        rate: f64,
        #[serde(default = "unit_step")]
        step: f64,
    },
    /// Continuous-time random walk with rate `n` and steps `±n^{−1/2}`.
    Chain { n: f64 },
    /// Brownian motion that acquires the constant drift `drift` once its
    /// running maximum has reached `threshold`. The future depends on the
    /// running maximum, so the position alone is not a Markov state.
    MaxSwitched { threshold: f64, drift: f64, dt: f64 },
}

/// How long each path is simulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    Fixed(f64),
    /// Until `∫_0^T du / speed(x_u) ≥ target` (capped at `cap`), so that the
    /// pushforward by `speed` is known up to time `target`. The target is
    /// overshot by the relative margin [`CLOCK_MARGIN`] so that rounding in
    /// the clock sum never leaves the pushforward short of `target`.
    Clock { speed: SpeedFunction, target: f64, cap: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySimulator {
    pub kind: FamilyKind,
    pub horizon: Horizon,
}

impl FamilySimulator {
    pub fn new(kind: FamilyKind, horizon: Horizon) -> Result<Self> {
        let fam = Self { kind, horizon };
        fam.validate()?;
        Ok(fam)
    }

    pub fn brownian(dt: f64, horizon: f64) -> Self {
        Self::new(
            FamilyKind::Diffusion { drift: Coefficient::Zero, sigma: Coefficient::One, dt, r_escape: DEFAULT_ESCAPE },
            Horizon::Fixed(horizon),
        )
        .expect("valid Brownian family")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match &self.kind {
            FamilyKind::Ode { dt, r_escape, .. } | FamilyKind::Diffusion { dt, r_escape, .. } => {
                positive("dt", *dt)?;
                positive("r_escape", *r_escape)?;
            }
            FamilyKind::Cpoisson { rate, step } => {
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidParameter(format!("rate must be nonnegative, got {rate}")));
                }
                positive("step", *step)?;
            }
            FamilyKind::Chain { n } => {
                if !(*n >= 1.0 && n.is_finite()) {
                    return Err(Error::InvalidParameter(format!("chain scale n must be ≥ 1, got {n}")));
                }
            }
            FamilyKind::MaxSwitched { dt, .. } => positive("dt", *dt)?,
        }
        match &self.horizon {
            Horizon::Fixed(t) => positive("horizon", *t),
            Horizon::Clock { target, cap, .. } => {
                positive("clock target", *target)?;
                positive("horizon cap", *cap)
            }
        }
    }

    pub fn with_horizon(&self, horizon: Horizon) -> Self {
        Self { kind: self.kind.clone(), horizon }
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            FamilyKind::Ode { drift, .. } => format!("ode(b={drift})"),
            FamilyKind::Diffusion { drift, sigma, .. } => format!("diffusion(b={drift},sigma={sigma})"),
            FamilyKind::Cpoisson { rate, step } => format!("cpoisson(rate={rate},step={step})"),
            FamilyKind::Chain { n } => format!("chain(n={n})"),
            FamilyKind::MaxSwitched { threshold, drift, .. } => format!("max_switched({threshold},{drift})"),
        }
    }

    /// The generator this family is claimed to solve. `None` for families
    /// without a Markov generator.
    pub fn declared_generator(&self) -> Option<Generator> {
        match &self.kind {
            FamilyKind::Ode { drift, .. } => Some(Generator::Local {
                drift: drift.clone(),
                sigma: Coefficient::Zero,
                potential: Coefficient::Zero,
            }),
            FamilyKind::Diffusion { drift, sigma, .. } => Some(Generator::Local {
                drift: drift.clone(),
                sigma: sigma.clone(),
                potential: Coefficient::Zero,
            }),
            FamilyKind::Cpoisson { rate, step } => Some(Generator::Jump { rate: *rate, step: *step }),
            FamilyKind::Chain { n } => Some(Generator::chain(*n)),
            FamilyKind::MaxSwitched { .. } => None,
        }
    }

    /// The declared generator as pairs over the given test functions.
    pub fn declared_operator(&self, fs: &[TestFunction]) -> Option<Operator> {
        self.declared_generator().map(|g| Operator::from_generator(fs, &g))
    }

    /// One path started at `a`, together with the time up to which it is a
    /// faithful sample (`∞` once the path has exploded).
    pub fn simulate(&self, a: StatePoint, seed: u64) -> (StepPath, f64) {
        let Some(x0) = a.coord() else {
            return (StepPath::dead(), f64::INFINITY);
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stop = Stopper::new(&self.horizon);
        let path = match &self.kind {
            FamilyKind::Ode { drift, dt, r_escape } => {
                euler(x0, *dt, *r_escape, &mut stop, |x, _| x + drift.eval(x) * dt)
            }
            FamilyKind::Diffusion { drift, sigma, dt, r_escape } => {
                let sq = dt.sqrt();
                euler(x0, *dt, *r_escape, &mut stop, |x, _| {
                    let z: f64 = rng.sample(StandardNormal);
                    x + drift.eval(x) * dt + sigma.eval(x) * sq * z
                })
            }
            FamilyKind::Cpoisson { rate, step } => jumps(x0, *rate, *step, &mut stop, &mut rng),
            FamilyKind::Chain { n } => jumps(x0, *n, 1.0 / n.sqrt(), &mut stop, &mut rng),
            FamilyKind::MaxSwitched { threshold, drift, dt } => {
                let sq = dt.sqrt();
                let mut running_max = x0;
                euler(x0, *dt, DEFAULT_ESCAPE, &mut stop, |x, _| {
                    running_max = running_max.max(x);
                    let b = if running_max >= *threshold { *drift } else { 0.0 };
                    let z: f64 = rng.sample(StandardNormal);
                    x + b * dt + sq * z
                })
            }
        };
        let horizon = if path.explosion_time().is_finite() { f64::INFINITY } else { stop.reached };
        (path, horizon)
    }
}

/// Tracks the simulation horizon, in plain time or in clock time.
struct Stopper<'a> {
    fixed: f64,
    clock: Option<(&'a SpeedFunction, f64)>,
    acc: f64,
    reached: f64,
}

impl<'a> Stopper<'a> {
    fn new(h: &'a Horizon) -> Self {
        match h {
            Horizon::Fixed(t) => Self { fixed: *t, clock: None, acc: 0.0, reached: 0.0 },
            Horizon::Clock { speed, target, cap } => {
                Self { fixed: *cap, clock: Some((speed, *target * (1.0 + CLOCK_MARGIN))), acc: 0.0, reached: 0.0 }
            }
        }
    }

    /// Records that the path sits at `x` on `[from, to)`. Returns true when
    /// the horizon falls strictly inside that segment, so that the value at
    /// the horizon is already known.
    fn segment(&mut self, x: f64, from: f64, to: f64) -> bool {
        let mut end = self.fixed;
        if let Some((g, target)) = self.clock {
            let rate = g.eval(x);
            if rate > 0.0 {
                end = end.min(from + (target - self.acc) * rate);
                self.acc += (to.min(end) - from) / rate;
            } else {
                end = from;
            }
        }
        if end < to {
            self.reached = end.max(from);
            true
        } else {
            false
        }
    }
}

/// Grid scheme `x_{k+1} = step(x_k, k)` on knots `k·dt`, marking `ξ` at the
/// first step leaving `(−r_escape, r_escape)`.
fn euler<F: FnMut(f64, usize) -> f64>(x0: f64, dt: f64, r_escape: f64, stop: &mut Stopper, mut step: F) -> StepPath {
    let mut values = vec![x0];
    let mut x = x0;
    let mut k = 0usize;
    loop {
        let t = k as f64 * dt;
        let next = (k + 1) as f64 * dt;
        if stop.segment(x, t, next) {
            break;
        }
        let y = step(x, k);
        k += 1;
        if !(y.abs() < r_escape) {
            return StepPath::grid(dt, values, next).expect("escape path is valid");
        }
        values.push(y);
        x = y;
    }
    StepPath::grid(dt, values, f64::INFINITY).expect("grid path is valid")
}

/// Event-driven path with exponential waiting times and fair `±step` jumps.
fn jumps(x0: f64, rate: f64, step: f64, stop: &mut Stopper, rng: &mut ChaCha8Rng) -> StepPath {
    let mut times = vec![0.0];
    let mut values = vec![x0];
    let exp = (rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let next = match &exp {
            Some(e) => t + rng.sample::<f64, _>(e),
            None => f64::INFINITY,
        };
        if stop.segment(x, t, next) || next <= t {
            break;
        }
        t = next;
        x += if rng.random::<bool>() { step } else { -step };
        times.push(t);
        values.push(x);
    }
    StepPath::new(times, values, f64::INFINITY).expect("jump path is valid").with_kind(PathKind::Jump)
}

/// `splitmix64` finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Seed of the start-point stream under `master`.
fn start_stream_seed(master: u64) -> u64 {
    splitmix64(master ^ 0xA5A5_5A5A_C3C3_3C3C)
}

/// Finite initial law `Σ p_i δ_{a_i}`; Δ is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(StatePoint, f64)>", into = "Vec<(StatePoint, f64)>")]
pub struct InitialLaw {
    atoms: Vec<(StatePoint, f64)>,
}

impl TryFrom<Vec<(StatePoint, f64)>> for InitialLaw {
    type Error = Error;

    fn try_from(atoms: Vec<(StatePoint, f64)>) -> Result<Self> {
        InitialLaw::new(atoms)
    }
}

impl From<InitialLaw> for Vec<(StatePoint, f64)> {
    fn from(law: InitialLaw) -> Self {
        law.atoms
    }
}

impl InitialLaw {
    pub fn new(atoms: Vec<(StatePoint, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("no atoms".into()));
        }
        if let Some((a, p)) = atoms.iter().find(|(_, p)| !(*p >= 0.0)) {
            return Err(Error::InvalidLaw(format!("negative weight {p} at {a}")));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(a: impl Into<StatePoint>) -> Self {
        Self { atoms: vec![(a.into(), 1.0)] }
    }

    pub fn atoms(&self) -> &[(StatePoint, f64)] {
        &self.atoms
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> StatePoint {
        let mut acc = 0.0;
        for &(a, p) in &self.atoms {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.atoms.iter().rev().find(|(_, p)| *p > 0.0).expect("positive weight").0
    }

    /// `n` start points from the dedicated stream of `master`.
    pub fn draw(&self, n: usize, master: u64) -> Vec<StatePoint> {
        if let [(a, _)] = self.atoms.as_slice() {
            return vec![*a; n];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(start_stream_seed(master));
        (0..n).map(|_| self.sample_with(rng.random::<f64>())).collect()
    }
}

/// Seeded collection of paths drawn from `P_μ`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub paths: Vec<StepPath>,
    /// Per-path time up to which the path is a faithful sample.
    pub horizons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub label: String,
    pub init: InitialLaw,
    pub master_seed: u64,
}

impl Ensemble {
    pub fn generate(fam: &FamilySimulator, init: &InitialLaw, n: usize, master_seed: u64) -> Ensemble {
        let starts = init.draw(n, master_seed);
        let (paths, horizons): (Vec<StepPath>, Vec<f64>) = (0..n)
            .into_par_iter()
            .map(|i| fam.simulate(starts[i], derive_seed(master_seed, i as u64)))
            .unzip();
        Ensemble {
            paths,
            horizons,
            seeds: (0..n as u64).map(|i| derive_seed(master_seed, i)).collect(),
            label: fam.label(),
            init: init.clone(),
            master_seed,
        }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Smallest per-path horizon.
    pub fn min_horizon(&self) -> f64 {
        self.horizons.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fails unless every path is a faithful sample up to `t`.
    pub fn require_horizon(&self, t: f64) -> Result<()> {
        let h = self.min_horizon();
        if t > h {
            return Err(Error::BeyondHorizon { t, horizon: h });
        }
        Ok(())
    }
}

/// Simulates `n` paths exactly as [`Ensemble::generate`] would and maps each
/// through `f` without keeping the paths, in path order.
pub fn map_paths<R, F>(fam: &FamilySimulator, init: &InitialLaw, n: usize, master_seed: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, &StepPath, f64) -> R + Sync,
{
    let starts = init.draw(n, master_seed);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (p, h) = fam.simulate(starts[i], derive_seed(master_seed, i as u64));
            f(i, &p, h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::MeanEstimate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ode(drift: Coefficient, dt: f64, horizon: f64) -> FamilySimulator {
        FamilySimulator::new(FamilyKind::Ode { drift, dt, r_escape: DEFAULT_ESCAPE }, Horizon::Fixed(horizon)).unwrap()
    }

    #[test]
    fn ode_blow_up_time() {
        let (p, h) = ode(Coefficient::X2, 1e-5, 2.0).simulate(2.0.into(), 0);
        assert_abs_diff_eq!(p.explosion_time(), 0.5, epsilon = 5e-3);
        assert_eq!(h, f64::INFINITY);
        assert!(p.left_limit_at_explosion().is_none());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn ode_trivial_and_cubic() {
        let (p, _) = ode(Coefficient::Zero, 1e-2, 3.0).simulate(1.0.into(), 0);
        assert_eq!(p.explosion_time(), f64::INFINITY);
        assert!(p.values().iter().all(|&v| v == 1.0));
        let (p, _) = ode(Coefficient::NegX3, 1e-5, 1.0).simulate(100.0.into(), 0);
        let want = 100.0 / (1.0 + 2.0 * 1e4f64).sqrt();
        assert_abs_diff_eq!(p.evaluate(1.0).coord().unwrap(), want, epsilon = 1e-2);
    }

    #[test]
    fn degenerate_diffusion_is_the_ode() {
        let dt = 1e-3;
        let diff = FamilySimulator::new(
            FamilyKind::Diffusion { drift: Coefficient::NegX3, sigma: Coefficient::Zero, dt, r_escape: DEFAULT_ESCAPE },
            Horizon::Fixed(2.0),
        )
        .unwrap();
        let flow = ode(Coefficient::NegX3, dt, 2.0);
        for seed in 0..5 {
            let (a, _) = diff.simulate(3.0.into(), seed);
            let (b, _) = flow.simulate(3.0.into(), seed);
            assert!(a.same_knots(&b));
        }
    }

    #[test]
    fn brownian_variance() {
        let fam = FamilySimulator::brownian(1e-2, 1.0);
        let xs = map_paths(&fam, &InitialLaw::dirac(0.0), 10_000, 11, |_, p, _| {
            let x = p.evaluate(1.0).coord().unwrap();
            x * x
        });
        let e = MeanEstimate::from_samples(&xs);
        assert!((e.mean - 1.0).abs() <= 4.0 * e.se, "{e:?}");
    }

    #[test]
    fn poisson_counts_and_no_fixed_time_jumps() {
        let fam = FamilySimulator::new(FamilyKind::Cpoisson { rate: 1.0, step: 1.0 }, Horizon::Fixed(1.0)).unwrap();
        let out = map_paths(&fam, &InitialLaw::dirac(0.0), 10_000, 5, |_, p, _| {
            let count = (0..p.len()).filter(|&i| p.time(i) <= 1.0).count() - 1;
            (count as f64, p.has_jump_at(0.5))
        });
        let counts: Vec<f64> = out.iter().map(|o| o.0).collect();
        let e = MeanEstimate::from_samples(&counts);
        assert!((e.mean - 1.0).abs() <= 4.0 * e.se, "{e:?}");
        assert!(out.iter().all(|o| !o.1));
        let lazy = FamilySimulator::new(FamilyKind::Cpoisson { rate: 0.0, step: 1.0 }, Horizon::Fixed(1.0)).unwrap();
        assert!(lazy.simulate(2.0.into(), 3).0.same_knots(&StepPath::constant(2.0)));
    }

    #[test]
    fn chain_diffusive_scaling() {
        let fam = FamilySimulator::new(FamilyKind::Chain { n: 1e4 }, Horizon::Fixed(1.0)).unwrap();
        let xs = map_paths(&fam, &InitialLaw::dirac(0.0), 10_000, 17, |_, p, _| p.evaluate(1.0).coord().unwrap().powi(2));
        let e = MeanEstimate::from_samples(&xs);
        assert!((e.mean - 1.0).abs() <= 4.0 * e.se, "{e:?}");
        let unit = FamilySimulator::new(FamilyKind::Chain { n: 1.0 }, Horizon::Fixed(5.0)).unwrap();
        let (p, _) = unit.simulate(0.0.into(), 1);
        assert!(p.values().windows(2).all(|w| (w[1] - w[0]).abs() == 1.0));
    }

    #[test]
    fn initial_laws() {
        let fam = FamilySimulator::brownian(1e-2, 0.1);
        let ens = Ensemble::generate(&fam, &InitialLaw::dirac(0.3), 50, 1);
        assert!(ens.paths.iter().all(|p| p.start() == StatePoint::Interior(0.3)));
        let half = InitialLaw::new(vec![(0.0.into(), 0.5), (1.0.into(), 0.5)]).unwrap();
        let starts = half.draw(10_000, 2);
        let ones: Vec<f64> = starts.iter().map(|a| if *a == StatePoint::Interior(1.0) { 1.0 } else { 0.0 }).collect();
        let e = MeanEstimate::from_samples(&ones);
        assert!((e.mean - 0.5).abs() <= 4.0 * e.se);
        let dead = Ensemble::generate(&fam, &InitialLaw::dirac(StatePoint::Delta), 10, 1);
        assert!(dead.paths.iter().all(|p| p.explosion_time() == 0.0));
        assert!(InitialLaw::new(vec![(0.0.into(), 0.5)]).is_err());
        assert!(InitialLaw::new(vec![(0.0.into(), 1.5), (1.0.into(), -0.5)]).is_err());
    }

    #[test]
    fn initial_law_config_form() {
        let law: InitialLaw = serde_json::from_str(r#"[[0.0, 0.25], ["delta", 0.75]]"#).unwrap();
        assert_eq!(law.atoms()[1].0, StatePoint::Delta);
        assert!(serde_json::from_str::<InitialLaw>(r#"[[0.0, 0.25]]"#).is_err());
    }

    #[test]
    fn clock_horizon_reaches_target() {
        let fam = FamilySimulator::brownian(1e-2, 1.0).with_horizon(Horizon::Clock {
            speed: SpeedFunction::OnePlusX2,
            target: 1.0,
            cap: 100.0,
        });
        for seed in 0..20 {
            let (p, h) = fam.simulate(0.0.into(), seed);
            let a = crate::time_change::clock(&p, &SpeedFunction::OnePlusX2, h).unwrap();
            assert!(a >= 1.0 || h == 100.0, "seed {seed}: clock {a} at horizon {h}");
        }
    }

    #[test]
    fn ensembles_independent_of_thread_count() {
        let fam = FamilySimulator::brownian(1e-2, 1.0);
        let law = InitialLaw::new(vec![(0.0.into(), 0.5), (2.0.into(), 0.5)]).unwrap();
        let a = Ensemble::generate(&fam, &law, 64, 99);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| Ensemble::generate(&fam, &law, 64, 99));
        assert!(a.paths.iter().zip(&b.paths).all(|(x, y)| x.same_knots(y)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn simulator_output_is_valid(seed in any::<u64>(), a in -3.0f64..3.0, which in 0usize..5) {
            let kind = match which {
                0 => FamilyKind::Ode { drift: Coefficient::X2, dt: 1e-3, r_escape: 1e6 },
                1 => FamilyKind::Diffusion { drift: Coefficient::Identity, sigma: Coefficient::One, dt: 1e-3, r_escape: 1e6 },
                2 => FamilyKind::Cpoisson { rate: 3.0, step: 0.5 },
                3 => FamilyKind::Chain { n: 50.0 },
                _ => FamilyKind::MaxSwitched { threshold: 0.5, drift: 2.0, dt: 1e-3 },
            };
            let fam = FamilySimulator::new(kind, Horizon::Fixed(1.0)).unwrap();
            let (p, h) = fam.simulate(a.into(), seed);
            prop_assert!(p.validate().is_ok());
            prop_assert!(h >= 1.0);
            let (q, _) = fam.simulate(a.into(), seed);
            prop_assert!(p.same_knots(&q));
        }
    }
}
