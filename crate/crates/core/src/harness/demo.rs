//! Time-changing a family and re-running the Feller tail and martingale
//! checks on the transformed laws.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::martingale::{martingale_suite, suite_cells, FellerTailReport, FellerVerdict, SuiteReport, TailRow, FELLER_TAIL_THRESHOLD};
use crate::operator::{scale_operator, Operator};
use crate::path::StoppingSpec;
use crate::simulators::{Ensemble, FamilySimulator, Horizon, InitialLaw};
use crate::speed::SpeedFunction;
use crate::state_space::{ClosedInterval, OpenInterval};
use crate::stats::MeanEstimate;
use crate::time_change::pushforward_ensemble;

/// Checks run on `g·P`.
#[derive(Clone, Debug)]
pub struct DemoChecks {
    pub init: InitialLaw,
    /// Time of the transformed process up to which paths are simulated.
    pub target: f64,
    /// Cap on the original time spent reaching `target`.
    pub cap: f64,
    /// Operator of the original family; `None` skips the martingale suite.
    pub operator: Option<Operator>,
    pub opens: Vec<OpenInterval>,
    pub windows: Vec<(f64, f64)>,
    pub n: usize,
    pub k: ClosedInterval,
    pub tail_time: f64,
    pub a_seq: Vec<f64>,
    pub tail_n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub label: String,
    /// Fraction of transformed paths exploding before `target`.
    pub explosion_fraction: f64,
    pub suite: Option<SuiteReport>,
    pub tail: FellerTailReport,
}

#[derive(Serialize)]
struct Row<'a> {
    check: &'a str,
    detail: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.suite.as_ref().is_none_or(SuiteReport::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut rows = vec![Row {
            check: "explosion_fraction",
            detail: self.label.clone(),
            value: self.explosion_fraction,
            threshold: f64::NAN,
            pass: true,
        }];
        if let Some(s) = &self.suite {
            for m in &s.statistics {
                rows.push(Row {
                    check: "martingale_z",
                    detail: format!("{} U={} s={} t={}", m.cell.pair, m.cell.u.map_or("S".into(), |u| u.to_string()), m.cell.s, m.cell.t),
                    value: m.z,
                    threshold: s.threshold,
                    pass: m.z.abs() <= s.threshold,
                });
            }
        }
        for r in &self.tail.rows {
            let ok = self.tail.verdict == FellerVerdict::FellerConsistent;
            rows.push(Row { check: "tail_in_k", detail: format!("a={}", r.a), value: r.in_k.mean, threshold: self.tail.threshold, pass: ok });
            rows.push(Row {
                check: "tail_enters_k",
                detail: format!("a={}", r.a),
                value: r.enters_k.mean,
                threshold: self.tail.threshold,
                pass: ok,
            });
        }
        let mut out = String::from("check,detail,value,threshold,pass\n");
        for r in rows {
            out.push_str(&format!("{},\"{}\",{},{},{}\n", r.check, r.detail, r.value, r.threshold, r.pass));
        }
        out
    }
}

/// Simulates `fam` long enough for `g·P` to be known up to `checks.target`,
/// then runs the Feller tail check and, with `g·L`, the martingale suite on
/// the transformed ensembles.
pub fn timechange_to_feller_demo(fam: &FamilySimulator, g: &SpeedFunction, checks: &DemoChecks) -> Result<DemoReport> {
    if !g.is_strictly_positive() {
        return Err(Error::InvalidParameter(format!("speed {g} must be positive on S")));
    }
    let clocked = fam.with_horizon(Horizon::Clock { speed: g.clone(), target: checks.target, cap: checks.cap });
    let transformed = |init: &InitialLaw, n: usize| pushforward_ensemble(&Ensemble::generate(&clocked, init, n, checks.seed), g);

    let ens = transformed(&checks.init, checks.n);
    let exploded = ens.paths.iter().filter(|p| p.explosion_time() <= checks.target).count();
    let suite = match &checks.operator {
        Some(l) => {
            let cells = suite_cells(&scale_operator(l, g), &checks.opens, &checks.windows);
            Some(martingale_suite(&ens, &cells)?)
        }
        None => None,
    };

    let t = checks.tail_time;
    if t > checks.target {
        return Err(Error::BeyondHorizon { t, horizon: checks.target });
    }
    let enter = StoppingSpec::Enter(checks.k);
    let rows: Vec<TailRow> = checks
        .a_seq
        .iter()
        .map(|&a| {
            let ens = transformed(&InitialLaw::dirac(a), checks.tail_n);
            let (xs, ys): (Vec<f64>, Vec<f64>) = ens
                .paths
                .iter()
                .map(|p| {
                    let inside = checks.k.contains(p.evaluate(t));
                    let entered = enter.eval(p) < t.min(p.explosion_time());
                    (f64::from(u8::from(inside)), f64::from(u8::from(entered)))
                })
                .unzip();
            TailRow { a, in_k: MeanEstimate::from_samples(&xs), enters_k: MeanEstimate::from_samples(&ys) }
        })
        .collect();
    let verdict = match rows.last() {
        Some(r) if r.in_k.mean >= FELLER_TAIL_THRESHOLD || r.enters_k.mean >= FELLER_TAIL_THRESHOLD => {
            FellerVerdict::LocallyFellerOnly
        }
        _ => FellerVerdict::FellerConsistent,
    };
    Ok(DemoReport {
        label: ens.label.clone(),
        explosion_fraction: exploded as f64 / ens.len().max(1) as f64,
        suite,
        tail: FellerTailReport { rows, threshold: FELLER_TAIL_THRESHOLD, verdict },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Coefficient, TestFunction};
    use crate::operator::Generator;
    use crate::simulators::{FamilyKind, DEFAULT_ESCAPE};

    fn checks(init: f64, operator: Option<Operator>, n: usize) -> DemoChecks {
        DemoChecks {
            init: InitialLaw::dirac(init),
            target: 1.0,
            cap: 1000.0,
            operator,
            opens: vec![OpenInterval::new(-5.0, 5.0)],
            windows: vec![(0.2, 1.0)],
            n,
            k: ClosedInterval::new(-1.0, 1.0),
            tail_time: 1.0,
            a_seq: vec![10.0],
            tail_n: 200,
            seed: 9,
        }
    }

    #[test]
    fn slowing_an_explosive_flow_removes_the_explosion() {
        let fam = FamilySimulator::new(
            FamilyKind::Ode { drift: Coefficient::X2, dt: 1e-4, r_escape: DEFAULT_ESCAPE },
            Horizon::Fixed(1.0),
        )
        .unwrap();
        let r = timechange_to_feller_demo(&fam, &SpeedFunction::InvOnePlusX2, &checks(2.0, None, 10)).unwrap();
        assert_eq!(r.explosion_fraction, 0.0);
        assert_eq!(r.tail.verdict, FellerVerdict::FellerConsistent);
    }

    #[test]
    fn unit_speed_reproduces_the_base_checks() {
        let fam = FamilySimulator::brownian(1e-3, 1.0);
        let l = Operator::from_generator(&[TestFunction::gaussian_bump(0.0, 1.0)], &Generator::brownian());
        let r = timechange_to_feller_demo(&fam, &SpeedFunction::constant(1.0), &checks(0.0, Some(l.clone()), 2000)).unwrap();
        let base = Ensemble::generate(&fam, &InitialLaw::dirac(0.0), 2000, 9);
        let direct = martingale_suite(&base, &suite_cells(&l, &[OpenInterval::new(-5.0, 5.0)], &[(0.2, 1.0)])).unwrap();
        assert_eq!(r.suite.as_ref().unwrap().statistics[0].estimate, direct.statistics[0].estimate);
        assert!(r.passed());
    }

    #[test]
    fn accelerated_brownian_motion_solves_the_scaled_problem() {
        let fam = FamilySimulator::brownian(1e-3, 1.0);
        let l = Operator::from_generator(&[TestFunction::gaussian_bump(0.0, 1.0)], &Generator::brownian());
        let r = timechange_to_feller_demo(&fam, &SpeedFunction::OnePlusX2, &checks(0.0, Some(l), 10_000)).unwrap();
        assert!(r.passed(), "{:?}", r.suite);
        assert!(r.to_csv().contains("martingale_z"));
    }
}
