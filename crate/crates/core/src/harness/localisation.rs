//! Two families sharing a generator on `U` must have the same stopped laws
//! up to the exit of `U`.

use crate::error::{Error, Result};
use crate::harness::convergence::{Functional, KsCell};
use crate::simulators::{map_paths, FamilySimulator, InitialLaw};
use crate::state_space::OpenInterval;
use crate::stats::{ks_critical, ks_statistic, FAMILY_ALPHA};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalisationReport {
    pub u: OpenInterval,
    pub cells: Vec<KsCell>,
    /// Paths whose stopped versions coincide exactly (matched seeds).
    pub identical_paths: usize,
    pub n: usize,
}

impl LocalisationReport {
    pub fn agrees(&self) -> bool {
        self.cells.iter().all(KsCell::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,functional,ks,critical,pass,identical_paths,n\n");
        for c in &self.cells {
            out.push_str(&format!(
                "\"{}\",\"{}\",{},{},{},{},{}\n",
                self.u,
                c.functional,
                c.statistic,
                c.critical,
                c.passed(),
                self.identical_paths,
                self.n
            ));
        }
        out
    }
}

/// KS comparison of functionals of the paths stopped at `τ^U`, both
/// families simulated with the same master seed.
pub fn localisation_experiment(
    fam_a: &FamilySimulator,
    fam_b: &FamilySimulator,
    init: &InitialLaw,
    u: &OpenInterval,
    functionals: &[Functional],
    n: usize,
    seed: u64,
) -> Result<LocalisationReport> {
    if functionals.is_empty() || n == 0 {
        return Err(Error::InvalidParameter("localisation needs functionals and n ≥ 1".into()));
    }
    let stopped = |fam: &FamilySimulator| {
        map_paths(fam, init, n, seed, |_, p, _| {
            let s = p.stop_at(p.exit_time(u));
            let vals: Vec<f64> = functionals.iter().map(|f| f.eval(&s)).collect();
            (vals, s)
        })
    };
    let a = stopped(fam_a);
    let b = stopped(fam_b);
    let identical_paths = a.iter().zip(&b).filter(|(x, y)| x.1.same_knots(&y.1)).count();
    let critical = ks_critical(FAMILY_ALPHA / functionals.len() as f64, n, n);
    let cells = functionals
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let xa: Vec<f64> = a.iter().map(|r| r.0[k]).collect();
            let xb: Vec<f64> = b.iter().map(|r| r.0[k]).collect();
            KsCell { functional: f.to_string(), statistic: ks_statistic(&xa, &xb), critical }
        })
        .collect();
    Ok(LocalisationReport { u: *u, cells, identical_paths, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Coefficient, TestFunction};
    use crate::simulators::{FamilyKind, Horizon};

    fn diffusion(drift: Coefficient) -> FamilySimulator {
        FamilySimulator::new(
            FamilyKind::Diffusion { drift, sigma: Coefficient::One, dt: 1e-2, r_escape: 1e8 },
            Horizon::Fixed(2.0),
        )
        .unwrap()
    }

    fn dictionary() -> Vec<Functional> {
        vec![
            Functional::Coordinate { time: 1.0 },
            Functional::Coordinate { time: 2.0 },
            Functional::Test { f: TestFunction::gaussian_bump(0.0, 1.0), time: 2.0 },
        ]
    }

    #[test]
    fn drift_outside_u_is_invisible_before_the_exit() {
        let a = diffusion(Coefficient::Zero);
        let b = diffusion(Coefficient::OutsideInterval { lo: -1.0, hi: 1.0, value: 10.0 });
        let init = InitialLaw::dirac(0.0);
        let inside = localisation_experiment(&a, &b, &init, &OpenInterval::new(-1.0, 1.0), &dictionary(), 2000, 4).unwrap();
        assert!(inside.agrees());
        assert_eq!(inside.identical_paths, 2000);
        let wide = localisation_experiment(&a, &b, &init, &OpenInterval::new(-3.0, 3.0), &dictionary(), 2000, 4).unwrap();
        assert!(!wide.agrees());
    }
}
