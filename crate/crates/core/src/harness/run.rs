//! Executes the experiments of a configuration in order and writes one CSV
//! per report plus `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{Expect, Experiment, ExperimentConfig, FamilyBlock};
use crate::harness::convergence::{law_convergence_table, operator_convergence_table};
use crate::harness::demo::{timechange_to_feller_demo, DemoChecks};
use crate::harness::localisation::localisation_experiment;
use crate::martingale::{
    feller_tail_check, generator_estimate, markov_conditioning_check, martingale_suite, quasi_continuity_check, suite_cells,
    FellerVerdict,
};
use crate::operator::{default_probe_grid, pmp_check, scale_operator, Operator, DEFAULT_PMP_TOL};
use crate::simulators::{derive_seed, Ensemble, FamilySimulator, Horizon};
use crate::skorokhod::aldous_tightness;
use crate::state_space::StateSpace;
use crate::time_change::pushforward_ensemble;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Emit a gnuplot script next to every CSV.
    pub gnuplot: bool,
    /// Restrict to these experiment types.
    pub only: Option<Vec<&'static str>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub expect: String,
    /// Whether the underlying check passed, before applying `expect`.
    pub check_passed: Option<bool>,
    pub ok: bool,
    pub seed: u64,
    pub files: Vec<String>,
    pub summary: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub experiments: Vec<ExperimentRecord>,
    pub all_ok: bool,
}

impl Manifest {
    /// `0` when every experiment met its expectation, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_ok {
            0
        } else {
            1
        }
    }
}

struct Outcome {
    passed: bool,
    files: Vec<(&'static str, String)>,
    summary: String,
}

fn horizon_of(fam: &FamilySimulator) -> f64 {
    match &fam.horizon {
        Horizon::Fixed(t) => *t,
        Horizon::Clock { target, .. } => *target,
    }
}

fn declared(fam: &FamilySimulator) -> Result<crate::operator::Generator> {
    fam.declared_generator()
        .ok_or_else(|| Error::InvalidParameter(format!("family {} declares no generator", fam.label())))
}

fn run_one(space: &StateSpace, e: &Experiment, seed: u64) -> Result<Outcome> {
    match e {
        Experiment::MartingaleSuite { family, init, n, test_functions, generator, scale, cap, opens, windows, .. } => {
            let fam = &family.0;
            let g = match generator {
                Some(g) => g.clone(),
                None => declared(fam)?,
            };
            let mut l = Operator::from_generator(test_functions, &g);
            let ens = match scale {
                Some(h) => {
                    let clocked =
                        fam.with_horizon(Horizon::Clock { speed: h.clone(), target: horizon_of(fam), cap: *cap });
                    l = scale_operator(&l, h);
                    pushforward_ensemble(&Ensemble::generate(&clocked, init, *n, seed), h)
                }
                None => Ensemble::generate(fam, init, *n, seed),
            };
            let opens: Vec<_> = opens.iter().map(|b| b.open()).collect();
            let report = martingale_suite(&ens, &suite_cells(&l, &opens, windows))?;
            let mut csv = String::from("pair_id,pair,u,s,t,estimate,se,z,threshold,verdict\n");
            let per_pair = opens.len() * windows.len();
            for (i, m) in report.statistics.iter().enumerate() {
                let u = m.cell.u.map_or("S".to_string(), |u| u.to_string());
                let ok = m.z.abs() <= report.threshold;
                csv.push_str(&format!(
                    "{},\"{}\",\"{u}\",{},{},{},{},{},{},{}\n",
                    i / per_pair.max(1),
                    m.cell.pair,
                    m.cell.s,
                    m.cell.t,
                    m.estimate,
                    m.se,
                    m.z,
                    report.threshold,
                    if ok { "pass" } else { "reject" }
                ));
            }
            let max_z = report.statistics.iter().map(|m| m.z.abs()).fold(0.0, f64::max);
            Ok(Outcome {
                passed: report.passed(),
                files: vec![("", csv)],
                summary: format!("{} cells, max |z| = {max_z:.3}, threshold {:.3}", report.statistics.len(), report.threshold),
            })
        }
        Experiment::GeneratorEstimate { family, start, f, opens, t_grid, n, target, .. } => {
            let fam = &family.0;
            let target = match target {
                Some(t) => *t,
                None => {
                    let x = start.coord().ok_or_else(|| Error::InvalidParameter("start must be a point of S".into()))?;
                    declared(fam)?.apply(f, x)
                }
            };
            let mut csv = String::from("u,quantity,t,value,se,ci_half_width,early_exit_fraction\n");
            let mut ests = Vec::new();
            for b in opens {
                let u = b.open();
                let e = generator_estimate(fam, *start, f, &u, t_grid, *n, seed)?;
                for (t, q) in &e.quotients {
                    csv.push_str(&format!("\"{u}\",quotient,{t},{},{},{},{}\n", q.mean, q.se, 4.0 * q.se, e.early_exit_fraction));
                }
                csv.push_str(&format!(
                    "\"{u}\",extrapolated,,{},{},{},{}\n",
                    e.extrapolated.mean, e.extrapolated.se, e.ci_half_width, e.early_exit_fraction
                ));
                ests.push(e);
            }
            let mut passed = ests.iter().all(|e| !e.flagged && (e.extrapolated.mean - target).abs() <= e.ci_half_width);
            for (i, a) in ests.iter().enumerate() {
                for b in &ests[i + 1..] {
                    let w = a.ci_half_width.hypot(b.ci_half_width);
                    passed &= (a.extrapolated.mean - b.extrapolated.mean).abs() <= w;
                }
            }
            let summary = ests
                .iter()
                .map(|e| format!("{:.4} ± {:.4}", e.extrapolated.mean, e.ci_half_width))
                .collect::<Vec<_>>()
                .join(", ");
            Ok(Outcome { passed, files: vec![("", csv)], summary: format!("target {target}: {summary}") })
        }
        Experiment::Pmp { test_functions, families, generators, points, .. } => {
            let mut ops: Vec<(String, Operator)> = Vec::new();
            for FamilyBlock(fam) in families {
                ops.push((fam.label(), Operator::from_generator(test_functions, &declared(fam)?)));
            }
            for g in generators {
                ops.push((g.to_string(), Operator::from_generator(test_functions, g)));
            }
            let mut csv = String::from("operator,pair,passed,violation_at,f_value,g_value,boundary_warning\n");
            let mut passed = true;
            let mut violations = 0;
            for (label, op) in &ops {
                let r = pmp_check(op, &default_probe_grid(op, *points), DEFAULT_PMP_TOL);
                passed &= r.passed();
                violations += r.violations.len();
                for (i, p) in op.pairs().iter().enumerate() {
                    let v = r.violations.iter().find(|v| v.pair == i);
                    let (at, fv, gv) = v.map_or((String::new(), String::new(), String::new()), |v| {
                        (v.at.to_string(), v.f_value.to_string(), v.g_value.to_string())
                    });
                    csv.push_str(&format!(
                        "\"{label}\",\"{}\",{},{at},{fv},{gv},{}\n",
                        p.f,
                        v.is_none(),
                        r.boundary_warnings.contains(&i)
                    ));
                }
            }
            Ok(Outcome { passed, files: vec![("", csv)], summary: format!("{} operators, {violations} violations", ops.len()) })
        }
        Experiment::FellerTail { family, k, t, starts, n, .. } => {
            let r = feller_tail_check(&family.0, &k.closed(), *t, starts, *n, seed)?;
            let mut csv = String::from("a,p_in_k,se_in_k,p_enters_k,se_enters_k\n");
            for row in &r.rows {
                csv.push_str(&format!("{},{},{},{},{}\n", row.a, row.in_k.mean, row.in_k.se, row.enters_k.mean, row.enters_k.se));
            }
            Ok(Outcome {
                passed: r.verdict == FellerVerdict::FellerConsistent,
                files: vec![("", csv)],
                summary: format!("{:?}", r.verdict),
            })
        }
        Experiment::QuasiContinuity { family, init, t, n, .. } => {
            let ens = Ensemble::generate(&family.0, init, *n, seed);
            let q = quasi_continuity_check(&ens, *t)?;
            let csv = format!("t,jumps,n,fraction\n{t},{},{},{}\n", q.jumps, q.n, q.fraction);
            Ok(Outcome { passed: q.passed(), files: vec![("", csv)], summary: format!("jump fraction {}", q.fraction) })
        }
        Experiment::Markov { family, init, tau, bin, f, lag, n, .. } => {
            let r = markov_conditioning_check(&family.0, init, &tau.build(), &bin.closed(), f, *lag, *n, seed)?;
            let csv = format!(
                "hits,conditioned,se_conditioned,fresh,se_fresh,z\n{},{},{},{},{},{}\n",
                r.hits, r.conditioned.mean, r.conditioned.se, r.fresh.mean, r.fresh.se, r.z
            );
            Ok(Outcome { passed: r.passed(), files: vec![("", csv)], summary: format!("{} hits, z = {:.3}", r.hits, r.z) })
        }
        Experiment::OperatorConvergence { test_functions, sequence, limit, compacts, ratio_range, .. } => {
            let seq: Vec<(String, Operator)> =
                sequence.iter().map(|g| (g.to_string(), Operator::from_generator(test_functions, g))).collect();
            let lim = Operator::from_generator(test_functions, limit);
            let compacts: Vec<_> = compacts.iter().map(|b| b.closed()).collect();
            let t = operator_convergence_table(&seq, &lim, &compacts)?;
            let in_range = ratio_range.is_none_or(|(lo, hi)| t.ratios.iter().all(|r| (lo..=hi).contains(r)));
            Ok(Outcome {
                passed: t.nonincreasing && in_range,
                files: vec![("", t.to_csv())],
                summary: format!("ratios {:?}", t.ratios),
            })
        }
        Experiment::LawConvergence { sequence, limit, init, functionals, n, distance_pairs, .. } => {
            let seq: Vec<FamilySimulator> = sequence.iter().map(|b| b.0.clone()).collect();
            let t = law_convergence_table(space, &seq, &limit.0, init, functionals, *n, seed, *distance_pairs)?;
            let last = t.rows.last().map_or(0.0, |r| r.max_statistic());
            Ok(Outcome {
                passed: t.converged(),
                files: vec![("", t.to_csv())],
                summary: format!(
                    "last max KS {last:.4}, decreasing trend {}; dictionary: {}; {}",
                    t.decreasing_trend,
                    t.dictionary.join("; "),
                    t.assumption
                ),
            })
        }
        Experiment::Localisation { family_a, family_b, init, u, functionals, n, .. } => {
            let r = localisation_experiment(&family_a.0, &family_b.0, init, &u.open(), functionals, *n, seed)?;
            Ok(Outcome {
                passed: r.agrees(),
                files: vec![("", r.to_csv())],
                summary: format!("{} of {} stopped paths identical", r.identical_paths, r.n),
            })
        }
        Experiment::Tightness { sequence, init, n, epsilon, t, u, deltas, max_limsup, .. } => {
            let ens: Vec<Ensemble> = sequence.iter().map(|b| Ensemble::generate(&b.0, init, *n, seed)).collect();
            let r = aldous_tightness(space, &ens, *epsilon, *t, &u.open(), deltas)?;
            let smallest = deltas
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map_or(0.0, |(i, _)| r.limsup[i]);
            Ok(Outcome {
                passed: max_limsup.is_none_or(|m| smallest <= m),
                files: vec![("_two_time", r.to_csv()), ("_three_time", r.three_time_csv())],
                summary: format!(
                    "limsup at smallest delta {smallest}; {} warnings; {}; {}",
                    r.warnings.len(),
                    r.dictionary,
                    r.coverage_note
                ),
            })
        }
        Experiment::TimechangeDemo {
            family,
            speed,
            init,
            target,
            cap,
            test_functions,
            opens,
            windows,
            n,
            k,
            tail_time,
            starts,
            tail_n,
            ..
        } => {
            let fam = &family.0;
            let checks = DemoChecks {
                init: init.clone(),
                target: *target,
                cap: *cap,
                operator: fam.declared_operator(test_functions),
                opens: opens.iter().map(|b| b.open()).collect(),
                windows: windows.clone(),
                n: *n,
                k: k.closed(),
                tail_time: *tail_time,
                a_seq: starts.clone(),
                tail_n: *tail_n,
                seed,
            };
            let r = timechange_to_feller_demo(fam, speed, &checks)?;
            Ok(Outcome {
                passed: r.passed(),
                files: vec![("", r.to_csv())],
                summary: format!("explosion fraction {}, tail verdict {:?}", r.explosion_fraction, r.tail.verdict),
            })
        }
    }
}

fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{index:02}_{clean}")
}

fn gnuplot_stub(csv: &str, header: &str) -> String {
    let columns = header.split(',').count();
    let mut s = format!("set datafile separator ','\nset key autotitle columnhead\nset title '{csv}'\nplot ");
    let plots: Vec<String> = (2..=columns.max(2)).map(|c| format!("'{csv}' using 0:{c} with linespoints")).collect();
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Runs the configured experiments. The manifest is rewritten after every
/// experiment, so artifacts of finished experiments survive a later failure.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest> {
    fs::create_dir_all(&opts.out)?;
    let space = cfg.space.build();
    let mut manifest =
        Manifest { tool: "locfell", version: env!("CARGO_PKG_VERSION"), seed: cfg.seed, experiments: Vec::new(), all_ok: true };
    write(&opts.out, "manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    for (i, e) in cfg.experiments.iter().enumerate() {
        if opts.only.as_ref().is_some_and(|k| !k.contains(&e.kind())) {
            continue;
        }
        let seed = derive_seed(cfg.seed, i as u64);
        let stem = file_stem(i, e.name());
        let mut record = ExperimentRecord {
            name: e.name().to_string(),
            kind: e.kind().to_string(),
            expect: match e.expect() {
                Expect::Pass => "pass",
                Expect::Reject => "reject",
            }
            .to_string(),
            check_passed: None,
            ok: false,
            seed,
            files: Vec::new(),
            summary: String::new(),
            error: None,
        };
        match run_one(&space, e, seed) {
            Ok(out) => {
                for (suffix, csv) in &out.files {
                    let name = format!("{stem}{suffix}.csv");
                    write(&opts.out, &name, csv)?;
                    if opts.gnuplot {
                        let header = csv.lines().next().unwrap_or("");
                        write(&opts.out, &format!("{stem}{suffix}.gp"), &gnuplot_stub(&name, header))?;
                    }
                    record.files.push(name);
                }
                record.check_passed = Some(out.passed);
                record.ok = out.passed == (e.expect() == Expect::Pass);
                record.summary = out.summary;
            }
            Err(err) => record.error = Some(err.to_string()),
        }
        manifest.all_ok &= record.ok;
        manifest.experiments.push(record);
        write(&opts.out, "manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_writes_only_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_config(&ExperimentConfig::default(), &RunOptions { out: dir.path().into(), ..Default::default() }).unwrap();
        assert_eq!(m.exit_code(), 0);
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(files, vec![std::ffi::OsString::from("manifest.json")]);
    }

    #[test]
    fn controls_and_failures() {
        let text = r#"{"seed": 3, "experiments": [
            {"quasi_continuity": {"name": "cp", "family": {"kind": "cpoisson", "rate": 1.0, "T": 2.0}, "t": 1.0, "n": 200}},
            {"pmp": {"name": "adversarial", "expect": "reject", "test_functions": [{"name": "gaussian_bump", "center": 0.0, "width": 1.0}],
             "generators": [{"kind": "local", "potential": "one"}]}},
            {"feller_tail": {"name": "flow", "family": {"kind": "ode", "drift": "neg_x3", "dt": 1e-4, "T": 1.0},
             "k": [-1, 1], "t": 1.0, "starts": [100.0], "n": 2}}
        ]}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = run_config(&cfg, &RunOptions { out: dir.path().into(), gnuplot: true, only: None }).unwrap();
        assert!(m.experiments[0].ok && m.experiments[1].ok);
        assert_eq!(m.experiments[1].check_passed, Some(false));
        assert!(!m.experiments[2].ok);
        assert_eq!(m.exit_code(), 1);
        assert!(dir.path().join("01_adversarial.gp").exists());
        let only = RunOptions { out: dir.path().join("sub"), gnuplot: false, only: Some(vec!["pmp"]) };
        assert_eq!(run_config(&cfg, &only).unwrap().experiments.len(), 1);
    }
}
