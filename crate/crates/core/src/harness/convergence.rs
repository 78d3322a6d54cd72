//! Operator convergence against law convergence along a sequence of
//! families.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{default_probe_grid, Operator, DEFAULT_PMP_POINTS};
use crate::path::StepPath;
use crate::simulators::{map_paths, FamilySimulator, InitialLaw};
use crate::skorokhod::local_distance;
use crate::state_space::{ClosedInterval, OpenInterval, StatePoint, StateSpace};
use crate::stats::{ks_critical, ks_statistic, FAMILY_ALPHA};
use crate::functions::TestFunction;

/// Real-valued path functional whose law is compared between families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Functional {
    /// `x_t`, with `Δ` read as `+∞`. Equivalent for the KS statistic to the
    /// bounded continuous `arctan(x_t)`.
    Coordinate { time: f64 },
    /// `f(x_t)`.
    Test { f: TestFunction, time: f64 },
    /// `τ^U ∧ cap`.
    ExitTime { u: OpenInterval, cap: f64 },
}

impl Functional {
    pub fn eval(&self, x: &StepPath) -> f64 {
        match self {
            Functional::Coordinate { time } => match x.evaluate(*time) {
                StatePoint::Interior(v) => v,
                StatePoint::Delta => f64::INFINITY,
            },
            Functional::Test { f, time } => f.eval_point(x.evaluate(*time)),
            Functional::ExitTime { u, cap } => x.exit_time(u).min(*cap),
        }
    }

    /// Latest time the functional looks at.
    pub fn horizon(&self) -> f64 {
        match self {
            Functional::Coordinate { time } | Functional::Test { time, .. } => *time,
            Functional::ExitTime { cap, .. } => *cap,
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Coordinate { time } => write!(f, "x({time})"),
            Functional::Test { f: g, time } => write!(f, "{g}(x({time}))"),
            Functional::ExitTime { u, cap } => write!(f, "exit{u}^{cap}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorRow {
    pub label: String,
    /// `max_pairs sup |f_n − f|` over the probe grid.
    pub f_sup: f64,
    /// `max_pairs sup_K |g_n − g|`, one entry per compact.
    pub g_sup: Vec<f64>,
}

impl OperatorRow {
    pub fn discrepancy(&self) -> f64 {
        self.g_sup.iter().copied().fold(self.f_sup, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTable {
    pub rows: Vec<OperatorRow>,
    pub compacts: Vec<ClosedInterval>,
    /// Consecutive ratios `discrepancy_k / discrepancy_{k+1}`.
    pub ratios: Vec<f64>,
    pub nonincreasing: bool,
}

impl OperatorTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("operator,f_sup");
        for k in &self.compacts {
            out.push_str(&format!(",g_sup{k}"));
        }
        out.push_str(",discrepancy,ratio_to_next\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!("\"{}\",{}", r.label, r.f_sup));
            for g in &r.g_sup {
                out.push_str(&format!(",{g}"));
            }
            let ratio = self.ratios.get(i).map_or(String::new(), |q| q.to_string());
            out.push_str(&format!(",{},{ratio}\n", r.discrepancy()));
        }
        out
    }
}

fn grid_over(k: &ClosedInterval, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |i| k.lo + (k.hi - k.lo) * i as f64 / (n - 1) as f64)
}

/// Sup-norm discrepancies of each operator of a sequence against the limit,
/// pairs matched by position.
pub fn operator_convergence_table(
    l_seq: &[(String, Operator)],
    limit: &Operator,
    compacts: &[ClosedInterval],
) -> Result<OperatorTable> {
    let full = default_probe_grid(limit, DEFAULT_PMP_POINTS);
    let mut rows = Vec::with_capacity(l_seq.len());
    for (label, l) in l_seq {
        if l.len() != limit.len() {
            return Err(Error::InvalidParameter(format!(
                "operator {label} has {} pairs, the limit has {}",
                l.len(),
                limit.len()
            )));
        }
        let mut f_sup: f64 = 0.0;
        let mut g_sup = vec![0.0f64; compacts.len()];
        for (p, q) in l.pairs().iter().zip(limit.pairs()) {
            if p.f != q.f {
                f_sup = f_sup.max(full.iter().map(|&x| (p.f.eval(x) - q.f.eval(x)).abs()).fold(0.0, f64::max));
            }
            for (k, sup) in compacts.iter().zip(g_sup.iter_mut()) {
                let d = grid_over(k, DEFAULT_PMP_POINTS)
                    .collect::<Vec<_>>()
                    .par_iter()
                    .map(|&x| (p.g_at(x) - q.g_at(x)).abs())
                    .reduce(|| 0.0, f64::max);
                *sup = sup.max(d);
            }
        }
        rows.push(OperatorRow { label: label.clone(), f_sup, g_sup });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[0].discrepancy() / w[1].discrepancy()).collect();
    let nonincreasing = rows.windows(2).all(|w| w[1].discrepancy() <= w[0].discrepancy());
    Ok(OperatorTable { rows, compacts: compacts.to_vec(), ratios, nonincreasing })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KsCell {
    pub functional: String,
    pub statistic: f64,
    pub critical: f64,
}

impl KsCell {
    pub fn passed(&self) -> bool {
        self.statistic <= self.critical
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawRow {
    pub label: String,
    pub cells: Vec<KsCell>,
    /// Mean `local_distance` between the first paths of both families.
    pub mean_local_distance: f64,
}

impl LawRow {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(KsCell::passed)
    }

    pub fn max_statistic(&self) -> f64 {
        self.cells.iter().map(|c| c.statistic).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawTable {
    pub rows: Vec<LawRow>,
    pub limit: String,
    pub dictionary: Vec<String>,
    /// Per-test level after the Bonferroni split over the dictionary.
    pub alpha: f64,
    /// The largest KS statistic does not grow from the first to the last row.
    pub decreasing_trend: bool,
    pub assumption: &'static str,
}

pub const WELL_POSEDNESS_NOTE: &str =
    "assumes the limit martingale problem is well posed; this is not tested";

impl LawTable {
    /// The last family of the sequence is indistinguishable from the limit.
    pub fn converged(&self) -> bool {
        self.rows.last().is_some_and(LawRow::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,functional,ks,critical,pass,mean_local_distance\n");
        for r in &self.rows {
            for c in &r.cells {
                out.push_str(&format!(
                    "\"{}\",\"{}\",{},{},{},{}\n",
                    r.label,
                    c.functional,
                    c.statistic,
                    c.critical,
                    c.passed(),
                    r.mean_local_distance
                ));
            }
        }
        out
    }
}

/// Functional values of `n` paths, plus the first `keep` paths themselves.
fn sample(
    fam: &FamilySimulator,
    init: &InitialLaw,
    dictionary: &[Functional],
    n: usize,
    seed: u64,
    keep: usize,
) -> (Vec<Vec<f64>>, Vec<StepPath>) {
    let rows = map_paths(fam, init, n, seed, |i, p, _| {
        let vals: Vec<f64> = dictionary.iter().map(|f| f.eval(p)).collect();
        (vals, (i < keep).then(|| p.clone()))
    });
    let mut cols = vec![Vec::with_capacity(n); dictionary.len()];
    let mut kept = Vec::new();
    for (vals, p) in rows {
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
        kept.extend(p);
    }
    (cols, kept)
}

/// Two-sample KS distances of each functional between every family of the
/// sequence and the limit, all simulated with the same master seed.
#[allow(clippy::too_many_arguments)]
pub fn law_convergence_table(
    space: &StateSpace,
    fam_seq: &[FamilySimulator],
    limit: &FamilySimulator,
    init: &InitialLaw,
    dictionary: &[Functional],
    n: usize,
    seed: u64,
    distance_pairs: usize,
) -> Result<LawTable> {
    if dictionary.is_empty() || n == 0 {
        return Err(Error::InvalidParameter("law comparison needs functionals and n ≥ 1".into()));
    }
    let alpha = FAMILY_ALPHA / dictionary.len() as f64;
    let critical = ks_critical(alpha, n, n);
    let keep = distance_pairs.min(n);
    let (limit_cols, limit_paths) = sample(limit, init, dictionary, n, seed, keep);
    let mut rows = Vec::with_capacity(fam_seq.len());
    for fam in fam_seq {
        let (cols, paths) = sample(fam, init, dictionary, n, seed, keep);
        let cells = dictionary
            .iter()
            .zip(cols.iter().zip(&limit_cols))
            .map(|(f, (a, b))| KsCell { functional: f.to_string(), statistic: ks_statistic(a, b), critical })
            .collect();
        let mean_local_distance = if keep == 0 {
            0.0
        } else {
            let ds: Vec<f64> =
                paths.par_iter().zip(limit_paths.par_iter()).map(|(x, y)| local_distance(space, x, y)).collect();
            ds.iter().sum::<f64>() / keep as f64
        };
        rows.push(LawRow { label: fam.label(), cells, mean_local_distance });
    }
    let decreasing_trend = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.max_statistic() <= a.max_statistic(),
        _ => true,
    };
    Ok(LawTable {
        rows,
        limit: limit.label(),
        dictionary: dictionary.iter().map(ToString::to_string).collect(),
        alpha,
        decreasing_trend,
        assumption: WELL_POSEDNESS_NOTE,
    })
}
