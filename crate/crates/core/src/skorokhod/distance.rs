//! Reparametrization distances between step paths.
//!
//! On `[0, T)` the global distance is
//! `inf_λ max(sup_s d(x_s, y_{λ(s)}), sup_s |λ(s) − s|)` over increasing
//! bijections `λ` of `[0, T)`. For step paths only the order in which the
//! change points of `x` and of `y∘λ` interleave matters, and once that order
//! is fixed each change point of `y` can be placed independently as close as
//! possible to where it sits in `y`. The infimum is therefore a minimax
//! shortest path over the lattice of (segment of x, segment of y) pairs,
//! solved exactly by dynamic programming.

use crate::error::{Error, Result};
use crate::path::StepPath;
use crate::state_space::{StatePoint, StateSpace};

/// Strictly increasing piecewise-linear bijection of `[0, T]`, stored as
/// matched knots `(s_i, λ(s_i))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparametrization {
    knots: Vec<(f64, f64)>,
}

impl Reparametrization {
    pub fn identity(horizon: f64) -> Self {
        Self { knots: vec![(0.0, 0.0), (horizon, horizon)] }
    }

    /// Knots must start at `(0, 0)`, end at `(T, T)` and increase strictly
    /// in both coordinates.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let ok = knots.len() >= 2
            && knots[0] == (0.0, 0.0)
            && knots.last().is_some_and(|&(s, l)| s == l && s > 0.0)
            && knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
        if !ok {
            return Err(Error::InvalidParameter("reparametrization knots must be strictly increasing from (0,0) to (T,T)".into()));
        }
        Ok(Self { knots })
    }

    pub fn horizon(&self) -> f64 {
        self.knots.last().expect("nonempty").0
    }

    fn interpolate(pts: &[(f64, f64)], s: f64) -> f64 {
        let i = pts.partition_point(|&(a, _)| a <= s).clamp(1, pts.len() - 1);
        let (s0, l0) = pts[i - 1];
        let (s1, l1) = pts[i];
        l0 + (l1 - l0) * (s - s0) / (s1 - s0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        Self::interpolate(&self.knots, s)
    }

    pub fn inverse(&self, u: f64) -> f64 {
        let swapped: Vec<(f64, f64)> = self.knots.iter().map(|&(s, l)| (l, s)).collect();
        Self::interpolate(&swapped, u)
    }

    /// `sup_s |λ(s) − s|`, attained at a knot.
    pub fn max_displacement(&self) -> f64 {
        self.knots.iter().map(|&(s, l)| (l - s).abs()).fold(0.0, f64::max)
    }
}

/// Value changes of a path on `[0, T)`: `times[0] = 0`, and `values[i]` is
/// held on `[times[i], times[i+1])`. Explosion before `T` appears as a change
/// to Δ.
#[derive(Clone, Debug)]
pub(crate) struct Events {
    pub times: Vec<f64>,
    pub values: Vec<StatePoint>,
}

impl Events {
    pub fn of(path: &StepPath, horizon: f64) -> Self {
        let mut times = vec![0.0];
        let mut values = vec![path.start()];
        if path.is_dead() {
            return Self { times, values };
        }
        let vals = path.values();
        let end = path.times().count_lt(horizon);
        for i in 1..end {
            if vals[i] != vals[i - 1] {
                times.push(path.time(i));
                values.push(StatePoint::Interior(vals[i]));
            }
        }
        if path.explosion_time() < horizon {
            times.push(path.explosion_time());
            values.push(StatePoint::Delta);
        }
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Right end of segment `i`.
    fn end(&self, i: usize, horizon: f64) -> f64 {
        self.times.get(i + 1).copied().unwrap_or(horizon)
    }
}

/// Cost of the identity reparametrization, `sup_{s<T} d(x_s, y_s)`.
fn identity_cost(space: &StateSpace, x: &Events, y: &Events) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut cost = space.metric(x.values[0], y.values[0]);
    loop {
        let nx = x.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let ny = y.times.get(j + 1).copied().unwrap_or(f64::INFINITY);
        if nx.is_infinite() && ny.is_infinite() {
            return cost;
        }
        if nx <= ny {
            i += 1;
        }
        if ny <= nx {
            j += 1;
        }
        cost = cost.max(space.metric(x.values[i], y.values[j]));
    }
}

fn gap_distance(b: f64, lo: f64, hi: f64) -> f64 {
    if b < lo {
        lo - b
    } else if b > hi {
        b - hi
    } else {
        0.0
    }
}

/// Minimax lattice path from `(0,0)` to `(p,q)`. A step in `j` inside
/// segment `i` of `x` costs the distance from `b_j` to that segment, a
/// diagonal step costs `|a_i − b_j|`, and a step in `i` alone costs nothing.
/// Only cells whose segments lie within `ub` of each other in time are
/// visited.
fn directed(space: &StateSpace, x: &Events, y: &Events, horizon: f64, ub: f64) -> f64 {
    let p = x.len() - 1;
    let q = y.len() - 1;
    let slack = ub + 1e-12 * horizon.max(1.0);
    // band of row i: j with b_{j+1} ≥ a_i − slack and b_j ≤ a_{i+1} + slack
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut prev: Vec<f64> = Vec::new();
    let mut prev_lo = 0usize;
    for i in 0..=p {
        let a_i = x.times[i];
        let a_next = x.end(i, horizon);
        while lo < q && y.end(lo, horizon) < a_i - slack {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < q && y.times[hi + 1] <= a_next + slack {
            hi += 1;
        }
        let mut cur = vec![f64::INFINITY; hi - lo + 1];
        for j in lo..=hi {
            let mut best = if i == 0 && j == 0 { 0.0 } else { f64::INFINITY };
            if j > lo {
                let tc = gap_distance(y.times[j], a_i, a_next);
                best = best.min(cur[j - 1 - lo].max(tc));
            }
            if i > 0 {
                let from_prev = |jj: usize| (jj >= prev_lo && jj - prev_lo < prev.len()).then(|| prev[jj - prev_lo]);
                if let Some(v) = from_prev(j) {
                    best = best.min(v);
                }
                if j > 0 {
                    if let Some(v) = from_prev(j - 1) {
                        best = best.min(v.max((a_i - y.times[j]).abs()));
                    }
                }
            }
            if best.is_finite() {
                best = best.max(space.metric(x.values[i], y.values[j]));
            }
            cur[j - lo] = best;
        }
        prev = cur;
        prev_lo = lo;
    }
    if hi == q {
        prev[q - prev_lo]
    } else {
        f64::INFINITY
    }
}

/// Skorokhod-type distance between `x` and `y` on `[0, T)`, averaged over
/// both orders of the arguments.
pub fn global_distance(space: &StateSpace, x: &StepPath, y: &StepPath, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::NonPositiveHorizon(horizon));
    }
    let ex = Events::of(x, horizon);
    let ey = Events::of(y, horizon);
    let ub = identity_cost(space, &ex, &ey);
    if ub == 0.0 {
        return Ok(0.0);
    }
    let d1 = directed(space, &ex, &ey, horizon, ub).min(ub);
    let d2 = directed(space, &ey, &ex, horizon, ub).min(ub);
    Ok(0.5 * (d1 + d2))
}

/// Number of exhaustion levels summed explicitly by [`local_distance`].
pub const LOCAL_LEVELS: usize = 40;

/// `Σ_n 2^{−n}·(1 ∧ D_n)` with `D_n` the global distance on `[0, n)` between
/// the paths stopped at their exit from `U_n`. The remainder beyond
/// [`LOCAL_LEVELS`] is filled with the last term's value.
pub fn local_distance(space: &StateSpace, x: &StepPath, y: &StepPath) -> f64 {
    let mut total = 0.0;
    let mut last = 0.0;
    let mut cached: Option<(StepPath, StepPath, f64, f64)> = None;
    for n in 1..=LOCAL_LEVELS {
        let u = space.exhaustion(n);
        let xs = x.stop(&crate::path::StoppingSpec::Exit(u));
        let ys = y.stop(&crate::path::StoppingSpec::Exit(u));
        let horizon = n as f64;
        let d = match &cached {
            // unchanged stopped paths with no change points past the previous
            // horizon give the same distance
            Some((cx, cy, h, d)) if cx.same_knots(&xs) && cy.same_knots(&ys) && settled(&xs, *h) && settled(&ys, *h) => *d,
            _ => global_distance(space, &xs, &ys, horizon).expect("positive horizon"),
        };
        last = d.min(1.0);
        total += last / 2f64.powi(n as i32);
        cached = Some((xs, ys, horizon, d));
    }
    total + last / 2f64.powi(LOCAL_LEVELS as i32)
}

/// No knots at or after `h`, and no explosion.
fn settled(p: &StepPath, h: f64) -> bool {
    p.explosion_time().is_infinite() && p.times().last().is_none_or(|t| t < h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceProbe {
    pub distances: Vec<f64>,
    pub tolerance: f64,
    pub jitter: f64,
    pub consistent: bool,
}

/// The sequence `local_distance(xs[k], x)` and whether its tail (second
/// half) is below `tolerance` and nonincreasing up to `jitter`.
pub fn convergence_probe(space: &StateSpace, xs: &[StepPath], x: &StepPath, tolerance: f64, jitter: f64) -> Result<ConvergenceProbe> {
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("convergence probe needs at least two paths".into()));
    }
    let distances: Vec<f64> = xs.iter().map(|p| local_distance(space, p, x)).collect();
    let tail = &distances[distances.len() / 2..];
    let consistent = tail.iter().all(|&d| d <= tolerance) && tail.windows(2).all(|w| w[1] <= w[0] + jitter);
    Ok(ConvergenceProbe { distances, tolerance, jitter, consistent })
}
