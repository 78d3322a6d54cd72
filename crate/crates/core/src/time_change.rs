//! Random time change `g·x`: the path run at state-dependent speed `g`.
//!
//! The clock is `A(s) = ∫_0^s du / g(x_u)` and `(g·x)_t = x_{τ_t}` with
//! `τ_t = inf{s | s ≥ τ^{g≠0} or A(s) ≥ t}`. When `τ^{g≠0}` is reached before
//! `ξ` the transformed path stays at `x_{τ^{g≠0}}` forever; when the path
//! converges at `ξ` to a zero of `g` it is frozen at that left limit.
//!
//! Time-changed paths keep the untransformed path and the list of applied
//! speeds, and their knots are always recomputed from that record. Since
//! multiplication of two floats is commutative, `g₁·(g₂·x)` and `(g₁g₂)·x`
//! then produce bitwise identical knot lists.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::path::{Clock, StepPath, Times};
use crate::simulators::Ensemble;
use crate::speed::SpeedFunction;

/// Tolerance for "the left limit at `ξ` lies in `{g = 0}`".
pub const FREEZE_TOL: f64 = 1e-12;

/// `inf{t | g(x_{t−}) ∧ g(x_t) = 0} ∧ ξ`. On a step path the left limit at
/// a knot is the previous knot value, so scanning knot values suffices.
pub fn zero_set_exit(path: &StepPath, g: &SpeedFunction) -> f64 {
    match path.first_knot_where(|v| g.eval(v) == 0.0) {
        Some(i) => path.time(i),
        None => path.explosion_time(),
    }
}

/// `A(s) = ∫_0^s du / g(x_u)`, exact on the step representation.
pub fn clock(path: &StepPath, g: &SpeedFunction, s: f64) -> Result<f64> {
    let exit = zero_set_exit(path, g);
    if s > exit {
        return Err(Error::SingularClock { s, exit });
    }
    let mut acc = 0.0;
    for i in 0..path.len() {
        let a = path.time(i);
        if a >= s {
            break;
        }
        let b = path.segment_end(i).min(s);
        acc += (b - a) / g.eval(path.values()[i]);
    }
    Ok(acc)
}

/// `τ_t^g`: the inverse of the piecewise-linear clock, or the zero-set exit
/// when the clock never reaches `t`.
pub fn clock_inverse(path: &StepPath, g: &SpeedFunction, t: f64) -> f64 {
    let exit = zero_set_exit(path, g);
    if t <= 0.0 {
        return 0.0_f64.min(exit);
    }
    let mut acc = 0.0;
    for i in 0..path.len() {
        let start = path.time(i);
        if start >= exit {
            break;
        }
        let end = path.segment_end(i).min(exit);
        let rate = g.eval(path.values()[i]);
        let span = (end - start) / rate;
        if acc + span >= t {
            return (start + (t - acc) * rate).min(end);
        }
        acc += span;
    }
    exit
}

/// The time-changed path `g·x`.
pub fn apply(path: &StepPath, g: &SpeedFunction) -> StepPath {
    let (base, mut speeds) = match path.clock() {
        Some(c) => (c.base.clone(), c.speeds.clone()),
        None => (path.clone(), Vec::new()),
    };
    speeds.push(g.clone());
    derive(base, speeds)
}

/// Rate of the composed clock at `x`, folded left to right over `speeds`.
fn rate(speeds: &[SpeedFunction], x: f64) -> f64 {
    speeds.iter().map(|s| s.eval(x)).reduce(|a, b| a * b).unwrap_or(1.0)
}

fn derive(base: StepPath, speeds: Vec<SpeedFunction>) -> StepPath {
    let n = base.len();
    if n == 0 {
        return base;
    }
    let vals = base.values();
    let rates: Vec<f64> = vals.iter().map(|&v| rate(&speeds, v)).collect();
    let zero = rates.iter().position(|&r| r == 0.0);
    let used = zero.map_or(n, |k| k + 1);

    // Knot times are kept as `B_j + D_j` with `D` accumulating `Δ/r − Δ`,
    // so unit rates reproduce the original times bit for bit.
    let mut times = Vec::with_capacity(used + 1);
    let mut values = Vec::with_capacity(used + 1);
    let mut merged = false;
    let mut drift = 0.0;
    let mut reached = used;
    times.push(0.0);
    values.push(vals[0]);
    for j in 1..used {
        let gap = base.time(j) - base.time(j - 1);
        drift += gap / rates[j - 1] - gap;
        let t = base.time(j) + drift;
        if !t.is_finite() {
            reached = j;
            break;
        }
        if t > *times.last().unwrap() {
            times.push(t);
            values.push(vals[j]);
        } else {
            // zero-length segment after rounding: the later value wins
            *values.last_mut().unwrap() = vals[j];
            merged = true;
        }
    }

    let base_xi = base.explosion_time();
    let mut xi = f64::INFINITY;
    let mut left_limit = None;
    if zero.is_none() && reached == n && base_xi.is_finite() {
        let last = base.time(n - 1);
        let gap = base_xi - last;
        let a_xi = base_xi + drift + (gap / rates[n - 1] - gap);
        let l = base.left_limit_at_explosion();
        let frozen = l.filter(|&l| speeds.iter().any(|s| s.vanishes_at(l, FREEZE_TOL)));
        if !a_xi.is_finite() {
            // the clock diverges along the path: it is never completed
        } else if let Some(l) = frozen {
            if a_xi > *times.last().unwrap() {
                times.push(a_xi);
                values.push(l);
            } else {
                *values.last_mut().unwrap() = l;
            }
            merged = true;
        } else {
            while times.last().is_some_and(|&t| t >= a_xi) {
                times.pop();
                values.pop();
                merged = true;
            }
            if times.is_empty() {
                return StepPath::dead();
            }
            xi = a_xi;
            left_limit = l;
        }
    }

    let values: Arc<[f64]> = if !merged && values.len() == n {
        base.values_arc().clone()
    } else {
        values.into()
    };
    let times = Times::from_vec(times);
    let kind = base.kind();
    StepPath::from_parts(times, values, xi, left_limit, kind, Some(Arc::new(Clock { base, speeds })))
}

/// `g·P`: every member path time-changed, seeds and metadata preserved.
/// The horizon up to which a transformed path is a faithful sample is the
/// clock evaluated at the original horizon, or `∞` once the transformed path
/// is completely determined.
pub fn pushforward_ensemble(ens: &Ensemble, g: &SpeedFunction) -> Ensemble {
    let (paths, horizons): (Vec<StepPath>, Vec<f64>) = ens
        .paths
        .par_iter()
        .zip(ens.horizons.par_iter())
        .map(|(p, &h)| {
            let exit = zero_set_exit(p, g);
            let horizon = if h >= exit { f64::INFINITY } else { clock(p, g, h).expect("h below exit") };
            (apply(p, g), horizon)
        })
        .unzip();
    Ensemble {
        paths,
        horizons,
        seeds: ens.seeds.clone(),
        label: format!("{} | time change {g}", ens.label),
        init: ens.init.clone(),
        master_seed: ens.master_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::PathKind;
    use crate::state_space::StatePoint;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

    fn tan_path(dt: f64) -> StepPath {
        StepPath::from_fn(dt, FRAC_PI_2, FRAC_PI_2, f64::tan).unwrap()
    }

    #[test]
    fn zero_set_exit_examples() {
        let tan = tan_path(1e-4);
        assert_eq!(zero_set_exit(&tan, &SpeedFunction::OnePlusX2), FRAC_PI_2);
        assert_eq!(zero_set_exit(&StepPath::constant(3.0), &SpeedFunction::Ramp { level: 1.0 }), 0.0);
        let z = zero_set_exit(&tan, &SpeedFunction::Ramp { level: 2.0 });
        assert_abs_diff_eq!(z, 2.0f64.atan(), epsilon = 1e-4);
    }

    #[test]
    fn clock_examples() {
        let c = StepPath::constant(0.3);
        assert_eq!(clock(&c, &SpeedFunction::constant(1.0), 3.0).unwrap(), 3.0);
        assert_eq!(clock(&c, &SpeedFunction::constant(2.0), 3.0).unwrap(), 1.5);
        let tan = tan_path(1e-5);
        let a = clock(&tan, &SpeedFunction::OnePlusX2, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(a, FRAC_PI_4, epsilon = 1e-3);
        let err = clock(&StepPath::constant(3.0), &SpeedFunction::Ramp { level: 1.0 }, 1.0);
        assert!(matches!(err, Err(Error::SingularClock { .. })));
    }

    #[test]
    fn clock_inverse_examples() {
        let p = StepPath::new(vec![0.0, 1.0], vec![0.0, 1.0], 5.0).unwrap();
        let g = SpeedFunction::constant(2.0);
        assert_eq!(clock_inverse(&p, &g, 1.0), 2.0);
        assert_eq!(clock_inverse(&p, &g, 10.0), 5.0);
        assert_eq!(clock_inverse(&p, &g, 0.0), 0.0);
        // Near π/2 the clock grows like (π/2 − s)³/3, so inverting it at π/4
        // needs an O(dt²) quadrature: sample tan at the midpoints of the cells.
        let dt = 1e-5;
        let knots: Vec<f64> = (0..).map(|k| k as f64 * dt).take_while(|&t| t < FRAC_PI_2).collect();
        let values = knots.iter().map(|&t| (0.5 * (t + (t + dt).min(FRAC_PI_2))).tan()).collect();
        let tan_mid = StepPath::grid(dt, values, FRAC_PI_2).unwrap();
        let s = clock_inverse(&tan_mid, &SpeedFunction::OnePlusX2, FRAC_PI_4);
        assert_abs_diff_eq!(s, FRAC_PI_2, epsilon = 1e-3);
    }

    #[test]
    fn unit_speed_is_identity() {
        let tan = tan_path(1e-3);
        let y = apply(&tan, &SpeedFunction::constant(1.0));
        assert!(y.same_knots(&tan));
        assert!(matches!(y.times(), Times::Regular { .. }));
    }

    #[test]
    fn constant_at_zero_of_speed_is_frozen() {
        let y = apply(&StepPath::constant(3.0), &SpeedFunction::Ramp { level: 1.0 });
        assert!(y.same_knots(&StepPath::constant(3.0)));
        assert_eq!(y.explosion_time(), f64::INFINITY);
    }

    /// Solves `τ/2 + sin(2τ)/4 = t` by bisection.
    fn tan_clock_inverse(t: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid / 2.0 + (2.0 * mid).sin() / 4.0 < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn tan_path_accelerated() {
        let tan = tan_path(1e-5);
        let y = apply(&tan, &SpeedFunction::OnePlusX2);
        assert_abs_diff_eq!(y.explosion_time(), FRAC_PI_4, epsilon = 1e-3);
        assert_eq!(y.left_limit_at_explosion(), None);
        let tau = tan_clock_inverse(FRAC_PI_8);
        let got = y.evaluate(FRAC_PI_8).coord().unwrap();
        assert_abs_diff_eq!(got, tau.tan(), epsilon = 1e-4);
    }

    #[test]
    fn slowing_down_an_explosion_can_prevent_it() {
        // along tan, ∫ (1 + tan²) = ∞, so 1/(1+x²) never finishes the path
        let tan = tan_path(1e-5);
        let y = apply(&tan, &SpeedFunction::InvOnePlusX2);
        assert!(y.explosion_time() > 1e4);
    }

    #[test]
    fn converging_explosion_frozen_at_zero_of_speed() {
        let x = StepPath::new(vec![0.0, 0.5], vec![0.0, 0.9], 1.0).unwrap().with_left_limit(Some(1.0)).unwrap();
        let y = apply(&x, &SpeedFunction::Ramp { level: 1.0 });
        assert_eq!(y.explosion_time(), f64::INFINITY);
        assert_eq!(y.evaluate(1e6), StatePoint::Interior(1.0));
        let z = apply(&x, &SpeedFunction::Ramp { level: 2.0 });
        assert_eq!(z.left_limit_at_explosion(), Some(1.0));
        assert_abs_diff_eq!(z.explosion_time(), 0.25 + 0.5 / 1.1, epsilon = 1e-12);
    }

    /// The case display for `ξ(g·x)`, evaluated directly.
    fn explosion_by_cases(x: &StepPath, g: &SpeedFunction) -> f64 {
        let z = zero_set_exit(x, g);
        let frozen = x.left_limit_at_explosion().is_some_and(|l| g.vanishes_at(l, FREEZE_TOL));
        if z < x.explosion_time() || frozen || x.explosion_time().is_infinite() {
            f64::INFINITY
        } else {
            clock(x, g, x.explosion_time()).unwrap()
        }
    }

    fn dictionary() -> [SpeedFunction; 3] {
        [SpeedFunction::OnePlusX2, SpeedFunction::Ramp { level: 1.5 }, SpeedFunction::Bump { lo: -3.0, hi: 3.0 }]
    }

    prop_compose! {
        fn arb_path()(
            steps in prop::collection::vec((0.01f64..1.0, -4.0f64..4.0), 1..11),
            tail in prop::option::of(0.01f64..1.0),
            ll in prop::option::of(prop::sample::select(vec![1.5, 3.0, 0.2])),
            jump in any::<bool>(),
        ) -> StepPath {
            let mut t = 0.0;
            let (mut times, mut values) = (Vec::new(), Vec::new());
            for (i, (gap, v)) in steps.iter().enumerate() {
                if i > 0 { t += gap; }
                times.push(t);
                values.push(*v);
            }
            let xi = tail.map_or(f64::INFINITY, |g| t + g);
            let kind = if jump { PathKind::Jump } else { PathKind::Grid };
            let p = StepPath::new(times, values, xi).unwrap().with_kind(kind);
            if xi.is_finite() { p.with_left_limit(ll).unwrap() } else { p }
        }
    }

    proptest! {
        #[test]
        fn composition_is_exact(x in arb_path()) {
            for g1 in dictionary() {
                for g2 in dictionary() {
                    let nested = apply(&apply(&x, &g2), &g1);
                    let direct = apply(&x, &g1.clone().product(g2.clone()));
                    prop_assert!(nested.same_knots(&direct), "{g1} after {g2}");
                    prop_assert!(nested.validate().is_ok());
                }
            }
        }

        #[test]
        fn explosion_matches_case_display(x in arb_path()) {
            for g in dictionary() {
                let y = apply(&x, &g);
                let want = explosion_by_cases(&x, &g);
                if want.is_infinite() {
                    prop_assert_eq!(y.explosion_time(), f64::INFINITY);
                } else {
                    prop_assert!((y.explosion_time() - want).abs() <= 1e-12 * want.max(1.0));
                }
            }
        }

        #[test]
        fn clock_round_trip(x in arb_path(), frac in 0.0f64..1.0) {
            let g = SpeedFunction::OnePlusX2;
            let z = zero_set_exit(&x, &g).min(20.0);
            let s = frac * z;
            let t = clock(&x, &g, s).unwrap();
            prop_assert!((clock_inverse(&x, &g, t) - s).abs() <= 1e-9 * z.max(1.0));
        }

        #[test]
        fn constant_speed_rescales_time(x in arb_path(), c in 0.1f64..5.0, probe in 0.0f64..1.0) {
            let y = apply(&x, &SpeedFunction::constant(c));
            let s = probe * 5.0;
            // avoid probes within rounding distance of a knot
            let near_knot = (0..x.len()).any(|i| (x.time(i) - c * s).abs() < 1e-9)
                || (x.explosion_time() - c * s).abs() < 1e-9;
            if !near_knot && c * s < x.explosion_time() {
                prop_assert_eq!(y.evaluate(s), x.evaluate(c * s));
            }
        }
    }
}
