//! Closed-form test functions in `C_0(S)` (with derivatives up to order 4)
//! and coefficient functions used by generators and simulators.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::state_space::StatePoint;

/// Highest derivative order every test function provides.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Zero,
    /// `exp(−((x − center)/width)²)`.
    GaussianBump { center: f64, width: f64 },
    /// `P(x)·(1 − (x/cutoff)²)⁵` on `|x| < cutoff`, zero outside. `coeffs`
    /// lists the coefficients of `P` by increasing degree.
    PolyBump { coeffs: Vec<f64>, cutoff: f64 },
    /// `cos(frequency·x)·(1 − (x/cutoff)²)⁵` on `|x| < cutoff`.
    TrigBump { frequency: f64, cutoff: f64 },
    /// Equal to 1 on `[lo, hi]`, decaying to 0 over `ramp` on either side
    /// along a C⁴ smoothstep.
    Plateau { lo: f64, hi: f64, ramp: f64 },
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_deriv(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `(1 − (x/c)²)⁵`.
fn cutoff_poly(c: f64) -> Vec<f64> {
    let base = [1.0, 0.0, -1.0 / (c * c)];
    (0..5).fold(vec![1.0], |acc, _| poly_mul(&acc, &base))
}

fn poly_nth(coeffs: &[f64], k: usize, x: f64) -> f64 {
    let mut c = coeffs.to_vec();
    for _ in 0..k {
        c = poly_deriv(&c);
    }
    poly_eval(&c, x)
}

/// Physicists' Hermite polynomial `H_k(u)` for `k ≤ 4`.
fn hermite(k: usize, u: f64) -> f64 {
    let u2 = u * u;
    match k {
        0 => 1.0,
        1 => 2.0 * u,
        2 => 4.0 * u2 - 2.0,
        3 => 8.0 * u2 * u - 12.0 * u,
        4 => 16.0 * u2 * u2 - 48.0 * u2 + 12.0,
        _ => unreachable!("derivative order above {MAX_ORDER}"),
    }
}

/// `126u⁵ − 420u⁶ + 540u⁷ − 315u⁸ + 70u⁹`, rising from 0 to 1 on `[0, 1]`
/// with four vanishing derivatives at both ends.
const SMOOTHSTEP: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

impl TestFunction {
    pub fn gaussian_bump(center: f64, width: f64) -> Self {
        TestFunction::GaussianBump { center, width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    /// `f(Δ) = 0`.
    pub fn eval_point(&self, a: StatePoint) -> f64 {
        a.coord().map_or(0.0, |x| self.eval(x))
    }

    /// `f^{(k)}(x)` for `k ≤ 4`.
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        assert!(k <= MAX_ORDER, "derivative order {k} above {MAX_ORDER}");
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::GaussianBump { center, width } => {
                let u = (x - center) / width;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * hermite(k, u) * (-u * u).exp() / width.powi(k as i32)
            }
            TestFunction::PolyBump { coeffs, cutoff } => {
                if x.abs() >= *cutoff {
                    return 0.0;
                }
                poly_nth(&poly_mul(coeffs, &cutoff_poly(*cutoff)), k, x)
            }
            TestFunction::TrigBump { frequency, cutoff } => {
                if x.abs() >= *cutoff {
                    return 0.0;
                }
                let q = cutoff_poly(*cutoff);
                let w = *frequency;
                (0..=k)
                    .map(|j| {
                        // j-th derivative of cos(wx)
                        let phase = match j % 4 {
                            0 => (w * x).cos(),
                            1 => -(w * x).sin(),
                            2 => -(w * x).cos(),
                            _ => (w * x).sin(),
                        };
                        binomial(k, j) * w.powi(j as i32) * phase * poly_nth(&q, k - j, x)
                    })
                    .sum()
            }
            TestFunction::Plateau { lo, hi, ramp } => {
                if x <= lo - ramp || x >= hi + ramp {
                    0.0
                } else if x < *lo {
                    poly_nth(&SMOOTHSTEP, k, (x - (lo - ramp)) / ramp) / ramp.powi(k as i32)
                } else if x > *hi {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * poly_nth(&SMOOTHSTEP, k, (hi + ramp - x) / ramp) / ramp.powi(k as i32)
                } else if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Interval outside which `f` vanishes (or is below `e^{−64}` for the
    /// Gaussian bump).
    pub fn support(&self) -> (f64, f64) {
        match self {
            TestFunction::Zero => (0.0, 0.0),
            TestFunction::GaussianBump { center, width } => (center - 8.0 * width, center + 8.0 * width),
            TestFunction::PolyBump { cutoff, .. } | TestFunction::TrigBump { cutoff, .. } => (-cutoff, *cutoff),
            TestFunction::Plateau { lo, hi, ramp } => (lo - ramp, hi + ramp),
        }
    }

    /// `sup |f^{(k)}|` estimated on a fine grid over the support.
    pub fn sup_deriv(&self, k: usize) -> f64 {
        let (lo, hi) = self.support();
        (0..=8000).map(|i| self.deriv(lo + (hi - lo) * i as f64 / 8000.0, k).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Zero => write!(f, "zero"),
            TestFunction::GaussianBump { center, width } => write!(f, "gaussian_bump({center},{width})"),
            TestFunction::PolyBump { coeffs, cutoff } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly_bump([{}],{cutoff})", c.join(";"))
            }
            TestFunction::TrigBump { frequency, cutoff } => write!(f, "trig_bump({frequency},{cutoff})"),
            TestFunction::Plateau { lo, hi, ramp } => write!(f, "plateau({lo},{hi},{ramp})"),
        }
    }
}

/// Named real functions used as drift, diffusion and potential coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Coefficient {
    Zero,
    One,
    Const { c: f64 },
    /// `x`
    Identity,
    /// `x²`
    X2,
    /// `−x³`
    NegX3,
    /// `1 + x²`
    OnePlusX2,
    /// Coefficients by increasing degree.
    Poly { coeffs: Vec<f64> },
    /// `0` on `(lo, hi)`, `value` elsewhere.
    OutsideInterval { lo: f64, hi: f64, value: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
enum CoefficientTagged {
    Zero,
    One,
    Const { c: f64 },
    Identity,
    X2,
    NegX3,
    OnePlusX2,
    Poly { coeffs: Vec<f64> },
    OutsideInterval { lo: f64, hi: f64, value: f64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientRepr {
    Bare(String),
    Tagged(CoefficientTagged),
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        Ok(match CoefficientRepr::deserialize(d)? {
            CoefficientRepr::Bare(name) => match name.as_str() {
                "zero" => Coefficient::Zero,
                "one" => Coefficient::One,
                "identity" => Coefficient::Identity,
                "x2" => Coefficient::X2,
                "neg_x3" => Coefficient::NegX3,
                "one_plus_x2" => Coefficient::OnePlusX2,
                other => return Err(D::Error::custom(format!("unknown coefficient {other:?}"))),
            },
            CoefficientRepr::Tagged(t) => match t {
                CoefficientTagged::Zero => Coefficient::Zero,
                CoefficientTagged::One => Coefficient::One,
                CoefficientTagged::Const { c } => Coefficient::Const { c },
                CoefficientTagged::Identity => Coefficient::Identity,
                CoefficientTagged::X2 => Coefficient::X2,
                CoefficientTagged::NegX3 => Coefficient::NegX3,
                CoefficientTagged::OnePlusX2 => Coefficient::OnePlusX2,
                CoefficientTagged::Poly { coeffs } => Coefficient::Poly { coeffs },
                CoefficientTagged::OutsideInterval { lo, hi, value } => Coefficient::OutsideInterval { lo, hi, value },
            },
        })
    }
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Zero => 0.0,
            Coefficient::One => 1.0,
            Coefficient::Const { c } => *c,
            Coefficient::Identity => x,
            Coefficient::X2 => x * x,
            Coefficient::NegX3 => -x * x * x,
            Coefficient::OnePlusX2 => 1.0 + x * x,
            Coefficient::Poly { coeffs } => poly_eval(coeffs, x),
            Coefficient::OutsideInterval { lo, hi, value } => {
                if *lo < x && x < *hi {
                    0.0
                } else {
                    *value
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Zero) || matches!(self, Coefficient::Const { c } if *c == 0.0)
    }

    /// Whether the function is bounded on the whole line.
    pub fn is_bounded(&self) -> bool {
        match self {
            Coefficient::Zero | Coefficient::One | Coefficient::Const { .. } => true,
            Coefficient::OutsideInterval { .. } => true,
            Coefficient::Poly { coeffs } => coeffs.iter().skip(1).all(|&c| c == 0.0),
            Coefficient::Identity | Coefficient::X2 | Coefficient::NegX3 | Coefficient::OnePlusX2 => false,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Zero => write!(f, "0"),
            Coefficient::One => write!(f, "1"),
            Coefficient::Const { c } => write!(f, "{c}"),
            Coefficient::Identity => write!(f, "x"),
            Coefficient::X2 => write!(f, "x^2"),
            Coefficient::NegX3 => write!(f, "-x^3"),
            Coefficient::OnePlusX2 => write!(f, "1+x^2"),
            Coefficient::Poly { coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly[{}]", c.join(";"))
            }
            Coefficient::OutsideInterval { lo, hi, value } => write!(f, "{value}*1_(({lo},{hi})^c)"),
        }
    }
}
