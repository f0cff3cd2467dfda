//! The target functions behind every error table.
//!
//! Ids match the table column headers. A few functions appear in several
//! tables on different domains (Table 5 evaluates on `[-1, 1]`); those tables
//! re-domain the registry entry with [`TargetFunction::on_domain`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Interval;
use crate::series::Series;

/// Below this magnitude `sinc` switches to its series branch.
const SINC_SERIES_CUTOFF: f64 = 1e-4;
/// Distance under which an abscissa counts as hitting a singularity.
pub const SINGULARITY_TOLERANCE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `exp(-x²)`
    Gaussian,
    Square,
    InverseSquare,
    /// `(sin x / x)²`, Taylor series by general division.
    Sinc2,
    /// Same function, Taylor series from the sine series divided by `x`.
    Sinc2New,
    /// `sin(ω x)`
    Sine { omega: f64 },
    Exp,
    ExpNeg,
    Log,
    /// ±1 square wave: `+1` on the first half of each cycle, right-open at
    /// every jump.
    Rect { cycles: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFunction {
    pub id: String,
    pub shape: Shape,
    pub domain: Interval,
    pub singularities: Vec<f64>,
    /// Expansion point used when this function appears in the Taylor tables.
    pub taylor_center: f64,
    pub description: String,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `Σ (−1)ᵐ u²ᵐ/(2m+1)!` composed with `u = x`. Dividing `sin` by `x`
/// near the origin loses a factor `1/c` of accuracy per coefficient.
fn sinc_series(x: &Series) -> Series {
    let u2 = x * x;
    let terms = x.degree() / 2 + 40;
    let mut coefs = Vec::with_capacity(terms + 1);
    let mut s = 1.0;
    for m in 0..=terms {
        if m > 0 {
            let k = (2 * m) as f64;
            s = -s / (k * (k + 1.0));
        }
        coefs.push(s);
    }
    let mut acc = Series::constant(0.0, x.degree());
    for &s in coefs.iter().rev() {
        acc = &(&acc * &u2) + &Series::constant(s, x.degree());
    }
    acc
}

impl TargetFunction {
    pub fn new(id: &str, shape: Shape, lo: f64, hi: f64, description: &str) -> Self {
        let singularities = match shape {
            Shape::InverseSquare | Shape::Log => vec![0.0],
            _ => Vec::new(),
        };
        let taylor_center = match shape {
            Shape::Sinc2 | Shape::ExpNeg | Shape::InverseSquare => 0.01,
            Shape::Log => 0.5 * (lo + hi),
            _ => 0.0,
        };
        Self {
            id: id.to_owned(),
            shape,
            domain: Interval::new(lo, hi),
            singularities,
            taylor_center,
            description: description.to_owned(),
        }
    }

    /// Same function on another interval. The Taylor center is kept unless
    /// it falls outside the new interval's reach (log), where it moves to the
    /// midpoint.
    pub fn on_domain(&self, domain: Interval) -> Self {
        let mut f = self.clone();
        if f.shape == Shape::Log {
            f.taylor_center = 0.5 * (domain.lo + domain.hi);
        }
        f.domain = domain;
        f
    }

    pub fn is_singular_at(&self, x: f64) -> bool {
        self.singularities
            .iter()
            .any(|s| (x - s).abs() < SINGULARITY_TOLERANCE)
    }

    pub fn is_rectangular(&self) -> bool {
        matches!(self.shape, Shape::Rect { .. })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.is_singular_at(x) {
            return Err(Error::Singularity { id: self.id.clone(), x });
        }
        Ok(match self.shape {
            Shape::Gaussian => (-x * x).exp(),
            Shape::Square => x * x,
            Shape::InverseSquare => 1.0 / (x * x),
            Shape::Sinc2 | Shape::Sinc2New => {
                let s = sinc(x);
                s * s
            }
            Shape::Sine { omega } => (omega * x).sin(),
            Shape::Exp => x.exp(),
            Shape::ExpNeg => (-x).exp(),
            Shape::Log => {
                if x <= 0.0 {
                    return Err(Error::Domain {
                        what: "log argument",
                        value: x,
                        expected: "(0, inf)".into(),
                    });
                }
                x.ln()
            }
            Shape::Rect { cycles } => {
                let Interval { lo, hi } = self.domain;
                let period = (hi - lo) / f64::from(cycles);
                let t = (x - lo).rem_euclid(period);
                // the closed right end belongs to the last (negative) half
                if x < hi && t < 0.5 * period {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    }

    /// Taylor coefficients `f⁽ᵏ⁾(c)/k!` for `k = 0..=degree`.
    pub fn taylor_coeffs(&self, c: f64, degree: usize) -> Result<Vec<f64>> {
        let no_rule = || Error::NoTaylorRule { id: self.id.clone(), center: c };
        let x = Series::variable(c, degree);
        let s = match self.shape {
            Shape::Gaussian => (-&(&x * &x)).exp(),
            Shape::Square => &x * &x,
            Shape::InverseSquare => (&x * &x).recip().ok_or_else(no_rule)?,
            Shape::Sinc2 if c != 0.0 && c.abs() < 1.0 => {
                let sinc = sinc_series(&x);
                &sinc * &sinc
            }
            Shape::Sinc2 | Shape::Sinc2New => {
                let sinc = if c == 0.0 {
                    // sin(h) to one extra degree, divided termwise by h.
                    Series::variable(0.0, degree + 1)
                        .sin()
                        .shift_down()
                        .ok_or_else(no_rule)?
                } else {
                    x.sin().div(&x).ok_or_else(no_rule)?
                };
                &sinc * &sinc
            }
            Shape::Sine { omega } => x.scale(omega).sin(),
            Shape::Exp => x.exp(),
            Shape::ExpNeg => (-&x).exp(),
            Shape::Log => x.ln().ok_or_else(no_rule)?,
            Shape::Rect { .. } => return Err(no_rule()),
        };
        Ok(s.into_coeffs())
    }

    /// The single coefficient `f⁽ᵏ⁾(c)/k!`.
    pub fn taylor_rule(&self, c: f64, k: usize) -> Result<f64> {
        Ok(self.taylor_coeffs(c, k)?[k])
    }
}

/// Every registered target, in table order.
pub fn make_zoo() -> Vec<TargetFunction> {
    use Shape::*;
    let sine = |period: f64| Sine { omega: 2.0 * PI / period };
    vec![
        // ResNet tables
        TargetFunction::new("sin(2*pi*x/5)", sine(5.0), 0.0, 10.0, "sine, period 5"),
        TargetFunction::new("sin(2*pi*x/2.5)", sine(2.5), 0.0, 10.0, "sine, period 2.5"),
        TargetFunction::new("rect_1_to_10", Rect { cycles: 1 }, 0.0, 10.0, "+1 on [0,5), -1 on [5,10]"),
        TargetFunction::new(
            "rect_1_to_10_2cycles",
            Rect { cycles: 2 },
            0.0,
            10.0,
            "+1/-1 alternating every 2.5 on [0,10]",
        ),
        TargetFunction::new("log(x)", Log, 0.01, 10.0, "natural log from 0.01"),
        // Taylor / bit feedforward tables
        TargetFunction::new("gaussian", Gaussian, 0.0, 1.0, "exp(-x^2)"),
        TargetFunction::new("x^2", Square, 0.0, 1.0, "x^2"),
        TargetFunction::new("x^(-2)", InverseSquare, 0.0, 1.0, "x^-2, singular at 0"),
        TargetFunction::new("sinc2", Sinc2, 0.0, 1.0, "(sin x / x)^2"),
        TargetFunction::new("sin(2*pi*x/0.5)", sine(0.5), 0.0, 1.0, "sin(4 pi x)"),
        TargetFunction::new("sin(2*pi*x/0.25)", sine(0.25), 0.0, 1.0, "sin(8 pi x)"),
        TargetFunction::new("exp(x)", Exp, 0.0, 1.0, "exp(x)"),
        TargetFunction::new("exp(-x)", ExpNeg, 0.0, 1.0, "exp(-x)"),
        TargetFunction::new(
            "sinc2_new",
            Sinc2New,
            0.0,
            1.0,
            "(sin x / x)^2, series of sin x divided by x",
        ),
        TargetFunction::new("log(x)(from 0.1)", Log, 0.1, 1.0, "natural log from 0.1"),
        // Fourier table
        TargetFunction::new("sin(2*pi*x)", sine(1.0), -1.0, 1.0, "sin(2 pi x)"),
        TargetFunction::new("sin(4*pi*x)", sine(0.5), -1.0, 1.0, "sin(4 pi x)"),
    ]
}

/// Looks up a registry entry by id.
pub fn lookup(id: &str) -> Result<TargetFunction> {
    make_zoo()
        .into_iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::UnknownFunction(id.to_owned()))
}
