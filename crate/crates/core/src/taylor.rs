//! Degree-N Taylor models and their error against the target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{norm_over, Grid, NormKind};
use crate::par::Execution;
use crate::targets::TargetFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorModel {
    pub center: f64,
    /// `a₀..a_N`
    pub coeffs: Vec<f64>,
    pub source_id: String,
}

impl TaylorModel {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation of `Σ a_k (x − c)^k`.
    pub fn eval(&self, x: f64) -> f64 {
        let h = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * h + a)
    }
}

pub fn build_taylor(f: &TargetFunction, center: f64, degree: usize) -> Result<TaylorModel> {
    if !f.domain.contains(center) {
        return Err(Error::Domain {
            what: "Taylor center",
            value: center,
            expected: format!("[{}, {}]", f.domain.lo, f.domain.hi),
        });
    }
    let coeffs = f.taylor_coeffs(center, degree)?;
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::NoTaylorRule { id: f.id.clone(), center });
    }
    Ok(TaylorModel { center, coeffs, source_id: f.id.clone() })
}

pub fn eval_taylor(t: &TaylorModel, x: f64) -> f64 {
    t.eval(x)
}

/// Grid abscissae with the target's singular points dropped.
pub fn regular_points(f: &TargetFunction, grid: &Grid) -> Vec<f64> {
    grid.abscissae().into_iter().filter(|&x| !f.is_singular_at(x)).collect()
}

/// ε₁: norm of `f − t` over the grid. Divergent series give huge or
/// infinite values, which are reported as they are.
pub fn epsilon1_taylor(f: &TargetFunction, t: &TaylorModel, grid: &Grid, norm: NormKind) -> Result<f64> {
    epsilon1_taylor_with(f, t, grid, norm, Execution::default())
}

pub fn epsilon1_taylor_with(
    f: &TargetFunction,
    t: &TaylorModel,
    grid: &Grid,
    norm: NormKind,
    exec: Execution,
) -> Result<f64> {
    let pts = regular_points(f, grid);
    norm_over(&pts, grid.domain.length(), |x| f.eval(x), |x| Ok(t.eval(x)), norm, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Interval;
    use crate::targets::lookup;
    use std::f64::consts::PI;

    #[test]
    fn exp_series_at_zero() {
        let t = build_taylor(&lookup("exp(x)").unwrap(), 0.0, 3).unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        assert!(t.coeffs.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-16));
    }

    #[test]
    fn sin4pi_series_matches_hand_expansion() {
        let t = build_taylor(&lookup("sin(2*pi*x/0.5)").unwrap(), 0.0, 5).unwrap();
        let w = 4.0 * PI;
        let want = [0.0, w, 0.0, -w.powi(3) / 6.0, 0.0, w.powi(5) / 120.0];
        for (a, b) in t.coeffs.iter().zip(want) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
        // Three-term oracle at x = 1.
        let direct = w - w.powi(3) / 6.0 + w.powi(5) / 120.0;
        assert!((t.eval(1.0) - direct).abs() < 1e-9);
        assert!((t.eval(1.0) - 2293.0).abs() < 1.0);
    }

    #[test]
    fn horner_trivia() {
        let sq = TaylorModel { center: 0.0, coeffs: vec![0.0, 0.0, 1.0], source_id: "x^2".into() };
        assert_eq!(sq.eval(0.5), 0.25);
        let c = TaylorModel { center: 3.0, coeffs: vec![-2.5], source_id: "c".into() };
        assert_eq!(eval_taylor(&c, 1e9), -2.5);
    }

    #[test]
    fn errors_for_missing_rules() {
        let log = lookup("log(x)(from 0.1)").unwrap().on_domain(Interval::new(0.0, 1.0));
        assert!(matches!(build_taylor(&log, 0.0, 3), Err(Error::NoTaylorRule { .. })));
        assert!(matches!(build_taylor(&lookup("x^2").unwrap(), 2.0, 3), Err(Error::Domain { .. })));
    }

    #[test]
    fn square_error_is_float_noise() {
        let f = lookup("x^2").unwrap();
        let t = build_taylor(&f, 0.0, 5).unwrap();
        let g = Grid::new(f.domain, Grid::DEFAULT_POINTS).unwrap();
        assert!(epsilon1_taylor(&f, &t, &g, NormKind::Sup).unwrap() <= 1e-15);
    }

    #[test]
    fn singular_points_are_skipped() {
        let f = lookup("x^(-2)").unwrap();
        let t = build_taylor(&f, 0.01, 3).unwrap();
        let g = Grid::new(f.domain, 11).unwrap();
        assert_eq!(regular_points(&f, &g).len(), 10);
        assert!(epsilon1_taylor(&f, &t, &g, NormKind::Sup).unwrap().is_finite());
    }
}
