//! Closed-form least-squares fit of the single-layer model.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{FitReport, FourierModel, SkipUnit, Variant};
use crate::error::{Error, Result};
use crate::metrics::{Grid, Interval, NormKind};
use crate::targets::TargetFunction;

/// Samples of a target on the half-step offset grid of its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub domain: Interval,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Dataset {
    /// Singular sample points are dropped; other evaluation errors propagate.
    pub fn from_target(f: &TargetFunction, samples: usize) -> Result<Self> {
        let grid = Grid::with_offset(f.domain, samples)?;
        let mut xs = Vec::with_capacity(samples);
        let mut ys = Vec::with_capacity(samples);
        for x in grid.abscissae() {
            if f.is_singular_at(x) {
                continue;
            }
            xs.push(x);
            ys.push(f.eval(x)?);
        }
        Ok(Self { domain: f.domain, xs, ys })
    }

    pub fn from_fn(domain: Interval, samples: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = Grid::with_offset(domain, samples)?.abscissae();
        let ys = xs.iter().map(|&x| g(x)).collect();
        Ok(Self { domain, xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn base_freq(&self) -> f64 {
        2.0 * PI / self.domain.length()
    }
}

/// Least-squares `K`-harmonic fit of `f` on `samples` offset points.
pub fn fit_single(f: &TargetFunction, k: usize, samples: usize) -> Result<(FourierModel, FitReport)> {
    if samples < 4 * k + 2 {
        return Err(Error::SingularSystem(format!("{samples} samples cannot determine {k} harmonics")));
    }
    fit_single_dataset(&Dataset::from_target(f, samples)?, k)
}

/// Solves the normal equations of the basis `1, sin(kω₀x), cos(kω₀x)`.
pub fn fit_single_dataset(data: &Dataset, k: usize) -> Result<(FourierModel, FitReport)> {
    if k == 0 {
        return Err(Error::InvalidParameter("harmonic count K must be >= 1".into()));
    }
    let p = 2 * k + 1;
    if data.len() < 4 * k + 2 {
        return Err(Error::SingularSystem(format!("{} samples cannot determine {k} harmonics", data.len())));
    }
    let w0 = data.base_freq();
    let basis = DMatrix::from_fn(data.len(), p, |i, c| {
        if c == 0 {
            return 1.0;
        }
        let h = c.div_ceil(2) as f64;
        let t = (h * w0) * data.xs[i];
        if c % 2 == 1 {
            t.sin()
        } else {
            t.cos()
        }
    });
    let y = DVector::from_column_slice(&data.ys);
    let gram = basis.tr_mul(&basis);
    let rhs = basis.tr_mul(&y);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("normal equations are not positive definite".into()))?;
    let coef = chol.solve(&rhs);
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularSystem("non-finite least-squares solution".into()));
    }
    let skip_units = (1..=k)
        .map(|h| {
            let (alpha, beta) = (coef[2 * h - 1], coef[2 * h]);
            SkipUnit { amplitude: alpha.hypot(beta), multiplier: h as u32, phase: beta.atan2(alpha) }
        })
        .collect();
    let model = FourierModel {
        variant: Variant::Single,
        base_freq: w0,
        skip_units,
        inner_units: vec![],
        outer_units: vec![],
        dc: coef[0],
        seed: None,
    };
    let report = FitReport {
        final_loss: data.residual_norm(&model, NormKind::L2Rms),
        iterations: 0,
        seed: None,
        parameter_count: model.parameter_count(),
    };
    Ok((model, report))
}
