//! Fourier neural networks with sine activations.
//!
//! * single: `dc + Σₖ Aₖ sin(k ω₀ x + φₖ)`, a truncated Fourier series;
//! * double: `dc + Σⱼ cⱼ sin(Σₗ wⱼₗ sin(νₗ x + ψₗ) + bⱼ)`;
//! * hybrid: both sums, with the skip sines and the inner sines sharing the
//!   first hidden layer.

mod fit;
mod train;

pub use fit::{fit_single, fit_single_dataset, Dataset};
pub use train::{
    init_double, init_hybrid, loss_and_gradient, pack_params, train_gradient, train_gradient_with, unpack_params,
    Adam, TrainConfig, TrainingSet,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{norm_of_values, NormKind};
use crate::netcore::{Activation, Edge, NetworkGraph, Skip, Unit};
use crate::targets::TargetFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Single,
    Double,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipUnit {
    pub amplitude: f64,
    /// Integer harmonic of the base frequency.
    pub multiplier: u32,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerUnit {
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterUnit {
    pub amplitude: f64,
    /// One weight per inner unit.
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierModel {
    pub variant: Variant,
    /// `ω₀ = 2π / (domain length)`.
    pub base_freq: f64,
    pub skip_units: Vec<SkipUnit>,
    pub inner_units: Vec<InnerUnit>,
    pub outer_units: Vec<OuterUnit>,
    pub dc: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// RMS residual over the fitting samples.
    pub final_loss: f64,
    pub iterations: usize,
    pub seed: Option<u64>,
    pub parameter_count: usize,
}

impl SkipUnit {
    #[inline]
    fn eval(&self, base_freq: f64, x: f64) -> f64 {
        self.amplitude * (f64::from(self.multiplier) * base_freq).mul_add(x, self.phase).sin()
    }
}

impl FourierModel {
    /// Skip units contribute 3 numbers each (amplitude, multiplier, phase),
    /// inner units 2, outer units `2 + L`, plus the offset.
    pub fn parameter_count(&self) -> usize {
        let l = self.inner_units.len();
        3 * self.skip_units.len() + 2 * l + self.outer_units.len() * (2 + l) + 1
    }

    /// Second-layer sum `Σⱼ cⱼ sin(...)`, with the inner activations written
    /// into `scratch`.
    fn double_part(&self, x: f64, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(self.inner_units.iter().map(|u| u.frequency.mul_add(x, u.phase).sin()));
        self.outer_units
            .iter()
            .map(|o| {
                let z = o.weights.iter().zip(scratch.iter()).fold(o.bias, |acc, (w, s)| w.mul_add(*s, acc));
                o.amplitude * z.sin()
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        let l = self.inner_units.len();
        let ok = match self.variant {
            Variant::Single => self.inner_units.is_empty() && self.outer_units.is_empty(),
            Variant::Double => self.skip_units.is_empty(),
            Variant::Hybrid => true,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("{:?} model has units of the wrong kind", self.variant)));
        }
        if self.outer_units.iter().any(|o| o.weights.len() != l) {
            return Err(Error::InvalidParameter(format!("outer units need {l} inner weights")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

pub fn model_eval(m: &FourierModel, x: f64) -> f64 {
    let skip: f64 = m.skip_units.iter().map(|u| u.eval(m.base_freq, x)).sum();
    if m.outer_units.is_empty() {
        return m.dc + skip;
    }
    let mut scratch = Vec::with_capacity(m.inner_units.len());
    m.dc + skip + m.double_part(x, &mut scratch)
}

/// Sine-activation network equal to [`model_eval`].
pub fn lower_to_network(m: &FourierModel) -> Result<NetworkGraph> {
    m.validate()?;
    let skip_sines: Vec<Unit> = m
        .skip_units
        .iter()
        .map(|u| Unit::new(Activation::Sine, &[(0, f64::from(u.multiplier) * m.base_freq)], u.phase))
        .collect();
    let skip_edges: Vec<Edge> = m.skip_units.iter().enumerate().map(|(i, u)| Edge::new(i, u.amplitude)).collect();
    if m.variant == Variant::Single {
        return NetworkGraph::new(1, vec![skip_sines], vec![], skip_edges, m.dc);
    }
    let offset = skip_sines.len();
    let mut first = skip_sines;
    first.extend(m.inner_units.iter().map(|u| Unit::new(Activation::Sine, &[(0, u.frequency)], u.phase)));
    let second: Vec<Unit> = m
        .outer_units
        .iter()
        .map(|o| {
            let edges: Vec<(usize, f64)> = o.weights.iter().enumerate().map(|(l, &w)| (offset + l, w)).collect();
            Unit::new(Activation::Sine, &edges, o.bias)
        })
        .collect();
    let output = m.outer_units.iter().enumerate().map(|(j, o)| Edge::new(j, o.amplitude)).collect();
    let skips = if skip_edges.is_empty() { vec![] } else { vec![Skip { layer: 0, edges: skip_edges }] };
    NetworkGraph::new(1, vec![first, second], skips, output, m.dc)
}

/// Residual norm of `m` against `f` on the offset sample grid over `f`'s domain.
pub fn table5_error(m: &FourierModel, f: &TargetFunction, samples: usize, norm: NormKind) -> Result<f64> {
    let data = Dataset::from_target(f, samples)?;
    Ok(data.residual_norm(m, norm))
}

impl Dataset {
    pub fn residual_norm(&self, m: &FourierModel, norm: NormKind) -> f64 {
        let diffs: Vec<f64> = self.xs.iter().zip(&self.ys).map(|(&x, &y)| model_eval(m, x) - y).collect();
        norm_of_values(&diffs, norm, self.domain.length())
    }
}
