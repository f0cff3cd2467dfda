//! Full-batch Adam training of double and hybrid models.
//!
//! Parameters are packed as `[Aₖ, φₖ]*K, [νₗ, ψₗ]*L, [cⱼ, bⱼ, wⱼ₁..wⱼL]*J, dc`.
//! Skip multipliers stay fixed, so their `sin/cos(k ω₀ x)` are precomputed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fit_single_dataset, Dataset, FitReport, FourierModel, InnerUnit, OuterUnit, Variant};
use crate::error::{Error, Result};
use crate::metrics::NormKind;
use crate::par::{self, Execution};

/// Range of the random outer weights and biases at initialisation.
const INIT_SPREAD: f64 = 0.01;

fn inner_and_outer(rng: &mut ChaCha8Rng, base_freq: f64, j: usize, random_amplitude: bool) -> (Vec<InnerUnit>, Vec<OuterUnit>) {
    let inner = (1..=j)
        .map(|l| InnerUnit { frequency: l as f64 * base_freq, phase: rng.random_range(-PI..=PI) })
        .collect();
    let outer = (0..j)
        .map(|_| {
            let amplitude = if random_amplitude { rng.random_range(-INIT_SPREAD..=INIT_SPREAD) } else { 0.0 };
            let weights = (0..j).map(|_| rng.random_range(-INIT_SPREAD..=INIT_SPREAD)).collect();
            OuterUnit { amplitude, weights, bias: rng.random_range(-INIT_SPREAD..=INIT_SPREAD) }
        })
        .collect();
    (inner, outer)
}

/// Hybrid model whose skip part is the `K`-harmonic least-squares fit and
/// whose `J` double units start with zero amplitude, so the initial model
/// equals the single-layer solution.
pub fn init_hybrid(data: &Dataset, k: usize, j: usize, seed: u64) -> Result<FourierModel> {
    if j == 0 {
        return Err(Error::InvalidParameter("hybrid needs J >= 1 double units".into()));
    }
    let (single, _) = fit_single_dataset(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (inner_units, outer_units) = inner_and_outer(&mut rng, single.base_freq, j, false);
    Ok(FourierModel { variant: Variant::Hybrid, inner_units, outer_units, seed: Some(seed), ..single })
}

/// Double model with `J` inner and outer units around the sample mean.
pub fn init_double(data: &Dataset, j: usize, seed: u64) -> Result<FourierModel> {
    if j == 0 || data.is_empty() {
        return Err(Error::InvalidParameter("double model needs J >= 1 and samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_freq = data.base_freq();
    let (inner_units, outer_units) = inner_and_outer(&mut rng, base_freq, j, true);
    Ok(FourierModel {
        variant: Variant::Double,
        base_freq,
        skip_units: vec![],
        inner_units,
        outer_units,
        dc: data.ys.iter().sum::<f64>() / data.len() as f64,
        seed: Some(seed),
    })
}

pub fn pack_params(m: &FourierModel) -> Vec<f64> {
    let mut p = Vec::new();
    for u in &m.skip_units {
        p.extend([u.amplitude, u.phase]);
    }
    for u in &m.inner_units {
        p.extend([u.frequency, u.phase]);
    }
    for o in &m.outer_units {
        p.extend([o.amplitude, o.bias]);
        p.extend(&o.weights);
    }
    p.push(m.dc);
    p
}

pub fn unpack_params(m: &mut FourierModel, p: &[f64]) {
    let mut it = p.iter().copied();
    let mut next = || it.next().expect("parameter vector too short");
    for u in &mut m.skip_units {
        u.amplitude = next();
        u.phase = next();
    }
    for u in &mut m.inner_units {
        u.frequency = next();
        u.phase = next();
    }
    for o in &mut m.outer_units {
        o.amplitude = next();
        o.bias = next();
        for w in &mut o.weights {
            *w = next();
        }
    }
    m.dc = next();
}

/// A dataset with the fixed skip harmonics precomputed for one model shape.
pub struct TrainingSet<'a> {
    data: &'a Dataset,
    /// `(sin, cos)(k ω₀ x)` per sample, `K` per row.
    harmonics: Vec<(f64, f64)>,
    k: usize,
}

impl<'a> TrainingSet<'a> {
    pub fn new(data: &'a Dataset, m: &FourierModel) -> Self {
        let k = m.skip_units.len();
        let mut harmonics = Vec::with_capacity(k * data.len());
        for &x in &data.xs {
            for u in &m.skip_units {
                harmonics.push((f64::from(u.multiplier) * m.base_freq * x).sin_cos());
            }
        }
        Self { data, harmonics, k }
    }
}

/// Mean squared residual and its gradient with respect to [`pack_params`].
pub fn loss_and_gradient(m: &FourierModel, set: &TrainingSet<'_>, exec: Execution) -> (f64, Vec<f64>) {
    let k = m.skip_units.len();
    let l = m.inner_units.len();
    let np = pack_params(m).len();
    let inner_off = 2 * k;
    let outer_off = inner_off + 2 * l;
    let dc_off = np - 1;
    let skip_trig: Vec<(f64, f64)> = m.skip_units.iter().map(|u| u.phase.sin_cos()).collect();
    let idx: Vec<usize> = (0..set.data.len()).collect();

    let chunk = |rows: &[usize]| {
        let mut loss = 0.0;
        let mut g = vec![0.0; np];
        let mut theta = vec![(0.0, 0.0); k];
        let mut inner = vec![(0.0, 0.0); l];
        let mut back = vec![0.0; l];
        let mut outer = vec![(0.0, 0.0); m.outer_units.len()];
        for &i in rows {
            let x = set.data.xs[i];
            let mut pred = m.dc;
            let row = &set.harmonics[i * set.k..(i + 1) * set.k];
            for (q, u) in m.skip_units.iter().enumerate() {
                let (s, c) = row[q];
                let (sp, cp) = skip_trig[q];
                let st = s.mul_add(cp, c * sp);
                let ct = c.mul_add(cp, -(s * sp));
                theta[q] = (st, ct);
                pred = u.amplitude.mul_add(st, pred);
            }
            for (q, u) in m.inner_units.iter().enumerate() {
                inner[q] = u.frequency.mul_add(x, u.phase).sin_cos();
            }
            for (q, o) in m.outer_units.iter().enumerate() {
                let z = o.weights.iter().zip(&inner).fold(o.bias, |acc, (w, s)| w.mul_add(s.0, acc));
                outer[q] = z.sin_cos();
                pred = o.amplitude.mul_add(outer[q].0, pred);
            }
            let r = pred - set.data.ys[i];
            loss = r.mul_add(r, loss);
            let f = 2.0 * r;
            for (q, u) in m.skip_units.iter().enumerate() {
                g[2 * q] += f * theta[q].0;
                g[2 * q + 1] += f * u.amplitude * theta[q].1;
            }
            back.iter_mut().for_each(|b| *b = 0.0);
            let mut off = outer_off;
            for (q, o) in m.outer_units.iter().enumerate() {
                let (su, cu) = outer[q];
                let gz = f * o.amplitude * cu;
                g[off] += f * su;
                g[off + 1] += gz;
                for (t, w) in o.weights.iter().enumerate() {
                    g[off + 2 + t] += gz * inner[t].0;
                    back[t] = w.mul_add(gz, back[t]);
                }
                off += 2 + l;
            }
            for t in 0..l {
                let gi = back[t] * inner[t].1;
                g[inner_off + 2 * t] += gi * x;
                g[inner_off + 2 * t + 1] += gi;
            }
            g[dc_off] += f;
        }
        (loss, g)
    };
    let (loss, mut g) = par::chunked_reduce(exec, &idx, chunk, |(la, mut ga), (lb, gb)| {
        ga.iter_mut().zip(&gb).for_each(|(a, b)| *a += b);
        (la + lb, ga)
    })
    .unwrap_or((0.0, vec![0.0; np]));
    let n = set.data.len().max(1) as f64;
    g.iter_mut().for_each(|v| *v /= n);
    (loss / n, g)
}

/// Adaptive-moment optimiser state.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(lr: f64, dim: usize) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { iterations: 5000, learning_rate: 1e-3 }
    }
}

/// Trains `m0` on `samples` offset points of `f` and returns the best iterate.
pub fn train_gradient(
    m0: &FourierModel,
    f: &crate::targets::TargetFunction,
    samples: usize,
    iterations: usize,
    seed: u64,
) -> Result<(FourierModel, FitReport)> {
    let data = Dataset::from_target(f, samples)?;
    let mut m = m0.clone();
    m.seed = Some(seed);
    train_gradient_with(&m, &data, TrainConfig { iterations, ..TrainConfig::default() }, Execution::default())
}

pub fn train_gradient_with(
    m0: &FourierModel,
    data: &Dataset,
    cfg: TrainConfig,
    exec: Execution,
) -> Result<(FourierModel, FitReport)> {
    if m0.variant == Variant::Single {
        return Err(Error::InvalidParameter("single models are fitted, not trained".into()));
    }
    m0.validate()?;
    let set = TrainingSet::new(data, m0);
    let mut model = m0.clone();
    let mut params = pack_params(m0);
    let mut adam = Adam::new(cfg.learning_rate, params.len());
    let mut best = (f64::INFINITY, params.clone());
    for it in 0..=cfg.iterations {
        unpack_params(&mut model, &params);
        let (loss, grad) = loss_and_gradient(&model, &set, exec);
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration: it, loss });
        }
        if loss < best.0 {
            best = (loss, params.clone());
        }
        if it < cfg.iterations {
            adam.step(&mut params, &grad);
        }
    }
    unpack_params(&mut model, &best.1);
    let report = FitReport {
        final_loss: data.residual_norm(&model, NormKind::L2Rms),
        iterations: cfg.iterations,
        seed: model.seed,
        parameter_count: model.parameter_count(),
    };
    Ok((model, report))
}
