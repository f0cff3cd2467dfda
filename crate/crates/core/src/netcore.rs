//! Layered network IR shared by every construction, and its evaluator.
//!
//! Units store sparse input edges into the previous layer (layer 0 reads the
//! input vector). The network output is the final linear combination of the
//! last layer, plus any skip edges from earlier layers, plus `output_bias`.
//!
//! Each pre-activation and the output are computed as the correctly rounded
//! value of the exact affine combination (see [`crate::exact`]), so a
//! network's output never depends on edge order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{affine, ExactSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    /// `1` when the pre-activation is `>= 0`, else `0`.
    BinaryStep,
    Sine,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::BinaryStep => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sine => z.sin(),
            Activation::Identity => z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub activation: Activation,
    /// Indices into the previous layer (or the input vector for layer 0).
    pub inputs: Vec<usize>,
    /// One weight per input edge.
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Unit {
    pub fn new(activation: Activation, edges: &[(usize, f64)], bias: f64) -> Self {
        Self {
            activation,
            inputs: edges.iter().map(|e| e.0).collect(),
            weights: edges.iter().map(|e| e.1).collect(),
            bias,
        }
    }

    /// Identity copy of unit `src` of the previous layer.
    pub fn carry(src: usize) -> Self {
        Self::new(Activation::Identity, &[(src, 1.0)], 0.0)
    }

    pub fn fan_in(&self) -> usize {
        self.inputs.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub unit: usize,
    pub weight: f64,
}

impl Edge {
    pub const fn new(unit: usize, weight: f64) -> Self {
        Self { unit, weight }
    }
}

/// Output edges taken directly from a hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub layer: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    pub input_dim: usize,
    pub layers: Vec<Vec<Unit>>,
    #[serde(default)]
    pub skips: Vec<Skip>,
    /// Edges from the last layer (or the inputs when there are no layers).
    pub output: Vec<Edge>,
    pub output_bias: f64,
}

/// Unit counts by activation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCensus {
    pub relu: usize,
    pub binary_step: usize,
    pub sine: usize,
    pub identity: usize,
}

impl UnitCensus {
    pub fn total(&self) -> usize {
        self.relu + self.binary_step + self.sine + self.identity
    }
}

impl NetworkGraph {
    pub fn new(
        input_dim: usize,
        layers: Vec<Vec<Unit>>,
        skips: Vec<Skip>,
        output: Vec<Edge>,
        output_bias: f64,
    ) -> Result<Self> {
        let net = Self { input_dim, layers, skips, output, output_bias };
        net.validate()?;
        Ok(net)
    }

    /// A network with no units that outputs a constant.
    pub fn constant(input_dim: usize, value: f64) -> Self {
        Self { input_dim, layers: Vec::new(), skips: Vec::new(), output: Vec::new(), output_bias: value }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        if self.input_dim == 0 {
            return bad("input_dim must be positive".into());
        }
        let mut width = self.input_dim;
        for (l, layer) in self.layers.iter().enumerate() {
            for (u, unit) in layer.iter().enumerate() {
                if unit.inputs.len() != unit.weights.len() {
                    return bad(format!(
                        "layer {l} unit {u}: {} inputs but {} weights",
                        unit.inputs.len(),
                        unit.weights.len()
                    ));
                }
                if let Some(&i) = unit.inputs.iter().find(|&&i| i >= width) {
                    return bad(format!("layer {l} unit {u} reads {i}, previous width is {width}"));
                }
            }
            width = layer.len();
        }
        for s in &self.skips {
            let Some(layer) = self.layers.get(s.layer) else {
                return bad(format!("skip from missing layer {}", s.layer));
            };
            if s.edges.iter().any(|e| e.unit >= layer.len()) {
                return bad(format!("skip edge out of range in layer {}", s.layer));
            }
        }
        if self.output.iter().any(|e| e.unit >= width) {
            return bad(format!("output edge out of range (last width {width})"));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn count_units(&self) -> UnitCensus {
        let mut c = UnitCensus::default();
        for unit in self.layers.iter().flatten() {
            match unit.activation {
                Activation::Relu => c.relu += 1,
                Activation::BinaryStep => c.binary_step += 1,
                Activation::Sine => c.sine += 1,
                Activation::Identity => c.identity += 1,
            }
        }
        c
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            net: self,
            bufs: self.layers.iter().map(|l| vec![0.0; l.len()]).collect(),
            acc: ExactSum::new(),
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.evaluator().eval(&[x])
    }

    pub fn forward_vec(&self, inputs: &[f64]) -> f64 {
        self.evaluator().eval(inputs)
    }

    /// Outputs of every layer, in order.
    pub fn layer_outputs(&self, inputs: &[f64]) -> Vec<Vec<f64>> {
        let mut ev = self.evaluator();
        ev.eval(inputs);
        ev.bufs
    }

    /// Copy with every output and skip weight multiplied by `alpha`.
    pub fn with_output_scaled(&self, alpha: f64) -> Self {
        let mut net = self.clone();
        for e in net.output.iter_mut().chain(net.skips.iter_mut().flat_map(|s| s.edges.iter_mut())) {
            e.weight *= alpha;
        }
        net
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}

/// Reusable forward-pass buffers for one network.
pub struct Evaluator<'a> {
    net: &'a NetworkGraph,
    bufs: Vec<Vec<f64>>,
    acc: ExactSum,
}

impl Evaluator<'_> {
    pub fn eval_scalar(&mut self, x: f64) -> f64 {
        self.eval(&[x])
    }

    /// # Panics
    /// If `inputs.len()` differs from the network's `input_dim`.
    pub fn eval(&mut self, inputs: &[f64]) -> f64 {
        let net = self.net;
        assert_eq!(inputs.len(), net.input_dim, "input arity mismatch");
        for (l, layer) in net.layers.iter().enumerate() {
            let (done, rest) = self.bufs.split_at_mut(l);
            let prev: &[f64] = if l == 0 { inputs } else { &done[l - 1] };
            let out = &mut rest[0];
            for (slot, unit) in out.iter_mut().zip(layer) {
                let z = match unit.inputs.len() {
                    0 => unit.bias,
                    // A single FMA is already correctly rounded.
                    1 => unit.weights[0].mul_add(prev[unit.inputs[0]], unit.bias),
                    _ => affine(
                        &mut self.acc,
                        unit.bias,
                        unit.weights.iter().zip(&unit.inputs).map(|(&w, &i)| (w, prev[i])),
                    ),
                };
                *slot = unit.activation.apply(z);
            }
        }
        let last: &[f64] = net.layers.len().checked_sub(1).map_or(inputs, |l| &self.bufs[l]);
        let acc = &mut self.acc;
        acc.clear();
        acc.add(net.output_bias);
        for s in &net.skips {
            let src = &self.bufs[s.layer];
            for e in &s.edges {
                acc.add_product(e.weight, src[e.unit]);
            }
        }
        for e in &net.output {
            acc.add_product(e.weight, last[e.unit]);
        }
        acc.value()
    }
}
