//! Feedforward construction on the binary expansion of the input.
//!
//! Binary-step layers peel off `n` bits of the (scaled) Horner argument, and
//! ReLU product gadgets `max{0, k(b − 1) + v}` gate the running Horner
//! accumulator by each bit. Multiplying the accumulator by the quantized
//! argument is then a sum of bit-gated, power-of-two-scaled copies.
//!
//! Layout of [`build_poly_net`]:
//!
//! 1. `h`-layer: `P = relu(2⁻ᵉ(x − c))` and/or `N = relu(−2⁻ᵉ(x − c))`, one
//!    branch per sign the argument can take on the domain.
//! 2. `n` extraction layers per branch (bit `bᵢ` and residual `rᵢ`).
//! 3. Per Horner step: accumulator layer `acc = p + S·a_k`, gate layer with
//!    `±acc` gated by every bit, combine layer `p = Σ ±2^(e−i)·gate`.
//!
//! The gadget slope `k` doubles as the accumulator bound, and `S` is a power
//! of two that keeps every accumulator inside it. Since pre-activations are
//! correctly rounded and all scalings are powers of two, the network output
//! is bit-identical to [`TaylorModel::eval`] at the quantized argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::fsum;
use crate::metrics::{norm_of_values, Grid, Interval, NormKind};
use crate::netcore::{Activation, Edge, NetworkGraph, Unit};
use crate::par::{self, Execution};
use crate::targets::TargetFunction;
use crate::taylor::{regular_points, TaylorModel};

/// Largest supported bit count.
pub const MAX_BITS: u32 = 64;
/// Gadget slope, and the bound every scaled Horner accumulator must respect.
pub const ACCUMULATOR_BOUND: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitExpansion {
    pub n: u32,
    /// `bits[i]` weighs `2^-(i+1)`.
    pub bits: Vec<u8>,
    pub value: f64,
}

fn check_bits(n: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("bit count must be in 1..={MAX_BITS}, got {n}")))
    }
}

/// Two-input product gadget `max{0, k(x₁ − 1) + x₂}`.
///
/// For bits it is the AND truth table; for `x₁ ∈ {0,1}` and `x₂ ∈ [0, k]` it
/// returns `x₁·x₂` exactly.
pub fn bit_product_gadget(k: f64) -> Result<NetworkGraph> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("gadget slope k must be >= 1, got {k}")));
    }
    let unit = Unit::new(Activation::Relu, &[(0, k), (1, 1.0)], -k);
    NetworkGraph::new(2, vec![vec![unit]], vec![], vec![Edge::new(0, 1.0)], 0.0)
}

/// Appends `n` extraction layers for each branch. `sources[s]` is the index
/// of branch `s`'s value (in `[0, 1]`) in the current last layer, and
/// `passthrough` lists further units of that layer to carry along.
///
/// Each new layer is laid out per branch as `[b₁..bᵢ, rᵢ]`, followed by the
/// carried units. Returns the indices of every branch's bits in the final
/// layer, and of the carried units.
fn push_extraction(
    layers: &mut Vec<Vec<Unit>>,
    sources: &[usize],
    passthrough: &[usize],
    n: u32,
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = n as usize;
    // (bit indices, residual index) per branch in the previous layer
    let mut prev: Vec<(Vec<usize>, usize)> = sources.iter().map(|&s| (Vec::new(), s)).collect();
    let mut carried = passthrough.to_vec();
    for i in 0..n {
        let mut layer = Vec::new();
        let mut next = Vec::with_capacity(prev.len());
        for (bits, r) in &prev {
            let mut new_bits = Vec::with_capacity(i + 1);
            for &b in bits {
                new_bits.push(layer.len());
                layer.push(Unit::carry(b));
            }
            // rᵢ = 2rᵢ₋₁ − bᵢ₋₁ (or the source itself on the first layer)
            let residual: Vec<(usize, f64)> = match bits.last() {
                Some(&b) => vec![(*r, 2.0), (b, -1.0)],
                None => vec![(*r, 1.0)],
            };
            new_bits.push(layer.len());
            layer.push(Unit::new(Activation::BinaryStep, &residual, -0.5));
            let r_idx = layer.len();
            layer.push(Unit::new(Activation::Identity, &residual, 0.0));
            next.push((new_bits, r_idx));
        }
        let mut new_carried = Vec::with_capacity(carried.len());
        for &c in &carried {
            new_carried.push(layer.len());
            layer.push(Unit::carry(c));
        }
        layers.push(layer);
        prev = next;
        carried = new_carried;
    }
    (prev.into_iter().map(|(bits, _)| bits).collect(), carried)
}

/// `n`-layer extractor for `x ∈ [0, 1)`. The last layer holds `b₁..bₙ` then
/// the residual; the output reconstructs `Σ bᵢ 2⁻ⁱ`.
pub fn build_bit_extractor(n: u32) -> Result<NetworkGraph> {
    check_bits(n)?;
    let mut layers = Vec::new();
    // The scalar input acts as a one-unit "layer" for the first step.
    let (bits, _) = push_extraction(&mut layers, &[0], &[], n);
    let output = bits[0]
        .iter()
        .enumerate()
        .map(|(i, &u)| Edge::new(u, 0.5f64.powi(i as i32 + 1)))
        .collect();
    NetworkGraph::new(1, layers, vec![], output, 0.0)
}

/// Reusable extractor for repeated [`extract_bits`] calls.
pub struct BitExtractor {
    n: u32,
    net: NetworkGraph,
}

impl BitExtractor {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self { n, net: build_bit_extractor(n)? })
    }

    pub fn network(&self) -> &NetworkGraph {
        &self.net
    }

    pub fn extract(&self, x: f64) -> Result<BitExpansion> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain { what: "bit extraction input", value: x, expected: "[0, 1)".into() });
        }
        let outs = self.net.layer_outputs(&[x]);
        let last = outs.last().expect("extractor has n >= 1 layers");
        let bits: Vec<u8> = last[..self.n as usize].iter().map(|&b| b as u8).collect();
        let value = fsum(bits.iter().enumerate().map(|(i, &b)| f64::from(b) * 0.5f64.powi(i as i32 + 1)));
        Ok(BitExpansion { n: self.n, bits, value })
    }
}

/// Truncated `n`-bit expansion of `x ∈ [0, 1)` read off the extractor's
/// forward pass.
pub fn extract_bits(x: f64, n: u32) -> Result<BitExpansion> {
    BitExtractor::new(n)?.extract(x)
}

/// `⌈log₂(1/ε)⌉ + 1` bits for an ε-accurate expansion.
pub fn required_bits(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain { what: "accuracy", value: eps, expected: "(0, 1)".into() });
    }
    Ok((1.0 / eps).log2().ceil() as u32 + 1)
}

/// A Taylor model realised on the bit expansion of its argument.
#[derive(Debug, Clone)]
pub struct PolyNet {
    pub net: NetworkGraph,
    pub bits: u32,
    pub center: f64,
    /// The argument `x − c` is scaled by `2^-arg_exp` into `[-1, 1]`.
    pub arg_exp: i32,
    /// Power-of-two scale applied to every Horner accumulator.
    pub horner_scale: f64,
    pub has_positive: bool,
    pub has_negative: bool,
}

impl PolyNet {
    pub fn forward(&self, x: f64) -> f64 {
        self.net.forward(x)
    }

    /// The quantized argument the network multiplies by, computed directly:
    /// `x − c` truncated toward zero to `n` bits of `2^arg_exp`, saturating
    /// at `1 − 2⁻ⁿ`.
    pub fn quantized_argument(&self, x: f64) -> f64 {
        let h = x - self.center;
        let scale = 2f64.powi(self.arg_exp);
        let u = (h.abs() / scale).min(1.0);
        let levels = 2f64.powi(self.bits as i32);
        let q = if u >= 1.0 { 1.0 - 1.0 / levels } else { (u * levels).floor() / levels };
        h.signum() * q * scale
    }
}

fn ceil_log2(v: f64) -> i32 {
    if v <= 0.0 {
        return 0;
    }
    let mut e = v.log2().ceil() as i32;
    // guard against log2 rounding either way
    while 2f64.powi(e) < v {
        e += 1;
    }
    while e > i32::MIN + 1 && 2f64.powi(e - 1) >= v {
        e -= 1;
    }
    e
}

/// Builds the bit-extraction network for Taylor model `t` over `domain`.
pub fn build_poly_net(t: &TaylorModel, bits: u32, domain: Interval) -> Result<PolyNet> {
    check_bits(bits)?;
    let c = t.center;
    let lo = domain.lo - c;
    let hi = domain.hi - c;
    let radius = lo.abs().max(hi.abs());
    let arg_exp = ceil_log2(radius);
    let arg_scale = 2f64.powi(arg_exp);
    let has_positive = hi > 0.0;
    let has_negative = lo < 0.0;

    // Accumulator bounds: |acc_k| <= Σ_{j>=k} |a_j| R^(j-k).
    let mut bound = 0.0f64;
    let mut worst = 0.0f64;
    for &a in t.coeffs.iter().rev() {
        bound = bound * arg_scale + a.abs();
        worst = worst.max(bound).max(bound * arg_scale);
    }
    if !worst.is_finite() {
        return Err(Error::Overflow { id: t.source_id.clone(), bound: worst });
    }
    let horner_scale = if worst > ACCUMULATOR_BOUND {
        2f64.powi(-ceil_log2(worst / ACCUMULATOR_BOUND))
    } else {
        1.0
    };
    let k = ACCUMULATOR_BOUND;

    let mut layers: Vec<Vec<Unit>> = Vec::new();
    let inv = 1.0 / arg_scale;
    let mut h_layer = Vec::new();
    let mut sources = Vec::new();
    let mut signs = Vec::new();
    if has_positive {
        sources.push(h_layer.len());
        signs.push(1.0);
        h_layer.push(Unit::new(Activation::Relu, &[(0, inv)], -c * inv));
    }
    if has_negative {
        sources.push(h_layer.len());
        signs.push(-1.0);
        h_layer.push(Unit::new(Activation::Relu, &[(0, -inv)], c * inv));
    }
    if sources.is_empty() {
        // Degenerate domain at the center: the argument is identically 0.
        return Ok(PolyNet {
            net: NetworkGraph::constant(1, t.coeffs[0]),
            bits,
            center: c,
            arg_exp,
            horner_scale,
            has_positive,
            has_negative,
        });
    }
    layers.push(h_layer);
    let (branch_bits, _) = push_extraction(&mut layers, &sources, &[], bits);
    // Flattened (unit index, weight of the bit in h̃) for every bit.
    let mut bit_units: Vec<usize> = Vec::new();
    let mut bit_weights: Vec<f64> = Vec::new();
    for (bits_idx, sign) in branch_bits.iter().zip(&signs) {
        for (i, &u) in bits_idx.iter().enumerate() {
            bit_units.push(u);
            bit_weights.push(sign * arg_scale * 0.5f64.powi(i as i32 + 1));
        }
    }
    let nb = bit_units.len();

    let degree = t.degree();
    let mut p_idx: Option<usize> = None;
    for kk in (0..degree).rev() {
        // accumulator: acc = p + S·a_{kk+1}; bits carried to 0..nb
        let mut acc_layer: Vec<Unit> = bit_units.iter().map(|&u| Unit::carry(u)).collect();
        let a_next = horner_scale * t.coeffs[kk + 1];
        let acc_unit = match p_idx {
            Some(p) => Unit::new(Activation::Identity, &[(p, 1.0)], a_next),
            None => Unit::new(Activation::Identity, &[], a_next),
        };
        let acc_idx = acc_layer.len();
        acc_layer.push(acc_unit);
        layers.push(acc_layer);

        // gate: bits carried to 0..nb, then (g+, g-) per bit
        let mut gate: Vec<Unit> = (0..nb).map(Unit::carry).collect();
        let mut gated = Vec::with_capacity(nb);
        for b in 0..nb {
            let plus = gate.len();
            gate.push(Unit::new(Activation::Relu, &[(b, k), (acc_idx, 1.0)], -k));
            gate.push(Unit::new(Activation::Relu, &[(b, k), (acc_idx, -1.0)], -k));
            gated.push(plus);
        }
        layers.push(gate);

        // combine: p = Σ w_b (g+ − g−)
        let mut combine: Vec<Unit> = (0..nb).map(Unit::carry).collect();
        let mut edges = Vec::with_capacity(2 * nb);
        for (b, &g) in gated.iter().enumerate() {
            edges.push((g, bit_weights[b]));
            edges.push((g + 1, -bit_weights[b]));
        }
        p_idx = Some(combine.len());
        combine.push(Unit::new(Activation::Identity, &edges, 0.0));
        layers.push(combine);
        bit_units = (0..nb).collect();
    }

    let output = match p_idx {
        Some(p) => vec![Edge::new(p, 1.0 / horner_scale)],
        None => Vec::new(),
    };
    let net = NetworkGraph::new(1, layers, vec![], output, t.coeffs[0])?;
    Ok(PolyNet { net, bits, center: c, arg_exp, horner_scale, has_positive, has_negative })
}

/// ε₂: norm over the grid of `forward(poly net) − eval_taylor`.
pub fn epsilon2_ffn(f: &TargetFunction, t: &TaylorModel, bits: u32, grid: &Grid, norm: NormKind) -> Result<f64> {
    epsilon2_ffn_with(f, t, bits, grid, norm, Execution::default())
}

pub fn epsilon2_ffn_with(
    f: &TargetFunction,
    t: &TaylorModel,
    bits: u32,
    grid: &Grid,
    norm: NormKind,
    exec: Execution,
) -> Result<f64> {
    let pn = build_poly_net(t, bits, f.domain)?;
    let pts = regular_points(f, grid);
    let net_out = par::map_init(exec, &pts, || pn.net.evaluator(), |ev, &x| ev.eval_scalar(x));
    let diffs: Vec<f64> = pts.iter().zip(&net_out).map(|(&x, &y)| y - t.eval(x)).collect();
    Ok(norm_of_values(&diffs, norm, grid.domain.length()))
}
