//! Piecewise (sample-and-hold / interpolating) approximants and their ReLU
//! lowering.
//!
//! A model samples the target at `M + 1` uniform nodes `nⱼ = lo + j·a`. Each
//! node owns a saturating ramp `σⱼ(x) = min(1, max(0, (x − nⱼ)/w + 1))` that
//! rises over `[nⱼ − w, nⱼ]`, and the approximant is
//!
//! ```text
//! Σ_{k<M} v_k (σ_k − σ_{k+1}) + v_M σ_M
//! ```
//!
//! With `w = a` this is linear interpolation; with a tiny `w` it is the
//! right-continuous hold, except inside the ramp bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{norm_of_values, Grid, Interval, NormKind};
use crate::netcore::{Activation, Edge, NetworkGraph, Unit};
use crate::par::{self, Execution};
use crate::targets::TargetFunction;
use crate::taylor::regular_points;

/// Ramp width of the rectangular lowering, relative to the spacing.
pub const STEP_RAMP_FRACTION: f64 = 1e-6;
/// Sample offset used when a node lands on a singularity, relative to the spacing.
pub const SINGULAR_NUDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sample-and-hold.
    Rectangular,
    /// Linear interpolation between nodes.
    Trapezoidal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseModel {
    pub mode: Mode,
    pub m: usize,
    pub domain: Interval,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseModel {
    pub fn spacing(&self) -> f64 {
        self.domain.length() / self.m as f64
    }

    /// Width of the ramp preceding each node in the lowered network.
    pub fn ramp_width(&self) -> f64 {
        match self.mode {
            Mode::Rectangular => self.spacing() * STEP_RAMP_FRACTION,
            Mode::Trapezoidal => self.spacing(),
        }
    }

    /// Points closer than this to a node are where the lowering and the
    /// model legitimately differ. Interpolation has no such band.
    pub fn excluded_band(&self) -> f64 {
        match self.mode {
            Mode::Rectangular => self.ramp_width(),
            Mode::Trapezoidal => 0.0,
        }
    }

    /// Index `i` with `nodes[i] <= x < nodes[i+1]`, or `M` at the right end.
    fn cell(&self, x: f64) -> usize {
        let m = self.m;
        let mut i = (((x - self.domain.lo) / self.spacing()).floor().max(0.0) as usize).min(m);
        while i > 0 && self.nodes[i] > x {
            i -= 1;
        }
        while i < m && self.nodes[i + 1] <= x {
            i += 1;
        }
        i
    }

    fn distance_to_nodes(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let mut d = (x - self.nodes[i]).abs();
        if i < self.m {
            d = d.min((self.nodes[i + 1] - x).abs());
        }
        d
    }
}

/// Samples `f` at `M + 1` uniform nodes over its domain.
pub fn build_piecewise(f: &TargetFunction, m: usize, mode: Mode) -> Result<PiecewiseModel> {
    if m == 0 {
        return Err(Error::InvalidParameter("sample count M must be >= 1".into()));
    }
    let domain = f.domain;
    let a = domain.length() / m as f64;
    let nodes: Vec<f64> = (0..=m)
        .map(|j| if j == m { domain.hi } else { domain.lo + j as f64 * a })
        .collect();
    let mut values = Vec::with_capacity(nodes.len());
    for &n in &nodes {
        let v = if f.is_singular_at(n) {
            let nudged = n + SINGULAR_NUDGE * a;
            if !domain.contains(nudged) || f.is_singular_at(nudged) {
                return Err(Error::Singularity { id: f.id.clone(), x: n });
            }
            f.eval(nudged)?
        } else {
            f.eval(n)?
        };
        if !v.is_finite() {
            return Err(Error::Singularity { id: f.id.clone(), x: n });
        }
        values.push(v);
    }
    Ok(PiecewiseModel { mode, m, domain, nodes, values })
}

pub fn eval_piecewise(p: &PiecewiseModel, x: f64) -> Result<f64> {
    if !p.domain.contains(x) {
        return Err(Error::Domain { what: "piecewise input", value: x, expected: format!("{:?}", p.domain) });
    }
    let i = p.cell(x);
    if i == p.m {
        return Ok(p.values[i]);
    }
    Ok(match p.mode {
        Mode::Rectangular => p.values[i],
        Mode::Trapezoidal => {
            let (n0, n1) = (p.nodes[i], p.nodes[i + 1]);
            let (v0, v1) = (p.values[i], p.values[i + 1]);
            v0 + (v1 - v0) * ((x - n0) / (n1 - n0))
        }
    })
}

/// Two hidden layers: `zⱼ = relu((x − nⱼ)/w + 1)`, then `tⱼ = relu(1 − zⱼ)`
/// so that `σⱼ = 1 − tⱼ`; the output sums `v_k (t_{k+1} − t_k)`.
pub fn lower_to_resnet(p: &PiecewiseModel) -> Result<NetworkGraph> {
    let w = p.ramp_width();
    let inv = 1.0 / w;
    let ramps: Vec<Unit> =
        p.nodes.iter().map(|&n| Unit::new(Activation::Relu, &[(0, inv)], 1.0 - n * inv)).collect();
    let complements: Vec<Unit> =
        (0..p.nodes.len()).map(|j| Unit::new(Activation::Relu, &[(j, -1.0)], 1.0)).collect();
    let m = p.m;
    let mut output = Vec::with_capacity(2 * m + 1);
    for k in 0..m {
        let v = p.values[k];
        if v != 0.0 {
            output.push(Edge::new(k + 1, v));
            output.push(Edge::new(k, -v));
        }
    }
    if p.values[m] != 0.0 {
        output.push(Edge::new(m, -p.values[m]));
    }
    NetworkGraph::new(1, vec![ramps, complements], vec![], output, p.values[m])
}

/// ε₁: `f − piecewise` over the regular grid points.
pub fn epsilon1_resnet(f: &TargetFunction, p: &PiecewiseModel, grid: &Grid, norm: NormKind) -> Result<f64> {
    epsilon1_resnet_with(f, p, grid, norm, Execution::default())
}

pub fn epsilon1_resnet_with(
    f: &TargetFunction,
    p: &PiecewiseModel,
    grid: &Grid,
    norm: NormKind,
    exec: Execution,
) -> Result<f64> {
    let pts = regular_points(f, grid);
    let diffs: Result<Vec<f64>> =
        par::map(exec, &pts, |&x| Ok(f.eval(x)? - eval_piecewise(p, x)?)).into_iter().collect();
    Ok(norm_of_values(&diffs?, norm, grid.domain.length()))
}

/// ε₂: `piecewise − network` over grid points outside the ramp bands.
pub fn epsilon2_resnet(p: &PiecewiseModel, net: &NetworkGraph, grid: &Grid, norm: NormKind) -> Result<f64> {
    epsilon2_resnet_with(p, net, grid, norm, Execution::default())
}

pub fn epsilon2_resnet_with(
    p: &PiecewiseModel,
    net: &NetworkGraph,
    grid: &Grid,
    norm: NormKind,
    exec: Execution,
) -> Result<f64> {
    let band = p.excluded_band();
    let pts: Vec<f64> = grid
        .abscissae()
        .into_iter()
        .filter(|&x| p.domain.contains(x) && (band == 0.0 || p.distance_to_nodes(x) > band))
        .collect();
    let diffs: Result<Vec<f64>> = par::map_init(
        exec,
        &pts,
        || net.evaluator(),
        |ev, &x| Ok(eval_piecewise(p, x)? - ev.eval_scalar(x)),
    )
    .into_iter()
    .collect();
    Ok(norm_of_values(&diffs?, norm, grid.domain.length()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{lookup, Shape};

    fn manual(mode: Mode, nodes: Vec<f64>, values: Vec<f64>) -> PiecewiseModel {
        let domain = Interval::new(nodes[0], *nodes.last().unwrap());
        PiecewiseModel { mode, m: nodes.len() - 1, domain, nodes, values }
    }

    #[test]
    fn hold_is_right_continuous() {
        let p = manual(Mode::Rectangular, vec![0.0, 5.0, 10.0], vec![1.0, -1.0, -1.0]);
        assert_eq!(eval_piecewise(&p, 5.0).unwrap(), -1.0);
        assert_eq!(eval_piecewise(&p, 4.999).unwrap(), 1.0);
        assert_eq!(eval_piecewise(&p, 0.0).unwrap(), 1.0);
        assert!(eval_piecewise(&p, 10.5).is_err());
    }

    #[test]
    fn interpolation_of_identity() {
        let f = TargetFunction::new("id", Shape::Square, 0.0, 10.0, "");
        let mut p = build_piecewise(&f, 10, Mode::Trapezoidal).unwrap();
        p.values = p.nodes.clone();
        assert!((eval_piecewise(&p, 3.5).unwrap() - 3.5).abs() < 0.2);
        for (n, v) in p.nodes.iter().zip(&p.values) {
            assert_eq!(eval_piecewise(&p, *n).unwrap(), *v);
        }
    }

    #[test]
    fn constant_target_is_reproduced() {
        for mode in [Mode::Rectangular, Mode::Trapezoidal] {
            let p = manual(mode, vec![0.0, 1.0, 2.0, 3.0], vec![7.0; 4]);
            for x in [0.0, 0.3, 1.0, 2.9, 3.0] {
                assert_eq!(eval_piecewise(&p, x).unwrap(), 7.0);
            }
        }
    }

    #[test]
    fn zero_model_lowers_to_zero() {
        let p = manual(Mode::Rectangular, vec![0.0, 1.0, 2.0], vec![0.0; 3]);
        let net = lower_to_resnet(&p).unwrap();
        assert!(net.output.is_empty());
        assert_eq!(net.forward(0.7), 0.0);
    }

    #[test]
    fn singular_node_is_nudged() {
        let f = lookup("x^(-2)").unwrap();
        let p = build_piecewise(&f, 4, Mode::Rectangular).unwrap();
        assert_eq!(p.nodes[0], 0.0);
        assert!(p.values[0] > 1e15);
    }

    #[test]
    fn rect_one_cycle_lowering_is_exact() {
        let f = lookup("rect_1_to_10").unwrap();
        let p = build_piecewise(&f, 10, Mode::Rectangular).unwrap();
        let net = lower_to_resnet(&p).unwrap();
        let g = Grid::new(f.domain, 10_001).unwrap();
        assert_eq!(epsilon2_resnet(&p, &net, &g, NormKind::Sup).unwrap(), 0.0);
        assert_eq!(epsilon1_resnet(&f, &p, &g, NormKind::Sup).unwrap(), 0.0);
    }

    #[test]
    fn rejects_zero_samples() {
        assert!(build_piecewise(&lookup("log(x)").unwrap(), 0, Mode::Rectangular).is_err());
    }
}
