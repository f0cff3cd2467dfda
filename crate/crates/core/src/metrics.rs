//! Grids, norms and the error report shared by all constructions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

/// Uniform sample abscissae over an interval.
///
/// Without offset the grid includes both endpoints. With `offset` the points
/// sit at cell midpoints, `lo + (i + ½)·(hi − lo)/points`, which keeps a
/// symmetric grid off the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Interval,
    pub points: usize,
    pub offset: bool,
}

impl Grid {
    /// Point count used for ε₁/ε₂ grids.
    pub const DEFAULT_POINTS: usize = 10_001;
    /// Sample count of the Fourier table.
    pub const FOURIER_SAMPLES: usize = 10_000;

    pub fn new(domain: Interval, points: usize) -> Result<Self> {
        Self::build(domain, points, false)
    }

    pub fn with_offset(domain: Interval, points: usize) -> Result<Self> {
        Self::build(domain, points, true)
    }

    fn build(domain: Interval, points: usize, offset: bool) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!("grid needs >= 2 points, got {points}")));
        }
        if !(domain.lo.is_finite() && domain.hi.is_finite() && domain.lo < domain.hi) {
            return Err(Error::InvalidParameter(format!(
                "grid domain [{}, {}] is empty or unbounded",
                domain.lo, domain.hi
            )));
        }
        Ok(Self { domain, points, offset })
    }

    pub fn abscissae(&self) -> Vec<f64> {
        let Interval { lo, hi } = self.domain;
        let n = self.points;
        if self.offset {
            let step = (hi - lo) / n as f64;
            (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect()
        } else {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    /// `max |d|`
    #[serde(rename = "sup")]
    Sup,
    /// `sqrt(mean d²)`
    #[serde(rename = "rms")]
    L2Rms,
    /// `sqrt(Σ d²)`
    #[serde(rename = "l2")]
    L2Unnormalized,
    /// `length · mean |d|`; on an offset grid this is the midpoint rule for `∫ |d|`.
    #[serde(rename = "l1")]
    L1,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::Sup => "sup",
            NormKind::L2Rms => "rms",
            NormKind::L2Unnormalized => "l2",
            NormKind::L1 => "l1",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(NormKind::Sup),
            "rms" => Ok(NormKind::L2Rms),
            "l2" => Ok(NormKind::L2Unnormalized),
            "l1" => Ok(NormKind::L1),
            other => Err(Error::InvalidParameter(format!("unknown norm {other:?}"))),
        }
    }
}

/// Norm of a vector of pointwise differences. `length` only matters for
/// [`NormKind::L1`].
pub fn norm_of_values(diffs: &[f64], norm: NormKind, length: f64) -> f64 {
    if diffs.is_empty() {
        return 0.0;
    }
    let n = diffs.len() as f64;
    match norm {
        NormKind::Sup => diffs.iter().fold(0.0, |m, d| {
            let a = d.abs();
            if a > m || a.is_nan() { a } else { m }
        }),
        NormKind::L2Rms => (diffs.iter().map(|d| d * d).sum::<f64>() / n).sqrt(),
        NormKind::L2Unnormalized => diffs.iter().map(|d| d * d).sum::<f64>().sqrt(),
        NormKind::L1 => length * diffs.iter().map(|d| d.abs()).sum::<f64>() / n,
    }
}

/// Norm of `g − h` over the given abscissae. The first failing abscissa (in
/// order) determines the returned error.
pub fn norm_over<G, H>(
    points: &[f64],
    length: f64,
    g: G,
    h: H,
    norm: NormKind,
    exec: Execution,
) -> Result<f64>
where
    G: Fn(f64) -> Result<f64> + Sync + Send,
    H: Fn(f64) -> Result<f64> + Sync + Send,
{
    let diffs = par::map(exec, points, |&x| Ok(g(x)? - h(x)?));
    let diffs = diffs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(norm_of_values(&diffs, norm, length))
}

/// Norm of `g − h` over every grid abscissa.
pub fn norm_of_diff<G, H>(g: G, h: H, grid: &Grid, norm: NormKind) -> Result<f64>
where
    G: Fn(f64) -> Result<f64> + Sync + Send,
    H: Fn(f64) -> Result<f64> + Sync + Send,
{
    norm_over(&grid.abscissae(), grid.domain.length(), g, h, norm, Execution::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Taylor polynomial on bit-extracted input.
    Ffn,
    /// Sampled piecewise approximant lowered to ReLU stages.
    Resnet,
    /// Fourier network.
    Fnn,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Ffn => "ffn",
            Construction::Resnet => "resnet",
            Construction::Fnn => "fnn",
        }
    }
}

impl FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ffn" => Ok(Construction::Ffn),
            "resnet" => Ok(Construction::Resnet),
            "fnn" => Ok(Construction::Fnn),
            other => Err(Error::InvalidParameter(format!("unknown construction {other:?}"))),
        }
    }
}

/// Parameters of one construction run. Unused ones stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// Taylor degree `N`.
    pub degree: Option<usize>,
    /// Bit count `n`.
    pub bits: Option<u32>,
    /// Sample count `M`.
    pub samples: Option<usize>,
    /// Harmonics `K`.
    pub harmonics: Option<usize>,
    /// Outer double units `J`.
    pub outer: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub function: String,
    pub construction: Construction,
    pub params: RunParams,
    pub epsilon1: Option<f64>,
    pub epsilon2: Option<f64>,
    pub norm: NormKind,
    pub grid: Grid,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Serialize)]
struct ReportRow<'a> {
    function: &'a str,
    construction: &'a str,
    degree: Option<usize>,
    bits: Option<u32>,
    samples: Option<usize>,
    harmonics: Option<usize>,
    outer: Option<usize>,
    seed: Option<u64>,
    norm: &'a str,
    grid_lo: f64,
    grid_hi: f64,
    grid_points: usize,
    grid_offset: bool,
    epsilon1: Option<f64>,
    epsilon2: Option<f64>,
}

impl ErrorReport {
    pub fn new(
        function: impl Into<String>,
        construction: Construction,
        params: RunParams,
        epsilon1: Option<f64>,
        epsilon2: Option<f64>,
        norm: NormKind,
        grid: Grid,
    ) -> Result<Self> {
        if epsilon1.is_none() && epsilon2.is_none() {
            return Err(Error::InvalidParameter("report needs at least one epsilon".into()));
        }
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            function: function.into(),
            construction,
            params,
            epsilon1,
            epsilon2,
            norm,
            grid,
            timestamp,
        })
    }

    fn row(&self) -> ReportRow<'_> {
        ReportRow {
            function: &self.function,
            construction: self.construction.as_str(),
            degree: self.params.degree,
            bits: self.params.bits,
            samples: self.params.samples,
            harmonics: self.params.harmonics,
            outer: self.params.outer,
            seed: self.params.seed,
            norm: self.norm.as_str(),
            grid_lo: self.grid.domain.lo,
            grid_hi: self.grid.domain.hi,
            grid_points: self.grid.points,
            grid_offset: self.grid.offset,
            epsilon1: self.epsilon1,
            epsilon2: self.epsilon2,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Writes reports as CSV with a header row and a fixed column order. The
/// timestamp is left out so reruns produce identical bytes.
pub fn write_reports_csv<W: std::io::Write>(reports: &[ErrorReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.row())?;
    }
    if reports.is_empty() {
        w.write_record([
            "function", "construction", "degree", "bits", "samples", "harmonics", "outer", "seed",
            "norm", "grid_lo", "grid_hi", "grid_points", "grid_offset", "epsilon1", "epsilon2",
        ])?;
    }
    w.flush()?;
    Ok(())
}
