use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Construction, Grid, Interval, NormKind};
use crate::par::Execution;
use crate::targets::{lookup, TargetFunction};
use crate::trapnet::Mode;

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "UAPPROX_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// `UAPPROX_SEED` if set and numeric, else [`DEFAULT_SEED`].
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Which error a table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Epsilon1,
    Epsilon2,
}

/// A table column: a zoo function, optionally moved to another domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub id: String,
    pub domain: Option<Interval>,
}

impl Column {
    pub fn new(id: &str) -> Self {
        Self { id: id.to_owned(), domain: None }
    }

    pub fn on(id: &str, lo: f64, hi: f64) -> Self {
        Self { id: id.to_owned(), domain: Some(Interval::new(lo, hi)) }
    }

    pub fn target(&self) -> Result<TargetFunction> {
        let f = lookup(&self.id)?;
        Ok(match self.domain {
            Some(d) => f.on_domain(d),
            None => f,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Md,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Md => "md",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

/// Everything a table or sweep run depends on.
///
/// The sweep parameter means `M` for resnet, the Taylor degree `N` for ffn
/// ε₁, the bit count `n` for ffn ε₂, and the harmonic count `K` for fnn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub table: Option<u8>,
    pub construction: Construction,
    pub quantity: Quantity,
    /// Header of the parameter column.
    pub row_header: String,
    pub columns: Vec<Column>,
    pub sweep: Vec<usize>,
    pub norm: NormKind,
    pub grid_points: usize,
    pub grid_offset: bool,
    pub seed: u64,
    /// Taylor degree for ffn ε₂ sweeps.
    pub degree: usize,
    /// Double units `J` for fnn.
    pub outer: usize,
    /// Fourier sample count.
    pub samples: usize,
    /// Fourier training iterations.
    pub iterations: usize,
    pub mode: Mode,
    pub exec: Execution,
}

fn columns(ids: &[&str]) -> Vec<Column> {
    ids.iter().map(|id| Column::new(id)).collect()
}

const RESNET_IDS: [&str; 5] = ["sin(2*pi*x/5)", "sin(2*pi*x/2.5)", "rect_1_to_10", "rect_1_to_10_2cycles", "log(x)"];

impl RunConfig {
    fn base(name: &str, construction: Construction, quantity: Quantity, row_header: &str) -> Self {
        Self {
            name: name.to_owned(),
            table: None,
            construction,
            quantity,
            row_header: row_header.to_owned(),
            columns: Vec::new(),
            sweep: Vec::new(),
            norm: NormKind::Sup,
            grid_points: Grid::DEFAULT_POINTS,
            grid_offset: false,
            seed: default_seed(),
            degree: 10,
            outer: 5,
            samples: Grid::FOURIER_SAMPLES,
            iterations: 5000,
            mode: Mode::Rectangular,
            exec: Execution::default(),
        }
    }

    /// The fixed layout of table `id` (1–5).
    pub fn table(id: u8) -> Result<Self> {
        let mut c = match id {
            1 => {
                let mut c = Self::base("table1", Construction::Resnet, Quantity::Epsilon1, "M");
                c.columns = columns(&RESNET_IDS);
                c.sweep = vec![5, 10, 50, 100, 500, 1000];
                c.norm = NormKind::L1;
                c.grid_points = Grid::DEFAULT_POINTS - 1;
                c.grid_offset = true;
                c
            }
            2 => {
                let mut c = Self::base("table2", Construction::Resnet, Quantity::Epsilon2, "M");
                c.columns = columns(&RESNET_IDS);
                c.sweep = vec![5, 10, 50];
                c
            }
            3 => {
                let mut c = Self::base("table3", Construction::Ffn, Quantity::Epsilon1, "N");
                c.columns = columns(&[
                    "gaussian",
                    "x^2",
                    "x^(-2)",
                    "sinc2",
                    "sin(2*pi*x/0.5)",
                    "sin(2*pi*x/0.25)",
                    "exp(x)",
                    "exp(-x)",
                    "sinc2_new",
                ]);
                c.sweep = vec![5, 10, 25, 50, 75];
                c
            }
            4 => {
                let mut c = Self::base("table4", Construction::Ffn, Quantity::Epsilon2, "n");
                c.columns = columns(&[
                    "gaussian",
                    "x^2",
                    "x^(-2)",
                    "sinc2",
                    "sin(2*pi*x/0.5)",
                    "sin(2*pi*x/0.25)",
                    "log(x)(from 0.1)",
                    "exp(x)",
                    "exp(-x)",
                ]);
                c.sweep = vec![5, 10, 25, 50, 60];
                c
            }
            5 => {
                let mut c = Self::base("table5", Construction::Fnn, Quantity::Epsilon1, "Function");
                let mut cols: Vec<Column> = ["gaussian", "x^2", "x^(-2)", "sinc2"]
                    .iter()
                    .map(|id| Column::on(id, -1.0, 1.0))
                    .collect();
                cols.extend(columns(&["sin(2*pi*x)", "sin(4*pi*x)"]));
                cols.extend(["exp(x)", "exp(-x)"].iter().map(|id| Column::on(id, -1.0, 1.0)));
                cols.push(Column::on("log(x)", 0.1, 1.0));
                c.columns = cols;
                c.sweep = vec![10];
                c.norm = NormKind::L2Rms;
                c.grid_points = Grid::FOURIER_SAMPLES;
                c.grid_offset = true;
                c
            }
            other => return Err(Error::InvalidConfig(format!("table id must be 1..=5, got {other}"))),
        };
        c.table = Some(id);
        Ok(c)
    }

    /// A one-column sweep of `construction` over `params`.
    pub fn sweep(construction: Construction, function: &str, params: Vec<usize>) -> Result<Self> {
        let (quantity, header) = match construction {
            Construction::Resnet => (Quantity::Epsilon1, "M"),
            Construction::Ffn => (Quantity::Epsilon2, "n"),
            Construction::Fnn => (Quantity::Epsilon1, "K"),
        };
        let mut c = Self::base("sweep", construction, quantity, header);
        c.columns = vec![Column::new(function)];
        c.sweep = params;
        if construction == Construction::Fnn {
            c.norm = NormKind::L2Rms;
            c.grid_offset = true;
            c.grid_points = Grid::FOURIER_SAMPLES;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::InvalidConfig("function list is empty".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("parameter sweep is empty".into()));
        }
        for c in &self.columns {
            c.target()?;
        }
        if self.construction == Construction::Ffn && self.quantity == Quantity::Epsilon2 {
            if let Some(&n) = self.sweep.iter().find(|&&n| n == 0 || n > 64) {
                return Err(Error::InvalidConfig(format!("bit count {n} outside 1..=64")));
            }
        }
        if self.construction != Construction::Ffn && self.sweep.contains(&0) {
            return Err(Error::InvalidConfig("sweep parameters must be >= 1".into()));
        }
        Grid::new(Interval::new(0.0, 1.0), self.grid_points)?;
        Ok(())
    }

    pub fn grid(&self, domain: Interval) -> Result<Grid> {
        if self.grid_offset {
            Grid::with_offset(domain, self.grid_points)
        } else {
            Grid::new(domain, self.grid_points)
        }
    }

    /// Label of the row for sweep value `param`.
    pub fn row_name(&self, param: usize) -> String {
        if self.table == Some(5) {
            "Error".to_owned()
        } else {
            param.to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        let shape = |id| {
            let c = RunConfig::table(id).unwrap();
            (c.sweep.len(), c.columns.len())
        };
        assert_eq!([shape(1), shape(2), shape(3), shape(4), shape(5)], [(6, 5), (3, 5), (5, 9), (5, 9), (1, 9)]);
        assert!(RunConfig::table(6).is_err());
        for id in 1..=5 {
            RunConfig::table(id).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::table(2).unwrap();
        c.columns.clear();
        assert!(c.validate().is_err());
        assert!(RunConfig::sweep(Construction::Ffn, "x^2", vec![]).is_err());
        assert!(RunConfig::sweep(Construction::Ffn, "x^2", vec![65]).is_err());
        assert!(RunConfig::sweep(Construction::Resnet, "nope", vec![5]).is_err());
        assert!(RunConfig::sweep(Construction::Resnet, "log(x)", vec![5, 10]).is_ok());
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Md);
        assert!("xml".parse::<Format>().is_err());
    }
}
