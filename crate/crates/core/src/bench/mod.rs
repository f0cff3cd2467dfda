//! Table and sweep runs, their CSV/Markdown/JSON rendering, plots and the
//! built-in self test.

mod config;
mod plot;
mod selftest;
mod table;

pub use config::{default_seed, Column, Format, Quantity, RunConfig, DEFAULT_SEED, SEED_ENV};
pub use plot::{build_approximant, emit_plot, Approximant, PlotOptions};
pub use selftest::{run_selftest, Check};
pub use table::{format_value, TableResult};

use crate::bitnet::epsilon2_ffn_with;
use crate::error::Result;
use crate::fourier::{init_hybrid, lower_to_network, model_eval, train_gradient_with, Dataset, TrainConfig};
use crate::metrics::{norm_of_values, Construction, ErrorReport, NormKind, RunParams};
use crate::par;
use crate::taylor::{build_taylor, epsilon1_taylor_with};
use crate::trapnet::{build_piecewise, epsilon1_resnet_with, epsilon2_resnet_with, lower_to_resnet};

/// Computes the report for one (sweep value, column) cell.
pub fn compute_cell(cfg: &RunConfig, column: &Column, param: usize) -> Result<ErrorReport> {
    let f = column.target()?;
    let exec = cfg.exec;
    let grid = cfg.grid(f.domain)?;
    let report = |params, e1, e2| {
        ErrorReport::new(column.id.clone(), cfg.construction, params, e1, e2, cfg.norm, grid)
    };
    match cfg.construction {
        Construction::Resnet => {
            let p = build_piecewise(&f, param, cfg.mode)?;
            let e1 = epsilon1_resnet_with(&f, &p, &grid, cfg.norm, exec)?;
            let net = lower_to_resnet(&p)?;
            let e2 = epsilon2_resnet_with(&p, &net, &grid, cfg.norm, exec)?;
            report(RunParams { samples: Some(param), ..Default::default() }, Some(e1), Some(e2))
        }
        Construction::Ffn => {
            let degree = match cfg.quantity {
                Quantity::Epsilon1 => param,
                Quantity::Epsilon2 => cfg.degree,
            };
            let t = build_taylor(&f, f.taylor_center, degree)?;
            let e1 = epsilon1_taylor_with(&f, &t, &grid, cfg.norm, exec)?;
            let (bits, e2) = match cfg.quantity {
                Quantity::Epsilon1 => (None, None),
                Quantity::Epsilon2 => {
                    let n = param as u32;
                    (Some(n), Some(epsilon2_ffn_with(&f, &t, n, &grid, cfg.norm, exec)?))
                }
            };
            report(RunParams { degree: Some(degree), bits, ..Default::default() }, Some(e1), e2)
        }
        Construction::Fnn => {
            let data = Dataset::from_target(&f, cfg.samples)?;
            let m0 = init_hybrid(&data, param, cfg.outer, cfg.seed)?;
            let train = TrainConfig { iterations: cfg.iterations, ..TrainConfig::default() };
            let (m, _) = train_gradient_with(&m0, &data, train, exec)?;
            let e1 = data.residual_norm(&m, cfg.norm);
            let net = lower_to_network(&m)?;
            let gaps = par::map_init(exec, &data.xs, || net.evaluator(), |ev, &x| ev.eval_scalar(x) - model_eval(&m, x));
            let e2 = norm_of_values(&gaps, NormKind::Sup, data.domain.length());
            let params = RunParams {
                samples: Some(cfg.samples),
                harmonics: Some(param),
                outer: Some(cfg.outer),
                seed: Some(cfg.seed),
                ..Default::default()
            };
            report(params, Some(e1), Some(e2))
        }
    }
}

/// Runs every cell of `cfg`. Cell failures are kept as messages; only an
/// invalid configuration fails the whole run.
pub fn run_table(cfg: &RunConfig) -> Result<TableResult> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> =
        (0..cfg.sweep.len()).flat_map(|r| (0..cfg.columns.len()).map(move |c| (r, c))).collect();
    let results = par::map(cfg.exec, &cells, |&(r, c)| {
        compute_cell(cfg, &cfg.columns[c], cfg.sweep[r]).map_err(|e| e.to_string())
    });
    let mut rows: Vec<Vec<std::result::Result<ErrorReport, String>>> = Vec::with_capacity(cfg.sweep.len());
    let mut it = results.into_iter();
    for _ in 0..cfg.sweep.len() {
        rows.push(it.by_ref().take(cfg.columns.len()).collect());
    }
    Ok(TableResult { config: cfg.clone(), cells: rows })
}
