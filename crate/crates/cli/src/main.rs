use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uapprox::bench::{
    build_approximant, emit_plot, run_selftest, run_table, Column, Format, PlotOptions, RunConfig, DEFAULT_SEED,
    SEED_ENV,
};
use uapprox::metrics::{Construction, Grid, Interval, NormKind};
use uapprox::par::Execution;
use uapprox::targets::lookup;

#[derive(Parser)]
#[command(name = "uapprox", version, about = "Constructive network approximation tables, sweeps and plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Norm applied to the error samples: sup, rms, l2 or l1.
    #[arg(long)]
    norm: Option<NormKind>,
    /// Output directory; tables go to stdout only when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats (csv, md, json), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Fourier training iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the five result tables.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        id: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one construction over a parameter list for one function.
    Sweep {
        #[arg(long)]
        construction: Construction,
        #[arg(long)]
        function: String,
        /// M for resnet, bit count n for ffn, harmonics K for fnn.
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<usize>,
        /// Evaluate on another interval, as `lo,hi`.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        domain: Option<Vec<f64>>,
        /// Taylor degree for ffn.
        #[arg(long, default_value_t = 10)]
        degree: usize,
        /// Double units J for fnn.
        #[arg(long, default_value_t = 5)]
        outer: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Plot a target with one approximant as SVG.
    Plot {
        #[arg(long)]
        function: String,
        #[arg(long)]
        construction: Construction,
        /// M for resnet, Taylor degree N for ffn, harmonics K for fnn.
        #[arg(long)]
        param: usize,
        /// Plot the bit-extraction network with this many bits instead of the polynomial.
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        iterations: usize,
    },
    /// Run the built-in property checks.
    Selftest {
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn apply(cfg: &mut RunConfig, common: &Common) {
    if let Some(norm) = common.norm {
        cfg.norm = norm;
    }
    cfg.seed = common.seed;
    if let Some(it) = common.iterations {
        cfg.iterations = it;
    }
    if common.sequential {
        cfg.exec = Execution::Sequential;
    }
}

fn run_config(cfg: RunConfig, common: &Common) -> uapprox::Result<ExitCode> {
    let table = run_table(&cfg)?;
    print!("{}", table.to_markdown());
    if let Some(dir) = &common.out {
        for path in table.write(dir, &common.format)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(if table.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> uapprox::Result<ExitCode> {
    match cli.command {
        Command::Table { id, common } => {
            let mut cfg = RunConfig::table(id)?;
            apply(&mut cfg, &common);
            run_config(cfg, &common)
        }
        Command::Sweep { construction, function, params, domain, degree, outer, common } => {
            let mut cfg = RunConfig::sweep(construction, &function, params)?;
            if let Some(d) = domain {
                cfg.columns = vec![Column { id: function, domain: Some(Interval::new(d[0], d[1])) }];
            }
            cfg.degree = degree;
            cfg.outer = outer;
            apply(&mut cfg, &common);
            run_config(cfg, &common)
        }
        Command::Plot { function, construction, param, bits, points, out, seed, iterations } => {
            let f = lookup(&function)?;
            let opts = PlotOptions { bits, seed, iterations, ..PlotOptions::default() };
            let (label, g) = build_approximant(&f, construction, param, opts)?;
            let grid = Grid::new(f.domain, points)?;
            std::fs::write(&out, emit_plot(&f, &[(label.as_str(), &*g)], &grid))?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
