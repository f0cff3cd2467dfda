//! Static SVG plots of a target and its approximants.

use std::fmt::Write as _;

use crate::bitnet::build_poly_net;
use crate::error::Result;
use crate::fourier::{init_hybrid, model_eval, train_gradient_with, Dataset, TrainConfig};
use crate::metrics::{Construction, Grid};
use crate::par::Execution;
use crate::targets::TargetFunction;
use crate::taylor::build_taylor;
use crate::trapnet::{build_piecewise, lower_to_resnet, Mode};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub type Approximant = Box<dyn Fn(f64) -> f64 + Send + Sync>;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// One polyline per curve (target first), with axes and a legend. Target
/// samples that fail to evaluate are skipped; approximant values are clipped
/// to a band around the target's range.
pub fn emit_plot(f: &TargetFunction, approximants: &[(&str, &dyn Fn(f64) -> f64)], grid: &Grid) -> String {
    let xs = grid.abscissae();
    let target: Vec<(f64, f64)> =
        xs.iter().filter_map(|&x| f.eval(x).ok().filter(|y| y.is_finite()).map(|y| (x, y))).collect();
    let (mut ylo, mut yhi) = target.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    if !ylo.is_finite() || !yhi.is_finite() {
        (ylo, yhi) = (-1.0, 1.0);
    }
    if yhi - ylo < 1e-12 {
        ylo -= 1.0;
        yhi += 1.0;
    }
    let pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
    let (xlo, xhi) = (grid.domain.lo, grid.domain.hi);
    let sx = |x: f64| MARGIN + (x - xlo) / (xhi - xlo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y.clamp(ylo, yhi) - ylo) / (yhi - ylo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(&f.id)
    );
    // axes
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = xlo + t * (xhi - xlo);
        let yv = ylo + t * (yhi - ylo);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{py:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 6.0,
            tick(yv)
        );
    }

    let mut curves: Vec<(String, Vec<(f64, f64)>)> = vec![(f.id.clone(), target)];
    for (label, g) in approximants {
        let pts = xs.iter().map(|&x| (x, g(x))).filter(|(_, y)| y.is_finite()).collect();
        curves.push(((*label).to_owned(), pts));
    }
    for (i, (label, pts)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::with_capacity(pts.len() * 16);
        for (k, &(x, y)) in pts.iter().enumerate() {
            if k > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let ly = MARGIN + 8.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/>"#,
            x1 - 170.0,
            x1 - 150.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            x1 - 144.0,
            ly + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Settings for [`build_approximant`].
#[derive(Debug, Clone, Copy)]
pub struct PlotOptions {
    /// Bit count of the ffn network; `None` plots the Taylor polynomial.
    pub bits: Option<u32>,
    pub outer: usize,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { bits: None, outer: 5, samples: Grid::FOURIER_SAMPLES, iterations: 5000, seed: super::default_seed() }
    }
}

/// The approximant of `f` built by `construction` with parameter `param`
/// (`M`, Taylor degree `N`, or harmonics `K`), plus its legend label.
pub fn build_approximant(
    f: &TargetFunction,
    construction: Construction,
    param: usize,
    opts: PlotOptions,
) -> Result<(String, Approximant)> {
    Ok(match construction {
        Construction::Resnet => {
            let p = build_piecewise(f, param, Mode::Rectangular)?;
            let net = lower_to_resnet(&p)?;
            (format!("resnet M={param}"), Box::new(move |x| net.forward(x)))
        }
        Construction::Ffn => {
            let t = build_taylor(f, f.taylor_center, param)?;
            match opts.bits {
                Some(n) => {
                    let pn = build_poly_net(&t, n, f.domain)?;
                    (format!("ffn N={param} n={n}"), Box::new(move |x| pn.forward(x)))
                }
                None => (format!("taylor N={param}"), Box::new(move |x| t.eval(x))),
            }
        }
        Construction::Fnn => {
            let data = Dataset::from_target(f, opts.samples)?;
            let m0 = init_hybrid(&data, param, opts.outer, opts.seed)?;
            let cfg = TrainConfig { iterations: opts.iterations, ..TrainConfig::default() };
            let (m, _) = train_gradient_with(&m0, &data, cfg, Execution::default())?;
            (format!("hybrid K={param} J={}", opts.outer), Box::new(move |x| model_eval(&m, x)))
        }
    })
}
