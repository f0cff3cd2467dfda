//! Exit criteria. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uapprox::bench::{compute_cell, run_table, Column, RunConfig, TableResult};
use uapprox::bitnet::{bit_product_gadget, build_poly_net};
use uapprox::fourier::{
    fit_single_dataset, init_double, init_hybrid, loss_and_gradient, lower_to_network, model_eval, pack_params,
    train_gradient_with, unpack_params, Dataset, FourierModel, TrainConfig, TrainingSet, Variant,
};
use uapprox::metrics::{Grid, Interval};
use uapprox::par::Execution;
use uapprox::targets::{make_zoo, TargetFunction};
use uapprox::taylor::{build_taylor, TaylorModel};
use uapprox::trapnet::{build_piecewise, eval_piecewise, lower_to_resnet, Mode};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Curve = (&'static str, usize, Box<dyn Fn(f64) -> f64>);

fn table(id: u8, sweep: Option<Vec<usize>>) -> TableResult {
    let mut cfg = RunConfig::table(id).expect("table config");
    if let Some(s) = sweep {
        cfg.sweep = s;
    }
    run_table(&cfg).expect("table run")
}

fn cell(t: &TableResult, param: usize, id: &str) -> f64 {
    match t.lookup(param, id) {
        Some(Ok(v)) => v,
        Some(Err(e)) => panic!("cell ({param}, {id}) failed: {e}"),
        None => panic!("cell ({param}, {id}) missing"),
    }
}

fn verdict(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(failures.join("; "))
    }
}

fn table4_zeros() -> Outcome {
    let t = table(4, Some(vec![60]));
    let mut bad = Vec::new();
    for c in &t.config.columns {
        let v = cell(&t, 60, &c.id);
        if v != 0.0 {
            bad.push(format!("{} = {v:e}", c.id));
        }
    }
    verdict(bad, format!("all {} columns exactly 0 at n=60", t.config.columns.len()))
}

fn table4_scaling() -> Outcome {
    let t = table(4, Some(vec![5, 10, 15]));
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for id in ["x^2", "exp(x)", "exp(-x)"] {
        for n in [5, 10] {
            let r = cell(&t, n, id) / cell(&t, n + 5, id);
            seen.push(format!("{id} n={n}: {r:.2}"));
            if !(32.0 * 0.75..=32.0 * 1.25).contains(&r) {
                bad.push(format!("{id} ratio at n={n} is {r:.3}"));
            }
        }
    }
    let x2 = cell(&t, 5, "x^2");
    let factor = x2 / 0.030599;
    if !(1.0 / 2.5..=2.5).contains(&factor) {
        bad.push(format!("x^2 at n=5 is {x2:e}, factor {factor:.3}"));
    }
    verdict(bad, format!("{}; x^2(n=5) = {x2:.4e}", seen.join(", ")))
}

fn table1_zeros_and_decay() -> Outcome {
    let t = table(1, None);
    let mut bad = Vec::new();
    for m in [5, 10, 50, 100, 500, 1000] {
        let v = cell(&t, m, "rect_1_to_10");
        if v != 0.0 {
            bad.push(format!("rect 1-cycle M={m} = {v}"));
        }
    }
    for m in [50, 100, 500, 1000] {
        let v = cell(&t, m, "rect_1_to_10_2cycles");
        if v != 0.0 {
            bad.push(format!("rect 2-cycles M={m} = {v}"));
        }
    }
    let e100 = cell(&t, 100, "sin(2*pi*x/5)");
    let e1000 = cell(&t, 1000, "sin(2*pi*x/5)");
    let ratio = e100 / e1000;
    if (ratio - 10.0).abs() > 0.5 {
        bad.push(format!("sine decay ratio {ratio:.4}"));
    }
    if (e1000 / 0.040238 - 1.0).abs() > 0.25 {
        bad.push(format!("sine M=1000 = {e1000:.6}"));
    }
    verdict(bad, format!("ratio {ratio:.4}, M=1000 value {e1000:.6}"))
}

fn table2_magnitude() -> Outcome {
    let t = table(2, Some(vec![50]));
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for c in &t.config.columns {
        let v = cell(&t, 50, &c.id);
        worst = worst.max(v);
        if v > 1e-10 {
            bad.push(format!("{} = {v:e}", c.id));
        }
    }
    verdict(bad, format!("max epsilon2 at M=50 is {worst:e}"))
}

fn table3_spot_checks() -> Outcome {
    let t = table(3, Some(vec![5, 10, 25, 50]));
    let mut bad = Vec::new();
    let x2 = cell(&t, 5, "x^2");
    if x2 > 1e-15 {
        bad.push(format!("x^2 N=5 = {x2:e}"));
    }
    let s4 = cell(&t, 5, "sin(2*pi*x/0.5)");
    if (s4 / 2273.285 - 1.0).abs() > 0.10 {
        bad.push(format!("sin(4 pi x) N=5 = {s4}"));
    }
    let inv = cell(&t, 50, "x^(-2)");
    if inv < 1e50 {
        bad.push(format!("x^-2 N=50 = {inv:e}"));
    }
    for n in [5, 10, 25] {
        let (lo, hi) = (cell(&t, n, "sin(2*pi*x/0.5)"), cell(&t, n, "sin(2*pi*x/0.25)"));
        if hi < lo {
            bad.push(format!("frequency ordering at N={n}: {hi:e} < {lo:e}"));
        }
    }
    verdict(bad, format!("x^2 {x2:e}, sin(4 pi x) {s4:.3}, x^-2(N=50) {inv:.3e}"))
}

fn table5_bands() -> Outcome {
    let cfg = RunConfig::table(5).expect("table 5");
    let bands: [(&str, f64, bool); 4] =
        [("gaussian", 1e-6, true), ("sin(2*pi*x)", 1.1e-3, true), ("sin(4*pi*x)", 5e-3, true), ("x^(-2)", 1.0, false)];
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for (id, bound, upper) in bands {
        let col = cfg.columns.iter().find(|c| c.id == id).expect("table 5 column");
        let r = compute_cell(&cfg, col, cfg.sweep[0]).map_err(|e| format!("{id}: {e}"))?;
        let e = r.epsilon1.expect("error value");
        seen.push(format!("{id} {e:.3e}"));
        let ok = if upper { e <= bound } else { e >= bound };
        if !ok {
            bad.push(format!("{id} = {e:.3e} (bound {}{bound:e})", if upper { "<=" } else { ">=" }));
        }
    }
    verdict(bad, seen.join(", "))
}

fn gadget_identities() -> Outcome {
    let mut bad = Vec::new();
    for k in [1.0, 2.0, 10.0] {
        let g = bit_product_gadget(k).map_err(|e| e.to_string())?;
        for b1 in [0.0, 1.0] {
            for b2 in [0.0, 1.0] {
                if g.forward_vec(&[b1, b2]) != b1 * b2 {
                    bad.push(format!("k={k} AND({b1},{b2})"));
                }
            }
            for i in 0..=1000 {
                let x = i as f64 / 1000.0;
                if g.forward_vec(&[b1, x]) != b1 * x {
                    bad.push(format!("k={k} gate({b1},{x})"));
                }
            }
        }
    }
    verdict(bad, "truth tables and 1001-point real gating exact for k in {1,2,10}".into())
}

/// Horner on `x − c` truncated toward zero to `n` bits of the smallest power
/// of two covering the domain's distance from the center.
fn quantized_horner(t: &TaylorModel, domain: Interval, n: u32, x: f64) -> f64 {
    let c = t.center;
    let reach = (domain.lo - c).abs().max((domain.hi - c).abs());
    let mut scale = 1.0f64;
    while scale < reach {
        scale *= 2.0;
    }
    while scale / 2.0 >= reach && reach > 0.0 {
        scale /= 2.0;
    }
    let h = x - c;
    let levels = 2f64.powi(n as i32);
    let u = (h.abs() / scale).min(1.0 - 1.0 / levels);
    let q = h.signum() * (u * levels).floor() / levels * scale;
    t.coeffs.iter().rev().fold(0.0, |acc, &a| acc * q + a)
}

fn has_rule(f: &TargetFunction) -> bool {
    !f.is_rectangular()
}

fn equivalences() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    let zoo = make_zoo();
    let mut worst_bits = 0.0f64;
    for f in zoo.iter().filter(|f| has_rule(f)) {
        let grid = Grid::new(f.domain, 1001).unwrap().abscissae();
        for degree in [2, 5, 10] {
            let t = build_taylor(f, f.taylor_center, degree).map_err(|e| e.to_string())?;
            for n in [5, 10, 20] {
                let pn = build_poly_net(&t, n, f.domain).map_err(|e| format!("{} N={degree} n={n}: {e}", f.id))?;
                for &x in &grid {
                    if f.is_singular_at(x) {
                        continue;
                    }
                    let gap = (pn.forward(x) - quantized_horner(&t, f.domain, n, x)).abs();
                    worst_bits = worst_bits.max(gap);
                    checked += 1;
                    if gap > 1e-9 {
                        bad.push(format!("bitnet {} N={degree} n={n} x={x}: {gap:e}", f.id));
                        break;
                    }
                }
            }
        }
    }
    let mut worst_res = 0.0f64;
    for f in &zoo {
        for m in [5, 10, 50] {
            for mode in [Mode::Rectangular, Mode::Trapezoidal] {
                let p = build_piecewise(f, m, mode).map_err(|e| e.to_string())?;
                let net = lower_to_resnet(&p).map_err(|e| e.to_string())?;
                let band = if mode == Mode::Rectangular { p.ramp_width() } else { 0.0 };
                for x in Grid::new(f.domain, 1001).unwrap().abscissae() {
                    if band > 0.0 && p.nodes.iter().any(|n| (x - n).abs() <= band) {
                        continue;
                    }
                    let gap = (net.forward(x) - eval_piecewise(&p, x).unwrap()).abs();
                    worst_res = worst_res.max(gap);
                    if gap > 1e-9 {
                        bad.push(format!("resnet {} M={m} {mode:?} x={x}: {gap:e}", f.id));
                        break;
                    }
                }
            }
        }
    }
    let mut worst_fnn = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = Dataset::from_fn(Interval::new(-1.0, 1.0), 300, |x| x.cos()).unwrap();
    for trial in 0..10 {
        let mut models: Vec<FourierModel> = vec![
            fit_single_dataset(&data, 4).unwrap().0,
            init_double(&data, 3, trial).unwrap(),
            init_hybrid(&data, 4, 3, trial).unwrap(),
        ];
        for m in &mut models {
            let p: Vec<f64> = pack_params(m).iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
            unpack_params(m, &p);
            let net = lower_to_network(m).unwrap();
            for x in Grid::new(data.domain, 1001).unwrap().abscissae() {
                let gap = (net.forward(x) - model_eval(m, x)).abs();
                worst_fnn = worst_fnn.max(gap);
                if gap > 1e-10 {
                    bad.push(format!("fnn {:?} trial {trial} x={x}: {gap:e}", m.variant));
                    break;
                }
            }
        }
    }
    verdict(
        bad,
        format!("bitnet max gap {worst_bits:e} over {checked} points, resnet {worst_res:e}, fnn {worst_fnn:e}"),
    )
}

fn gradient_check() -> Outcome {
    let data = Dataset::from_fn(Interval::new(-1.0, 1.0), 256, |x| (-x * x).exp() + 0.3 * (5.0 * x).sin()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for variant in [Variant::Double, Variant::Hybrid] {
        for point in 0..20 {
            let mut m = match variant {
                Variant::Double => init_double(&data, 3, point).unwrap(),
                _ => init_hybrid(&data, 3, 3, point).unwrap(),
            };
            let p: Vec<f64> = pack_params(&m).iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
            unpack_params(&mut m, &p);
            let set = TrainingSet::new(&data, &m);
            let (_, g) = loss_and_gradient(&m, &set, Execution::Sequential);
            let loss_at = |q: &[f64]| {
                let mut probe = m.clone();
                unpack_params(&mut probe, q);
                data.xs.iter().zip(&data.ys).map(|(&x, &y)| (model_eval(&probe, x) - y).powi(2)).sum::<f64>()
                    / data.len() as f64
            };
            let h = 1e-6;
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i] = p[i] + h;
                let up = loss_at(&q);
                q[i] = p[i] - h;
                let down = loss_at(&q);
                let fd = (up - down) / (2.0 * h);
                num += (fd - g[i]).powi(2);
                den += fd.powi(2);
            }
            let rel = (num / den).sqrt();
            worst = worst.max(rel);
            if rel > 1e-5 {
                bad.push(format!("{variant:?} point {point}: {rel:e}"));
            }
        }
    }
    verdict(bad, format!("max relative gradient error {worst:e} over 40 points"))
}

fn exact_recovery() -> Outcome {
    let mut bad = Vec::new();
    let dom = Interval::new(-1.0, 1.0);
    let pi = std::f64::consts::PI;
    let in_span: [Curve; 3] = [
        ("sin(2 pi x)", 2, Box::new(move |x: f64| (2.0 * pi * x).sin())),
        ("sin(4 pi x)", 4, Box::new(move |x: f64| (4.0 * pi * x).sin())),
        ("mixed", 5, Box::new(move |x: f64| 0.3 + 2.0 * (3.0 * pi * x).cos() - (pi * x + 0.4).sin() + 0.1 * (5.0 * pi * x).sin())),
    ];
    let mut worst = 0.0f64;
    for (name, k_min, g) in &in_span {
        let data = Dataset::from_fn(dom, 2000, g).unwrap();
        for k in *k_min..*k_min + 4 {
            let (_, r) = fit_single_dataset(&data, k).unwrap();
            worst = worst.max(r.final_loss);
            if r.final_loss > 1e-8 {
                bad.push(format!("{name} K={k}: {:e}", r.final_loss));
            }
        }
    }
    let mut prev = f64::INFINITY;
    let gauss = Dataset::from_fn(dom, 2000, |x| (-x * x).exp()).unwrap();
    for k in 1..=15 {
        let (_, r) = fit_single_dataset(&gauss, k).unwrap();
        if r.final_loss > prev {
            bad.push(format!("gaussian residual rose at K={k}: {prev:e} -> {:e}", r.final_loss));
        }
        prev = r.final_loss;
    }
    verdict(bad, format!("in-span max residual {worst:e}; gaussian residual non-increasing over K=1..15"))
}

fn hybrid_vs_single() -> Outcome {
    let mut bad = Vec::new();
    let mut improved = 0;
    let zoo = make_zoo();
    for f in &zoo {
        let data = Dataset::from_target(f, 2000).map_err(|e| e.to_string())?;
        let (_, single) = fit_single_dataset(&data, 10).map_err(|e| e.to_string())?;
        let m0 = init_hybrid(&data, 10, 5, 1).map_err(|e| e.to_string())?;
        let cfg = TrainConfig { iterations: 300, ..TrainConfig::default() };
        let (_, hybrid) = train_gradient_with(&m0, &data, cfg, Execution::default()).map_err(|e| e.to_string())?;
        if hybrid.final_loss > single.final_loss + 1e-12 {
            bad.push(format!("{}: hybrid {:e} > single {:e}", f.id, hybrid.final_loss, single.final_loss));
        }
        if hybrid.final_loss < single.final_loss {
            improved += 1;
        }
    }
    verdict(bad, format!("{} targets, hybrid strictly better on {improved}", zoo.len()))
}

fn determinism() -> Outcome {
    let mut bad = Vec::new();
    for id in 1..=5u8 {
        let mut cfg = RunConfig::table(id).unwrap();
        if id == 5 {
            cfg.iterations = 40;
            cfg.samples = 2000;
            cfg.grid_points = 2000;
        }
        let a = run_table(&cfg).unwrap().to_csv().unwrap();
        let b = run_table(&cfg).unwrap().to_csv().unwrap();
        let c = if id == 4 {
            b.clone()
        } else {
            cfg.exec = Execution::Sequential;
            run_table(&cfg).unwrap().to_csv().unwrap()
        };
        if a != b || a != c {
            bad.push(format!("table {id} differs between runs"));
        }
    }
    let single = RunConfig { columns: vec![Column::new("log(x)")], ..RunConfig::table(2).unwrap() };
    let a = run_table(&single).unwrap().to_csv().unwrap();
    if a != run_table(&single).unwrap().to_csv().unwrap() {
        bad.push("single-column table differs".into());
    }
    verdict(bad, "tables 1-5 byte-identical across reruns (and across execution modes except table 4)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("table 4 zeros at 60 bits", table4_zeros),
        ("table 4 scaling", table4_scaling),
        ("table 1 zeros and decay", table1_zeros_and_decay),
        ("table 2 magnitude", table2_magnitude),
        ("table 3 spot checks", table3_spot_checks),
        ("table 5 bands", table5_bands),
        ("bit gadget identities", gadget_identities),
        ("network/oracle equivalence", equivalences),
        ("gradient check", gradient_check),
        ("exact Fourier recovery", exact_recovery),
        ("hybrid vs single", hybrid_vs_single),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
