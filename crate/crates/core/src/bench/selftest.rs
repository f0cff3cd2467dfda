//! Quick property checks behind `uapprox selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_table, RunConfig};
use crate::bitnet::{bit_product_gadget, build_poly_net, BitExtractor};
use crate::fourier::{
    fit_single, init_hybrid, loss_and_gradient, lower_to_network, model_eval, pack_params, unpack_params, Dataset,
    TrainingSet,
};
use crate::metrics::{Grid, Interval};
use crate::par::Execution;
use crate::targets::lookup;
use crate::taylor::TaylorModel;
use crate::trapnet::{build_piecewise, eval_piecewise, lower_to_resnet, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> crate::Result<(bool, String)>) -> Check {
    match run() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn gadget() -> crate::Result<(bool, String)> {
    let mut ok = true;
    for k in [1.0, 2.0, 10.0] {
        let g = bit_product_gadget(k)?;
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            ok &= g.forward_vec(&[a, b]) == a * b;
        }
    }
    let g = bit_product_gadget(1.0)?;
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        ok &= g.forward_vec(&[1.0, x]) == x && g.forward_vec(&[0.0, x]) == 0.0;
    }
    Ok((ok, "k in {1,2,10}, 1001 gated reals".into()))
}

fn truncation(seed: u64) -> crate::Result<(bool, String)> {
    let n = 20;
    let ex = BitExtractor::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 2f64.powi(-(n as i32));
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(0.0..1.0);
        let d = x - ex.extract(x)?.value;
        ok &= (0.0..step).contains(&d);
        worst = worst.max(d);
    }
    Ok((ok, format!("max gap {worst:.3e} < 2^-{n}")))
}

fn poly_net() -> crate::Result<(bool, String)> {
    let t = TaylorModel { center: 0.0, coeffs: vec![0.0, 0.0, 1.0], source_id: "x^2".into() };
    let pn = build_poly_net(&t, 5, Interval::new(0.0, 1.0))?;
    let worst = (0..=1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            let q = ((32.0 * x).floor() / 32.0).min(31.0 / 32.0);
            (pn.forward(x) - q * q).abs()
        })
        .fold(0.0, f64::max);
    Ok((worst <= 1e-9, format!("x^2 at n=5, max gap {worst:.3e}")))
}

fn resnet() -> crate::Result<(bool, String)> {
    let f = lookup("sin(2*pi*x/5)")?;
    let p = build_piecewise(&f, 10, Mode::Rectangular)?;
    let net = lower_to_resnet(&p)?;
    let w = p.ramp_width();
    let mut worst = 0.0f64;
    for x in Grid::new(f.domain, 1001)?.abscissae() {
        if p.nodes.iter().all(|n| (x - n).abs() > w) {
            worst = worst.max((net.forward(x) - eval_piecewise(&p, x)?).abs());
        }
    }
    Ok((worst <= 1e-9, format!("off-band max gap {worst:.3e}")))
}

fn fourier(seed: u64) -> crate::Result<(bool, String)> {
    let d = Dataset::from_fn(Interval::new(-1.0, 1.0), 200, |x| (3.0 * x).cos())?;
    let mut m = init_hybrid(&d, 3, 2, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<f64> = pack_params(&m).iter().map(|v| v + rng.random_range(-0.5..0.5)).collect();
    unpack_params(&mut m, &p);
    let net = lower_to_network(&m)?;
    let worst = Grid::new(d.domain, 1001)?
        .abscissae()
        .into_iter()
        .map(|x| (net.forward(x) - model_eval(&m, x)).abs())
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("lowering max gap {worst:.3e}")))
}

fn gradient(seed: u64) -> crate::Result<(bool, String)> {
    let d = Dataset::from_fn(Interval::new(-1.0, 1.0), 200, |x| (-x * x).exp())?;
    let mut m = init_hybrid(&d, 2, 2, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p: Vec<f64> = pack_params(&m).iter().map(|v| v + rng.random_range(-0.5..0.5)).collect();
    unpack_params(&mut m, &p);
    let set = TrainingSet::new(&d, &m);
    let (_, g) = loss_and_gradient(&m, &set, Execution::Sequential);
    let h = 1e-6;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..p.len() {
        let mut probe = m.clone();
        let mut q = p.clone();
        q[i] += h;
        unpack_params(&mut probe, &q);
        let up = loss_and_gradient(&probe, &set, Execution::Sequential).0;
        q[i] -= 2.0 * h;
        unpack_params(&mut probe, &q);
        let down = loss_and_gradient(&probe, &set, Execution::Sequential).0;
        let fd = (up - down) / (2.0 * h);
        num = num.max((fd - g[i]).abs());
        den = den.max(fd.abs());
    }
    let rel = num / den.max(f64::MIN_POSITIVE);
    Ok((rel <= 1e-5, format!("relative gap {rel:.3e}")))
}

fn recovery() -> crate::Result<(bool, String)> {
    let (_, r) = fit_single(&lookup("sin(2*pi*x)")?, 3, 1000)?;
    Ok((r.final_loss <= 1e-8, format!("residual {:.3e}", r.final_loss)))
}

fn determinism() -> crate::Result<(bool, String)> {
    let cfg = RunConfig::table(2)?;
    let a = run_table(&cfg)?.to_csv()?;
    let b = run_table(&cfg)?.to_csv()?;
    Ok((a == b, format!("{} bytes", a.len())))
}

/// Runs every check; none aborts the others.
pub fn run_selftest(seed: u64) -> Vec<Check> {
    vec![
        check("bit product gadget", gadget),
        check("truncation sandwich", || truncation(seed)),
        check("poly net vs quantized Horner", poly_net),
        check("resnet lowering vs piecewise", resnet),
        check("fourier lowering vs model", || fourier(seed)),
        check("training gradient vs finite differences", || gradient(seed)),
        check("exact Fourier recovery", recovery),
        check("table CSV determinism", determinism),
    ]
}
