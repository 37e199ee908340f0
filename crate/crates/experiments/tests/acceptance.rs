//! One PASS/FAIL line per acceptance criterion. The long training runs
//! (full-scale Burgers and the Schrödinger networks) are skipped unless
//! `SDNN_ACCEPTANCE_FULL=1`. A FAIL on a training criterion is printed but
//! does not fail the target.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sdnn_core::problems::BURGERS_NU;
use sdnn_core::reference::{
    burgers_exact, fft, nls_spectral_solve, FieldValues, ReferenceField, DEFAULT_DT,
};
use sdnn_core::*;
use sdnn_experiments::{run, RunConfig, RunReport};

enum Outcome {
    Pass,
    Fail,
    Skipped,
}

struct Line {
    id: usize,
    name: &'static str,
    outcome: Outcome,
    detail: String,
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// Criteria whose verdict depends on a training run.
const TRAINING: [usize; 4] = [3, 4, 5, 8];

fn full() -> bool {
    std::env::var("SDNN_ACCEPTANCE_FULL").is_ok_and(|v| v == "1")
}

// ---------- shared oracles ----------

fn random_net(widths: &[usize], seed: u64) -> Mlp {
    let mut net = Mlp::init(widths, Activation::Tanh, seed).unwrap();
    let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(31) + 7);
    for l in net.layers_mut() {
        for b in &mut l.bias {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    net
}

fn value(net: &Mlp, t: f64, x: f64) -> f64 {
    net.eval(&[t, x]).unwrap()[0]
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

fn fd_worst(net: &Mlp, analytic: &[f64], f: impl Fn(&Mlp) -> f64, floor: f64) -> f64 {
    let h = 1e-6;
    let theta = net.flat_params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let mut p = theta.clone();
        p[i] = theta[i] + h;
        probe.set_flat_params(&p).unwrap();
        let up = f(&probe);
        p[i] = theta[i] - h;
        probe.set_flat_params(&p).unwrap();
        let down = f(&probe);
        worst = worst.max(rel(analytic[i], (up - down) / (2.0 * h), floor));
    }
    worst
}

fn pinn_data(kind: ProblemKind, seed: u64) -> PinnData {
    let domain = kind.domain().unwrap();
    let interior = latin_hypercube(40, &domain, seed).unwrap();
    let mut rng = StdRng::seed_from_u64(seed + 1000);
    let mut draw = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    };
    match kind {
        ProblemKind::Burgers => PinnData {
            interior,
            initial_x: draw(10, -1.0, 1.0),
            boundary: BoundaryData::Dirichlet {
                lower_t: draw(5, 0.0, 1.0),
                upper_t: draw(6, 0.0, 1.0),
            },
        },
        _ => PinnData {
            interior,
            initial_x: draw(10, -5.0, 5.0),
            boundary: BoundaryData::Periodic {
                t: draw(7, 0.0, PI / 2.0),
            },
        },
    }
}

fn burgers_spec(seed: u64, alpha: Vec<f64>) -> ProblemSpec {
    ProblemSpec::burgers(
        pinn_data(ProblemKind::Burgers, seed),
        RegSpec::new(alpha).unwrap(),
    )
}

fn schrodinger_spec(seed: u64, alpha: Vec<f64>) -> ProblemSpec {
    ProblemSpec::schrodinger(
        pinn_data(ProblemKind::Schrodinger, seed),
        RegSpec::new(alpha).unwrap(),
    )
}

/// Pointwise assembly of the unpenalized Burgers objective from single-point
/// jets.
fn burgers_objective(net: &Mlp, spec: &ProblemSpec) -> f64 {
    let ProblemData::Pinn(d) = &spec.data else {
        unreachable!()
    };
    let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX]).unwrap();
    let pde = d
        .interior
        .iter()
        .map(|p| {
            let j = forward_jet(net, &[p[0], p[1]], want).unwrap();
            let u = j.value[0];
            let r = j.d_t.unwrap()[0] + u * j.d_x.unwrap()[0] - BURGERS_NU * j.d_xx.unwrap()[0];
            r * r
        })
        .sum::<f64>()
        / d.interior.len() as f64;
    let l0 = d
        .initial_x
        .iter()
        .map(|&x| (value(net, 0.0, x) + (PI * x).sin()).powi(2))
        .sum::<f64>()
        / d.initial_x.len() as f64;
    let BoundaryData::Dirichlet { lower_t, upper_t } = &d.boundary else {
        unreachable!()
    };
    let side = |ts: &[f64], x: f64| {
        ts.iter().map(|&t| value(net, t, x).abs()).sum::<f64>() / ts.len() as f64
    };
    pde + spec.beta * (l0 + side(lower_t, -1.0) + side(upper_t, 1.0))
}

fn schrodinger_objective(net: &Mlp, spec: &ProblemSpec) -> f64 {
    let ProblemData::Pinn(d) = &spec.data else {
        unreachable!()
    };
    let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX]).unwrap();
    let pde = d
        .interior
        .iter()
        .map(|p| {
            let j = forward_jet(net, &[p[0], p[1]], want).unwrap();
            let (psi, phi) = (j.value[0], j.value[1]);
            let (dt, dxx) = (j.d_t.unwrap(), j.d_xx.unwrap());
            let m = psi * psi + phi * phi;
            // i u_t + ½u_xx + |u|²u with u = ψ + iφ.
            let re = -dt[1] + 0.5 * dxx[0] + m * psi;
            let im = dt[0] + 0.5 * dxx[1] + m * phi;
            re * re + im * im
        })
        .sum::<f64>()
        / d.interior.len() as f64;
    let l0 = d
        .initial_x
        .iter()
        .map(|&x| {
            let u = net.eval(&[0.0, x]).unwrap();
            (u[0] - 2.0 / x.cosh()).powi(2) + u[1].powi(2)
        })
        .sum::<f64>()
        / d.initial_x.len() as f64;
    let BoundaryData::Periodic { t } = &d.boundary else {
        unreachable!()
    };
    let dx = DerivativeSet::new(&[Partial::X]).unwrap();
    let lb = t
        .iter()
        .map(|&t| {
            let l = forward_jet(net, &[t, -5.0], dx).unwrap();
            let r = forward_jet(net, &[t, 5.0], dx).unwrap();
            let (ldx, rdx) = (l.d_x.unwrap(), r.d_x.unwrap());
            (0..2)
                .map(|k| (l.value[k] - r.value[k]).powi(2) + (ldx[k] - rdx[k]).powi(2))
                .sum::<f64>()
        })
        .sum::<f64>()
        / t.len() as f64;
    pde + spec.beta * (l0 + lb)
}

fn naive_dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| {
                    x * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

fn field_max_diff(a: &ReferenceField, b: &ReferenceField) -> f64 {
    let (FieldValues::Complex(u), FieldValues::Complex(v)) = (a.values(), b.values()) else {
        unreachable!()
    };
    u.iter()
        .zip(v)
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(0.0, f64::max)
}

fn config(text: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_toml_str(text).unwrap();
    cfg.output_dir = Some(out.to_path_buf());
    cfg
}

// ---------- criteria ----------

fn gradients() -> Line {
    let mut worst = [0.0f64; 3];
    for seed in 0..10 {
        let alpha = vec![1e-3, 2e-3, 5e-3];
        let net = random_net(&[2, 8, 8, 1], seed);
        let spec = burgers_spec(seed, alpha.clone());
        let (_, g) = loss(&net, &spec).unwrap();
        let e = fd_worst(
            &net,
            &g.flatten(),
            |n| loss_value(n, &spec).unwrap().total,
            1e-2,
        );
        worst[0] = worst[0].max(e);

        let net2 = random_net(&[2, 8, 8, 2], seed);
        let spec = schrodinger_spec(seed, alpha.clone());
        let (_, g) = loss(&net2, &spec).unwrap();
        let e = fd_worst(
            &net2,
            &g.flatten(),
            |n| loss_value(n, &spec).unwrap().total,
            1e-2,
        );
        worst[1] = worst[1].max(e);

        let pts = latin_hypercube(50, &ProblemKind::Burgers.domain().unwrap(), seed + 50).unwrap();
        let y: Vec<f64> = pts.iter().map(|p| (2.0 * p[1]).sin() * p[0]).collect();
        let reg = RegSpec::new(alpha).unwrap();
        let (_, g) = regression_loss(&net, &pts, &y, &reg).unwrap();
        let e = fd_worst(
            &net,
            &g.flatten(),
            |n| regression_loss(n, &pts, &y, &reg).unwrap().0.total,
            1e-3,
        );
        worst[2] = worst[2].max(e);
    }
    Line {
        id: 1,
        name: "gradient correctness",
        outcome: verdict(worst[0] <= 1e-4 && worst[1] <= 1e-4 && worst[2] <= 1e-5),
        detail: format!(
            "worst relative error burgers {:.2e}, schrodinger {:.2e} (tol 1e-4), regression {:.2e} (tol 1e-5)",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn jets() -> Line {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX]).unwrap();
    for seed in 0..100 {
        let depth = rng.random_range(1..=5);
        let width = rng.random_range(2..=12);
        let mut widths = vec![2];
        widths.extend(std::iter::repeat_n(width, depth));
        widths.push(1);
        let net = random_net(&widths, 500 + seed);
        let (t, x) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let j = forward_jet(&net, &[t, x], want).unwrap();
        let h = 1e-5;
        let ut = (value(&net, t + h, x) - value(&net, t - h, x)) / (2.0 * h);
        let ux = (value(&net, t, x + h) - value(&net, t, x - h)) / (2.0 * h);
        let h2 = 1e-3;
        let uxx =
            (value(&net, t, x + h2) - 2.0 * value(&net, t, x) + value(&net, t, x - h2)) / (h2 * h2);
        first = first
            .max(rel(j.d_t.unwrap()[0], ut, 1e-2))
            .max(rel(j.d_x.unwrap()[0], ux, 1e-2));
        second = second.max(rel(j.d_xx.unwrap()[0], uxx, 1e-2));
    }
    Line {
        id: 2,
        name: "jet correctness",
        outcome: verdict(first <= 1e-5 && second <= 1e-4),
        detail: format!("worst u_t/u_x {first:.2e} (tol 1e-5), u_xx {second:.2e} (tol 1e-4)"),
    }
}

const QUADRATIC: &str = "problem = \"regression\"\ntarget = \"square\"\n\
widths = [1, 10, 10, 10, 10, 1]\nepochs = 20000\nalpha = [0.0, 1e-4, 1e-4, 1e-3, 1e-3]\n\
train_lo = [-2.0]\ntrain_hi = [2.0]\ntrain_step = [0.02]\n\
test_lo = [-2.0]\ntest_hi = [2.0]\ntest_step = [0.03333333333333333]\nlog_interval = 1000\n";

fn quadratic(root: &Path) -> Line {
    let reports: Vec<RunReport> = (0..3)
        .map(|seed| {
            let mut cfg = config(QUADRATIC, &root.join(format!("quadratic{seed}")));
            cfg.seed = seed;
            run(&cfg).unwrap()
        })
        .collect();
    let err = reports.iter().map(|r| r.relative_l2).sum::<f64>() / 3.0;
    let nonzero = reports.iter().map(|r| r.nonzero as f64).sum::<f64>() / 3.0;
    let per_seed: Vec<String> = reports
        .iter()
        .map(|r| format!("{:.2e}/{}", r.relative_l2, r.nonzero))
        .collect();
    Line {
        id: 3,
        name: "quadratic function",
        outcome: verdict(err <= 2e-2 && nonzero <= 90.0),
        detail: format!(
            "mean error {err:.2e} (tol 2e-2), mean nonzero {nonzero:.1} (tol 90); per seed {}",
            per_seed.join(", ")
        ),
    }
}

const ABS: &str = "problem = \"regression\"\ntarget = \"abs\"\nwidths = [1, 5, 5, 1]\n\
epochs = 10000\ntrain_lo = [-2.0]\ntrain_hi = [2.0]\ntrain_step = [0.01]\n\
test_lo = [-5.0]\ntest_hi = [5.0]\ntest_step = [0.1]\nlog_interval = 1000\n";

fn absolute_value(root: &Path) -> Line {
    let pair = |seed: u64| {
        let mut dense = config(ABS, &root.join(format!("abs_dense{seed}")));
        dense.seed = seed;
        let mut sparse = dense.clone();
        sparse.alpha = Some(vec![1e-4, 1e-3, 1e-3]);
        sparse.output_dir = Some(root.join(format!("abs_sdnn{seed}")));
        (
            run(&dense).unwrap().relative_l2,
            run(&sparse).unwrap().relative_l2,
        )
    };
    let (dense, sparse) = pair(0);
    let others: Vec<String> = (1..4)
        .map(|s| {
            let (d, p) = pair(s);
            format!("seed {s}: {p:.2e} vs {d:.2e}")
        })
        .collect();
    Line {
        id: 4,
        name: "absolute value",
        outcome: verdict(sparse <= 2e-2 && sparse < dense),
        detail: format!(
            "seed 0: sdnn {sparse:.2e} (tol 2e-2) vs dense {dense:.2e}; for information {}",
            others.join(", ")
        ),
    }
}

const BURGERS: &str = "problem = \"burgers\"\nwidths = [2, 50, 50, 50, 1]\n\
alpha = [1e-6, 1e-6, 1e-6, 1e-4]\nbeta = 20.0\nn_f = 10000\nepochs = 5000\nlog_interval = 1000\n";

fn burgers_sdnn(root: &Path) -> Vec<Line> {
    let mut lines = Vec::new();
    let mut smoke = config(BURGERS, &root.join("burgers_smoke"));
    smoke.epochs = 5000;
    let r = run(&smoke).unwrap();
    lines.push(Line {
        id: 5,
        name: "burgers sdnn, 5k-epoch smoke",
        outcome: verdict(r.relative_l2 <= 1e-1),
        detail: format!(
            "error {:.2e} (tol 1e-1), sparsity {:?}, {:.0} s",
            r.relative_l2, r.sparsity.zero_percent, r.wall_clock_secs
        ),
    });
    if !full() {
        lines.push(Line {
            id: 5,
            name: "burgers sdnn, 30k epochs",
            outcome: Outcome::Skipped,
            detail: "set SDNN_ACCEPTANCE_FULL=1 (about an hour on one core)".into(),
        });
        return lines;
    }
    let mut cfg = config(BURGERS, &root.join("burgers_full"));
    cfg.epochs = 30000;
    let r = run(&cfg).unwrap();
    let hidden = r.sparsity.mean_hidden_zero_percent;
    lines.push(Line {
        id: 5,
        name: "burgers sdnn, 30k epochs",
        outcome: verdict(r.relative_l2 <= 1e-2 && hidden >= 30.0),
        detail: format!(
            "error {:.2e} (tol 1e-2), mean hidden sparsity {hidden:.1}% (min 30%), per layer {:?}",
            r.relative_l2, r.sparsity.zero_percent
        ),
    });
    lines
}

fn burgers_oracle() -> Line {
    let u = |t: f64, x: f64, n: usize| burgers_exact(t, x, n).unwrap();
    let ts: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
    let odd = ts.iter().map(|&t| u(t, 0.0, 100).abs()).fold(0.0, f64::max);
    let boundary = ts
        .iter()
        .flat_map(|&t| [u(t, -1.0, 100).abs(), u(t, 1.0, 100).abs()])
        .fold(0.0, f64::max);
    let limit = (-20..=20)
        .map(|k| {
            let x = k as f64 / 20.0;
            (u(1e-8, x, 100) + (PI * x).sin()).abs()
        })
        .fold(0.0, f64::max);
    let mut quad: f64 = 0.0;
    for &t in &[0.1, 0.3, 0.6, 0.8, 1.0] {
        for k in -19..=19 {
            let x = k as f64 / 20.0;
            if x.abs() > 0.05 || t < 0.3 {
                quad = quad.max((u(t, x, 100) - u(t, x, 200)).abs());
            }
        }
    }
    let h = 1e-4;
    let mut residual: f64 = 0.0;
    for t in [0.3, 0.6, 0.8] {
        for x in [-0.75, -0.25, 0.25, 0.75] {
            let ut = (u(t + h, x, 100) - u(t - h, x, 100)) / (2.0 * h);
            let ux = (u(t, x + h, 100) - u(t, x - h, 100)) / (2.0 * h);
            let uxx = (u(t, x + h, 100) - 2.0 * u(t, x, 100) + u(t, x - h, 100)) / (h * h);
            residual = residual.max((ut + u(t, x, 100) * ux - BURGERS_NU * uxx).abs());
        }
    }
    Line {
        id: 6,
        name: "burgers oracle",
        outcome: verdict(
            odd <= 1e-12 && boundary <= 1e-6 && limit <= 1e-6 && quad <= 1e-8 && residual <= 1e-3,
        ),
        detail: format!(
            "|u(t,0)| {odd:.1e} (1e-12), |u(t,±1)| {boundary:.1e} (1e-6), t→0 {limit:.1e} (1e-6), \
             n_quad 100 vs 200 {quad:.1e} (1e-8), PDE residual {residual:.1e} (1e-3)"
        ),
    }
}

fn schrodinger_reference() -> Line {
    let drift = nls_spectral_solve(256, DEFAULT_DT, PI / 2.0, &[PI / 2.0])
        .unwrap()
        .max_mass_drift;
    let end = [PI / 2.0];
    let solve = |f: f64| {
        nls_spectral_solve(256, PI / 2.0 * f, PI / 2.0, &end)
            .unwrap()
            .field
    };
    let (a, b, c) = (solve(5e-5), solve(2.5e-5), solve(1.25e-5));
    let ratio = field_max_diff(&a, &b) / field_max_diff(&b, &c);
    let mut rng = StdRng::seed_from_u64(7);
    let v: Vec<Complex64> = (0..256)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let dft = fft(&v, false)
        .unwrap()
        .iter()
        .zip(naive_dft(&v))
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    Line {
        id: 7,
        name: "schrodinger reference",
        outcome: verdict(drift <= 1e-8 && (ratio / 16.0 - 1.0).abs() <= 0.3 && dft <= 1e-10),
        detail: format!(
            "mass drift {drift:.1e} (1e-8), RK4 ratio {ratio:.2} on dt = (pi/2)·{{5, 2.5, 1.25}}e-5 \
             (16 ± 30%), FFT vs DFT {dft:.1e} (1e-10)"
        ),
    }
}

const SCHRODINGER: &str = "problem = \"schrodinger\"\n\
widths = [2, 50, 50, 50, 50, 50, 50, 2]\nbeta = 10.0\nepochs = 30000\nlog_interval = 1000\n";

fn schrodinger_sdnn(root: &Path) -> Vec<Line> {
    if !full() {
        return vec![Line {
            id: 8,
            name: "schrodinger sdnn",
            outcome: Outcome::Skipped,
            detail: "optional nightly, set SDNN_ACCEPTANCE_FULL=1 (several hours on one core)"
                .into(),
        }];
    }
    let mut a = config(SCHRODINGER, &root.join("nls_a"));
    a.alpha = Some(vec![0.0, 0.0, 0.0, 0.0, 5e-7, 1e-6, 1e-5]);
    let ra = run(&a).unwrap();
    let mut b = config(SCHRODINGER, &root.join("nls_b"));
    b.alpha = Some(vec![9e-7, 5e-7, 6e-7, 7e-7, 8e-7, 1e-6, 1e-5]);
    let rb = run(&b).unwrap();
    vec![
        Line {
            id: 8,
            name: "schrodinger sdnn, light penalty",
            outcome: verdict(ra.relative_l2 <= 5e-3),
            detail: format!("error of |u| {:.2e} (tol 5e-3)", ra.relative_l2),
        },
        Line {
            id: 8,
            name: "schrodinger sdnn, full penalty",
            outcome: verdict(rb.relative_l2 <= 5e-3 && rb.sparsity.mean_zero_percent >= 40.0),
            detail: format!(
                "error of |u| {:.2e} (tol 5e-3), mean sparsity {:.1}% (min 40%), per layer {:?}",
                rb.relative_l2, rb.sparsity.mean_zero_percent, rb.sparsity.zero_percent
            ),
        },
    ]
}

fn degeneration() -> Line {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let net = random_net(&[2, 8, 8, 1], seed);
        let spec = burgers_spec(seed, vec![0.0; 3]);
        let got = loss_value(&net, &spec).unwrap().total;
        let want = burgers_objective(&net, &spec);
        worst = worst.max((got - want).abs() / want.max(1.0));

        let net = random_net(&[2, 8, 8, 2], seed);
        let spec = schrodinger_spec(seed, vec![0.0; 3]);
        let got = loss_value(&net, &spec).unwrap().total;
        let want = schrodinger_objective(&net, &spec);
        worst = worst.max((got - want).abs() / want.max(1.0));
    }
    Line {
        id: 9,
        name: "degeneration identity",
        outcome: verdict(worst <= 1e-12),
        detail: format!("alpha = 0 objective vs PINN objective, worst {worst:.1e} (1e-12)"),
    }
}

fn reproducibility(root: &Path) -> Line {
    let text = "problem = \"burgers\"\nwidths = [2, 10, 10, 1]\nalpha = [1e-5, 1e-5, 1e-4]\n\
                epochs = 200\nlog_interval = 20\nn_f = 500\ntest_lo = [0.0, -1.0]\ntest_hi = [1.0, 1.0]\ntest_step = [0.1, 0.05]\n";
    let runs: Vec<RunReport> = ["repro_a", "repro_b"]
        .iter()
        .map(|d| run(&config(text, &root.join(d))).unwrap())
        .collect();
    let same = |f: fn(&RunReport) -> &Path| {
        std::fs::read(f(&runs[0])).unwrap() == std::fs::read(f(&runs[1])).unwrap()
    };
    let metrics = same(|r| &r.metrics);
    let checkpoint = same(|r| &r.checkpoint);
    Line {
        id: 10,
        name: "reproducibility",
        outcome: verdict(metrics && checkpoint),
        detail: format!("metrics identical: {metrics}, checkpoint identical: {checkpoint}"),
    }
}

fn main() {
    // Under `cargo test -- --list` and similar, report no tests.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut lines = Vec::new();
    let mut record = |ls: Vec<Line>, started: Instant| {
        for l in ls {
            let tag = match l.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Skipped => "SKIPPED",
            };
            println!(
                "{tag:<7} criterion {:>2} {}: {} [{:.1} s]",
                l.id,
                l.name,
                l.detail,
                started.elapsed().as_secs_f64()
            );
            lines.push(l);
        }
    };
    let t = Instant::now();
    record(vec![gradients()], t);
    let t = Instant::now();
    record(vec![jets()], t);
    let t = Instant::now();
    record(vec![quadratic(root)], t);
    let t = Instant::now();
    record(vec![absolute_value(root)], t);
    let t = Instant::now();
    record(burgers_sdnn(root), t);
    let t = Instant::now();
    record(vec![burgers_oracle()], t);
    let t = Instant::now();
    record(vec![schrodinger_reference()], t);
    let t = Instant::now();
    record(schrodinger_sdnn(root), t);
    let t = Instant::now();
    record(vec![degeneration()], t);
    let t = Instant::now();
    record(vec![reproducibility(root)], t);

    let failed: Vec<usize> = lines
        .iter()
        .filter(|l| matches!(l.outcome, Outcome::Fail))
        .map(|l| l.id)
        .collect();
    println!("failed criteria: {failed:?}");
    // Training outcomes (3, 4, 5, 8) are reported above; only the exact
    // checks fail the test run.
    if failed.iter().any(|id| !TRAINING.contains(id)) {
        std::process::exit(1);
    }
}
