use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdnn_core::*;

fn random_net(widths: &[usize], seed: u64) -> Mlp {
    // Random biases too, so every parameter has a generic gradient.
    let mut net = Mlp::init(widths, Activation::Tanh, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jets_match_finite_differences(
        seed in any::<u64>(),
        depth in 1usize..=6,
        width in 2usize..=12,
        t in -1.0f64..1.0,
        x in -1.0f64..1.0,
    ) {
        let mut widths = vec![2];
        widths.extend(std::iter::repeat_n(width, depth - 1));
        widths.push(1);
        let net = random_net(&widths, seed);
        let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX]).unwrap();
        let j = forward_jet(&net, &[t, x], want).unwrap();
        prop_assert!((j.value[0] - value(&net, t, x)).abs() < 1e-13);

        let h = 1e-5;
        let ut = (value(&net, t + h, x) - value(&net, t - h, x)) / (2.0 * h);
        let ux = (value(&net, t, x + h) - value(&net, t, x - h)) / (2.0 * h);
        let h2 = 1e-3;
        let uxx = (value(&net, t, x + h2) - 2.0 * value(&net, t, x) + value(&net, t, x - h2))
            / (h2 * h2);
        prop_assert!(rel(j.d_t.unwrap()[0], ut, 1e-2) <= 1e-5);
        prop_assert!(rel(j.d_x.unwrap()[0], ux, 1e-2) <= 1e-5);
        prop_assert!(rel(j.d_xx.unwrap()[0], uxx, 1e-2) <= 1e-4);
    }

    #[test]
    fn penalty_is_homogeneous(seed in any::<u64>(), c in 0.0f64..10.0) {
        let net = random_net(&[2, 6, 6, 1], seed);
        let a = vec![1e-3, 2e-4, 5e-2];
        let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
        let p = l1_penalty(&net, &RegSpec::new(a).unwrap()).unwrap();
        let q = l1_penalty(&net, &RegSpec::new(scaled).unwrap()).unwrap();
        prop_assert!((q - c * p).abs() <= 1e-12 * q.abs().max(1.0));
    }

    #[test]
    fn thresholding_is_idempotent_and_monotone(seed in any::<u64>(), e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let net = random_net(&[2, 10, 10, 1], seed);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let once = threshold(&net, lo);
        prop_assert_eq!(threshold(&once, lo), once);
        let a = sparsity_report(&net, lo);
        let b = sparsity_report(&net, hi);
        for (za, zb) in a.zero_percent.iter().zip(&b.zero_percent) {
            prop_assert!(za <= zb);
        }
    }
}

fn flat_grad(g: &ParamGrad) -> Vec<f64> {
    g.flatten()
}

/// Central differences of `f` in every parameter.
fn fd(net: &Mlp, f: impl Fn(&Mlp) -> f64, h: f64) -> Vec<f64> {
    let theta = net.flat_params();
    let mut probe = net.clone();
    (0..theta.len())
        .map(|i| {
            let mut p = theta.clone();
            p[i] = theta[i] + h;
            probe.set_flat_params(&p).unwrap();
            let up = f(&probe);
            p[i] = theta[i] - h;
            probe.set_flat_params(&p).unwrap();
            let down = f(&probe);
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn worst(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| rel(*a, *n, floor))
        .fold(0.0, f64::max)
}

fn lhs(n: usize, kind: ProblemKind, seed: u64) -> PointSet {
    latin_hypercube(n, &kind.domain().unwrap(), seed).unwrap()
}

fn burgers_spec(seed: u64, alpha: Vec<f64>) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    };
    let data = PinnData {
        interior: lhs(32, ProblemKind::Burgers, seed),
        initial_x: draw(8, -1.0, 1.0),
        boundary: BoundaryData::Dirichlet {
            lower_t: draw(4, 0.0, 1.0),
            upper_t: draw(5, 0.0, 1.0),
        },
    };
    ProblemSpec::burgers(data, RegSpec::new(alpha).unwrap())
}

fn schrodinger_spec(seed: u64, alpha: Vec<f64>) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    };
    let data = PinnData {
        interior: lhs(32, ProblemKind::Schrodinger, seed),
        initial_x: draw(8, -5.0, 5.0),
        boundary: BoundaryData::Periodic {
            t: draw(6, 0.0, PI / 2.0),
        },
    };
    ProblemSpec::schrodinger(data, RegSpec::new(alpha).unwrap())
}

#[test]
fn pde_gradients_match_finite_differences() {
    for seed in 0..10 {
        let net = random_net(&[2, 8, 8, 1], seed);
        let spec = burgers_spec(seed, vec![1e-3, 2e-3, 5e-3]);
        let (_, g) = loss(&net, &spec).unwrap();
        let num = fd(&net, |n| loss_value(n, &spec).unwrap().total, 1e-6);
        let e = worst(&flat_grad(&g), &num, 1e-2);
        assert!(e <= 1e-4, "burgers seed {seed}: {e}");

        let net = random_net(&[2, 8, 8, 2], seed);
        let spec = schrodinger_spec(seed, vec![1e-3, 2e-3, 5e-3]);
        let (_, g) = loss(&net, &spec).unwrap();
        let num = fd(&net, |n| loss_value(n, &spec).unwrap().total, 1e-6);
        let e = worst(&flat_grad(&g), &num, 1e-2);
        assert!(e <= 1e-4, "schrodinger seed {seed}: {e}");
    }
}

#[test]
fn regression_gradients_match_finite_differences() {
    for seed in 0..10 {
        let net = random_net(&[2, 8, 8, 1], seed);
        let points = lhs(64, ProblemKind::Burgers, seed + 100);
        let targets: Vec<f64> = points.iter().map(|p| (p[0] * 3.0).sin() + p[1]).collect();
        let reg = RegSpec::new(vec![1e-3, 1e-3, 1e-3]).unwrap();
        let (_, g) = regression_loss(&net, &points, &targets, &reg).unwrap();
        let num = fd(
            &net,
            |n| regression_loss(n, &points, &targets, &reg).unwrap().0.total,
            1e-6,
        );
        let e = worst(&flat_grad(&g), &num, 1e-3);
        assert!(e <= 1e-5, "seed {seed}: {e}");
    }
}

/// The unregularized objective assembled from pointwise residuals.
fn burgers_pinn_objective(net: &Mlp, spec: &ProblemSpec) -> f64 {
    let ProblemData::Pinn(d) = &spec.data else {
        unreachable!()
    };
    let n = d.interior.len() as f64;
    let pde: f64 = d
        .interior
        .iter()
        .map(|p| burgers_residual(net, p[0], p[1]).unwrap().powi(2))
        .sum::<f64>()
        / n;
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

fn schrodinger_pinn_objective(net: &Mlp, spec: &ProblemSpec) -> f64 {
    let ProblemData::Pinn(d) = &spec.data else {
        unreachable!()
    };
    let n = d.interior.len() as f64;
    let pde: f64 = d
        .interior
        .iter()
        .map(|p| {
            let (a, b) = schrodinger_residual(net, p[0], p[1]).unwrap();
            a * a + b * b
        })
        .sum::<f64>()
        / n;
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
    let dx = |t: f64, x: f64| -> Vec<f64> {
        let want = DerivativeSet::new(&[Partial::X]).unwrap();
        forward_jet(net, &[t, x], want).unwrap().d_x.unwrap()
    };
    let lb = t
        .iter()
        .map(|&t| {
            let l = net.eval(&[t, -5.0]).unwrap();
            let r = net.eval(&[t, 5.0]).unwrap();
            let (dl, dr) = (dx(t, -5.0), dx(t, 5.0));
            (l[0] - r[0]).powi(2)
                + (l[1] - r[1]).powi(2)
                + (dl[0] - dr[0]).powi(2)
                + (dl[1] - dr[1]).powi(2)
        })
        .sum::<f64>()
        / t.len() as f64;
    pde + spec.beta * (l0 + lb)
}

#[test]
fn zero_penalty_reduces_to_the_pinn_objective() {
    for seed in 0..5 {
        let net = random_net(&[2, 8, 8, 1], seed);
        let spec = burgers_spec(seed, vec![0.0; 3]);
        let b = loss_value(&net, &spec).unwrap();
        let oracle = burgers_pinn_objective(&net, &spec);
        assert_eq!(b.loss_reg, 0.0);
        assert!(
            (b.total - oracle).abs() <= 1e-12 * oracle.max(1.0),
            "{} vs {oracle}",
            b.total
        );

        let net = random_net(&[2, 8, 8, 2], seed);
        let spec = schrodinger_spec(seed, vec![0.0; 3]);
        let b = loss_value(&net, &spec).unwrap();
        let oracle = schrodinger_pinn_objective(&net, &spec);
        assert!(
            (b.total - oracle).abs() <= 1e-12 * oracle.max(1.0),
            "{} vs {oracle}",
            b.total
        );
    }
}

#[test]
fn burgers_residual_of_simple_fields() {
    // u = x: residual = u·u_x = x.
    let l1 = Layer::new(1, 2, vec![0.0, 1.0], vec![0.0], Activation::Identity).unwrap();
    let net = Mlp::from_layers(vec![l1]).unwrap();
    assert!((burgers_residual(&net, 0.3, 0.5).unwrap() - 0.5).abs() < 1e-15);
}
