use crate::error::{Error, Result};
use crate::jet::{forward_jet, Channel, DerivativeSet, Partial};
use crate::model::{Mlp, ParamGrad};

use super::{
    accumulate, check_domain, check_pde_net, evaluate, space_time, BoundaryData, GradMode,
    LossBreakdown, ProblemKind, ProblemSpec,
};

/// Initial state `(ψ, φ) = (2 sech x, 0)`.
pub fn schrodinger_initial(x: f64) -> (f64, f64) {
    (2.0 / x.cosh(), 0.0)
}

/// Real and imaginary parts of `i u_t + ½ u_xx + |u|² u` with `u = ψ + iφ`.
pub fn schrodinger_residual(net: &Mlp, t: f64, x: f64) -> Result<(f64, f64)> {
    check_pde_net(net, ProblemKind::Schrodinger)?;
    let want = DerivativeSet::new(&[Partial::T, Partial::XX])?;
    let j = forward_jet(net, &[t, x], want)?;
    let (dt, dxx) = (j.d_t.unwrap(), j.d_xx.unwrap());
    Ok(residual(
        j.value[0], j.value[1], dt[0], dt[1], dxx[0], dxx[1],
    ))
}

fn residual(psi: f64, phi: f64, psi_t: f64, phi_t: f64, psi_xx: f64, phi_xx: f64) -> (f64, f64) {
    let m = psi * psi + phi * phi;
    (
        -phi_t + 0.5 * psi_xx + m * psi,
        psi_t + 0.5 * phi_xx + m * phi,
    )
}

/// Regularized Schrödinger objective with its full gradient.
pub fn schrodinger_loss(net: &Mlp, spec: &ProblemSpec) -> Result<(LossBreakdown, ParamGrad)> {
    if spec.kind != ProblemKind::Schrodinger {
        return Err(Error::ShapeMismatch(format!(
            "expected a schrodinger problem, got {}",
            spec.kind
        )));
    }
    let (b, g) = evaluate(net, spec, GradMode::Full)?;
    Ok((b, g.expect("gradient requested")))
}

/// `(loss_pde, loss_0, loss_b)` and the gradient of
/// `loss_pde + β (loss_0 + loss_b)`.
pub(crate) fn terms(
    net: &Mlp,
    spec: &ProblemSpec,
    with_grad: bool,
) -> Result<(f64, f64, f64, Option<ParamGrad>)> {
    let kind = ProblemKind::Schrodinger;
    let data = spec.pinn_data(kind)?;
    check_pde_net(net, kind)?;
    let BoundaryData::Periodic { t: bound_t } = &data.boundary else {
        return Err(Error::ShapeMismatch(
            "schrodinger needs periodic boundary times".into(),
        ));
    };
    if data.interior.is_empty() {
        return Err(Error::EmptyData("collocation points"));
    }
    if data.initial_x.is_empty() {
        return Err(Error::EmptyData("initial points"));
    }
    if bound_t.is_empty() {
        return Err(Error::EmptyData("boundary points"));
    }
    let (_, _, x_lo, x_hi) = kind.bounds().unwrap();
    check_domain(kind, &data.interior.column(0), &data.interior.column(1))?;
    check_domain(kind, &vec![0.0; data.initial_x.len()], &data.initial_x)?;
    check_domain(kind, bound_t, &vec![x_lo; bound_t.len()])?;

    let powers = spec.powers;
    let beta = spec.beta;
    let mut grad = with_grad.then(|| ParamGrad::zeros_like(net));

    let want = DerivativeSet::new(&[Partial::T, Partial::XX])?;
    let n_f = data.interior.len() as f64;
    let loss_pde = accumulate(
        net,
        data.interior.coords(),
        want,
        1.0 / n_f,
        grad.as_mut(),
        |_, jet, _, cot| {
            let mut sum = 0.0;
            for p in 0..jet.batch() {
                let g = |ch, u| jet.get(ch, u, p);
                let (psi, phi) = (g(Channel::Value, 0), g(Channel::Value, 1));
                let (re, im) = residual(
                    psi,
                    phi,
                    g(Channel::T, 0),
                    g(Channel::T, 1),
                    g(Channel::XX, 0),
                    g(Channel::XX, 1),
                );
                let (v, [a, b]) = powers.pde.apply([re, im]);
                sum += v;
                cot.set(
                    Channel::Value,
                    0,
                    p,
                    a * (3.0 * psi * psi + phi * phi) + b * 2.0 * psi * phi,
                );
                cot.set(
                    Channel::Value,
                    1,
                    p,
                    a * 2.0 * psi * phi + b * (psi * psi + 3.0 * phi * phi),
                );
                cot.set(Channel::T, 0, p, b);
                cot.set(Channel::T, 1, p, -a);
                cot.set(Channel::XX, 0, p, 0.5 * a);
                cot.set(Channel::XX, 1, p, 0.5 * b);
            }
            sum
        },
    )? / n_f;

    let n_0 = data.initial_x.len() as f64;
    let init_in = space_time(&vec![0.0; data.initial_x.len()], &data.initial_x);
    let loss_0 = accumulate(
        net,
        &init_in,
        DerivativeSet::VALUE,
        beta / n_0,
        grad.as_mut(),
        |_, jet, inputs, cot| {
            let mut sum = 0.0;
            for p in 0..jet.batch() {
                let (psi0, phi0) = schrodinger_initial(inputs[2 * p + 1]);
                let d = [
                    jet.get(Channel::Value, 0, p) - psi0,
                    jet.get(Channel::Value, 1, p) - phi0,
                ];
                let (v, [a, b]) = powers.initial.apply(d);
                sum += v;
                cot.set(Channel::Value, 0, p, a);
                cot.set(Channel::Value, 1, p, b);
            }
            sum
        },
    )? / n_0;

    // Even and odd points are the two ends at the same time.
    let n_b = bound_t.len() as f64;
    let pairs: Vec<f64> = bound_t.iter().flat_map(|&t| [t, x_lo, t, x_hi]).collect();
    let loss_b = accumulate(
        net,
        &pairs,
        DerivativeSet::new(&[Partial::X])?,
        beta / n_b,
        grad.as_mut(),
        |_, jet, _, cot| {
            let mut sum = 0.0;
            for lo in (0..jet.batch()).step_by(2) {
                let hi = lo + 1;
                for ch in [Channel::Value, Channel::X] {
                    let d = [
                        jet.get(ch, 0, lo) - jet.get(ch, 0, hi),
                        jet.get(ch, 1, lo) - jet.get(ch, 1, hi),
                    ];
                    let (v, [a, b]) = powers.boundary.apply(d);
                    sum += v;
                    cot.set(ch, 0, lo, a);
                    cot.set(ch, 0, hi, -a);
                    cot.set(ch, 1, lo, b);
                    cot.set(ch, 1, hi, -b);
                }
            }
            sum
        },
    )? / n_b;

    Ok((loss_pde, loss_0, loss_b, grad))
}

#[cfg(test)]
mod tests {
    use super::super::test_util::{fd_grad, max_rel_err};
    use super::super::{loss_value, LossPower, LossPowers, PinnData};
    use super::*;
    use crate::activation::Activation;
    use crate::model::Layer;
    use crate::optim::RegSpec;
    use crate::sampling::{latin_hypercube, linspace};

    fn data(n_f: usize, seed: u64) -> PinnData {
        let dom = ProblemKind::Schrodinger.domain().unwrap();
        PinnData {
            interior: latin_hypercube(n_f, &dom, seed).unwrap(),
            initial_x: linspace(-4.5, 4.5, 11),
            boundary: BoundaryData::Periodic {
                t: vec![0.05, 0.5, 0.9, 1.4],
            },
        }
    }

    #[test]
    fn residual_closed_forms() {
        let zero = Mlp::zeros(&[2, 4, 2], Activation::Tanh).unwrap();
        assert_eq!(schrodinger_residual(&zero, 0.3, 0.2).unwrap(), (0.0, 0.0));
        let l = Layer::new(
            2,
            2,
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0; 2],
            Activation::Identity,
        )
        .unwrap();
        let psi_is_x = Mlp::from_layers(vec![l]).unwrap();
        assert_eq!(
            schrodinger_residual(&psi_is_x, 0.7, 1.0).unwrap(),
            (1.0, 0.0)
        );
        let (re, im) = schrodinger_residual(&psi_is_x, 0.7, -2.0).unwrap();
        assert_eq!((re, im), (-8.0, 0.0));
    }

    #[test]
    fn residual_matches_finite_differences() {
        let net = Mlp::init(&[2, 12, 12, 2], Activation::Tanh, 21).unwrap();
        let u = |t: f64, x: f64| net.eval(&[t, x]).unwrap();
        let (t, x) = (0.6, 1.3);
        let h = 1e-4;
        let h2 = 1e-3;
        let c = u(t, x);
        let (tp, tm) = (u(t + h, x), u(t - h, x));
        let (xp, xm) = (u(t, x + h2), u(t, x - h2));
        let d_t = |k: usize| (tp[k] - tm[k]) / (2.0 * h);
        let d_xx = |k: usize| (xp[k] - 2.0 * c[k] + xm[k]) / (h2 * h2);
        let m = c[0] * c[0] + c[1] * c[1];
        let re = -d_t(1) + 0.5 * d_xx(0) + m * c[0];
        let im = d_t(0) + 0.5 * d_xx(1) + m * c[1];
        let (r, i) = schrodinger_residual(&net, t, x).unwrap();
        assert!((r - re).abs() < 1e-4 * re.abs().max(1.0), "{r} vs {re}");
        assert!((i - im).abs() < 1e-4 * im.abs().max(1.0), "{i} vs {im}");
    }

    #[test]
    fn zero_network_losses() {
        let d = data(25, 3);
        let expect = d
            .initial_x
            .iter()
            .map(|x| 4.0 / x.cosh().powi(2))
            .sum::<f64>()
            / d.initial_x.len() as f64;
        let net = Mlp::zeros(&[2, 5, 2], Activation::Tanh).unwrap();
        let b = loss_value(&net, &ProblemSpec::schrodinger(d, RegSpec::zeros(2))).unwrap();
        assert_eq!((b.loss_pde, b.loss_b), (0.0, 0.0));
        assert!((b.loss_0 - expect).abs() < 1e-14);
        assert_eq!(b.total, 10.0 * b.loss_0);
    }

    #[test]
    fn constant_output_is_periodic() {
        let mut net = Mlp::init(&[2, 5, 2], Activation::Tanh, 1).unwrap();
        for w in &mut net.layers_mut()[1].weights {
            *w = 0.0;
        }
        net.layers_mut()[1].bias = vec![0.3, -1.2];
        let b = loss_value(
            &net,
            &ProblemSpec::schrodinger(data(5, 1), RegSpec::zeros(2)),
        )
        .unwrap();
        assert_eq!(b.loss_b, 0.0);
    }

    #[test]
    fn boundary_term_by_hand() {
        let net = Mlp::init(&[2, 6, 2], Activation::Tanh, 12).unwrap();
        let d = data(5, 2);
        let BoundaryData::Periodic { t } = &d.boundary else {
            unreachable!()
        };
        let want = DerivativeSet::new(&[Partial::X]).unwrap();
        let mut expect = 0.0;
        for &ti in t {
            let lo = forward_jet(&net, &[ti, -5.0], want).unwrap();
            let hi = forward_jet(&net, &[ti, 5.0], want).unwrap();
            let (lx, hx) = (lo.d_x.unwrap(), hi.d_x.unwrap());
            for k in 0..2 {
                expect += (lo.value[k] - hi.value[k]).powi(2) + (lx[k] - hx[k]).powi(2);
            }
        }
        expect /= t.len() as f64;
        let b = loss_value(&net, &ProblemSpec::schrodinger(d, RegSpec::zeros(2))).unwrap();
        assert!((b.loss_b - expect).abs() < 1e-14 * expect.max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in [4, 5, 6] {
            let net = Mlp::init(&[2, 8, 8, 2], Activation::Tanh, seed).unwrap();
            let reg = RegSpec::new(vec![1e-3, 1e-3, 1e-2]).unwrap();
            let spec = ProblemSpec::schrodinger(data(300, seed), reg);
            let (_, g) = schrodinger_loss(&net, &spec).unwrap();
            let fd = fd_grad(&net, |n| loss_value(n, &spec).unwrap().total, 1e-6);
            let err = max_rel_err(&g.flatten(), &fd, 1e-2);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn absolute_powers_gradient() {
        let net = Mlp::init(&[2, 6, 2], Activation::Tanh, 8).unwrap();
        let powers = LossPowers {
            pde: LossPower::Abs,
            initial: LossPower::Abs,
            boundary: LossPower::Abs,
        };
        let spec = ProblemSpec::schrodinger(data(40, 8), RegSpec::zeros(2)).with_powers(powers);
        let (_, g) = schrodinger_loss(&net, &spec).unwrap();
        let fd = fd_grad(&net, |n| loss_value(n, &spec).unwrap().total, 1e-6);
        assert!(max_rel_err(&g.flatten(), &fd, 1e-2) < 1e-4);
    }

    #[test]
    fn wrong_shapes() {
        let one_out = Mlp::init(&[2, 4, 1], Activation::Tanh, 1).unwrap();
        assert!(matches!(
            schrodinger_residual(&one_out, 0.1, 0.0),
            Err(Error::ShapeMismatch(_))
        ));
        let net = Mlp::init(&[2, 4, 2], Activation::Tanh, 1).unwrap();
        let burgers_like = ProblemSpec::burgers(data(4, 1), RegSpec::zeros(2));
        assert!(schrodinger_loss(&net, &burgers_like).is_err());
    }
}
