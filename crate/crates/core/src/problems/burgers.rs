use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::{forward_jet, Channel, DerivativeSet, Partial};
use crate::model::{Mlp, ParamGrad};

use super::{
    accumulate, check_domain, check_pde_net, evaluate, space_time, BoundaryData, GradMode,
    LossBreakdown, ProblemKind, ProblemSpec,
};

/// Viscosity `0.01/π`.
pub const BURGERS_NU: f64 = 0.01 / PI;

pub fn burgers_initial(x: f64) -> f64 {
    -(PI * x).sin()
}

/// `u_t + u u_x − ν u_xx` of the network at `(t, x)`.
pub fn burgers_residual(net: &Mlp, t: f64, x: f64) -> Result<f64> {
    check_pde_net(net, ProblemKind::Burgers)?;
    let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX])?;
    let j = forward_jet(net, &[t, x], want)?;
    let (u, ut, ux, uxx) = (
        j.value[0],
        j.d_t.unwrap()[0],
        j.d_x.unwrap()[0],
        j.d_xx.unwrap()[0],
    );
    Ok(ut + u * ux - BURGERS_NU * uxx)
}

/// Regularized Burgers objective with its full gradient.
pub fn burgers_loss(net: &Mlp, spec: &ProblemSpec) -> Result<(LossBreakdown, ParamGrad)> {
    if spec.kind != ProblemKind::Burgers {
        return Err(Error::ShapeMismatch(format!(
            "expected a burgers problem, got {}",
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
    let kind = ProblemKind::Burgers;
    let data = spec.pinn_data(kind)?;
    check_pde_net(net, kind)?;
    let BoundaryData::Dirichlet { lower_t, upper_t } = &data.boundary else {
        return Err(Error::ShapeMismatch(
            "burgers needs boundary samples at x = -1 and x = 1".into(),
        ));
    };
    if data.interior.is_empty() {
        return Err(Error::EmptyData("collocation points"));
    }
    if data.initial_x.is_empty() {
        return Err(Error::EmptyData("initial points"));
    }
    if lower_t.is_empty() && upper_t.is_empty() {
        return Err(Error::EmptyData("boundary points"));
    }
    let t_col = data.interior.column(0);
    let x_col = data.interior.column(1);
    check_domain(kind, &t_col, &x_col)?;
    check_domain(kind, &vec![0.0; data.initial_x.len()], &data.initial_x)?;
    check_domain(kind, lower_t, &vec![-1.0; lower_t.len()])?;
    check_domain(kind, upper_t, &vec![1.0; upper_t.len()])?;

    let powers = spec.powers;
    let beta = spec.beta;
    let mut grad = with_grad.then(|| ParamGrad::zeros_like(net));

    let want = DerivativeSet::new(&[Partial::T, Partial::X, Partial::XX])?;
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
                let u = jet.get(Channel::Value, 0, p);
                let ut = jet.get(Channel::T, 0, p);
                let ux = jet.get(Channel::X, 0, p);
                let uxx = jet.get(Channel::XX, 0, p);
                let r = ut + u * ux - BURGERS_NU * uxx;
                let (v, [g]) = powers.pde.apply([r]);
                sum += v;
                cot.set(Channel::Value, 0, p, g * ux);
                cot.set(Channel::T, 0, p, g);
                cot.set(Channel::X, 0, p, g * u);
                cot.set(Channel::XX, 0, p, -BURGERS_NU * g);
            }
            sum
        },
    )? / n_f;

    let init_in = space_time(&vec![0.0; data.initial_x.len()], &data.initial_x);
    let n_0 = data.initial_x.len() as f64;
    let loss_0 = accumulate(
        net,
        &init_in,
        DerivativeSet::VALUE,
        beta / n_0,
        grad.as_mut(),
        |_, jet, inputs, cot| {
            let mut sum = 0.0;
            for p in 0..jet.batch() {
                let d = jet.get(Channel::Value, 0, p) - burgers_initial(inputs[2 * p + 1]);
                let (v, [g]) = powers.initial.apply([d]);
                sum += v;
                cot.set(Channel::Value, 0, p, g);
            }
            sum
        },
    )? / n_0;

    let mut loss_b = 0.0;
    for (ts, xb) in [(lower_t, -1.0), (upper_t, 1.0)] {
        if ts.is_empty() {
            continue;
        }
        let inputs = space_time(ts, &vec![xb; ts.len()]);
        let n_b = ts.len() as f64;
        loss_b += accumulate(
            net,
            &inputs,
            DerivativeSet::VALUE,
            beta / n_b,
            grad.as_mut(),
            |_, jet, _, cot| {
                let mut sum = 0.0;
                for p in 0..jet.batch() {
                    let (v, [g]) = powers.boundary.apply([jet.get(Channel::Value, 0, p)]);
                    sum += v;
                    cot.set(Channel::Value, 0, p, g);
                }
                sum
            },
        )? / n_b;
    }

    Ok((loss_pde, loss_0, loss_b, grad))
}
