use crate::error::{Error, Result};
use crate::jet::{Channel, DerivativeSet};
use crate::model::{Mlp, ParamGrad};
use crate::optim::RegSpec;
use crate::sampling::PointSet;

use super::{accumulate, evaluate, GradMode, LossBreakdown, ProblemSpec};

/// Mean squared error plus the sparsity penalty, with its full gradient.
pub fn regression_loss(
    net: &Mlp,
    points: &PointSet,
    targets: &[f64],
    reg: &RegSpec,
) -> Result<(LossBreakdown, ParamGrad)> {
    let spec = ProblemSpec::regression(points.clone(), targets.to_vec(), reg.clone());
    let (b, g) = evaluate(net, &spec, GradMode::Full)?;
    Ok((b, g.expect("gradient requested")))
}

/// `(1/N) Σ ‖N(x_i) − y_i‖²` and optionally its gradient.
pub(crate) fn mse(
    net: &Mlp,
    points: &PointSet,
    targets: &[f64],
    with_grad: bool,
) -> Result<(f64, Option<ParamGrad>)> {
    if points.is_empty() {
        return Err(Error::EmptyData("regression points"));
    }
    if points.dim() != net.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "points have dimension {}, network takes {}",
            points.dim(),
            net.input_dim()
        )));
    }
    let out = net.output_dim();
    let n = points.len();
    if targets.len() != n * out {
        return Err(Error::LengthMismatch {
            expected: n * out,
            actual: targets.len(),
        });
    }
    let mut grad = with_grad.then(|| ParamGrad::zeros_like(net));
    let sum = accumulate(
        net,
        points.coords(),
        DerivativeSet::VALUE,
        1.0 / n as f64,
        grad.as_mut(),
        |first, jet, _, cot| {
            let mut sum = 0.0;
            for p in 0..jet.batch() {
                for u in 0..out {
                    let d = jet.get(Channel::Value, u, p) - targets[(first + p) * out + u];
                    sum += d * d;
                    cot.set(Channel::Value, u, p, 2.0 * d);
                }
            }
            sum
        },
    )?;
    Ok((sum / n as f64, grad))
}
