//! Regularized training objectives: plain regression and the physics-informed
//! Burgers and Schrödinger losses.

mod burgers;
mod regression;
mod schrodinger;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jet::{backward_params, forward_tape, DerivativeSet, JetBatch};
use crate::model::{Mlp, ParamGrad};
use crate::optim::{l1_penalty, l1_subgradient, RegSpec};
use crate::sampling::{DomainBox, PointSet};

pub use burgers::{burgers_initial, burgers_loss, burgers_residual, BURGERS_NU};
pub use regression::regression_loss;
pub use schrodinger::{schrodinger_initial, schrodinger_loss, schrodinger_residual};

/// Points per parallel work unit. Even, so periodic boundary pairs never
/// straddle two chunks.
pub const CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Regression,
    Burgers,
    Schrodinger,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Regression => "regression",
            ProblemKind::Burgers => "burgers",
            ProblemKind::Schrodinger => "schrodinger",
        }
    }

    /// `(t_lo, t_hi, x_lo, x_hi)` for the PDE problems.
    pub fn bounds(self) -> Option<(f64, f64, f64, f64)> {
        match self {
            ProblemKind::Regression => None,
            ProblemKind::Burgers => Some((0.0, 1.0, -1.0, 1.0)),
            ProblemKind::Schrodinger => Some((0.0, PI / 2.0, -5.0, 5.0)),
        }
    }

    pub fn domain(self) -> Option<DomainBox> {
        self.bounds()
            .map(|(t0, t1, x0, x1)| DomainBox::new(vec![t0, x0], vec![t1, x1]).unwrap())
    }

    pub fn default_beta(self) -> f64 {
        match self {
            ProblemKind::Regression => 0.0,
            ProblemKind::Burgers => 20.0,
            ProblemKind::Schrodinger => 10.0,
        }
    }

    pub fn default_powers(self) -> LossPowers {
        match self {
            ProblemKind::Burgers => LossPowers {
                pde: LossPower::Square,
                initial: LossPower::Square,
                boundary: LossPower::Abs,
            },
            _ => LossPowers::default(),
        }
    }

    pub fn output_dim(self) -> Option<usize> {
        match self {
            ProblemKind::Regression => None,
            ProblemKind::Burgers => Some(1),
            ProblemKind::Schrodinger => Some(2),
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "regression" => Ok(ProblemKind::Regression),
            "burgers" => Ok(ProblemKind::Burgers),
            "schrodinger" => Ok(ProblemKind::Schrodinger),
            _ => Err(format!("unknown problem `{s}`")),
        }
    }
}

/// Pointwise discrepancy `‖d‖²` or `‖d‖`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LossPower {
    Abs,
    #[default]
    Square,
}

impl LossPower {
    pub fn from_exponent(p: u32) -> Option<Self> {
        match p {
            1 => Some(LossPower::Abs),
            2 => Some(LossPower::Square),
            _ => None,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            LossPower::Abs => 1,
            LossPower::Square => 2,
        }
    }

    /// Value of the discrepancy of `d` and its gradient with respect to `d`.
    /// The Euclidean norm uses gradient 0 at the origin.
    pub(crate) fn apply<const N: usize>(self, d: [f64; N]) -> (f64, [f64; N]) {
        match self {
            LossPower::Square => (d.iter().map(|v| v * v).sum(), d.map(|v| 2.0 * v)),
            LossPower::Abs => {
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n == 0.0 {
                    (0.0, [0.0; N])
                } else {
                    (n, d.map(|v| v / n))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LossPowers {
    pub pde: LossPower,
    pub initial: LossPower,
    pub boundary: LossPower,
}

/// Boundary times. Dirichlet data sits on both ends with separate samples;
/// periodic data pairs the two ends at the same time.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData {
    Dirichlet {
        lower_t: Vec<f64>,
        upper_t: Vec<f64>,
    },
    Periodic {
        t: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinnData {
    /// Collocation points `(t, x)`.
    pub interior: PointSet,
    /// Initial-time abscissae.
    pub initial_x: Vec<f64>,
    pub boundary: BoundaryData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    pub points: PointSet,
    /// Point-major targets, `points.len() × outputs`.
    pub targets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemData {
    Regression(RegressionData),
    Pinn(PinnData),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub beta: f64,
    pub reg: RegSpec,
    pub powers: LossPowers,
    pub data: ProblemData,
}

impl ProblemSpec {
    pub fn regression(points: PointSet, targets: Vec<f64>, reg: RegSpec) -> Self {
        ProblemSpec {
            kind: ProblemKind::Regression,
            beta: 0.0,
            reg,
            powers: LossPowers::default(),
            data: ProblemData::Regression(RegressionData { points, targets }),
        }
    }

    pub fn burgers(data: PinnData, reg: RegSpec) -> Self {
        Self::pinn(ProblemKind::Burgers, data, reg)
    }

    pub fn schrodinger(data: PinnData, reg: RegSpec) -> Self {
        Self::pinn(ProblemKind::Schrodinger, data, reg)
    }

    fn pinn(kind: ProblemKind, data: PinnData, reg: RegSpec) -> Self {
        ProblemSpec {
            kind,
            beta: kind.default_beta(),
            reg,
            powers: kind.default_powers(),
            data: ProblemData::Pinn(data),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_powers(mut self, powers: LossPowers) -> Self {
        self.powers = powers;
        self
    }

    pub fn with_reg(mut self, reg: RegSpec) -> Self {
        self.reg = reg;
        self
    }

    pub(crate) fn pinn_data(&self, kind: ProblemKind) -> Result<&PinnData> {
        match (&self.data, self.kind == kind) {
            (ProblemData::Pinn(d), true) => Ok(d),
            _ => Err(Error::ShapeMismatch(format!(
                "expected a {kind} problem, got {}",
                self.kind
            ))),
        }
    }
}

/// The terms of the regularized objective. For regression the data misfit
/// (mean squared error) is reported as `loss_pde`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub loss_pde: f64,
    pub loss_0: f64,
    pub loss_b: f64,
    pub loss_reg: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn combine(loss_pde: f64, loss_0: f64, loss_b: f64, loss_reg: f64, beta: f64) -> Self {
        LossBreakdown {
            loss_pde,
            loss_0,
            loss_b,
            loss_reg,
            total: loss_pde + beta * (loss_0 + loss_b) + loss_reg,
        }
    }

    /// The objective without the sparsity penalty.
    pub fn data_total(&self) -> f64 {
        self.total - self.loss_reg
    }

    pub fn is_finite(&self) -> bool {
        [
            self.loss_pde,
            self.loss_0,
            self.loss_b,
            self.loss_reg,
            self.total,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Which gradient a loss evaluation should return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradMode {
    None,
    /// Gradient of the unregularized objective.
    Data,
    /// Gradient including the L1 subgradient.
    Full,
}

/// Evaluates the objective of any problem kind.
pub fn evaluate(
    net: &Mlp,
    spec: &ProblemSpec,
    mode: GradMode,
) -> Result<(LossBreakdown, Option<ParamGrad>)> {
    let want = mode != GradMode::None;
    let (pde, l0, lb, grad) = match spec.kind {
        ProblemKind::Regression => {
            let ProblemData::Regression(d) = &spec.data else {
                return Err(Error::ShapeMismatch(
                    "regression problem without data".into(),
                ));
            };
            let (mse, g) = regression::mse(net, &d.points, &d.targets, want)?;
            (mse, 0.0, 0.0, g)
        }
        ProblemKind::Burgers => burgers::terms(net, spec, want)?,
        ProblemKind::Schrodinger => schrodinger::terms(net, spec, want)?,
    };
    let beta = if spec.kind == ProblemKind::Regression {
        0.0
    } else {
        spec.beta
    };
    let reg = l1_penalty(net, &spec.reg)?;
    let breakdown = LossBreakdown::combine(pde, l0, lb, reg, beta);
    let grad = match (grad, mode) {
        (Some(mut g), GradMode::Full) => {
            if !spec.reg.is_zero() {
                g.add_scaled(&l1_subgradient(net, &spec.reg)?, 1.0);
            }
            Some(g)
        }
        (g, _) => g,
    };
    Ok((breakdown, grad))
}

/// Regularized loss and its full (sub)gradient.
pub fn loss(net: &Mlp, spec: &ProblemSpec) -> Result<(LossBreakdown, ParamGrad)> {
    let (b, g) = evaluate(net, spec, GradMode::Full)?;
    Ok((b, g.expect("gradient requested")))
}

pub fn loss_value(net: &Mlp, spec: &ProblemSpec) -> Result<LossBreakdown> {
    evaluate(net, spec, GradMode::None).map(|(b, _)| b)
}

/// Sums a per-point term over `inputs` (point-major, `net.input_dim()` per
/// point). Chunks run in parallel and are reduced in a fixed order, so the
/// result does not depend on the thread count.
///
/// `term(first, out, inputs, cot)` receives the index of the chunk's first
/// point, the chunk's output jets and inputs, returns the chunk's summed term and writes the term's derivative with
/// respect to every output jet component into `cot`. Returns the plain sum
/// over all points; the gradient of that sum times `grad_scale` is added
/// into `grad`.
pub(crate) fn accumulate<F>(
    net: &Mlp,
    inputs: &[f64],
    want: DerivativeSet,
    grad_scale: f64,
    grad: Option<&mut ParamGrad>,
    term: F,
) -> Result<f64>
where
    F: Fn(usize, &JetBatch, &[f64], &mut JetBatch) -> f64 + Sync,
{
    let dim = net.input_dim();
    let with_grad = grad.is_some();
    let parts: Vec<Result<(f64, Option<ParamGrad>)>> = inputs
        .par_chunks(CHUNK * dim)
        .enumerate()
        .map(|(i, chunk)| {
            let tape = forward_tape(net, chunk, want)?;
            let out = tape.output();
            let mut cot = JetBatch::zeros(out.width(), out.batch(), out.layout());
            let sum = term(i * CHUNK, out, chunk, &mut cot);
            let g = if with_grad {
                Some(backward_params(net, &tape, &cot)?)
            } else {
                None
            };
            Ok((sum, g))
        })
        .collect();

    let mut total = 0.0;
    let mut acc: Option<ParamGrad> = None;
    for part in parts {
        let (sum, g) = part?;
        total += sum;
        if let Some(g) = g {
            match &mut acc {
                None => acc = Some(g),
                Some(a) => a.add_scaled(&g, 1.0),
            }
        }
    }
    if let (Some(grad), Some(acc)) = (grad, acc) {
        grad.add_scaled(&acc, grad_scale);
    }
    Ok(total)
}

/// Rejects points outside the problem's space-time box.
pub(crate) fn check_domain(kind: ProblemKind, t: &[f64], x: &[f64]) -> Result<()> {
    const TOL: f64 = 1e-12;
    let (t0, t1, x0, x1) = kind.bounds().expect("PDE problem");
    for (&t, &x) in t.iter().zip(x) {
        if t < t0 - TOL || t > t1 + TOL || x < x0 - TOL || x > x1 + TOL {
            return Err(Error::DomainViolation {
                problem: kind.name(),
                t,
                x,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_pde_net(net: &Mlp, kind: ProblemKind) -> Result<()> {
    let out = kind.output_dim().expect("PDE problem");
    if net.input_dim() != 2 || net.output_dim() != out {
        return Err(Error::ShapeMismatch(format!(
            "{kind} needs a network with 2 inputs and {out} outputs, got widths {:?}",
            net.widths()
        )));
    }
    Ok(())
}

/// Interleaves `(t, x)` pairs into point-major network inputs.
pub(crate) fn space_time(t: &[f64], x: &[f64]) -> Vec<f64> {
    t.iter().zip(x).flat_map(|(&t, &x)| [t, x]).collect()
}
