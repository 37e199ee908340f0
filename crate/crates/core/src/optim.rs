//! Adam on the regularized objective, the layer-wise L1 penalty, magnitude
//! thresholding and the sparsity/error metrics reported after training.

use crate::error::{Error, Result};
use crate::model::{Mlp, ParamGrad};

/// Default magnitude below which a trained weight counts as zero.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Per-layer L1 weights `α_1 … α_D`, one per weight matrix. Biases are never
/// penalized.
#[derive(Clone, Debug, PartialEq)]
pub struct RegSpec {
    alpha: Vec<f64>,
}

impl RegSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::ShapeMismatch(format!(
                "regularization weights must be finite and nonnegative, got {a}"
            )));
        }
        Ok(RegSpec { alpha })
    }

    pub fn zeros(depth: usize) -> Self {
        RegSpec {
            alpha: vec![0.0; depth],
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0)
    }

    fn check(&self, net: &Mlp) -> Result<()> {
        if self.alpha.len() != net.depth() {
            return Err(Error::LengthMismatch {
                expected: net.depth(),
                actual: self.alpha.len(),
            });
        }
        Ok(())
    }
}

/// `Σ_i α_i ‖W_i‖₁` with the entrywise matrix 1-norm.
pub fn l1_penalty(net: &Mlp, reg: &RegSpec) -> Result<f64> {
    reg.check(net)?;
    Ok(net
        .layers()
        .iter()
        .zip(&reg.alpha)
        .map(|(l, &a)| a * l.weights.iter().map(|w| w.abs()).sum::<f64>())
        .sum())
}

fn sign(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient `α_i sign(W_i)` of the penalty, with `sign(0) = 0`.
pub fn l1_subgradient(net: &Mlp, reg: &RegSpec) -> Result<ParamGrad> {
    reg.check(net)?;
    let mut g = ParamGrad::zeros_like(net);
    for ((gl, l), &a) in g.layers.iter_mut().zip(net.layers()).zip(&reg.alpha) {
        for (gw, &w) in gl.weights.iter_mut().zip(&l.weights) {
            *gw = a * sign(w);
        }
    }
    Ok(g)
}

/// How the nonsmooth penalty enters the update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PenaltyMode {
    /// Add the subgradient to the data gradient before the Adam step.
    #[default]
    Subgradient,
    /// Adam on the data gradient only, then soft-threshold each `W_i` by
    /// `lr·α_i`.
    Proximal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LrSchedule {
    Constant,
    /// Multiply the rate by `factor` every `every` epochs.
    StepDecay {
        factor: f64,
        every: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub schedule: LrSchedule,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            schedule: LrSchedule::Constant,
        }
    }
}

/// Moment estimates and step counter; `m` and `v` mirror the network.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: ParamGrad,
    pub v: ParamGrad,
    /// Number of completed steps.
    pub k: u64,
    /// Current epoch, drives the learning-rate schedule.
    pub epoch: usize,
}

impl AdamState {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: ParamGrad::zeros_like(net),
            v: ParamGrad::zeros_like(net),
            k: 0,
            epoch: 0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match self.config.schedule {
            LrSchedule::Constant => self.config.lr,
            LrSchedule::StepDecay { factor, every } if every > 0 => {
                self.config.lr * factor.powi((self.epoch / every) as i32)
            }
            LrSchedule::StepDecay { .. } => self.config.lr,
        }
    }
}

/// One bias-corrected Adam update of every parameter.
pub fn adam_step(net: &mut Mlp, grad: &ParamGrad, state: &mut AdamState) -> Result<()> {
    if !grad.matches(net) || !state.m.matches(net) || !state.v.matches(net) {
        return Err(Error::ShapeMismatch(
            "gradient or optimizer state does not mirror the network".into(),
        ));
    }
    state.k += 1;
    let AdamConfig {
        beta1, beta2, eps, ..
    } = state.config;
    let lr = state.learning_rate();
    let c1 = 1.0 - beta1.powi(state.k as i32);
    let c2 = 1.0 - beta2.powi(state.k as i32);

    let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..theta.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    for (((layer, g), m), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grad.layers)
        .zip(&mut state.m.layers)
        .zip(&mut state.v.layers)
    {
        update(
            &mut layer.weights,
            &g.weights,
            &mut m.weights,
            &mut v.weights,
        );
        update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
    }
    Ok(())
}

/// `w ← sign(w)·max(|w| − τ_i, 0)` on every weight matrix.
pub fn soft_threshold(net: &mut Mlp, tau: &[f64]) -> Result<()> {
    if tau.len() != net.depth() {
        return Err(Error::LengthMismatch {
            expected: net.depth(),
            actual: tau.len(),
        });
    }
    for (layer, &t) in net.layers_mut().iter_mut().zip(tau) {
        for w in &mut layer.weights {
            *w = sign(*w) * (w.abs() - t).max(0.0);
        }
    }
    Ok(())
}

/// One optimizer step on `data loss + Σ α_i ‖W_i‖₁`.
pub fn regularized_step(
    net: &mut Mlp,
    data_grad: &ParamGrad,
    reg: &RegSpec,
    mode: PenaltyMode,
    state: &mut AdamState,
) -> Result<()> {
    match mode {
        PenaltyMode::Subgradient => {
            if reg.is_zero() {
                reg.check(net)?;
                adam_step(net, data_grad, state)
            } else {
                let mut g = l1_subgradient(net, reg)?;
                g.add_scaled(data_grad, 1.0);
                adam_step(net, &g, state)
            }
        }
        PenaltyMode::Proximal => {
            reg.check(net)?;
            adam_step(net, data_grad, state)?;
            let lr = state.learning_rate();
            let tau: Vec<f64> = reg.alpha.iter().map(|a| lr * a).collect();
            soft_threshold(net, &tau)
        }
    }
}

/// Copy of `net` with every weight of magnitude below `epsilon` set to 0.
pub fn threshold(net: &Mlp, epsilon: f64) -> Mlp {
    let mut out = net.clone();
    for layer in out.layers_mut() {
        for w in &mut layer.weights {
            if w.abs() < epsilon {
                *w = 0.0;
            }
        }
    }
    out
}

/// Zero statistics of the weight matrices after thresholding at `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsityReport {
    /// Percentage of zero entries in each `W_i`.
    pub zero_percent: Vec<f64>,
    pub nonzero: Vec<usize>,
    pub total_nonzero: usize,
    pub total_weights: usize,
    pub epsilon: f64,
}

impl SparsityReport {
    pub fn mean_zero_percent(&self) -> f64 {
        self.zero_percent.iter().sum::<f64>() / self.zero_percent.len() as f64
    }

    /// Mean over the layers that feed a hidden layer, i.e. all but `W_D`.
    pub fn mean_hidden_zero_percent(&self) -> f64 {
        let n = self.zero_percent.len().saturating_sub(1).max(1);
        self.zero_percent.iter().take(n).sum::<f64>() / n as f64
    }
}

pub fn sparsity_report(net: &Mlp, epsilon: f64) -> SparsityReport {
    let mut zero_percent = Vec::with_capacity(net.depth());
    let mut nonzero = Vec::with_capacity(net.depth());
    for layer in net.layers() {
        let n = layer.weights.len();
        let zeros = layer
            .weights
            .iter()
            .filter(|w| w.abs() < epsilon || **w == 0.0)
            .count();
        zero_percent.push(100.0 * zeros as f64 / n as f64);
        nonzero.push(n - zeros);
    }
    SparsityReport {
        total_nonzero: nonzero.iter().sum(),
        total_weights: net.layers().iter().map(|l| l.weights.len()).sum(),
        zero_percent,
        nonzero,
        epsilon,
    }
}

/// `‖y − ŷ‖₂ / ‖y‖₂`.
pub fn relative_l2(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            actual: y_hat.len(),
        });
    }
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = y
        .iter()
        .zip(y_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm)
}
