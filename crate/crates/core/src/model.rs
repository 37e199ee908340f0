//! Fully connected feed-forward networks `L_D ∘ σ ∘ L_{D-1} ∘ … ∘ σ ∘ L_1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::jet::{forward_tape, Channel, DerivativeSet};

/// One affine layer `x ↦ σ(W x + b)`; `weights` is row-major `rows × cols`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(
        rows: usize,
        cols: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(format!("empty layer {rows}x{cols}")));
        }
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(Error::ShapeMismatch(format!(
                "layer {rows}x{cols} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Layer {
            rows,
            cols,
            weights,
            bias,
            activation,
        })
    }

    /// Output width `d_i`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Input width `d_{i-1}`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn param_count(&self) -> usize {
        self.rows * self.cols + self.rows
    }
}

/// A multilayer perceptron. Hidden layers share one activation; the output
/// layer is always affine.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    /// Builds a network from explicit layers, checking that widths chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("network has no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].cols != pair[0].rows {
                return Err(Error::ShapeMismatch(format!(
                    "layer {} has {} inputs but layer {} emits {}",
                    i + 2,
                    pair[1].cols,
                    i + 1,
                    pair[0].rows
                )));
            }
        }
        Ok(Mlp { layers })
    }

    /// All-zero network with the given architecture.
    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        check_widths(widths)?;
        let depth = widths.len() - 1;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 1 == depth {
                    Activation::Identity
                } else {
                    activation
                };
                Layer {
                    rows: w[1],
                    cols: w[0],
                    weights: vec![0.0; w[0] * w[1]],
                    bias: vec![0.0; w[1]],
                    activation: act,
                }
            })
            .collect();
        Ok(Mlp { layers })
    }

    /// Glorot-uniform weights, zero biases, deterministic in `seed`.
    pub fn init(widths: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut net = Mlp::zeros(widths, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let bound = (6.0 / (layer.rows + layer.cols) as f64).sqrt();
            for w in &mut layer.weights {
                let u: f64 = rng.random();
                *w = -bound + 2.0 * bound * u;
            }
        }
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Number of affine layers `D`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `[d_0, d_1, …, d_D]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].cols];
        w.extend(self.layers.iter().map(|l| l.rows));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    /// Activation used by the hidden layers (identity for a single-layer net).
    pub fn hidden_activation(&self) -> Activation {
        if self.layers.len() > 1 {
            self.layers[0].activation
        } else {
            Activation::Identity
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Parameters flattened layer by layer: `W_i` row-major, then `b_i`.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: flat.len(),
            });
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    /// Plain forward evaluation of one input vector.
    pub fn eval(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        let mut x = input.to_vec();
        for l in &self.layers {
            let y: Vec<f64> = (0..l.rows)
                .map(|r| {
                    let row = &l.weights[r * l.cols..(r + 1) * l.cols];
                    let z = row.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + l.bias[r];
                    l.activation.eval(z).value
                })
                .collect();
            x = y;
        }
        Ok(x)
    }

    /// Outputs for a point-major batch of inputs, returned point-major.
    pub fn predict(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        const CHUNK: usize = 1024;
        let din = self.input_dim();
        let dout = self.output_dim();
        if !inputs.len().is_multiple_of(din) {
            return Err(Error::LengthMismatch {
                expected: inputs.len() / din * din,
                actual: inputs.len(),
            });
        }
        let parts = inputs
            .par_chunks(CHUNK * din)
            .map(|chunk| {
                let tape = forward_tape(self, chunk, DerivativeSet::VALUE)?;
                let out = tape.output();
                let mut v = vec![0.0; out.batch() * dout];
                for u in 0..dout {
                    for (p, &y) in out.row(Channel::Value, u).iter().enumerate() {
                        v[p * dout + u] = y;
                    }
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.concat())
    }
}

pub(crate) fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::BadWidths(widths.to_vec()));
    }
    Ok(())
}

/// Gradient of one layer; shapes mirror [`Layer`].
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradient with respect to every `W_i` and `b_i` of an [`Mlp`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrad {
    pub layers: Vec<LayerGrad>,
}

impl ParamGrad {
    pub fn zeros_like(net: &Mlp) -> Self {
        ParamGrad {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.bias.len() == l.bias.len())
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &ParamGrad, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += scale * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += scale * y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|x| *x *= s);
            l.bias.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// Same ordering as [`Mlp::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn from_flat_like(net: &Mlp, flat: &[f64]) -> Result<Self> {
        let mut g = ParamGrad::zeros_like(net);
        if flat.len() != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                actual: flat.len(),
            });
        }
        let mut off = 0;
        for l in &mut g.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        Ok(g)
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|x| x.is_finite()))
    }
}
