//! Forward propagation of input-derivative jets through an [`Mlp`] and the
//! hand-written reverse pass that differentiates through them.
//!
//! Every layer carries up to four channels per unit: the activation value,
//! `∂/∂t`, `∂/∂x` and `∂²/∂x²`. With `z = W a + b` and `y = σ(z)` the
//! recurrences are
//!
//! ```text
//! y    = σ(z)
//! y_t  = σ'(z) z_t
//! y_x  = σ'(z) z_x
//! y_xx = σ''(z) z_x² + σ'(z) z_xx
//! ```
//!
//! where the derivative channels of `z` are `W` applied to those of `a`
//! (the bias only enters the value channel). A batch of points is stored
//! unit-major with the channels stacked side by side, so one GEMM per layer
//! advances every channel of every point at once.

use crate::error::{Error, Result};
use crate::linalg::{gemm, MatRef};
use crate::model::{Mlp, ParamGrad};

/// A partial derivative with respect to the network inputs `(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partial {
    T,
    X,
    XX,
    /// Mixed `∂²/∂t∂x`; never propagated.
    TX,
}

/// Which input derivatives a forward pass must produce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DerivativeSet {
    t: bool,
    x: bool,
    xx: bool,
}

impl DerivativeSet {
    pub const VALUE: DerivativeSet = DerivativeSet {
        t: false,
        x: false,
        xx: false,
    };

    pub fn new(partials: &[Partial]) -> Result<Self> {
        let mut set = DerivativeSet::VALUE;
        for p in partials {
            match p {
                Partial::T => set.t = true,
                Partial::X => set.x = true,
                Partial::XX => set.xx = true,
                Partial::TX => {
                    return Err(Error::UnsupportedDerivative(
                        "mixed derivative d²/dtdx is not propagated".into(),
                    ))
                }
            }
        }
        Ok(set)
    }

    pub fn contains(self, p: Partial) -> bool {
        match p {
            Partial::T => self.t,
            Partial::X => self.x,
            Partial::XX => self.xx,
            Partial::TX => false,
        }
    }

    pub fn layout(self) -> ChannelLayout {
        let mut count = 1;
        let mut next = || {
            count += 1;
            Some(count - 1)
        };
        let t = if self.t { next() } else { None };
        // d_xx is built from d_x, so the x channel rides along.
        let x = if self.x || self.xx { next() } else { None };
        let xx = if self.xx { next() } else { None };
        ChannelLayout { t, x, xx, count }
    }
}

/// One of the stacked quantities carried per unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Value,
    T,
    X,
    XX,
}

/// Slot assignment of channels inside a stacked jet buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelLayout {
    t: Option<usize>,
    x: Option<usize>,
    xx: Option<usize>,
    count: usize,
}

impl ChannelLayout {
    pub fn slot(&self, ch: Channel) -> Option<usize> {
        match ch {
            Channel::Value => Some(0),
            Channel::T => self.t,
            Channel::X => self.x,
            Channel::XX => self.xx,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Jets of a batch of points for one layer: `width` units × channels × points.
#[derive(Clone, Debug, PartialEq)]
pub struct JetBatch {
    width: usize,
    batch: usize,
    layout: ChannelLayout,
    data: Vec<f64>,
}

impl JetBatch {
    pub fn zeros(width: usize, batch: usize, layout: ChannelLayout) -> Self {
        JetBatch {
            width,
            batch,
            layout,
            data: vec![0.0; width * layout.count * batch],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn layout(&self) -> ChannelLayout {
        self.layout
    }

    pub fn has(&self, ch: Channel) -> bool {
        self.layout.slot(ch).is_some()
    }

    #[inline]
    fn index(&self, ch: Channel, unit: usize, point: usize) -> usize {
        let slot = self
            .layout
            .slot(ch)
            .unwrap_or_else(|| panic!("channel {ch:?} not present in this jet"));
        (unit * self.layout.count + slot) * self.batch + point
    }

    #[inline]
    pub fn get(&self, ch: Channel, unit: usize, point: usize) -> f64 {
        self.data[self.index(ch, unit, point)]
    }

    #[inline]
    pub fn set(&mut self, ch: Channel, unit: usize, point: usize, v: f64) {
        let i = self.index(ch, unit, point);
        self.data[i] = v;
    }

    /// Channel row for one unit, indexed by point.
    pub fn row(&self, ch: Channel, unit: usize) -> &[f64] {
        let start = self.index(ch, unit, 0);
        &self.data[start..start + self.batch]
    }

    pub fn row_mut(&mut self, ch: Channel, unit: usize) -> &mut [f64] {
        let start = self.index(ch, unit, 0);
        &mut self.data[start..start + self.batch]
    }

    fn stacked(&self) -> MatRef<'_> {
        MatRef::row_major(&self.data, self.width, self.layout.count * self.batch)
    }
}

/// Value and selected input derivatives of a network output at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: Vec<f64>,
    pub d_t: Option<Vec<f64>>,
    pub d_x: Option<Vec<f64>>,
    pub d_xx: Option<Vec<f64>>,
}

/// Everything the reverse pass needs from a batched forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Tape {
    widths: Vec<usize>,
    want: DerivativeSet,
    inputs: Vec<f64>,
    /// `acts[0]` holds the seeded inputs, `acts[i]` the output of layer `i`.
    acts: Vec<JetBatch>,
    /// Stacked pre-activations of each layer.
    pre: Vec<Vec<f64>>,
    /// `σ'`, `σ''`, `σ'''` at the value pre-activation, each `d_i × batch`.
    sigma: Vec<[Vec<f64>; 3]>,
}

impl Tape {
    pub fn output(&self) -> &JetBatch {
        &self.acts[self.acts.len() - 1]
    }

    pub fn batch(&self) -> usize {
        self.acts[0].batch
    }

    pub fn derivatives(&self) -> DerivativeSet {
        self.want
    }

    /// Recomputes the forward pass from the recorded inputs.
    pub fn replay(&self, net: &Mlp) -> Result<Tape> {
        if net.widths() != self.widths {
            return Err(Error::TapeMismatch(format!(
                "tape widths {:?}, network widths {:?}",
                self.widths,
                net.widths()
            )));
        }
        forward_tape(net, &self.inputs, self.want)
    }
}

fn check_request(net: &Mlp, want: DerivativeSet) -> Result<()> {
    let d0 = net.input_dim();
    if want.t && d0 != 2 {
        return Err(Error::ShapeMismatch(format!(
            "d/dt needs a (t, x) input, network takes {d0} inputs"
        )));
    }
    if (want.x || want.xx) && d0 > 2 {
        return Err(Error::ShapeMismatch(format!(
            "d/dx needs 1 or 2 inputs, network takes {d0}"
        )));
    }
    if want.xx {
        if let Some(l) = net
            .layers()
            .iter()
            .find(|l| !l.activation.is_twice_differentiable())
        {
            return Err(Error::UnsupportedDerivative(format!(
                "second derivatives requested through {} activation",
                l.activation
            )));
        }
    }
    Ok(())
}

/// Runs a batch of points forward and records the tape.
///
/// `inputs` is point-major: point `p` occupies `inputs[p*d_0..(p+1)*d_0]`.
/// With two inputs the coordinates are `(t, x)`; with one input it is `x`.
pub fn forward_tape(net: &Mlp, inputs: &[f64], want: DerivativeSet) -> Result<Tape> {
    check_request(net, want)?;
    let d0 = net.input_dim();
    if !inputs.len().is_multiple_of(d0) {
        return Err(Error::ShapeMismatch(format!(
            "{} input values do not split into points of width {d0}",
            inputs.len()
        )));
    }
    let batch = inputs.len() / d0;
    let layout = want.layout();
    let nc = layout.count;

    let mut seed = JetBatch::zeros(d0, batch, layout);
    for p in 0..batch {
        for u in 0..d0 {
            seed.set(Channel::Value, u, p, inputs[p * d0 + u]);
        }
    }
    if want.t {
        seed.row_mut(Channel::T, 0).fill(1.0);
    }
    if layout.slot(Channel::X).is_some() {
        seed.row_mut(Channel::X, d0 - 1).fill(1.0);
    }

    let depth = net.depth();
    let mut acts = Vec::with_capacity(depth + 1);
    let mut pre = Vec::with_capacity(depth);
    let mut sigma = Vec::with_capacity(depth);
    acts.push(seed);

    for layer in net.layers() {
        let prev = &acts[acts.len() - 1];
        let (rows, cols) = (layer.rows(), layer.cols());
        let stride = nc * batch;
        let mut z = vec![0.0; rows * stride];
        gemm(
            1.0,
            MatRef::row_major(&layer.weights, rows, cols),
            prev.stacked(),
            0.0,
            &mut z,
        );
        let mut out = JetBatch::zeros(rows, batch, layout);
        let mut s1 = vec![0.0; rows * batch];
        let mut s2 = vec![0.0; rows * batch];
        let mut s3 = vec![0.0; rows * batch];
        for u in 0..rows {
            let zu = &mut z[u * stride..(u + 1) * stride];
            let ou = &mut out.data[u * stride..(u + 1) * stride];
            let b = layer.bias[u];
            for p in 0..batch {
                zu[p] += b;
                let d = layer.activation.eval(zu[p]);
                ou[p] = d.value;
                s1[u * batch + p] = d.d1;
                s2[u * batch + p] = d.d2;
                s3[u * batch + p] = d.d3;
            }
            let s1u = &s1[u * batch..(u + 1) * batch];
            let s2u = &s2[u * batch..(u + 1) * batch];
            if let Some(ts) = layout.t {
                for p in 0..batch {
                    ou[ts * batch + p] = s1u[p] * zu[ts * batch + p];
                }
            }
            if let Some(xs) = layout.x {
                for p in 0..batch {
                    ou[xs * batch + p] = s1u[p] * zu[xs * batch + p];
                }
            }
            if let (Some(xs), Some(xxs)) = (layout.x, layout.xx) {
                for p in 0..batch {
                    let zx = zu[xs * batch + p];
                    ou[xxs * batch + p] = s2u[p] * zx * zx + s1u[p] * zu[xxs * batch + p];
                }
            }
        }
        pre.push(z);
        sigma.push([s1, s2, s3]);
        acts.push(out);
    }

    Ok(Tape {
        widths: net.widths(),
        want,
        inputs: inputs.to_vec(),
        acts,
        pre,
        sigma,
    })
}

/// Output jet of the network at a single input point.
pub fn forward_jet(net: &Mlp, input: &[f64], want: DerivativeSet) -> Result<Jet2> {
    if input.len() != net.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "network takes {} inputs, got {}",
            net.input_dim(),
            input.len()
        )));
    }
    let tape = forward_tape(net, input, want)?;
    let out = tape.output();
    let collect = |ch: Channel| (0..out.width()).map(|u| out.get(ch, u, 0)).collect();
    Ok(Jet2 {
        value: collect(Channel::Value),
        d_t: want.t.then(|| collect(Channel::T)),
        d_x: want.x.then(|| collect(Channel::X)),
        d_xx: want.xx.then(|| collect(Channel::XX)),
    })
}

/// Gradient of a scalar loss with respect to all parameters, given the
/// loss's partial derivatives (`cotangents`) with respect to every output
/// jet component.
pub fn backward_params(net: &Mlp, tape: &Tape, cotangents: &JetBatch) -> Result<ParamGrad> {
    let mut grad = ParamGrad::zeros_like(net);
    backward_accumulate(net, tape, cotangents, &mut grad)?;
    Ok(grad)
}

/// Like [`backward_params`] but adds into an existing gradient.
pub fn backward_accumulate(
    net: &Mlp,
    tape: &Tape,
    cotangents: &JetBatch,
    grad: &mut ParamGrad,
) -> Result<()> {
    if net.widths() != tape.widths {
        return Err(Error::TapeMismatch(format!(
            "tape widths {:?}, network widths {:?}",
            tape.widths,
            net.widths()
        )));
    }
    let out = tape.output();
    if cotangents.width != out.width
        || cotangents.batch != out.batch
        || cotangents.layout != out.layout
    {
        return Err(Error::TapeMismatch(
            "cotangent jet does not match the recorded output jet".into(),
        ));
    }
    if !grad.matches(net) {
        return Err(Error::ShapeMismatch(
            "gradient buffer does not mirror the network".into(),
        ));
    }

    let layout = out.layout;
    let batch = out.batch;
    let stride = layout.count * batch;
    let mut g_out = cotangents.data.clone();

    for (i, layer) in net.layers().iter().enumerate().rev() {
        let (rows, cols) = (layer.rows(), layer.cols());
        let z = &tape.pre[i];
        let [s1, s2, s3] = &tape.sigma[i];
        let mut gz = vec![0.0; rows * stride];
        for u in 0..rows {
            let gu = &g_out[u * stride..(u + 1) * stride];
            let zu = &z[u * stride..(u + 1) * stride];
            let out = &mut gz[u * stride..(u + 1) * stride];
            let s1u = &s1[u * batch..(u + 1) * batch];
            let s2u = &s2[u * batch..(u + 1) * batch];
            let s3u = &s3[u * batch..(u + 1) * batch];
            for p in 0..batch {
                out[p] = gu[p] * s1u[p];
            }
            if let Some(ts) = layout.t {
                for p in 0..batch {
                    let gt = gu[ts * batch + p];
                    out[p] += gt * s2u[p] * zu[ts * batch + p];
                    out[ts * batch + p] = gt * s1u[p];
                }
            }
            if let Some(xs) = layout.x {
                for p in 0..batch {
                    let gx = gu[xs * batch + p];
                    out[p] += gx * s2u[p] * zu[xs * batch + p];
                    out[xs * batch + p] = gx * s1u[p];
                }
            }
            if let (Some(xs), Some(xxs)) = (layout.x, layout.xx) {
                for p in 0..batch {
                    let gxx = gu[xxs * batch + p];
                    let zx = zu[xs * batch + p];
                    let zxx = zu[xxs * batch + p];
                    out[p] += gxx * (s3u[p] * zx * zx + s2u[p] * zxx);
                    out[xs * batch + p] += 2.0 * gxx * s2u[p] * zx;
                    out[xxs * batch + p] = gxx * s1u[p];
                }
            }
        }

        let g = &mut grad.layers[i];
        let prev = tape.acts[i].stacked();
        // dW += gZ · Aᵀ over all channels and points
        gemm(
            1.0,
            MatRef::row_major(&gz, rows, stride),
            prev.t(),
            1.0,
            &mut g.weights,
        );
        for u in 0..rows {
            g.bias[u] += gz[u * stride..u * stride + batch].iter().sum::<f64>();
        }

        if i > 0 {
            let mut g_prev = vec![0.0; cols * stride];
            gemm(
                1.0,
                MatRef::row_major(&layer.weights, rows, cols).t(),
                MatRef::row_major(&gz, rows, stride),
                0.0,
                &mut g_prev,
            );
            g_out = g_prev;
        }
    }
    Ok(())
}
