//! Pointwise activation functions together with their first three derivatives.

use std::fmt;
use std::str::FromStr;

/// Activation applied after a layer's affine map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

/// `(σ, σ', σ'', σ''')` evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActivationDerivs {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Activation {
    pub fn eval(self, z: f64) -> ActivationDerivs {
        match self {
            Activation::Identity => ActivationDerivs {
                value: z,
                d1: 1.0,
                d2: 0.0,
                d3: 0.0,
            },
            // Subgradient convention: σ'(0) = 0.
            Activation::Relu => ActivationDerivs {
                value: z.max(0.0),
                d1: if z > 0.0 { 1.0 } else { 0.0 },
                d2: 0.0,
                d3: 0.0,
            },
            Activation::Tanh => {
                let s = z.tanh();
                let d1 = 1.0 - s * s;
                let d2 = -2.0 * s * d1;
                let d3 = -2.0 * (d1 * d1 + s * d2);
                ActivationDerivs {
                    value: s,
                    d1,
                    d2,
                    d3,
                }
            }
        }
    }

    /// Whether the activation is smooth enough to carry second input
    /// derivatives (and their parameter gradients) through a layer.
    pub fn is_twice_differentiable(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    /// Tag used by the checkpoint format.
    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// Evaluator returning `(σ, σ', σ'', σ''')` for the given activation kind.
pub fn activation_table(kind: Activation) -> impl Fn(f64) -> (f64, f64, f64, f64) {
    move |z| {
        let d = kind.eval(z);
        (d.value, d.d1, d.d2, d.d3)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        })
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}
