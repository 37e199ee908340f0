use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 200;

/// Gauss–Hermite rule for `∫ f(s) e^{−s²} ds`, nodes in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

/// Orthonormal Hermite values `(p_n(z), p_{n-1}(z))` by the three-term
/// recurrence.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let j = j as f64;
        p1 = z * (2.0 / j).sqrt() * p2 - ((j - 1.0) / j).sqrt() * p3;
    }
    (p1, p2)
}

/// Nodes are found largest first: a downward scan brackets each sign change
/// of `H_n`, then safeguarded Newton iteration polishes the root.
pub fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::BadOrder(n));
    }
    let nf = n as f64;
    // Zeros lie below √(2n+1) and are at least about π/√(2n+1) apart.
    let top = (2.0 * nf + 1.0).sqrt();
    let step = 0.25 * std::f64::consts::PI / top;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut hi = top + 0.5;
    for i in 0..m {
        let sign_hi = hermite_pair(n, hi).0.signum();
        let mut lo = hi - step;
        while hermite_pair(n, lo).0.signum() == sign_hi {
            lo -= step;
            if lo < -top {
                return Err(Error::ConvergenceFailure { order: n, index: i });
            }
        }
        let mut z =
            newton_in_bracket(n, lo, hi).ok_or(Error::ConvergenceFailure { order: n, index: i })?;
        let (_, p2) = hermite_pair(n, z);
        let pp = (2.0 * nf).sqrt() * p2;
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
        hi = z - 1e-9 * step;
    }
    x.reverse();
    w.reverse();
    Ok(QuadratureRule {
        nodes: x,
        weights: w,
    })
}

/// Newton's method kept inside `[lo, hi]` by bisection.
fn newton_in_bracket(n: usize, mut lo: f64, mut hi: f64) -> Option<f64> {
    const MAX_ITER: usize = 200;
    let sign_lo = hermite_pair(n, lo).0.signum();
    let mut z = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (p1, p2) = hermite_pair(n, z);
        if p1 == 0.0 {
            return Some(z);
        }
        if p1.signum() == sign_lo {
            lo = z;
        } else {
            hi = z;
        }
        let newton = z - p1 / ((2.0 * n as f64).sqrt() * p2);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 3e-14 * z.abs().max(1.0) {
            return Some(next);
        }
        z = next;
    }
    None
}
