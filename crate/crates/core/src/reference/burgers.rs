use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::BURGERS_NU;

use super::field::{FieldMeta, FieldValues, ReferenceField};
use super::quadrature::{gauss_hermite, QuadratureRule};

pub const DEFAULT_N_QUAD: usize = 100;
/// Below this time the initial condition is returned.
pub const T_MIN: f64 = 1e-8;

/// Closed-form (Cole–Hopf) solution of the viscous Burgers problem.
pub fn burgers_exact(t: f64, x: f64, n_quad: usize) -> Result<f64> {
    let rule = gauss_hermite(n_quad)?;
    burgers_exact_with(&rule, t, x)
}

/// [`burgers_exact`] with a precomputed rule.
pub fn burgers_exact_with(rule: &QuadratureRule, t: f64, x: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    if !(-TOL..=1.0 + TOL).contains(&t) || !(-1.0 - TOL..=1.0 + TOL).contains(&x) {
        return Err(Error::DomainViolation {
            problem: "burgers",
            t,
            x,
        });
    }
    if t <= T_MIN {
        return Ok(-(PI * x).sin());
    }
    // η = 2√(νt)·s turns the heat kernel into the Hermite weight e^{−s²}.
    let scale = 2.0 * (BURGERS_NU * t).sqrt();
    let log_h = |y: f64| -(PI * y).cos() / (2.0 * PI * BURGERS_NU);
    let logs: Vec<f64> = rule.nodes.iter().map(|&s| log_h(x - scale * s)).collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&s, &w), &l) in rule.nodes.iter().zip(&rule.weights).zip(&logs) {
        let e = w * (l - shift).exp();
        num += (PI * (x - scale * s)).sin() * e;
        den += e;
    }
    let u = -num / den;
    if !u.is_finite() {
        return Err(Error::NonFiniteIntermediate("burgers quadrature"));
    }
    Ok(u)
}

/// The exact solution on the tensor grid `t × x`, evaluated in parallel.
pub fn burgers_exact_grid(t: &[f64], x: &[f64], n_quad: usize) -> Result<ReferenceField> {
    let rule = gauss_hermite(n_quad)?;
    let values = t
        .par_iter()
        .flat_map_iter(|&ti| x.iter().map(move |&xi| (ti, xi)))
        .map(|(ti, xi)| burgers_exact_with(&rule, ti, xi))
        .collect::<Result<Vec<_>>>()?;
    ReferenceField::new(
        t.to_vec(),
        x.to_vec(),
        FieldValues::Real(values),
        FieldMeta {
            method: "cole-hopf gauss-hermite".into(),
            resolution: n_quad,
            dt: 0.0,
        },
    )
}
