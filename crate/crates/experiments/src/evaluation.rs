//! Test sets, reference values and the error/sparsity evaluation of a
//! trained network.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use sdnn_core::reference::{
    burgers_exact_with, fft, gauss_hermite, nls_solve_with, NlsOptions, ReferenceField, DEFAULT_DT,
    DEFAULT_MODES, DEFAULT_N_QUAD, NLS_X_MAX, NLS_X_MIN,
};
use sdnn_core::{
    relative_l2, sparsity_report, threshold, uniform_grid, Checkpoint, DomainBox, Mlp, ProblemKind,
    SparsityReport,
};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::targets::Target;

/// Points of the Schrödinger test grid along `x`.
pub const NLS_TEST_NX: usize = 256;
/// Times `kπ/400`, `k = 1..=200`, of the Schrödinger test grid.
pub const NLS_TEST_NT: usize = 200;

fn default_epsilon() -> f64 {
    sdnn_core::DEFAULT_EPSILON
}
fn default_n_quad() -> usize {
    DEFAULT_N_QUAD
}
fn default_nls_modes() -> usize {
    DEFAULT_MODES
}

/// Where and against what a trained network is scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSpec {
    #[serde(with = "crate::config::text")]
    pub problem: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_lo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_hi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_step: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon_threshold: f64,
    #[serde(default = "default_n_quad")]
    pub n_quad: usize,
    #[serde(default = "default_nls_modes")]
    pub nls_modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nls_dt: Option<f64>,
    /// Precomputed reference field (binary grid format) to score against
    /// instead of computing one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

impl TestSpec {
    pub fn from_run(cfg: &RunConfig) -> Self {
        TestSpec {
            problem: cfg.problem,
            target: cfg.target.clone(),
            test_lo: cfg.test_lo.clone(),
            test_hi: cfg.test_hi.clone(),
            test_step: cfg.test_step.clone(),
            epsilon_threshold: cfg.epsilon_threshold,
            n_quad: cfg.n_quad,
            nls_modes: cfg.nls_modes,
            nls_dt: cfg.nls_dt,
            reference: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("test spec serializes")
    }
}

/// Inputs (point-major) with the scalar reference value at each point.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub dim: usize,
    pub inputs: Vec<f64>,
    pub reference: Vec<f64>,
}

impl Labeled {
    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }
}

/// Scalar network output per point: the value itself, or `√(ψ²+φ²)` for
/// two-output networks.
pub fn net_scalars(net: &Mlp, inputs: &[f64]) -> Result<Vec<f64>> {
    let out = net.predict(inputs)?;
    Ok(match net.output_dim() {
        1 => out,
        _ => out.chunks(2).map(|p| p[0].hypot(p[1])).collect(),
    })
}

pub fn labeled_error(net: &Mlp, set: &Labeled) -> Result<f64> {
    Ok(relative_l2(
        &set.reference,
        &net_scalars(net, &set.inputs)?,
    )?)
}

/// Values of the NLS reference at arbitrary `(t, x)` points, by stepping to
/// every distinct time and evaluating the trigonometric interpolant.
pub fn nls_reference_at(points: &[f64], n_modes: usize, dt: f64) -> Result<Vec<f64>> {
    let mut times: Vec<f64> = points.chunks(2).map(|p| p[0]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let t_end = times.last().copied().unwrap_or(0.0);
    let sol = nls_solve_with(&NlsOptions::new(n_modes, dt, t_end, times.clone()))?;
    let sdnn_core::reference::FieldValues::Complex(vals) = sol.field.values() else {
        unreachable!("spectral field is complex");
    };
    let spectra: Vec<Vec<Complex64>> = vals
        .chunks(n_modes)
        .map(|row| {
            let u: Vec<Complex64> = row.iter().map(|v| Complex64::new(v[0], v[1])).collect();
            fft(&u, false)
        })
        .collect::<std::result::Result<_, _>>()?;
    points
        .chunks(2)
        .map(|p| {
            let it = times
                .binary_search_by(|t| t.total_cmp(&p[0]))
                .expect("time was recorded");
            Ok(interpolate(&spectra[it], p[1]).norm())
        })
        .collect()
}

/// Trigonometric interpolant of a periodic grid function on `[−5, 5)` at
/// `x`, from its unnormalized DFT. The Nyquist mode enters as a cosine.
fn interpolate(spectrum: &[Complex64], x: f64) -> Complex64 {
    let n = spectrum.len();
    let theta = 2.0 * PI * (x - NLS_X_MIN) / (NLS_X_MAX - NLS_X_MIN);
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, c) in spectrum.iter().enumerate() {
        if 2 * k == n {
            sum += c * (k as f64 * theta).cos();
        } else {
            let idx = if 2 * k < n {
                k as f64
            } else {
                k as f64 - n as f64
            };
            sum += c * Complex64::from_polar(1.0, idx * theta);
        }
    }
    sum / n as f64
}

/// Burgers reference at arbitrary points.
pub fn burgers_reference_at(points: &[f64], n_quad: usize) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let rule = gauss_hermite(n_quad)?;
    Ok(points
        .par_chunks(2)
        .map(|p| burgers_exact_with(&rule, p[0], p[1]))
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Default Schrödinger test grid: `t = kπ/400`, `x = −5 + 10j/256`.
pub fn nls_test_points() -> Vec<f64> {
    let dx = (NLS_X_MAX - NLS_X_MIN) / NLS_TEST_NX as f64;
    (1..=NLS_TEST_NT)
        .flat_map(|k| {
            let t = k as f64 * PI / 400.0;
            (0..NLS_TEST_NX).flat_map(move |j| [t, NLS_X_MIN + j as f64 * dx])
        })
        .collect()
}

fn grid(lo: &[f64], hi: &[f64], step: &[f64]) -> Result<Vec<f64>> {
    let dom = DomainBox::new(lo.to_vec(), hi.to_vec())?;
    Ok(uniform_grid(&dom, step)?.coords().to_vec())
}

/// The labeled test set a spec describes.
pub fn test_set(spec: &TestSpec) -> Result<Labeled> {
    if let Some(path) = &spec.reference {
        return reference_file_set(spec, path);
    }
    match spec.problem {
        ProblemKind::Regression => {
            let target = spec
                .target
                .as_deref()
                .map(Target::parse)
                .transpose()?
                .ok_or_else(|| {
                    Error::MissingReference("regression test spec has no target".into())
                })?;
            let (lo, hi, step) = if spec.test_lo.is_empty() {
                let (lo, hi) = target
                    .natural_box()
                    .ok_or_else(|| Error::Config("regression test grid is not set".into()))?;
                let step = vec![1.0; lo.len()];
                (lo, hi, step)
            } else {
                (
                    spec.test_lo.clone(),
                    spec.test_hi.clone(),
                    spec.test_step.clone(),
                )
            };
            let inputs = grid(&lo, &hi, &step)?;
            let reference = target.eval_all(&inputs);
            Ok(Labeled {
                dim: target.input_dim(),
                inputs,
                reference,
            })
        }
        ProblemKind::Burgers => {
            let inputs = if spec.test_lo.is_empty() {
                grid(&[0.0, -1.0], &[1.0, 1.0], &[0.01, 2.0 / 255.0])?
            } else {
                grid(&spec.test_lo, &spec.test_hi, &spec.test_step)?
            };
            let reference = burgers_reference_at(&inputs, spec.n_quad)?;
            Ok(Labeled {
                dim: 2,
                inputs,
                reference,
            })
        }
        ProblemKind::Schrodinger => {
            let inputs = nls_test_points();
            let reference =
                nls_reference_at(&inputs, spec.nls_modes, spec.nls_dt.unwrap_or(DEFAULT_DT))?;
            Ok(Labeled {
                dim: 2,
                inputs,
                reference,
            })
        }
    }
}

fn reference_file_set(spec: &TestSpec, path: &Path) -> Result<Labeled> {
    if spec.problem == ProblemKind::Regression {
        return Err(Error::Config(
            "reference files hold PDE fields; regression uses its target".into(),
        ));
    }
    if !path.exists() {
        return Err(Error::MissingReference(format!(
            "reference field {} does not exist",
            path.display()
        )));
    }
    let field = ReferenceField::load(path)?;
    let want_complex = spec.problem == ProblemKind::Schrodinger;
    if field.is_complex() != want_complex {
        return Err(Error::MissingReference(format!(
            "reference field {} does not hold {} values",
            path.display(),
            spec.problem
        )));
    }
    Ok(Labeled {
        dim: 2,
        inputs: field.points(),
        reference: field.scalars(),
    })
}

/// Scores of one network on one test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Error of the network after thresholding at ε.
    pub relative_l2: f64,
    /// Error of the network as trained.
    pub relative_l2_raw: f64,
    pub sparsity: SparsityReport,
}

pub fn evaluate_net(net: &Mlp, set: &Labeled, epsilon: f64) -> Result<Evaluation> {
    let sparse = threshold(net, epsilon);
    Ok(Evaluation {
        relative_l2: labeled_error(&sparse, set)?,
        relative_l2_raw: labeled_error(net, set)?,
        sparsity: sparsity_report(net, epsilon),
    })
}

/// Relative L2 error of the thresholded network in `checkpoint` on the test
/// set of `spec`, with its sparsity statistics.
pub fn evaluate(checkpoint: &Path, spec: &TestSpec) -> Result<(f64, SparsityReport)> {
    let ck = Checkpoint::load(checkpoint)?;
    let set = test_set(spec)?;
    let e = evaluate_net(&ck.net, &set, spec.epsilon_threshold)?;
    Ok((e.relative_l2, e.sparsity))
}
