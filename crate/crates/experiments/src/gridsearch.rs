//! Layer-by-layer search over the L1 weights, from the output layer back to
//! the input layer.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::runner::{run, RunReport};

fn default_validation_fraction() -> f64 {
    0.2
}

/// Candidate values and selection settings, read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    /// Candidate α values for each weight matrix, input layer first.
    pub candidates: Vec<Vec<f64>>,
    /// Maximum number of training runs.
    pub budget: usize,
    /// Weight of the nonzero fraction in the selection score.
    #[serde(default)]
    pub lambda: f64,
    /// Minimum mean zero percentage a candidate must reach, if any does.
    #[serde(default)]
    pub sparsity_floor: Option<f64>,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

impl SearchSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn total_runs(&self) -> usize {
        self.candidates.iter().map(Vec::len).sum()
    }
}

/// One training run of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub layer: usize,
    pub candidate: usize,
    pub value: f64,
    /// Full α vector of the run, space separated.
    pub alpha: String,
    pub validation_l2: f64,
    pub test_l2: f64,
    pub nonzero: usize,
    pub nonzero_fraction: f64,
    pub mean_zero_percent: f64,
    pub score: f64,
    pub selected: bool,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best: RunConfig,
    pub trace: Vec<TraceRow>,
    pub trace_path: PathBuf,
}

fn alpha_string(a: &[f64]) -> String {
    a.iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Picks the index of the lowest score among candidates meeting the
/// sparsity floor, or among all candidates when none does. Ties go to the
/// earlier candidate.
pub fn select(rows: &[TraceRow], floor: Option<f64>) -> usize {
    let pick = |admissible: &dyn Fn(&TraceRow) -> bool| {
        rows.iter()
            .enumerate()
            .filter(|(_, r)| admissible(r))
            .fold(None, |best: Option<(usize, f64)>, (i, r)| match best {
                Some((_, s)) if s <= r.score => best,
                _ => Some((i, r.score)),
            })
            .map(|(i, _)| i)
    };
    floor
        .and_then(|f| pick(&|r: &TraceRow| r.mean_zero_percent >= f))
        .or_else(|| pick(&|_: &TraceRow| true))
        .expect("candidate lists are nonempty")
}

/// Sweeps the layers from the output back to the input. Layers not yet
/// visited keep their α from `base`; every run uses the base seed.
pub fn grid_search(base: &RunConfig, search: &SearchSpec) -> Result<SearchResult> {
    let depth = base.depth();
    if search.candidates.len() != depth {
        return Err(Error::Config(format!(
            "candidate lists for {} layers, the network has {depth}",
            search.candidates.len()
        )));
    }
    if search.candidates.iter().any(Vec::is_empty) {
        return Err(Error::Config(
            "every layer needs at least one candidate".into(),
        ));
    }
    if search
        .candidates
        .iter()
        .flatten()
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(Error::Config(
            "candidates must be finite and nonnegative".into(),
        ));
    }
    let needed = search.total_runs();
    if needed > search.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: search.budget,
        });
    }
    if !(search.lambda.is_finite() && search.lambda >= 0.0) {
        return Err(Error::Config(
            "lambda must be finite and nonnegative".into(),
        ));
    }
    if !(search.validation_fraction > 0.0 && search.validation_fraction <= 0.9) {
        return Err(Error::Config(
            "validation_fraction must lie in (0, 0.9]".into(),
        ));
    }

    let root = base.resolved_output_dir().join("gridsearch");
    std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    let mut alpha = base.alpha_vec();
    let mut trace = Vec::with_capacity(needed);
    for layer in (0..depth).rev() {
        let configs: Vec<RunConfig> = search.candidates[layer]
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut c = base.clone();
                let mut a = alpha.clone();
                a[layer] = v;
                c.alpha = Some(a);
                c.validation_fraction = search.validation_fraction;
                c.output_dir = Some(root.join(format!("layer{}_cand{j}", layer + 1)));
                c
            })
            .collect();
        let reports: Vec<RunReport> = configs.par_iter().map(run).collect::<Result<Vec<_>>>()?;
        let mut rows: Vec<TraceRow> = reports
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let validation_l2 = r.validation_l2.expect("validation split is set");
                let frac = r.nonzero as f64 / r.sparsity.total_weights as f64;
                TraceRow {
                    step: trace.len() + j,
                    layer: layer + 1,
                    candidate: j,
                    value: search.candidates[layer][j],
                    alpha: alpha_string(r.config.alpha.as_deref().unwrap_or(&[])),
                    validation_l2,
                    test_l2: r.relative_l2,
                    nonzero: r.nonzero,
                    nonzero_fraction: frac,
                    mean_zero_percent: r.sparsity.mean_zero_percent,
                    score: validation_l2 + search.lambda * frac,
                    selected: false,
                }
            })
            .collect();
        let chosen = select(&rows, search.sparsity_floor);
        rows[chosen].selected = true;
        alpha[layer] = search.candidates[layer][chosen];
        trace.extend(rows);
    }

    let trace_path = root.join("trace.csv");
    let mut w = csv::Writer::from_path(&trace_path)?;
    for row in &trace {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&trace_path, e))?;

    let mut best = base.clone();
    best.alpha = Some(alpha);
    std::fs::write(root.join("best.toml"), best.to_toml())
        .map_err(|e| Error::io(root.join("best.toml"), e))?;
    Ok(SearchResult {
        best,
        trace,
        trace_path,
    })
}
