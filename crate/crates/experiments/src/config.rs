//! Run configuration: a flat TOML table whose keys are exactly the fields of
//! [`RunConfig`]. Unknown keys are rejected.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use sdnn_core::reference::{DEFAULT_DT, DEFAULT_MODES, DEFAULT_N_QUAD};
use sdnn_core::{
    Activation, AdamConfig, LossPower, LossPowers, LrSchedule, PenaltyMode, ProblemKind, RegSpec,
};

use crate::error::{Error, Result};
use crate::targets::Target;

/// Directory that relative output paths are resolved against.
pub const OUTPUT_ROOT_VAR: &str = "SDNN_OUTPUT_ROOT";

pub(crate) mod text {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(
        v: &T,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }

    pub mod opt {
        use super::*;

        pub fn serialize<T: Display, S: Serializer>(
            v: &Option<T>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.collect_str(v),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<Option<T>, D::Error>
        where
            T: FromStr,
            T::Err: Display,
            D: Deserializer<'de>,
        {
            Option::<String>::deserialize(d)?
                .map(|s| s.parse().map_err(de::Error::custom))
                .transpose()
        }
    }
}

fn default_lr() -> f64 {
    1e-3
}
fn default_decay_factor() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    sdnn_core::DEFAULT_EPSILON
}
fn default_log_interval() -> usize {
    100
}
fn default_n_quad() -> usize {
    DEFAULT_N_QUAD
}
fn default_nls_modes() -> usize {
    DEFAULT_MODES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "text")]
    pub problem: ProblemKind,
    /// Regression target: `square`, `jump_square`, `abs`, `exp2d`,
    /// `jump_exp2d` or `image:<path>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub widths: Vec<usize>,
    /// Hidden activation; ReLU for regression and tanh for PDEs when absent.
    #[serde(default, with = "text::opt", skip_serializing_if = "Option::is_none")]
    pub activation: Option<Activation>,
    #[serde(default)]
    pub seed: u64,
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Halve (by `lr_decay_factor`) every this many epochs; 0 keeps it constant.
    #[serde(default)]
    pub lr_decay_every: usize,
    #[serde(default = "default_decay_factor")]
    pub lr_decay_factor: f64,
    /// Mini-batch size for regression; 0 means full batch.
    #[serde(default)]
    pub batch_size: usize,
    /// One weight per weight matrix; all zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon_threshold: f64,
    #[serde(default)]
    pub prox_mode: bool,
    /// Epochs without validation improvement before stopping; 0 disables.
    #[serde(default)]
    pub early_stop_patience: usize,
    /// Share of the training points held out for validation.
    #[serde(default)]
    pub validation_fraction: f64,
    #[serde(default = "default_log_interval")]
    pub log_interval: usize,

    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_lo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_hi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_step: Vec<f64>,
    /// Random subset of the training grid to use; 0 keeps the whole grid.
    #[serde(default)]
    pub train_samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_lo: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_hi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_step: Vec<f64>,

    /// Interior collocation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_f: Option<usize>,
    /// Initial points, or the initial candidate pool when `n_total > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_0: Option<usize>,
    /// Boundary points (per side for Dirichlet data), or the per-side pool
    /// when `n_total > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    /// Draw this many points from the pooled initial and boundary candidates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_power_pde: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_power_initial: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_power_boundary: Option<u32>,

    #[serde(default = "default_n_quad")]
    pub n_quad: usize,
    #[serde(default = "default_nls_modes")]
    pub nls_modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nls_dt: Option<f64>,

    /// Relative paths are resolved against `$SDNN_OUTPUT_ROOT` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Sampling counts after per-problem defaults are applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub n_f: usize,
    pub n_0: usize,
    pub n_b: usize,
    pub n_total: usize,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn depth(&self) -> usize {
        self.widths.len().saturating_sub(1)
    }

    pub fn alpha_vec(&self) -> Vec<f64> {
        self.alpha
            .clone()
            .unwrap_or_else(|| vec![0.0; self.depth()])
    }

    pub fn reg(&self) -> Result<RegSpec> {
        Ok(RegSpec::new(self.alpha_vec())?)
    }

    pub fn beta_value(&self) -> f64 {
        self.beta.unwrap_or_else(|| self.problem.default_beta())
    }

    pub fn activation_value(&self) -> Activation {
        self.activation.unwrap_or(match self.problem {
            ProblemKind::Regression => Activation::Relu,
            _ => Activation::Tanh,
        })
    }

    pub fn powers(&self) -> LossPowers {
        let d = self.problem.default_powers();
        let pick =
            |p: Option<u32>, dflt: LossPower| p.and_then(LossPower::from_exponent).unwrap_or(dflt);
        LossPowers {
            pde: pick(self.loss_power_pde, d.pde),
            initial: pick(self.loss_power_initial, d.initial),
            boundary: pick(self.loss_power_boundary, d.boundary),
        }
    }

    pub fn adam_config(&self) -> AdamConfig {
        let schedule = if self.lr_decay_every == 0 {
            LrSchedule::Constant
        } else {
            LrSchedule::StepDecay {
                factor: self.lr_decay_factor,
                every: self.lr_decay_every,
            }
        };
        AdamConfig {
            lr: self.lr,
            schedule,
            ..AdamConfig::default()
        }
    }

    pub fn penalty_mode(&self) -> PenaltyMode {
        if self.prox_mode {
            PenaltyMode::Proximal
        } else {
            PenaltyMode::Subgradient
        }
    }

    pub fn nls_dt_value(&self) -> f64 {
        self.nls_dt.unwrap_or(DEFAULT_DT)
    }

    pub fn counts(&self) -> Counts {
        let (f, z, b, tot) = match self.problem {
            ProblemKind::Regression => (0, 0, 0, 0),
            ProblemKind::Burgers => (10_000, 256, 100, 100),
            ProblemKind::Schrodinger => (20_000, 50, 50, 0),
        };
        Counts {
            n_f: self.n_f.unwrap_or(f),
            n_0: self.n_0.unwrap_or(z),
            n_b: self.n_b.unwrap_or(b),
            n_total: self.n_total.unwrap_or(tot),
        }
    }

    pub fn target_value(&self) -> Result<Option<Target>> {
        self.target.as_deref().map(Target::parse).transpose()
    }

    /// Output directory with relative paths placed under the output root.
    pub fn resolved_output_dir(&self) -> PathBuf {
        let dir = self
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}-seed{}", self.problem, self.seed)));
        resolve_output(&dir)
    }

    pub fn validate(&self) -> Result<()> {
        let depth = self.depth();
        if self.widths.len() < 2 || self.widths.contains(&0) {
            return Err(bad(format!(
                "widths {:?} need ≥ 2 positive entries",
                self.widths
            )));
        }
        if self.widths.iter().any(|&w| w > 4096) {
            return Err(bad("layer widths are limited to 4096"));
        }
        if let Some(a) = &self.alpha {
            if a.len() != depth {
                return Err(bad(format!(
                    "alpha has {} entries, the network has {depth} weight matrices",
                    a.len()
                )));
            }
            if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(bad("alpha entries must be finite and nonnegative"));
            }
        }
        if self.epochs > 10_000_000 {
            return Err(bad("epochs must be at most 1e7"));
        }
        if !(self.lr > 0.0 && self.lr <= 1.0) {
            return Err(bad("lr must lie in (0, 1]"));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return Err(bad("lr_decay_factor must lie in (0, 1]"));
        }
        if let Some(b) = self.beta {
            if !(b.is_finite() && b >= 0.0) {
                return Err(bad("beta must be finite and nonnegative"));
            }
        }
        if !(self.epsilon_threshold.is_finite() && self.epsilon_threshold >= 0.0) {
            return Err(bad("epsilon_threshold must be finite and nonnegative"));
        }
        if self.log_interval == 0 {
            return Err(bad("log_interval must be positive"));
        }
        if !(0.0..=0.9).contains(&self.validation_fraction) {
            return Err(bad("validation_fraction must lie in [0, 0.9]"));
        }
        if !(1..=200).contains(&self.n_quad) {
            return Err(bad("n_quad must lie in 1..=200"));
        }
        if !self.nls_modes.is_power_of_two() || self.nls_modes < 8 {
            return Err(bad("nls_modes must be a power of two ≥ 8"));
        }
        if let Some(dt) = self.nls_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(bad("nls_dt must be positive"));
            }
        }
        for p in [
            self.loss_power_pde,
            self.loss_power_initial,
            self.loss_power_boundary,
        ]
        .into_iter()
        .flatten()
        {
            if LossPower::from_exponent(p).is_none() {
                return Err(bad(format!("loss powers must be 1 or 2, got {p}")));
            }
        }
        for (name, v) in [
            ("train_step", &self.train_step),
            ("test_step", &self.test_step),
        ] {
            if v.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(bad(format!("{name} entries must be positive")));
            }
        }
        match self.problem {
            ProblemKind::Regression => self.validate_regression(),
            _ => self.validate_pinn(),
        }
    }

    fn validate_regression(&self) -> Result<()> {
        let target = self
            .target_value()?
            .ok_or_else(|| bad("regression needs a target"))?;
        let dim = target.input_dim();
        if self.widths[0] != dim || self.widths[self.depth()] != 1 {
            return Err(bad(format!(
                "target {target} needs widths [{dim}, …, 1], got {:?}",
                self.widths
            )));
        }
        let natural = target.natural_box().is_some();
        for (name, v, may_be_empty) in [
            ("train_lo", &self.train_lo, natural),
            ("train_hi", &self.train_hi, natural),
            ("train_step", &self.train_step, natural),
            ("test_lo", &self.test_lo, natural),
            ("test_hi", &self.test_hi, natural),
            ("test_step", &self.test_step, natural),
        ] {
            if !(v.len() == dim || v.is_empty() && may_be_empty) {
                return Err(bad(format!("{name} must have {dim} entries")));
            }
        }
        if self.n_f.is_some() || self.n_0.is_some() || self.n_b.is_some() || self.n_total.is_some()
        {
            return Err(bad("collocation counts apply to PDE problems only"));
        }
        Ok(())
    }

    fn validate_pinn(&self) -> Result<()> {
        let kind = self.problem;
        let out = kind.output_dim().expect("pde problem");
        if self.widths[0] != 2 || self.widths[self.depth()] != out {
            return Err(bad(format!(
                "{kind} needs widths [2, …, {out}], got {:?}",
                self.widths
            )));
        }
        if !self.activation_value().is_twice_differentiable() {
            return Err(bad(format!(
                "{kind} needs a twice differentiable activation"
            )));
        }
        if self.target.is_some() {
            return Err(bad("target applies to regression only"));
        }
        if self.batch_size != 0 {
            return Err(bad(
                "PDE losses are trained full batch; batch_size must be 0",
            ));
        }
        if self.train_samples != 0
            || !self.train_lo.is_empty()
            || !self.train_hi.is_empty()
            || !self.train_step.is_empty()
        {
            return Err(bad("training grids apply to regression only"));
        }
        let c = self.counts();
        if c.n_f == 0 {
            return Err(bad("n_f must be positive"));
        }
        if c.n_total > 0 {
            let pool = c.n_0 + 2 * c.n_b;
            if kind == ProblemKind::Schrodinger {
                return Err(bad("n_total pooling applies to Dirichlet boundaries only"));
            }
            if c.n_total > pool {
                return Err(bad(format!(
                    "n_total = {} exceeds the candidate pool of {pool}",
                    c.n_total
                )));
            }
        } else if c.n_0 == 0 || c.n_b == 0 {
            return Err(bad("n_0 and n_b must be positive"));
        }
        match kind {
            ProblemKind::Burgers => {
                let test = [&self.test_lo, &self.test_hi, &self.test_step];
                if test.iter().any(|v| !v.is_empty()) {
                    if test.iter().any(|v| v.len() != 2) {
                        return Err(bad("Burgers test grid keys need 2 entries each"));
                    }
                    let (t0, t1, x0, x1) = kind.bounds().expect("pde bounds");
                    let inside = |lo: f64, hi: f64, a: f64, b: f64| a >= lo && b <= hi && a < b;
                    if !inside(t0, t1, self.test_lo[0], self.test_hi[0])
                        || !inside(x0, x1, self.test_lo[1], self.test_hi[1])
                    {
                        return Err(bad("Burgers test grid leaves the domain"));
                    }
                }
            }
            _ => {
                if !(self.test_lo.is_empty()
                    && self.test_hi.is_empty()
                    && self.test_step.is_empty())
                {
                    return Err(bad(
                        "the Schrödinger test grid is the spectral grid and cannot be set",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fields that must agree between two configs for them to be compared.
    pub fn differing_field(&self, other: &RunConfig) -> Option<String> {
        let strip = |c: &RunConfig| {
            let mut c = c.clone();
            c.alpha = None;
            c.output_dir = None;
            toml::Table::try_from(c).expect("run config serializes")
        };
        let (a, b) = (strip(self), strip(other));
        let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .find(|k| a.get(*k) != b.get(*k))
            .map(|k| k.to_string())
    }
}

pub fn resolve_output(dir: &Path) -> PathBuf {
    if dir.is_absolute() {
        return dir.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) => PathBuf::from(root).join(dir),
        None => dir.to_path_buf(),
    }
}
