//! One training run: sample data, train with Adam on the regularized
//! objective, log metrics, checkpoint and score the result.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use sdnn_core::sampling::rng_stream;
use sdnn_core::{
    evaluate as eval_loss, latin_hypercube, linspace, loss_value, regularized_step,
    split_boundary_initial, uniform_grid, AdamMoments, AdamState, BoundaryData, Checkpoint,
    DomainBox, GradMode, LossBreakdown, Mlp, PinnData, PointSet, ProblemData, ProblemKind,
    ProblemSpec, SparsityReport,
};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    burgers_reference_at, evaluate_net, labeled_error, nls_reference_at, test_set, Evaluation,
    Labeled, TestSpec,
};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const TEST_SPEC_FILE: &str = "test_spec.toml";

/// Independent seed for one purpose, derived from the run seed (SplitMix64).
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut z = seed ^ purpose.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SEED_INTERIOR: u64 = 1;
const SEED_EDGES: u64 = 2;
const SEED_VALIDATION: u64 = 3;
const SEED_BATCHES: u64 = 4;
const SEED_SUBSAMPLE: u64 = 5;

/// Training problem plus the held-out validation points.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub spec: ProblemSpec,
    pub validation: Option<Labeled>,
}

fn split_off(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let n_val = ((n as f64) * fraction).round() as usize;
    let n_val = n_val.min(n.saturating_sub(1));
    if n_val == 0 {
        return ((0..n).collect(), Vec::new());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_stream(derive_seed(seed, SEED_VALIDATION), 0));
    let mut val = idx[..n_val].to_vec();
    let mut train = idx[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

/// Builds the training problem and validation set described by `cfg`.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    match cfg.problem {
        ProblemKind::Regression => prepare_regression(cfg),
        _ => prepare_pinn(cfg),
    }
}

fn prepare_regression(cfg: &RunConfig) -> Result<Prepared> {
    let target = cfg.target_value()?.expect("validated");
    let (lo, hi, step) = if cfg.train_lo.is_empty() {
        let (lo, hi) = target.natural_box().expect("validated");
        let step = vec![1.0; lo.len()];
        (lo, hi, step)
    } else {
        (
            cfg.train_lo.clone(),
            cfg.train_hi.clone(),
            cfg.train_step.clone(),
        )
    };
    let mut points = uniform_grid(&DomainBox::new(lo, hi)?, &step)?;
    if cfg.train_samples > 0 && cfg.train_samples < points.len() {
        let mut rng = rng_stream(derive_seed(cfg.seed, SEED_SUBSAMPLE), 0);
        let mut pick =
            rand::seq::index::sample(&mut rng, points.len(), cfg.train_samples).into_vec();
        pick.sort_unstable();
        points = points.select(&pick);
    }
    let (train, val) = split_off(points.len(), cfg.validation_fraction, cfg.seed);
    let validation = (!val.is_empty()).then(|| {
        let v = points.select(&val);
        Labeled {
            dim: v.dim(),
            reference: target.eval_all(v.coords()),
            inputs: v.coords().to_vec(),
        }
    });
    let points = points.select(&train);
    let targets = target.eval_all(points.coords());
    Ok(Prepared {
        spec: ProblemSpec::regression(points, targets, cfg.reg()?),
        validation,
    })
}

fn lhs_1d(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(
        latin_hypercube(n, &DomainBox::new(vec![lo], vec![hi])?, seed)?
            .coords()
            .to_vec(),
    )
}

fn prepare_pinn(cfg: &RunConfig) -> Result<Prepared> {
    let kind = cfg.problem;
    let (t0, t1, x0, x1) = kind.bounds().expect("pde problem");
    let c = cfg.counts();
    let domain = kind.domain().expect("pde problem");
    let interior = latin_hypercube(c.n_f, &domain, derive_seed(cfg.seed, SEED_INTERIOR))?;
    let edge_seed = derive_seed(cfg.seed, SEED_EDGES);

    let (initial_x, boundary) = if c.n_total > 0 {
        let pools = [
            linspace(x0, x1, c.n_0),
            linspace(t0, t1, c.n_b),
            linspace(t0, t1, c.n_b),
        ];
        let mut chosen = split_boundary_initial(&pools, c.n_total, edge_seed)?;
        let upper_t = chosen.pop().expect("three pools");
        let lower_t = chosen.pop().expect("three pools");
        let initial_x = chosen.pop().expect("three pools");
        (initial_x, BoundaryData::Dirichlet { lower_t, upper_t })
    } else {
        let initial_x = lhs_1d(c.n_0, x0, x1, edge_seed)?;
        let boundary = match kind {
            ProblemKind::Burgers => BoundaryData::Dirichlet {
                lower_t: lhs_1d(c.n_b, t0, t1, derive_seed(edge_seed, 1))?,
                upper_t: lhs_1d(c.n_b, t0, t1, derive_seed(edge_seed, 2))?,
            },
            _ => BoundaryData::Periodic {
                t: lhs_1d(c.n_b, t0, t1, derive_seed(edge_seed, 1))?,
            },
        };
        (initial_x, boundary)
    };

    let (train, val) = split_off(interior.len(), cfg.validation_fraction, cfg.seed);
    let validation = if val.is_empty() {
        None
    } else {
        let inputs = interior.select(&val).coords().to_vec();
        let reference = match kind {
            ProblemKind::Burgers => burgers_reference_at(&inputs, cfg.n_quad)?,
            _ => nls_reference_at(&inputs, cfg.nls_modes, cfg.nls_dt_value())?,
        };
        Some(Labeled {
            dim: 2,
            inputs,
            reference,
        })
    };
    let data = PinnData {
        interior: interior.select(&train),
        initial_x,
        boundary,
    };
    let spec = match kind {
        ProblemKind::Burgers => ProblemSpec::burgers(data, cfg.reg()?),
        _ => ProblemSpec::schrodinger(data, cfg.reg()?),
    }
    .with_beta(cfg.beta_value())
    .with_powers(cfg.powers());
    Ok(Prepared { spec, validation })
}

/// One metrics row: the loss terms after `epoch` optimizer epochs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss_pde: f64,
    pub loss_0: f64,
    pub loss_b: f64,
    pub loss_reg: f64,
    pub total: f64,
}

impl HistoryRow {
    fn new(epoch: usize, b: &LossBreakdown) -> Self {
        HistoryRow {
            epoch,
            loss_pde: b.loss_pde,
            loss_0: b.loss_0,
            loss_b: b.loss_b,
            loss_reg: b.loss_reg,
            total: b.total,
        }
    }
}

/// Result of the optimization loop alone.
#[derive(Clone, Debug)]
pub struct Trained {
    pub net: Mlp,
    pub state: AdamState,
    pub history: Vec<HistoryRow>,
    pub epochs_run: usize,
    pub stopped_early: bool,
}

fn finite(b: LossBreakdown, epoch: usize) -> Result<LossBreakdown> {
    if b.is_finite() {
        Ok(b)
    } else {
        Err(Error::NanLoss { epoch })
    }
}

/// Runs the optimizer for `cfg.epochs` epochs on `prep`, starting from the
/// seeded initialization.
pub fn train(cfg: &RunConfig, prep: &Prepared) -> Result<Trained> {
    let net = Mlp::init(&cfg.widths, cfg.activation_value(), cfg.seed)?;
    train_from(cfg, prep, net)
}

pub fn train_from(cfg: &RunConfig, prep: &Prepared, mut net: Mlp) -> Result<Trained> {
    let spec = &prep.spec;
    let reg = &spec.reg;
    let mode = cfg.penalty_mode();
    let mut state = AdamState::new(&net, cfg.adam_config());
    let mut history = Vec::new();
    let log = cfg.log_interval;

    let batches = match &spec.data {
        ProblemData::Regression(d) if cfg.batch_size > 0 && cfg.batch_size < d.points.len() => {
            Some(d)
        }
        _ => None,
    };
    let mut batch_rng = rng_stream(derive_seed(cfg.seed, SEED_BATCHES), 0);
    let mut order: Vec<usize> = batches.map_or(Vec::new(), |d| (0..d.points.len()).collect());

    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut epoch = 0;
    let mut stopped_early = false;
    while epoch < cfg.epochs {
        state.epoch = epoch;
        match batches {
            None => {
                let (b, g) = eval_loss(&net, spec, GradMode::Data)?;
                let b = finite(b, epoch)?;
                if epoch % log == 0 {
                    history.push(HistoryRow::new(epoch, &b));
                }
                let g = g.expect("gradient requested");
                regularized_step(&mut net, &g, reg, mode, &mut state)?;
            }
            Some(d) => {
                if epoch % log == 0 {
                    let b = finite(loss_value(&net, spec)?, epoch)?;
                    history.push(HistoryRow::new(epoch, &b));
                }
                order.shuffle(&mut batch_rng);
                for chunk in order.chunks(cfg.batch_size) {
                    let mut idx = chunk.to_vec();
                    idx.sort_unstable();
                    let pts: PointSet = d.points.select(&idx);
                    let targets = idx.iter().map(|&i| d.targets[i]).collect();
                    let batch = ProblemSpec::regression(pts, targets, reg.clone());
                    let (b, g) = eval_loss(&net, &batch, GradMode::Data)?;
                    finite(b, epoch)?;
                    let g = g.expect("gradient requested");
                    regularized_step(&mut net, &g, reg, mode, &mut state)?;
                }
            }
        }
        epoch += 1;

        if cfg.early_stop_patience > 0 {
            let score = match &prep.validation {
                Some(v) => labeled_error(&net, v)?,
                None => loss_value(&net, spec)?.total,
            };
            if score < best {
                best = score;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.early_stop_patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }
    if epoch % log == 0 {
        let b = finite(loss_value(&net, spec)?, epoch)?;
        history.push(HistoryRow::new(epoch, &b));
    }
    state.epoch = epoch;
    Ok(Trained {
        net,
        state,
        history,
        epochs_run: epoch,
        stopped_early,
    })
}

/// Sparsity statistics in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsitySummary {
    pub epsilon: f64,
    pub zero_percent: Vec<f64>,
    pub nonzero: Vec<usize>,
    pub total_nonzero: usize,
    pub total_weights: usize,
    pub mean_zero_percent: f64,
    pub mean_hidden_zero_percent: f64,
}

impl From<&SparsityReport> for SparsitySummary {
    fn from(r: &SparsityReport) -> Self {
        SparsitySummary {
            epsilon: r.epsilon,
            zero_percent: r.zero_percent.clone(),
            nonzero: r.nonzero.clone(),
            total_nonzero: r.total_nonzero,
            total_weights: r.total_weights,
            mean_zero_percent: r.mean_zero_percent(),
            mean_hidden_zero_percent: r.mean_hidden_zero_percent(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Test error of the network thresholded at ε.
    pub relative_l2: f64,
    /// Test error of the network as trained.
    pub relative_l2_raw: f64,
    /// Error of the thresholded network on the held-out training points.
    pub validation_l2: Option<f64>,
    pub history: Vec<HistoryRow>,
    pub sparsity: SparsitySummary,
    pub nonzero: usize,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub wall_clock_secs: f64,
    pub config: RunConfig,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn write_metrics(history: &[HistoryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in history {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trains, scores and writes every artifact of one run into its output
/// directory: metrics CSV, checkpoint, config echo, test spec and report.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let trained = train(cfg, &prep)?;

    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let metrics = dir.join(METRICS_FILE);
    write_metrics(&trained.history, &metrics)?;
    let checkpoint = dir.join(CHECKPOINT_FILE);
    Checkpoint {
        net: trained.net.clone(),
        moments: Some(AdamMoments::from_state(&trained.state)),
        seed: cfg.seed,
        step: trained.state.k,
    }
    .save(&checkpoint)?;
    write_text(&dir.join(CONFIG_FILE), &cfg.to_toml())?;
    let test_spec = TestSpec::from_run(cfg);
    write_text(&dir.join(TEST_SPEC_FILE), &test_spec.to_toml())?;

    let set = test_set(&test_spec)?;
    let Evaluation {
        relative_l2,
        relative_l2_raw,
        sparsity,
    } = evaluate_net(&trained.net, &set, cfg.epsilon_threshold)?;
    let validation_l2 = match &prep.validation {
        Some(v) => Some(labeled_error(
            &sdnn_core::threshold(&trained.net, cfg.epsilon_threshold),
            v,
        )?),
        None => None,
    };
    let report = RunReport {
        relative_l2,
        relative_l2_raw,
        validation_l2,
        history: trained.history,
        nonzero: sparsity.total_nonzero,
        sparsity: SparsitySummary::from(&sparsity),
        epochs_run: trained.epochs_run,
        stopped_early: trained.stopped_early,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
        checkpoint,
        metrics,
    };
    write_text(
        &dir.join(REPORT_FILE),
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}
