//! Sparse deep neural networks with layer-wise L1 penalties, trained as
//! regressors or as physics-informed solvers for the viscous Burgers and
//! nonlinear Schrödinger equations.

pub mod activation;
pub mod checkpoint;
pub mod error;
pub mod jet;
mod linalg;
pub mod model;
pub mod optim;
pub mod problems;
pub mod reference;
pub mod sampling;

pub use activation::{activation_table, Activation};
pub use checkpoint::{AdamMoments, Checkpoint};
pub use error::{Error, Result};
pub use jet::{
    backward_accumulate, backward_params, forward_jet, forward_tape, Channel, DerivativeSet, Jet2,
    JetBatch, Partial, Tape,
};
pub use model::{Layer, LayerGrad, Mlp, ParamGrad};
pub use optim::{
    adam_step, l1_penalty, l1_subgradient, regularized_step, relative_l2, soft_threshold,
    sparsity_report, threshold, AdamConfig, AdamState, LrSchedule, PenaltyMode, RegSpec,
    SparsityReport, DEFAULT_EPSILON,
};
pub use problems::{
    burgers_loss, burgers_residual, evaluate, loss, loss_value, regression_loss, schrodinger_loss,
    schrodinger_residual, BoundaryData, GradMode, LossBreakdown, LossPower, LossPowers, PinnData,
    ProblemData, ProblemKind, ProblemSpec,
};
pub use sampling::{
    grid_count, latin_hypercube, linspace, split_boundary_initial, uniform_grid, DomainBox,
    PointSet,
};
