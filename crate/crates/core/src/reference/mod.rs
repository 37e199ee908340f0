//! Ground-truth solutions for the PDE test sets and the numerical
//! primitives behind them.

mod burgers;
mod fft;
mod field;
mod nls;
mod quadrature;

pub use burgers::{burgers_exact, burgers_exact_grid, burgers_exact_with, DEFAULT_N_QUAD, T_MIN};
pub use fft::{fft, FftPlan};
pub use field::{FieldMeta, FieldValues, ReferenceField, FIELD_MAGIC, FIELD_VERSION};
pub use nls::{
    nls_grid, nls_solve_with, nls_spectral_solve, NlsOptions, NlsSolution, BLOWUP_LIMIT,
    DEFAULT_DT, DEFAULT_MODES, FINE_DT, NLS_X_MAX, NLS_X_MIN,
};
pub use quadrature::{gauss_hermite, QuadratureRule, MAX_ORDER};
