//! The dimension formula: candidate scales A_n, the index sets K_{n,1} and
//! K_{n,2}, s_n, and a windowed estimate of its limsup.

mod engine;
mod examples;
mod logortho;
mod target;

pub use engine::{
    gamma_magnitudes, log_gamma_magnitudes, minimize_over_candidates, objective, s_n, s_n_direct, s_star,
    DimensionReport, LevelData, DEFAULT_TOLERANCE, DEFAULT_WINDOW,
};
pub use examples::{closed_form_example, ClosedForm};
pub use logortho::{log_pivoted_norms, LogFrame};
pub use target::{Generator, LogMatrix, TargetSpec, ThetaRule};
