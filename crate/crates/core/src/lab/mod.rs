//! Planar experiments on E_n: grid cover counts and the ball masses of µ_n.

mod cover;
mod en;
mod measure;

pub use cover::{cover_exponent_scan, empirical_cover_count, formula_cover_count, CoverRow, CoverScan};
pub use en::{
    build_e_n, check_level_for_cube, cube_side, EnCopy, EnMode, EnSet, LabOptions, DEFAULT_COPY_CAP, DEFAULT_ROW_CAP,
};
pub use measure::{
    default_epsilon, mu_ball_mass, verify_measure_bound, BallSample, MeasureCheck, MuMeasure, RadiusRegime,
};
