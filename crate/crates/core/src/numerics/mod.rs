//! Shared numerical services: nonlinear least squares, unitary DFT,
//! integer-order Bessel functions and decibel conversions.

mod bessel;
mod dft;
mod lsq;
mod series;
mod units;

pub use bessel::bessel_j;
pub use dft::{dft, Direction};
pub use lsq::{
    finite_difference_gradient, least_squares, DampedCosine, DoubleLorentzian, FitResult, FnModel,
    Line, Lorentzian, LsqOptions, Model,
};
pub use series::Series;
pub use units::{
    amplitude_ratio_to_db, db_convert, dbm_to_watts, per_m_power_to_db_per_mm, power_ratio_to_db,
    watts_to_dbm, DbMode,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("model produced a non-finite value at x = {x} (params {params:?})")]
    NonFiniteModel { x: f64, params: Vec<f64> },
    #[error("invalid series: {0}")]
    Series(String),
}
