//! Frequency-domain characterisation of acoustic Fabry-Perot cavities:
//! peak search, Lorentzian fits, free spectral range, penetration depth,
//! mirror reflectivity, the Q budget, finesse, phase velocity and k^2.

mod cavity;
mod fit;
mod peaks;
mod report;

use thiserror::Error;

use crate::numerics::{FitResult, NumericsError};

pub use cavity::{
    combine_q, estimate_fsr, finesse, k_squared, mirror_reflectivity, penetration_depth,
    phase_velocity, q_internal_from_reflection, q_mirror, q_propagation, CavityGeometry, Coupling,
    VelocityPair,
};
pub use fit::{
    fit_double_lorentzian, fit_lorentzian, DoubleLorentzianFit, LorentzianFit, LorentzianPeak,
};
pub use peaks::{find_peaks, PeakCandidate};
pub use report::{cavity_report, default_trace, reflection_comb, CavityOptions, CavityReport, ModeFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Inputs are individually valid but physically inconsistent.
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("degenerate fit: {msg}")]
    Degenerate { msg: String, fit: Option<FitResult> },
    #[error("fit did not converge after {} iterations (residual norm {})", fit.iterations, fit.residual_norm)]
    NotConverged { fit: FitResult },
    #[error("peak {index}: {source}")]
    Peak {
        index: usize,
        #[source]
        source: Box<SpecError>,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
