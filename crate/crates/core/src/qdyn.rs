//! Driven two-level spin dynamics: the detuned Rabi closed form, noisy trace
//! simulation and fitting, ODAR spectra, the square-root power law and the
//! phase-modulation sideband spectrum.
//!
//! Rabi frequencies and detunings are cyclic (Hz) everywhere in this module;
//! [`RabiConvention`] converts values quoted as angular rates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::numerics::{
    bessel_j, dft, least_squares, DampedCosine, Direction, FitResult, LsqOptions, NumericsError,
    Series,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdynError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, QdynError>;

/// How a quoted Rabi rate is meant: the population oscillates as
/// cos(2 pi f t) for a cyclic f, or as cos(w t) for an angular w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RabiConvention {
    #[default]
    Cyclic,
    Angular,
}

impl RabiConvention {
    pub fn to_cyclic(self, value: f64) -> f64 {
        match self {
            RabiConvention::Cyclic => value,
            RabiConvention::Angular => value / (2.0 * PI),
        }
    }

    pub fn from_cyclic(self, hz: f64) -> f64 {
        match self {
            RabiConvention::Cyclic => hz,
            RabiConvention::Angular => 2.0 * PI * hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelDrive {
    pub rabi: f64,
    pub detuning: f64,
    /// Envelope decay time; `f64::INFINITY` for none.
    pub decay_tau: f64,
}

impl TwoLevelDrive {
    pub fn resonant(rabi: f64) -> Self {
        Self {
            rabi,
            detuning: 0.0,
            decay_tau: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi >= 0.0 && self.rabi.is_finite()) {
            return Err(QdynError::Argument(format!("rabi must be >= 0, got {}", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(QdynError::Argument("detuning must be finite".into()));
        }
        if !(self.decay_tau > 0.0) {
            return Err(QdynError::Argument(format!(
                "decay_tau must be positive or infinite, got {}",
                self.decay_tau
            )));
        }
        Ok(())
    }
}

/// Optical initialise, SAW drive, optical readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSequence {
    pub init_optical: f64,
    pub saw_pulse: f64,
    pub readout_optical: f64,
}

impl Default for PulseSequence {
    fn default() -> Self {
        Self {
            init_optical: 300e-9,
            saw_pulse: 20e-9,
            readout_optical: 300e-9,
        }
    }
}

impl PulseSequence {
    pub fn validate(&self) -> Result<()> {
        let all = [self.init_optical, self.saw_pulse, self.readout_optical];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(QdynError::Argument(format!("pulse durations must be positive: {self:?}")))
        }
    }

    pub fn total(&self) -> f64 {
        self.init_optical + self.saw_pulse + self.readout_optical
    }
}

/// Excited-state population after driving for `t`.
///
/// P = Omega^2/(Omega^2 + Delta^2) sin^2(pi sqrt(Omega^2 + Delta^2) t), relaxed
/// toward 1/2 by e^{-t/tau}.
pub fn rabi_population(drive: &TwoLevelDrive, t: f64) -> f64 {
    let w2 = drive.rabi * drive.rabi + drive.detuning * drive.detuning;
    let ideal = if w2 == 0.0 {
        0.0
    } else {
        drive.rabi * drive.rabi / w2 * (PI * w2.sqrt() * t).sin().powi(2)
    };
    if drive.decay_tau.is_infinite() {
        ideal
    } else {
        0.5 + (ideal - 0.5) * (-t / drive.decay_tau).exp()
    }
}

fn gaussian(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| QdynError::Argument(e.to_string()))
}

/// 1/2 (1 - e^{-t/tau} cos(2 pi Omega t)) on `t_grid`, plus seeded Gaussian
/// noise of standard deviation `noise_sigma`.
pub fn simulate_rabi_trace(
    rabi: f64,
    decay_tau: f64,
    t_grid: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Series> {
    TwoLevelDrive { rabi, detuning: 0.0, decay_tau }.validate()?;
    if !(noise_sigma >= 0.0) {
        return Err(QdynError::Argument(format!("noise_sigma must be >= 0, got {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = gaussian(noise_sigma)?;
    let y = t_grid
        .iter()
        .map(|t| {
            let clean = 0.5 * (1.0 - (-t / decay_tau).exp() * (2.0 * PI * rabi * t).cos());
            clean + noise.sample(&mut rng)
        })
        .collect();
    Ok(Series::with_units(t_grid.to_vec(), y, "s", "population")?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiFit {
    pub rabi: f64,
    /// `f64::INFINITY` when no decay is resolved.
    pub decay_tau: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub fit: FitResult,
}

impl RabiFit {
    pub fn summary(&self) -> String {
        format!(
            "rabi_hz={:.10e}\nrabi_rad_s={:.10e}\ndecay_tau_s={:.10e}\namplitude={:.10e}\noffset={:.10e}\nresidual_norm={:.10e}\n",
            self.rabi,
            RabiConvention::Angular.from_cyclic(self.rabi),
            self.decay_tau,
            self.amplitude,
            self.offset,
            self.fit.residual_norm
        )
    }
}

/// Dominant oscillation frequency of a uniformly sampled trace from a
/// zero-padded DFT of the mean-removed samples.
fn dominant_frequency(trace: &Series) -> Result<f64> {
    let n = trace.len();
    let dt = (trace.x[n - 1] - trace.x[0]) / (n - 1) as f64;
    let uniform = trace
        .x
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
    if !uniform {
        return Err(QdynError::Argument("fit_rabi needs a uniform time grid".into()));
    }
    let mean = trace.y.iter().sum::<f64>() / n as f64;
    let pad = 8 * n;
    let mut buf = vec![Complex64::new(0.0, 0.0); pad];
    for (b, y) in buf.iter_mut().zip(&trace.y) {
        *b = Complex64::new(y - mean, 0.0);
    }
    let spec: Vec<f64> = dft(&buf, Direction::Forward)?
        .iter()
        .take(pad / 2)
        .map(|c| c.norm_sqr())
        .collect();
    // Skip the DC lobe (one unpadded bin).
    let (k, peak) = spec
        .iter()
        .enumerate()
        .skip(8)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k, *v))
        .ok_or_else(|| QdynError::Fit("trace too short for a spectrum".into()))?;
    let mut sorted: Vec<f64> = spec[8..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if !(peak > 0.0) || peak < 20.0 * floor {
        return Err(QdynError::Fit(
            "no spectral peak above the noise floor; the trace does not oscillate".into(),
        ));
    }
    Ok(k as f64 / (pad as f64 * dt))
}

/// Least-squares fit of offset - A e^{-t/tau} cos(2 pi Omega t), seeded from
/// the dominant DFT bin. The decay is fitted as a rate so that tau = infinity
/// is reachable.
pub fn fit_rabi(trace: &Series) -> Result<RabiFit> {
    if trace.len() < 16 {
        return Err(QdynError::Argument(format!(
            "{} samples; at least 16 are needed",
            trace.len()
        )));
    }
    let f0 = dominant_frequency(trace)?;
    let span = trace.x[trace.len() - 1] - trace.x[0];
    if f0 * span < 2.0 {
        return Err(QdynError::Fit(format!(
            "dominant frequency {f0:.4e} Hz gives fewer than 2 periods over the trace"
        )));
    }
    let mean = trace.y.iter().sum::<f64>() / trace.len() as f64;
    let (lo, hi) = trace.y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(*v), b.max(*v))
    });
    let amp0 = 0.5 * (hi - lo);
    let opts = LsqOptions::with_bounds(vec![
        (0.5 * f0, 2.0 * f0),
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ]);
    let mut best: Option<FitResult> = None;
    for rate0 in [0.1 / span, 1.0 / span, 10.0 / span] {
        let Ok(fit) = least_squares(&DampedCosine, trace, &[f0, rate0, amp0, mean], &opts) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| fit.residual_norm < b.residual_norm) {
            best = Some(fit);
        }
    }
    let fit = best.ok_or_else(|| QdynError::Fit("least squares failed from every start".into()))?;
    if !fit.converged {
        return Err(QdynError::Fit(format!(
            "did not converge after {} iterations",
            fit.iterations
        )));
    }
    let [rabi, rate, amplitude, offset] = [fit.params[0], fit.params[1], fit.params[2], fit.params[3]];
    // An envelope that changes by less than 1e-9 across the record is no decay.
    Ok(RabiFit {
        rabi,
        decay_tau: if rate * span > 1e-9 { 1.0 / rate } else { f64::INFINITY },
        amplitude,
        offset,
        fit,
    })
}

/// Population after a pulse of `pulse_len` versus drive frequency.
pub fn odar_spectrum(rabi: f64, f_spin: f64, pulse_len: f64, f_grid: &[f64]) -> Result<Series> {
    if !(pulse_len > 0.0) {
        return Err(QdynError::Argument(format!("pulse_len must be positive, got {pulse_len}")));
    }
    let y = f_grid
        .iter()
        .map(|f| {
            let drive = TwoLevelDrive {
                rabi,
                detuning: f - f_spin,
                decay_tau: f64::INFINITY,
            };
            drive.validate().map(|_| rabi_population(&drive, pulse_len))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Series::with_units(f_grid.to_vec(), y, "Hz", "population")?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerScalingFit {
    /// Hz per sqrt(mW).
    pub slope: f64,
    /// ||Omega - c sqrt(P)|| / ||Omega||.
    pub residual: f64,
}

impl PowerScalingFit {
    pub fn predict(&self, p_dbm: f64) -> f64 {
        self.slope * 10f64.powf(p_dbm / 20.0)
    }
}

/// Omega = c sqrt(P_mW) through the origin.
pub fn fit_power_scaling(points: &[(f64, f64)]) -> Result<PowerScalingFit> {
    if points.len() < 2 {
        return Err(QdynError::Argument(format!(
            "{} point(s); at least 2 are needed",
            points.len()
        )));
    }
    if points.iter().any(|(p, w)| !p.is_finite() || !w.is_finite()) {
        return Err(QdynError::Argument("points must be finite".into()));
    }
    let xs: Vec<f64> = points.iter().map(|(dbm, _)| 10f64.powf(dbm / 20.0)).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, w))| x * w).sum();
    let slope = sxy / sxx;
    let ss: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, (_, w))| (w - slope * x).powi(2))
        .sum();
    let norm: f64 = points.iter().map(|(_, w)| w * w).sum();
    let residual = if norm > 0.0 { (ss / norm).sqrt() } else { 0.0 };
    Ok(PowerScalingFit { slope, residual })
}

/// J_k(beta)^2 for k = -orders..=orders.
pub fn sideband_weights(mod_index: f64, orders: u32) -> Result<Vec<(i32, f64)>> {
    if orders > 10 {
        return Err(QdynError::Argument(format!("orders must be <= 10, got {orders}")));
    }
    let mut out = Vec::with_capacity(2 * orders as usize + 1);
    for k in -(orders as i32)..=(orders as i32) {
        let j = bessel_j(k.unsigned_abs(), mod_index)?;
        out.push((k, j * j));
    }
    Ok(out)
}

/// Sum over sidebands of J_k(beta)^2 times a unit-height Lorentzian of FWHM
/// `linewidth` centred at carrier + k mod_freq.
pub fn sideband_spectrum(
    carrier: f64,
    mod_freq: f64,
    mod_index: f64,
    linewidth: f64,
    orders: u32,
    f_grid: &[f64],
) -> Result<Series> {
    if !(linewidth > 0.0) {
        return Err(QdynError::Argument(format!("linewidth must be positive, got {linewidth}")));
    }
    let weights = sideband_weights(mod_index, orders)?;
    let g = 0.5 * linewidth;
    let y = f_grid
        .iter()
        .map(|f| {
            weights
                .iter()
                .map(|(k, w)| {
                    let d = f - (carrier + *k as f64 * mod_freq);
                    w * g * g / (d * d + g * g)
                })
                .sum()
        })
        .collect();
    Ok(Series::with_units(f_grid.to_vec(), y, "Hz", "intensity")?)
}
