//! Spin-phonon physics for a silicon-vacancy centre driven by a SAW mode.
//!
//! Frequencies are cyclic throughout: a resonance written as 2 gamma_s B = w
//! is evaluated as 2 gamma_s B = f with gamma_s in Hz/T.

use std::f64::consts::PI;
use std::fmt::Write;

use thiserror::Error;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinPhononError {
    #[error("invalid argument: {0}")]
    Argument(String),
}

type Result<T> = std::result::Result<T, SpinPhononError>;

fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(SpinPhononError::Argument(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SivParams {
    /// Hz/T.
    pub gamma_s: f64,
    /// Ground-state orbital splitting, Hz.
    pub lambda_so: f64,
    /// Strain susceptibilities, Hz per unit strain.
    pub d_s: f64,
    pub f_s: f64,
    /// Angle between the field and the defect axis, rad.
    pub theta: f64,
}

impl Default for SivParams {
    fn default() -> Self {
        Self {
            gamma_s: 14e9,
            lambda_so: 46e9,
            d_s: 1.3e15,
            f_s: -1.7e15,
            theta: 54.7f64.to_radians(),
        }
    }
}

impl SivParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_s > 0.0 && self.gamma_s.is_finite()) {
            return arg(format!("gamma_s must be positive, got {}", self.gamma_s));
        }
        if !(self.lambda_so > 0.0 && self.lambda_so.is_finite()) {
            return arg(format!("lambda_so must be positive, got {}", self.lambda_so));
        }
        if !(self.d_s.is_finite() && self.f_s.is_finite()) {
            return arg("strain susceptibilities must be finite");
        }
        if !(self.theta > 0.0 && self.theta < PI / 2.0) {
            return arg(format!("theta must lie in (0, pi/2), got {}", self.theta));
        }
        Ok(())
    }
}

/// Per-phonon strain in the defect frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrainTensor {
    pub eps_xx: f64,
    pub eps_yy: f64,
    pub eps_zz: f64,
    pub eps_xy: f64,
    pub eps_yz: f64,
    pub eps_zx: f64,
}

impl StrainTensor {
    pub fn components(&self) -> [f64; 6] {
        [self.eps_xx, self.eps_yy, self.eps_zz, self.eps_xy, self.eps_yz, self.eps_zx]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            eps_xx: c * self.eps_xx,
            eps_yy: c * self.eps_yy,
            eps_zz: c * self.eps_zz,
            eps_xy: c * self.eps_xy,
            eps_yz: c * self.eps_yz,
            eps_zx: c * self.eps_zx,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components().iter().all(|e| e.is_finite() && e.abs() <= 1.0) {
            Ok(())
        } else {
            arg(format!("strain components must be finite with magnitude <= 1: {self:?}"))
        }
    }
}

/// Field that puts the spin splitting on resonance with a mode at f_m.
pub const REFERENCE_MODE_HZ: f64 = 3.83e9;

/// Example strain tensors, back-solved (not from any FEM) so that the
/// default parameters at the 3.83 GHz resonance field give g = 30 kHz and
/// g = 70 kHz. Returned as (target g in Hz, tensor).
pub fn synthetic_strain_tensors() -> [(f64, StrainTensor); 2] {
    let p = SivParams::default();
    let b_x = transverse_field(2.0 * PI * REFERENCE_MODE_HZ, &p).expect("defaults are valid");
    let pre = 2.0 * p.gamma_s * b_x / p.lambda_so;
    // Pure E_gx-like strain for the low end.
    let low = StrainTensor {
        eps_xx: 30e3 / (pre * p.d_s),
        ..Default::default()
    };
    // Mixed shear for the high end, split evenly between the E_gx and E_gy
    // combinations, with an A_1g part that must not contribute.
    let per_term = 70e3 / pre / 2f64.sqrt();
    let high = StrainTensor {
        eps_zx: per_term / p.f_s,
        eps_xy: -per_term / (2.0 * p.d_s),
        eps_zz: 3e-10,
        ..Default::default()
    };
    [(30e3, low), (70e3, high)]
}

/// B_z with 2 gamma_s B_z = f_m.
pub fn resonance_axial_field(omega_m: f64, params: &SivParams) -> Result<f64> {
    params.validate()?;
    if !(omega_m > 0.0) {
        return arg(format!("mode frequency must be positive, got {omega_m}"));
    }
    Ok(omega_m / (2.0 * PI) / (2.0 * params.gamma_s))
}

/// B_x with 2 gamma_s B_x = f_m tan(theta).
pub fn transverse_field(omega_m: f64, params: &SivParams) -> Result<f64> {
    if !(params.theta < PI / 2.0 - 1e-9) {
        return arg(format!(
            "theta = {} rad is too close to pi/2; tan(theta) diverges",
            params.theta
        ));
    }
    let b_z = resonance_axial_field(omega_m, params)?;
    Ok(b_z * params.theta.tan())
}

/// Single spin-phonon coupling rate in Hz. Only the E_g strain combinations
/// enter; eps_zz drops out.
pub fn coupling_rate(params: &SivParams, b_x: f64, eps: &StrainTensor) -> Result<f64> {
    params.validate()?;
    eps.validate()?;
    if !b_x.is_finite() {
        return arg("b_x must be finite");
    }
    let egx = params.d_s * (eps.eps_xx - eps.eps_yy) + params.f_s * eps.eps_zx;
    let egy = -2.0 * params.d_s * eps.eps_xy + params.f_s * eps.eps_yz;
    Ok(2.0 * params.gamma_s * b_x / params.lambda_so * egx.hypot(egy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    pub w0: f64,
    /// Acoustic wavelength, m.
    pub lambda: f64,
    pub u_max: f64,
}

impl GaussianBeam {
    pub fn new(w0: f64, lambda: f64) -> Result<Self> {
        let b = Self { w0, lambda, u_max: 1.0 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w0 > 0.0 && self.lambda > 0.0 && self.w0.is_finite() && self.lambda.is_finite() {
            Ok(())
        } else {
            arg(format!("beam waist and wavelength must be positive: {self:?}"))
        }
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0 * self.w0 / self.lambda
    }

    pub fn width(&self, z: f64) -> f64 {
        self.w0 * (1.0 + (z / self.rayleigh_range()).powi(2)).sqrt()
    }
}

/// u(r, z)/u_max = (w0/w(z)) exp(-r^2/w(z)^2).
pub fn beam_profile(beam: &GaussianBeam, r: f64, z: f64) -> Result<f64> {
    beam.validate()?;
    let w = beam.width(z);
    Ok(beam.w0 / w * (-(r * r) / (w * w)).exp())
}

/// p0 = hbar 2 pi f0 / t0.
pub fn single_phonon_power(f0: f64, t0: f64) -> Result<f64> {
    if !(f0 > 0.0 && t0 > 0.0) {
        return arg(format!("f0 and t0 must be positive, got ({f0}, {t0})"));
    }
    Ok(HBAR * 2.0 * PI * f0 / t0)
}

/// Phonon number after a chain of losses (each entry <= 0 dB).
pub fn phonon_number(p_rf: f64, loss_chain_db: &[f64], p0: f64) -> Result<f64> {
    if !(p0 > 0.0) || !(p_rf >= 0.0) {
        return arg(format!("need p0 > 0 and p_rf >= 0, got ({p0}, {p_rf})"));
    }
    if let Some(g) = loss_chain_db.iter().find(|d| !(**d <= 0.0)) {
        return arg(format!("loss chain entry {g} dB is a gain; losses must be <= 0 dB"));
    }
    let total_db: f64 = loss_chain_db.iter().sum();
    Ok(p_rf * 10f64.powf(total_db / 10.0) / p0)
}

pub fn rabi_from_phonons(n: f64, g: f64) -> Result<f64> {
    if !(n >= 0.0) {
        return arg(format!("phonon number must be >= 0, got {n}"));
    }
    Ok(n.sqrt() * g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhononBudget {
    pub omega0: f64,
    pub t0: f64,
    pub p0: f64,
    pub p_acoustic: f64,
    pub n: f64,
    pub loss_chain_db: Vec<f64>,
}

impl PhononBudget {
    pub fn new(p_rf: f64, loss_chain_db: &[f64], f0: f64, t0: f64) -> Result<Self> {
        let p0 = single_phonon_power(f0, t0)?;
        let n = phonon_number(p_rf, loss_chain_db, p0)?;
        Ok(Self {
            omega0: 2.0 * PI * f0,
            t0,
            p0,
            p_acoustic: n * p0,
            n,
            loss_chain_db: loss_chain_db.to_vec(),
        })
    }
}

/// Everything `rabi_chain` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainInputs {
    pub p_rf_dbm: f64,
    pub loss_chain_db: Vec<f64>,
    pub f0: f64,
    pub t0: f64,
    pub params: SivParams,
    pub eps: StrainTensor,
    pub beam: GaussianBeam,
    /// (r, z) of the defect relative to the beam focus, m.
    pub location: (f64, f64),
    /// Transverse field; derived from f0 and theta when absent.
    pub b_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiChain {
    pub budget: PhononBudget,
    pub b_x: f64,
    pub g_focus: f64,
    pub beam_factor: f64,
    pub g: f64,
    pub rabi: f64,
}

impl RabiChain {
    pub fn summary(&self) -> String {
        let b = &self.budget;
        let mut out = String::new();
        let chain: Vec<String> = b.loss_chain_db.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "loss_chain_db={}", chain.join(","));
        let _ = writeln!(out, "omega0_rad_s={:.10e}", b.omega0);
        let _ = writeln!(out, "t0_s={:.10e}", b.t0);
        let _ = writeln!(out, "p0_w={:.10e}", b.p0);
        let _ = writeln!(out, "p_acoustic_w={:.10e}", b.p_acoustic);
        let _ = writeln!(out, "n={:.10e}", b.n);
        let _ = writeln!(out, "b_x_t={:.10e}", self.b_x);
        let _ = writeln!(out, "g_focus_hz={:.10e}", self.g_focus);
        let _ = writeln!(out, "beam_factor={:.10e}", self.beam_factor);
        let _ = writeln!(out, "g_hz={:.10e}", self.g);
        let _ = writeln!(out, "rabi_hz={:.10e}", self.rabi);
        out
    }
}

/// RF power to sqrt(n) g at the defect location.
pub fn rabi_chain(inputs: &ChainInputs) -> Result<RabiChain> {
    if !inputs.p_rf_dbm.is_finite() && inputs.p_rf_dbm != f64::NEG_INFINITY {
        return arg("input power must be finite or -inf dBm");
    }
    let p_rf = 1e-3 * 10f64.powf(inputs.p_rf_dbm / 10.0);
    let budget = PhononBudget::new(p_rf, &inputs.loss_chain_db, inputs.f0, inputs.t0)?;
    let b_x = match inputs.b_x {
        Some(b) => b,
        None => transverse_field(2.0 * PI * inputs.f0, &inputs.params)?,
    };
    let g_focus = coupling_rate(&inputs.params, b_x, &inputs.eps)?;
    let beam_factor = beam_profile(&inputs.beam, inputs.location.0, inputs.location.1)?;
    let g = g_focus * beam_factor;
    let rabi = rabi_from_phonons(budget.n, g)?;
    Ok(RabiChain {
        budget,
        b_x,
        g_focus,
        beam_factor,
        g,
        rabi,
    })
}
