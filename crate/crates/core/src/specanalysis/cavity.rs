use std::f64::consts::PI;

use crate::numerics::{db_convert, DbMode};

use super::SpecError;

/// Geometry of a two-IDT acoustic Fabry-Perot cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// IDT separation, m.
    pub d: f64,
    /// Acoustic wavelength, m.
    pub lambda0: f64,
    /// Electrodes per reflector.
    pub n_mirror: u32,
    /// Group velocity, m/s.
    pub v_g: f64,
    /// Phase velocity, m/s.
    pub v_p: Option<f64>,
}

impl CavityGeometry {
    pub fn validate(&self) -> Result<(), SpecError> {
        let ok = self.d > 0.0
            && self.lambda0 > 0.0
            && self.v_g > 0.0
            && self.n_mirror >= 1
            && self.v_p.is_none_or(|v| v > 0.0);
        if ok && self.d.is_finite() && self.lambda0.is_finite() && self.v_g.is_finite() {
            Ok(())
        } else {
            Err(SpecError::Argument(format!("invalid cavity geometry {self:?}")))
        }
    }
}

/// Electrically open / shorted surface phase velocities, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityPair {
    pub v_open: f64,
    pub v_short: f64,
}

impl VelocityPair {
    pub fn new(v_open: f64, v_short: f64) -> Result<Self, SpecError> {
        if !(v_open > 0.0 && v_short > 0.0) || !v_open.is_finite() || !v_short.is_finite() {
            return Err(SpecError::Argument("velocities must be positive".into()));
        }
        if v_short > v_open {
            return Err(SpecError::Argument(format!(
                "shorted velocity {v_short} exceeds open velocity {v_open}"
            )));
        }
        Ok(Self { v_open, v_short })
    }
}

/// Coupling regime used to turn a reflection dip into an internal Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// beta = (1 - |S11|min) / (1 + |S11|min)
    #[default]
    Under,
    /// beta = (1 + |S11|min) / (1 - |S11|min)
    Over,
}

fn positive(name: &str, v: f64) -> Result<(), SpecError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SpecError::Argument(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Median spacing of sorted resonance frequencies.
pub fn estimate_fsr(peak_freqs: &[f64]) -> Result<f64, SpecError> {
    if peak_freqs.len() < 2 {
        return Err(SpecError::Argument(format!(
            "free spectral range needs at least 2 peaks, got {}",
            peak_freqs.len()
        )));
    }
    let mut diffs: Vec<f64> = peak_freqs.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().any(|d| !(*d > 0.0)) {
        return Err(SpecError::Argument("peak frequencies must be strictly increasing".into()));
    }
    diffs.sort_by(f64::total_cmp);
    let n = diffs.len();
    Ok(if n % 2 == 1 {
        diffs[n / 2]
    } else {
        0.5 * (diffs[n / 2 - 1] + diffs[n / 2])
    })
}

/// L_p from v_g / (2 FSR) = d + 2 L_p.
pub fn penetration_depth(fsr: f64, v_g: f64, d: f64) -> Result<f64, SpecError> {
    positive("fsr", fsr)?;
    positive("v_g", v_g)?;
    positive("d", d)?;
    let l_eff = v_g / (2.0 * fsr);
    if l_eff < d {
        return Err(SpecError::Inconsistent(format!(
            "effective length {l_eff:.4e} m is shorter than the IDT separation {d:.4e} m; check v_g and d"
        )));
    }
    Ok(0.5 * (l_eff - d))
}

/// Per-electrode amplitude reflectivity from L_p = lambda0 / (4 r_s).
pub fn mirror_reflectivity(l_p: f64, lambda0: f64) -> Result<f64, SpecError> {
    positive("L_p", l_p)?;
    positive("lambda0", lambda0)?;
    let r_s = lambda0 / (4.0 * l_p);
    if r_s >= 1.0 {
        return Err(SpecError::Inconsistent(format!(
            "penetration depth {l_p:.4e} m implies reflectivity {r_s} >= 1"
        )));
    }
    Ok(r_s)
}

/// pi (d + L_p) / (lambda0 (1 - tanh(N |r_s|))).
pub fn q_mirror(geom: &CavityGeometry, l_p: f64, r_s: f64) -> Result<f64, SpecError> {
    geom.validate()?;
    if !(l_p >= 0.0) {
        return Err(SpecError::Argument(format!("L_p must be non-negative, got {l_p}")));
    }
    let x = geom.n_mirror as f64 * r_s.abs();
    if !(x < 20.0) {
        return Err(SpecError::Argument(format!(
            "N_mirror * r_s = {x} saturates tanh (must be < 20)"
        )));
    }
    // 1 - tanh(x) without cancellation.
    let one_minus_tanh = 2.0 / ((2.0 * x).exp() + 1.0);
    Ok(PI * (geom.d + l_p) / (geom.lambda0 * one_minus_tanh))
}

/// omega / (2 v_g alpha), alpha the power attenuation coefficient in 1/m.
pub fn q_propagation(f: f64, v_g: f64, alpha_db_per_mm: f64) -> Result<f64, SpecError> {
    positive("f", f)?;
    positive("v_g", v_g)?;
    if alpha_db_per_mm == 0.0 {
        return Err(SpecError::Argument("zero propagation loss gives unbounded Q".into()));
    }
    positive("alpha", alpha_db_per_mm)?;
    let alpha = db_convert(alpha_db_per_mm, DbMode::DbPerMmToPerMPower);
    Ok(2.0 * PI * f / (2.0 * v_g * alpha))
}

/// Reciprocal sum of independent loss channels.
pub fn combine_q(qs: &[f64]) -> Result<f64, SpecError> {
    if qs.is_empty() {
        return Err(SpecError::Argument("no Q values to combine".into()));
    }
    for q in qs {
        positive("Q", *q)?;
    }
    Ok(1.0 / qs.iter().map(|q| 1.0 / q).sum::<f64>())
}

/// Internal Q of a one-port resonance from its loaded Q and dip depth.
pub fn q_internal_from_reflection(
    q_loaded: f64,
    s11_min: f64,
    coupling: Coupling,
) -> Result<f64, SpecError> {
    positive("Q_loaded", q_loaded)?;
    if !(0.0..=1.0).contains(&s11_min) {
        return Err(SpecError::Argument(format!("|S11|min must lie in [0, 1], got {s11_min}")));
    }
    let beta = match coupling {
        Coupling::Under => (1.0 - s11_min) / (1.0 + s11_min),
        Coupling::Over => {
            if s11_min == 1.0 {
                return Err(SpecError::Argument(
                    "overcoupled branch is undefined for |S11|min = 1".into(),
                ));
            }
            (1.0 + s11_min) / (1.0 - s11_min)
        }
    };
    Ok((1.0 + beta) * q_loaded)
}

/// Q lambda / (2 (d + 2 L_p)).
pub fn finesse(q_total: f64, lambda: f64, d: f64, l_p: f64) -> Result<f64, SpecError> {
    positive("Q", q_total)?;
    positive("lambda", lambda)?;
    positive("d", d)?;
    if !(l_p >= 0.0) {
        return Err(SpecError::Argument(format!("L_p must be non-negative, got {l_p}")));
    }
    Ok(q_total * lambda / (2.0 * (d + 2.0 * l_p)))
}

pub fn phase_velocity(f0: f64, lambda0: f64) -> Result<f64, SpecError> {
    positive("f0", f0)?;
    positive("lambda0", lambda0)?;
    Ok(f0 * lambda0)
}

/// Electromechanical coupling 2 (v_open - v_short) / v_open.
pub fn k_squared(v: VelocityPair) -> Result<f64, SpecError> {
    let v = VelocityPair::new(v.v_open, v.v_short)?;
    Ok(2.0 * (v.v_open - v.v_short) / v.v_open)
}
