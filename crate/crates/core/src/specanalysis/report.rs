use std::fmt::Write;

use num_complex::Complex64;

use crate::ingest::{NetworkSweep, PortPair};
use crate::numerics::Series;

use super::cavity::{
    combine_q, estimate_fsr, finesse, mirror_reflectivity, penetration_depth,
    q_internal_from_reflection, q_mirror, q_propagation, CavityGeometry, Coupling,
};
use super::fit::{fit_lorentzian, LorentzianPeak};
use super::peaks::find_peaks;
use super::SpecError;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityOptions {
    /// Trace to analyse; defaults to S11 when present and not identically
    /// zero (Touchstone writers zero-fill unmeasured pairs), otherwise S21.
    pub trace: Option<PortPair>,
    /// Absolute prominence on the linear-magnitude trace; defaults to a
    /// quarter of the trace's full range.
    pub min_prominence: Option<f64>,
    /// Minimum mode spacing in Hz; defaults to v_g / (4 d), half the FSR
    /// of a cavity with no mirror penetration.
    pub min_spacing: Option<f64>,
    /// Propagation loss, dB/mm, for Q_propagation.
    pub alpha_db_per_mm: Option<f64>,
    pub coupling: Coupling,
}

impl Default for CavityOptions {
    fn default() -> Self {
        Self {
            trace: None,
            min_prominence: None,
            min_spacing: None,
            alpha_db_per_mm: None,
            coupling: Coupling::Under,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFit {
    pub peak: LorentzianPeak,
    pub q_loaded: f64,
    pub s11_min: Option<f64>,
    pub q_internal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityReport {
    pub fsr: f64,
    pub l_p: f64,
    pub r_s: f64,
    pub modes: Vec<ModeFit>,
    pub q_mirror: f64,
    /// Evaluated at the median mode frequency when a loss is supplied.
    pub q_propagation: Option<f64>,
    /// combine_q(Q_propagation, Q_mirror).
    pub q_internal_model: Option<f64>,
    /// From the median loaded Q and lambda0.
    pub finesse: f64,
}

impl CavityReport {
    pub fn q_loaded(&self) -> Vec<(f64, f64)> {
        self.modes.iter().map(|m| (m.peak.f0, m.q_loaded)).collect()
    }

    pub fn q_internal(&self) -> Vec<(f64, f64)> {
        self.modes
            .iter()
            .filter_map(|m| m.q_internal.map(|q| (m.peak.f0, q)))
            .collect()
    }

    /// One row per mode: f0, fwhm, Q_L, Q_i (empty when unavailable).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f0_hz,fwhm_hz,q_loaded,q_internal\n");
        for m in &self.modes {
            let qi = m.q_internal.map(|q| format!("{q:.10e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.10e},{}",
                m.peak.f0, m.peak.fwhm, m.q_loaded, qi
            );
        }
        out
    }

    /// `key=value` summary block.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "modes={}", self.modes.len());
        let _ = writeln!(out, "fsr_hz={:.10e}", self.fsr);
        let _ = writeln!(out, "l_p_m={:.10e}", self.l_p);
        let _ = writeln!(out, "r_s={:.10e}", self.r_s);
        let _ = writeln!(out, "q_mirror={:.10e}", self.q_mirror);
        if let Some(q) = self.q_propagation {
            let _ = writeln!(out, "q_propagation={q:.10e}");
        }
        if let Some(q) = self.q_internal_model {
            let _ = writeln!(out, "q_internal_model={q:.10e}");
        }
        let _ = writeln!(out, "finesse={:.10e}", self.finesse);
        out
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn default_trace(sweep: &NetworkSweep) -> PortPair {
    match sweep.get(PortPair::S11) {
        Some(v) if v.iter().any(|c| c.norm() > 0.0) => PortPair::S11,
        _ => PortPair::S21,
    }
}

fn attach(index: usize) -> impl Fn(SpecError) -> SpecError {
    move |e| SpecError::Peak {
        index,
        source: Box::new(e),
    }
}

/// Peak search, per-mode Lorentzian fits, FSR, penetration depth, mirror
/// reflectivity, Q budget and finesse from one sweep.
pub fn cavity_report(
    sweep: &NetworkSweep,
    geom: &CavityGeometry,
    options: &CavityOptions,
) -> Result<CavityReport, SpecError> {
    geom.validate()?;
    let pair = options.trace.unwrap_or_else(|| default_trace(sweep));
    let mag = sweep
        .magnitude(pair)
        .ok_or_else(|| SpecError::Argument(format!("sweep has no {pair} trace")))?;
    let trace = Series::with_units(sweep.freqs().to_vec(), mag, "Hz", "|S|")?;

    // Resonances may show up as dips (reflection) or peaks (transmission).
    let mut sorted = trace.y.clone();
    let mid = median(&mut sorted);
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let sign = if mid - lo > hi - mid { -1.0 } else { 1.0 };
    let oriented = Series::new(trace.x.clone(), trace.y.iter().map(|v| sign * v).collect())?;
    let min_prom = options.min_prominence.unwrap_or(0.25 * (hi - lo));
    let min_spacing = options.min_spacing.unwrap_or(geom.v_g / (4.0 * geom.d));
    let cands = find_peaks(&oriented, min_prom, min_spacing);
    if cands.len() < 2 {
        return Err(SpecError::Argument(format!(
            "found {} resolvable resonance(s); the free spectral range needs at least 2",
            cands.len()
        )));
    }

    let s11 = sweep.magnitude(PortPair::S11);
    let mut modes = Vec::with_capacity(cands.len());
    for (i, c) in cands.iter().enumerate() {
        let left = if i > 0 { c.freq - cands[i - 1].freq } else { f64::INFINITY };
        let right = if i + 1 < cands.len() { cands[i + 1].freq - c.freq } else { f64::INFINITY };
        let half = 0.5 * left.min(right);
        let window = (c.freq - half, c.freq + half);
        let fit = fit_lorentzian(&trace, window, None).map_err(attach(i))?;
        let peak = fit.peak;
        let s11_min = if pair == PortPair::S11 {
            Some(peak.extremum())
        } else {
            s11.as_ref().map(|m| {
                sweep
                    .freqs()
                    .iter()
                    .zip(m)
                    .filter(|(f, _)| **f >= window.0 && **f <= window.1)
                    .map(|(_, v)| *v)
                    .fold(f64::INFINITY, f64::min)
            })
        };
        let q_loaded = peak.q();
        let q_internal = s11_min
            .map(|s| q_internal_from_reflection(q_loaded, s.clamp(0.0, 1.0), options.coupling))
            .transpose()
            .map_err(attach(i))?;
        modes.push(ModeFit {
            peak,
            q_loaded,
            s11_min,
            q_internal,
        });
    }

    let mut centres: Vec<f64> = modes.iter().map(|m| m.peak.f0).collect();
    centres.sort_by(f64::total_cmp);
    let fsr = estimate_fsr(&centres)?;
    let l_p = penetration_depth(fsr, geom.v_g, geom.d)?;
    let r_s = mirror_reflectivity(l_p, geom.lambda0)?;
    let qm = q_mirror(geom, l_p, r_s)?;
    let f_mid = median(&mut centres.clone());
    let q_prop = options
        .alpha_db_per_mm
        .map(|a| q_propagation(f_mid, geom.v_g, a))
        .transpose()?;
    let q_internal_model = q_prop.map(|qp| combine_q(&[qp, qm])).transpose()?;
    let mut qls: Vec<f64> = modes.iter().map(|m| m.q_loaded).collect();
    let q_total = median(&mut qls);
    let fin = finesse(q_total, geom.lambda0, geom.d, l_p)?;

    Ok(CavityReport {
        fsr,
        l_p,
        r_s,
        modes,
        q_mirror: qm,
        q_propagation: q_prop,
        q_internal_model,
        finesse: fin,
    })
}

/// Reflection comb of Lorentzian dips: |S11| = 1 - (1 - s11_min) sum L_k(f),
/// with L_k of unit height at each `(f0, fwhm)`. Returned as real S11.
pub fn reflection_comb(freqs: &[f64], modes: &[(f64, f64)], s11_min: f64) -> Vec<Complex64> {
    let depth = 1.0 - s11_min;
    freqs
        .iter()
        .map(|f| {
            let dip: f64 = modes
                .iter()
                .map(|(f0, w)| {
                    let g = 0.5 * w;
                    g * g / ((f - f0).powi(2) + g * g)
                })
                .sum();
            Complex64::new((1.0 - depth * dip).max(0.0), 0.0)
        })
        .collect()
}
