//! Synthetic fixtures shaped like the reference device: a 50 um Fabry-Perot
//! cavity near 3.81 GHz on a film with v_g = 6161 m/s, and 130 um delay
//! lines for echo-loss extraction. All are forward-model outputs, not data.

use num_complex::Complex64;
use rand::Rng;

use crate::ingest::{NetworkSweep, PortPair};
use crate::numerics::{db_convert, DbMode};
use crate::specanalysis::{reflection_comb, CavityGeometry};
use crate::timedomain::{EchoSynthesis, IdtResponse, LossModel};

pub const V_G: f64 = 6161.0;
pub const CAVITY_D: f64 = 50e-6;
pub const LAMBDA0: f64 = 1.7e-6;
pub const N_MIRROR: u32 = 40;
pub const MODE_HZ: f64 = 3.81e9;
pub const FSR_HZ: f64 = 52.6e6;
pub const Q_LOADED: f64 = 2100.0;
pub const S11_MIN: f64 = 0.714;
pub const DELAY_LINE_L: f64 = 130e-6;
pub const ECHO_BAND: (f64, f64) = (2e9, 6e9);
pub const ECHO_POINTS: usize = 8192;

pub fn cavity_geometry() -> CavityGeometry {
    CavityGeometry {
        d: CAVITY_D,
        lambda0: LAMBDA0,
        n_mirror: N_MIRROR,
        v_g: V_G,
        v_p: None,
    }
}

/// Seven reflection dips spaced by the FSR around the 3.81 GHz mode, each
/// with loaded Q 2100 and minimum |S11| 0.714, on a 100 kHz grid.
pub fn reflection_comb_sweep() -> NetworkSweep {
    let freqs: Vec<f64> = (0..=4200).map(|k| 3.6e9 + k as f64 * 0.1e6).collect();
    let modes: Vec<(f64, f64)> = (-3..=3)
        .map(|k| {
            let f0 = MODE_HZ + k as f64 * FSR_HZ;
            (f0, f0 / Q_LOADED)
        })
        .collect();
    let s11 = reflection_comb(&freqs, &modes, S11_MIN);
    NetworkSweep::single(freqs, PortPair::S11, s11)
        .expect("fixture grid is valid")
        .with_label("synthetic reflection comb: FSR 52.6 MHz, Q_L 2100, |S11|min 0.714")
}

/// IDT passband flat across `band`, so that echo amplitudes read directly
/// as T R^n e^{-alpha (2n+1) L / 2}.
pub fn broadband_idt(band: (f64, f64)) -> IdtResponse {
    let center = 0.5 * (band.0 + band.1);
    IdtResponse {
        center,
        fractional_bandwidth: 1.2 * (band.1 - band.0) / center,
        rolloff: 0.1,
    }
}

/// Delay-line echo network: 130 um, T = 0.3, given R and loss in dB/mm,
/// with 0.05 electrical crosstalk.
pub fn delay_line(r: f64, alpha_db_per_mm: f64) -> EchoSynthesis {
    let model = LossModel {
        t: 0.3,
        r,
        alpha: db_convert(alpha_db_per_mm, DbMode::DbPerMmToPerMPower),
        length: DELAY_LINE_L,
    };
    echo_network(model)
}

/// Any loss model on the standard echo band and crosstalk.
pub fn echo_network(model: LossModel) -> EchoSynthesis {
    let mut syn = EchoSynthesis::new(model, V_G, ECHO_BAND, ECHO_POINTS);
    syn.crosstalk = Complex64::new(0.05, 0.0);
    syn.idt = Some(broadband_idt(ECHO_BAND));
    syn
}

/// Cavity-length echo network: the round trip d + 2 L_p reproduces the
/// 52.6 MHz FSR, with R = 0.5 and 3.2 dB/mm loss.
pub fn cavity_echo_network() -> EchoSynthesis {
    let l_eff = V_G / (2.0 * FSR_HZ);
    echo_network(LossModel {
        t: 0.3,
        r: 0.5,
        alpha: db_convert(3.2, DbMode::DbPerMmToPerMPower),
        length: l_eff,
    })
}

/// A loss model drawn uniformly from T in [0.1, 0.5], R in [0.05, 0.3],
/// alpha in [1, 40] dB/mm and L in [30, 130] um.
pub fn random_loss_model<R: Rng + ?Sized>(rng: &mut R) -> LossModel {
    LossModel {
        t: rng.random_range(0.1..0.5),
        r: rng.random_range(0.05..0.3),
        alpha: db_convert(rng.random_range(1.0..40.0), DbMode::DbPerMmToPerMPower),
        length: rng.random_range(30e-6..130e-6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timedomain::synthesize_echo_network;

    #[test]
    fn fixtures_build() {
        assert_eq!(reflection_comb_sweep().len(), 4201);
        let idt = broadband_idt(ECHO_BAND);
        assert_eq!(idt.gain(ECHO_BAND.0), 1.0);
        assert_eq!(idt.gain(ECHO_BAND.1), 1.0);
        let s = synthesize_echo_network(&cavity_echo_network()).unwrap();
        assert_eq!(s.len(), ECHO_POINTS);
        cavity_geometry().validate().unwrap();
    }
}
