use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sawkit::fixtures;
use sawkit::ingest::{NetworkSweep, PortPair};
use sawkit::timedomain::{
    detect_echoes, fit_echo_decay, impulse_response, synthesize_echo_network, time_gate,
    EchoSynthesis, KnownLoss, LossModel, Window,
};

fn s21(s: &NetworkSweep) -> &[Complex64] {
    s.get(PortPair::S21).unwrap()
}

fn max_rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parseval_without_window(
        values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16..300),
        f0 in 1e8..5e9f64,
        df in 1e4..1e7f64,
    ) {
        let n = values.len();
        let freqs: Vec<f64> = (0..n).map(|k| f0 + k as f64 * df).collect();
        let s: Vec<Complex64> = values.iter().map(|(r, i)| Complex64::new(*r, *i)).collect();
        let sweep = NetworkSweep::single(freqs, PortPair::S21, s.clone()).unwrap();
        let ir = impulse_response(&sweep, Window::None).unwrap();
        let e_t: f64 = ir.h.iter().map(|v| v.norm_sqr()).sum::<f64>() * n as f64;
        let e_f: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e_t - e_f).abs() <= 1e-10 * e_f.max(1e-300));
    }

    #[test]
    fn full_gate_is_identity(
        values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16..300),
    ) {
        let n = values.len();
        let freqs: Vec<f64> = (0..n).map(|k| 2e9 + k as f64 * 1e6).collect();
        let s: Vec<Complex64> = values.iter().map(|(r, i)| Complex64::new(*r, *i)).collect();
        let sweep = NetworkSweep::single(freqs, PortPair::S21, s).unwrap();
        let gated = time_gate(&sweep, (0.0, 1.0)).unwrap();
        for (a, b) in s21(&gated).iter().zip(s21(&sweep)) {
            prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn detected_echoes_follow_the_recurrence(
        t in 0.1..0.5f64,
        r in 0.3..0.9f64,
        alpha_db in 0.5..10.0f64,
        length in 30e-6..130e-6f64,
    ) {
        let model = LossModel {
            t, r,
            alpha: sawkit::numerics::db_convert(alpha_db, sawkit::numerics::DbMode::DbPerMmToPerMPower),
            length,
        };
        let syn = fixtures::echo_network(model);
        let ir = impulse_response(&synthesize_echo_network(&syn).unwrap(), Window::hann()).unwrap();
        let train = detect_echoes(&ir, syn.round_trip(), 12).unwrap();
        let q = model.r * (-model.alpha * model.length).exp();
        let used = train.usable();
        // Ratios between echoes that both sit well above the dynamic-range floor.
        for w in used.windows(2).filter(|w| w[1].h_max > 1e-2 * used[0].h_max) {
            let ratio = w[1].h_max / w[0].h_max;
            prop_assert!((ratio / q - 1.0).abs() < 1e-3, "ratio {} vs {}", ratio, q);
        }
    }
}

#[test]
fn gate_removes_crosstalk() {
    // 1 MHz steps over 1000 points: 1 ns delay bins, echoes on the grid.
    let l = 20e-9 * fixtures::V_G;
    let model = LossModel { t: 0.3, r: 0.3, alpha: 200.0, length: l };
    let mut with_xt = EchoSynthesis::new(model, fixtures::V_G, (3e9, 3e9 + 999e6), 1000);
    with_xt.crosstalk = Complex64::new(0.2, -0.1);
    let echo_only = EchoSynthesis { crosstalk: Complex64::new(0.0, 0.0), ..with_xt.clone() };
    let a = synthesize_echo_network(&with_xt).unwrap();
    let b = synthesize_echo_network(&echo_only).unwrap();
    let gated = time_gate(&a, (10e-9, 1.0)).unwrap();
    let err = max_rel_diff(s21(&gated), s21(&b));
    assert!(err < 1e-3, "relative error {err}");
    let full = time_gate(&a, (0.0, 1.0)).unwrap();
    assert!(max_rel_diff(s21(&full), s21(&a)) < 1e-10);
}

#[test]
fn reference_device_trains_give_target_losses() {
    for (alpha_db, r) in [(3.2, 0.5), (35.2, 0.5), (3.2, 0.1)] {
        let syn = fixtures::delay_line(r, alpha_db);
        let ir = impulse_response(&synthesize_echo_network(&syn).unwrap(), Window::hann()).unwrap();
        let train = detect_echoes(&ir, syn.round_trip(), 10).unwrap();
        let fit = fit_echo_decay(&train, syn.model.length, KnownLoss::Reflection(r)).unwrap();
        assert!((fit.model.alpha_db_per_mm() / alpha_db - 1.0).abs() < 5e-3);
        assert!((fit.model.t / 0.3 - 1.0).abs() < 1e-2);
    }
}

#[test]
fn noise_floor_flags_late_echoes() {
    let mut syn = fixtures::delay_line(0.3, 3.2);
    syn.noise_sigma = 2e-4;
    syn.seed = 5;
    let ir = impulse_response(&synthesize_echo_network(&syn).unwrap(), Window::hann()).unwrap();
    let train = detect_echoes(&ir, syn.round_trip(), 30).unwrap();
    let first_flag = train.peaks.iter().position(|p| p.below_floor).unwrap();
    assert!(first_flag >= 3, "flagged from echo {first_flag}");
    assert!(train.peaks[first_flag..].iter().all(|p| p.below_floor || p.h_max < 10.0 * train.noise_median));
    let fit = fit_echo_decay(&train, syn.model.length, KnownLoss::Reflection(0.3)).unwrap();
    assert!((fit.model.alpha_db_per_mm() / 3.2 - 1.0).abs() < 0.05);
}

#[test]
fn round_trip_for_delay_line() {
    let syn = fixtures::delay_line(0.1, 3.2);
    assert!((syn.round_trip() - 42.2e-9).abs() < 0.05e-9);
    let ir = impulse_response(&synthesize_echo_network(&syn).unwrap(), Window::hann()).unwrap();
    let train = detect_echoes(&ir, syn.round_trip(), 3).unwrap();
    for p in &train.peaks {
        let predicted = (2 * p.n + 1) as f64 * syn.round_trip() / 2.0;
        assert!((p.tau - predicted).abs() <= ir.dtau());
    }
}

/// Model draws with at least four echoes above the detection floors.
pub fn echo_family(count: usize, seed: u64) -> Vec<(LossModel, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let model = fixtures::random_loss_model(&mut rng);
        // Cheap pre-screen: the fourth echo must clear the 1e-3 floor.
        if (model.r * (-model.alpha * model.length).exp()).powi(3) < 1e-3 {
            continue;
        }
        let syn = fixtures::echo_network(model);
        let ir = impulse_response(&synthesize_echo_network(&syn).unwrap(), Window::hann()).unwrap();
        let train = detect_echoes(&ir, syn.round_trip(), 8).unwrap();
        if train.usable().len() < 4 {
            continue;
        }
        let fit = fit_echo_decay(&train, model.length, KnownLoss::Reflection(model.r)).unwrap();
        out.push((model, fit.model.alpha, fit.model.t));
    }
    out
}

#[test]
fn seeded_family_recovers_alpha_and_t() {
    let fam = echo_family(100, 77);
    let mut worst = (0.0f64, 0.0f64);
    for (m, alpha, t) in fam {
        let ea = (alpha / m.alpha - 1.0).abs();
        let et = (t / m.t - 1.0).abs();
        worst = (worst.0.max(ea), worst.1.max(et));
        assert!(ea < 0.01 && et < 0.02, "{m:?}: alpha err {ea}, T err {et}");
    }
    eprintln!("worst: alpha {:.2e}, T {:.2e}", worst.0, worst.1);
}
