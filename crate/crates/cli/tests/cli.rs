use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use sawkit::ingest::{parse_csv_sweep, parse_table, parse_touchstone, PortPair};
use tempfile::TempDir;

fn sawkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sawkit"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sawkit(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    sawkit(dir, args).status.code().expect("exited normally")
}

fn kv(path: &Path) -> BTreeMap<String, String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap_or_else(|_| panic!("{key} = {}", map[key]))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const LEN: &str = "58.564638783u";

#[test]
fn usage_errors_exit_2() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    assert_eq!(code(p, &["bogus"]), 2);
    assert_eq!(code(p, &["cavity", "--input", "nope.s2p", "--d", "50u", "--lambda0", "1.7u", "--n-mirror", "40", "--vg", "6161"]), 2);
    std::fs::write(p.join("junk.s2p"), "# HZ S RI R 50\n1 2 3\n").unwrap();
    std::fs::write(p.join("data.txt"), "1,2,3\n").unwrap();
    let junk = p.join("junk.s2p");
    let txt = p.join("data.txt");
    assert_eq!(code(p, &["cavity", "--input", junk.to_str().unwrap(), "--d", "50u", "--lambda0", "1.7u", "--n-mirror", "40", "--vg", "6161"]), 2);
    assert_eq!(code(p, &["convert", "--input", txt.to_str().unwrap(), "--output", "x.csv"]), 2);
    assert_eq!(code(p, &["budget", "--loss", "-10,3"]), 2);
    assert_eq!(code(p, &["budget", "--f0", "fast"]), 2);
    assert_eq!(code(p, &["coupling"]), 2);
    assert_eq!(code(p, &["coupling", "--tensor", "medium"]), 2);
    ok(p, &["synth", "echo", "--n-points", "256"]);
    let echo = p.join("echo.s2p");
    let e = echo.to_str().unwrap();
    // Exactly one of the two known quantities.
    assert_eq!(code(p, &["echo-loss", "--input", e, "--length", LEN, "--vg", "6161"]), 2);
    assert_eq!(
        code(p, &["echo-loss", "--input", e, "--length", LEN, "--vg", "6161", "--known-r", "0.5", "--known-alpha", "3.2"]),
        2
    );
    let help = sawkit(p, &["--help"]);
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("echo-loss"));
}

#[test]
fn single_resonance_is_an_analysis_error() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "comb", "--modes-each-side", "0"]);
    let comb = p.join("comb.s1p");
    let out = sawkit(
        p,
        &["cavity", "--input", comb.to_str().unwrap(), "--d", "50u", "--lambda0", "1.7u", "--n-mirror", "40", "--vg", "6161"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("free spectral range"));
}

#[test]
fn comb_closed_loop_through_cavity() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "comb"]);
    std::fs::write(p.join("geom.cfg"), "# reference geometry\nd = 50u\nlambda0 = 1.7u\nn_mirror = 40\nvg = 6161\n").unwrap();
    let cfg = p.join("geom.cfg");
    let comb = p.join("comb.s1p");
    let stdout = ok(p, &["--config", cfg.to_str().unwrap(), "cavity", "--input", comb.to_str().unwrap(), "--alpha-db-mm", "3.2", "--plot"]);
    assert!(stdout.contains("fsr_hz="));
    let s = kv(&p.join("cavity_summary.txt"));
    assert!(rel(num(&s, "fsr_hz"), 52.6e6) < 1e-4);
    assert!(rel(num(&s, "l_p_m"), 4.28e-6) < 0.01);
    assert!(rel(num(&s, "q_propagation"), 2636.7) < 1e-3);
    let modes = parse_table(&std::fs::read(p.join("cavity_modes.csv")).unwrap()).unwrap();
    assert_eq!(modes.rows(), 7);
    for q in modes.column("q_loaded").unwrap() {
        assert!(rel(*q, 2100.0) < 0.005, "Q_L {q}");
    }
    assert!(modes.column("q_internal").unwrap().iter().all(|q| rel(*q, 2450.0) < 0.01));
    assert!(std::fs::read_to_string(p.join("cavity_trace.svg")).unwrap().contains("<polyline"));

    // A flag overrides the configured value: the wrong velocity moves L_p.
    ok(p, &["--config", cfg.to_str().unwrap(), "cavity", "--input", comb.to_str().unwrap(), "--vg", "6000"]);
    let s2 = kv(&p.join("cavity_summary.txt"));
    assert!(rel(num(&s2, "l_p_m"), 4.28e-6) > 0.05);
}

#[test]
fn echo_closed_loop_recovers_loss() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo"]);
    let e = p.join("echo.s2p");
    let e = e.to_str().unwrap();
    ok(p, &["echo-loss", "--input", e, "--length", LEN, "--vg", "6161", "--known-r", "0.5", "--plot"]);
    let m = kv(&p.join("loss_model.txt"));
    assert!(rel(num(&m, "alpha_db_per_mm"), 3.2) < 0.005, "{m:?}");
    assert!(rel(num(&m, "t"), 0.3) < 0.005);
    assert!(p.join("impulse_response.svg").exists());
    let train = parse_table(&std::fs::read(p.join("echo_train.csv")).unwrap()).unwrap();
    let taus = train.column("tau_ns").unwrap();
    assert!(rel(taus[1] - taus[0], 2.0 * 58.564638783e-6 / 6161.0 * 1e9) < 1e-3);

    ok(p, &["echo-loss", "--input", e, "--length", LEN, "--vg", "6161", "--known-alpha", "3.2"]);
    let m = kv(&p.join("loss_model.txt"));
    assert!(rel(num(&m, "r"), 0.5) < 0.005, "{m:?}");
}

#[test]
fn default_echo_fixture_through_cavity_and_echo_loss() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo"]);
    let e = p.join("echo.s2p");
    ok(p, &["cavity", "--input", e.to_str().unwrap(), "--d", "50u", "--lambda0", "1.7u", "--n-mirror", "40", "--vg", "6161"]);
    let s = kv(&p.join("cavity_summary.txt"));
    assert!(rel(num(&s, "fsr_hz"), 52.6e6) < 1e-3, "{s:?}");
    assert!(rel(num(&s, "l_p_m"), 4.28e-6) < 0.01);
    ok(p, &["echo-loss", "--input", e.to_str().unwrap(), "--length", LEN, "--vg", "6161", "--known-r", "0.5"]);
    let m = kv(&p.join("loss_model.txt"));
    assert!(rel(num(&m, "alpha_db_per_mm"), 3.2) < 0.005);
}

#[test]
fn delay_line_130um_recovers_loss() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo", "--length", "130u", "--r", "0.2", "--alpha-db-mm", "3.2"]);
    let e = p.join("echo.s2p");
    ok(p, &["echo-loss", "--input", e.to_str().unwrap(), "--length", "130u", "--vg", "6161", "--known-r", "0.2"]);
    let m = kv(&p.join("loss_model.txt"));
    assert!(rel(num(&m, "alpha_db_per_mm"), 3.2) < 0.005, "{m:?}");
    assert!(rel(num(&m, "alpha_per_m"), 736.83) < 0.005);
}

#[test]
fn lossless_fixture_gives_zero_alpha() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo", "--r", "1", "--alpha-db-mm", "0", "--length", "100u"]);
    let e = p.join("echo.s2p");
    ok(p, &["echo-loss", "--input", e.to_str().unwrap(), "--length", "100u", "--vg", "6161", "--known-r", "1"]);
    let m = kv(&p.join("loss_model.txt"));
    assert!(num(&m, "alpha_per_m").abs() < 1e-2, "{m:?}");
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let run = |seed: &str, name: &str| {
        ok(p, &["--seed", seed, "synth", "echo", "--noise", "1e-3", "--n-points", "512", "--output", name]);
        std::fs::read(p.join(name)).unwrap()
    };
    let a = run("5", "a.s2p");
    let b = run("5", "b.s2p");
    let c = run("6", "c.s2p");
    assert_eq!(a, b);
    assert_ne!(a, c);

    ok(p, &["--seed", "9", "simulate", "rabi", "--noise", "0.02"]);
    let r1 = std::fs::read(p.join("rabi.csv")).unwrap();
    ok(p, &["--seed", "9", "simulate", "rabi", "--noise", "0.02"]);
    assert_eq!(r1, std::fs::read(p.join("rabi.csv")).unwrap());
}

#[test]
fn minimal_synthesis_is_valid_touchstone() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo", "--n-points", "16", "--output", "tiny.s2p"]);
    let s = parse_touchstone(&std::fs::read(p.join("tiny.s2p")).unwrap()).unwrap();
    assert_eq!(s.len(), 16);
    assert!(s.get(PortPair::S21).unwrap().iter().any(|v| v.norm() > 0.0));
    assert_eq!(code(p, &["synth", "echo", "--n-points", "8"]), 2);
}

#[test]
fn budget_defaults_and_zero_power() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["budget"]);
    let b = kv(&p.join("budget.txt"));
    assert!(rel(num(&b, "p0_w"), 1.259e-16) < 1e-3);
    assert!(rel(num(&b, "n"), 7.943e10) < 1e-3);
    let rabi: Vec<f64> = b["rabi_hz"].split(',').map(|v| v.parse().unwrap()).collect();
    assert!(rel(rabi[0], 8.455e9) < 1e-3 && rel(rabi[1], 19.73e9) < 1e-3);

    ok(p, &["budget", "--power-w", "0"]);
    let b = kv(&p.join("budget.txt"));
    assert_eq!(num(&b, "n"), 0.0);
    assert_eq!(b["rabi_hz"], "0.0000000000e0,0.0000000000e0");

    ok(p, &["budget", "--power-dbm", "-inf"]);
    assert_eq!(num(&kv(&p.join("budget.txt")), "n"), 0.0);

    // Off-focus location scales the coupling by the beam factor.
    ok(p, &["budget", "--r", "10u", "--z", "70u", "--g", "30k"]);
    let b = kv(&p.join("budget.txt"));
    assert!((num(&b, "beam_factor") - 0.1633).abs() < 5e-4);

    // A strain tensor instead of a rate list runs the full chain.
    ok(p, &["budget", "--tensor", "low", "--f0", "3.83G"]);
    let b = kv(&p.join("budget.txt"));
    assert!(rel(num(&b, "g_hz"), 30e3) < 1e-6);
    assert_eq!(code(p, &["budget", "--tensor", "low", "--g", "30k"]), 2);
}

#[test]
fn coupling_reproduces_bundled_tensors() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    for (name, g) in [("low", 30e3), ("high", 70e3)] {
        ok(p, &["coupling", "--tensor", name]);
        let c = kv(&p.join("coupling.txt"));
        assert!(rel(num(&c, "g_hz"), g) < 1e-6);
        assert!(num(&c, "b_z_t") > 0.0 && num(&c, "b_x_t") > 0.0);
    }
    ok(p, &["coupling", "--eps-xx", "1e-9", "--eps-yy", "-1e-9"]);
    assert!(num(&kv(&p.join("coupling.txt")), "g_hz") > 0.0);
}

#[test]
fn simulations_write_parseable_traces() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let out = ok(p, &["simulate", "rabi", "--rabi-mhz", "33.4", "--points", "2001", "--fit", "--plot"]);
    assert!(out.contains("rabi_hz="));
    let t = parse_table(&std::fs::read(p.join("rabi.csv")).unwrap()).unwrap();
    let (ts, pop) = (t.column("t_s").unwrap(), t.column("population").unwrap());
    let first_max = (1..ts.len())
        .find(|&i| pop[i] < pop[i - 1])
        .map(|i| ts[i - 1])
        .unwrap();
    assert!((first_max - 14.97e-9).abs() < 0.2e-9, "first maximum at {first_max}");
    let fit = kv(&p.join("rabi_fit.txt"));
    assert!(rel(num(&fit, "rabi_hz"), 33.4e6) < 1e-6);
    assert!(p.join("rabi.svg").exists());

    // The same number read as an angular rate is 2 pi slower.
    ok(p, &["simulate", "rabi", "--rabi-mhz", "33.4", "--convention", "angular", "--t-max", "1u", "--points", "2001", "--fit"]);
    let fit = kv(&p.join("rabi_fit.txt"));
    assert!(rel(num(&fit, "rabi_rad_s"), 33.4e6) < 1e-6);

    ok(p, &["simulate", "odar", "--f-spin-ghz", "3.83"]);
    let o = parse_table(&std::fs::read(p.join("odar.csv")).unwrap()).unwrap();
    let pop = o.column("population").unwrap();
    let (imax, peak) = pop
        .iter()
        .enumerate()
        .fold((0, 0.0), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    assert!((peak - 1.0).abs() < 1e-9);
    assert!((o.column("freq_hz").unwrap()[imax] - 3.83e9).abs() < 1.0);

    ok(p, &["simulate", "sidebands", "--beta", "1.2", "--orders", "4"]);
    let s = parse_table(&std::fs::read(p.join("sidebands.csv")).unwrap()).unwrap();
    assert_eq!(s.rows(), 2001);
}

#[test]
fn convert_and_gate_round_trip() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["synth", "echo", "--n-points", "1024"]);
    let src = p.join("echo.s2p");
    let original = parse_touchstone(&std::fs::read(&src).unwrap()).unwrap();

    ok(p, &["convert", "--input", src.to_str().unwrap(), "--output", "ri.csv"]);
    let ri = parse_csv_sweep(&std::fs::read(p.join("ri.csv")).unwrap(), None).unwrap();
    assert_eq!(ri.freqs(), original.freqs());
    for pair in original.pairs() {
        assert_eq!(ri.get(pair), original.get(pair), "{pair}");
    }

    ok(p, &["convert", "--input", src.to_str().unwrap(), "--output", "db.csv", "--repr", "db"]);
    let db = parse_csv_sweep(&std::fs::read(p.join("db.csv")).unwrap(), None).unwrap();
    let (a, b) = (original.get(PortPair::S21).unwrap(), db.get(PortPair::S21).unwrap());
    assert!(a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12));

    let ri_path = p.join("ri.csv");
    ok(p, &["convert", "--input", ri_path.to_str().unwrap(), "--output", "back.s2p"]);
    let back = parse_touchstone(&std::fs::read(p.join("back.s2p")).unwrap()).unwrap();
    let c = back.get(PortPair::S21).unwrap();
    assert!(a.iter().zip(c).all(|(x, y)| (x - y).norm() < 1e-12));

    // Gating around the first transit keeps it and removes later echoes.
    ok(p, &["gate", "--input", src.to_str().unwrap(), "--start", "5n", "--stop", "15n", "--plot"]);
    let g = parse_touchstone(&std::fs::read(p.join("gated.s2p")).unwrap()).unwrap();
    assert_eq!(g.len(), original.len());
    assert!(p.join("gated.svg").exists());
}
