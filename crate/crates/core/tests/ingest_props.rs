use num_complex::Complex64;
use proptest::prelude::*;
use sawkit::ingest::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn sweep_strategy() -> impl Strategy<Value = NetworkSweep> {
    (2usize..40, 1e3..1e10f64, 1.0..1e7f64).prop_flat_map(|(n, f0, df)| {
        let values = prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n * 4);
        values.prop_map(move |v| {
            let freqs: Vec<f64> = (0..n).map(|k| f0 + k as f64 * df).collect();
            let mut map = std::collections::BTreeMap::new();
            for (i, pair) in PortPair::ALL.iter().enumerate() {
                let col = v[i * n..(i + 1) * n]
                    .iter()
                    .map(|(r, im)| Complex64::new(*r, *im))
                    .collect();
                map.insert(*pair, col);
            }
            NetworkSweep::new(freqs, map).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn touchstone_parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_touchstone(&bytes);
    }

    #[test]
    fn touchstone_parser_survives_mangled_files(
        rows in prop::collection::vec(prop::collection::vec("[-+0-9.eE!#a-zA-Z ]{0,8}", 0..11), 0..8),
        header in "# ?(HZ|KHZ|MHZ|GHZ|hz)? ?(S|Y)? ?(RI|MA|DB)? ?(R 50)?",
    ) {
        let mut text = header.clone();
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(" "));
            text.push('\n');
        }
        if let Ok(s) = parse_touchstone(text.as_bytes()) {
            prop_assert!(!s.is_empty());
            prop_assert!(s.freqs().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn csv_parser_never_panics(text in "[-a-z0-9_.,#\\n ]{0,300}") {
        let _ = parse_csv_sweep(text.as_bytes(), None);
    }

    #[test]
    fn touchstone_round_trip_is_exact(sweep in sweep_strategy()) {
        let back = parse_touchstone(write_touchstone(&sweep).as_bytes()).unwrap();
        prop_assert_eq!(back.freqs(), sweep.freqs());
        for p in PortPair::ALL {
            prop_assert_eq!(back.get(p), sweep.get(p));
        }
    }

    #[test]
    fn csv_round_trip(sweep in sweep_strategy()) {
        let text = write_csv(&sweep, &PortPair::ALL, Representation::RealImag).unwrap();
        let back = parse_csv_sweep(text.as_bytes(), None).unwrap();
        prop_assert_eq!(back.freqs(), sweep.freqs());
        for p in PortPair::ALL {
            prop_assert_eq!(back.get(p), sweep.get(p));
        }
        let text = write_csv(&sweep, &[PortPair::S21], Representation::DbPhase).unwrap();
        let back = parse_csv_sweep(text.as_bytes(), None).unwrap();
        for (a, b) in back.get(PortPair::S21).unwrap().iter().zip(sweep.get(PortPair::S21).unwrap()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-12));
        }
    }

    #[test]
    fn polar_helpers_invert(re in -10.0..10.0f64, im in -10.0..10.0f64) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-9);
        let (db, deg) = to_db_deg(c);
        prop_assert!((from_db_deg(db, deg) - c).norm() <= 1e-12 * c.norm());
        prop_assert!((from_mag_deg(c.norm(), deg) - c).norm() <= 1e-12 * c.norm());
    }
}

#[test]
fn magnitude_angle_and_db_formats_agree() {
    let ma = "# MHZ S MA R 50\n1 0.5 90 0.1 0 0.1 0 0.5 -90\n2 1 180 0 0 0 0 1 0\n";
    let db = "# MHZ S DB R 50\n1 -6.020599913279624 90 -20 0 -20 0 -6.020599913279624 -90\n2 0 180 -400 0 -400 0 0 0\n";
    let a = parse_touchstone(ma.as_bytes()).unwrap();
    let b = parse_touchstone(db.as_bytes()).unwrap();
    assert_eq!(a.freqs(), &[1e6, 2e6]);
    for p in PortPair::ALL {
        for (x, y) in a.get(p).unwrap().iter().zip(b.get(p).unwrap()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
    let s11 = a.get(PortPair::S11).unwrap()[0];
    assert!((s11 - Complex64::new(0.0, 0.5)).norm() < 1e-15);
}
