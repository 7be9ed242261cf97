use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;

use super::{from_db_deg, from_mag_deg, IngestError, NetworkSweep, PortPair};

#[derive(Debug, Clone, Copy, PartialEq)]
enum NumberFormat {
    RealImag,
    MagAngle,
    DbAngle,
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    freq_scale: f64,
    format: NumberFormat,
    impedance: f64,
}

fn parse_option_line(line_no: usize, body: &str) -> Result<OptionLine, IngestError> {
    // Touchstone defaults when a token is omitted.
    let mut opt = OptionLine {
        freq_scale: 1e9,
        format: NumberFormat::MagAngle,
        impedance: 50.0,
    };
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.freq_scale = 1.0,
            "KHZ" => opt.freq_scale = 1e3,
            "MHZ" => opt.freq_scale = 1e6,
            "GHZ" => opt.freq_scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(IngestError::format(
                    line_no,
                    format!("only S-parameters are supported, found parameter type '{tok}'"),
                ))
            }
            "RI" => opt.format = NumberFormat::RealImag,
            "MA" => opt.format = NumberFormat::MagAngle,
            "DB" => opt.format = NumberFormat::DbAngle,
            "R" => {
                let v = tokens
                    .next()
                    .ok_or_else(|| IngestError::format(line_no, "option 'R' without impedance"))?;
                opt.impedance = v
                    .parse::<f64>()
                    .ok()
                    .filter(|z| z.is_finite() && *z > 0.0)
                    .ok_or_else(|| {
                        IngestError::format(line_no, format!("invalid reference impedance '{v}'"))
                    })?;
            }
            _ => {
                return Err(IngestError::format(
                    line_no,
                    format!("unrecognised option token '{tok}'"),
                ))
            }
        }
    }
    Ok(opt)
}

/// Parses Touchstone v1 two-port (.s2p) content.
pub fn parse_touchstone(text: &[u8]) -> Result<NetworkSweep, IngestError> {
    let text = String::from_utf8_lossy(text);
    let mut option: Option<OptionLine> = None;
    let mut freqs = Vec::new();
    let mut cols: [Vec<Complex64>; 4] = Default::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = raw.split('!').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') {
            return Err(IngestError::format(
                line_no,
                format!("Touchstone v2 keyword '{body}' is not supported (v1 only)"),
            ));
        }
        if let Some(rest) = body.strip_prefix('#') {
            // Only the first option line is significant.
            if option.is_none() {
                option = Some(parse_option_line(line_no, rest)?);
            }
            continue;
        }
        let opt = option.ok_or_else(|| {
            IngestError::format(line_no, "data row before the '#' option line (missing option line)")
        })?;
        let values: Vec<&str> = body.split_whitespace().collect();
        if values.len() != 9 {
            return Err(IngestError::format(
                line_no,
                format!("expected 9 columns for a two-port row, found {}", values.len()),
            ));
        }
        let mut nums = [0.0f64; 9];
        for (k, tok) in values.iter().enumerate() {
            nums[k] = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::format(line_no, format!("invalid number '{tok}'")))?;
        }
        let f = nums[0] * opt.freq_scale;
        if let Some(prev) = freqs.last() {
            if f <= *prev {
                return Err(IngestError::format(
                    line_no,
                    format!("frequency {f} Hz is not greater than the previous {prev} Hz"),
                ));
            }
        }
        freqs.push(f);
        for k in 0..4 {
            let (a, b) = (nums[1 + 2 * k], nums[2 + 2 * k]);
            cols[k].push(match opt.format {
                NumberFormat::RealImag => Complex64::new(a, b),
                NumberFormat::MagAngle => from_mag_deg(a, b),
                NumberFormat::DbAngle => from_db_deg(a, b),
            });
        }
    }

    let Some(opt) = option else {
        return Err(IngestError::format(0, "missing '#' option line"));
    };
    if freqs.is_empty() {
        return Err(IngestError::format(text.lines().count(), "no data rows"));
    }
    let s: BTreeMap<_, _> = PortPair::ALL.into_iter().zip(cols).collect();
    let mut sweep = NetworkSweep::new(freqs, s)?;
    sweep.ref_impedance = opt.impedance;
    Ok(sweep)
}

/// Writes the sweep as Touchstone v1 RI with 17 significant digits.
/// Port pairs absent from the sweep are written as zero.
pub fn write_touchstone(sweep: &NetworkSweep) -> String {
    let mut out = String::new();
    if !sweep.label.is_empty() {
        for l in sweep.label.lines() {
            let _ = writeln!(out, "! {l}");
        }
    }
    let missing: Vec<_> = PortPair::ALL
        .iter()
        .filter(|p| sweep.get(**p).is_none())
        .map(|p| p.name())
        .collect();
    if !missing.is_empty() {
        let _ = writeln!(out, "! not measured, written as zero: {}", missing.join(" "));
    }
    let _ = writeln!(out, "# HZ S RI R {}", sweep.ref_impedance);
    let zero = Complex64::new(0.0, 0.0);
    for (i, f) in sweep.freqs().iter().enumerate() {
        let _ = write!(out, "{f:.16e}");
        for pair in PortPair::ALL {
            let v = sweep.get(pair).map(|v| v[i]).unwrap_or(zero);
            let _ = write!(out, " {:.16e} {:.16e}", v.re, v.im);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_ri() {
        let s = parse_touchstone(b"# GHZ S RI R 50\n3.8 0.5 0 0.1 0 0.1 0 0.5 0").unwrap();
        assert_eq!(s.freqs(), &[3.8e9]);
        assert_eq!(s.get(PortPair::S21).unwrap()[0], Complex64::new(0.1, 0.0));
        assert_eq!(s.pairs().count(), 4);
        assert_eq!(s.ref_impedance, 50.0);
    }

    #[test]
    fn ma_quarter_turn() {
        let s = parse_touchstone(b"# MHZ S MA R 50\n100 1 90 1 90 1 90 1 90\n").unwrap();
        let v = s.get(PortPair::S11).unwrap()[0];
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(s.freqs()[0], 100e6);
    }

    #[test]
    fn db_magnitude() {
        let s = parse_touchstone(b"! comment\n# GHz S dB R 50\n3.8 0 0 -10.7 0 0 0 0 0\n").unwrap();
        let v = s.get(PortPair::S21).unwrap()[0];
        // 10^(-10.7/20)
        assert!((v.norm() - 0.291742701400117).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn comments_and_defaults() {
        let s = parse_touchstone(b"#\n1 1 0 1 0 1 0 1 0 ! trailing\n2 1 0 1 0 1 0 1 0\n").unwrap();
        assert_eq!(s.freqs(), &[1e9, 2e9]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_touchstone(b"! c\n3.8 0 0 0 0 0 0 0 0\n") {
            Err(IngestError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_touchstone(b"# GHZ S RI R 50\n3.8 0 0 0 0 0 0 0 0\n3.7 0 0 0 0 0 0 0 0\n") {
            Err(IngestError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_touchstone(b"# GHZ S RI R 50\n3.8 0 0 0 0 0 0\n") {
            Err(IngestError::Format { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("9 columns"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_touchstone(b"[Version] 2.0\n").is_err());
        assert!(parse_touchstone(b"# GHZ Z RI R 50\n").is_err());
        assert!(parse_touchstone(b"# GHZ S RI R 50\n").is_err());
        assert!(parse_touchstone(b"").is_err());
    }

    #[test]
    fn write_then_parse_is_exact() {
        let f = vec![1.0e9, 1.5e9, 2.0e9];
        let v = vec![
            Complex64::new(0.1234567890123, -0.3),
            Complex64::new(1e-9, 2.0 / 3.0),
            Complex64::new(-0.5, 0.0),
        ];
        let s = NetworkSweep::single(f, PortPair::S21, v.clone()).unwrap();
        let back = parse_touchstone(write_touchstone(&s).as_bytes()).unwrap();
        assert_eq!(back.get(PortPair::S21).unwrap(), v.as_slice());
        assert_eq!(back.get(PortPair::S11).unwrap()[0], Complex64::new(0.0, 0.0));
    }
}
