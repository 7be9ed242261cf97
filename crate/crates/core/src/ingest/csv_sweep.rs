use std::collections::BTreeMap;
use std::fmt::Write;

use num_complex::Complex64;

use super::{from_db_deg, to_db_deg, IngestError, NetworkSweep, PortPair};

/// Value columns for one port pair.
#[derive(Debug, Clone, PartialEq)]
pub enum PairColumns {
    ReIm { re: String, im: String },
    DbDeg { db: String, deg: String },
}

/// Which CSV columns hold what.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvColumnSpec {
    pub freq: String,
    /// Multiplier taking the frequency column to Hz.
    pub freq_scale: f64,
    pub pairs: Vec<(PortPair, PairColumns)>,
}

impl CsvColumnSpec {
    /// Infers the layout from the naming convention written by [`write_csv`]:
    /// `freq_hz` (or `freq_khz`/`freq_mhz`/`freq_ghz`) and, per pair,
    /// `s21_re`+`s21_im` or `s21_db`+`s21_deg`.
    pub fn detect(headers: &[String]) -> Result<Self, IngestError> {
        let has = |name: &str| headers.iter().any(|h| h == name);
        let freq = [("freq_hz", 1.0), ("freq_khz", 1e3), ("freq_mhz", 1e6), ("freq_ghz", 1e9)]
            .into_iter()
            .find(|(n, _)| has(n));
        let Some((freq, freq_scale)) = freq else {
            return Err(IngestError::format(
                1,
                format!(
                    "no frequency column (expected freq_hz/freq_khz/freq_mhz/freq_ghz); available headers: {}",
                    headers.join(", ")
                ),
            ));
        };
        let mut pairs = Vec::new();
        for pair in PortPair::ALL {
            let n = pair.name();
            let (re, im) = (format!("{n}_re"), format!("{n}_im"));
            let (db, deg) = (format!("{n}_db"), format!("{n}_deg"));
            if has(&re) && has(&im) {
                pairs.push((pair, PairColumns::ReIm { re, im }));
            } else if has(&db) && has(&deg) {
                pairs.push((pair, PairColumns::DbDeg { db, deg }));
            }
        }
        if pairs.is_empty() {
            return Err(IngestError::format(
                1,
                format!(
                    "no S-parameter column pairs found; available headers: {}",
                    headers.join(", ")
                ),
            ));
        }
        Ok(Self {
            freq: freq.to_string(),
            freq_scale,
            pairs,
        })
    }
}

/// Output layout for [`write_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    RealImag,
    DbPhase,
}

/// Parses a CSV sweep. With `column_spec = None` the layout is detected
/// from the header names.
pub fn parse_csv_sweep(
    text: &[u8],
    column_spec: Option<&CsvColumnSpec>,
) -> Result<NetworkSweep, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::format(1, format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::format(1, "empty file: no header row"));
    }
    let detected;
    let spec = match column_spec {
        Some(s) => s,
        None => {
            detected = CsvColumnSpec::detect(&headers)?;
            &detected
        }
    };
    let index = |name: &str| -> Result<usize, IngestError> {
        let lname = name.to_ascii_lowercase();
        headers.iter().position(|h| *h == lname).ok_or_else(|| {
            IngestError::format(
                1,
                format!("unknown column '{name}'; available headers: {}", headers.join(", ")),
            )
        })
    };
    let freq_col = index(&spec.freq)?;
    let mut layout = Vec::new();
    for (pair, cols) in &spec.pairs {
        let (a, b, polar) = match cols {
            PairColumns::ReIm { re, im } => (index(re)?, index(im)?, false),
            PairColumns::DbDeg { db, deg } => (index(db)?, index(deg)?, true),
        };
        layout.push((*pair, a, b, polar));
    }

    let mut freqs = Vec::new();
    let mut values: Vec<Vec<Complex64>> = vec![Vec::new(); layout.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| IngestError::format(line, e.to_string()))?;
        let field = |i: usize| -> Result<f64, IngestError> {
            let s = record
                .get(i)
                .ok_or_else(|| IngestError::format(line, format!("missing column {}", i + 1)))?;
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::format(line, format!("invalid number '{s}'")))
        };
        // A dB column may hold -inf: an exact zero magnitude.
        let db_field = |i: usize| -> Result<f64, IngestError> {
            match record.get(i).map(str::trim) {
                Some("-inf") | Some("-Inf") | Some("-INF") => Ok(f64::NEG_INFINITY),
                _ => field(i),
            }
        };
        let f = field(freq_col)? * spec.freq_scale;
        if let Some(prev) = freqs.last() {
            if f <= *prev {
                return Err(IngestError::format(
                    line,
                    format!("frequency {f} Hz is not greater than the previous {prev} Hz"),
                ));
            }
        }
        freqs.push(f);
        for (k, (_, a, b, polar)) in layout.iter().enumerate() {
            let a = if *polar { db_field(*a)? } else { field(*a)? };
            let b = field(*b)?;
            values[k].push(if *polar {
                from_db_deg(a, b)
            } else {
                Complex64::new(a, b)
            });
        }
    }
    if freqs.is_empty() {
        return Err(IngestError::format(2, "no data rows"));
    }
    let s: BTreeMap<_, _> = layout
        .iter()
        .map(|(p, ..)| *p)
        .zip(values)
        .collect();
    NetworkSweep::new(freqs, s)
}

/// Writes the requested port pairs with 17 significant digits.
pub fn write_csv(
    sweep: &NetworkSweep,
    which: &[PortPair],
    representation: Representation,
) -> Result<String, IngestError> {
    if which.is_empty() {
        return Err(IngestError::Argument("no port pairs requested".into()));
    }
    let mut cols = Vec::with_capacity(which.len());
    for p in which {
        cols.push(
            sweep
                .get(*p)
                .ok_or_else(|| IngestError::Argument(format!("{p} is not present in the sweep")))?,
        );
    }
    let mut out = String::from("freq_hz");
    for p in which {
        match representation {
            Representation::RealImag => write!(out, ",{p}_re,{p}_im"),
            Representation::DbPhase => write!(out, ",{p}_db,{p}_deg"),
        }
        .expect("writing to a String");
    }
    out.push('\n');
    for (i, f) in sweep.freqs().iter().enumerate() {
        write!(out, "{f:.16e}").expect("writing to a String");
        for c in &cols {
            let (a, b) = match representation {
                Representation::RealImag => (c[i].re, c[i].im),
                Representation::DbPhase => to_db_deg(c[i]),
            };
            write!(out, ",{a:.16e},{b:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

/// A numeric CSV table: named columns of equal length. Empty cells read as
/// NaN, so optional quantities survive a round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// Reads any headed, all-numeric CSV (the trace and report files written by
/// the toolkit).
pub fn parse_table(text: &[u8]) -> Result<Table, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::format(1, format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::format(1, "empty file: no header row"));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| IngestError::format(line, e.to_string()))?;
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse::<f64>().map_err(|_| {
                    IngestError::format(line, format!("'{cell}' is not a number"))
                })?
            };
            col.push(v);
        }
    }
    Ok(Table { headers, columns })
}
