//! Instrument data I/O: Touchstone v1 two-port files and a named-column
//! CSV schema, both parsed into a canonical [`NetworkSweep`].

mod csv_sweep;
mod touchstone;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

pub use csv_sweep::{
    parse_csv_sweep, parse_table, write_csv, CsvColumnSpec, PairColumns, Representation, Table,
};
pub use touchstone::{parse_touchstone, write_touchstone};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid sweep: {0}")]
    Invalid(String),
}

impl IngestError {
    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        IngestError::Format {
            line,
            msg: msg.into(),
        }
    }
}

/// Two-port scattering parameter index, (output port, input port).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortPair {
    S11,
    S21,
    S12,
    S22,
}

impl PortPair {
    /// Touchstone two-port column order.
    pub const ALL: [PortPair; 4] = [PortPair::S11, PortPair::S21, PortPair::S12, PortPair::S22];

    pub fn name(self) -> &'static str {
        match self {
            PortPair::S11 => "s11",
            PortPair::S21 => "s21",
            PortPair::S12 => "s12",
            PortPair::S22 => "s22",
        }
    }

    pub fn ports(self) -> (u8, u8) {
        match self {
            PortPair::S11 => (1, 1),
            PortPair::S21 => (2, 1),
            PortPair::S12 => (1, 2),
            PortPair::S22 => (2, 2),
        }
    }
}

impl fmt::Display for PortPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PortPair {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s11" => Ok(PortPair::S11),
            "s21" => Ok(PortPair::S21),
            "s12" => Ok(PortPair::S12),
            "s22" => Ok(PortPair::S22),
            other => Err(IngestError::Argument(format!("unknown port pair '{other}'"))),
        }
    }
}

/// Frequency grid with linear complex S-parameters per port pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSweep {
    freqs: Vec<f64>,
    s: BTreeMap<PortPair, Vec<Complex64>>,
    pub ref_impedance: f64,
    pub label: String,
}

impl NetworkSweep {
    pub fn new(
        freqs: Vec<f64>,
        s: BTreeMap<PortPair, Vec<Complex64>>,
    ) -> Result<Self, IngestError> {
        if freqs.is_empty() {
            return Err(IngestError::Invalid("empty frequency grid".into()));
        }
        if let Some(i) = freqs.iter().position(|f| !f.is_finite()) {
            return Err(IngestError::Invalid(format!("non-finite frequency at index {i}")));
        }
        if let Some(i) = freqs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(IngestError::Invalid(format!(
                "frequencies not strictly increasing at index {}",
                i + 1
            )));
        }
        if s.is_empty() {
            return Err(IngestError::Invalid("no S-parameters present".into()));
        }
        for (pair, v) in &s {
            if v.len() != freqs.len() {
                return Err(IngestError::Invalid(format!(
                    "{pair} has {} points but the grid has {}",
                    v.len(),
                    freqs.len()
                )));
            }
        }
        Ok(Self {
            freqs,
            s,
            ref_impedance: 50.0,
            label: String::new(),
        })
    }

    /// Sweep with a single port pair.
    pub fn single(freqs: Vec<f64>, pair: PortPair, values: Vec<Complex64>) -> Result<Self, IngestError> {
        Self::new(freqs, BTreeMap::from([(pair, values)]))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn get(&self, pair: PortPair) -> Option<&[Complex64]> {
        self.s.get(&pair).map(|v| v.as_slice())
    }

    pub fn pairs(&self) -> impl Iterator<Item = PortPair> + '_ {
        self.s.keys().copied()
    }

    /// Replaces (or adds) one port pair; the length must match the grid.
    pub fn set(&mut self, pair: PortPair, values: Vec<Complex64>) -> Result<(), IngestError> {
        if values.len() != self.freqs.len() {
            return Err(IngestError::Invalid(format!(
                "{pair} has {} points but the grid has {}",
                values.len(),
                self.freqs.len()
            )));
        }
        self.s.insert(pair, values);
        Ok(())
    }

    pub fn magnitude(&self, pair: PortPair) -> Option<Vec<f64>> {
        self.get(pair).map(|v| v.iter().map(|c| c.norm()).collect())
    }

    pub fn magnitude_db(&self, pair: PortPair) -> Option<Vec<f64>> {
        self.get(pair)
            .map(|v| v.iter().map(|c| 20.0 * c.norm().log10()).collect())
    }

    /// Whether the grid spacing is uniform to `rel_tol` of the mean step.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        if self.freqs.len() < 2 {
            return false;
        }
        let step = self.mean_step();
        self.freqs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= rel_tol * step)
    }

    pub fn mean_step(&self) -> f64 {
        let n = self.freqs.len();
        if n < 2 {
            return 0.0;
        }
        (self.freqs[n - 1] - self.freqs[0]) / (n - 1) as f64
    }
}

/// Optional acquisition metadata accompanying a sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepMeta {
    pub temperature: Option<f64>,
    /// IDT separation, m.
    pub device_length: Option<f64>,
    /// Acoustic wavelength set by the finger pitch, m.
    pub idt_pitch: Option<f64>,
    pub notes: String,
}

impl SweepMeta {
    pub fn validate(&self) -> Result<(), IngestError> {
        for (name, v) in [("device_length", self.device_length), ("idt_pitch", self.idt_pitch)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(IngestError::Invalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// (magnitude in dB, angle in degrees) -> complex.
pub fn from_db_deg(db: f64, deg: f64) -> Complex64 {
    Complex64::from_polar(10f64.powf(db / 20.0), deg.to_radians())
}

/// (linear magnitude, angle in degrees) -> complex.
pub fn from_mag_deg(mag: f64, deg: f64) -> Complex64 {
    Complex64::from_polar(mag, deg.to_radians())
}

pub fn to_db_deg(c: Complex64) -> (f64, f64) {
    (20.0 * c.norm().log10(), c.arg().to_degrees())
}
