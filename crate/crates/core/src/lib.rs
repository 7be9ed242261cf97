//! Analysis toolkit for thin-film surface acoustic wave devices coupled to
//! silicon-vacancy spins in diamond.
//!
//! The crate is organised by analysis stage:
//!
//! * [`numerics`]: least squares, DFT, Bessel functions, dB conversions
//! * [`ingest`]: Touchstone and CSV sweep I/O into [`ingest::NetworkSweep`]
//! * [`specanalysis`]: Fabry-Perot cavity characterisation and Q budget
//! * [`timedomain`]: impulse response, gating and echo-decay loss extraction
//! * [`spinphonon`]: strain coupling rate, Gaussian beam and phonon budget
//! * [`qdyn`]: two-level Rabi/ODAR dynamics and their fits
//! * [`fixtures`]: synthetic sweeps shaped like the reference device

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod numerics;
pub mod ingest;
pub mod specanalysis;
pub mod timedomain;
pub mod spinphonon;
pub mod qdyn;
pub mod fixtures;
