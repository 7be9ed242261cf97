//! `sawkit`: cavity analysis, echo-loss extraction, time gating, phonon
//! budgets, spin-phonon coupling, simulations and fixture synthesis.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod si;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::si::parse_si;

#[derive(Debug, Parser)]
#[command(name = "sawkit", version, about = "Surface-acoustic-wave cavity and spin-phonon toolkit")]
pub struct Cli {
    /// `key = value` file; keys are long flag names, flags take priority.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write an SVG plot next to the numeric output.
    #[arg(long, global = true)]
    pub plot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonances, FSR, penetration depth, mirror reflectivity and Q budget.
    Cavity(CavityArgs),
    /// Echo train and loss model from a delay-line transmission sweep.
    EchoLoss(EchoLossArgs),
    /// Time-gate every trace of a sweep.
    Gate(GateArgs),
    /// RF power to phonon number to spin Rabi frequency.
    Budget(BudgetArgs),
    /// Resonance field and single-phonon coupling rate.
    Coupling(CouplingArgs),
    /// Two-level simulations.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Synthetic sweeps written as Touchstone.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Convert between Touchstone and CSV.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Under,
    Over,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceArg {
    S11,
    S21,
    S12,
    S22,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Hann,
    Tukey,
    None,
}

/// Whether --rabi-mhz is a cyclic frequency or an angular rate (Mrad/s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Cyclic,
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReprArg {
    Ri,
    Db,
}

#[derive(Debug, Args)]
pub struct CavityArgs {
    /// Touchstone (.s1p/.s2p) or CSV sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Cavity length between mirrors, m.
    #[arg(long, value_parser = parse_si)]
    pub d: Option<f64>,
    /// Mirror period wavelength, m.
    #[arg(long, value_parser = parse_si)]
    pub lambda0: Option<f64>,
    /// Number of mirror strips.
    #[arg(long)]
    pub n_mirror: Option<u32>,
    /// Group velocity, m/s.
    #[arg(long, value_parser = parse_si)]
    pub vg: Option<f64>,
    /// Propagation loss, dB/mm, enabling Q_propagation.
    #[arg(long, value_parser = parse_si)]
    pub alpha_db_mm: Option<f64>,
    #[arg(long, value_enum, default_value = "under")]
    pub coupling: CouplingArg,
    /// Trace to analyse (default S11 when present).
    #[arg(long, value_enum)]
    pub trace: Option<TraceArg>,
    /// Peak prominence on |S| (default: a quarter of the trace range).
    #[arg(long, value_parser = parse_si)]
    pub min_prominence: Option<f64>,
    /// Minimum mode spacing, Hz.
    #[arg(long, value_parser = parse_si)]
    pub min_spacing: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EchoLossArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// One-way propagation length, m.
    #[arg(long, value_parser = parse_si)]
    pub length: Option<f64>,
    /// Group velocity, m/s.
    #[arg(long, value_parser = parse_si)]
    pub vg: Option<f64>,
    /// Known mirror/transducer reflection amplitude R.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub known_r: Option<f64>,
    /// Known propagation loss, dB/mm.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub known_alpha: Option<f64>,
    /// Highest echo order to look for.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum, default_value = "hann")]
    pub window: WindowArg,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Gate opening delay, s.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub start: Option<f64>,
    /// Gate closing delay, s.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    /// Output file name inside the output directory (.s2p or .csv).
    #[arg(long, default_value = "gated.s2p")]
    pub output: String,
}

#[derive(Debug, Args, Default)]
pub struct StrainArgs {
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_xx: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_yy: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_zz: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_xy: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_yz: Option<f64>,
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub eps_zx: Option<f64>,
    /// Use a bundled per-phonon strain tensor instead (`low` or `high`).
    #[arg(long)]
    pub tensor: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SivArgs {
    /// Spin gyromagnetic ratio, Hz/T.
    #[arg(long, value_parser = parse_si)]
    pub gamma_s: Option<f64>,
    /// Spin-orbit splitting, Hz.
    #[arg(long, value_parser = parse_si)]
    pub lambda_so: Option<f64>,
    /// Strain susceptibility d, Hz/strain.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub d_s: Option<f64>,
    /// Strain susceptibility f, Hz/strain.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub f_s: Option<f64>,
    /// Field angle from the defect axis, degrees.
    #[arg(long, value_parser = parse_si)]
    pub theta_deg: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// RF power at the transducer, dBm (`-inf` allowed).
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub power_dbm: Option<f64>,
    /// RF power in watts (alternative to --power-dbm).
    #[arg(long, value_parser = parse_si, conflicts_with = "power_dbm")]
    pub power_w: Option<f64>,
    /// Loss chain, comma-separated dB values (each <= 0).
    #[arg(long, allow_hyphen_values = true)]
    pub loss: Option<String>,
    /// Single-phonon coupling rates to evaluate, Hz.
    #[arg(long)]
    pub g: Option<String>,
    /// Mode frequency, Hz.
    #[arg(long, value_parser = parse_si)]
    pub f0: Option<f64>,
    /// Cavity round-trip time, s.
    #[arg(long, value_parser = parse_si)]
    pub t0: Option<f64>,
    /// Beam waist, m.
    #[arg(long, value_parser = parse_si)]
    pub w0: Option<f64>,
    /// Acoustic wavelength, m.
    #[arg(long, value_parser = parse_si)]
    pub lambda_acoustic: Option<f64>,
    /// Radial offset of the defect from the beam axis, m.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Axial offset from the focus, m.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[command(flatten)]
    pub strain: StrainArgs,
    #[command(flatten)]
    pub siv: SivArgs,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    /// Mechanical mode frequency, Hz.
    #[arg(long, value_parser = parse_si)]
    pub f_mode: Option<f64>,
    /// Override the transverse field, T.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub b_x: Option<f64>,
    #[command(flatten)]
    pub strain: StrainArgs,
    #[command(flatten)]
    pub siv: SivArgs,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Resonant Rabi oscillation, optionally noisy, optionally fitted.
    Rabi(RabiArgs),
    /// Population after a fixed pulse versus drive frequency.
    Odar(OdarArgs),
    /// Phase-modulated optical line with Bessel sidebands.
    Sidebands(SidebandArgs),
}

#[derive(Debug, Args)]
pub struct RabiArgs {
    #[arg(long, value_parser = parse_si)]
    pub rabi_mhz: Option<f64>,
    #[arg(long, value_enum, default_value = "cyclic")]
    pub convention: ConventionArg,
    /// Envelope decay time, s (default: none).
    #[arg(long, value_parser = parse_si)]
    pub tau: Option<f64>,
    /// Trace length, s.
    #[arg(long, value_parser = parse_si)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Gaussian noise standard deviation on the population.
    #[arg(long, value_parser = parse_si)]
    pub noise: Option<f64>,
    /// Fit the simulated trace and write rabi_fit.txt.
    #[arg(long)]
    pub fit: bool,
}

#[derive(Debug, Args)]
pub struct OdarArgs {
    #[arg(long, value_parser = parse_si)]
    pub rabi_mhz: Option<f64>,
    #[arg(long, value_enum, default_value = "cyclic")]
    pub convention: ConventionArg,
    #[arg(long, value_parser = parse_si)]
    pub f_spin_ghz: Option<f64>,
    /// Pulse length, s.
    #[arg(long, value_parser = parse_si)]
    pub pulse: Option<f64>,
    /// Total sweep width around the spin frequency, Hz.
    #[arg(long, value_parser = parse_si)]
    pub span: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SidebandArgs {
    /// Carrier offset, Hz.
    #[arg(long, value_parser = parse_si, allow_hyphen_values = true)]
    pub carrier: Option<f64>,
    /// Modulation frequency, Hz.
    #[arg(long, value_parser = parse_si)]
    pub mod_freq: Option<f64>,
    /// Modulation index.
    #[arg(long, value_parser = parse_si)]
    pub beta: Option<f64>,
    /// Line FWHM, Hz.
    #[arg(long, value_parser = parse_si)]
    pub linewidth: Option<f64>,
    #[arg(long)]
    pub orders: Option<u32>,
    /// Total sweep width around the carrier, Hz.
    #[arg(long, value_parser = parse_si)]
    pub span: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Delay-line echo network (S21 with crosstalk, S11 reflections).
    Echo(SynthEchoArgs),
    /// Reflection comb of Lorentzian dips.
    Comb(SynthCombArgs),
}

#[derive(Debug, Args)]
pub struct SynthEchoArgs {
    #[arg(long, value_parser = parse_si)]
    pub t: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub r: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub alpha_db_mm: Option<f64>,
    /// One-way length, m (default: the length whose round trip gives a
    /// 52.6 MHz FSR).
    #[arg(long, value_parser = parse_si)]
    pub length: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub vg: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub f_start: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub f_stop: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Direct electrical crosstalk amplitude.
    #[arg(long, value_parser = parse_si)]
    pub crosstalk: Option<f64>,
    /// Complex Gaussian noise standard deviation per component.
    #[arg(long, value_parser = parse_si)]
    pub noise: Option<f64>,
    #[arg(long, default_value = "echo.s2p")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct SynthCombArgs {
    /// Centre mode frequency, Hz.
    #[arg(long, value_parser = parse_si)]
    pub f_center: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub fsr: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub q: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    pub s11_min: Option<f64>,
    /// Modes on each side of the centre.
    #[arg(long)]
    pub modes_each_side: Option<u32>,
    /// Frequency step, Hz.
    #[arg(long, value_parser = parse_si)]
    pub step: Option<f64>,
    #[arg(long, default_value = "comb.s1p")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output file name inside the output directory; the extension picks
    /// the format (.s1p/.s2p or .csv).
    #[arg(long)]
    pub output: String,
    /// CSV layout.
    #[arg(long, value_enum, default_value = "ri")]
    pub repr: ReprArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sawkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
