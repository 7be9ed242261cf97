//! Time-domain analysis of transmission sweeps: impulse response, gating,
//! echo detection, echo-decay regression for propagation loss, and the
//! synthetic echo network used to validate all of it.
//!
//! The echo model: the n-th acoustic arrival after the electrical crosstalk
//! has power |h_max(n)|^2 = T^2 R^(2n) e^(-alpha (2n+1) L), so
//! 2 ln|h_max(n)| is linear in n with slope 2 ln R - 2 alpha L.

use std::f64::consts::{LN_10, PI};
use std::fmt::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::ingest::{IngestError, NetworkSweep, PortPair};
use crate::numerics::{dft, per_m_power_to_db_per_mm, Direction, NumericsError};

/// Relative tolerance on grid spacing for operations that need a uniform grid.
pub const UNIFORM_GRID_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TdError {
    #[error("frequency grid is not uniform to {UNIFORM_GRID_TOL:e}; resample onto an even grid first")]
    NonUniformGrid,
    #[error("sweep has no {0} trace")]
    MissingTrace(PortPair),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("insufficient time resolution: {0}")]
    Resolution(String),
    #[error("echo amplitudes grow with n (slope {slope:.3e}); not a lossy echo train")]
    NonphysicalGrowth { slope: f64 },
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Spectral window applied before the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    None,
    /// Cosine taper over `taper` of the band in total, half at each edge;
    /// 1.0 is a Hann window.
    RaisedCosine { taper: f64 },
}

impl Default for Window {
    fn default() -> Self {
        Window::RaisedCosine { taper: 0.1 }
    }
}

impl Window {
    pub fn hann() -> Self {
        Window::RaisedCosine { taper: 1.0 }
    }

    pub fn weights(&self, n: usize) -> Vec<f64> {
        let mut w = vec![1.0; n];
        if let Window::RaisedCosine { taper } = *self {
            let m = ((taper.clamp(0.0, 1.0) * n as f64 / 2.0).round() as usize).min(n / 2);
            for k in 0..m {
                let v = 0.5 * (1.0 - (PI * (k as f64 + 0.5) / m as f64).cos());
                w[k] = v;
                w[n - 1 - k] = v;
            }
        }
        w
    }
}

/// |h(tau)| on a uniform delay grid starting at zero.
///
/// Normalised so that a flat-spectrum arrival of amplitude A, landing on a
/// grid point, shows up with |h| = A whatever the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub tau: Vec<f64>,
    pub h: Vec<Complex64>,
    pub source_band: (f64, f64),
    weighted: Vec<Complex64>,
    df: f64,
    weight_sum: f64,
}

impl ImpulseResponse {
    pub fn dtau(&self) -> f64 {
        self.tau[1] - self.tau[0]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.h.iter().map(|c| c.norm()).collect()
    }

    /// Band-limited response at an arbitrary delay (same normalisation as `h`).
    pub fn eval_at(&self, tau: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, 2.0 * PI * self.df * tau);
        let mut phasor = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in self.weighted.iter().enumerate() {
            acc += v * phasor;
            phasor *= step;
            if k % 64 == 63 {
                // Re-anchor the recurrence to keep rounding error flat.
                phasor = Complex64::from_polar(1.0, 2.0 * PI * self.df * tau * (k + 1) as f64);
            }
        }
        acc / self.weight_sum
    }

    /// Local maximum of |h| near `tau0`, refined off-grid by golden-section
    /// search over one grid step either side.
    pub fn refine_peak(&self, tau0: f64) -> (f64, f64) {
        let dt = self.dtau();
        let (mut a, mut b) = (tau0 - dt, tau0 + dt);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| self.eval_at(t).norm();
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..48 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let t = 0.5 * (a + b);
        let (tv, hv) = (t, f(t));
        let h0 = f(tau0);
        if h0 >= hv {
            (tau0, h0)
        } else {
            (tv, hv)
        }
    }
}

fn require_uniform(sweep: &NetworkSweep) -> Result<(), TdError> {
    if sweep.len() < 2 || !sweep.is_uniform(UNIFORM_GRID_TOL) {
        return Err(TdError::NonUniformGrid);
    }
    Ok(())
}

/// Windowed inverse transform of S21. The delay step is 1/(N df), the
/// reciprocal of the bandwidth spanned by the N frequency bins.
pub fn impulse_response(sweep: &NetworkSweep, window: Window) -> Result<ImpulseResponse, TdError> {
    require_uniform(sweep)?;
    let s21 = sweep
        .get(PortPair::S21)
        .ok_or(TdError::MissingTrace(PortPair::S21))?;
    let n = s21.len();
    let w = window.weights(n);
    let weight_sum: f64 = w.iter().sum();
    if !(weight_sum > 0.0) {
        return Err(TdError::Argument("window has no weight".into()));
    }
    let weighted: Vec<Complex64> = s21.iter().zip(&w).map(|(s, w)| s * *w).collect();
    let unitary = dft(&weighted, Direction::Inverse)?;
    let scale = (n as f64).sqrt() / weight_sum;
    let h = unitary.into_iter().map(|v| v * scale).collect();
    let df = sweep.mean_step();
    let dtau = 1.0 / (n as f64 * df);
    let f = sweep.freqs();
    Ok(ImpulseResponse {
        tau: (0..n).map(|m| m as f64 * dtau).collect(),
        h,
        source_band: (f[0], f[n - 1]),
        weighted,
        df,
        weight_sum,
    })
}

/// Zeroes every port pair's impulse response outside `[start, stop]` and
/// transforms back. No window is applied, so a gate covering the whole
/// record is the identity.
pub fn time_gate(sweep: &NetworkSweep, gate: (f64, f64)) -> Result<NetworkSweep, TdError> {
    let (start, stop) = gate;
    if !(stop > start) {
        return Err(TdError::Argument(format!("empty gate [{start}, {stop}]")));
    }
    require_uniform(sweep)?;
    let n = sweep.len();
    let dtau = 1.0 / (n as f64 * sweep.mean_step());
    let mut out = sweep.clone();
    let pairs: Vec<_> = sweep.pairs().collect();
    for pair in pairs {
        let s = sweep.get(pair).expect("pair listed by the sweep");
        let mut h = dft(s, Direction::Inverse)?;
        for (m, v) in h.iter_mut().enumerate() {
            let tau = m as f64 * dtau;
            if tau < start || tau > stop {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        out.set(pair, dft(&h, Direction::Forward)?)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoPeak {
    pub n: usize,
    pub tau: f64,
    pub h_max: f64,
    /// Below the noise floor or the dynamic-range floor.
    pub below_floor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoTrain {
    pub peaks: Vec<EchoPeak>,
    pub round_trip: f64,
    /// Median of |h| over the record.
    pub noise_median: f64,
}

impl EchoTrain {
    /// Leading echoes above both floors, consecutive from n = 0.
    pub fn usable(&self) -> &[EchoPeak] {
        let k = self
            .peaks
            .iter()
            .position(|p| p.below_floor)
            .unwrap_or(self.peaks.len());
        &self.peaks[..k]
    }

    /// `n,tau_ns,h_max,2ln_h_max` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,tau_ns,h_max,2ln_h_max\n");
        for p in &self.peaks {
            let _ = writeln!(
                out,
                "{},{:.10e},{:.16e},{:.16e}",
                p.n,
                p.tau * 1e9,
                p.h_max,
                2.0 * p.h_max.ln()
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoDetectOptions {
    /// Flag echoes below this multiple of the median |h|.
    pub noise_factor: f64,
    /// Flag echoes below this fraction of the first echo; window sidelobes
    /// limit the usable dynamic range even without noise.
    pub dynamic_range: f64,
}

impl Default for EchoDetectOptions {
    fn default() -> Self {
        Self {
            noise_factor: 3.0,
            dynamic_range: 1e-3,
        }
    }
}

/// Echo maxima for n = 0..=n_max with default floors.
pub fn detect_echoes(
    ir: &ImpulseResponse,
    expected_round_trip: f64,
    n_max: usize,
) -> Result<EchoTrain, TdError> {
    detect_echoes_with(ir, expected_round_trip, n_max, &EchoDetectOptions::default())
}

/// The n-th echo is the largest |h| within one round trip centred on its
/// predicted arrival (2n+1) round_trip / 2, excluding the crosstalk region
/// tau < round_trip / 4, refined between grid points.
pub fn detect_echoes_with(
    ir: &ImpulseResponse,
    expected_round_trip: f64,
    n_max: usize,
    options: &EchoDetectOptions,
) -> Result<EchoTrain, TdError> {
    let dtau = ir.dtau();
    let rt = expected_round_trip;
    if !(rt >= 2.0 * dtau) {
        return Err(TdError::Resolution(format!(
            "round trip {rt:.4e} s is shorter than two delay bins ({:.4e} s)",
            2.0 * dtau
        )));
    }
    let mag = ir.magnitude();
    let mut sorted = mag.clone();
    sorted.sort_by(f64::total_cmp);
    let noise_median = sorted[sorted.len() / 2];

    let mut peaks = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let centre = (2 * n + 1) as f64 * rt / 2.0;
        let lo = (centre - rt / 2.0).max(rt / 4.0);
        let hi = centre + rt / 2.0;
        let best = ir
            .tau
            .iter()
            .enumerate()
            .filter(|(_, t)| **t >= lo && **t < hi)
            .max_by(|a, b| mag[a.0].total_cmp(&mag[b.0]));
        let Some((k, _)) = best else {
            return Err(TdError::Resolution(format!(
                "no delay samples in the window for echo {n} ([{lo:.4e}, {hi:.4e}) s)"
            )));
        };
        let (tau, h_max) = ir.refine_peak(ir.tau[k]);
        peaks.push(EchoPeak {
            n,
            tau,
            h_max,
            below_floor: false,
        });
    }
    let first = peaks[0].h_max;
    for p in &mut peaks {
        p.below_floor = p.h_max < options.noise_factor * noise_median
            || p.h_max < options.dynamic_range * first;
    }
    Ok(EchoTrain {
        peaks,
        round_trip: rt,
        noise_median,
    })
}

/// IDT conversion T, mirror power reflection R, power attenuation alpha
/// (1/m) over propagation length L (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub t: f64,
    pub r: f64,
    pub alpha: f64,
    pub length: f64,
}

impl LossModel {
    pub fn validate(&self) -> Result<(), TdError> {
        let ok = (0.0..=1.0).contains(&self.t)
            && (0.0..=1.0).contains(&self.r)
            && self.alpha >= 0.0
            && self.alpha.is_finite()
            && self.length > 0.0
            && self.length.is_finite();
        if ok {
            Ok(())
        } else {
            Err(TdError::Argument(format!("invalid loss model {self:?}")))
        }
    }

    pub fn alpha_db_per_mm(&self) -> f64 {
        per_m_power_to_db_per_mm(self.alpha)
    }

    /// Amplitude of the n-th arrival, T R^n e^{-alpha (2n+1) L / 2}.
    pub fn echo_amplitude(&self, n: usize) -> f64 {
        self.t * self.r.powi(n as i32) * (-self.alpha * (2 * n + 1) as f64 * self.length / 2.0).exp()
    }

    /// `key=value` block with alpha in both 1/m and dB/mm.
    pub fn summary(&self) -> String {
        format!(
            "t={:.10e}\nr={:.10e}\nalpha_per_m={:.10e}\nalpha_db_per_mm={:.10e}\nlength_m={:.10e}\n",
            self.t,
            self.r,
            self.alpha,
            self.alpha_db_per_mm(),
            self.length
        )
    }
}

/// The externally supplied quantity that separates R from alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownLoss {
    Reflection(f64),
    /// Power attenuation, 1/m.
    Alpha(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoDecayFit {
    pub model: LossModel,
    /// Intercept and slope of 2 ln h_max(n) = a + b n.
    pub intercept: f64,
    pub slope: f64,
    pub echoes_used: usize,
}

/// Ordinary least squares of 2 ln h_max(n) against n over the usable echoes.
pub fn fit_echo_decay(
    train: &EchoTrain,
    length: f64,
    known: KnownLoss,
) -> Result<EchoDecayFit, TdError> {
    if !(length > 0.0) {
        return Err(TdError::Argument(format!("length must be positive, got {length}")));
    }
    let used = train.usable();
    if used.len() < 2 {
        return Err(TdError::Argument(format!(
            "{} usable echo(es); at least 2 are needed",
            used.len()
        )));
    }
    if used.iter().any(|p| !(p.h_max > 0.0)) {
        return Err(TdError::Argument("echo maxima must be positive".into()));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| 2.0 * p.h_max.ln()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;

    // Refined echo maxima carry relative errors near 1e-7 even without
    // noise, so a lossless train can show a slope of that size either way.
    const SLACK: f64 = 1e-6;
    let (r, alpha) = match known {
        KnownLoss::Reflection(r) => {
            if !(r > 0.0 && r <= 1.0) {
                return Err(TdError::Argument(format!("R must lie in (0, 1], got {r}")));
            }
            let mut alpha = (2.0 * r.ln() - b) / (2.0 * length);
            if alpha < 0.0 {
                if alpha * 2.0 * length < -SLACK {
                    return Err(TdError::NonphysicalGrowth { slope: b });
                }
                alpha = 0.0;
            }
            (r, alpha)
        }
        KnownLoss::Alpha(alpha) => {
            if !(alpha >= 0.0) || !alpha.is_finite() {
                return Err(TdError::Argument(format!("alpha must be >= 0, got {alpha}")));
            }
            let r = ((b + 2.0 * alpha * length) / 2.0).exp();
            if r > 1.0 + SLACK {
                return Err(TdError::Inconsistent(format!(
                    "recovered reflection R = {r} exceeds 1"
                )));
            }
            (r.min(1.0), alpha)
        }
    };
    let t = ((a + alpha * length) / 2.0).exp();
    if !(t > 0.0) || t > 1.0 + SLACK {
        return Err(TdError::Inconsistent(format!(
            "recovered conversion efficiency T = {t} outside (0, 1]"
        )));
    }
    Ok(EchoDecayFit {
        model: LossModel {
            t: t.min(1.0),
            r,
            alpha,
            length,
        },
        intercept: a,
        slope: b,
        echoes_used: used.len(),
    })
}

/// IDT passband: raised-cosine envelope, flat over (1 - rolloff) of the
/// nominal band and tapering to zero over (1 + rolloff).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdtResponse {
    pub center: f64,
    pub fractional_bandwidth: f64,
    pub rolloff: f64,
}

impl IdtResponse {
    pub fn gain(&self, f: f64) -> f64 {
        let bw = self.fractional_bandwidth * self.center;
        let x = (f - self.center).abs();
        let inner = 0.5 * (1.0 - self.rolloff) * bw;
        let outer = 0.5 * (1.0 + self.rolloff) * bw;
        if x <= inner {
            1.0
        } else if x >= outer {
            0.0
        } else {
            0.5 * (1.0 + (PI * (x - inner) / (outer - inner)).cos())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSynthesis {
    pub model: LossModel,
    pub v_g: f64,
    /// Inclusive first and last frequency, Hz.
    pub band: (f64, f64),
    pub n_points: usize,
    pub crosstalk: Complex64,
    /// `None` is a flat response across the band.
    pub idt: Option<IdtResponse>,
    /// Standard deviation of each of the real and imaginary noise parts.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl EchoSynthesis {
    pub fn new(model: LossModel, v_g: f64, band: (f64, f64), n_points: usize) -> Self {
        Self {
            model,
            v_g,
            band,
            n_points,
            crosstalk: Complex64::new(0.0, 0.0),
            idt: None,
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn round_trip(&self) -> f64 {
        2.0 * self.model.length / self.v_g
    }
}

/// S21(f) = crosstalk + G(f) sum_n sqrt(T^2 R^2n e^{-alpha (2n+1) L})
/// e^{-i 2 pi f (2n+1) L / v_g}, plus optional seeded complex noise.
///
/// The sum stops once the next term falls below 1e-6 of the first, or when
/// arrivals would alias past the unambiguous delay range 1/df.
pub fn synthesize_echo_network(spec: &EchoSynthesis) -> Result<NetworkSweep, TdError> {
    spec.model.validate()?;
    let (f0, f1) = spec.band;
    if !(f1 > f0) || !(f0 >= 0.0) {
        return Err(TdError::Argument(format!("invalid band ({f0}, {f1})")));
    }
    if spec.n_points < 16 {
        return Err(TdError::Argument(format!(
            "at least 16 points are required, got {}",
            spec.n_points
        )));
    }
    if !(spec.v_g > 0.0) || !(spec.noise_sigma >= 0.0) {
        return Err(TdError::Argument("v_g must be positive and noise non-negative".into()));
    }
    let n = spec.n_points;
    let df = (f1 - f0) / (n - 1) as f64;
    let freqs: Vec<f64> = (0..n).map(|k| f0 + k as f64 * df).collect();

    let m = &spec.model;
    let one_way = m.length / spec.v_g;
    let unambiguous = 1.0 / df;
    let ratio = m.r * (-m.alpha * m.length).exp();
    let mut n_cut = 0usize;
    if m.t > 0.0 {
        loop {
            let next = n_cut + 1;
            let tail_small = ratio.powi(next as i32) < 1e-6;
            let aliased = (2 * next + 1) as f64 * one_way >= unambiguous;
            if tail_small || aliased || next > 100_000 {
                break;
            }
            n_cut = next;
        }
    }
    let amps: Vec<f64> = (0..=n_cut).map(|k| m.echo_amplitude(k)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| TdError::Argument(e.to_string()))?;
    let s21: Vec<Complex64> = freqs
        .iter()
        .map(|f| {
            let g = spec.idt.map_or(1.0, |idt| idt.gain(*f));
            let mut v = spec.crosstalk;
            if g != 0.0 && m.t > 0.0 {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, a) in amps.iter().enumerate() {
                    let delay = (2 * k + 1) as f64 * one_way;
                    acc += Complex64::from_polar(*a, -2.0 * PI * f * delay);
                }
                v += acc * g;
            }
            if spec.noise_sigma > 0.0 {
                v += Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng));
            }
            v
        })
        .collect();
    Ok(NetworkSweep::single(freqs, PortPair::S21, s21)?.with_label(format!(
        "synthetic echo network: T={} R={} alpha={} dB/mm L={} m v_g={} m/s",
        m.t,
        m.r,
        m.alpha * 10.0 / (1000.0 * LN_10),
        m.length,
        spec.v_g
    )))
}
