use crate::numerics::{
    least_squares, DoubleLorentzian, FitResult, Lorentzian, LsqOptions, Model, Series,
};

use super::peaks::find_peaks;
use super::SpecError;

/// offset + amplitude (fwhm/2)^2 / ((f - f0)^2 + (fwhm/2)^2).
/// A negative amplitude describes a dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPeak {
    pub f0: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl LorentzianPeak {
    pub fn q(&self) -> f64 {
        self.f0 / self.fwhm
    }

    pub fn eval(&self, f: f64) -> f64 {
        Lorentzian.eval(f, &self.params())
    }

    /// Trace value at the centre: offset + amplitude.
    pub fn extremum(&self) -> f64 {
        self.offset + self.amplitude
    }

    fn params(&self) -> [f64; 4] {
        [self.f0, self.fwhm, self.amplitude, self.offset]
    }

    fn from_params(p: &[f64]) -> Self {
        Self {
            f0: p[0],
            fwhm: p[1].abs(),
            amplitude: p[2],
            offset: p[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    pub peak: LorentzianPeak,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleLorentzianFit {
    /// Ascending in f0; both share `offset`.
    pub peaks: [LorentzianPeak; 2],
    /// One component is negligible or the two are not separable.
    pub degenerate: bool,
    pub fit: FitResult,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Width of the excursion around `k` at half its height above `base`,
/// linearly interpolated; falls back to a quarter of the span.
fn half_width(x: &[f64], y: &[f64], k: usize, base: f64) -> f64 {
    let half = 0.5 * (y[k] - base);
    let level = |i: usize| (y[i] - base) * half.signum();
    let target = half.abs();
    let mut left = None;
    for i in (0..k).rev() {
        if level(i) <= target {
            let (a, b) = (level(i), level(i + 1));
            let t = if b != a { (target - a) / (b - a) } else { 0.0 };
            left = Some(x[i] + t * (x[i + 1] - x[i]));
            break;
        }
    }
    let mut right = None;
    for i in k + 1..x.len() {
        if level(i) <= target {
            let (a, b) = (level(i - 1), level(i));
            let t = if b != a { (a - target) / (a - b) } else { 0.0 };
            right = Some(x[i - 1] + t * (x[i] - x[i - 1]));
            break;
        }
    }
    let span = x[x.len() - 1] - x[0];
    match (left, right) {
        (Some(l), Some(r)) => (r - l).max(1e-6 * span),
        (Some(l), None) => 2.0 * (x[k] - l).max(1e-6 * span),
        (None, Some(r)) => 2.0 * (r - x[k]).max(1e-6 * span),
        (None, None) => 0.25 * span,
    }
}

fn flat(y: &[f64]) -> bool {
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs());
    hi - lo <= 1e-12 * scale || hi == lo
}

fn initial_guess(x: &[f64], y: &[f64]) -> LorentzianPeak {
    let offset = median(y);
    let k = (0..y.len())
        .max_by(|a, b| (y[*a] - offset).abs().total_cmp(&(y[*b] - offset).abs()))
        .unwrap_or(0);
    LorentzianPeak {
        f0: x[k],
        fwhm: half_width(x, y, k, offset),
        amplitude: y[k] - offset,
        offset,
    }
}

/// Least-squares Lorentzian fit over `window` (inclusive, Hz). Works for
/// peaks and dips; Q_loaded is `peak.q()`.
pub fn fit_lorentzian(
    trace: &Series,
    window: (f64, f64),
    init: Option<&LorentzianPeak>,
) -> Result<LorentzianFit, SpecError> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SpecError::Argument(format!("empty fit window ({lo}, {hi})")));
    }
    let count = trace.count_in(lo, hi);
    if count < 8 {
        return Err(SpecError::Argument(format!(
            "fit window holds {count} samples, at least 8 are needed"
        )));
    }
    let data = trace.window(lo, hi)?;
    if flat(&data.y) {
        return Err(SpecError::Degenerate {
            msg: "trace is flat inside the window".into(),
            fit: None,
        });
    }
    let guess = init.copied().unwrap_or_else(|| initial_guess(&data.x, &data.y));
    let span = hi - lo;
    let step = span / (count - 1) as f64;
    let opts = LsqOptions::with_bounds(vec![
        (lo, hi),
        (1e-3 * step, 10.0 * span),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ]);
    let fit = least_squares(&Lorentzian, &data, &guess.params(), &opts)?;
    let peak = LorentzianPeak::from_params(&fit.params);
    let range = data.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - data.y.iter().cloned().fold(f64::INFINITY, f64::min);
    if fit.rank_deficient || peak.amplitude.abs() <= 1e-9 * range {
        return Err(SpecError::Degenerate {
            msg: format!("fitted amplitude {} is indistinguishable from zero", peak.amplitude),
            fit: Some(fit),
        });
    }
    if !fit.converged {
        return Err(SpecError::NotConverged { fit });
    }
    Ok(LorentzianFit { peak, fit })
}

/// Sum of two Lorentzians with a shared offset over `window`.
pub fn fit_double_lorentzian(
    trace: &Series,
    window: (f64, f64),
) -> Result<DoubleLorentzianFit, SpecError> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SpecError::Argument(format!("empty fit window ({lo}, {hi})")));
    }
    let count = trace.count_in(lo, hi);
    if count < 16 {
        return Err(SpecError::Argument(format!(
            "fit window holds {count} samples, at least 16 are needed"
        )));
    }
    let data = trace.window(lo, hi)?;
    if flat(&data.y) {
        return Err(SpecError::Degenerate {
            msg: "trace is flat inside the window".into(),
            fit: None,
        });
    }
    let first = initial_guess(&data.x, &data.y);
    let sign = first.amplitude.signum();
    let offset = first.offset;

    // Candidate extrema in the polarity of the dominant feature.
    let oriented = Series::new(
        data.x.clone(),
        data.y.iter().map(|v| sign * (v - offset)).collect(),
    )?;
    let mut cands = find_peaks(&oriented, 0.05 * first.amplitude.abs(), 0.0);
    cands.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));

    let (a, b) = if cands.len() >= 2 {
        let sep = (cands[0].freq - cands[1].freq).abs();
        let mk = |c: &super::PeakCandidate| LorentzianPeak {
            f0: c.freq,
            fwhm: half_width(&data.x, &data.y, c.index, offset).min(sep),
            amplitude: data.y[c.index] - offset,
            offset,
        };
        (mk(&cands[0]), mk(&cands[1]))
    } else {
        // Seed the second component at the largest residual of a single fit.
        let single = least_squares(&Lorentzian, &data, &first.params(), &LsqOptions::default())?;
        let p1 = LorentzianPeak::from_params(&single.params);
        let k = (0..data.len())
            .max_by(|i, j| {
                let ri = (data.y[*i] - p1.eval(data.x[*i])).abs();
                let rj = (data.y[*j] - p1.eval(data.x[*j])).abs();
                ri.total_cmp(&rj)
            })
            .unwrap_or(0);
        let p2 = LorentzianPeak {
            f0: data.x[k],
            fwhm: p1.fwhm,
            amplitude: data.y[k] - p1.eval(data.x[k]),
            offset: p1.offset,
        };
        (p1, p2)
    };

    let span = hi - lo;
    let step = span / (count - 1) as f64;
    let wb = (1e-3 * step, 10.0 * span);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let opts = LsqOptions::with_bounds(vec![(lo, hi), wb, free, (lo, hi), wb, free, free]);
    let init = [a.f0, a.fwhm, a.amplitude, b.f0, b.fwhm, b.amplitude, a.offset];
    let fit = least_squares(&DoubleLorentzian, &data, &init, &opts)?;
    let p = &fit.params;
    let mut peaks = [
        LorentzianPeak::from_params(&[p[0], p[1], p[2], p[6]]),
        LorentzianPeak::from_params(&[p[3], p[4], p[5], p[6]]),
    ];
    peaks.sort_by(|x, y| x.f0.total_cmp(&y.f0));

    let (a1, a2) = (peaks[0].amplitude.abs(), peaks[1].amplitude.abs());
    let unresolved = (peaks[1].f0 - peaks[0].f0) < 0.25 * peaks[0].fwhm.min(peaks[1].fwhm);
    let degenerate = fit.rank_deficient || a1.min(a2) < 1e-3 * a1.max(a2) || unresolved;
    if !degenerate && !fit.converged {
        return Err(SpecError::NotConverged { fit });
    }
    Ok(DoubleLorentzianFit {
        peaks,
        degenerate,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(peaks: &[LorentzianPeak], x: &[f64]) -> Series {
        let off = peaks[0].offset;
        let y = x
            .iter()
            .map(|f| off + peaks.iter().map(|p| p.eval(*f) - p.offset).sum::<f64>())
            .collect();
        Series::new(x.to_vec(), y).unwrap()
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn reference_mode_q_is_recovered() {
        let truth = LorentzianPeak {
            f0: 4.08e9,
            fwhm: 4.08e9 / 2100.0,
            amplitude: -0.286,
            offset: 1.0,
        };
        let x = grid(4.07e9, 4.09e9, 401);
        let fit = fit_lorentzian(&synth(&[truth], &x), (4.07e9, 4.09e9), None).unwrap();
        assert!((fit.peak.q() / 2100.0 - 1.0).abs() < 1e-4);
        assert!((fit.peak.extremum() - 0.714).abs() < 1e-9);
    }

    #[test]
    fn flat_trace_is_degenerate() {
        let x = grid(0.0, 1.0, 50);
        let s = Series::new(x, vec![0.3; 50]).unwrap();
        assert!(matches!(
            fit_lorentzian(&s, (0.0, 1.0), None),
            Err(SpecError::Degenerate { .. })
        ));
    }

    #[test]
    fn too_few_samples() {
        let x = grid(0.0, 1.0, 7);
        let s = Series::new(x, vec![0.0, 0.1, 0.5, 1.0, 0.5, 0.1, 0.0]).unwrap();
        assert!(matches!(
            fit_lorentzian(&s, (0.0, 1.0), None),
            Err(SpecError::Argument(_))
        ));
    }

    #[test]
    fn split_pair_is_recovered() {
        let w = 1e6;
        let a = LorentzianPeak { f0: 100e6, fwhm: w, amplitude: 1.0, offset: 0.1 };
        let b = LorentzianPeak { f0: 105e6, fwhm: w, amplitude: 0.6, offset: 0.1 };
        let x = grid(95e6, 110e6, 601);
        let fit = fit_double_lorentzian(&synth(&[a, b], &x), (95e6, 110e6)).unwrap();
        assert!(!fit.degenerate);
        for (got, want) in fit.peaks.iter().zip([a, b]) {
            assert!((got.f0 / want.f0 - 1.0).abs() < 1e-3);
            assert!((got.fwhm / want.fwhm - 1.0).abs() < 1e-3);
            assert!((got.amplitude / want.amplitude - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn single_peak_data_flags_degeneracy() {
        let a = LorentzianPeak { f0: 100e6, fwhm: 1e6, amplitude: 1.0, offset: 0.0 };
        let x = grid(95e6, 105e6, 401);
        let fit = fit_double_lorentzian(&synth(&[a], &x), (95e6, 105e6)).unwrap();
        assert!(fit.degenerate);
        let big = fit.peaks.iter().map(|p| p.amplitude.abs()).fold(0.0, f64::max);
        let small = fit.peaks.iter().map(|p| p.amplitude.abs()).fold(f64::INFINITY, f64::min);
        assert!((big - 1.0).abs() < 1e-3 || small < 1e-3 * big || (fit.peaks[1].f0 - fit.peaks[0].f0).abs() < 0.25e6);
    }

    #[test]
    fn identical_overlapping_peaks() {
        let a = LorentzianPeak { f0: 100e6, fwhm: 1e6, amplitude: 0.5, offset: 0.0 };
        let x = grid(95e6, 105e6, 401);
        let fit = fit_double_lorentzian(&synth(&[a, a], &x), (95e6, 105e6)).unwrap();
        let near_equal = (fit.peaks[0].amplitude - fit.peaks[1].amplitude).abs() < 1e-3
            && (fit.peaks[0].f0 - fit.peaks[1].f0).abs() < 1e3;
        assert!(fit.degenerate || near_equal);
    }
}
