use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{NumericsError, Series};

/// A parametric real function y = f(x; p) with an optional analytic gradient.
pub trait Model {
    fn arity(&self) -> usize;

    fn eval(&self, x: f64, params: &[f64]) -> f64;

    /// d f / d p at `x`. The default is a central finite difference.
    fn gradient(&self, x: f64, params: &[f64], out: &mut [f64]) {
        finite_difference_gradient(self, x, params, out);
    }
}

/// Central-difference gradient with a per-parameter step of cbrt(eps)*|p|.
pub fn finite_difference_gradient<M: Model + ?Sized>(
    model: &M,
    x: f64,
    params: &[f64],
    out: &mut [f64],
) {
    let mut p = params.to_vec();
    let base = f64::EPSILON.cbrt();
    for i in 0..params.len() {
        let h = if params[i] != 0.0 {
            base * params[i].abs()
        } else {
            base
        };
        p[i] = params[i] + h;
        let up = model.eval(x, &p);
        p[i] = params[i] - h;
        let down = model.eval(x, &p);
        p[i] = params[i];
        out[i] = (up - down) / (2.0 * h);
    }
}

/// y = a + b x, params `[a, b]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Line;

impl Model for Line {
    fn arity(&self) -> usize {
        2
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] * x
    }

    fn gradient(&self, x: f64, _p: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        out[1] = x;
    }
}

/// offset + amplitude (w/2)^2 / ((x - x0)^2 + (w/2)^2),
/// params `[x0, fwhm, amplitude, offset]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lorentzian;

fn lorentz_terms(x: f64, x0: f64, fwhm: f64, amp: f64, out: &mut [f64]) -> f64 {
    let g = 0.5 * fwhm;
    let d = x - x0;
    let den = d * d + g * g;
    let shape = g * g / den;
    out[0] = amp * g * g * 2.0 * d / (den * den);
    out[1] = amp * g * d * d / (den * den);
    out[2] = shape;
    amp * shape
}

impl Model for Lorentzian {
    fn arity(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let g = 0.5 * p[1];
        let d = x - p[0];
        p[3] + p[2] * g * g / (d * d + g * g)
    }

    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]) {
        lorentz_terms(x, p[0], p[1], p[2], &mut out[0..3]);
        out[3] = 1.0;
    }
}

/// Two Lorentzians sharing one offset,
/// params `[x1, fwhm1, amp1, x2, fwhm2, amp2, offset]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleLorentzian;

impl Model for DoubleLorentzian {
    fn arity(&self) -> usize {
        7
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let one = |x0: f64, w: f64, a: f64| {
            let g = 0.5 * w;
            let d = x - x0;
            a * g * g / (d * d + g * g)
        };
        p[6] + one(p[0], p[1], p[2]) + one(p[3], p[4], p[5])
    }

    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]) {
        lorentz_terms(x, p[0], p[1], p[2], &mut out[0..3]);
        lorentz_terms(x, p[3], p[4], p[5], &mut out[3..6]);
        out[6] = 1.0;
    }
}

/// offset - amplitude e^{-rate t} cos(2 pi f t),
/// params `[f, rate, amplitude, offset]`.
///
/// With offset = amplitude = 1/2 this is the decaying Rabi population.
#[derive(Debug, Clone, Copy, Default)]
pub struct DampedCosine;

impl Model for DampedCosine {
    fn arity(&self) -> usize {
        4
    }

    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        p[3] - p[2] * (-p[1] * t).exp() * (2.0 * PI * p[0] * t).cos()
    }

    fn gradient(&self, t: f64, p: &[f64], out: &mut [f64]) {
        let e = (-p[1] * t).exp();
        let (s, c) = (2.0 * PI * p[0] * t).sin_cos();
        out[0] = p[2] * e * s * 2.0 * PI * t;
        out[1] = p[2] * e * c * t;
        out[2] = -e * c;
        out[3] = 1.0;
    }
}

/// Wraps a closure as a [`Model`]; gradients come from finite differences.
pub struct FnModel<F> {
    arity: usize,
    f: F,
}

impl<F: Fn(f64, &[f64]) -> f64> FnModel<F> {
    pub fn new(arity: usize, f: F) -> Self {
        Self { arity, f }
    }
}

impl<F: Fn(f64, &[f64]) -> f64> Model for FnModel<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        (self.f)(x, p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqOptions {
    pub max_iterations: usize,
    /// Optional closed interval per parameter; steps are projected onto it.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Relative (scaled) step size below which the fit is converged.
    pub step_tolerance: f64,
    /// Relative decrease of the residual sum below which the fit is converged.
    pub residual_tolerance: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            bounds: None,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-12,
        }
    }
}

impl LsqOptions {
    pub fn with_bounds(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds: Some(bounds),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Euclidean norm of the residual vector at `params`.
    pub residual_norm: f64,
    /// Parameter covariance s^2 (J^T J)^{-1}; absent when J^T J is singular
    /// or there are no spare degrees of freedom.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub converged: bool,
    pub iterations: usize,
    /// J^T J at the solution was numerically singular, or some parameter
    /// no longer influences the model.
    pub rank_deficient: bool,
}

impl FitResult {
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| (0..c.len()).map(|i| c[i][i].max(0.0).sqrt()).collect())
    }
}

const DAMPING_MAX: f64 = 1e16;
const DAMPING_MIN: f64 = 1e-15;

fn residuals<M: Model + ?Sized>(
    model: &M,
    x: &[f64],
    y: &[f64],
    p: &[f64],
    out: &mut [f64],
) -> Option<f64> {
    let mut ss = 0.0;
    for i in 0..x.len() {
        let r = y[i] - model.eval(x[i], p);
        if !r.is_finite() {
            return None;
        }
        out[i] = r;
        ss += r * r;
    }
    Some(ss)
}

fn jacobian<M: Model + ?Sized>(model: &M, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    let mut j = DMatrix::zeros(x.len(), n);
    let mut row = vec![0.0; n];
    for (i, xi) in x.iter().enumerate() {
        model.gradient(*xi, p, &mut row);
        for k in 0..n {
            j[(i, k)] = row[k];
        }
    }
    j
}

fn project(p: &mut [f64], bounds: Option<&Vec<(f64, f64)>>) {
    if let Some(b) = bounds {
        for (v, (lo, hi)) in p.iter_mut().zip(b) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// Inverse of a symmetric positive semi-definite matrix, or `None` when its
/// condition number is beyond what double precision can resolve.
fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    // Equilibrate so that parameters on very different scales do not look
    // singular.
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let scaled = DMatrix::from_fn(n, n, |i, k| a[(i, k)] / (d[i] * d[k]));
    let eig = scaled.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > max * 1e-13) {
        return None;
    }
    let inv = scaled.cholesky()?.inverse();
    Some(DMatrix::from_fn(n, n, |i, k| inv[(i, k)] / (d[i] * d[k])))
}

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of `model` to `data`.
///
/// The damping term is lambda * diag(J^T J); lambda is divided by 10 after an
/// accepted step and multiplied by 10 after a rejected one.
pub fn least_squares<M: Model + ?Sized>(
    model: &M,
    data: &Series,
    initial_params: &[f64],
    options: &LsqOptions,
) -> Result<FitResult, NumericsError> {
    let n = model.arity();
    let m = data.len();
    if initial_params.len() != n {
        return Err(NumericsError::Argument(format!(
            "model takes {n} parameters, {} supplied",
            initial_params.len()
        )));
    }
    if initial_params.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::Argument(
            "initial parameters must be finite".into(),
        ));
    }
    if m < n {
        return Err(NumericsError::Argument(format!(
            "{m} data points cannot determine {n} parameters"
        )));
    }
    if let Some(b) = &options.bounds {
        if b.len() != n || b.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(NumericsError::Argument(
                "bounds must give one ordered interval per parameter".into(),
            ));
        }
    }
    let (x, y) = (&data.x, &data.y);

    let mut p = initial_params.to_vec();
    project(&mut p, options.bounds.as_ref());
    let mut r = vec![0.0; m];
    let mut ss = match residuals(model, x, y, &p, &mut r) {
        Some(v) => v,
        None => {
            let bad = (0..m)
                .find(|&i| !model.eval(x[i], &p).is_finite())
                .map(|i| x[i])
                .unwrap_or(f64::NAN);
            return Err(NumericsError::NonFiniteModel {
                x: bad,
                params: p,
            });
        }
    };
    let data_scale: f64 = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; m];
    let mut jac = jacobian(model, x, &p);

    'outer: while iterations < options.max_iterations {
        iterations += 1;
        if ss <= 1e-30 * data_scale {
            converged = true;
            break;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let diag: Vec<f64> = (0..n).map(|i| jtj[(i, i)]).collect();
        let diag_max = diag.iter().cloned().fold(0.0, f64::max);
        if !(diag_max > 0.0) || !diag_max.is_finite() {
            // Model does not depend on any parameter here.
            break;
        }
        // Scaled gradient test: every column orthogonal to the residual.
        let rn = ss.sqrt();
        let gmax = (0..n)
            .filter(|&i| diag[i] > 0.0)
            .map(|i| g[i].abs() / (diag[i].sqrt() * rn))
            .fold(0.0, f64::max);
        if gmax < 1e-14 {
            converged = true;
            break;
        }
        let scale: Vec<f64> = diag.iter().map(|d| d.max(1e-12 * diag_max)).collect();

        loop {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * scale[i];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&g),
                None => {
                    lambda *= 10.0;
                    if lambda > DAMPING_MAX {
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut cand: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut cand, options.bounds.as_ref());
            let accepted = residuals(model, x, y, &cand, &mut trial)
                .filter(|s| *s < ss)
                .map(|s| (s, cand));
            match accepted {
                Some((new_ss, cand)) => {
                    let dnorm: f64 = (0..n)
                        .map(|i| scale[i] * (cand[i] - p[i]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let pnorm: f64 = (0..n)
                        .map(|i| scale[i] * p[i].powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let rel_drop = (ss - new_ss) / ss;
                    p = cand;
                    ss = new_ss;
                    std::mem::swap(&mut r, &mut trial);
                    lambda = (lambda / 10.0).max(DAMPING_MIN);
                    jac = jacobian(model, x, &p);
                    if dnorm <= options.step_tolerance * pnorm
                        || rel_drop <= options.residual_tolerance
                    {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                None => {
                    lambda *= 10.0;
                    if lambda > DAMPING_MAX {
                        // No descent direction is left at working precision;
                        // that is a minimum if the gradient is small.
                        converged = gmax < 1e-6;
                        break 'outer;
                    }
                }
            }
        }
    }

    let jtj = jac.transpose() * &jac;
    let col_max = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
    // A parameter whose column has vanished (e.g. a peak position once the
    // peak amplitude has collapsed to zero) is not determined by the data.
    let vanished = (0..n).any(|i| jtj[(i, i)] <= 1e-24 * col_max);
    let inv = if vanished { None } else { spd_inverse(&jtj) };
    let rank_deficient = inv.is_none();
    let covariance = if m > n {
        inv.map(|inv| {
            let s2 = ss / (m - n) as f64;
            (0..n)
                .map(|i| (0..n).map(|k| s2 * inv[(i, k)]).collect())
                .collect()
        })
    } else {
        None
    };
    Ok(FitResult {
        params: p,
        residual_norm: ss.sqrt(),
        covariance,
        converged,
        iterations,
        rank_deficient,
    })
}
