use super::NumericsError;

const MAX_ORDER: u32 = 10;
const MAX_ARG: f64 = 20.0;
const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, J_n(x), for n <= 10 and |x| <= 20.
///
/// Ascending power series up to |x| = 12; beyond that the series loses
/// too many digits to cancellation, so Miller's backward recurrence
/// normalized with J0 + 2 sum J_2k = 1 is used instead.
pub fn bessel_j(order: u32, x: f64) -> Result<f64, NumericsError> {
    if order > MAX_ORDER {
        return Err(NumericsError::Argument(format!(
            "Bessel order {order} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    if !x.is_finite() || x.abs() > MAX_ARG {
        return Err(NumericsError::Argument(format!(
            "Bessel argument {x} outside supported range |x| <= {MAX_ARG}"
        )));
    }
    let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        power_series(order, ax)
    } else {
        backward_recurrence(order, ax)
    };
    Ok(sign * value)
}

fn power_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = (1..=order).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

fn backward_recurrence(order: u32, x: f64) -> f64 {
    // Start well above both the order and the argument.
    let start = 2 * ((x as u32 + order + 40) / 2);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx == order {
            wanted = cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}
