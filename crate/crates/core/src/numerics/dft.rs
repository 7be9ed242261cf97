use num_complex::Complex64;
use rustfft::FftPlanner;

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// X_k = N^{-1/2} sum_n x_n e^{-2 pi i k n / N}
    Forward,
    /// x_n = N^{-1/2} sum_k X_k e^{+2 pi i k n / N}
    Inverse,
}

/// Unitary discrete Fourier transform.
pub fn dft(series: &[Complex64], direction: Direction) -> Result<Vec<Complex64>, NumericsError> {
    let n = series.len();
    if n < 2 {
        return Err(NumericsError::Argument(format!(
            "DFT needs at least 2 samples, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    let mut buf = series.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ones_map_to_dc() {
        let x = vec![Complex64::new(1.0, 0.0); 16];
        let y = dft(&x, Direction::Forward).unwrap();
        assert!((y[0] - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        assert!(y[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn tone_maps_to_its_bin() {
        let n = 32;
        let k = 5;
        let x: Vec<_> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
            .collect();
        let y = dft(&x, Direction::Forward).unwrap();
        for (i, v) in y.iter().enumerate() {
            if i == k {
                assert!((v.norm() - (n as f64).sqrt()).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn short_input_is_an_error() {
        assert!(dft(&[], Direction::Forward).is_err());
        assert!(dft(&[Complex64::new(1.0, 0.0)], Direction::Inverse).is_err());
    }
}
