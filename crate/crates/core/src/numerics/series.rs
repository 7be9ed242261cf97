use super::NumericsError;

/// A real-valued trace sampled on a strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_unit: String,
    pub y_unit: String,
}

impl Series {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, NumericsError> {
        Self::with_units(x, y, "", "")
    }

    pub fn with_units(
        x: Vec<f64>,
        y: Vec<f64>,
        x_unit: &str,
        y_unit: &str,
    ) -> Result<Self, NumericsError> {
        if x.len() != y.len() {
            return Err(NumericsError::Series(format!(
                "x has {} samples but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(NumericsError::Series(
                "at least two samples are required".into(),
            ));
        }
        if let Some(i) = x.iter().chain(y.iter()).position(|v| !v.is_finite()) {
            return Err(NumericsError::Series(format!(
                "non-finite value at flat index {i}"
            )));
        }
        if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(NumericsError::Series(format!(
                "abscissa not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            x,
            y,
            x_unit: x_unit.to_string(),
            y_unit: y_unit.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Samples with `lo <= x <= hi`, as a new series (may fail if fewer
    /// than two samples fall inside).
    pub fn window(&self, lo: f64, hi: f64) -> Result<Series, NumericsError> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .x
            .iter()
            .zip(&self.y)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(x, y)| (*x, *y))
            .unzip();
        Series::with_units(x, y, &self.x_unit, &self.y_unit)
    }

    /// Number of samples with `lo <= x <= hi`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.x.iter().filter(|x| **x >= lo && **x <= hi).count()
    }

    /// Two-column CSV with a header naming both axes.
    pub fn to_csv(&self, x_name: &str, y_name: &str) -> String {
        let mut out = format!("{x_name},{y_name}\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            out.push_str(&format!("{x:.16e},{y:.16e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_and_short() {
        assert!(Series::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Series::new(vec![0.0], vec![1.0]).is_err());
        assert!(Series::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Series::new(vec![0.0, f64::NAN], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn window_selects_inclusive_range() {
        let s = Series::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 4.0, 9.0]).unwrap();
        let w = s.window(1.0, 2.0).unwrap();
        assert_eq!(w.x, vec![1.0, 2.0]);
        assert_eq!(s.count_in(0.5, 10.0), 3);
    }
}
