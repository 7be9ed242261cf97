use crate::numerics::Series;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakCandidate {
    pub index: usize,
    pub freq: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima of `trace` with at least `min_prominence`, thinned so that
/// no two survivors are closer than `min_spacing`. When two candidates
/// conflict the taller one wins; equal heights keep the lower frequency.
/// The result is sorted by frequency.
pub fn find_peaks(trace: &Series, min_prominence: f64, min_spacing: f64) -> Vec<PeakCandidate> {
    let y = &trace.y;
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let mut maxima = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] {
            // Walk across a flat top.
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                maxima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    let mut cands: Vec<PeakCandidate> = maxima
        .into_iter()
        .map(|k| PeakCandidate {
            index: k,
            freq: trace.x[k],
            height: y[k],
            prominence: prominence(y, k),
        })
        .filter(|c| c.prominence >= min_prominence)
        .collect();

    cands.sort_by(|a, b| {
        b.height
            .total_cmp(&a.height)
            .then(a.freq.total_cmp(&b.freq))
    });
    let mut kept: Vec<PeakCandidate> = Vec::with_capacity(cands.len());
    for c in cands {
        if kept.iter().all(|k| (k.freq - c.freq).abs() >= min_spacing) {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| a.freq.total_cmp(&b.freq));
    kept
}

fn prominence(y: &[f64], k: usize) -> f64 {
    let h = y[k];
    let mut left_min = h;
    for v in y[..k].iter().rev() {
        if *v > h {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = h;
    for v in &y[k + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(y: Vec<f64>) -> Series {
        let x = (0..y.len()).map(|i| i as f64).collect();
        Series::new(x, y).unwrap()
    }

    #[test]
    fn monotone_trace_has_no_peaks() {
        let s = series((0..50).map(|i| i as f64).collect());
        assert!(find_peaks(&s, 0.0, 0.0).is_empty());
        let s = series((0..50).map(|i| -(i as f64)).collect());
        assert!(find_peaks(&s, 0.0, 0.0).is_empty());
    }

    #[test]
    fn close_peaks_keep_the_taller() {
        let s = series(vec![0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0]);
        let p = find_peaks(&s, 0.5, 3.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 3);
        let p = find_peaks(&s, 0.5, 1.0);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn equal_heights_keep_lower_frequency() {
        let s = series(vec![0.0, 1.0, 0.0, 1.0, 0.0]);
        let p = find_peaks(&s, 0.5, 5.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 1);
    }

    #[test]
    fn plateau_reports_its_middle() {
        let s = series(vec![0.0, 1.0, 1.0, 1.0, 0.0]);
        let p = find_peaks(&s, 0.5, 0.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 2);
        // A shelf that keeps rising is not a peak.
        let s = series(vec![0.0, 1.0, 1.0, 2.0, 0.0]);
        let p = find_peaks(&s, 0.0, 0.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].index, 3);
    }

    #[test]
    fn prominence_filters_ripples() {
        let s = series(vec![0.0, 5.0, 4.9, 4.95, 0.0, 0.1, 0.0]);
        let p = find_peaks(&s, 1.0, 0.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].prominence, 5.0);
    }
}
