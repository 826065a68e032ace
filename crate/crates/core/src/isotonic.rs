//! Weighted isotonic (monotone non-decreasing) regression by pool-adjacent-violators.

/// Fitted monotone map, piecewise linear between the distinct sample
/// abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl IsotonicFit {
    /// Fits `y ≈ h(x)` with `h` non-decreasing, minimising squared error.
    /// Points sharing an abscissa are pooled first.
    ///
    /// Panics if `points` is empty or contains NaN.
    pub fn fit(points: &[(f64, f64)]) -> Self {
        assert!(!points.is_empty(), "isotonic fit needs at least one point");
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN abscissa"));

        // (x, weighted mean y, weight) per distinct x.
        let mut xs: Vec<f64> = Vec::new();
        let mut means: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, y) in sorted {
            match xs.last() {
                Some(&last) if last == x => {
                    let w = weights.last_mut().unwrap();
                    let m = means.last_mut().unwrap();
                    *m += (y - *m) / (*w + 1.0);
                    *w += 1.0;
                }
                _ => {
                    xs.push(x);
                    means.push(y);
                    weights.push(1.0);
                }
            }
        }

        // Blocks: (mean, weight, count of distinct xs).
        let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(xs.len());
        for (&m, &w) in means.iter().zip(&weights) {
            blocks.push((m, w, 1));
            while blocks.len() > 1 {
                let (m2, w2, c2) = blocks[blocks.len() - 1];
                let (m1, w1, c1) = blocks[blocks.len() - 2];
                if m1 <= m2 {
                    break;
                }
                blocks.pop();
                let w = w1 + w2;
                *blocks.last_mut().unwrap() = ((m1 * w1 + m2 * w2) / w, w, c1 + c2);
            }
        }
        let ys = blocks.iter().flat_map(|&(m, _, c)| std::iter::repeat_n(m, c)).collect();
        IsotonicFit { xs, ys }
    }

    /// Value of the fitted map at `x`, or `None` outside the sampled range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let k = self.xs.partition_point(|&v| v < x);
        if self.xs[k] == x {
            return Some(self.ys[k]);
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monotone_input_is_reproduced() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let fit = IsotonicFit::fit(&pts);
        for &(x, y) in &pts {
            assert_eq!(fit.eval(x), Some(y));
        }
        assert_eq!(fit.eval(2.5), Some(6.0));
        assert_eq!(fit.eval(-1.0), None);
    }

    #[test]
    fn violators_are_pooled() {
        let fit = IsotonicFit::fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 2.0), (3.0, 4.0)]);
        let ys: Vec<f64> = fit.knots().map(|k| k.1).collect();
        assert_eq!(ys, vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn tied_abscissae_are_averaged() {
        let fit = IsotonicFit::fit(&[(1.0, 1.0), (1.0, 3.0), (0.0, 0.0)]);
        assert_eq!(fit.eval(1.0), Some(2.0));
    }

    proptest! {
        #[test]
        fn output_is_monotone_and_mean_preserving(pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..80)) {
            let fit = IsotonicFit::fit(&pts);
            let knots: Vec<(f64, f64)> = fit.knots().collect();
            for w in knots.windows(2) {
                prop_assert!(w[0].1 <= w[1].1 + 1e-12);
            }
            let mean_in = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            let mean_out = pts.iter().map(|p| fit.eval(p.0).unwrap()).sum::<f64>() / pts.len() as f64;
            prop_assert!((mean_in - mean_out).abs() < 1e-9);
        }
    }
}
