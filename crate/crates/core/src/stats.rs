//! Small statistics helpers shared by the estimators.

#[derive(Clone, Copy, Debug, Default)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Sample mean with the iid standard error `s/√n`.
pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe::default();
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanSe { mean, stderr: 0.0, n };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MeanSe { mean, stderr: (var / n as f64).sqrt(), n }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    let w = vec![1.0; x.len()];
    let mut fit = wls(x, y, &w);
    // Residual-based standard error for the unweighted case.
    let n = x.len();
    if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| (yi - fit.intercept - fit.slope * xi).powi(2))
            .sum();
        let mx = x.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
        fit.slope_stderr = (rss / (n - 2) as f64 / sxx).sqrt();
    }
    fit
}

/// Weighted least squares; the slope error is `1/√(Σw·(x−x̄_w)²)`, i.e.
/// the weights are taken as inverse variances.
pub fn wls(x: &[f64], y: &[f64], w: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx).powi(2);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    let slope = sxy / sxx;
    LineFit { slope, intercept: my - slope * mx, slope_stderr: (1.0 / sxx).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 2.0).collect();
        let f = ols(&x, &y);
        assert!((f.slope - 0.5).abs() < 1e-14);
        assert!((f.intercept + 2.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-7);
    }

    #[test]
    fn weights_pull_toward_precise_points() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 1.0, 5.0];
        let heavy_last = wls(&x, &y, &[1.0, 1e6, 1e6]);
        assert!((heavy_last.slope - 4.0).abs() < 1e-3);
    }

    #[test]
    fn mean_se_matches_hand_values() {
        let m = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
