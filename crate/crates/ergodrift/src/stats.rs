//! Small numerical statistics toolbox shared across modules: standard
//! normal CDF/quantile, ordinary least squares on transformed axes,
//! one-sample Kolmogorov-Smirnov against N(0,1) and Wilson score intervals.

use statrs::function::erf::{erfc, erfc_inv};

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density `φ(x)`.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile `Φ^{-1}(p)` for `p ∈ (0,1)`.
///
/// The rational approximation behind `erfc_inv` is only ~1e-11 accurate in
/// places; one Newton step against the CDF brings the round trip to
/// machine precision. Fully deterministic for identical inputs.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0,1)");
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let pdf = normal_pdf(x);
    if pdf > 1e-280 {
        x - (normal_cdf(x) - p) / pdf
    } else {
        x
    }
}

/// Result of an ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual_rms: f64,
}

/// Least-squares line through `(xs[i], ys[i])`. Panics if fewer than two
/// points are supplied; callers gate on their own minimum counts.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a line fit");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    LineFit { slope, intercept, residual_rms: (ss / n).sqrt() }
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against N(0,1),
/// `D_n = sup_x |F_n(x) - Φ(x)|`.
pub fn ks_statistic_standard_normal(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = normal_cdf(x);
        let hi = (i as f64 + 1.0) / n - c;
        let lo = c - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic critical value of the KS statistic at the 1% level,
/// `1.6276 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Wilson score interval for a binomial proportion at confidence level
/// given by the normal quantile `z` (1.96 for 95%).
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_quantile_round_trip() {
        for &p in &[1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-8] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Φ(1.96) from standard tables.
        assert!((normal_cdf(1.96) - 0.975_002_104_85).abs() < 1e-9);
        assert!((normal_cdf(-1.0) - 0.158_655_253_93).abs() < 1e-9);
    }

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let fit = linear_fit(&xs, &ys);
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        // Deterministic "sample" from the quantile function itself: the KS
        // statistic against N(0,1) must be ~1/(2n) for the exact sample and
        // large for a shifted one.
        let n = 4000;
        let sample: Vec<f64> =
            (0..n).map(|i| normal_quantile((i as f64 + 0.5) / n as f64)).collect();
        assert!(ks_statistic_standard_normal(&sample) < 1.0 / n as f64);
        let shifted: Vec<f64> = sample.iter().map(|x| x + 0.5).collect();
        assert!(ks_statistic_standard_normal(&shifted) > ks_critical_1pct(n));
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!(lo > 0.2 && hi < 0.42);
    }
}
