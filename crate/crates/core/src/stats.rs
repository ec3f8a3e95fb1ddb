//! Order-fixed statistical reductions.

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (n as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn se_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Sample variance and its standard error.
///
/// The SE uses the fourth central moment: Var(s²) ≈ (m₄ − σ⁴(n−3)/(n−1))/n.
pub fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs);
    let q: Vec<f64> = xs.iter().map(|x| (x - m).powi(4)).collect();
    let m4 = pairwise_sum(&q) / n;
    let var_s2 = ((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).max(0.0);
    (v, var_s2.sqrt())
}

/// Jackknife standard error of a statistic computed from per-sample rows.
pub fn jackknife_se<F: Fn(&[usize]) -> f64>(n: usize, stat: F) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    let idx: Vec<usize> = (0..n).collect();
    let leave: Vec<f64> = (0..n)
        .map(|k| {
            let rest: Vec<usize> = idx.iter().copied().filter(|&i| i != k).collect();
            stat(&rest)
        })
        .collect();
    let m = mean(&leave);
    let sq: Vec<f64> = leave.iter().map(|x| (x - m) * (x - m)).collect();
    ((n as f64 - 1.0) / n as f64 * pairwise_sum(&sq)).sqrt()
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn variance_basic() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((ols_slope(&xs, &[3.0, 5.0, 7.0, 9.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn jackknife_of_mean_is_se() {
        let xs = [0.3, 1.2, -0.7, 2.2, 0.1, -1.4];
        let jk = jackknife_se(xs.len(), |ix| mean(&ix.iter().map(|&i| xs[i]).collect::<Vec<_>>()));
        assert!((jk - se_mean(&xs)).abs() < 1e-12);
    }
}
