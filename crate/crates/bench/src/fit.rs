//! Small regression helpers for the scaling checks.

/// Least-squares fit of `y = a * log2(n) + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    /// Largest |residual| divided by the mean of `y`.
    pub max_rel_residual: f64,
}

pub fn log_fit(ns: &[usize], ys: &[f64]) -> LogFit {
    assert_eq!(ns.len(), ys.len());
    assert!(ns.len() >= 2);
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).log2()).collect();
    let (a, b) = linear(&xs, ys);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let worst = xs.iter().zip(ys).map(|(x, y)| (y - (a * x + b)).abs()).fold(0.0, f64::max);
    LogFit { a, b, max_rel_residual: worst / mean }
}

/// Slope of `log y` against `log n`.
pub fn log_log_slope(ns: &[usize], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-9).ln()).collect();
    linear(&xs, &ly).0
}

fn linear(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (a, my - a * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_log_curve() {
        let ns = [1000, 10_000, 100_000, 1_000_000];
        let ys: Vec<f64> = ns.iter().map(|n| 3.0 * (*n as f64).log2() + 5.0).collect();
        let f = log_fit(&ns, &ys);
        assert!((f.a - 3.0).abs() < 1e-9 && (f.b - 5.0).abs() < 1e-9);
        assert!(f.max_rel_residual < 1e-9);
    }

    #[test]
    fn slopes() {
        let ns = [10, 100, 1000];
        assert!((log_log_slope(&ns, &[10.0, 100.0, 1000.0]) - 1.0).abs() < 1e-9);
        assert!(log_log_slope(&ns, &[5.0, 5.0, 5.0]).abs() < 1e-9);
    }
}
