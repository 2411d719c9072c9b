//! Small least-squares helpers used by the diagnostics.

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

/// Ordinary least-squares line `y = intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

/// Fits a straight line to `(x, y)` pairs. Returns `None` for fewer than two
/// points or when every `x` coincides.
pub fn linear_fit<I>(points: I) -> Option<LineFit>
where
    I: IntoIterator<Item = (f64, f64)> + Clone,
{
    let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for (x, y) in points.clone() {
        n += 1;
        sx += x;
        sy += y;
    }
    if n < 2 {
        return None;
    }
    let (mx, my) = (sx / n as f64, sy / n as f64);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points.clone() {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .into_iter()
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Some(LineFit { intercept, slope, rms_residual: (ss / n as f64).sqrt(), points: n })
}

/// Slope of `log y` against `log x`, skipping non-positive entries.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln()));
    linear_fit(pts).map(|f| f.slope)
}

/// Fits `y = a + b · ln x`; returns `(a, b)`.
pub fn log_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts = xs.iter().zip(ys).filter(|(x, _)| **x > 0.0).map(|(x, y)| (x.ln(), *y));
    linear_fit(pts).map(|f| (f.intercept, f.slope))
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line_is_recovered() {
        let pts = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64));
        let f = linear_fit(pts).unwrap();
        assert_abs_diff_eq!(f.slope, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.intercept, 3.0, epsilon = 1e-14);
        assert!(f.rms_residual < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(core::iter::once((1.0, 1.0))).is_none());
        assert!(linear_fit([(2.0, 1.0), (2.0, 3.0)]).is_none());
    }

    #[test]
    fn power_law_slope() {
        let xs: alloc::vec::Vec<f64> = (1..50).map(|t| t as f64).collect();
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|t| 0.3 * t * t).collect();
        assert_abs_diff_eq!(log_log_slope(&xs, &ys).unwrap(), 2.0, epsilon = 1e-12);
        let zs: alloc::vec::Vec<f64> = xs.iter().map(|t| 0.7 + 0.25 * t.ln()).collect();
        let (a, b) = log_fit(&xs, &zs).unwrap();
        assert_abs_diff_eq!(a, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn spread() {
        assert_abs_diff_eq!(std_dev(&[1.0, 2.0, 3.0, 4.0]), 1.2909944487358056, epsilon = 1e-15);
        assert_eq!(std_dev(&[5.0]), 0.0);
    }
}
