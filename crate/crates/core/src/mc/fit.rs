use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln y)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn predict(&self, log_x: f64) -> f64 {
        self.intercept + self.slope * log_x
    }
}

/// Fit `y ~ C x^slope` by ordinary least squares in log-log space.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(i) = points.iter().position(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Domain(format!("point {i} has a non-positive coordinate")));
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    fit_line(logged)
}

/// Ordinary least squares on points already in log space.
pub fn fit_line(points: Vec<(f64, f64)>) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points, at least 3 needed",
            points.len()
        )));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) || !sxy.is_finite() {
        return Err(Error::Domain("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_abs_residual = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        max_abs_residual,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::RngStream;

    #[test]
    fn exact_square() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, x * x)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!(f.intercept.abs() < 1e-14);
        assert!(f.max_abs_residual < 1e-14);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pts = [(1.0, 5.0), (3.0, 5.0), (9.0, 5.0)];
        assert!(fit_power_law(&pts).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn noisy_cube_root() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..20 {
            let pts: Vec<_> = (0..8)
                .map(|i| {
                    let x = 2f64.powi(i);
                    let eta = 0.05 * (2.0 * rng.uniform() - 1.0);
                    (x, 3.0 * x.powf(-1.0 / 3.0) * (1.0 + eta))
                })
                .collect();
            let f = fit_power_law(&pts).unwrap();
            assert!((f.slope + 1.0 / 3.0).abs() < 0.05);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
            Err(Error::Domain(_))
        ));
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }
}
