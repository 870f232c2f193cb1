//! Log-log convergence-rate fitting.

use serde::{Deserialize, Serialize};

use super::BenchError;

/// Least-squares fit of `log(residual)` against `log(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit a power law to `(N, residual)` pairs. Needs at least three points
/// with strictly positive residuals.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, BenchError> {
    if pairs.len() < 3 {
        return Err(BenchError::RateFit(format!(
            "need at least 3 points, got {}",
            pairs.len()
        )));
    }
    for &(n, r) in pairs {
        if n <= 0.0 || r <= 0.0 {
            return Err(BenchError::RateFit(format!(
                "points must be positive, got ({n}, {r})"
            )));
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, r)| r.ln()).collect();
    let count = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    if sxx == 0.0 {
        return Err(BenchError::RateFit("all N values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let pred = intercept + slope * x;
            (y - pred) * (y - pred)
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { pairs: pairs.to_vec(), slope, intercept, r_squared })
}
