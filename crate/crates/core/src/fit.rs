//! Ordinary least squares on a line, used by every exponent fit.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)`. Needs at least `min_points` points
/// and two distinct abscissae.
pub fn fit_line(points: &[(f64, f64)], min_points: usize) -> Result<LineFit> {
    let n = points.len();
    if n < min_points.max(2) {
        return Err(Error::DegenerateFit(format!("{n} points, need at least {}", min_points.max(2))));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared, points: n })
}

/// Fit of `ln y` against `ln x`; points with non-positive coordinates are
/// dropped.
pub fn fit_log_log(points: &[(f64, f64)], min_points: usize) -> Result<LineFit> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    fit_line(&logs, min_points)
}
