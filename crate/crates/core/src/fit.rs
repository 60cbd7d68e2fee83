//! Ordinary least-squares power-law fits on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted power law `y ≈ C·x^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub delta_exp: f64,
    pub stderr: f64,
    pub r_squared: f64,
    /// `ln C`.
    pub intercept: f64,
    pub samples: usize,
}

impl ExponentFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.delta_exp * x.ln()).exp()
    }
}

/// Fit `ln y = ln C + δ ln x` by least squares. Needs at least two
/// samples with positive, finite coordinates and distinct `x`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 samples, got {}",
            xs.len()
        )));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Domain(format!(
                "log-log fit needs positive finite data, got ({x}, {y})"
            )));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let stderr = if lx.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit {
        delta_exp: slope,
        stderr,
        r_squared,
        intercept,
        samples: lx.len(),
    })
}

/// Like [`log_log_fit`] but enforces the scaling-analysis contract:
/// at least four samples spanning at least two decades in `x`.
pub fn scaling_fit(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 4 samples, got {}",
            xs.len()
        )));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 2.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs two decades in x, got [{lo:.3e}, {hi:.3e}]"
        )));
    }
    log_log_fit(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_power_law() {
        let xs: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.25)).collect();
        let fit = scaling_fit(&xs, &ys).unwrap();
        assert_relative_eq!(fit.delta_exp, -0.25, epsilon = 1e-13);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert!(fit.stderr < 1e-12);
        assert_relative_eq!(fit.predict(100.0), 3.0 * 100f64.powf(-0.25), max_relative = 1e-12);
    }

    #[test]
    fn refuses_thin_data() {
        assert!(scaling_fit(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(scaling_fit(&[1.0, 2.0, 3.0, 50.0], &[1.0; 4]).is_err());
        assert!(log_log_fit(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }
}
