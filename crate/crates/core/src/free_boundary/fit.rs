use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `ln r* = exponent · ln h + intercept`
    Power,
    /// `r*^{1+m} = exponent · ln h + intercept`
    LogPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope · x + intercept`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(DeadcoreError::Parameter("regression inputs differ in length".into()));
    }
    if x.len() < 3 {
        return Err(DeadcoreError::InsufficientData(format!(
            "a fit needs at least 3 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(DeadcoreError::Domain("non-finite regression input".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(DeadcoreError::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        exponent: slope,
        intercept: my - slope * mx,
        r_squared,
        points: x.len(),
    })
}

/// OLS of `ln y` on `ln x`.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<LinearFit> {
    if let Some(bad) = samples.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(DeadcoreError::Domain(format!(
            "power-law fit needs positive data, got ({}, {})",
            bad.0, bad.1
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|(a, b)| (a.ln(), b.ln())).unzip();
    linear_regression(&x, &y)
}

/// OLS of `r*^{1+m}` on `ln h`.
pub fn fit_log_power(samples: &[(f64, f64)], m: f64) -> Result<LinearFit> {
    if !(m > -1.0) {
        return Err(DeadcoreError::Parameter(format!("log-power fit needs m > -1, got {m}")));
    }
    if let Some(bad) = samples.iter().find(|(h, r)| !(*h > 0.0 && *r > 0.0)) {
        return Err(DeadcoreError::Domain(format!(
            "log-power fit needs positive data, got ({}, {})",
            bad.0, bad.1
        )));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|(h, r)| (h.ln(), r.powf(1.0 + m))).unzip();
    linear_regression(&x, &y)
}
