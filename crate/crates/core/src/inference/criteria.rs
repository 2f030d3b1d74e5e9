use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Information criteria of a least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub rss: f64,
    pub n_data: usize,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    /// Set when RSS = 0 and both criteria are −∞.
    pub perfect_fit: bool,
}

/// AIC = N ln(RSS/N) + 2M, BIC = N ln(RSS/N) + M ln N.
pub fn information_criteria(rss: f64, n_data: usize, n_params: usize) -> Result<ModelScore> {
    if !(rss >= 0.0) || !rss.is_finite() {
        return Err(Error::domain(format!("RSS must be finite and non-negative, got {rss}")));
    }
    if n_data <= n_params {
        return Err(Error::domain(format!("need more data points than parameters (N = {n_data}, M = {n_params})")));
    }
    let n = n_data as f64;
    let m = n_params as f64;
    if rss == 0.0 {
        return Ok(ModelScore {
            rss,
            n_data,
            n_params,
            aic: f64::NEG_INFINITY,
            bic: f64::NEG_INFINITY,
            perfect_fit: true,
        });
    }
    let base = n * (rss / n).ln();
    Ok(ModelScore { rss, n_data, n_params, aic: base + 2.0 * m, bic: base + m * n.ln(), perfect_fit: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aic_bic_consistency() {
        // choose RSS so that AIC = 136 with N = 49, M = 8
        let rss = 49.0 * ((136.0 - 16.0) / 49.0f64).exp();
        let s = information_criteria(rss, 49, 8).unwrap();
        assert_relative_eq!(s.aic, 136.0, max_relative = 1e-12);
        assert!((s.bic - 151.1).abs() < 0.05, "{}", s.bic);
    }

    #[test]
    fn identities() {
        let s = information_criteria(3.0, 10, 0).unwrap();
        assert_eq!(s.aic, s.bic);
        assert_relative_eq!(s.aic, 10.0 * (0.3f64).ln(), max_relative = 1e-14);
        let a = information_criteria(2.0, 12, 3).unwrap();
        let b = information_criteria(4.0, 12, 3).unwrap();
        assert_relative_eq!(b.aic - a.aic, 12.0 * 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(b.bic - a.bic, 12.0 * 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let s = information_criteria(0.0, 5, 2).unwrap();
        assert!(s.perfect_fit && s.aic == f64::NEG_INFINITY);
        assert!(information_criteria(1.0, 3, 3).is_err());
        assert!(information_criteria(-1.0, 5, 1).is_err());
    }
}
