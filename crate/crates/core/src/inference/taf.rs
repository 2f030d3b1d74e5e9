//! Spectral exponent predicted by an ensemble of thermally activated
//! fluctuators from the temperature slope of the noise.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Typical hopping attempt time τ0.
pub const TAU0_DEFAULT: f64 = 1e-13;

/// α in the S_E ∝ ω^α convention. The fluctuator relation
/// α_DH = 1 − (∂lnS/∂lnT − 1)/ln(ωτ0) is written for S ∝ ω^(−α_DH);
/// the result is −α_DH.
pub fn taf_alpha(slope: f64, omega: f64, tau0: f64) -> Result<f64> {
    if !(omega > 0.0 && tau0 > 0.0) {
        return Err(Error::domain(format!("ω and τ0 must be positive, got {omega}, {tau0}")));
    }
    let l = (omega * tau0).ln();
    if l == 0.0 {
        return Err(Error::domain("ωτ0 = 1 makes the fluctuator relation singular"));
    }
    if l.abs() < 1.0 {
        log::warn!("|ln(ωτ0)| = {:.3} < 1: TAF prediction is ill-conditioned", l.abs());
    }
    Ok(-(1.0 - (slope - 1.0) / l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub temperature: f64,
    pub alpha: f64,
    pub sigma: f64,
}

/// χ² = Σ((α − α_pred(T))/σ)² with the p-value from N degrees of freedom.
pub fn taf_consistency_chi2(measured: &[AlphaPoint], predicted: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    if measured.is_empty() {
        return Err(Error::invalid("no measured exponents"));
    }
    let mut chi2 = 0.0;
    for p in measured {
        if !(p.sigma > 0.0) {
            return Err(Error::domain(format!("σ_α must be positive at T = {} K", p.temperature)));
        }
        chi2 += ((p.alpha - predicted(p.temperature)) / p.sigma).powi(2);
    }
    let dist = ChiSquared::new(measured.len() as f64).map_err(|e| Error::invalid(format!("χ² distribution: {e}")))?;
    Ok((chi2, if chi2 == 0.0 { 1.0 } else { dist.sf(chi2) }))
}
