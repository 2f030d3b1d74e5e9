use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::physcore::{heating_rate_from_noise, FieldNoiseDensity, Ion};

use super::linear_regression;
use super::lm::{minimize, LmOptions};

/// Reference frequency ω0 = 2π×1 MHz of the spectral power law.
pub const OMEGA0: f64 = 2.0 * PI * 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqPoint {
    pub omega: f64,
    pub gamma: f64,
    pub sigma: f64,
}

/// Γ(ω) = γ·(ω/ω0)^(α−1); S_E then scales as ω^α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqPowerLawFit {
    pub gamma_coeff: f64,
    pub alpha: f64,
    /// Covariance of (γ, α).
    pub covariance: [[f64; 2]; 2],
    pub omega0: f64,
    pub chi2_red: f64,
    pub iterations: usize,
}

impl FreqPowerLawFit {
    pub fn gamma_at(&self, omega: f64) -> f64 {
        self.gamma_coeff * (omega / self.omega0).powf(self.alpha - 1.0)
    }

    pub fn std_errors(&self) -> [f64; 2] {
        [self.covariance[0][0].sqrt(), self.covariance[1][1].sqrt()]
    }
}

/// Weighted fit of the spectral power law, started from a log-log regression.
pub fn fit_freq_power_law(points: &[FreqPoint]) -> Result<FreqPowerLawFit> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.gamma.total_cmp(&b.gamma)));
    let mut distinct = pts.iter().map(|p| p.omega).collect::<Vec<_>>();
    distinct.dedup();
    if pts.len() < 3 || distinct.len() < 2 {
        return Err(Error::invalid(format!(
            "power-law fit needs at least 3 points over 2 or more frequencies, got {} points",
            pts.len()
        )));
    }
    for p in &pts {
        if !(p.omega > 0.0 && p.sigma > 0.0 && p.gamma >= 0.0) {
            return Err(Error::invalid(format!("invalid spectral point {p:?}")));
        }
    }
    let positive: Vec<&FreqPoint> = pts.iter().filter(|p| p.gamma > 0.0).collect();
    let (slope, intercept) = if positive.len() >= 2 {
        let x: Vec<f64> = positive.iter().map(|p| (p.omega / OMEGA0).ln()).collect();
        let y: Vec<f64> = positive.iter().map(|p| p.gamma.ln()).collect();
        let w: Vec<f64> = positive.iter().map(|p| (p.gamma / p.sigma).powi(2)).collect();
        linear_regression(&x, &y, &w)
    } else {
        (0.0, pts.iter().map(|p| p.gamma).sum::<f64>().max(1e-300).ln())
    };
    let x: Vec<f64> = pts.iter().map(|p| (p.omega / OMEGA0).ln()).collect();
    let residuals = |p: &[f64]| {
        DVector::from_iterator(
            pts.len(),
            pts.iter().zip(&x).map(|(q, x)| (q.gamma - p[0] * ((p[1] - 1.0) * x).exp()) / q.sigma),
        )
    };
    let jacobian = |p: &[f64]| {
        let mut j = DMatrix::zeros(pts.len(), 2);
        for (i, (q, x)) in pts.iter().zip(&x).enumerate() {
            let basis = ((p[1] - 1.0) * x).exp();
            j[(i, 0)] = -basis / q.sigma;
            j[(i, 1)] = -p[0] * basis * x / q.sigma;
        }
        j
    };
    let fit = minimize(residuals, Some(jacobian), &[intercept.exp(), slope + 1.0], &LmOptions::default())?;
    let cov = fit.covariance()?;
    Ok(FreqPowerLawFit {
        gamma_coeff: fit.params[0],
        alpha: fit.params[1],
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        omega0: OMEGA0,
        chi2_red: fit.chi2_red(),
        iterations: fit.iterations,
    })
}

/// Remove a JNN floor from a fitted spectrum and refit. The fitted Γ(ω) is
/// evaluated at `omegas`, the heating rate equivalent of `jnn_level(ω)` is
/// subtracted, and the remainder is fitted again with equal relative weights.
pub fn jnn_corrected_alpha(
    fit: &FreqPowerLawFit,
    jnn_level: &dyn Fn(f64) -> FieldNoiseDensity,
    omegas: &[f64],
    ion: Ion,
) -> Result<FreqPowerLawFit> {
    let mut pts = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let total = fit.gamma_at(omega);
        let jnn = heating_rate_from_noise(jnn_level(omega), omega, ion.charge, ion.mass)?.value();
        let rest = total - jnn;
        if !(rest > 0.0) {
            return Err(Error::invalid(format!("JNN level exceeds the fitted noise at {:.3e} Hz", omega / (2.0 * PI))));
        }
        pts.push(FreqPoint { omega, gamma: rest, sigma: 0.01 * rest });
    }
    fit_freq_power_law(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physcore::angular;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use rayon::prelude::*;

    const FREQS: [f64; 6] = [0.4e6, 0.6e6, 0.8e6, 1.0e6, 1.4e6, 1.8e6];

    fn model_points(gamma: f64, alpha: f64) -> Vec<FreqPoint> {
        FREQS
            .iter()
            .map(|&f| {
                let omega = angular(f);
                let g = gamma * (omega / OMEGA0).powf(alpha - 1.0);
                FreqPoint { omega, gamma: g, sigma: 0.05 * g }
            })
            .collect()
    }

    #[test]
    fn noiseless_recovery() {
        let fit = fit_freq_power_law(&model_points(5.40, -1.04)).unwrap();
        assert!((fit.gamma_coeff - 5.40).abs() < 1e-8);
        assert!((fit.alpha + 1.04).abs() < 1e-8);
        assert!(fit.chi2_red < 1e-20);
    }

    #[test]
    fn flat_rates_mean_alpha_one() {
        let pts: Vec<FreqPoint> =
            FREQS.iter().map(|&f| FreqPoint { omega: angular(f), gamma: 2.0, sigma: 0.1 }).collect();
        let fit = fit_freq_power_law(&pts).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-10);
        assert!((fit.gamma_coeff - 2.0).abs() < 1e-10);
    }

    #[test]
    fn order_invariance() {
        let mut pts = model_points(1.1, -0.9);
        for (i, p) in pts.iter_mut().enumerate() {
            p.gamma *= 1.0 + 0.03 * ((i as f64) * 1.7).sin();
        }
        let a = fit_freq_power_law(&pts).unwrap();
        pts.reverse();
        pts.swap(1, 4);
        let b = fit_freq_power_law(&pts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_freq_power_law(&model_points(1.0, -1.0)[..2]).is_err());
        let same: Vec<FreqPoint> = (0..4).map(|_| FreqPoint { omega: OMEGA0, gamma: 1.0, sigma: 0.1 }).collect();
        assert!(fit_freq_power_law(&same).is_err());
    }

    #[test]
    fn zero_gradient_at_optimum() {
        let mut pts = model_points(0.7, -0.8);
        for (i, p) in pts.iter_mut().enumerate() {
            p.gamma *= 1.0 + 0.08 * ((i as f64) * 2.3).cos();
        }
        let fit = fit_freq_power_law(&pts).unwrap();
        let obj = |g: f64, a: f64| -> f64 {
            pts.iter().map(|q| ((q.gamma - g * (q.omega / OMEGA0).powf(a - 1.0)) / q.sigma).powi(2)).sum()
        };
        let (g, a) = (fit.gamma_coeff, fit.alpha);
        let hg = 1e-6 * g;
        let ha = 1e-6;
        let dg = (obj(g + hg, a) - obj(g - hg, a)) / (2.0 * hg) * g;
        let da = (obj(g, a + ha) - obj(g, a - ha)) / (2.0 * ha);
        let scale = obj(g, a).max(1.0);
        assert!(dg.hypot(da) < 1e-6 * scale, "{dg} {da}");
    }

    #[test]
    fn monte_carlo_unbiased() {
        let truth = (5.40, -1.04);
        let trials = 1000;
        let fits: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
                let pts: Vec<FreqPoint> = model_points(truth.0, truth.1)
                    .into_iter()
                    .map(|p| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        FreqPoint { gamma: p.gamma * (1.0 + 0.05 * z), ..p }
                    })
                    .collect();
                let f = fit_freq_power_law(&pts).unwrap();
                (f.gamma_coeff, f.alpha)
            })
            .collect();
        let n = trials as f64;
        for (idx, t) in [truth.0, truth.1].into_iter().enumerate() {
            let v: Vec<f64> = fits.iter().map(|f| if idx == 0 { f.0 } else { f.1 }).collect();
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((mean - t).abs() < 2.0 * sd / n.sqrt(), "param {idx}: mean {mean} truth {t} se {}", sd / n.sqrt());
        }
    }

    #[test]
    fn jnn_correction() {
        let ion = Ion::CA40;
        let omegas: Vec<f64> = FREQS.iter().map(|&f| angular(f)).collect();
        let fit = fit_freq_power_law(&model_points(2.0, -1.0)).unwrap();
        let zero = |_: f64| FieldNoiseDensity::ZERO;
        let same = jnn_corrected_alpha(&fit, &zero, &omegas, ion).unwrap();
        assert!((same.alpha - fit.alpha).abs() < 1e-9);

        // S_E ∝ 1/ω plus a flat floor of 10% of the total at ω0
        let s_at = |omega: f64| 1e-14 * OMEGA0 / omega;
        let floor = 0.1 / 0.9 * s_at(OMEGA0);
        let pts: Vec<FreqPoint> = omegas
            .iter()
            .map(|&omega| {
                let g = heating_rate_from_noise(
                    FieldNoiseDensity::new(s_at(omega) + floor).unwrap(),
                    omega,
                    ion.charge,
                    ion.mass,
                )
                .unwrap()
                .value();
                FreqPoint { omega, gamma: g, sigma: 0.01 * g }
            })
            .collect();
        let total = fit_freq_power_law(&pts).unwrap();
        let flat = move |_: f64| FieldNoiseDensity::new(floor).unwrap();
        let corrected = jnn_corrected_alpha(&total, &flat, &omegas, ion).unwrap();
        assert!(corrected.alpha < total.alpha);
        assert!((corrected.alpha + 1.0).abs() < 0.02, "{}", corrected.alpha);

        let huge = |_: f64| FieldNoiseDensity::new(1.0).unwrap();
        assert!(jnn_corrected_alpha(&total, &huge, &omegas, ion).is_err());
    }

    #[test]
    fn jnn_fraction_range_shifts_alpha_down() {
        let ion = Ion::CA40;
        let omegas: Vec<f64> = FREQS.iter().map(|&f| angular(f)).collect();
        let s_at = |omega: f64| 1e-14 * OMEGA0 / omega;
        for frac in [0.053, 0.128] {
            let floor = frac * s_at(OMEGA0);
            let pts: Vec<FreqPoint> = omegas
                .iter()
                .map(|&omega| {
                    let g = heating_rate_from_noise(
                        FieldNoiseDensity::new(s_at(omega)).unwrap(),
                        omega,
                        ion.charge,
                        ion.mass,
                    )
                    .unwrap()
                    .value();
                    FreqPoint { omega, gamma: g, sigma: 0.01 * g }
                })
                .collect();
            let fit = fit_freq_power_law(&pts).unwrap();
            let flat = move |_: f64| FieldNoiseDensity::new(floor).unwrap();
            let corrected = jnn_corrected_alpha(&fit, &flat, &omegas, ion).unwrap();
            assert!(corrected.alpha < fit.alpha - 0.01, "{frac}: {} vs {}", corrected.alpha, fit.alpha);
        }
    }
}
