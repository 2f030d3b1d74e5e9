//! Weighted smoothing cubic spline in (ln T, ln S_E) and its slope.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dataset::NoisePoint;

pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const BOOTSTRAP_SEED: u64 = 0x7a1f_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothing {
    /// Generalised cross-validation over a log grid of λ.
    Gcv,
    Fixed(f64),
}

/// Natural cubic spline minimising Σ wᵢ(yᵢ − f(xᵢ))² + λ∫f''².
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSpline {
    x: Vec<f64>,
    /// Fitted values at the knots.
    f: Vec<f64>,
    /// Second derivatives at the knots, zero at both ends.
    c: Vec<f64>,
    lambda: f64,
}

struct Design {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn design(x: &[f64]) -> Design {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut q = DMatrix::zeros(n, n - 2);
    let mut r = DMatrix::zeros(n - 2, n - 2);
    for j in 0..n - 2 {
        q[(j, j)] = 1.0 / h[j];
        q[(j + 1, j)] = -1.0 / h[j] - 1.0 / h[j + 1];
        q[(j + 2, j)] = 1.0 / h[j + 1];
        r[(j, j)] = (h[j] + h[j + 1]) / 3.0;
        if j + 1 < n - 2 {
            r[(j, j + 1)] = h[j + 1] / 6.0;
            r[(j + 1, j)] = h[j + 1] / 6.0;
        }
    }
    Design { q, r }
}

impl SmoothingSpline {
    /// `x` strictly increasing with at least 4 knots, `w` positive weights.
    pub fn fit(x: &[f64], y: &[f64], w: &[f64], smoothing: Smoothing) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n || w.len() != n {
            return Err(Error::invalid(format!("spline needs at least 4 matching points, got {n}")));
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::invalid("spline abscissae must be strictly increasing"));
        }
        if w.iter().any(|w| !(*w > 0.0 && w.is_finite())) || y.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("spline weights must be positive and values finite"));
        }
        let d = design(x);
        let lambda = match smoothing {
            Smoothing::Fixed(l) if l >= 0.0 => l,
            Smoothing::Fixed(l) => return Err(Error::domain(format!("λ must be non-negative, got {l}"))),
            Smoothing::Gcv => gcv_lambda(&d, y, w),
        };
        Self::solve(&d, x, y, w, lambda)
    }

    fn solve(d: &Design, x: &[f64], y: &[f64], w: &[f64], lambda: f64) -> Result<Self> {
        let (f, c) = smooth(d, y, w, lambda).ok_or_else(|| Error::invalid("singular spline system"))?;
        Ok(Self { x: x.to_vec(), f, c, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn fitted(&self) -> &[f64] {
        &self.f
    }

    fn interval(&self, x: f64) -> usize {
        self.x.partition_point(|&k| k <= x).clamp(1, self.x.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] {
            return self.f[0] + (x - self.x[0]) * self.derivative(self.x[0]);
        }
        if x > self.x[n - 1] {
            return self.f[n - 1] + (x - self.x[n - 1]) * self.derivative(self.x[n - 1]);
        }
        let i = self.interval(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = 1.0 - a;
        a * self.f[i]
            + b * self.f[i + 1]
            + ((a * a * a - a) * self.c[i] + (b * b * b - b) * self.c[i + 1]) * h * h / 6.0
    }

    /// Analytic first derivative; constant beyond the end knots.
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.x.len();
        let x = x.clamp(self.x[0], self.x[n - 1]);
        let i = self.interval(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = 1.0 - a;
        (self.f[i + 1] - self.f[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * self.c[i]
            + (3.0 * b * b - 1.0) / 6.0 * h * self.c[i + 1]
    }
}

/// Reinsch form: (R + λQᵀW⁻¹Q)γ = Qᵀy, f = y − λW⁻¹Qγ.
fn smooth(d: &Design, y: &[f64], w: &[f64], lambda: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    let winv = DVector::from_iterator(n, w.iter().map(|w| 1.0 / w));
    let winv_q = DMatrix::from_fn(n, n - 2, |i, j| winv[i] * d.q[(i, j)]);
    let a = &d.r + lambda * d.q.transpose() * &winv_q;
    let rhs = d.q.transpose() * DVector::from_column_slice(y);
    let gamma = a.cholesky()?.solve(&rhs);
    let f = DVector::from_column_slice(y) - lambda * &winv_q * &gamma;
    let mut c = vec![0.0; n];
    c[1..n - 1].copy_from_slice(gamma.as_slice());
    Some((f.iter().copied().collect(), c))
}

/// Trace of the hat matrix I − λW⁻¹Q(R + λQᵀW⁻¹Q)⁻¹Qᵀ.
fn hat_trace(d: &Design, w: &[f64], lambda: f64) -> Option<f64> {
    let n = w.len();
    let winv_q = DMatrix::from_fn(n, n - 2, |i, j| d.q[(i, j)] / w[i]);
    let a = &d.r + lambda * d.q.transpose() * &winv_q;
    let inner = a.cholesky()?.solve(&d.q.transpose());
    let m = lambda * winv_q * inner;
    Some(n as f64 - m.trace())
}

fn gcv_lambda(d: &Design, y: &[f64], w: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=160 {
        let lambda = 10f64.powf(-10.0 + k as f64 * 0.1);
        let (Some((f, _)), Some(tr)) = (smooth(d, y, w, lambda), hat_trace(d, w, lambda)) else {
            continue;
        };
        let denom = n - tr;
        if denom < 1e-6 {
            continue;
        }
        let rss: f64 = y.iter().zip(&f).zip(w).map(|((y, f), w)| w * (y - f).powi(2)).sum();
        let score = n * rss / (denom * denom);
        if score < best.0 * (1.0 - 1e-12) {
            best = (score, lambda);
        }
    }
    best.1
}

/// Slope ∂ln S_E/∂ln T of a smoothed noise curve with a bootstrap band.
#[derive(Debug, Clone)]
pub struct LogLogSlope {
    pub spline: SmoothingSpline,
    replicas: Vec<SmoothingSpline>,
}

impl LogLogSlope {
    pub fn slope(&self, t: f64) -> f64 {
        self.spline.derivative(t.ln())
    }

    /// Central 95% interval of the bootstrap slopes at `t`.
    pub fn band(&self, t: f64) -> (f64, f64) {
        let mut s: Vec<f64> = self.replicas.iter().map(|r| r.derivative(t.ln())).collect();
        s.sort_by(f64::total_cmp);
        let pick = |q: f64| {
            let pos = q * (s.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
        };
        (pick(0.025), pick(0.975))
    }

    pub fn lambda(&self) -> f64 {
        self.spline.lambda()
    }
}

/// Smooth ln S_E against ln T with weights 1/(σ/S_E)², then bootstrap the
/// standardised residuals at the chosen λ.
pub fn loglog_spline_slope(curve: &[NoisePoint], smoothing: Smoothing) -> Result<LogLogSlope> {
    if curve.iter().any(|p| !(p.s_e > 0.0 && p.sigma > 0.0 && p.temperature > 0.0)) {
        return Err(Error::domain("spline slope needs positive T, S_E and σ"));
    }
    let x: Vec<f64> = curve.iter().map(|p| p.temperature.ln()).collect();
    let y: Vec<f64> = curve.iter().map(|p| p.s_e.ln()).collect();
    let w: Vec<f64> = curve.iter().map(|p| (p.s_e / p.sigma).powi(2)).collect();
    let spline = SmoothingSpline::fit(&x, &y, &w, smoothing)?;
    let d = design(&x);
    let std_resid: Vec<f64> = y.iter().zip(&spline.f).zip(&w).map(|((y, f), w)| (y - f) * w.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut replicas = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let ys: Vec<f64> =
            (0..y.len()).map(|i| spline.f[i] + std_resid[rng.random_range(0..y.len())] / w[i].sqrt()).collect();
        replicas.push(SmoothingSpline::solve(&d, &x, &ys, &w, spline.lambda)?);
    }
    Ok(LogLogSlope { spline, replicas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::temperature::simple_model;
    use proptest::prelude::*;

    fn curve(temps: &[f64], f: impl Fn(f64) -> f64) -> Vec<NoisePoint> {
        temps.iter().map(|&t| NoisePoint { temperature: t, s_e: f(t), sigma: 0.1 * f(t) }).collect()
    }

    #[test]
    fn exact_power_law_has_constant_slope() {
        let temps = [14.0, 37.0, 60.0, 83.0, 90.0, 97.0, 140.0, 206.0];
        for beta in [-1.0, 0.5, 2.0, 3.7] {
            let s = loglog_spline_slope(&curve(&temps, |t| 1e-14 * t.powf(beta)), Smoothing::Fixed(0.0)).unwrap();
            for t in [14.0, 20.0, 50.0, 91.0, 150.0, 206.0, 300.0] {
                assert!((s.slope(t) - beta).abs() < 1e-6, "β = {beta}, T = {t}: {}", s.slope(t));
            }
            let (lo, hi) = s.band(80.0);
            assert!((lo - beta).abs() < 1e-6 && (hi - beta).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let temps = [10.0, 20.0, 40.0, 80.0, 160.0];
        for smoothing in [Smoothing::Fixed(0.0), Smoothing::Gcv] {
            let s = loglog_spline_slope(&curve(&temps, |_| 3e-15), smoothing).unwrap();
            assert!(s.slope(33.0).abs() < 1e-12);
        }
    }

    #[test]
    fn low_temperature_model_slope_at_80k() {
        // analytic slope β1·x/(1 + x), x = (80/46.2)^3.39
        let x = (80.0f64 / 46.2).powf(3.39);
        let analytic = 3.39 * x / (1.0 + x);
        assert!((analytic - 2.93).abs() < 0.005);
        let temps: Vec<f64> = (2..=18).map(|k| 5.0 * k as f64).collect();
        let s =
            loglog_spline_slope(&curve(&temps, |t| simple_model(t, 0.7, 46.2, 3.39)), Smoothing::Fixed(0.0)).unwrap();
        assert!((s.slope(80.0) - analytic).abs() < 0.01, "{}", s.slope(80.0));
    }

    #[test]
    fn interpolates_at_zero_lambda_and_flattens_at_large_lambda() {
        let x = [0.0, 0.7, 1.1, 2.0, 3.5, 4.0];
        let y = [0.3, -0.2, 0.9, 0.1, 0.4, -0.5];
        let w = [1.0; 6];
        let s = SmoothingSpline::fit(&x, &y, &w, Smoothing::Fixed(0.0)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.value(*xi) - yi).abs() < 1e-12);
        }
        // λ → ∞ approaches the weighted straight-line fit
        let line = SmoothingSpline::fit(&x, &y, &w, Smoothing::Fixed(1e12)).unwrap();
        let (slope, _) = crate::inference::linear_regression(&x, &y, &w);
        assert!((line.derivative(1.0) - slope).abs() < 1e-6);
        assert!(SmoothingSpline::fit(&x[..3], &y[..3], &w[..3], Smoothing::Gcv).is_err());
        assert!(SmoothingSpline::fit(&[0.0, 1.0, 1.0, 2.0], &y[..4], &w[..4], Smoothing::Gcv).is_err());
    }

    #[test]
    fn gcv_smooths_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|x| 2.0 * x + 0.05 * rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal))
            .collect();
        let w = vec![1.0 / 0.05f64.powi(2); 30];
        let s = SmoothingSpline::fit(&x, &y, &w, Smoothing::Gcv).unwrap();
        assert!(s.lambda() > 0.0);
        assert!((s.derivative(1.5) - 2.0).abs() < 0.3, "{}", s.derivative(1.5));
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let temps = [14.0, 37.0, 60.0, 83.0, 90.0, 97.0, 140.0, 206.0];
        let data = curve(&temps, |t| simple_model(t, 1.0, 46.2, 3.39) * (1.0 + 0.05 * (t * 0.37).sin()));
        let a = loglog_spline_slope(&data, Smoothing::Gcv).unwrap();
        let b = loglog_spline_slope(&data, Smoothing::Gcv).unwrap();
        assert_eq!(a.band(80.0), b.band(80.0));
        let (lo, hi) = a.band(80.0);
        assert!(lo <= hi);
    }

    proptest! {
        #[test]
        fn linear_data_reproduced_for_any_lambda(a in -3.0f64..3.0, b in -2.0f64..2.0, l in 0.0f64..1e4) {
            let x = [0.0, 0.5, 1.3, 2.0, 2.2, 3.0];
            let y: Vec<f64> = x.iter().map(|x| a + b * x).collect();
            let s = SmoothingSpline::fit(&x, &y, &[1.0, 2.0, 0.5, 1.0, 3.0, 1.0], Smoothing::Fixed(l)).unwrap();
            prop_assert!((s.derivative(1.7) - b).abs() < 1e-8);
        }
    }
}
