//! Global temperature models sharing shape parameters across frequency sets:
//!
//! Γ⁽¹⁾(T) = Γ0·[1 + (T/T1)^β1]
//! Γ⁽²⁾(T) = Γ⁽¹⁾(T) below T*, Γ⁽¹⁾(T*)·[1 + ((T − T*)/T2)^β2] above.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::criteria::{information_criteria, ModelScore};
use super::dataset::{distinct, HeatingDataset, HeatingRecord};
use super::lm::{minimize, LmOptions, LmResult};
use super::matrix_rows;

/// Number of starting points for the piecewise model.
pub const PIECEWISE_STARTS: usize = 8;

// The upper branch can sit on a shallow ridge in β2; stop once progress stalls.
const FIT_OPTIONS: LmOptions = LmOptions { max_iterations: 1000, ftol: 1e-10, xtol: 1e-12, gtol: 1e-12 };

pub fn simple_model(t: f64, gamma0: f64, t1: f64, beta1: f64) -> f64 {
    gamma0 * (1.0 + (t / t1).powf(beta1))
}

pub fn piecewise_model(t: f64, gamma0: f64, t1: f64, beta1: f64, t2: f64, beta2: f64, t_star: f64) -> f64 {
    if t < t_star {
        simple_model(t, gamma0, t1, beta1)
    } else {
        simple_model(t_star, gamma0, t1, beta1) * (1.0 + ((t - t_star) / t2).powf(beta2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempFitParams {
    pub frequencies_hz: Vec<f64>,
    pub gamma0: Vec<f64>,
    pub t1: f64,
    pub beta1: f64,
    pub t2: Option<f64>,
    pub beta2: Option<f64>,
    pub t_star: Option<f64>,
}

impl TempFitParams {
    pub fn is_piecewise(&self) -> bool {
        self.t_star.is_some()
    }

    /// Model rate for frequency set `index` at temperature `t`.
    pub fn evaluate(&self, index: usize, t: f64) -> f64 {
        let g0 = self.gamma0[index];
        match (self.t2, self.beta2, self.t_star) {
            (Some(t2), Some(b2), Some(ts)) => piecewise_model(t, g0, self.t1, self.beta1, t2, b2, ts),
            _ => simple_model(t, g0, self.t1, self.beta1),
        }
    }

    fn from_vector(frequencies_hz: &[f64], p: &[f64], piecewise: bool) -> Self {
        let f = frequencies_hz.len();
        Self {
            frequencies_hz: frequencies_hz.to_vec(),
            gamma0: p[..f].to_vec(),
            t1: p[f],
            beta1: p[f + 1],
            t2: piecewise.then(|| p[f + 2]),
            beta2: piecewise.then(|| p[f + 3]),
            t_star: piecewise.then(|| p[f + 4]),
        }
    }

    fn to_vector(&self) -> Vec<f64> {
        let mut v = self.gamma0.clone();
        v.extend([self.t1, self.beta1]);
        if let (Some(t2), Some(b2), Some(ts)) = (self.t2, self.beta2, self.t_star) {
            v.extend([t2, b2, ts]);
        }
        v
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.frequencies_hz.iter().map(|f| format!("Gamma0@{f}Hz")).collect();
        names.extend(["T1".to_string(), "beta1".to_string()]);
        if self.is_piecewise() {
            names.extend(["T2".to_string(), "beta2".to_string(), "T_star".to_string()]);
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempFit {
    pub params: TempFitParams,
    pub param_names: Vec<String>,
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub score: ModelScore,
    pub chi2_red: f64,
    pub iterations: usize,
    /// T* ended outside the temperature range of the data.
    pub t_star_at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempModelComparison {
    pub simple: TempFit,
    pub piecewise: TempFit,
    pub piecewise_preferred_aic: bool,
    pub piecewise_preferred_bic: bool,
}

struct Problem {
    records: Vec<HeatingRecord>,
    set_index: Vec<usize>,
    frequencies: Vec<f64>,
}

impl Problem {
    fn new(ds: &HeatingDataset) -> Self {
        let mut records = ds.records().to_vec();
        records.sort_by(|a, b| {
            a.f_hz
                .total_cmp(&b.f_hz)
                .then(a.temperature.total_cmp(&b.temperature))
                .then(a.gamma.total_cmp(&b.gamma))
                .then(a.sigma.total_cmp(&b.sigma))
        });
        let frequencies = distinct(records.iter().map(|r| r.f_hz));
        let set_index =
            records.iter().map(|r| frequencies.iter().position(|&f| f == r.f_hz).expect("present")).collect();
        Self { records, set_index, frequencies }
    }

    fn n_sets(&self) -> usize {
        self.frequencies.len()
    }

    fn residuals(&self, p: &[f64], piecewise: bool) -> DVector<f64> {
        let f = self.n_sets();
        let (t1, b1) = (p[f], p[f + 1]);
        let invalid = !(t1 > 0.0) || (piecewise && !(p[f + 2] > 0.0 && p[f + 3] > 0.0 && p[f + 4] > 0.0));
        DVector::from_iterator(
            self.records.len(),
            self.records.iter().zip(&self.set_index).map(|(r, &k)| {
                if invalid {
                    return f64::NAN;
                }
                let m = if piecewise {
                    piecewise_model(r.temperature, p[k], t1, b1, p[f + 2], p[f + 3], p[f + 4])
                } else {
                    simple_model(r.temperature, p[k], t1, b1)
                };
                (r.gamma - m) / r.sigma
            }),
        )
    }

    fn jacobian(&self, p: &[f64], piecewise: bool) -> DMatrix<f64> {
        let f = self.n_sets();
        let m = if piecewise { f + 5 } else { f + 2 };
        let (t1, b1) = (p[f], p[f + 1]);
        let mut j = DMatrix::zeros(self.records.len(), m);
        for (i, (r, &k)) in self.records.iter().zip(&self.set_index).enumerate() {
            let g0 = p[k];
            let s = -1.0 / r.sigma;
            let below = !piecewise || r.temperature < p[f + 4];
            if below {
                let x = (r.temperature / t1).powf(b1);
                j[(i, k)] = s * (1.0 + x);
                j[(i, f)] = s * g0 * x * (-b1 / t1);
                j[(i, f + 1)] = s * g0 * x * (r.temperature / t1).ln();
            } else {
                let (t2, b2, ts) = (p[f + 2], p[f + 3], p[f + 4]);
                let xs = (ts / t1).powf(b1);
                let a = g0 * (1.0 + xs);
                let u = (r.temperature - ts) / t2;
                let ub = if u > 0.0 { u.powf(b2) } else { 0.0 };
                let bfac = 1.0 + ub;
                j[(i, k)] = s * (1.0 + xs) * bfac;
                j[(i, f)] = s * g0 * xs * (-b1 / t1) * bfac;
                j[(i, f + 1)] = s * g0 * xs * (ts / t1).ln() * bfac;
                if u > 0.0 {
                    j[(i, f + 2)] = s * a * ub * (-b2 / t2);
                    j[(i, f + 3)] = s * a * ub * u.ln();
                    j[(i, f + 4)] = s * (g0 * xs * b1 / ts * bfac - a * b2 * ub / u / t2);
                } else {
                    j[(i, f + 4)] = s * g0 * xs * b1 / ts * bfac;
                }
            }
        }
        j
    }

    fn fit(&self, start: &[f64], piecewise: bool) -> Result<LmResult> {
        minimize(
            |p: &[f64]| self.residuals(p, piecewise),
            Some(|p: &[f64]| self.jacobian(p, piecewise)),
            start,
            &FIT_OPTIONS,
        )
    }

    /// (T2, β2) from a log-log regression of Γ/Γ⁽¹⁾(T*) − 1 against T − T*.
    fn upper_guess(&self, gamma0: &[f64], t1: f64, b1: f64, ts: f64, t_hi: f64) -> (f64, f64) {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (r, &k) in self.records.iter().zip(&self.set_index) {
            if r.temperature > ts {
                let excess = r.gamma / simple_model(ts, gamma0[k], t1, b1) - 1.0;
                if excess > 0.05 {
                    x.push((r.temperature - ts).ln());
                    y.push(excess.ln());
                }
            }
        }
        let fallback = ((0.5 * (t_hi - ts)).max(1.0), 2.0);
        if distinct(x.iter().copied()).len() < 2 {
            return fallback;
        }
        let (b2, c) = super::linear_regression(&x, &y, &vec![1.0; x.len()]);
        if !(b2 > 0.2 && b2 < 20.0) {
            return fallback;
        }
        ((-c / b2).exp().clamp(1e-3, 1e4), b2)
    }

    /// Fit with T* held at its starting value; returns the full parameter vector.
    fn fit_fixed_t_star(&self, start: &[f64]) -> Result<Vec<f64>> {
        let m = start.len();
        let ts = start[m - 1];
        let full = |q: &[f64]| {
            let mut p = q.to_vec();
            p.push(ts);
            p
        };
        let lm = minimize(
            |q: &[f64]| self.residuals(&full(q), true),
            Some(|q: &[f64]| self.jacobian(&full(q), true).columns(0, m - 1).into_owned()),
            &start[..m - 1],
            &FIT_OPTIONS,
        )?;
        Ok(full(&lm.params))
    }

    /// Γ0 per set from the lowest-temperature record, given (T1, β1).
    fn gamma0_guess(&self, t1: f64, b1: f64, below: f64) -> Vec<f64> {
        (0..self.n_sets())
            .map(|k| {
                let r = self
                    .records
                    .iter()
                    .zip(&self.set_index)
                    .filter(|(r, &i)| i == k && r.temperature < below)
                    .map(|(r, _)| r)
                    .next()
                    .or_else(|| self.records.iter().zip(&self.set_index).find(|(_, &i)| i == k).map(|(r, _)| r))
                    .expect("set has records");
                (r.gamma / (1.0 + (r.temperature / t1).powf(b1))).max(1e-12)
            })
            .collect()
    }

    fn finish(&self, lm: LmResult, piecewise: bool) -> Result<TempFit> {
        let params = TempFitParams::from_vector(&self.frequencies, &lm.params, piecewise);
        let cov = lm.covariance()?;
        let temps = distinct(self.records.iter().map(|r| r.temperature));
        let (t_lo, t_hi) = (temps[0], temps[temps.len() - 1]);
        let t_star_at_boundary = params.t_star.is_some_and(|ts| ts <= t_lo || ts >= t_hi);
        if t_star_at_boundary {
            log::warn!("T* = {:?} K is at or beyond the data range [{t_lo}, {t_hi}] K", params.t_star);
        }
        let score = information_criteria(lm.cost, lm.residuals.len(), lm.params.len())?;
        Ok(TempFit {
            param_names: params.param_names(),
            std_errors: (0..cov.nrows()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect(),
            covariance: matrix_rows(&cov),
            chi2_red: lm.chi2_red(),
            iterations: lm.iterations,
            params,
            score,
            t_star_at_boundary,
        })
    }
}

fn pick_best(results: Vec<Result<LmResult>>) -> Result<LmResult> {
    let mut best: Option<LmResult> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.cost < b.cost) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::invalid("no fit starts")))
}

/// Fit both temperature models to a multi-frequency dataset. The residuals
/// are (Γ − model)/σ for both, and the scores use the weighted RSS.
pub fn fit_temperature_models(ds: &HeatingDataset) -> Result<TempModelComparison> {
    let prob = Problem::new(ds);
    let temps = ds.temperatures();
    if prob.n_sets() < 1 || temps.len() < 4 {
        return Err(Error::invalid(format!("temperature fits need at least 4 temperatures, got {}", temps.len())));
    }
    let f = prob.n_sets();
    let (t_lo, t_hi) = (temps[0], temps[temps.len() - 1]);
    let simple_starts: Vec<Vec<f64>> = [0.25, 0.5, 0.75]
        .iter()
        .map(|q| {
            let t1 = t_lo + q * (t_hi - t_lo);
            let mut p = prob.gamma0_guess(t1, 2.0, f64::INFINITY);
            p.extend([t1, 2.0]);
            p
        })
        .collect();
    let simple_lm = pick_best(simple_starts.par_iter().map(|s| prob.fit(s, false)).collect())?;
    let simple = prob.finish(simple_lm, false)?;

    // T* starts spread by quantile over the measured temperatures
    let piecewise_starts: Vec<Vec<f64>> = (0..PIECEWISE_STARTS)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let pos = (k as f64 + 0.5) / PIECEWISE_STARTS as f64 * (temps.len() - 1) as f64;
            let i = (pos.floor() as usize).min(temps.len() - 2);
            let ts = temps[i] + (pos - i as f64) * (temps[i + 1] - temps[i]);
            let t1 = simple.params.t1 * (1.0 + 0.2 * (rng.random::<f64>() - 0.5));
            let b1 = (simple.params.beta1 * (1.0 + 0.4 * (rng.random::<f64>() - 0.5))).max(0.5);
            let mut p = prob.gamma0_guess(t1, b1, ts);
            let (t2, b2) = prob.upper_guess(&p, t1, b1, ts, t_hi);
            p.extend([t1, b1, t2, b2, ts]);
            p
        })
        .collect();
    let piecewise_lm = pick_best(
        piecewise_starts
            .par_iter()
            .map(|s| prob.fit_fixed_t_star(s).and_then(|stage| prob.fit(&stage, true)))
            .collect(),
    )?;
    let piecewise = prob.finish(piecewise_lm, true)?;
    debug_assert_eq!(piecewise.params.to_vector().len(), f + 5);
    Ok(TempModelComparison {
        piecewise_preferred_aic: piecewise.score.aic < simple.score.aic,
        piecewise_preferred_bic: piecewise.score.bic < simple.score.bic,
        simple,
        piecewise,
    })
}

/// Width of the plateau above T*: the span over which Γ⁽²⁾ grows by at most
/// `tolerance_frac`, ΔT = T2·tolerance_frac^(1/β2).
pub fn plateau_width(params: &TempFitParams, tolerance_frac: f64) -> Result<f64> {
    let (Some(t2), Some(b2)) = (params.t2, params.beta2) else {
        return Err(Error::invalid("plateau width needs piecewise parameters"));
    };
    if !(tolerance_frac >= 0.0) {
        return Err(Error::domain(format!("tolerance must be non-negative, got {tolerance_frac}")));
    }
    Ok(t2 * tolerance_frac.powf(1.0 / b2))
}
