use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physcore::{angular, noise_from_heating_rate, HeatingRate, Ion};

use super::power_law::{fit_freq_power_law, FreqPoint, OMEGA0};

/// One heating-rate measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingRecord {
    pub temperature: f64,
    pub f_hz: f64,
    pub gamma: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingDataset {
    records: Vec<HeatingRecord>,
}

impl HeatingDataset {
    pub fn new(records: Vec<HeatingRecord>) -> Result<Self> {
        for (row, r) in records.iter().enumerate() {
            let fail = |message: String| Err(Error::Data { row: row + 1, message });
            if !(r.temperature > 0.0 && r.temperature.is_finite()) {
                return fail(format!("temperature must be positive, got {}", r.temperature));
            }
            if !(r.f_hz > 0.0 && r.f_hz.is_finite()) {
                return fail(format!("frequency must be positive, got {}", r.f_hz));
            }
            if !(r.gamma >= 0.0 && r.gamma.is_finite()) {
                return fail(format!("heating rate must be non-negative, got {}", r.gamma));
            }
            if !(r.sigma > 0.0 && r.sigma.is_finite()) {
                return fail(format!("uncertainty must be positive, got {}", r.sigma));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[HeatingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct secular frequencies in ascending order.
    pub fn frequencies(&self) -> Vec<f64> {
        distinct(self.records.iter().map(|r| r.f_hz))
    }

    /// Distinct temperatures in ascending order.
    pub fn temperatures(&self) -> Vec<f64> {
        distinct(self.records.iter().map(|r| r.temperature))
    }
}

pub(crate) fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Field noise at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub temperature: f64,
    pub s_e: f64,
    pub sigma: f64,
}

/// S_E(T) at ω0 = 2π×1 MHz. Temperatures with three or more frequencies
/// are reduced through a power-law fit evaluated at ω0; otherwise each
/// record is converted at its own frequency and the results are combined
/// by inverse-variance weighting.
pub fn noise_curve_from_dataset(ds: &HeatingDataset, ion: Ion) -> Result<Vec<NoisePoint>> {
    let mut out = Vec::new();
    for t in ds.temperatures() {
        let at: Vec<&HeatingRecord> = ds.records().iter().filter(|r| r.temperature == t).collect();
        let freqs = distinct(at.iter().map(|r| r.f_hz));
        let (gamma, sigma, omega) = if freqs.len() >= 3 {
            let pts: Vec<FreqPoint> =
                at.iter().map(|r| FreqPoint { omega: angular(r.f_hz), gamma: r.gamma, sigma: r.sigma }).collect();
            let fit = fit_freq_power_law(&pts)?;
            (fit.gamma_coeff, fit.covariance[0][0].sqrt(), OMEGA0)
        } else {
            let mut wsum = 0.0;
            let mut s = 0.0;
            for r in &at {
                let conv = |g: f64| -> Result<f64> {
                    Ok(noise_from_heating_rate(HeatingRate::new(g)?, angular(r.f_hz), ion.charge, ion.mass)?.value())
                };
                let (v, sd) = (conv(r.gamma)?, conv(r.sigma)?);
                let w = 1.0 / (sd * sd);
                wsum += w;
                s += w * v;
            }
            out.push(NoisePoint { temperature: t, s_e: s / wsum, sigma: wsum.sqrt().recip() });
            continue;
        };
        let conv = |g: f64| -> Result<f64> {
            Ok(noise_from_heating_rate(HeatingRate::new(g.max(0.0))?, omega, ion.charge, ion.mass)?.value())
        };
        out.push(NoisePoint { temperature: t, s_e: conv(gamma)?, sigma: conv(sigma)? });
    }
    Ok(out)
}
