//! Seeded synthetic datasets for round-trip testing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physcore::{angular, heating_rate_from_noise, FieldNoiseDensity, Ion};

use super::dataset::{HeatingDataset, HeatingRecord, NoisePoint};
use super::surface::SurfaceModel;
use super::temperature::TempFitParams;

/// Relative σ written when `noise_frac` is zero, so the dataset stays valid.
pub const NOISELESS_SIGMA_FRAC: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthModel {
    Simple(TempFitParams),
    Piecewise(TempFitParams),
    /// S_E(T), taken as flat in frequency and converted to heating rates for a ⁴⁰Ca⁺ ion.
    Surface(SurfaceModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthGrid {
    pub temperatures: Vec<f64>,
    pub frequencies_hz: Vec<f64>,
}

impl SynthGrid {
    /// Six secular frequencies at eight temperatures spanning 14–206 K.
    pub fn standard() -> Self {
        Self {
            temperatures: vec![14.0, 37.0, 60.0, 83.0, 90.0, 97.0, 140.0, 206.0],
            frequencies_hz: vec![0.4e6, 0.6e6, 0.8e6, 1.0e6, 1.4e6, 1.8e6],
        }
    }
}

fn draw(value: f64, noise_frac: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let z: f64 = StandardNormal.sample(rng);
    let noisy = (value * (1.0 + noise_frac * z)).max(0.0);
    let frac = if noise_frac > 0.0 { noise_frac } else { NOISELESS_SIGMA_FRAC };
    (noisy, frac * value)
}

fn check_noise(noise_frac: f64) -> Result<()> {
    if !(noise_frac >= 0.0 && noise_frac.is_finite()) {
        return Err(Error::domain(format!("noise fraction must be non-negative, got {noise_frac}")));
    }
    Ok(())
}

/// Γ at every (T, f) grid point with Gaussian relative noise. Records are
/// ordered by frequency, then temperature.
pub fn synth_dataset(model: &SynthModel, grid: &SynthGrid, noise_frac: f64, seed: u64) -> Result<HeatingDataset> {
    check_noise(noise_frac)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(grid.temperatures.len() * grid.frequencies_hz.len());
    for &f in &grid.frequencies_hz {
        let value_at: Box<dyn Fn(f64) -> Result<f64>> = match model {
            SynthModel::Simple(p) | SynthModel::Piecewise(p) => {
                let k = p
                    .frequencies_hz
                    .iter()
                    .position(|&pf| pf == f)
                    .ok_or_else(|| Error::invalid(format!("no Γ0 for grid frequency {f} Hz")))?;
                let mut p = p.clone();
                if matches!(model, SynthModel::Simple(_)) {
                    (p.t2, p.beta2, p.t_star) = (None, None, None);
                }
                Box::new(move |t| Ok(p.evaluate(k, t)))
            }
            SynthModel::Surface(s) => {
                let s = *s;
                Box::new(move |t| {
                    let ion = Ion::CA40;
                    Ok(heating_rate_from_noise(
                        FieldNoiseDensity::new(s.evaluate(t))?,
                        angular(f),
                        ion.charge,
                        ion.mass,
                    )?
                    .value())
                })
            }
        };
        for &t in &grid.temperatures {
            let (gamma, sigma) = draw(value_at(t)?, noise_frac, &mut rng);
            records.push(HeatingRecord { temperature: t, f_hz: f, gamma, sigma });
        }
    }
    HeatingDataset::new(records)
}

/// S_E(T) samples of a surface model with Gaussian relative noise.
pub fn synth_noise_curve(
    model: &SurfaceModel,
    temperatures: &[f64],
    noise_frac: f64,
    seed: u64,
) -> Result<Vec<NoisePoint>> {
    check_noise(noise_frac)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(temperatures
        .iter()
        .map(|&t| {
            let (s_e, sigma) = draw(model.evaluate(t), noise_frac, &mut rng);
            NoisePoint { temperature: t, s_e, sigma }
        })
        .collect())
}
