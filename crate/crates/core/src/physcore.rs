//! Physical constants, unit helpers and the conversion between ion heating
//! rate and electric-field noise spectral density.
//!
//! Frequencies are angular (rad/s) everywhere inside the library. Noise
//! densities are single-sided, in V² m⁻² Hz⁻¹.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// CODATA-2018 constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub k_b: f64,
    pub hbar: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub c: f64,
    pub q_e: f64,
    pub atomic_mass_unit: f64,
    pub m_ca40: f64,
}

/// Mass of ⁴⁰Ca in unified atomic mass units (the missing electron is neglected).
pub const CA40_MASS_U: f64 = 39.962_590_9;

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    k_b: 1.380_649e-23,
    hbar: 1.054_571_817e-34,
    eps0: 8.854_187_812_8e-12,
    mu0: 1.256_637_062_12e-6,
    c: 299_792_458.0,
    q_e: 1.602_176_634e-19,
    atomic_mass_unit: 1.660_539_066_60e-27,
    m_ca40: CA40_MASS_U * 1.660_539_066_60e-27,
};

pub const K_B: f64 = CODATA_2018.k_b;
pub const HBAR: f64 = CODATA_2018.hbar;
pub const EPS0: f64 = CODATA_2018.eps0;
pub const MU0: f64 = CODATA_2018.mu0;
pub const C_LIGHT: f64 = CODATA_2018.c;
pub const Q_E: f64 = CODATA_2018.q_e;

impl PhysicalConstants {
    /// SHA-256 over the bit patterns of every constant, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in [self.k_b, self.hbar, self.eps0, self.mu0, self.c, self.q_e, self.atomic_mass_unit, self.m_ca40] {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Convert an ordinary frequency in Hz to angular frequency.
#[inline]
pub fn angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Convert an angular frequency to ordinary frequency in Hz.
#[inline]
pub fn hertz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Vacuum wavenumber k = ω/c.
#[inline]
pub fn wavenumber(omega: f64) -> f64 {
    omega / C_LIGHT
}

/// An (ω, T) evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    omega: f64,
    temperature: f64,
}

impl SpectralPoint {
    pub fn new(omega: f64, temperature: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::domain(format!("omega must be positive, got {omega}")));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::domain(format!("temperature must be positive, got {temperature}")));
        }
        Ok(Self { omega, temperature })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Single-sided electric-field noise spectral density S_E in V² m⁻² Hz⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldNoiseDensity(f64);

impl FieldNoiseDensity {
    pub const ZERO: Self = Self(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!("field noise density must be finite and non-negative, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Add for FieldNoiseDensity {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::iter::Sum for FieldNoiseDensity {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self(iter.map(|s| s.0).sum())
    }
}

/// Ion heating rate in phonons per second.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeatingRate(f64);

impl HeatingRate {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::domain(format!("heating rate must be finite and non-negative, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Charge and mass of the trapped ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ion {
    pub charge: f64,
    pub mass: f64,
}

impl Ion {
    pub const CA40: Ion = Ion { charge: Q_E, mass: CODATA_2018.m_ca40 };
}

impl Default for Ion {
    fn default() -> Self {
        Ion::CA40
    }
}

fn conversion_factor(omega: f64, charge: f64, mass: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be positive, got {mass}")));
    }
    Ok(charge * charge / (4.0 * mass * HBAR * omega))
}

/// Γ_h = q² S_E / (4 m ħ ω).
pub fn heating_rate_from_noise(s_e: FieldNoiseDensity, omega: f64, charge: f64, mass: f64) -> Result<HeatingRate> {
    let factor = conversion_factor(omega, charge, mass)?;
    HeatingRate::new(factor * s_e.value())
}

/// Inverse of [`heating_rate_from_noise`].
pub fn noise_from_heating_rate(gamma: HeatingRate, omega: f64, charge: f64, mass: f64) -> Result<FieldNoiseDensity> {
    let factor = conversion_factor(omega, charge, mass)?;
    FieldNoiseDensity::new(gamma.value() / factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const OMEGA_1MHZ: f64 = 2.0 * PI * 1.0e6;

    #[test]
    fn light_speed_consistent_with_eps0_mu0() {
        let c = CODATA_2018;
        let product = c.c * (c.eps0 * c.mu0).sqrt();
        assert!((product - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_aluminium_leads_give_point_two_one_phonons() {
        let s = FieldNoiseDensity::new(2.0 * 7.33e-16).unwrap();
        let g = heating_rate_from_noise(s, OMEGA_1MHZ, Q_E, Ion::CA40.mass).unwrap();
        assert!((g.value() - 0.21).abs() < 0.005, "{}", g.value());
    }

    #[test]
    fn zero_noise_zero_rate() {
        let g = heating_rate_from_noise(FieldNoiseDensity::ZERO, OMEGA_1MHZ, Q_E, Ion::CA40.mass).unwrap();
        assert_eq!(g.value(), 0.0);
        let s = noise_from_heating_rate(HeatingRate::new(0.0).unwrap(), OMEGA_1MHZ, Q_E, 1.0).unwrap();
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn one_phonon_per_second_anchor() {
        // q² / (4 m ħ ω) = 1.4594e14 for ⁴⁰Ca⁺ at 1 MHz, hand evaluated
        let s = noise_from_heating_rate(HeatingRate::new(1.0).unwrap(), OMEGA_1MHZ, Q_E, Ion::CA40.mass).unwrap();
        assert_relative_eq!(s.value(), 6.852e-15, max_relative = 1e-3);
        let g =
            heating_rate_from_noise(FieldNoiseDensity::new(6.9e-15).unwrap(), OMEGA_1MHZ, Q_E, Ion::CA40.mass).unwrap();
        assert!((g.value() - 1.00).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_domain() {
        let s = FieldNoiseDensity::new(1e-15).unwrap();
        assert!(heating_rate_from_noise(s, 0.0, Q_E, 1.0).is_err());
        assert!(heating_rate_from_noise(s, -1.0, Q_E, 1.0).is_err());
        assert!(heating_rate_from_noise(s, 1.0, Q_E, 0.0).is_err());
        assert!(FieldNoiseDensity::new(-1.0).is_err());
        assert!(SpectralPoint::new(1.0, 0.0).is_err());
    }

    #[test]
    fn linear_in_noise_and_inverse_in_omega() {
        let m = Ion::CA40.mass;
        let base = heating_rate_from_noise(FieldNoiseDensity::new(1e-15).unwrap(), 1e6, Q_E, m).unwrap().value();
        for scale in [0.5, 2.0, 7.0] {
            let s = FieldNoiseDensity::new(scale * 1e-15).unwrap();
            let g = heating_rate_from_noise(s, 1e6, Q_E, m).unwrap().value();
            assert_relative_eq!(g, scale * base, max_relative = 1e-14);
            let g =
                heating_rate_from_noise(FieldNoiseDensity::new(1e-15).unwrap(), scale * 1e6, Q_E, m).unwrap().value();
            assert_relative_eq!(g, base / scale, max_relative = 1e-14);
        }
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(CODATA_2018.fingerprint(), CODATA_2018.fingerprint());
        assert_eq!(CODATA_2018.fingerprint().len(), 64);
    }

    proptest::proptest! {
        #[test]
        fn conversion_round_trip(exp in -20.0f64..-10.0, f in 1e5f64..1e7) {
            let x = 10f64.powf(exp);
            let omega = angular(f);
            let g = heating_rate_from_noise(FieldNoiseDensity::new(x).unwrap(), omega, Q_E, Ion::CA40.mass).unwrap();
            let back = noise_from_heating_rate(g, omega, Q_E, Ion::CA40.mass).unwrap().value();
            proptest::prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
