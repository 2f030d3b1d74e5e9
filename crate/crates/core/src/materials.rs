//! Complex relative permittivity models ε(ω, T) and resistivity helpers.
//!
//! The shipped resistivity tables are transcribed from the CRC Handbook
//! table "Electrical resistivity of pure metals" (which reproduces Matula,
//! J. Phys. Chem. Ref. Data 8, 1147 (1979)). Values are bulk resistivities
//! in Ω·m. The aluminium entry is a thin-film table: bulk values plus a
//! temperature-independent residual chosen so that ρ(20 K) = 1.0e-8 Ω·m.
//! Interpolation between grid points is linear in (T, ln ρ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physcore::{wavenumber, EPS0};

/// Ordered (temperature, resistivity) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistivityTable {
    label: String,
    entries: Vec<(f64, f64)>,
}

impl ResistivityTable {
    pub fn new(label: impl Into<String>, entries: Vec<(f64, f64)>) -> Result<Self> {
        let label = label.into();
        if entries.is_empty() {
            return Err(Error::invalid(format!("resistivity table `{label}` is empty")));
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid(format!(
                    "resistivity table `{label}`: temperatures must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, rho)) = entries.iter().find(|(t, rho)| !(*rho > 0.0) || !t.is_finite()) {
            return Err(Error::invalid(format!("resistivity table `{label}`: invalid entry ({t} K, {rho} Ω·m)")));
        }
        Ok(Self { label, entries })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn t_min(&self) -> f64 {
        self.entries[0].0
    }

    pub fn t_max(&self) -> f64 {
        self.entries[self.entries.len() - 1].0
    }

    /// Bulk gold.
    pub fn gold() -> Self {
        Self::scaled("Au", &GOLD_1E8)
    }

    /// Bulk copper.
    pub fn copper() -> Self {
        Self::scaled("Cu", &COPPER_1E8)
    }

    /// Bulk aluminium.
    pub fn aluminium_bulk() -> Self {
        Self::scaled("Al (bulk)", &ALUMINIUM_1E8)
    }

    /// Aluminium film: bulk plus residual, anchored at 1.0e-8 Ω·m at 20 K.
    pub fn aluminium_film() -> Self {
        let residual = 1.0 - 0.000_755;
        let entries: Vec<(f64, f64)> =
            ALUMINIUM_1E8.iter().map(|&(t, r)| (t, if t == 20.0 { 1.0e-8 } else { (r + residual) * 1e-8 })).collect();
        Self::new("Al (film)", entries).expect("static table")
    }

    /// Linear normal-state resistivity ρ(T) = ρ(T_ref)·T/T_ref sampled on a 1 K grid.
    pub fn linear_normal_state(label: impl Into<String>, rho_ref: f64, t_ref: f64, t_max: f64) -> Result<Self> {
        if !(rho_ref > 0.0 && t_ref > 0.0 && t_max > t_ref) {
            return Err(Error::invalid("linear normal-state table needs rho_ref, t_ref > 0 and t_max > t_ref"));
        }
        let n = (t_max - t_ref).ceil() as usize;
        let entries = (0..=n)
            .map(|i| {
                let t = (t_ref + i as f64).min(t_max);
                (t, rho_ref * t / t_ref)
            })
            .collect();
        Self::new(label, entries)
    }

    fn scaled(label: &str, table: &[(f64, f64)]) -> Self {
        Self::new(label, table.iter().map(|&(t, r)| (t, r * 1e-8)).collect()).expect("static table")
    }
}

// CRC Handbook, in units of 1e-8 Ω·m. The 4 K row repeats the tabulated
// residual value at 1 K.
const GOLD_1E8: [(f64, f64); 13] = [
    (4.0, 0.0220),
    (10.0, 0.0226),
    (20.0, 0.035),
    (40.0, 0.141),
    (60.0, 0.308),
    (80.0, 0.481),
    (100.0, 0.650),
    (150.0, 1.061),
    (200.0, 1.462),
    (273.0, 2.051),
    (293.0, 2.214),
    (298.0, 2.255),
    (300.0, 2.271),
];

const COPPER_1E8: [(f64, f64); 13] = [
    (4.0, 0.00200),
    (10.0, 0.00202),
    (20.0, 0.00280),
    (40.0, 0.0239),
    (60.0, 0.0971),
    (80.0, 0.215),
    (100.0, 0.348),
    (150.0, 0.699),
    (200.0, 1.046),
    (273.0, 1.543),
    (293.0, 1.678),
    (298.0, 1.712),
    (300.0, 1.725),
];

const ALUMINIUM_1E8: [(f64, f64); 12] = [
    (4.0, 0.000100),
    (10.0, 0.000193),
    (20.0, 0.000755),
    (40.0, 0.0181),
    (60.0, 0.0959),
    (80.0, 0.245),
    (100.0, 0.442),
    (150.0, 1.006),
    (200.0, 1.587),
    (273.0, 2.417),
    (293.0, 2.650),
    (300.0, 2.733),
];

/// Log-linear interpolation of ρ(T).
pub fn resistivity_lookup(table: &ResistivityTable, temperature: f64) -> Result<f64> {
    let e = &table.entries;
    let (t_min, t_max) = (table.t_min(), table.t_max());
    if !(temperature >= t_min && temperature <= t_max) {
        return Err(Error::OutOfRange { table: table.label.clone(), temperature, min: t_min, max: t_max });
    }
    let idx = e.partition_point(|&(t, _)| t <= temperature);
    if idx == 0 {
        return Ok(e[0].1);
    }
    let (t0, r0) = e[idx - 1];
    if t0 == temperature || idx == e.len() {
        return Ok(r0);
    }
    let (t1, r1) = e[idx];
    let frac = (temperature - t0) / (t1 - t0);
    Ok((r0.ln() + frac * (r1.ln() - r0.ln())).exp())
}

/// Residual sheet resistance of a superconducting film,
/// R(f) = r_ref · (f / f_ref)^exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScSheetResistance {
    pub r_ref: f64,
    pub f_ref_hz: f64,
    pub exponent: f64,
}

impl ScSheetResistance {
    /// 1e-7 Ω/sq, the MHz-band value measured for YBCO films, flat in frequency.
    pub const YBCO_MHZ: Self = Self { r_ref: 1.0e-7, f_ref_hz: 20.0e6, exponent: 0.0 };

    pub fn at(&self, omega: f64) -> f64 {
        let f = omega / (2.0 * std::f64::consts::PI);
        self.r_ref * (f / self.f_ref_hz).powf(self.exponent)
    }
}

/// Two-fluid superconductor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFluid {
    pub lambda0: f64,
    pub tc: f64,
    pub tc_uncertainty: f64,
    pub sigma_n: f64,
    pub rho_normal: ResistivityTable,
    pub sc_sheet: ScSheetResistance,
}

impl TwoFluid {
    /// YBCO with Tc = 89 ± 1 K, σ_n = 1.81e6 S/m and a linear normal-state
    /// resistivity anchored at 1/σ_n at Tc.
    pub fn ybco(lambda0: f64) -> Self {
        let tc = 89.0;
        let sigma_n = 1.81e6;
        Self {
            lambda0,
            tc,
            tc_uncertainty: 1.0,
            sigma_n,
            rho_normal: ResistivityTable::linear_normal_state("YBCO (normal)", 1.0 / sigma_n, tc, 400.0)
                .expect("static parameters"),
            sc_sheet: ScSheetResistance::YBCO_MHZ,
        }
    }

    pub fn is_superconducting(&self, temperature: f64) -> bool {
        temperature < self.tc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialModel {
    Vacuum,
    Conductor { rho: ResistivityTable },
    TwoFluidSc(TwoFluid),
    LossyDielectric { eps_r: f64, tan_delta: f64 },
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MaterialModel::Vacuum | MaterialModel::Conductor { .. } => Ok(()),
            MaterialModel::TwoFluidSc(sc) => {
                if !(sc.lambda0 > 0.0 && sc.tc > 0.0 && sc.sigma_n > 0.0) {
                    return Err(Error::invalid("two-fluid model needs lambda0, Tc, sigma_n > 0"));
                }
                Ok(())
            }
            MaterialModel::LossyDielectric { eps_r, tan_delta } => {
                if !(*eps_r >= 1.0 && *tan_delta >= 0.0) {
                    return Err(Error::invalid("dielectric needs eps_r >= 1 and tan_delta >= 0"));
                }
                Ok(())
            }
        }
    }

    /// True when the material is the vacuum, so that ε ≡ 1.
    pub fn is_vacuum(&self) -> bool {
        matches!(self, MaterialModel::Vacuum)
    }
}

/// λ(T) = λ0 / √(1 − T/Tc), valid below Tc.
pub fn london_depth(lambda0: f64, tc: f64, temperature: f64) -> Result<f64> {
    if !(lambda0 > 0.0 && tc > 0.0) {
        return Err(Error::domain("lambda0 and Tc must be positive"));
    }
    if !(temperature >= 0.0) || temperature >= tc {
        return Err(Error::domain(format!("London depth needs 0 <= T < Tc (T = {temperature}, Tc = {tc})")));
    }
    Ok(lambda0 / (1.0 - temperature / tc).sqrt())
}

fn conductor_eps(rho: f64, omega: f64) -> Complex64 {
    Complex64::new(0.0, 1.0 / (rho * omega * EPS0))
}

/// Complex relative permittivity of `model` at (ω, T).
pub fn permittivity(model: &MaterialModel, omega: f64, temperature: f64) -> Result<Complex64> {
    if !(omega > 0.0) || !(temperature > 0.0) {
        return Err(Error::domain(format!(
            "permittivity needs omega > 0 and T > 0 (omega = {omega}, T = {temperature})"
        )));
    }
    match model {
        MaterialModel::Vacuum => Ok(Complex64::new(1.0, 0.0)),
        MaterialModel::LossyDielectric { eps_r, tan_delta } => Ok(Complex64::new(*eps_r, eps_r * tan_delta)),
        MaterialModel::Conductor { rho } => Ok(conductor_eps(resistivity_lookup(rho, temperature)?, omega)),
        MaterialModel::TwoFluidSc(sc) => {
            if sc.is_superconducting(temperature) {
                let lambda = london_depth(sc.lambda0, sc.tc, temperature)?;
                let k = wavenumber(omega);
                let superfluid = 1.0 / (k * k * lambda * lambda);
                let normal = sc.sigma_n * (temperature / sc.tc) / (omega * EPS0);
                Ok(Complex64::new(1.0 - superfluid, normal))
            } else {
                Ok(conductor_eps(resistivity_lookup(&sc.rho_normal, temperature)?, omega))
            }
        }
    }
}

/// A thin film of given material and thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmSheet {
    pub material: MaterialModel,
    pub thickness: f64,
}

impl FilmSheet {
    pub fn new(material: MaterialModel, thickness: f64) -> Result<Self> {
        if !(thickness > 0.0) {
            return Err(Error::invalid(format!("film thickness must be positive, got {thickness}")));
        }
        Ok(Self { material, thickness })
    }
}

/// Sheet resistance ρ(T)/t. A superconducting film below Tc returns its
/// configured residual sheet resistance at ω.
pub fn sheet_resistance(film: &FilmSheet, temperature: f64, omega: f64) -> Result<f64> {
    match &film.material {
        MaterialModel::Conductor { rho } => Ok(resistivity_lookup(rho, temperature)? / film.thickness),
        MaterialModel::TwoFluidSc(sc) => {
            if sc.is_superconducting(temperature) {
                Ok(sc.sc_sheet.at(omega))
            } else {
                Ok(resistivity_lookup(&sc.rho_normal, temperature)? / film.thickness)
            }
        }
        other => Err(Error::invalid(format!("sheet resistance requires a conducting film, got {other:?}"))),
    }
}

/// Two sheet resistances in parallel. An infinite input acts as an open circuit.
pub fn parallel_sheet(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return b;
    }
    if b.is_infinite() {
        return a;
    }
    a * b / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI * 1.0e6;

    #[test]
    fn london_depth_limits() {
        assert_relative_eq!(london_depth(80e-9, 89.0, 1e-9).unwrap(), 80e-9, max_relative = 1e-10);
        assert_relative_eq!(london_depth(80e-9, 89.0, 44.5).unwrap(), 80e-9 * 2f64.sqrt(), max_relative = 1e-14);
        let l = london_depth(80e-9, 89.0, 83.0).unwrap();
        assert!((l - 308.1e-9).abs() < 0.1e-9, "{l}");
        assert!(london_depth(80e-9, 89.0, 89.0).is_err());
        assert!(london_depth(80e-9, 89.0, 95.0).is_err());
    }

    #[test]
    fn simple_permittivities() {
        let vac = permittivity(&MaterialModel::Vacuum, OMEGA, 10.0).unwrap();
        assert_eq!(vac, Complex64::new(1.0, 0.0));
        let sapphire = MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 1e-6 };
        let eps = permittivity(&sapphire, OMEGA, 10.0).unwrap();
        assert_eq!(eps.re, 10.0);
        assert_relative_eq!(eps.im, 1e-5, max_relative = 1e-12);
    }

    #[test]
    fn superconducting_permittivity_is_large_and_negative() {
        let ybco = MaterialModel::TwoFluidSc(TwoFluid::ybco(150e-9));
        let eps = permittivity(&ybco, OMEGA, 44.5).unwrap();
        // k = 2.0958e-2 1/m, λ = 212.1 nm → −1/(kλ)² = −5.06e16
        assert!((eps.re / -5.06e16 - 1.0).abs() < 2e-3, "{}", eps.re);
        assert!(eps.im > 0.0);
    }

    #[test]
    fn superconducting_jump_at_tc() {
        let sc = TwoFluid::ybco(150e-9);
        let model = MaterialModel::TwoFluidSc(sc.clone());
        let below = permittivity(&model, OMEGA, sc.tc - 1e-6).unwrap();
        let above = permittivity(&model, OMEGA, sc.tc).unwrap();
        // λ diverges as T → Tc⁻, but at MHz the superfluid term is still −1/(kλ)² ≈ −1.1e9
        assert!(below.re < -1e8 && below.re > -1e10, "{}", below.re);
        // right limit: normal metal, purely imaginary
        assert_eq!(above.re, 0.0);
        assert_relative_eq!(above.im, sc.sigma_n / (OMEGA * EPS0), max_relative = 1e-9);
        // normal-carrier term is continuous across Tc
        assert_relative_eq!(below.im, above.im, max_relative = 1e-6);
    }

    #[test]
    fn lookup_identity_and_geometric_midpoint() {
        let au = ResistivityTable::gold();
        for &(t, r) in au.entries() {
            assert_eq!(resistivity_lookup(&au, t).unwrap(), r);
        }
        let mid = resistivity_lookup(&au, 90.0).unwrap();
        assert_relative_eq!(mid, (0.481e-8f64 * 0.650e-8).sqrt(), max_relative = 1e-12);
        assert!(resistivity_lookup(&au, 3.0).is_err());
        assert!(resistivity_lookup(&au, 301.0).is_err());
    }

    #[test]
    fn aluminium_film_anchor() {
        let al = ResistivityTable::aluminium_film();
        assert_eq!(resistivity_lookup(&al, 20.0).unwrap(), 1.0e-8);
    }

    #[test]
    fn sheet_resistances_at_90k() {
        let au = FilmSheet::new(MaterialModel::Conductor { rho: ResistivityTable::gold() }, 200e-9).unwrap();
        let r_au = sheet_resistance(&au, 90.0, OMEGA).unwrap();
        assert!((r_au - 0.028).abs() < 0.001, "{r_au}");
        let ybco = FilmSheet::new(MaterialModel::TwoFluidSc(TwoFluid::ybco(150e-9)), 300e-9).unwrap();
        let r_y = sheet_resistance(&ybco, 90.0, OMEGA).unwrap();
        assert!((r_y / 1.8 - 1.0).abs() < 0.05, "{r_y}");
        let thick = FilmSheet { thickness: 400e-9, ..au.clone() };
        assert_relative_eq!(sheet_resistance(&thick, 90.0, OMEGA).unwrap(), r_au / 2.0, max_relative = 1e-14);
        // superconducting residual below Tc
        assert_eq!(sheet_resistance(&ybco, 50.0, OMEGA).unwrap(), 1e-7);
        let dielectric = FilmSheet::new(MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 0.0 }, 1e-6).unwrap();
        assert!(sheet_resistance(&dielectric, 90.0, OMEGA).is_err());
    }

    #[test]
    fn parallel_sheet_rules() {
        assert_eq!(parallel_sheet(3.0, f64::INFINITY), 3.0);
        assert_eq!(parallel_sheet(f64::INFINITY, 3.0), 3.0);
        assert_relative_eq!(parallel_sheet(0.5, 0.5), 0.25);
        assert!((parallel_sheet(1.8, 0.028) - 0.027_57).abs() < 1e-5);
    }

    #[test]
    fn conductor_scales_inverse_with_omega() {
        let au = MaterialModel::Conductor { rho: ResistivityTable::gold() };
        let a = permittivity(&au, OMEGA, 77.0).unwrap();
        let b = permittivity(&au, 2.0 * OMEGA, 77.0).unwrap();
        assert_relative_eq!(b.im, a.im / 2.0, max_relative = 1e-15);
        assert_eq!(b.re, 0.0);
    }

    #[test]
    fn rejects_non_monotone_tables() {
        assert!(ResistivityTable::new("x", vec![(10.0, 1.0), (10.0, 2.0)]).is_err());
        assert!(ResistivityTable::new("x", vec![(10.0, 1.0), (20.0, 0.0)]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn passive_everywhere(t in 4.0f64..300.0, f in 1e3f64..1e9, l0 in 50e-9f64..1e-6) {
            let omega = 2.0 * PI * f;
            let models = [
                MaterialModel::Vacuum,
                MaterialModel::Conductor { rho: ResistivityTable::gold() },
                MaterialModel::Conductor { rho: ResistivityTable::copper() },
                MaterialModel::TwoFluidSc(TwoFluid::ybco(l0)),
                MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 1e-6 },
            ];
            for m in &models {
                let eps = permittivity(m, omega, t).unwrap();
                proptest::prop_assert!(eps.im >= 0.0);
            }
        }
    }
}
