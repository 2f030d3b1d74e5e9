//! Physical noise estimates: blackbody and fluctuation-dissipation noise
//! above the trap surface, and the Johnson-Nyquist budget of the electrode
//! wiring (filters, leads, patterned electrodes).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::layered_media::{greens_parallel_with, GreensOptions, GreensResult, LayerStack};
use crate::materials::{parallel_sheet, resistivity_lookup, sheet_resistance, FilmSheet, ResistivityTable};
use crate::physcore::{FieldNoiseDensity, C_LIGHT, EPS0, HBAR, K_B, MU0};

/// ħω/k_BT above which the classical blackbody limit is flagged.
pub const CLASSICAL_LIMIT: f64 = 0.01;

/// Classical blackbody field noise S_BB = 2k_BTω²/(3πε0c³).
pub fn blackbody_noise(omega: f64, temperature: f64) -> Result<FieldNoiseDensity> {
    if !(omega >= 0.0) || !(temperature >= 0.0) {
        return Err(Error::domain(format!(
            "blackbody noise needs omega >= 0 and T >= 0 (omega = {omega}, T = {temperature})"
        )));
    }
    if temperature > 0.0 && HBAR * omega / (K_B * temperature) > CLASSICAL_LIMIT {
        log::warn!(
            "hbar*omega/kB*T = {:.3e} exceeds {CLASSICAL_LIMIT}; classical blackbody limit is inaccurate",
            HBAR * omega / (K_B * temperature)
        );
    }
    FieldNoiseDensity::new(2.0 * K_B * temperature * omega * omega / (3.0 * PI * EPS0 * C_LIGHT.powi(3)))
}

/// S_E = S_BB·(1 + g∥) at ion height `d` above `stack`.
pub fn fdt_noise(stack: &LayerStack, omega: f64, temperature: f64, d: f64) -> Result<FieldNoiseDensity> {
    Ok(fdt_noise_detailed(stack, omega, temperature, d, GreensOptions::default())?.0)
}

/// [`fdt_noise`] with explicit quadrature controls, also returning g∥.
pub fn fdt_noise_detailed(
    stack: &LayerStack,
    omega: f64,
    temperature: f64,
    d: f64,
    opts: GreensOptions,
) -> Result<(FieldNoiseDensity, GreensResult)> {
    let g = greens_parallel_with(stack, omega, temperature, d, opts)?;
    let s_bb = blackbody_noise(omega, temperature)?;
    Ok((FieldNoiseDensity::new(s_bb.value() * g.enhancement)?, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCapacitor {
    pub capacitance: f64,
    pub esr: f64,
}

/// First-order RC low-pass: series resistor with capacitors to ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterNetwork {
    pub series_r: f64,
    pub capacitors: Vec<FilterCapacitor>,
}

impl FilterNetwork {
    pub fn new(series_r: f64, capacitors: Vec<FilterCapacitor>) -> Result<Self> {
        if !(series_r > 0.0) {
            return Err(Error::invalid(format!("filter resistance must be positive, got {series_r}")));
        }
        for c in &capacitors {
            if !(c.capacitance > 0.0) || !(c.esr >= 0.0) {
                return Err(Error::invalid(format!(
                    "filter capacitor needs C > 0 and ESR >= 0 (C = {}, ESR = {})",
                    c.capacitance, c.esr
                )));
            }
        }
        Ok(Self { series_r, capacitors })
    }

    /// R = 100 Ω with 330 nF (ESR 24 mΩ) and 470 pF (ESR 1.3 Ω).
    pub fn reference_trap() -> Self {
        Self {
            series_r: 100.0,
            capacitors: vec![
                FilterCapacitor { capacitance: 330e-9, esr: 0.024 },
                FilterCapacitor { capacitance: 470e-12, esr: 1.3 },
            ],
        }
    }
}

/// Re Z with Z⁻¹ = 1/R + Σ 1/(ESR + 1/(iωC)).
pub fn filter_effective_resistance(net: &FilterNetwork, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("omega must be positive, got {omega}")));
    }
    let admittance: Complex64 =
        net.capacitors.iter().map(|c| 1.0 / Complex64::new(c.esr, -1.0 / (omega * c.capacitance))).sum::<Complex64>()
            + 1.0 / net.series_r;
    Ok((1.0 / admittance).re)
}

/// Skin depth √(2ρ/(ωμ0)).
pub fn skin_depth(rho: f64, omega: f64) -> Result<f64> {
    if !(rho > 0.0 && omega > 0.0) {
        return Err(Error::domain(format!("skin depth needs rho, omega > 0 (rho = {rho}, omega = {omega})")));
    }
    Ok((2.0 * rho / (omega * MU0)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcbTrace {
    pub width: f64,
    pub thickness: f64,
    pub length: f64,
    pub material: ResistivityTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireBond {
    pub diameter: f64,
    pub length: f64,
    pub material: ResistivityTable,
    pub multiplicity: u32,
}

/// PCB trace, wire bond(s) and bond contacts between filter and electrode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadModel {
    pub pcb_trace: PcbTrace,
    pub wire_bond: WireBond,
    pub contact_r_per_bond: f64,
}

impl LeadModel {
    pub fn validate(&self) -> Result<()> {
        let t = &self.pcb_trace;
        let b = &self.wire_bond;
        let dims = [t.width, t.thickness, t.length, b.diameter, b.length];
        if dims.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::invalid("lead dimensions must be positive"));
        }
        if b.multiplicity < 1 {
            return Err(Error::invalid("wire bond multiplicity must be at least 1"));
        }
        if !(self.contact_r_per_bond >= 0.0) {
            return Err(Error::invalid("contact resistance must be non-negative"));
        }
        Ok(())
    }

    /// 300 µm × 100 µm × 1 cm Cu trace, 25 µm × 1 cm Au bond, 75 mΩ contact.
    pub fn reference_trap(multiplicity: u32) -> Self {
        Self {
            pcb_trace: PcbTrace {
                width: 300e-6,
                thickness: 100e-6,
                length: 1e-2,
                material: ResistivityTable::copper(),
            },
            wire_bond: WireBond { diameter: 25e-6, length: 1e-2, material: ResistivityTable::gold(), multiplicity },
            contact_r_per_bond: 0.075,
        }
    }
}

fn round_wire_area(radius: f64, delta: f64) -> f64 {
    let core = (radius - delta).max(0.0);
    PI * (radius * radius - core * core)
}

fn rect_trace_area(width: f64, thickness: f64, delta: f64) -> f64 {
    let core = (width - 2.0 * delta).max(0.0) * (thickness - 2.0 * delta).max(0.0);
    width * thickness - core
}

/// R_PCB + (R_bond + R_contact)/multiplicity with skin-effect cross sections.
pub fn lead_resistance(lead: &LeadModel, omega: f64, temperature: f64) -> Result<f64> {
    lead.validate()?;
    let t = &lead.pcb_trace;
    let rho_t = resistivity_lookup(&t.material, temperature)?;
    let r_pcb = rho_t * t.length / rect_trace_area(t.width, t.thickness, skin_depth(rho_t, omega)?);
    let b = &lead.wire_bond;
    let rho_b = resistivity_lookup(&b.material, temperature)?;
    let r_bond = rho_b * b.length / round_wire_area(0.5 * b.diameter, skin_depth(rho_b, omega)?);
    Ok(r_pcb + (r_bond + lead.contact_r_per_bond) / f64::from(b.multiplicity))
}

/// An electrode treated as a wire of stacked films, with its wiring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeModel {
    pub name: String,
    /// D_i: field at the ion per volt on the electrode is 1/D_i.
    pub characteristic_distance: f64,
    pub strip_length: f64,
    pub strip_width: f64,
    pub films: Vec<FilmSheet>,
    pub lead: Option<LeadModel>,
    pub filter: Option<FilterNetwork>,
    /// Placeholder entry whose values are estimates.
    pub approximate: bool,
}

impl ElectrodeModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.characteristic_distance > 0.0) {
            return Err(Error::invalid(format!("electrode `{}`: D must be positive", self.name)));
        }
        if !(self.strip_length > 0.0 && self.strip_width > 0.0) {
            return Err(Error::invalid(format!("electrode `{}`: strip dimensions must be positive", self.name)));
        }
        if let Some(lead) = &self.lead {
            lead.validate()?;
        }
        Ok(())
    }
}

/// Parallel film sheet resistance × length/width. A superconducting film
/// below its Tc contributes its residual sheet resistance.
pub fn electrode_resistance(e: &ElectrodeModel, temperature: f64, omega: f64) -> Result<f64> {
    e.validate()?;
    let mut r_s = f64::INFINITY;
    for film in &e.films {
        r_s = parallel_sheet(r_s, sheet_resistance(film, temperature, omega)?);
    }
    if r_s.is_infinite() {
        return Ok(0.0);
    }
    Ok(r_s * e.strip_length / e.strip_width)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub name: String,
    pub r_filter: f64,
    pub r_lead: f64,
    pub r_elec: f64,
    pub characteristic_distance: f64,
    pub s_e: FieldNoiseDensity,
}

impl BudgetEntry {
    pub fn r_eff(&self) -> f64 {
        self.r_filter + self.r_lead + self.r_elec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub per_source: Vec<BudgetEntry>,
    pub total: FieldNoiseDensity,
}

/// S_E = 4k_BT·Σ R_eff,i/D_i² over all electrodes.
pub fn jnn_budget(electrodes: &[ElectrodeModel], omega: f64, temperature: f64) -> Result<NoiseBudget> {
    if electrodes.is_empty() {
        return Err(Error::invalid("JNN budget needs at least one electrode"));
    }
    if !(temperature >= 0.0) {
        return Err(Error::domain(format!("temperature must be non-negative, got {temperature}")));
    }
    let mut per_source = Vec::with_capacity(electrodes.len());
    for e in electrodes {
        let r_filter = match &e.filter {
            Some(f) => filter_effective_resistance(f, omega)?,
            None => 0.0,
        };
        let (r_lead, r_elec) = if temperature == 0.0 {
            (0.0, 0.0)
        } else {
            let r_lead = match &e.lead {
                Some(l) => lead_resistance(l, omega, temperature)?,
                None => 0.0,
            };
            (r_lead, electrode_resistance(e, temperature, omega)?)
        };
        let d = e.characteristic_distance;
        let s = 4.0 * K_B * temperature * (r_filter + r_lead + r_elec) / (d * d);
        per_source.push(BudgetEntry {
            name: e.name.clone(),
            r_filter,
            r_lead,
            r_elec,
            characteristic_distance: d,
            s_e: FieldNoiseDensity::new(s)?,
        });
    }
    let total = per_source.iter().map(|e| e.s_e).sum();
    Ok(NoiseBudget { per_source, total })
}
