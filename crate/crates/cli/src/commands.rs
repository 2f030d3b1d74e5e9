use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use trapnoise::config::{load_circuit, load_params, load_scene, load_stack, parse_stack, Document, MaterialLibrary};
use trapnoise::inference::{
    fit_freq_power_law, fit_surface_models, fit_temperature_models, loglog_spline_slope, noise_curve_from_dataset,
    plateau_width, synth_dataset, synth_noise_curve, taf_alpha, taf_consistency_chi2, AlphaPoint, FreqPoint,
    HeatingDataset, HeatingRecord, NoisePoint, Smoothing, SynthModel,
};
use trapnoise::layered_media::{GreensOptions, Layer, LayerStack};
use trapnoise::materials::MaterialModel;
use trapnoise::noise_models::{fdt_noise_detailed, jnn_budget};
use trapnoise::patch_field::{scene_integrals, PatchOptions, SumMode};
use trapnoise::physcore::angular;
use trapnoise::{heating_rate_from_noise, Ion};

use crate::manifest::{RunManifest, SCHEMA_VERSION};
use crate::table::{num, parse_grid, CsvOut, Table};
use crate::{Cli, CliError, Command, FdtArgs, FitArgs, FitModel, JnnArgs, SynthArgs, TafArgs, ZetaArgs};

const HEATING_COLUMNS: [&str; 4] = ["temperature_K", "f_hz", "gamma", "sigma"];
const NOISE_COLUMNS: [&str; 3] = ["temperature_K", "s_e", "sigma"];

pub fn dispatch(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Fdt(a) => fdt(a, cli.seed),
        Command::Jnn(a) => jnn(a, cli.seed),
        Command::Fit(a) => fit(a, cli.seed),
        Command::Taf(a) => taf(a, cli.seed),
        Command::Zeta(a) => zeta(a, cli.seed),
        Command::Synth(a) => synth(a, cli.seed),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

/// The stack with every two-fluid layer given London depth `lambda0`.
fn with_london_depth(stack: &LayerStack, lambda0: f64) -> Result<LayerStack, CliError> {
    let mut found = false;
    let layers = stack
        .layers()
        .iter()
        .map(|l| {
            let mut l: Layer = l.clone();
            if let MaterialModel::TwoFluidSc(sc) = &mut l.material {
                sc.lambda0 = lambda0;
                found = true;
            }
            l
        })
        .collect();
    if !found {
        return Err(CliError::Usage("--band needs a stack with a superconducting layer".into()));
    }
    Ok(LayerStack::new(layers)?)
}

fn fdt(a: &FdtArgs, seed: u64) -> Result<String, CliError> {
    let temps = parse_grid(&a.temps)?;
    let omega = angular(positive("omega-hz", a.omega_hz)?);
    let d = positive("distance-um", a.distance_um)? * 1e-6;
    let stack = match &a.materials {
        Some(m) => parse_stack(&Document::load(&a.config)?, &MaterialLibrary::load(m)?)?,
        None => load_stack(&a.config)?,
    };
    let opts = GreensOptions { rel_tol: a.tolerance, ..GreensOptions::default() };
    let mut manifest = RunManifest::new("fdt", seed)
        .config(&a.config)
        .set("temps", &a.temps)
        .set("omega_hz", num(a.omega_hz))
        .set("distance_um", num(a.distance_um))
        .set("tolerance", num(a.tolerance))
        .set("band", a.band);
    if let Some(m) = &a.materials {
        manifest = manifest.config(m);
    }
    let sweep = |stack: &LayerStack| -> Result<Vec<_>, CliError> {
        temps.par_iter().map(|&t| Ok(fdt_noise_detailed(stack, omega, t, d, opts)?)).collect()
    };
    if a.band {
        let low = sweep(&with_london_depth(&stack, 80e-9)?)?;
        let high = sweep(&with_london_depth(&stack, 635e-9)?)?;
        let mut out =
            CsvOut::new(&[manifest.csv_comment()], &["temperature_K", "s_e_lambda0_80nm", "s_e_lambda0_635nm"]);
        for ((t, l), h) in temps.iter().zip(&low).zip(&high) {
            out.row(&[num(*t), num(l.0.value()), num(h.0.value())]);
        }
        return Ok(out.finish());
    }
    let rows = sweep(&stack)?;
    let mut out = CsvOut::new(&[manifest.csv_comment()], &["temperature_K", "s_e", "g_parallel", "g_abs_error"]);
    for (t, (s, g)) in temps.iter().zip(&rows) {
        out.row(&[num(*t), num(s.value()), num(g.g_parallel), num(g.abs_error_estimate)]);
    }
    Ok(out.finish())
}

fn gamma_of(s_e: trapnoise::FieldNoiseDensity, omega: f64) -> Result<f64, CliError> {
    let ion = Ion::CA40;
    Ok(heating_rate_from_noise(s_e, omega, ion.charge, ion.mass)?.value())
}

fn jnn(a: &JnnArgs, seed: u64) -> Result<String, CliError> {
    let temps = parse_grid(&a.temps)?;
    let omega = angular(positive("omega-hz", a.omega_hz)?);
    let electrodes = load_circuit(&a.config)?;
    let manifest =
        RunManifest::new("jnn", seed).config(&a.config).set("temps", &a.temps).set("omega_hz", num(a.omega_hz));
    let budgets: Vec<_> = temps.par_iter().map(|&t| jnn_budget(&electrodes, omega, t)).collect::<Result<_, _>>()?;
    let mut out = CsvOut::new(
        &[manifest.csv_comment()],
        &["temperature_K", "name", "R_filter", "R_lead", "R_elec", "D", "S_E", "Gamma"],
    );
    for (t, b) in temps.iter().zip(&budgets) {
        for e in &b.per_source {
            out.row(&[
                num(*t),
                e.name.clone(),
                num(e.r_filter),
                num(e.r_lead),
                num(e.r_elec),
                num(e.characteristic_distance),
                num(e.s_e.value()),
                num(gamma_of(e.s_e, omega)?),
            ]);
        }
        out.row(&[
            num(*t),
            "total".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            num(b.total.value()),
            num(gamma_of(b.total, omega)?),
        ]);
    }
    Ok(out.finish())
}

fn read_dataset(path: &Path) -> Result<HeatingDataset, CliError> {
    let table = Table::read(path, &HEATING_COLUMNS)?;
    let records = table
        .rows
        .iter()
        .map(|(_, v)| HeatingRecord { temperature: v[0], f_hz: v[1], gamma: v[2], sigma: v[3] })
        .collect();
    HeatingDataset::new(records).map_err(|e| match e {
        trapnoise::Error::Data { row, message } => {
            CliError::Data { path: table.path.clone(), line: table.line_of(row), message }
        }
        other => other.into(),
    })
}

/// Noise curve from a noise CSV, or converted from a heating-rate CSV.
fn read_curve(path: &Path) -> Result<Vec<NoisePoint>, CliError> {
    if Table::has_column(path, "s_e")? {
        let table = Table::read(path, &NOISE_COLUMNS)?;
        for (line, v) in &table.rows {
            if !(v[0] > 0.0 && v[2] > 0.0) {
                return Err(CliError::Data {
                    path: table.path.clone(),
                    line: *line,
                    message: "temperature and sigma must be positive".into(),
                });
            }
        }
        Ok(table.rows.iter().map(|(_, v)| NoisePoint { temperature: v[0], s_e: v[1], sigma: v[2] }).collect())
    } else {
        Ok(noise_curve_from_dataset(&read_dataset(path)?, Ion::CA40)?)
    }
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    schema_version: &'static str,
    manifest: RunManifest,
    model: &'static str,
    result: T,
}

fn json<T: Serialize>(manifest: RunManifest, model: &'static str, result: T) -> String {
    let mut s = serde_json::to_string_pretty(&Report { schema_version: SCHEMA_VERSION, manifest, model, result })
        .expect("report serialises");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct FreqRow {
    temperature_k: f64,
    gamma_coeff: f64,
    alpha: f64,
    std_errors: [f64; 2],
    covariance: [[f64; 2]; 2],
    chi2_red: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct FreqReport {
    omega0: f64,
    fits: Vec<FreqRow>,
    /// Temperatures with fewer than three frequencies.
    skipped_temperatures_k: Vec<f64>,
}

#[derive(Serialize)]
struct TempReport {
    comparison: trapnoise::inference::TempModelComparison,
    plateau_tolerance: f64,
    plateau_width_k: f64,
}

fn fit(a: &FitArgs, seed: u64) -> Result<String, CliError> {
    let manifest = RunManifest::new("fit", seed)
        .config(&a.data)
        .set("model", format!("{:?}", a.model).to_lowercase())
        .set("tolerance", num(a.tolerance));
    match a.model {
        FitModel::Freq => {
            let ds = read_dataset(&a.data)?;
            if ds.len() < 3 {
                return Err(CliError::Data {
                    path: a.data.display().to_string(),
                    line: 0,
                    message: format!("a power-law fit needs at least 3 rows, got {}", ds.len()),
                });
            }
            let mut fits = Vec::new();
            let mut skipped = Vec::new();
            for t in ds.temperatures() {
                let pts: Vec<FreqPoint> = ds
                    .records()
                    .iter()
                    .filter(|r| r.temperature == t)
                    .map(|r| FreqPoint { omega: angular(r.f_hz), gamma: r.gamma, sigma: r.sigma })
                    .collect();
                let mut freqs: Vec<f64> = pts.iter().map(|p| p.omega).collect();
                freqs.sort_by(f64::total_cmp);
                freqs.dedup();
                if freqs.len() < 3 {
                    log::warn!("skipping T = {t} K: {} distinct frequencies", freqs.len());
                    skipped.push(t);
                    continue;
                }
                let f = fit_freq_power_law(&pts)?;
                fits.push(FreqRow {
                    temperature_k: t,
                    gamma_coeff: f.gamma_coeff,
                    alpha: f.alpha,
                    std_errors: f.std_errors(),
                    covariance: f.covariance,
                    chi2_red: f.chi2_red,
                    iterations: f.iterations,
                });
            }
            if fits.is_empty() {
                return Err(CliError::Data {
                    path: a.data.display().to_string(),
                    line: 0,
                    message: "no temperature has three or more frequencies".into(),
                });
            }
            Ok(json(
                manifest,
                "freq",
                FreqReport { omega0: trapnoise::inference::OMEGA0, fits, skipped_temperatures_k: skipped },
            ))
        }
        FitModel::Temp => {
            let comparison = fit_temperature_models(&read_dataset(&a.data)?)?;
            let plateau_width_k = plateau_width(&comparison.piecewise.params, a.tolerance)?;
            Ok(json(manifest, "temp", TempReport { comparison, plateau_tolerance: a.tolerance, plateau_width_k }))
        }
        FitModel::Surface => {
            let curve = read_curve(&a.data)?;
            Ok(json(manifest, "surface", fit_surface_models(&curve)?))
        }
    }
}

#[derive(Serialize)]
struct Consistency {
    chi2: f64,
    dof: usize,
    p_value: f64,
}

fn taf(a: &TafArgs, seed: u64) -> Result<String, CliError> {
    let omega = angular(positive("omega-hz", a.omega_hz)?);
    positive("tau0", a.tau0)?;
    let mut curve = read_curve(&a.data)?;
    if curve.is_empty() {
        return Err(CliError::Data { path: a.data.display().to_string(), line: 0, message: "no data rows".into() });
    }
    curve.sort_by(|x, y| x.temperature.total_cmp(&y.temperature));
    let smoothing = match a.lambda {
        Some(l) => Smoothing::Fixed(l),
        None => Smoothing::Gcv,
    };
    let slope = loglog_spline_slope(&curve, smoothing)?;
    let mut manifest = RunManifest::new("taf", seed)
        .config(&a.data)
        .set("omega_hz", num(a.omega_hz))
        .set("tau0", num(a.tau0))
        .set("lambda", a.lambda.map_or("gcv".to_string(), num));
    let mut comments = Vec::new();
    if let Some(path) = &a.alpha {
        manifest = manifest.config(path);
        let table = Table::read(path, &["temperature_K", "alpha", "sigma"])?;
        let measured: Vec<AlphaPoint> =
            table.rows.iter().map(|(_, v)| AlphaPoint { temperature: v[0], alpha: v[1], sigma: v[2] }).collect();
        let predict = |t: f64| taf_alpha(slope.slope(t), omega, a.tau0).unwrap_or(f64::NAN);
        let (chi2, p_value) = taf_consistency_chi2(&measured, &predict)?;
        let c = Consistency { chi2, dof: measured.len(), p_value };
        comments.push(format!("# consistency: {}\n", serde_json::to_string(&c).expect("serialises")));
    }
    comments.insert(0, manifest.csv_comment());
    comments.push(format!("# smoothing lambda: {}\n", num(slope.lambda())));
    let mut out = CsvOut::new(
        &comments,
        &["temperature_K", "slope", "slope_lo", "slope_hi", "alpha_pred", "alpha_lo", "alpha_hi"],
    );
    for p in &curve {
        let t = p.temperature;
        let s = slope.slope(t);
        let (lo, hi) = slope.band(t);
        let (a_lo, a_hi) = (taf_alpha(lo, omega, a.tau0)?, taf_alpha(hi, omega, a.tau0)?);
        out.row(&[
            num(t),
            num(s),
            num(lo),
            num(hi),
            num(taf_alpha(s, omega, a.tau0)?),
            num(a_lo.min(a_hi)),
            num(a_lo.max(a_hi)),
        ]);
    }
    Ok(out.finish())
}

fn zeta(a: &ZetaArgs, seed: u64) -> Result<String, CliError> {
    let scene = load_scene(&a.config)?;
    let mut opts = PatchOptions { patch_size: positive("patch-um", a.patch_um)? * 1e-6, ..PatchOptions::default() };
    if a.exact {
        opts.mode = SumMode::Exact;
    }
    let ratios = match &a.ratios {
        Some(spec) => parse_grid(spec)?,
        None => std::iter::once(0.0).chain((0..=20).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64))).collect(),
    };
    let manifest = RunManifest::new("zeta", seed)
        .config(&a.config)
        .set("ratios", a.ratios.clone().unwrap_or_else(|| "default".into()))
        .set("patch_um", num(a.patch_um))
        .set("exact", a.exact);
    let integrals = scene_integrals(&scene, &opts)?;
    let mut comments = vec![manifest.csv_comment()];
    if let Ok(half) = integrals.zeta_inverse(0.5) {
        comments.push(format!("# f_ratio at zeta = 0.5: {}\n", num(half)));
    }
    let mut out = CsvOut::new(&comments, &["f_ratio", "zeta"]);
    for r in ratios {
        out.row(&[num(r), num(integrals.zeta(r)?.zeta)]);
    }
    Ok(out.finish())
}

fn synth(a: &SynthArgs, seed: u64) -> Result<String, CliError> {
    let params = load_params(&a.config)?;
    let mut grid = params.grid.clone();
    if let Some(spec) = &a.temps {
        let temps = parse_grid(spec)?;
        match &mut grid {
            Some(g) => g.temperatures = temps,
            None => {
                let frequencies_hz = match &params.model {
                    SynthModel::Simple(p) | SynthModel::Piecewise(p) => p.frequencies_hz.clone(),
                    SynthModel::Surface(_) => vec![1.0e6],
                };
                grid = Some(trapnoise::inference::SynthGrid { temperatures: temps, frequencies_hz });
            }
        }
    }
    let grid = grid.ok_or_else(|| CliError::Usage("no [grid] in the parameter file; pass --temps".into()))?;
    let manifest = RunManifest::new("synth", seed)
        .config(&a.config)
        .set("noise", num(a.noise))
        .set("temps", a.temps.clone().unwrap_or_else(|| "config".into()));
    let comments = [manifest.csv_comment()];
    match &params.model {
        SynthModel::Surface(m) => {
            let curve = synth_noise_curve(m, &grid.temperatures, a.noise, seed)?;
            let mut out = CsvOut::new(&comments, &NOISE_COLUMNS);
            for p in curve {
                out.row(&[num(p.temperature), num(p.s_e), num(p.sigma)]);
            }
            Ok(out.finish())
        }
        model => {
            let ds = synth_dataset(model, &grid, a.noise, seed)?;
            let mut out = CsvOut::new(&comments, &HEATING_COLUMNS);
            for r in ds.records() {
                out.row(&[num(r.temperature), num(r.f_hz), num(r.gamma), num(r.sigma)]);
            }
            Ok(out.finish())
        }
    }
}
