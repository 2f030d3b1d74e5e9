use std::path::{Path, PathBuf};

use trapnoise::config::{load_circuit, load_stack};
use trapnoise::noise_models::{fdt_noise, jnn_budget};
use trapnoise::physcore::angular;

fn repo(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

fn log_slope(t: &[f64], s: &[f64]) -> f64 {
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn fdt_and_jnn_share_the_normal_state_trend() {
    let omega = angular(1e6);
    let stack = load_stack(&repo("stacks/sapphire-ybco-au.cfg")).unwrap();
    let circuit = load_circuit(&repo("circuits/reference-trap.cfg")).unwrap();
    let temps: Vec<f64> = (0..=10).map(|i| 100.0 + 10.0 * i as f64).collect();
    let fdt: Vec<f64> = temps.iter().map(|&t| fdt_noise(&stack, omega, t, 225e-6).unwrap().value()).collect();
    let jnn: Vec<f64> = temps.iter().map(|&t| jnn_budget(&circuit, omega, t).unwrap().total.value()).collect();
    let (a, b) = (log_slope(&temps, &fdt), log_slope(&temps, &jnn));
    assert!((a - b).abs() < 0.1, "FDT slope {a}, JNN slope {b}");
}

#[test]
fn exposed_ybco_drops_below_tc() {
    let omega = angular(1e6);
    let stack = load_stack(&repo("stacks/sapphire-ybco.cfg")).unwrap();
    let below = fdt_noise(&stack, omega, 44.5, 225e-6).unwrap().value();
    let above = fdt_noise(&stack, omega, 93.5, 225e-6).unwrap().value();
    assert!(above / below >= 1e3, "{above} / {below}");
}
