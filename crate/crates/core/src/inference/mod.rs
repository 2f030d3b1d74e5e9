//! Fitting and model selection for heating-rate data.

pub mod criteria;
pub mod dataset;
pub mod lm;
pub mod power_law;
pub mod spline;
pub mod surface;
pub mod synth;
pub mod taf;
pub mod temperature;

pub use criteria::{information_criteria, ModelScore};
pub use dataset::{noise_curve_from_dataset, HeatingDataset, HeatingRecord, NoisePoint};
pub use power_law::{fit_freq_power_law, jnn_corrected_alpha, FreqPoint, FreqPowerLawFit, OMEGA0};
pub use spline::{loglog_spline_slope, LogLogSlope, Smoothing, SmoothingSpline};
pub use surface::{fit_surface_models, SurfaceFit, SurfaceFitParams, SurfaceModel};
pub use synth::{synth_dataset, synth_noise_curve, SynthGrid, SynthModel};
pub use taf::{taf_alpha, taf_consistency_chi2, AlphaPoint, TAU0_DEFAULT};
pub use temperature::{
    fit_temperature_models, piecewise_model, plateau_width, simple_model, TempFit, TempFitParams, TempModelComparison,
};

use nalgebra::DMatrix;

/// Row-major copy of a matrix for serialisation.
pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Weighted least-squares slope and intercept of y on x.
pub(crate) fn linear_regression(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
