//! Fixtures shared by the benchmarks.

use trapnoise::inference::{synth_dataset, HeatingDataset, SynthGrid, SynthModel, TempFitParams};
use trapnoise::{Layer, LayerStack, MaterialModel, TwoFluid};

/// 300 nm YBCO on bulk sapphire.
pub fn ybco_on_sapphire() -> LayerStack {
    LayerStack::new(vec![
        Layer::finite(MaterialModel::TwoFluidSc(TwoFluid::ybco(80e-9)), 300e-9),
        Layer::bulk(MaterialModel::LossyDielectric { eps_r: 10.0, tan_delta: 1e-6 }),
    ])
    .expect("static stack")
}

/// Piecewise temperature model with the reference parameters.
pub fn reference_model() -> SynthModel {
    SynthModel::Piecewise(TempFitParams {
        frequencies_hz: vec![0.4e6, 0.6e6, 0.8e6, 1.0e6, 1.4e6, 1.8e6],
        gamma0: vec![3.76, 1.92, 1.18, 0.70, 0.38, 0.29],
        t1: 46.2,
        beta1: 3.39,
        t2: Some(102.9),
        beta2: Some(4.14),
        t_star: Some(92.5),
    })
}

/// Heating-rate data from [`reference_model`] with 10% noise.
pub fn reference_dataset(seed: u64) -> HeatingDataset {
    synth_dataset(&reference_model(), &SynthGrid::standard(), 0.1, seed).expect("valid model")
}
