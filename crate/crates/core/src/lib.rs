//! Electric-field noise models for surface ion traps.
//!
//! The crate covers thermal near-field noise above layered conductor and
//! superconductor stacks, Johnson-Nyquist noise of the electrode wiring,
//! the patch-potential weighting of chip regions, and least-squares
//! inference on measured heating-rate data.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod inference;
pub mod layered_media;
pub mod materials;
pub mod noise_models;
pub mod patch_field;
pub mod physcore;
pub mod quadrature;

pub use error::{Error, Result};
pub use layered_media::{greens_parallel, GreensResult, Layer, LayerStack, Thickness};
pub use materials::{MaterialModel, ResistivityTable, TwoFluid};
pub use physcore::{
    heating_rate_from_noise, noise_from_heating_rate, FieldNoiseDensity, HeatingRate, Ion, PhysicalConstants,
    SpectralPoint, CODATA_2018,
};
