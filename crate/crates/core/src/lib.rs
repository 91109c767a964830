//! Complex-valued neural network engine with a trainable matched-filter
//! layer, a synthetic chirp radar raw-data simulator, and a minibatch SGD
//! training harness for radar automatic target recognition.
//!
//! The crate is organized bottom-up:
//!
//! - [`ctensor`] — complex matrices, radix-2 2-D FFT, FFT convolution
//! - [`network`] — layer abstraction, ordinary layers, backpropagation,
//!   checkpoints
//! - [`sp_layer`] — the matched-filter layer with two trainable FM-rate
//!   scale parameters
//! - [`radar_sim`] — chirp point-target echoes, shape targets, labeled
//!   dataset synthesis and binary serialization
//! - [`arch`] — the hybrid / baseline target-recognition architectures
//! - [`trainer`] — SGD training loop, evaluation, SNR sweeps, metrics
//! - [`reference`], [`gradcheck`] — independent oracles used by the test
//!   suites

pub mod arch;
pub mod ctensor;
pub mod error;
pub mod gradcheck;
pub mod network;
pub mod radar_sim;
pub mod reference;
pub mod sp_layer;
pub mod trainer;

pub use error::{Error, Result};
