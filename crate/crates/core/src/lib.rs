//! Link-level MIMO-OFDM simulator with nonlinear power amplifiers,
//! classical LS/ZF and genie MLD benchmarks, and learned receivers.

pub mod channel;
pub mod config;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod linear_rx;
pub mod mld;
pub mod modem;
pub mod neural;
pub mod numerics;
pub mod pa;
pub mod receivers;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};

pub type ComplexMatrix64 = numerics::ComplexMatrix<f64>;
pub type ComplexMatrix32 = numerics::ComplexMatrix<f32>;
pub type MlpNetwork64 = neural::MlpNetwork<f64>;
pub type MlpNetwork32 = neural::MlpNetwork<f32>;
pub type Sample64 = dataset::Sample<f64>;
pub type Sample32 = dataset::Sample<f32>;
pub type ReceiverBank32 = receivers::ReceiverBank<f32>;
