//! Spiking neural networks built from SSM-parametrised adaptive
//! leaky integrate-and-fire neurons.
//!
//! The crate covers the neuron recurrences ([`neurons`]), reverse-mode
//! training through time ([`engine`], [`training`]), layer assembly with
//! optional learnable delays ([`network`]), data formats ([`data`]) and
//! spectral and activity analysis ([`analysis`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod data;
pub mod engine;
pub mod error;
pub mod network;
pub mod neurons;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
