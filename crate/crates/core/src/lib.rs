//! Regression through binary-encoded labels.
//!
//! A real-valued target is quantized to one of `L` levels, each level is
//! mapped to an `M`-bit codeword, and `M` binary classifiers predict the bits.
//! This crate provides the pieces of that pipeline:
//!
//! - [`codebook`]: unary, Johnson, base+displacement, HEXJ and Hadamard code matrices.
//! - [`quantizer`]: uniform label quantization and its inverse.
//! - [`decoder`]: custom unary/Johnson decoders, correlation decoding and its
//!   softmax-expectation variant.
//! - [`losses`]: BCE, correlation cross-entropy and L1/L2 over the expectation
//!   decoder, each with exact logit gradients.
//! - [`error_model`]: Gaussian classifier-error model centred on bit transitions.
//! - [`bounds`]: closed-form expected error for unary and Johnson codes.
//! - [`mc_sim`]: seeded Monte-Carlo simulation of bit flips and decoding.
//! - [`toytrain`]: a small from-scratch MLP comparing a BEL head with direct regression.
//!
//! Levels are 1-based (`1..=L`) everywhere; classifier (bit) indices are 0-based.

pub mod bounds;
pub mod codebook;
pub mod decoder;
pub mod error;
pub mod error_model;
pub mod losses;
pub mod mc_sim;
pub mod quantizer;
pub mod toytrain;

pub use codebook::{CodeKind, CodeMatrix, CodeMetrics};
pub use error::{BelError, Result};
pub use error_model::{ClassifierErrorModel, ErrorRates, ErrorTable};
pub use quantizer::QuantizationSpec;
