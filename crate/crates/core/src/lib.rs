//! Neural belief propagation (NBP) decoding toolkit.
//!
//! This crate implements message-passing decoders for linear block codes in
//! which every edge of the Tanner graph carries a trainable multiplicative
//! weight, together with everything needed to study how well such decoders
//! generalize from simulated training data:
//!
//! - [`code_graph`] — parity-check matrices as Tanner graphs: alist I/O,
//!   progressive edge-growth construction, column masking, GF(2) rank.
//! - [`channel`] — BPSK over AWGN, LLR computation, seeded dataset
//!   generation and persistence.
//! - [`decoder`] — the unrolled decoder forward pass (sum-product, min-sum,
//!   scaled/offset min-sum check layers) with per-edge weights.
//! - [`training`] — cross-entropy loss, exact backpropagation through the
//!   structured layers, Adam, and train/test gap measurement.
//! - [`bounds`] — closed-form generalization-gap bounds (covering-number
//!   route), spectral-norm and Lipschitz constants, the bounded-LLR
//!   trade-off, and a Monte-Carlo bit-wise Rademacher estimator.
//! - [`stats`] — small shared statistics helpers.
//!
//! All randomized operations take explicit seeds and derive per-item
//! substreams, so datasets, training runs and sweeps are reproducible
//! bit-for-bit regardless of sharding.

pub mod bounds;
pub mod channel;
pub mod code_graph;
pub mod decoder;
pub mod stats;
pub mod training;

pub use code_graph::CodeGraph;
