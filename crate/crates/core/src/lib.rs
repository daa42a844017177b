//! Statement-level fault localization by multi-objective feature fusion.
//!
//! Spectrum, mutation and text features are extracted per statement, a binary
//! multi-objective optimizer picks feature subsets, the Pareto archive is fused
//! into one weighted feature set by voting and weighting, and an MLP or GRU
//! ranker scores statements for suspiciousness.

pub mod corpus;
pub mod exec;
pub mod features;
pub mod fusion;
pub mod metrics;
pub mod moo;
pub mod neural;
pub mod pipeline;
pub mod static_analysis;

pub use exec::Execution;
