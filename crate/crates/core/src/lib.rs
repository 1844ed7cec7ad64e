//! Second-order asymptotic risk of maximum-likelihood estimation in linear
//! regression with a known error density.
//!
//! The pipeline runs from an error model through its [`eta::EtaTable`], the
//! regressor moment summary, and the algebra in [`risk`] to a
//! [`risk::RiskExpansion`] of the form `main/n + q(alpha)/n^2`. The
//! [`benchmarks`] module turns expansions into sample-size indicators,
//! [`data`] computes moment aggregates from raw tables, and [`mc`] is an
//! independent Monte-Carlo estimate of the exact risk.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod data;
pub mod error;
pub mod error_models;
pub mod eta;
pub mod exec;
pub mod mc;
pub mod quadrature;
pub mod risk;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use error_models::{ErrorKind, ErrorModel};
pub use eta::{build_eta_table, EtaIndex, EtaTable};
pub use exec::Execution;
pub use risk::{evaluate_risk, MomentSummary, RiskExpansion};
pub use scalar::Rational;
