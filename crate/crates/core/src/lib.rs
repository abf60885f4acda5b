//! Posterior distributions of probabilities of interest for reliability and
//! count data: failure-time models (logistic, Exponential, Weibull), Poisson
//! count models, maximum-entropy approximations built from moments, and
//! model selection by evidence.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod betalike;
pub mod cli;
pub mod cumulants;
pub mod dataset;
pub mod error;
pub mod evidence;
pub mod maxent;
pub mod posterior;
pub mod quadrature;

pub use error::{Error, Result};
