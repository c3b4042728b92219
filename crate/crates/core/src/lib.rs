//! Frequency estimation under local differential privacy.
//!
//! Client-side randomizers and server-side unbiased estimators for
//! single-attribute, multidimensional, longitudinal and longitudinal
//! multidimensional collection, together with an exact channel auditor and a
//! deterministic Monte Carlo harness.

pub mod audit;
pub mod error;
pub mod long_multidim;
pub mod longitudinal;
pub mod multidim;
pub mod oracles;
pub mod report;
pub mod rng;
pub mod sim;
pub mod warning;

pub use error::{LdpError, Result};
pub use oracles::{FrequencyEstimate, FrequencyOracle, OracleKind};
pub use report::{BitString, Report, ReportShape};
pub use warning::Warning;
