//! Single-attribute frequency oracles: GRR, unary encoding (SUE/OUE), local
//! hashing (BLH/OLH) and subset selection, plus the shared estimator.

mod estimate;
mod grr;
mod lh;
mod ss;
mod ue;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use estimate::{estimate_pure, merge_counts, support_counts, FrequencyEstimate, MIN_CHANNEL_GAP};
pub use grr::GrrParams;
pub use lh::{LhParams, LhVariant};
pub use ss::SsParams;
pub use ue::{ue_epsilon, UeParams, UeVariant};

use crate::error::{check_domain, check_value, LdpError, Result};
use crate::report::{Report, ReportShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Grr,
    Sue,
    Oue,
    Blh,
    Olh,
    Ss,
}

impl OracleKind {
    pub const ALL: [OracleKind; 6] = [
        OracleKind::Grr,
        OracleKind::Sue,
        OracleKind::Oue,
        OracleKind::Blh,
        OracleKind::Olh,
        OracleKind::Ss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Grr => "grr",
            OracleKind::Sue => "sue",
            OracleKind::Oue => "oue",
            OracleKind::Blh => "blh",
            OracleKind::Olh => "olh",
            OracleKind::Ss => "ss",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        OracleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LdpError::InvalidConfig(format!("unknown protocol {s:?}")))
    }
}

/// A configured single-attribute frequency oracle over a domain of size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "oracle", rename_all = "lowercase")]
pub enum FrequencyOracle {
    Grr(GrrParams),
    Ue { k: usize, params: UeParams },
    Lh { k: usize, params: LhParams },
    Ss(SsParams),
}

impl FrequencyOracle {
    pub fn new(kind: OracleKind, eps: f64, k: usize) -> Result<Self> {
        check_domain(k)?;
        Ok(match kind {
            OracleKind::Grr => FrequencyOracle::Grr(GrrParams::new(eps, k)?),
            OracleKind::Sue => FrequencyOracle::Ue {
                k,
                params: UeParams::new(eps, UeVariant::Sue)?,
            },
            OracleKind::Oue => FrequencyOracle::Ue {
                k,
                params: UeParams::new(eps, UeVariant::Oue)?,
            },
            OracleKind::Blh => FrequencyOracle::Lh {
                k,
                params: LhParams::new(eps, LhVariant::Blh)?,
            },
            OracleKind::Olh => FrequencyOracle::Lh {
                k,
                params: LhParams::new(eps, LhVariant::Olh)?,
            },
            OracleKind::Ss => FrequencyOracle::Ss(SsParams::new(eps, k)?),
        })
    }

    pub fn kind(&self) -> OracleKind {
        match self {
            FrequencyOracle::Grr(_) => OracleKind::Grr,
            FrequencyOracle::Ue { params, .. } => match params.variant {
                UeVariant::Sue => OracleKind::Sue,
                UeVariant::Oue => OracleKind::Oue,
            },
            FrequencyOracle::Lh { params, .. } => match params.variant {
                LhVariant::Blh => OracleKind::Blh,
                LhVariant::Olh => OracleKind::Olh,
            },
            FrequencyOracle::Ss(_) => OracleKind::Ss,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            FrequencyOracle::Grr(g) => g.k,
            FrequencyOracle::Ue { k, .. } | FrequencyOracle::Lh { k, .. } => k,
            FrequencyOracle::Ss(s) => s.k,
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            FrequencyOracle::Grr(g) => g.eps,
            FrequencyOracle::Ue { params, .. } => params.eps,
            FrequencyOracle::Lh { params, .. } => params.eps,
            FrequencyOracle::Ss(s) => s.eps,
        }
    }

    pub fn shape(&self) -> ReportShape {
        match self {
            FrequencyOracle::Grr(g) => g.shape(),
            FrequencyOracle::Ue { k, .. } => UeParams::shape(*k),
            FrequencyOracle::Lh { k, params } => params.shape(*k),
            FrequencyOracle::Ss(s) => s.shape(),
        }
    }

    /// `(p*, q*)`: probability that a report supports the true value, and a fixed other value.
    pub fn support_probabilities(&self) -> (f64, f64) {
        match self {
            FrequencyOracle::Grr(g) => (g.p, g.q),
            FrequencyOracle::Ue { params, .. } => (params.p, params.q),
            FrequencyOracle::Lh { params, .. } => (params.p, params.q_star),
            FrequencyOracle::Ss(s) => (s.p, s.q_star),
        }
    }

    /// Approximate estimator variance for a value of frequency near zero:
    /// `q*(1-q*) / (n (p*-q*)^2)`.
    pub fn approx_variance(&self, n: usize) -> f64 {
        let (p, q) = self.support_probabilities();
        q * (1.0 - q) / (n as f64 * (p - q).powi(2))
    }

    pub fn randomize<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<Report> {
        match self {
            FrequencyOracle::Grr(g) => g.randomize(v, rng),
            FrequencyOracle::Ue { k, params } => params.randomize(v, *k, rng),
            FrequencyOracle::Lh { k, params } => {
                check_value(v, *k)?;
                Ok(params.randomize(v, rng))
            }
            FrequencyOracle::Ss(s) => s.randomize(v, rng),
        }
    }

    pub fn aggregate(&self, reports: &[Report]) -> Result<FrequencyEstimate> {
        let counts = support_counts(reports, self.shape())?;
        let (p, q) = self.support_probabilities();
        estimate_pure(&counts, reports.len() as u64, p, q)
    }
}
