use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::report::{BitString, Report, ReportShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UeVariant {
    /// Symmetric unary encoding (basic one-time RAPPOR): `q = 1 - p`.
    Sue,
    /// Optimized unary encoding: `p = 1/2`.
    Oue,
}

impl fmt::Display for UeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UeVariant::Sue => "sue",
            UeVariant::Oue => "oue",
        })
    }
}

impl FromStr for UeVariant {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sue" => Ok(UeVariant::Sue),
            "oue" => Ok(UeVariant::Oue),
            other => Err(LdpError::InvalidConfig(format!("unknown UE variant {other:?}"))),
        }
    }
}

/// Per-bit randomized response on a one-hot encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UeParams {
    pub variant: UeVariant,
    pub eps: f64,
    /// Probability that a 1-bit is reported as 1.
    pub p: f64,
    /// Probability that a 0-bit is reported as 1.
    pub q: f64,
}

impl UeParams {
    pub fn new(eps: f64, variant: UeVariant) -> Result<Self> {
        check_budget(eps)?;
        let (p, q) = match variant {
            UeVariant::Sue => {
                let t = (-eps / 2.0).exp();
                (1.0 / (1.0 + t), t / (1.0 + t))
            }
            UeVariant::Oue => {
                let t = (-eps).exp();
                (0.5, t / (1.0 + t))
            }
        };
        Ok(Self { variant, eps, p, q })
    }

    /// A unary-encoding channel with explicit bit probabilities, `0 <= q < p <= 1`.
    pub fn with_probabilities(variant: UeVariant, p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p) || p <= q {
            return Err(LdpError::DegenerateChannel(p - q));
        }
        Ok(Self {
            variant,
            eps: ue_epsilon(p, q),
            p,
            q,
        })
    }

    pub fn randomize<R: Rng + ?Sized>(&self, v: usize, k: usize, rng: &mut R) -> Result<Report> {
        check_domain(k)?;
        check_value(v, k)?;
        Ok(Report::Bits {
            b: self.perturb_one_hot(Some(v), k, rng),
        })
    }

    /// Perturbs the one-hot encoding of `v`, or the all-zeros vector for `None`.
    pub(crate) fn perturb_one_hot<R: Rng + ?Sized>(&self, v: Option<usize>, k: usize, rng: &mut R) -> BitString {
        (0..k)
            .map(|i| {
                let prob = if Some(i) == v { self.p } else { self.q };
                rng.gen::<f64>() < prob
            })
            .collect::<Vec<_>>()
            .into()
    }

    /// Approximate per-user estimator variance `q(1-q)/(p-q)^2`.
    pub fn variance_factor(&self) -> f64 {
        self.q * (1.0 - self.q) / (self.p - self.q).powi(2)
    }

    pub fn shape(k: usize) -> ReportShape {
        ReportShape::Bits { k }
    }
}

/// Privacy level of a per-bit channel: `ln(p(1-q) / (q(1-p)))`.
pub fn ue_epsilon(p: f64, q: f64) -> f64 {
    (p * (1.0 - q) / (q * (1.0 - p))).ln()
}
