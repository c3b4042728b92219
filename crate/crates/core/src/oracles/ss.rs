use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::report::{Report, ReportShape};

/// Subset selection: report a random `omega`-subset biased towards containing the true value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SsParams {
    pub k: usize,
    pub eps: f64,
    pub omega: usize,
    /// Probability that the true value is in the reported subset.
    pub p: f64,
    /// Probability that a fixed other value is in the reported subset.
    pub q_star: f64,
}

impl SsParams {
    pub fn new(eps: f64, k: usize) -> Result<Self> {
        check_budget(eps)?;
        check_domain(k)?;
        let t = (-eps).exp();
        let omega = ((k as f64 * t / (1.0 + t) + 0.5).floor() as usize).max(1);
        let p = omega as f64 / (omega as f64 + (k - omega) as f64 * t);
        Self::with_keep_probability(k, omega, p).map(|s| Self { eps, ..s })
    }

    /// Subset selection with explicit `omega` and inclusion probability `p`.
    pub fn with_keep_probability(k: usize, omega: usize, p: f64) -> Result<Self> {
        check_domain(k)?;
        if omega == 0 || omega >= k {
            return Err(LdpError::DegenerateSubset { omega, k });
        }
        let km1 = (k - 1) as f64;
        let q_star = p * (omega - 1) as f64 / km1 + (1.0 - p) * omega as f64 / km1;
        if !(p > q_star && p <= 1.0) {
            return Err(LdpError::DegenerateChannel(p - q_star));
        }
        // Ratio between a subset containing v and one without it.
        let eps = (p / (1.0 - p) * (k - omega) as f64 / omega as f64).ln();
        Ok(Self {
            k,
            eps,
            omega,
            p,
            q_star,
        })
    }

    pub fn randomize<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<Report> {
        check_value(v, self.k)?;
        let include = rng.gen::<f64>() < self.p;
        let draws = if include { self.omega - 1 } else { self.omega };
        let mut s: Vec<usize> = index::sample(rng, self.k - 1, draws)
            .into_iter()
            .map(|i| if i >= v { i + 1 } else { i })
            .collect();
        if include {
            s.push(v);
        }
        s.sort_unstable();
        Ok(Report::Subset { s })
    }

    pub fn shape(&self) -> ReportShape {
        ReportShape::Subset {
            k: self.k,
            omega: self.omega,
        }
    }
}
