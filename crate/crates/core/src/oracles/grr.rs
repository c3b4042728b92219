use rand::Rng;
use serde::Serialize;

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::report::{Report, ReportShape};

/// Generalized randomized response over a domain of `k` categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrrParams {
    pub k: usize,
    pub eps: f64,
    /// Probability of reporting the true value.
    pub p: f64,
    /// Probability of reporting any one specific other value.
    pub q: f64,
}

impl GrrParams {
    pub fn new(eps: f64, k: usize) -> Result<Self> {
        check_budget(eps)?;
        check_domain(k)?;
        // e^{-eps} form stays finite for large budgets.
        let t = (-eps).exp();
        let denom = 1.0 + (k - 1) as f64 * t;
        Ok(Self {
            k,
            eps,
            p: 1.0 / denom,
            q: t / denom,
        })
    }

    /// A GRR channel with an explicit keep probability `p` in `(1/k, 1]`.
    pub fn with_keep_probability(k: usize, p: f64) -> Result<Self> {
        check_domain(k)?;
        let q = (1.0 - p) / (k - 1) as f64;
        if !(p > q && p <= 1.0) {
            return Err(LdpError::DegenerateChannel(p - q));
        }
        Ok(Self {
            k,
            eps: (p / q).ln(),
            p,
            q,
        })
    }

    pub fn shape(&self) -> ReportShape {
        ReportShape::Value { k: self.k }
    }

    pub fn randomize<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<Report> {
        check_value(v, self.k)?;
        Ok(Report::Value {
            v: self.perturb(v, rng),
        })
    }

    /// Keeps `v` with probability `p`, otherwise moves to a uniform other value.
    #[inline]
    pub(crate) fn perturb<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> usize {
        if rng.gen::<f64>() < self.p {
            v
        } else {
            let u = rng.gen_range(0..self.k - 1);
            if u >= v {
                u + 1
            } else {
                u
            }
        }
    }
}
