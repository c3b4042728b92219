use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, LdpError, Result};
use crate::report::{Report, ReportShape};
use crate::rng::lh_bucket;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LhVariant {
    /// Binary local hashing, `g = 2`.
    Blh,
    /// Optimal local hashing, `g ~ e^eps + 1`.
    Olh,
}

/// Local hashing: hash to `g` buckets with a per-report seed, then apply GRR over the buckets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhParams {
    pub variant: LhVariant,
    pub eps: f64,
    pub g: usize,
    /// Probability that the reported bucket equals the hashed bucket.
    pub p: f64,
    /// Probability that a report supports a fixed value other than the true one, `1/g`.
    pub q_star: f64,
}

/// Rounds half away from zero (values here are positive, so half-up).
fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

impl LhParams {
    pub fn new(eps: f64, variant: LhVariant) -> Result<Self> {
        check_budget(eps)?;
        let g = match variant {
            LhVariant::Blh => 2,
            LhVariant::Olh => {
                let g = round_half_up(eps.exp()) + 1.0;
                if g.is_finite() && g < (u32::MAX as f64) {
                    (g as usize).max(2)
                } else {
                    return Err(LdpError::InvalidBudget(eps));
                }
            }
        };
        let t = (-eps).exp();
        let p = 1.0 / (1.0 + (g - 1) as f64 * t);
        Ok(Self {
            variant,
            eps,
            g,
            p,
            q_star: 1.0 / g as f64,
        })
    }

    /// Local hashing with an explicit range `g` and keep probability `p` in `(1/g, 1]`.
    pub fn with_keep_probability(variant: LhVariant, g: usize, p: f64) -> Result<Self> {
        if g < 2 {
            return Err(LdpError::InvalidDomain(g));
        }
        let q = (1.0 - p) / (g - 1) as f64;
        if !(p > q && p <= 1.0) {
            return Err(LdpError::DegenerateChannel(p - q));
        }
        Ok(Self {
            variant,
            eps: (p / q).ln(),
            g,
            p,
            q_star: 1.0 / g as f64,
        })
    }

    /// Draws a fresh seed and reports a perturbed bucket of `Hash(seed, v) mod g`.
    pub fn randomize<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Report {
        let seed: u64 = rng.gen();
        self.randomize_with_seed(v, seed, rng)
    }

    pub fn randomize_with_seed<R: Rng + ?Sized>(&self, v: usize, seed: u64, rng: &mut R) -> Report {
        let h = lh_bucket(seed, v, self.g);
        let b = if rng.gen::<f64>() < self.p {
            h
        } else {
            let u = rng.gen_range(0..self.g - 1);
            if u >= h {
                u + 1
            } else {
                u
            }
        };
        Report::Lh { seed, b }
    }

    pub fn shape(&self, k: usize) -> ReportShape {
        ReportShape::Lh { k, g: self.g }
    }
}
