//! dBitFlipPM: each user samples `d` buckets once and memoizes one sanitized bit per bucket.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::oracles::FrequencyEstimate;
use crate::report::{BitString, Report};
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DBitParams {
    pub k: usize,
    /// Buckets sampled per user.
    pub d: usize,
    pub eps_perm: f64,
    /// Probability a memoized bit equals the true bit.
    pub p: f64,
}

impl DBitParams {
    pub fn new(k: usize, d: usize, eps_perm: f64) -> Result<Self> {
        check_budget(eps_perm)?;
        check_domain(k)?;
        if d == 0 || d > k {
            return Err(LdpError::InvalidSampleSize { d, k });
        }
        Ok(Self {
            k,
            d,
            eps_perm,
            p: 1.0 / (1.0 + (-eps_perm / 2.0).exp()),
        })
    }

    /// Explicit bit-keep probability, used for noiseless limits.
    pub fn with_keep_probability(k: usize, d: usize, p: f64) -> Result<Self> {
        check_domain(k)?;
        if d == 0 || d > k {
            return Err(LdpError::InvalidSampleSize { d, k });
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(LdpError::DegenerateChannel(2.0 * p - 1.0));
        }
        Ok(Self {
            k,
            d,
            eps_perm: 2.0 * (p / (1.0 - p)).ln(),
            p,
        })
    }

    fn validate(&self, report: &Report) -> Result<()> {
        match report {
            Report::Dbit { idx, bits } => {
                let sorted = idx.windows(2).all(|w| w[0] < w[1]);
                if idx.len() == self.d && bits.len() == self.d && sorted && idx.iter().all(|&i| i < self.k) {
                    Ok(())
                } else {
                    Err(LdpError::ShapeMismatch(format!(
                        "dbit report with {} indices / {} bits for d = {}, k = {}",
                        idx.len(),
                        bits.len(),
                        self.d,
                        self.k
                    )))
                }
            }
            _ => Err(LdpError::MixedReportTypes { expected: "dbit" }),
        }
    }
}

/// A user's permanent dBitFlipPM state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DBitMemo {
    pub value: usize,
    /// Sorted, distinct sampled buckets.
    pub buckets: Vec<usize>,
    pub bits: BitString,
}

pub fn dbit_init<R: Rng + ?Sized>(v: usize, params: &DBitParams, rng: &mut R) -> Result<DBitMemo> {
    check_value(v, params.k)?;
    let mut buckets = index::sample(rng, params.k, params.d).into_vec();
    buckets.sort_unstable();
    let bits = buckets
        .iter()
        .map(|&j| {
            let keep = rng.gen::<f64>() < params.p;
            (j == v) == keep
        })
        .collect::<Vec<_>>();
    Ok(DBitMemo {
        value: v,
        buckets,
        bits: bits.into(),
    })
}

/// Replays the memoized bits verbatim.
pub fn dbit_client(memo: &DBitMemo) -> Report {
    Report::Dbit {
        idx: memo.buckets.clone(),
        bits: memo.bits.clone(),
    }
}

/// dBitFlipPM estimate together with the values nobody sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct DBitEstimate {
    pub estimate: FrequencyEstimate,
    pub unsampled: Vec<usize>,
}

impl DBitEstimate {
    pub fn warnings(&self, attr: usize) -> Vec<Warning> {
        self.unsampled
            .iter()
            .map(|&value| Warning::NoSamplers { attr, value })
            .collect()
    }
}

/// Ratio estimator: for each value, the debiased mean bit over users who sampled it.
pub fn dbit_aggregate(reports: &[Report], params: &DBitParams) -> Result<DBitEstimate> {
    if reports.is_empty() {
        return Err(LdpError::EmptyReportSet);
    }
    let k = params.k;
    let zero = || (vec![0u64; k], vec![0u64; k]);
    let (samplers, ones) = reports
        .par_chunks(8192)
        .map(|chunk| {
            let (mut samplers, mut ones) = zero();
            for r in chunk {
                params.validate(r)?;
                let Report::Dbit { idx, bits } = r else { unreachable!() };
                for (&j, &bit) in idx.iter().zip(bits.as_slice()) {
                    samplers[j] += 1;
                    ones[j] += u64::from(bit);
                }
            }
            Ok((samplers, ones))
        })
        .try_reduce(zero, |(mut s1, mut o1), (s2, o2)| {
            s1.iter_mut().zip(&s2).for_each(|(a, b)| *a += b);
            o1.iter_mut().zip(&o2).for_each(|(a, b)| *a += b);
            Ok((s1, o1))
        })?;
    let gap = 2.0 * params.p - 1.0;
    let mut unsampled = Vec::new();
    let est = (0..k)
        .map(|v| {
            if samplers[v] == 0 {
                unsampled.push(v);
                0.0
            } else {
                let mean = ones[v] as f64 / samplers[v] as f64;
                (mean - (1.0 - params.p)) / gap
            }
        })
        .collect();
    Ok(DBitEstimate {
        estimate: FrequencyEstimate(est),
        unsampled,
    })
}
