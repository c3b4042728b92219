use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};
use crate::report::{Report, ReportShape};

/// Minimum `p* - q*` accepted by the estimator.
pub const MIN_CHANNEL_GAP: f64 = 1e-12;

const CHUNK: usize = 8192;

/// Estimated relative frequencies for one attribute.
///
/// Raw estimates are unbiased; individual entries can be negative or exceed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyEstimate(pub Vec<f64>);

impl FrequencyEstimate {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Clips each entry to `[0, 1]` and rescales to sum to one.
    /// Falls back to the uniform vector when everything clips to zero.
    pub fn clip_renormalize(&self) -> Self {
        let clipped: Vec<f64> = self.0.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total > 0.0 {
            Self(clipped.iter().map(|x| x / total).collect())
        } else {
            let k = self.0.len().max(1) as f64;
            Self(vec![1.0 / k; self.0.len()])
        }
    }
}

/// Per-value support counts over a batch of reports.
///
/// Counting is an integer fold, so the result does not depend on how the
/// batch is split across threads.
pub fn support_counts(reports: &[Report], shape: ReportShape) -> Result<Vec<u64>> {
    if reports.is_empty() {
        return Err(LdpError::EmptyReportSet);
    }
    let k = shape.k();
    reports
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut counts = vec![0u64; k];
            for r in chunk {
                shape.accumulate(r, &mut counts)?;
            }
            Ok(counts)
        })
        .try_reduce(|| vec![0u64; k], |a, b| Ok(merge_counts(a, &b)))
}

/// Elementwise sum of two partial count vectors.
pub fn merge_counts(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Unbiased pure-protocol estimator `(c/n - q*) / (p* - q*)`.
pub fn estimate_pure(counts: &[u64], n: u64, p_star: f64, q_star: f64) -> Result<FrequencyEstimate> {
    if n == 0 {
        return Err(LdpError::EmptyReportSet);
    }
    let gap = p_star - q_star;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(gap >= MIN_CHANNEL_GAP) {
        return Err(LdpError::DegenerateChannel(gap));
    }
    let n = n as f64;
    Ok(FrequencyEstimate(
        counts.iter().map(|&c| (c as f64 / n - q_star) / gap).collect(),
    ))
}
