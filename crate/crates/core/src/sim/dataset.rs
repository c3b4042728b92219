use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, LdpError, Result};
use crate::rng::substream;

const DATA_STREAM: u64 = 0xDA7A;

/// Synthetic value distribution, applied independently to every attribute.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Distribution {
    #[default]
    Uniform,
    /// `P(i) ∝ (i + 1)^-a`.
    Zipf(f64),
    /// Every user holds this value.
    Point(usize),
}

impl Distribution {
    /// Probability of each value in a domain of size `k`.
    pub fn probabilities(&self, k: usize) -> Result<Vec<f64>> {
        check_domain(k)?;
        match *self {
            Distribution::Uniform => Ok(vec![1.0 / k as f64; k]),
            Distribution::Zipf(a) => {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(LdpError::InvalidDistributionParam(format!("zipf exponent {a}")));
                }
                let w: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-a)).collect();
                let total: f64 = w.iter().sum();
                Ok(w.into_iter().map(|x| x / total).collect())
            }
            Distribution::Point(v) => {
                if v >= k {
                    return Err(LdpError::InvalidDistributionParam(format!(
                        "point mass {v} outside [0, {k})"
                    )));
                }
                Ok((0..k).map(|i| if i == v { 1.0 } else { 0.0 }).collect())
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => f.write_str("uniform"),
            Distribution::Zipf(a) => write!(f, "zipf:{a}"),
            Distribution::Point(v) => write!(f, "point:{v}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || LdpError::InvalidDistributionParam(format!("cannot parse distribution {s:?}"));
        match s.split_once(':') {
            None if s.eq_ignore_ascii_case("uniform") => Ok(Distribution::Uniform),
            Some((name, arg)) if name.eq_ignore_ascii_case("zipf") => {
                arg.parse().map(Distribution::Zipf).map_err(|_| bad())
            }
            Some((name, arg)) if name.eq_ignore_ascii_case("point") => {
                arg.parse().map(Distribution::Point).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }
}

impl From<Distribution> for String {
    fn from(d: Distribution) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for Distribution {
    type Error = LdpError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `n` users, each holding a tuple of `ks.len()` values (row-major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    ks: Vec<usize>,
    values: Vec<usize>,
}

impl Dataset {
    pub fn from_rows(ks: Vec<usize>, rows: &[Vec<usize>]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * ks.len());
        for row in rows {
            crate::multidim::check_tuple(row, &ks)?;
            values.extend_from_slice(row);
        }
        Ok(Self { ks, values })
    }

    /// Users laid out so that attribute `j` has exactly `counts[j][v]` holders of `v`.
    /// Columns are filled independently in value order.
    pub fn from_counts(counts: &[Vec<usize>]) -> Result<Self> {
        let n: usize = counts.first().map(|c| c.iter().sum()).unwrap_or(0);
        if counts.iter().any(|c| c.iter().sum::<usize>() != n) {
            return Err(LdpError::InvalidConfig(
                "every attribute needs the same number of users".into(),
            ));
        }
        let ks: Vec<usize> = counts.iter().map(Vec::len).collect();
        for &k in &ks {
            check_domain(k)?;
        }
        let d = ks.len();
        let mut values = vec![0; n * d];
        for (j, c) in counts.iter().enumerate() {
            let column = c.iter().enumerate().flat_map(|(v, &m)| std::iter::repeat_n(v, m));
            for (u, v) in column.enumerate() {
                values[u * d + j] = v;
            }
        }
        Ok(Self { ks, values })
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    pub fn d(&self) -> usize {
        self.ks.len()
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.ks.len().max(1)
    }

    pub fn tuple(&self, user: usize) -> &[usize] {
        let d = self.d();
        &self.values[user * d..(user + 1) * d]
    }

    /// Value of attribute `j` for every user.
    pub fn column(&self, j: usize) -> Vec<usize> {
        self.values.iter().skip(j).step_by(self.d()).copied().collect()
    }

    /// Empirical frequencies per attribute.
    pub fn true_freq(&self) -> Vec<Vec<f64>> {
        let n = self.n().max(1) as f64;
        (0..self.d())
            .map(|j| {
                let mut c = vec![0u64; self.ks[j]];
                for v in self.values.iter().skip(j).step_by(self.d()) {
                    c[*v] += 1;
                }
                c.into_iter().map(|x| x as f64 / n).collect()
            })
            .collect()
    }
}

/// Draws `n` i.i.d. tuples. User `u` uses its own substream, so the result
/// does not depend on the thread count.
pub fn gen_dataset(distribution: Distribution, n: usize, ks: &[usize], seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(LdpError::InvalidConfig("n must be at least 1".into()));
    }
    if ks.is_empty() {
        return Err(LdpError::InvalidConfig("at least one attribute is required".into()));
    }
    let samplers = ks
        .iter()
        .map(|&k| {
            let probs = distribution.probabilities(k)?;
            Ok(match distribution {
                Distribution::Zipf(_) => {
                    Some(WeightedIndex::new(&probs).map_err(|e| LdpError::InvalidDistributionParam(e.to_string()))?)
                }
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = ks.len();
    let mut values = vec![0usize; n * d];
    values.par_chunks_mut(d).enumerate().for_each(|(u, row)| {
        let mut rng = substream(seed, &[DATA_STREAM, u as u64]);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = match (distribution, &samplers[j]) {
                (Distribution::Point(v), _) => v,
                (_, Some(w)) => w.sample(&mut rng),
                _ => rng.gen_range(0..ks[j]),
            };
        }
    });
    Ok(Dataset {
        ks: ks.to_vec(),
        values,
    })
}
