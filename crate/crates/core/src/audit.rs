//! Exact privacy verification.
//!
//! Channels are enumerated analytically from each mechanism's parameters
//! (never sampled). The realized budget of a channel is the largest log ratio
//! `ln(M[v1, y] / M[v2, y])` over outputs `y` and input pairs `(v1, v2)`.

use crate::error::{LdpError, Result};
use crate::long_multidim::{LongMdimProtocol, LongSolution};
use crate::longitudinal::LongMechanism;
use crate::longitudinal::{DBitParams, LongProtocol};
use crate::multidim::{FakeMode, MdimProtocol};
use crate::oracles::{FrequencyOracle, GrrParams, LhParams, SsParams, UeParams};
use crate::rng::lh_bucket;

/// Largest enumerable output space.
pub const MAX_OUTPUTS: usize = 1 << 10;
/// Row-sum tolerance.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
/// Budget equality tolerance.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Row-stochastic matrix of exact output probabilities, inputs by outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ChannelMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| 1.0 / cols as f64)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
            && (0..self.rows).all(|r| (self.row(r).iter().sum::<f64>() - 1.0).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &ChannelMatrix) -> Option<f64> {
        (self.rows == other.rows && self.cols == other.cols).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

fn check_outputs(cols: usize) -> Result<()> {
    if cols > MAX_OUTPUTS {
        Err(LdpError::OutputSpaceTooLarge(cols))
    } else {
        Ok(())
    }
}

/// Sequential composition: feed the output of `first` into `second`.
pub fn compose(first: &ChannelMatrix, second: &ChannelMatrix) -> Result<ChannelMatrix> {
    if first.cols != second.rows {
        return Err(LdpError::ShapeMismatch(format!(
            "cannot compose {}x{} with {}x{}",
            first.rows, first.cols, second.rows, second.cols
        )));
    }
    let mut out = ChannelMatrix {
        rows: first.rows,
        cols: second.cols,
        data: vec![0.0; first.rows * second.cols],
    };
    for r in 0..first.rows {
        for m in 0..first.cols {
            let a = first.get(r, m);
            if a == 0.0 {
                continue;
            }
            let dst = &mut out.data[r * second.cols..(r + 1) * second.cols];
            for (o, &b) in dst.iter_mut().zip(second.row(m)) {
                *o += a * b;
            }
        }
    }
    Ok(out)
}

/// Realized budget over all input pairs. Infinite when some output is
/// possible for one input and impossible for another.
pub fn realized_epsilon(m: &ChannelMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..m.cols {
        let (lo, hi) = (0..m.rows)
            .map(|r| m.get(r, c))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if hi == 0.0 {
            continue;
        }
        if lo == 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max((hi / lo).ln());
    }
    worst
}

/// Realized budget restricted to input pairs accepted by `neighbors`.
pub fn realized_epsilon_over(m: &ChannelMatrix, neighbors: impl Fn(usize, usize) -> bool) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..m.rows {
        for b in 0..m.rows {
            if a == b || !neighbors(a, b) {
                continue;
            }
            for c in 0..m.cols {
                let (x, y) = (m.get(a, c), m.get(b, c));
                if x == 0.0 {
                    continue;
                }
                if y == 0.0 {
                    return f64::INFINITY;
                }
                worst = worst.max((x / y).ln());
            }
        }
    }
    worst
}

/// Single-attribute client configurations that can be enumerated.
#[derive(Debug, Clone, Copy)]
pub enum Mechanism<'a> {
    Grr(GrrParams),
    Ue {
        k: usize,
        params: UeParams,
    },
    /// Local hashing conditioned on one hash seed.
    Lh {
        k: usize,
        params: LhParams,
        seed: u64,
    },
    Ss(SsParams),
    /// dBitFlipPM conditioned on one bucket sample.
    DBit {
        params: DBitParams,
        buckets: &'a [usize],
    },
}

fn binom(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `omega`-subsets of `[0, k)` in lexicographic order.
pub fn subsets(k: usize, omega: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for x in start..=k - left {
            cur.push(x);
            rec(x + 1, k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, omega, &mut Vec::new(), &mut out);
    out
}

/// Output column index of a bit vector: bit `i` of the index is position `i`.
pub fn bits_index(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (usize::from(b) << i))
}

fn unary_channel(k: usize, p: f64, q: f64, hot: impl Fn(usize) -> Option<usize>) -> Result<ChannelMatrix> {
    let cols = 1usize
        .checked_shl(k as u32)
        .filter(|&c| c > 0)
        .ok_or(LdpError::OutputSpaceTooLarge(usize::MAX))?;
    check_outputs(cols)?;
    Ok(ChannelMatrix::from_fn(k, cols, |v, y| {
        let h = hot(v);
        (0..k)
            .map(|i| {
                let prob = if Some(i) == h { p } else { q };
                if y >> i & 1 == 1 {
                    prob
                } else {
                    1.0 - prob
                }
            })
            .product()
    }))
}

/// Fake-data distribution of unary encoding at `(p, q)` over the `2^k` outputs.
fn unary_fake(k: usize, p: f64, q: f64, fake: FakeMode) -> Result<Vec<f64>> {
    match fake {
        FakeMode::Zero => Ok(unary_channel(1.max(k), p, q, |_| None)?.row(0).to_vec()),
        FakeMode::Rnd => {
            let m = unary_channel(k, p, q, Some)?;
            Ok((0..m.cols)
                .map(|c| (0..k).map(|r| m.get(r, c)).sum::<f64>() / k as f64)
                .collect())
        }
    }
}

pub fn enumerate_channel(mech: Mechanism<'_>) -> Result<ChannelMatrix> {
    match mech {
        Mechanism::Grr(g) => {
            check_outputs(g.k)?;
            Ok(ChannelMatrix::from_fn(g.k, g.k, |v, y| if v == y { g.p } else { g.q }))
        }
        Mechanism::Ue { k, params } => unary_channel(k, params.p, params.q, Some),
        Mechanism::Lh { k, params, seed } => {
            check_outputs(params.g)?;
            let other = (1.0 - params.p) / (params.g - 1) as f64;
            Ok(ChannelMatrix::from_fn(k, params.g, |v, b| {
                if lh_bucket(seed, v, params.g) == b {
                    params.p
                } else {
                    other
                }
            }))
        }
        Mechanism::Ss(s) => {
            let cols = binom(s.k, s.omega);
            if cols > MAX_OUTPUTS as f64 {
                return Err(LdpError::OutputSpaceTooLarge(cols as usize));
            }
            let all = subsets(s.k, s.omega);
            let with_v = s.p / binom(s.k - 1, s.omega - 1);
            let without_v = (1.0 - s.p) / binom(s.k - 1, s.omega);
            Ok(ChannelMatrix::from_fn(s.k, all.len(), |v, c| {
                if all[c].binary_search(&v).is_ok() {
                    with_v
                } else {
                    without_v
                }
            }))
        }
        Mechanism::DBit { params, buckets } => {
            if buckets.len() != params.d {
                return Err(LdpError::ShapeMismatch(format!(
                    "{} buckets for d = {}",
                    buckets.len(),
                    params.d
                )));
            }
            let cols = 1usize << params.d.min(usize::BITS as usize - 1);
            check_outputs(cols)?;
            Ok(ChannelMatrix::from_fn(params.k, cols, |v, y| {
                buckets
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| {
                        let truth = j == v;
                        let out = y >> i & 1 == 1;
                        if truth == out {
                            params.p
                        } else {
                            1.0 - params.p
                        }
                    })
                    .product()
            }))
        }
    }
}

/// Channel of a configured oracle; local hashing is conditioned on `lh_seed`.
pub fn oracle_channel(oracle: &FrequencyOracle, lh_seed: u64) -> Result<ChannelMatrix> {
    enumerate_channel(match *oracle {
        FrequencyOracle::Grr(g) => Mechanism::Grr(g),
        FrequencyOracle::Ue { k, params } => Mechanism::Ue { k, params },
        FrequencyOracle::Lh { k, params } => Mechanism::Lh {
            k,
            params,
            seed: lh_seed,
        },
        FrequencyOracle::Ss(s) => Mechanism::Ss(s),
    })
}

/// Round-one and round-two channels of a longitudinal chain. For unary
/// encoding the round-two channel maps every `2^k` memo to every `2^k` report.
pub fn long_channels(protocol: &LongProtocol) -> Result<(ChannelMatrix, ChannelMatrix)> {
    match *protocol {
        LongProtocol::Grr(g) => Ok((
            enumerate_channel(Mechanism::Grr(g.round1()))?,
            enumerate_channel(Mechanism::Grr(g.round2()))?,
        )),
        LongProtocol::Ue { k, params } => {
            let first = unary_channel(k, params.p1, params.q1, Some)?;
            let n = first.cols;
            let (p2, q2) = (params.p2, params.q2);
            let second = ChannelMatrix::from_fn(n, n, |x, y| {
                (0..k)
                    .map(|i| {
                        let prob = if x >> i & 1 == 1 { p2 } else { q2 };
                        if y >> i & 1 == 1 {
                            prob
                        } else {
                            1.0 - prob
                        }
                    })
                    .product()
            });
            Ok((first, second))
        }
    }
}

/// End-to-end channel of a longitudinal chain (a single report).
pub fn long_channel(protocol: &LongProtocol) -> Result<ChannelMatrix> {
    let (a, b) = long_channels(protocol)?;
    compose(&a, &b)
}

/// Channel of one report of any longitudinal mechanism; dBitFlipPM is
/// conditioned on `buckets`.
pub fn long_mechanism_channel(mech: &LongMechanism, buckets: &[usize]) -> Result<ChannelMatrix> {
    match mech {
        LongMechanism::Chain(c) => long_channel(c),
        LongMechanism::DBit(params) => enumerate_channel(Mechanism::DBit {
            params: *params,
            buckets,
        }),
    }
}

/// Independent parallel composition: rows and columns are mixed-radix
/// tuples with the first factor most significant.
pub fn product(a: &ChannelMatrix, b: &ChannelMatrix) -> Result<ChannelMatrix> {
    check_outputs(a.cols * b.cols)?;
    Ok(ChannelMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |r, c| {
        a.get(r / b.rows, c / b.cols) * b.get(r % b.rows, c % b.cols)
    }))
}

/// Decomposes a mixed-radix index into per-attribute digits (first most significant).
pub fn digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

/// Sample-one-attribute mixture: attribute `j` is drawn uniformly and passed
/// through `channels[j]`, every other attribute `i` is replaced by an output
/// drawn from `fakes[i]`. The output is the full tuple of per-attribute outputs.
pub fn fake_data_mixture(channels: &[ChannelMatrix], fakes: &[Vec<f64>]) -> Result<ChannelMatrix> {
    let in_r: Vec<usize> = channels.iter().map(|m| m.rows).collect();
    let out_r: Vec<usize> = channels.iter().map(|m| m.cols).collect();
    let rows: usize = in_r.iter().product();
    let cols: usize = out_r.iter().product();
    check_outputs(cols)?;
    let d = channels.len() as f64;
    Ok(ChannelMatrix::from_fn(rows, cols, |r, c| {
        let x = digits(r, &in_r);
        let y = digits(c, &out_r);
        (0..channels.len())
            .map(|j| {
                let fake: f64 = (0..channels.len())
                    .filter(|&i| i != j)
                    .map(|i| fakes[i][y[i]])
                    .product();
                channels[j].get(x[j], y[j]) * fake
            })
            .sum::<f64>()
            / d
    }))
}

/// Disclosed-attribute mixture: the output is `(j, y)` with `j` uniform and
/// `y` drawn from `channels[j]` on attribute `j`. Columns are grouped by `j`.
pub fn sampled_attribute_mixture(channels: &[ChannelMatrix]) -> Result<ChannelMatrix> {
    let in_r: Vec<usize> = channels.iter().map(|m| m.rows).collect();
    let rows: usize = in_r.iter().product();
    let cols: usize = channels.iter().map(|m| m.cols).sum();
    check_outputs(cols)?;
    let offsets: Vec<usize> = channels
        .iter()
        .scan(0, |acc, m| {
            let o = *acc;
            *acc += m.cols;
            Some(o)
        })
        .collect();
    let d = channels.len() as f64;
    Ok(ChannelMatrix::from_fn(rows, cols, |r, c| {
        let x = digits(r, &in_r);
        let j = offsets.iter().rposition(|&o| o <= c).unwrap();
        channels[j].get(x[j], c - offsets[j]) / d
    }))
}

/// Full-tuple channel of a multidimensional solution; local hashing is
/// conditioned on `lh_seed`.
pub fn mdim_channel(protocol: &MdimProtocol, lh_seed: u64) -> Result<ChannelMatrix> {
    match protocol {
        MdimProtocol::Spl(oracles) => {
            let mut it = oracles.iter().map(|o| oracle_channel(o, lh_seed));
            let first = it.next().ok_or(LdpError::EmptyReportSet)??;
            it.try_fold(first, |acc, m| product(&acc, &m?))
        }
        MdimProtocol::Smp(oracles) => {
            let chans = oracles
                .iter()
                .map(|o| oracle_channel(o, lh_seed))
                .collect::<Result<Vec<_>>>()?;
            sampled_attribute_mixture(&chans)
        }
        MdimProtocol::RsfdGrr { grr, .. } => {
            let chans = grr
                .iter()
                .map(|&g| enumerate_channel(Mechanism::Grr(g)))
                .collect::<Result<Vec<_>>>()?;
            let fakes: Vec<Vec<f64>> = grr.iter().map(|g| vec![1.0 / g.k as f64; g.k]).collect();
            fake_data_mixture(&chans, &fakes)
        }
        MdimProtocol::RsfdUe { ks, ue, fake, .. } => {
            let chans = ks
                .iter()
                .map(|&k| enumerate_channel(Mechanism::Ue { k, params: *ue }))
                .collect::<Result<Vec<_>>>()?;
            let fakes = ks
                .iter()
                .map(|&k| unary_fake(k, ue.p, ue.q, *fake))
                .collect::<Result<Vec<_>>>()?;
            fake_data_mixture(&chans, &fakes)
        }
    }
}

/// Full-tuple channel of one collection under L-SPL / L-SMP; dBitFlipPM
/// attribute `j` is conditioned on `dbit_buckets[j]`.
pub fn long_mdim_channel(protocol: &LongMdimProtocol, dbit_buckets: &[Vec<usize>]) -> Result<ChannelMatrix> {
    let chans = protocol
        .mechanisms
        .iter()
        .enumerate()
        .map(|(j, m)| long_mechanism_channel(m, dbit_buckets.get(j).map(Vec::as_slice).unwrap_or(&[])))
        .collect::<Result<Vec<_>>>()?;
    match protocol.solution {
        LongSolution::LSpl => {
            let mut it = chans.into_iter();
            let first = it.next().ok_or(LdpError::EmptyReportSet)?;
            it.try_fold(first, |acc, m| product(&acc, &m))
        }
        LongSolution::LSmp => sampled_attribute_mixture(&chans),
    }
}

/// Outcome of checking one channel against a declared budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditVerdict {
    pub declared: f64,
    pub realized: f64,
    /// Whether the realized budget must match exactly, or only stay below.
    pub exact: bool,
}

impl AuditVerdict {
    pub fn passed(&self) -> bool {
        if self.exact {
            (self.realized - self.declared).abs() <= BUDGET_TOLERANCE
        } else {
            self.realized <= self.declared + BUDGET_TOLERANCE
        }
    }
}
