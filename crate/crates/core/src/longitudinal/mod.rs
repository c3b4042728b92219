//! Longitudinal collection with memoization.
//!
//! Each user sanitizes their value once (round one, at `eps_perm`) and keeps
//! the result. Every subsequent collection re-randomizes that memo with fresh
//! noise (round two), so that a single report satisfies `eps_1` while any
//! number of reports about the same value never exceed `eps_perm`.

mod chain;
mod dbit;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use chain::{solve_l_grr, solve_l_ue, LongGrrParams, LongUeParams, LongUeVariant, BUDGET_TOLERANCE};
pub use dbit::{dbit_aggregate, dbit_client, dbit_init, DBitEstimate, DBitMemo, DBitParams};

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::oracles::{estimate_pure, support_counts, FrequencyEstimate};
use crate::report::{Report, ReportShape};

/// The pair of longitudinal budgets: `eps_perm` bounds infinitely many
/// reports on one value, `eps_1` bounds a single report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongBudget {
    pub eps_perm: f64,
    pub eps_1: f64,
}

impl LongBudget {
    pub fn new(eps_perm: f64, eps_1: f64) -> Result<Self> {
        check_budget(eps_perm)?;
        check_budget(eps_1)?;
        if eps_1 >= eps_perm {
            return Err(LdpError::InvalidBudget(eps_1));
        }
        Ok(Self { eps_perm, eps_1 })
    }

    /// Both budgets divided evenly over `d` attributes.
    pub fn split(&self, d: usize) -> Result<Self> {
        Self::new(self.eps_perm / d as f64, self.eps_1 / d as f64)
    }
}

/// A two-round chain: L-GRR or one of the L-UE variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "chain", rename_all = "lowercase")]
pub enum LongProtocol {
    Grr(LongGrrParams),
    Ue { k: usize, params: LongUeParams },
}

impl LongProtocol {
    pub fn grr(budget: LongBudget, k: usize) -> Result<Self> {
        solve_l_grr(budget, k).map(LongProtocol::Grr)
    }

    pub fn ue(budget: LongBudget, variant: LongUeVariant, k: usize) -> Result<Self> {
        check_domain(k)?;
        Ok(LongProtocol::Ue {
            k,
            params: solve_l_ue(budget, variant)?,
        })
    }

    pub fn k(&self) -> usize {
        match *self {
            LongProtocol::Grr(g) => g.k,
            LongProtocol::Ue { k, .. } => k,
        }
    }

    pub fn budget(&self) -> LongBudget {
        match self {
            LongProtocol::Grr(g) => g.budget,
            LongProtocol::Ue { params, .. } => params.budget,
        }
    }

    pub fn shape(&self) -> ReportShape {
        match *self {
            LongProtocol::Grr(g) => ReportShape::Value { k: g.k },
            LongProtocol::Ue { k, .. } => ReportShape::Bits { k },
        }
    }

    /// End-to-end `(p*, q*)`.
    pub fn support_probabilities(&self) -> (f64, f64) {
        match self {
            LongProtocol::Grr(g) => (g.p_star, g.q_star),
            LongProtocol::Ue { params, .. } => (params.p_star, params.q_star),
        }
    }
}

/// A user's memoized round-one report for one true value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserMemo {
    pub value: usize,
    pub report: Report,
}

/// Runs the round-one mechanism once on `v`.
pub fn memoize_round1<R: Rng + ?Sized>(v: usize, protocol: &LongProtocol, rng: &mut R) -> Result<UserMemo> {
    check_value(v, protocol.k())?;
    let report = match protocol {
        LongProtocol::Grr(g) => Report::Value {
            v: g.round1().perturb(v, rng),
        },
        LongProtocol::Ue { k, params } => Report::Bits {
            b: params.round1().perturb_one_hot(Some(v), *k, rng),
        },
    };
    Ok(UserMemo { value: v, report })
}

/// Re-randomizes a memo with the round-two mechanism.
pub fn long_client<R: Rng + ?Sized>(memo: &UserMemo, protocol: &LongProtocol, rng: &mut R) -> Result<Report> {
    protocol
        .shape()
        .validate(&memo.report)
        .map_err(|e| LdpError::ShapeMismatch(e.to_string()))?;
    Ok(match (protocol, &memo.report) {
        (LongProtocol::Grr(g), Report::Value { v }) => Report::Value {
            v: g.round2().perturb(*v, rng),
        },
        (LongProtocol::Ue { params, .. }, Report::Bits { b }) => {
            let (p2, q2) = (params.p2, params.q2);
            let bits: Vec<bool> = b
                .as_slice()
                .iter()
                .map(|&bit| rng.gen::<f64>() < if bit { p2 } else { q2 })
                .collect();
            Report::Bits { b: bits.into() }
        }
        _ => unreachable!("validated above"),
    })
}

pub fn long_aggregate(reports: &[Report], protocol: &LongProtocol) -> Result<FrequencyEstimate> {
    let counts = support_counts(reports, protocol.shape())?;
    let (p, q) = protocol.support_probabilities();
    estimate_pure(&counts, reports.len() as u64, p, q)
}

/// Selector for every longitudinal protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum LongKind {
    LGrr,
    LUe(LongUeVariant),
    DBitFlipPm,
}

impl LongKind {
    pub const ALL: [LongKind; 6] = [
        LongKind::LGrr,
        LongKind::LUe(LongUeVariant::LSue),
        LongKind::LUe(LongUeVariant::LOue),
        LongKind::LUe(LongUeVariant::LSoue),
        LongKind::LUe(LongUeVariant::LOsue),
        LongKind::DBitFlipPm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LongKind::LGrr => "l-grr",
            LongKind::LUe(v) => v.name(),
            LongKind::DBitFlipPm => "dbitflippm",
        }
    }
}

impl fmt::Display for LongKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LongKind {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        LongKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LdpError::InvalidConfig(format!("unknown longitudinal protocol {s:?}")))
    }
}

impl From<LongKind> for String {
    fn from(k: LongKind) -> String {
        k.name().to_owned()
    }
}

impl TryFrom<String> for LongKind {
    type Error = LdpError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Any longitudinal mechanism, for callers that select the protocol at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LongMechanism {
    Chain(LongProtocol),
    DBit(DBitParams),
}

/// Per-user memo for a [`LongMechanism`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum LongMemo {
    Chain(UserMemo),
    DBit(DBitMemo),
}

impl LongMemo {
    pub fn value(&self) -> usize {
        match self {
            LongMemo::Chain(m) => m.value,
            LongMemo::DBit(m) => m.value,
        }
    }
}

impl LongMechanism {
    /// dBitFlipPM ignores `eps_1` and uses `dbit_d` sampled buckets.
    pub fn new(kind: LongKind, budget: LongBudget, k: usize, dbit_d: usize) -> Result<Self> {
        Ok(match kind {
            LongKind::LGrr => LongMechanism::Chain(LongProtocol::grr(budget, k)?),
            LongKind::LUe(v) => LongMechanism::Chain(LongProtocol::ue(budget, v, k)?),
            LongKind::DBitFlipPm => LongMechanism::DBit(DBitParams::new(k, dbit_d, budget.eps_perm)?),
        })
    }

    pub fn k(&self) -> usize {
        match self {
            LongMechanism::Chain(c) => c.k(),
            LongMechanism::DBit(d) => d.k,
        }
    }

    pub fn memoize<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<LongMemo> {
        match self {
            LongMechanism::Chain(c) => memoize_round1(v, c, rng).map(LongMemo::Chain),
            LongMechanism::DBit(d) => dbit_init(v, d, rng).map(LongMemo::DBit),
        }
    }

    pub fn report<R: Rng + ?Sized>(&self, memo: &LongMemo, rng: &mut R) -> Result<Report> {
        match (self, memo) {
            (LongMechanism::Chain(c), LongMemo::Chain(m)) => long_client(m, c, rng),
            (LongMechanism::DBit(_), LongMemo::DBit(m)) => Ok(dbit_client(m)),
            _ => Err(LdpError::ShapeMismatch("memo does not belong to this mechanism".into())),
        }
    }

    /// Estimate plus the values left unsampled (always empty for the chains).
    pub fn aggregate(&self, reports: &[Report]) -> Result<DBitEstimate> {
        match self {
            LongMechanism::Chain(c) => long_aggregate(reports, c).map(|estimate| DBitEstimate {
                estimate,
                unsampled: Vec::new(),
            }),
            LongMechanism::DBit(d) => dbit_aggregate(reports, d),
        }
    }
}

/// One user's memos, keyed by true value. A value seen for the first time gets a fresh memo.
#[derive(Debug, Clone, Default)]
pub struct MemoStore {
    // Users rarely hold more than a handful of distinct values.
    memos: Vec<(usize, LongMemo)>,
}

impl MemoStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memo_for<R: Rng + ?Sized>(&mut self, v: usize, mech: &LongMechanism, rng: &mut R) -> Result<&LongMemo> {
        let pos = match self.memos.iter().position(|(value, _)| *value == v) {
            Some(pos) => pos,
            None => {
                self.memos.push((v, mech.memoize(v, rng)?));
                self.memos.len() - 1
            }
        };
        Ok(&self.memos[pos].1)
    }

    pub fn get(&self, v: usize) -> Option<&LongMemo> {
        self.memos.iter().find(|(value, _)| *value == v).map(|(_, m)| m)
    }

    pub fn len(&self) -> usize {
        self.memos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memos.is_empty()
    }
}
