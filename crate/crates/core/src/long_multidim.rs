//! Longitudinal multidimensional collection: SPL and SMP wrapped around the
//! longitudinal protocols.
//!
//! Under L-SMP a user samples the reported attribute once and keeps it, so
//! repeated collections never reveal more than one attribute's memo.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, LdpError, Result};
use crate::longitudinal::{LongBudget, LongKind, LongMechanism, LongMemo, MemoStore};
use crate::multidim::{check_tuple, column, MdimReport, MultiEstimate};
use crate::oracles::FrequencyEstimate;
use crate::report::Report;
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LongSolution {
    #[serde(rename = "spl")]
    LSpl,
    #[serde(rename = "smp")]
    LSmp,
}

impl fmt::Display for LongSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LongSolution::LSpl => "spl",
            LongSolution::LSmp => "smp",
        })
    }
}

impl FromStr for LongSolution {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spl" | "l-spl" => Ok(LongSolution::LSpl),
            "smp" | "l-smp" => Ok(LongSolution::LSmp),
            other => Err(LdpError::InvalidConfig(format!(
                "unknown longitudinal solution {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongMdimConfig {
    pub ks: Vec<usize>,
    pub budget: LongBudget,
    pub solution: LongSolution,
    pub protocol: LongKind,
    /// Buckets sampled per user by dBitFlipPM, capped at each attribute's domain size.
    pub dbit_d: usize,
}

/// Configured L-SPL / L-SMP solution: one longitudinal mechanism per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct LongMdimProtocol {
    pub solution: LongSolution,
    pub mechanisms: Vec<LongMechanism>,
}

/// A user's persistent state: the sampled attribute (L-SMP) and memos per attribute.
#[derive(Debug, Clone, Default)]
pub struct LongMdimUser {
    pub attr: Option<usize>,
    pub stores: Vec<MemoStore>,
}

impl LongMdimUser {
    /// The current memo for attribute `j` and value `v`, if one was drawn.
    pub fn memo(&self, j: usize, v: usize) -> Option<&LongMemo> {
        self.stores.get(j).and_then(|s| s.get(v))
    }
}

impl LongMdimProtocol {
    pub fn new(cfg: &LongMdimConfig) -> Result<Self> {
        if cfg.ks.is_empty() {
            return Err(LdpError::InvalidConfig("at least one attribute is required".into()));
        }
        for &k in &cfg.ks {
            check_domain(k)?;
        }
        let budget = match cfg.solution {
            LongSolution::LSpl => cfg.budget.split(cfg.ks.len())?,
            LongSolution::LSmp => LongBudget::new(cfg.budget.eps_perm, cfg.budget.eps_1)?,
        };
        let mechanisms = cfg
            .ks
            .iter()
            .map(|&k| LongMechanism::new(cfg.protocol, budget, k, cfg.dbit_d.min(k)))
            .collect::<Result<_>>()?;
        Ok(Self {
            solution: cfg.solution,
            mechanisms,
        })
    }

    pub fn d(&self) -> usize {
        self.mechanisms.len()
    }

    pub fn ks(&self) -> Vec<usize> {
        self.mechanisms.iter().map(|m| m.k()).collect()
    }

    /// Creates a user's persistent state and draws the memos for `tuple`.
    pub fn init_user<R: Rng + ?Sized>(&self, tuple: &[usize], rng: &mut R) -> Result<LongMdimUser> {
        check_tuple(tuple, &self.ks())?;
        let attr = match self.solution {
            LongSolution::LSpl => None,
            LongSolution::LSmp => Some(rng.gen_range(0..self.d())),
        };
        let mut user = LongMdimUser {
            attr,
            stores: vec![MemoStore::new(); self.d()],
        };
        for j in self.reported_attrs(&user) {
            user.stores[j].memo_for(tuple[j], &self.mechanisms[j], rng)?;
        }
        Ok(user)
    }

    fn reported_attrs(&self, user: &LongMdimUser) -> std::ops::Range<usize> {
        match user.attr {
            Some(j) => j..j + 1,
            None => 0..self.d(),
        }
    }

    /// One collection: round-two reports from the user's memos for `tuple`.
    pub fn client<R: Rng + ?Sized>(&self, tuple: &[usize], user: &mut LongMdimUser, rng: &mut R) -> Result<MdimReport> {
        check_tuple(tuple, &self.ks())?;
        if user.stores.len() != self.d() {
            return Err(LdpError::ShapeMismatch(
                "user state has the wrong attribute count".into(),
            ));
        }
        match (self.solution, user.attr) {
            (LongSolution::LSpl, None) => {
                let reports = (0..self.d())
                    .map(|j| {
                        let mech = &self.mechanisms[j];
                        let memo = user.stores[j].memo_for(tuple[j], mech, rng)?.clone();
                        mech.report(&memo, rng)
                    })
                    .collect::<Result<_>>()?;
                Ok(MdimReport::Spl { reports })
            }
            (LongSolution::LSmp, Some(attr)) if attr < self.d() => {
                let mech = &self.mechanisms[attr];
                let memo = user.stores[attr].memo_for(tuple[attr], mech, rng)?.clone();
                Ok(MdimReport::Smp {
                    attr,
                    report: mech.report(&memo, rng)?,
                })
            }
            _ => Err(LdpError::ShapeMismatch("user state does not match the solution".into())),
        }
    }

    pub fn aggregate(&self, reports: &[MdimReport]) -> Result<MultiEstimate> {
        if reports.is_empty() {
            return Err(LdpError::EmptyReportSet);
        }
        let d = self.d();
        let cols = match self.solution {
            LongSolution::LSpl => {
                let mut cols: Vec<Vec<Report>> = vec![Vec::with_capacity(reports.len()); d];
                for r in reports {
                    let MdimReport::Spl { reports: list } = r else {
                        return Err(LdpError::MixedReportTypes { expected: "spl" });
                    };
                    if list.len() != d {
                        return Err(LdpError::ShapeMismatch(format!(
                            "{} reports for {d} attributes",
                            list.len()
                        )));
                    }
                    for (c, rep) in cols.iter_mut().zip(list) {
                        c.push(rep.clone());
                    }
                }
                cols
            }
            LongSolution::LSmp => column(reports, d, |r| match r {
                MdimReport::Smp { attr, report } => Some((*attr, report)),
                _ => None,
            })?
            .into_iter()
            .map(|c| c.into_iter().cloned().collect())
            .collect(),
        };
        let mut warnings = Vec::new();
        let mut estimates = Vec::with_capacity(d);
        for (j, (mech, col)) in self.mechanisms.iter().zip(&cols).enumerate() {
            if col.is_empty() {
                warnings.push(Warning::EmptyGroup { attr: j });
                estimates.push(FrequencyEstimate::zeros(mech.k()));
                continue;
            }
            let est = mech.aggregate(col)?;
            warnings.extend(est.warnings(j));
            estimates.push(est.estimate);
        }
        Ok(MultiEstimate { estimates, warnings })
    }
}
