//! Multidimensional collection: each user holds a tuple of `d` categorical
//! attributes with domain sizes `ks`.
//!
//! * SPL splits the budget evenly and reports every attribute at `eps / d`.
//! * SMP samples one attribute and reports it at the full `eps`, revealing which.
//! * RS+FD samples one attribute, reports it at the amplified budget
//!   `ln(d (e^eps - 1) + 1)` and fills every other position with fake data.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_budget, check_domain, check_value, LdpError, Result};
use crate::oracles::{
    estimate_pure, FrequencyEstimate, FrequencyOracle, GrrParams, OracleKind, UeParams, UeVariant, MIN_CHANNEL_GAP,
};
use crate::report::{Report, ReportShape};
use crate::warning::Warning;

/// Amplified per-attribute budget of RS+FD.
pub fn amplify(eps: f64, d: usize) -> Result<f64> {
    check_budget(eps)?;
    match d {
        0 => Err(LdpError::InvalidConfig("attribute count must be at least 1".into())),
        1 => Ok(eps),
        _ => Ok((d as f64 * eps.exp_m1()).ln_1p()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solution {
    Spl,
    Smp,
    Rsfd,
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solution::Spl => "spl",
            Solution::Smp => "smp",
            Solution::Rsfd => "rsfd",
        })
    }
}

impl FromStr for Solution {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spl" => Ok(Solution::Spl),
            "smp" => Ok(Solution::Smp),
            "rsfd" | "rs+fd" => Ok(Solution::Rsfd),
            other => Err(LdpError::InvalidConfig(format!("unknown solution {other:?}"))),
        }
    }
}

/// How RS+FD with unary encoding fills non-sampled attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FakeMode {
    /// Sanitize the all-zeros vector.
    #[default]
    Zero,
    /// Sanitize the one-hot encoding of a uniformly random value.
    Rnd,
}

impl fmt::Display for FakeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FakeMode::Zero => "zero",
            FakeMode::Rnd => "rnd",
        })
    }
}

impl FromStr for FakeMode {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(FakeMode::Zero),
            "rnd" => Ok(FakeMode::Rnd),
            other => Err(LdpError::InvalidConfig(format!("unknown fake mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdimConfig {
    pub ks: Vec<usize>,
    pub eps: f64,
    pub solution: Solution,
    pub oracle: OracleKind,
    /// Only read by RS+FD with SUE/OUE.
    #[serde(default)]
    pub fake_mode: FakeMode,
}

impl MdimConfig {
    pub fn new(ks: Vec<usize>, eps: f64, solution: Solution, oracle: OracleKind) -> Self {
        Self {
            ks,
            eps,
            solution,
            oracle,
            fake_mode: FakeMode::default(),
        }
    }

    pub fn with_fake_mode(mut self, fake_mode: FakeMode) -> Self {
        self.fake_mode = fake_mode;
        self
    }

    pub fn d(&self) -> usize {
        self.ks.len()
    }

    pub fn eps_amp(&self) -> Result<f64> {
        amplify(self.eps, self.d())
    }

    pub fn validate(&self) -> Result<()> {
        check_budget(self.eps)?;
        if self.ks.is_empty() {
            return Err(LdpError::InvalidConfig("at least one attribute is required".into()));
        }
        for &k in &self.ks {
            check_domain(k)?;
        }
        if self.solution == Solution::Rsfd
            && !matches!(self.oracle, OracleKind::Grr | OracleKind::Sue | OracleKind::Oue)
        {
            return Err(LdpError::InvalidConfig(format!(
                "RS+FD supports grr, sue and oue, not {}",
                self.oracle
            )));
        }
        Ok(())
    }
}

mod singleton {
    use super::*;

    pub fn serialize<S: Serializer>(report: &Report, s: S) -> Result<S::Ok, S::Error> {
        [report].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Report, D::Error> {
        let mut v: Vec<Report> = Vec::deserialize(d)?;
        if v.len() != 1 {
            return Err(serde::de::Error::custom(format!(
                "expected exactly one report, got {}",
                v.len()
            )));
        }
        Ok(v.pop().unwrap())
    }
}

/// One user's report on a tuple of attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum MdimReport {
    Spl {
        reports: Vec<Report>,
    },
    Smp {
        attr: usize,
        #[serde(rename = "reports", with = "singleton")]
        report: Report,
    },
    Rsfd {
        reports: Vec<Report>,
    },
}

impl MdimReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| LdpError::ShapeMismatch(e.to_string()))
    }
}

/// Per-attribute estimates plus non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiEstimate {
    pub estimates: Vec<FrequencyEstimate>,
    pub warnings: Vec<Warning>,
}

pub(crate) fn check_tuple(tuple: &[usize], ks: &[usize]) -> Result<()> {
    if tuple.len() != ks.len() {
        return Err(LdpError::ShapeMismatch(format!(
            "tuple of {} values for {} attributes",
            tuple.len(),
            ks.len()
        )));
    }
    tuple.iter().zip(ks).try_for_each(|(&v, &k)| check_value(v, k))
}

/// Splits reports by attribute. Reports of another solution are rejected.
pub(crate) fn column<'a, F>(reports: &'a [MdimReport], d: usize, pick: F) -> Result<Vec<Vec<&'a Report>>>
where
    F: Fn(&'a MdimReport) -> Option<(usize, &'a Report)>,
{
    let mut cols: Vec<Vec<&Report>> = vec![Vec::new(); d];
    for r in reports {
        let (j, rep) = pick(r).ok_or(LdpError::MixedReportTypes {
            expected: "multidimensional report",
        })?;
        cols.get_mut(j)
            .ok_or_else(|| LdpError::ShapeMismatch(format!("attribute {j} out of range")))?
            .push(rep);
    }
    Ok(cols)
}

fn owned(col: &[&Report]) -> Vec<Report> {
    col.iter().map(|&r| r.clone()).collect()
}

/// Counts support per attribute for full-tuple reports (SPL, RS+FD).
fn tuple_counts(reports: &[MdimReport], shapes: &[ReportShape], want_rsfd: bool) -> Result<Vec<Vec<u64>>> {
    if reports.is_empty() {
        return Err(LdpError::EmptyReportSet);
    }
    let d = shapes.len();
    let zero = || shapes.iter().map(|s| vec![0u64; s.k()]).collect::<Vec<_>>();
    reports
        .par_chunks(4096)
        .map(|chunk| {
            let mut counts = zero();
            for r in chunk {
                let list = match (r, want_rsfd) {
                    (MdimReport::Spl { reports }, false) | (MdimReport::Rsfd { reports }, true) => reports,
                    _ => {
                        return Err(LdpError::MixedReportTypes {
                            expected: if want_rsfd { "rsfd" } else { "spl" },
                        })
                    }
                };
                if list.len() != d {
                    return Err(LdpError::ShapeMismatch(format!(
                        "{} reports for {d} attributes",
                        list.len()
                    )));
                }
                for ((rep, shape), c) in list.iter().zip(shapes).zip(counts.iter_mut()) {
                    shape.accumulate(rep, c)?;
                }
            }
            Ok(counts)
        })
        .try_reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            Ok(a)
        })
}

/// A configured multidimensional solution.
#[derive(Debug, Clone, PartialEq)]
pub enum MdimProtocol {
    /// One oracle per attribute at `eps / d`.
    Spl(Vec<FrequencyOracle>),
    /// One oracle per attribute at the full `eps`.
    Smp(Vec<FrequencyOracle>),
    /// GRR at the amplified budget; fakes are uniform raw values.
    RsfdGrr { eps_amp: f64, grr: Vec<GrrParams> },
    /// SUE/OUE at the amplified budget; fakes are sanitized zero or random one-hot vectors.
    RsfdUe {
        eps_amp: f64,
        ks: Vec<usize>,
        ue: UeParams,
        fake: FakeMode,
    },
}

impl MdimProtocol {
    pub fn new(cfg: &MdimConfig) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.d();
        let oracles = |eps: f64| {
            cfg.ks
                .iter()
                .map(|&k| FrequencyOracle::new(cfg.oracle, eps, k))
                .collect::<Result<Vec<_>>>()
        };
        Ok(match cfg.solution {
            Solution::Spl => MdimProtocol::Spl(oracles(cfg.eps / d as f64)?),
            Solution::Smp => MdimProtocol::Smp(oracles(cfg.eps)?),
            Solution::Rsfd => {
                let eps_amp = cfg.eps_amp()?;
                match cfg.oracle {
                    OracleKind::Grr => MdimProtocol::RsfdGrr {
                        eps_amp,
                        grr: cfg
                            .ks
                            .iter()
                            .map(|&k| GrrParams::new(eps_amp, k))
                            .collect::<Result<_>>()?,
                    },
                    OracleKind::Sue | OracleKind::Oue => {
                        let variant = if cfg.oracle == OracleKind::Sue {
                            UeVariant::Sue
                        } else {
                            UeVariant::Oue
                        };
                        MdimProtocol::RsfdUe {
                            eps_amp,
                            ks: cfg.ks.clone(),
                            ue: UeParams::new(eps_amp, variant)?,
                            fake: cfg.fake_mode,
                        }
                    }
                    _ => unreachable!("rejected by validate"),
                }
            }
        })
    }

    pub fn d(&self) -> usize {
        match self {
            MdimProtocol::Spl(o) | MdimProtocol::Smp(o) => o.len(),
            MdimProtocol::RsfdGrr { grr, .. } => grr.len(),
            MdimProtocol::RsfdUe { ks, .. } => ks.len(),
        }
    }

    pub fn ks(&self) -> Vec<usize> {
        match self {
            MdimProtocol::Spl(o) | MdimProtocol::Smp(o) => o.iter().map(|o| o.k()).collect(),
            MdimProtocol::RsfdGrr { grr, .. } => grr.iter().map(|g| g.k).collect(),
            MdimProtocol::RsfdUe { ks, .. } => ks.clone(),
        }
    }

    pub fn client<R: Rng + ?Sized>(&self, tuple: &[usize], rng: &mut R) -> Result<MdimReport> {
        check_tuple(tuple, &self.ks())?;
        let d = self.d();
        Ok(match self {
            MdimProtocol::Spl(oracles) => MdimReport::Spl {
                reports: oracles
                    .iter()
                    .zip(tuple)
                    .map(|(o, &v)| o.randomize(v, rng))
                    .collect::<Result<_>>()?,
            },
            MdimProtocol::Smp(oracles) => {
                let attr = rng.gen_range(0..d);
                MdimReport::Smp {
                    attr,
                    report: oracles[attr].randomize(tuple[attr], rng)?,
                }
            }
            MdimProtocol::RsfdGrr { grr, .. } => {
                let attr = rng.gen_range(0..d);
                let reports = grr
                    .iter()
                    .zip(tuple)
                    .enumerate()
                    .map(|(j, (g, &v))| Report::Value {
                        v: if j == attr {
                            g.perturb(v, rng)
                        } else {
                            rng.gen_range(0..g.k)
                        },
                    })
                    .collect();
                MdimReport::Rsfd { reports }
            }
            MdimProtocol::RsfdUe { ks, ue, fake, .. } => {
                let attr = rng.gen_range(0..d);
                let reports = ks
                    .iter()
                    .zip(tuple)
                    .enumerate()
                    .map(|(j, (&k, &v))| {
                        let hot = if j == attr {
                            Some(v)
                        } else {
                            match fake {
                                FakeMode::Zero => None,
                                FakeMode::Rnd => Some(rng.gen_range(0..k)),
                            }
                        };
                        Report::Bits {
                            b: ue.perturb_one_hot(hot, k, rng),
                        }
                    })
                    .collect();
                MdimReport::Rsfd { reports }
            }
        })
    }

    pub fn aggregate(&self, reports: &[MdimReport]) -> Result<MultiEstimate> {
        if reports.is_empty() {
            return Err(LdpError::EmptyReportSet);
        }
        let d = self.d();
        let n = reports.len() as f64;
        let mut warnings = Vec::new();
        let estimates = match self {
            MdimProtocol::Spl(oracles) => {
                let shapes: Vec<_> = oracles.iter().map(|o| o.shape()).collect();
                let counts = tuple_counts(reports, &shapes, false)?;
                oracles
                    .iter()
                    .zip(&counts)
                    .map(|(o, c)| {
                        let (p, q) = o.support_probabilities();
                        estimate_pure(c, reports.len() as u64, p, q)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            MdimProtocol::Smp(oracles) => {
                let cols = column(reports, d, |r| match r {
                    MdimReport::Smp { attr, report } => Some((*attr, report)),
                    _ => None,
                })?;
                oracles
                    .iter()
                    .zip(&cols)
                    .enumerate()
                    .map(|(j, (o, col))| {
                        if col.is_empty() {
                            warnings.push(Warning::EmptyGroup { attr: j });
                            Ok(FrequencyEstimate::zeros(o.k()))
                        } else {
                            o.aggregate(&owned(col))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            MdimProtocol::RsfdGrr { grr, .. } => {
                let shapes: Vec<_> = grr.iter().map(|g| g.shape()).collect();
                let counts = tuple_counts(reports, &shapes, true)?;
                let df = d as f64;
                grr.iter()
                    .zip(&counts)
                    .map(|(g, c)| {
                        let gap = g.p - g.q;
                        if gap < MIN_CHANNEL_GAP {
                            return Err(LdpError::DegenerateChannel(gap));
                        }
                        let k = g.k as f64;
                        let est = c
                            .iter()
                            .map(|&cv| (cv as f64 / n - g.q / df - (df - 1.0) / (df * k)) * df / gap)
                            .collect();
                        Ok(FrequencyEstimate(est))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            MdimProtocol::RsfdUe { ks, ue, fake, .. } => {
                let shapes: Vec<_> = ks.iter().map(|&k| ReportShape::Bits { k }).collect();
                let counts = tuple_counts(reports, &shapes, true)?;
                let df = d as f64;
                let gap = ue.p - ue.q;
                if gap < MIN_CHANNEL_GAP {
                    return Err(LdpError::DegenerateChannel(gap));
                }
                ks.iter()
                    .zip(&counts)
                    .map(|(&k, c)| {
                        let shift = match fake {
                            FakeMode::Zero => 0.0,
                            FakeMode::Rnd => (df - 1.0) / k as f64,
                        };
                        FrequencyEstimate(c.iter().map(|&cv| df * (cv as f64 / n - ue.q) / gap - shift).collect())
                    })
                    .collect()
            }
        };
        Ok(MultiEstimate { estimates, warnings })
    }
}

/// Convenience wrappers named after the individual solutions.
pub fn spl_client<R: Rng + ?Sized>(tuple: &[usize], cfg: &MdimConfig, rng: &mut R) -> Result<MdimReport> {
    expect_solution(cfg, Solution::Spl)?;
    MdimProtocol::new(cfg)?.client(tuple, rng)
}

pub fn smp_client<R: Rng + ?Sized>(tuple: &[usize], cfg: &MdimConfig, rng: &mut R) -> Result<MdimReport> {
    expect_solution(cfg, Solution::Smp)?;
    MdimProtocol::new(cfg)?.client(tuple, rng)
}

pub fn rsfd_client<R: Rng + ?Sized>(tuple: &[usize], cfg: &MdimConfig, rng: &mut R) -> Result<MdimReport> {
    expect_solution(cfg, Solution::Rsfd)?;
    MdimProtocol::new(cfg)?.client(tuple, rng)
}

pub fn mdim_aggregate(reports: &[MdimReport], cfg: &MdimConfig) -> Result<MultiEstimate> {
    MdimProtocol::new(cfg)?.aggregate(reports)
}

fn expect_solution(cfg: &MdimConfig, s: Solution) -> Result<()> {
    if cfg.solution == s {
        Ok(())
    } else {
        Err(LdpError::InvalidConfig(format!(
            "configuration is for {}, not {s}",
            cfg.solution
        )))
    }
}
