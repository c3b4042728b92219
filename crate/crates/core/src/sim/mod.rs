//! Monte Carlo harness: synthetic data, the full client loop, aggregation
//! and error metrics.
//!
//! Every user's randomness comes from a substream keyed by
//! `(seed, purpose, trial, collection, user)`, and all aggregation is integer
//! counting, so results are bit-for-bit identical for any thread count.

mod dataset;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dataset::{gen_dataset, Dataset, Distribution};

use crate::audit::{
    compose, digits, long_channels, long_mdim_channel, long_mechanism_channel, mdim_channel, oracle_channel,
    realized_epsilon, realized_epsilon_over, AuditVerdict,
};
use crate::error::{LdpError, Result};
use crate::long_multidim::{LongMdimConfig, LongMdimProtocol, LongSolution};
use crate::longitudinal::{LongBudget, LongKind, LongMechanism};
use crate::multidim::{amplify, FakeMode, MdimConfig, MdimProtocol, Solution};
use crate::oracles::{FrequencyEstimate, FrequencyOracle, OracleKind};
use crate::rng::substream;
use crate::warning::Warning;

const MEMO_STREAM: u64 = 0x4D45_4D4F;
const REPORT_STREAM: u64 = 0x5245_5054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Single,
    Long,
    Mdim,
    LongMdim,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Single => "single",
            Task::Long => "long",
            Task::Mdim => "mdim",
            Task::LongMdim => "long-mdim",
        })
    }
}

impl FromStr for Task {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Task::Single),
            "long" => Ok(Task::Long),
            "mdim" => Ok(Task::Mdim),
            "long-mdim" => Ok(Task::LongMdim),
            other => Err(LdpError::InvalidConfig(format!("unknown task {other:?}"))),
        }
    }
}

/// Any protocol name accepted by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Protocol {
    Oracle(OracleKind),
    Long(LongKind),
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Oracle(k) => k.fmt(f),
            Protocol::Long(k) => k.fmt(f),
        }
    }
}

impl FromStr for Protocol {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        s.parse()
            .map(Protocol::Oracle)
            .or_else(|_| s.parse().map(Protocol::Long))
            .map_err(|_| LdpError::InvalidConfig(format!("unknown protocol {s:?}")))
    }
}

impl From<Protocol> for String {
    fn from(p: Protocol) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Protocol {
    type Error = LdpError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn one() -> usize {
    1
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
    #[serde(default)]
    pub fake_mode: FakeMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_perm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_1: Option<f64>,
    pub n: usize,
    pub ks: Vec<usize>,
    /// Buckets per user for dBitFlipPM.
    #[serde(default = "one")]
    pub dbit_d: usize,
    #[serde(default = "one")]
    pub collections: usize,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    /// Clip estimates to [0, 1] and renormalize.
    #[serde(default, skip_serializing_if = "is_false")]
    pub postprocess: bool,
}

impl ExperimentConfig {
    /// Single-attribute run with defaults for everything else.
    pub fn single(protocol: OracleKind, eps: f64, n: usize, k: usize) -> Self {
        Self {
            task: Task::Single,
            protocol: Protocol::Oracle(protocol),
            solution: None,
            fake_mode: FakeMode::Zero,
            eps: Some(eps),
            eps_perm: None,
            eps_1: None,
            n,
            ks: vec![k],
            dbit_d: 1,
            collections: 1,
            distribution: Distribution::Uniform,
            seed: 0,
            trials: 1,
            postprocess: false,
        }
    }

    pub fn long(protocol: LongKind, eps_perm: f64, eps_1: f64, n: usize, k: usize) -> Self {
        Self {
            task: Task::Long,
            protocol: Protocol::Long(protocol),
            eps: None,
            eps_perm: Some(eps_perm),
            eps_1: Some(eps_1),
            ..Self::single(OracleKind::Grr, 1.0, n, k)
        }
    }

    pub fn mdim(solution: Solution, protocol: OracleKind, eps: f64, n: usize, ks: Vec<usize>) -> Self {
        Self {
            task: Task::Mdim,
            solution: Some(solution),
            ks,
            ..Self::single(protocol, eps, n, 2)
        }
    }

    pub fn long_mdim(
        solution: Solution,
        protocol: LongKind,
        eps_perm: f64,
        eps_1: f64,
        n: usize,
        ks: Vec<usize>,
    ) -> Self {
        Self {
            task: Task::LongMdim,
            solution: Some(solution),
            ks,
            ..Self::long(protocol, eps_perm, eps_1, n, 2)
        }
    }

    fn invalid(msg: impl Into<String>) -> LdpError {
        LdpError::InvalidConfig(msg.into())
    }

    fn eps(&self) -> Result<f64> {
        self.eps
            .ok_or_else(|| Self::invalid(format!("--eps is required for task {}", self.task)))
    }

    fn budget(&self) -> Result<LongBudget> {
        match (self.eps_perm, self.eps_1) {
            (Some(p), Some(f)) => LongBudget::new(p, f)
                .map_err(|_| Self::invalid(format!("need 0 < eps_1 < eps_perm, got eps_perm = {p}, eps_1 = {f}"))),
            _ => Err(Self::invalid(format!(
                "--eps-perm and --eps-1 are required for task {}",
                self.task
            ))),
        }
    }

    fn oracle_kind(&self) -> Result<OracleKind> {
        match self.protocol {
            Protocol::Oracle(k) => Ok(k),
            Protocol::Long(k) => Err(Self::invalid(format!(
                "{k} is longitudinal; task {} needs a frequency oracle",
                self.task
            ))),
        }
    }

    fn long_kind(&self) -> Result<LongKind> {
        match self.protocol {
            Protocol::Long(k) => Ok(k),
            Protocol::Oracle(k) => Err(Self::invalid(format!(
                "{k} is not longitudinal; task {} needs l-* or dbitflippm",
                self.task
            ))),
        }
    }

    fn solution(&self) -> Result<Solution> {
        self.solution
            .ok_or_else(|| Self::invalid(format!("--solution is required for task {}", self.task)))
    }

    /// Checks the configuration and builds the protocol it describes.
    pub fn pipeline(&self) -> Result<Pipeline> {
        if self.n == 0 || self.trials == 0 || self.collections == 0 {
            return Err(Self::invalid("n, trials and collections must be at least 1"));
        }
        if self.ks.is_empty() {
            return Err(Self::invalid("at least one domain size is required"));
        }
        let single_attr = matches!(self.task, Task::Single | Task::Long);
        if single_attr && self.ks.len() != 1 {
            return Err(Self::invalid(format!(
                "task {} takes one domain size, got {}",
                self.task,
                self.ks.len()
            )));
        }
        if matches!(self.task, Task::Single | Task::Mdim) && self.collections != 1 {
            return Err(Self::invalid(format!("task {} has a single collection", self.task)));
        }
        let k = self.ks[0];
        let wrap = |e: LdpError| match e {
            LdpError::InvalidConfig(_) => e,
            other => Self::invalid(other.to_string()),
        };
        match self.task {
            Task::Single => FrequencyOracle::new(self.oracle_kind()?, self.eps()?, k).map(Pipeline::Single),
            Task::Long => LongMechanism::new(self.long_kind()?, self.budget()?, k, self.dbit_d).map(Pipeline::Long),
            Task::Mdim => {
                let cfg = MdimConfig::new(self.ks.clone(), self.eps()?, self.solution()?, self.oracle_kind()?)
                    .with_fake_mode(self.fake_mode);
                MdimProtocol::new(&cfg).map(Pipeline::Mdim)
            }
            Task::LongMdim => {
                let solution = match self.solution()? {
                    Solution::Spl => LongSolution::LSpl,
                    Solution::Smp => LongSolution::LSmp,
                    Solution::Rsfd => return Err(Self::invalid("rsfd is not available for longitudinal data")),
                };
                let cfg = LongMdimConfig {
                    ks: self.ks.clone(),
                    budget: self.budget()?,
                    solution,
                    protocol: self.long_kind()?,
                    dbit_d: self.dbit_d,
                };
                LongMdimProtocol::new(&cfg).map(Pipeline::LongMdim)
            }
        }
        .map_err(wrap)
    }
}

/// A configured protocol ready to simulate.
#[derive(Debug, Clone)]
pub enum Pipeline {
    Single(FrequencyOracle),
    Long(LongMechanism),
    Mdim(MdimProtocol),
    LongMdim(LongMdimProtocol),
}

/// Per-attribute estimates from one collection of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEstimate {
    pub trial: usize,
    pub collection: usize,
    pub est: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub true_freq: Vec<Vec<f64>>,
    /// Mean over all trials and collections.
    pub est_freq: Vec<Vec<f64>>,
    /// Mean squared error of `est_freq` per attribute.
    pub mse: Vec<f64>,
    pub elapsed_ms: u64,
    pub runs: Vec<RunEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Warning>,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serialization is infallible")
    }

    /// The same result with `elapsed_ms` zeroed, for byte-level comparisons.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = 0;
        self
    }
}

pub fn mse(est: &[f64], truth: &[f64]) -> f64 {
    est.iter().zip(truth).map(|(e, t)| (e - t).powi(2)).sum::<f64>() / truth.len().max(1) as f64
}

fn report_rng(seed: u64, trial: usize, collection: usize, user: usize) -> crate::rng::StreamRng {
    substream(seed, &[REPORT_STREAM, trial as u64, collection as u64, user as u64])
}

fn memo_rng(seed: u64, trial: usize, user: usize) -> crate::rng::StreamRng {
    substream(seed, &[MEMO_STREAM, trial as u64, user as u64])
}

type Collected = (Vec<FrequencyEstimate>, Vec<Warning>);

impl Pipeline {
    /// One trial: returns per-collection estimates.
    pub fn run_trial(&self, ds: &Dataset, seed: u64, trial: usize, collections: usize) -> Result<Vec<Collected>> {
        let n = ds.n();
        match self {
            Pipeline::Single(oracle) => {
                let reports = (0..n)
                    .into_par_iter()
                    .map(|u| oracle.randomize(ds.tuple(u)[0], &mut report_rng(seed, trial, 0, u)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(vec![(vec![oracle.aggregate(&reports)?], Vec::new())])
            }
            Pipeline::Long(mech) => {
                let memos = (0..n)
                    .into_par_iter()
                    .map(|u| mech.memoize(ds.tuple(u)[0], &mut memo_rng(seed, trial, u)))
                    .collect::<Result<Vec<_>>>()?;
                (0..collections)
                    .map(|c| {
                        let reports = memos
                            .par_iter()
                            .enumerate()
                            .map(|(u, memo)| mech.report(memo, &mut report_rng(seed, trial, c, u)))
                            .collect::<Result<Vec<_>>>()?;
                        let est = mech.aggregate(&reports)?;
                        let warnings = est.warnings(0);
                        Ok((vec![est.estimate], warnings))
                    })
                    .collect()
            }
            Pipeline::Mdim(proto) => {
                let reports = (0..n)
                    .into_par_iter()
                    .map(|u| proto.client(ds.tuple(u), &mut report_rng(seed, trial, 0, u)))
                    .collect::<Result<Vec<_>>>()?;
                let est = proto.aggregate(&reports)?;
                Ok(vec![(est.estimates, est.warnings)])
            }
            Pipeline::LongMdim(proto) => {
                let mut users = (0..n)
                    .into_par_iter()
                    .map(|u| proto.init_user(ds.tuple(u), &mut memo_rng(seed, trial, u)))
                    .collect::<Result<Vec<_>>>()?;
                (0..collections)
                    .map(|c| {
                        let reports = users
                            .par_iter_mut()
                            .enumerate()
                            .map(|(u, user)| proto.client(ds.tuple(u), user, &mut report_rng(seed, trial, c, u)))
                            .collect::<Result<Vec<_>>>()?;
                        let est = proto.aggregate(&reports)?;
                        Ok((est.estimates, est.warnings))
                    })
                    .collect()
            }
        }
    }
}

/// Generates the dataset from the configuration and runs every trial.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let pipeline = cfg.pipeline()?;
    let ds = gen_dataset(cfg.distribution, cfg.n, &cfg.ks, cfg.seed)?;
    let mut result = run_pipeline(cfg, &pipeline, &ds)?;
    result.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

/// Runs every trial on a caller-supplied dataset; `cfg.n` and `cfg.ks` are taken from it.
pub fn run_on_dataset(cfg: &ExperimentConfig, ds: &Dataset) -> Result<ExperimentResult> {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n: ds.n(),
        ks: ds.ks().to_vec(),
        ..cfg.clone()
    };
    let pipeline = cfg.pipeline()?;
    let mut result = run_pipeline(&cfg, &pipeline, ds)?;
    result.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(result)
}

fn run_pipeline(cfg: &ExperimentConfig, pipeline: &Pipeline, ds: &Dataset) -> Result<ExperimentResult> {
    let true_freq = ds.true_freq();
    let mut runs = Vec::with_capacity(cfg.trials * cfg.collections);
    let mut warnings: Vec<Warning> = Vec::new();
    for trial in 0..cfg.trials {
        for (collection, (est, warn)) in pipeline
            .run_trial(ds, cfg.seed, trial, cfg.collections)?
            .into_iter()
            .enumerate()
        {
            let est = est
                .into_iter()
                .map(|e| if cfg.postprocess { e.clip_renormalize() } else { e }.into_inner())
                .collect();
            for w in warn {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
            runs.push(RunEstimate { trial, collection, est });
        }
    }
    let count = runs.len() as f64;
    let est_freq: Vec<Vec<f64>> = true_freq
        .iter()
        .enumerate()
        .map(|(j, t)| {
            (0..t.len())
                .map(|v| runs.iter().map(|r| r.est[j][v]).sum::<f64>() / count)
                .collect()
        })
        .collect();
    let mse = est_freq.iter().zip(&true_freq).map(|(e, t)| mse(e, t)).collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        true_freq,
        est_freq,
        mse,
        elapsed_ms: 0,
        runs,
        warnings,
    })
}

/// One named privacy check of a configured protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditCheck {
    pub check: &'static str,
    pub declared: f64,
    pub realized: f64,
    pub passed: bool,
}

impl AuditCheck {
    fn upper(check: &'static str, declared: f64, realized: f64) -> Self {
        let passed = AuditVerdict {
            declared,
            realized,
            exact: false,
        }
        .passed();
        Self {
            check,
            declared,
            realized,
            passed,
        }
    }
}

/// Enumerates the channels of the configured protocol and checks each
/// against its declared budget. Local hashing is conditioned on `cfg.seed`
/// and dBitFlipPM on the first `dbit_d` buckets.
pub fn audit_config(cfg: &ExperimentConfig) -> Result<Vec<AuditCheck>> {
    let pipeline = cfg.pipeline()?;
    let buckets = |k: usize| (0..cfg.dbit_d.min(k)).collect::<Vec<_>>();
    Ok(match &pipeline {
        Pipeline::Single(oracle) => {
            let m = oracle_channel(oracle, cfg.seed)?;
            vec![AuditCheck::upper("report", oracle.eps(), realized_epsilon(&m))]
        }
        Pipeline::Long(LongMechanism::Chain(chain)) => {
            let budget = chain.budget();
            let (first, second) = long_channels(chain)?;
            let end_to_end = compose(&first, &second)?;
            vec![
                AuditCheck::upper("memo", budget.eps_perm, realized_epsilon(&first)),
                AuditCheck::upper("report", budget.eps_1, realized_epsilon(&end_to_end)),
            ]
        }
        Pipeline::Long(mech @ LongMechanism::DBit(params)) => {
            let m = long_mechanism_channel(mech, &buckets(params.k))?;
            vec![AuditCheck::upper("memo", params.eps_perm, realized_epsilon(&m))]
        }
        Pipeline::Mdim(proto) => {
            let m = mdim_channel(proto, cfg.seed)?;
            let eps = cfg.eps()?;
            let ks = proto.ks();
            let one_attr = |a: usize, b: usize| {
                digits(a, &ks)
                    .iter()
                    .zip(digits(b, &ks))
                    .filter(|(x, y)| **x != *y)
                    .count()
                    == 1
            };
            vec![
                AuditCheck::upper("tuple", eps, realized_epsilon_over(&m, one_attr)),
                AuditCheck::upper(
                    "any-tuple",
                    if matches!(proto, MdimProtocol::RsfdGrr { .. } | MdimProtocol::RsfdUe { .. }) {
                        amplify(eps, proto.d())?
                    } else {
                        eps
                    },
                    realized_epsilon(&m),
                ),
            ]
        }
        Pipeline::LongMdim(proto) => {
            let all: Vec<Vec<usize>> = proto.ks().iter().map(|&k| buckets(k)).collect();
            let m = long_mdim_channel(proto, &all)?;
            let budget = cfg.budget()?;
            let declared = if cfg.long_kind()? == LongKind::DBitFlipPm {
                budget.eps_perm
            } else {
                budget.eps_1
            };
            vec![AuditCheck::upper("report", declared, realized_epsilon(&m))]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::longitudinal::LongUeVariant;

    #[test]
    fn protocol_names() {
        assert_eq!("grr".parse::<Protocol>().unwrap(), Protocol::Oracle(OracleKind::Grr));
        assert_eq!(
            "l-osue".parse::<Protocol>().unwrap(),
            Protocol::Long(LongKind::LUe(LongUeVariant::LOsue))
        );
        assert_eq!(
            "dbitflippm".parse::<Protocol>().unwrap(),
            Protocol::Long(LongKind::DBitFlipPm)
        );
        assert!("rappor".parse::<Protocol>().is_err());
        assert_eq!("long-mdim".parse::<Task>().unwrap(), Task::LongMdim);
    }

    #[test]
    fn invalid_configs() {
        let bad = |cfg: ExperimentConfig| matches!(cfg.pipeline(), Err(LdpError::InvalidConfig(_)));
        assert!(bad(ExperimentConfig::single(OracleKind::Grr, 1.0, 0, 5)));
        assert!(bad(ExperimentConfig::single(OracleKind::Grr, -1.0, 10, 5)));
        assert!(bad(ExperimentConfig {
            ks: vec![3, 3],
            ..ExperimentConfig::single(OracleKind::Grr, 1.0, 10, 5)
        }));
        assert!(bad(ExperimentConfig::long(LongKind::LGrr, 1.0, 2.0, 10, 5)));
        assert!(bad(ExperimentConfig {
            eps_1: None,
            ..ExperimentConfig::long(LongKind::LGrr, 2.0, 1.0, 10, 5)
        }));
        assert!(bad(ExperimentConfig {
            protocol: Protocol::Oracle(OracleKind::Grr),
            ..ExperimentConfig::long(LongKind::LGrr, 2.0, 1.0, 10, 5)
        }));
        assert!(bad(ExperimentConfig {
            solution: None,
            ..ExperimentConfig::mdim(Solution::Spl, OracleKind::Grr, 1.0, 10, vec![3, 3])
        }));
        assert!(bad(ExperimentConfig::mdim(
            Solution::Rsfd,
            OracleKind::Ss,
            1.0,
            10,
            vec![3, 3]
        )));
        assert!(bad(ExperimentConfig::long_mdim(
            Solution::Rsfd,
            LongKind::LGrr,
            2.0,
            1.0,
            10,
            vec![3, 3]
        )));
        assert!(bad(ExperimentConfig {
            collections: 2,
            ..ExperimentConfig::single(OracleKind::Grr, 1.0, 10, 5)
        }));
        assert!(bad(
            ExperimentConfig::long(LongKind::DBitFlipPm, 2.0, 1.0, 10, 5).with_dbit(9)
        ));
    }

    impl ExperimentConfig {
        fn with_dbit(mut self, d: usize) -> Self {
            self.dbit_d = d;
            self
        }
    }

    #[test]
    fn mse_is_mean_squared_error_of_average() {
        let cfg = ExperimentConfig {
            trials: 3,
            seed: 4,
            ..ExperimentConfig::single(OracleKind::Oue, 1.0, 2000, 4)
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.runs.len(), 3);
        for v in 0..4 {
            let mean = res.runs.iter().map(|r| r.est[0][v]).sum::<f64>() / 3.0;
            assert_eq!(mean, res.est_freq[0][v]);
        }
        assert!((res.mse[0] - mse(&res.est_freq[0], &res.true_freq[0])).abs() < 1e-15);
    }

    #[test]
    fn dbit_collections_replay_memos() {
        let cfg = ExperimentConfig {
            collections: 4,
            seed: 9,
            ..ExperimentConfig::long(LongKind::DBitFlipPm, 2.0, 1.0, 3000, 5).with_dbit(2)
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.runs.len(), 4);
        for r in &res.runs[1..] {
            assert_eq!(r.est, res.runs[0].est);
        }
    }

    #[test]
    fn postprocess_yields_distributions() {
        let cfg = ExperimentConfig {
            postprocess: true,
            distribution: Distribution::Point(1),
            ..ExperimentConfig::single(OracleKind::Grr, 0.5, 500, 6)
        };
        let res = run_experiment(&cfg).unwrap();
        let e = &res.runs[0].est[0];
        assert!(e.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = ExperimentConfig::long_mdim(Solution::Smp, LongKind::LGrr, 2.0, 1.0, 100, vec![4, 4, 4]);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains(r#""task":"long-mdim""#) && json.contains(r#""protocol":"l-grr""#));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), cfg);
    }

    #[test]
    fn audits_pass_at_declared_budgets() {
        let cfgs = [
            ExperimentConfig::single(OracleKind::Olh, 2.0, 1, 6),
            ExperimentConfig::long(LongKind::LUe(LongUeVariant::LSue), 2.0, 1.0, 1, 4),
            ExperimentConfig::long(LongKind::DBitFlipPm, 2.0, 1.0, 1, 5).with_dbit(3),
            ExperimentConfig::mdim(Solution::Rsfd, OracleKind::Grr, 1.0, 1, vec![3, 3]),
            ExperimentConfig::long_mdim(Solution::Smp, LongKind::LGrr, 2.0, 1.0, 1, vec![3, 3]),
        ];
        for cfg in cfgs {
            let checks = audit_config(&cfg).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{cfg:?}: {checks:?}");
        }
    }

    #[test]
    fn rsfd_grr_with_unequal_domains_exceeds_budget() {
        let checks = audit_config(&ExperimentConfig::mdim(
            Solution::Rsfd,
            OracleKind::Grr,
            1.0,
            1,
            vec![3, 4],
        ))
        .unwrap();
        assert!(!checks[0].passed && checks[0].realized > 1.04);
        assert!(checks[1].passed);
    }
}
