//! Shared fixtures for the integration and acceptance suites.
#![allow(dead_code)]

use ldp_freq::audit::{
    compose, digits, enumerate_channel, long_channels, long_mdim_channel, long_mechanism_channel, mdim_channel,
    oracle_channel, realized_epsilon, realized_epsilon_over, ChannelMatrix, Mechanism, BUDGET_TOLERANCE,
    STOCHASTIC_TOLERANCE,
};
use ldp_freq::long_multidim::{LongMdimConfig, LongMdimProtocol, LongSolution};
use ldp_freq::longitudinal::{LongBudget, LongKind, LongMechanism, LongProtocol, LongUeVariant};
use ldp_freq::multidim::{amplify, FakeMode, MdimConfig, MdimProtocol, Solution};
use ldp_freq::sim::{run_on_dataset, Dataset, ExperimentConfig, Protocol};
use ldp_freq::{FrequencyOracle, LdpError, OracleKind};

pub const AUDIT_EPS: [f64; 5] = [0.5, 1.0, 1.0986122886681098, 2.0, 4.0];
pub const AUDIT_KS: [usize; 4] = [2, 3, 5, 6];
pub const EPS1_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];
pub const LH_SEEDS: [u64; 3] = [0, 1, 0xFEED];

pub fn long_kinds() -> Vec<LongKind> {
    let mut kinds = vec![LongKind::LGrr];
    kinds.extend(LongUeVariant::ALL.iter().map(|&v| LongKind::LUe(v)));
    kinds.push(LongKind::DBitFlipPm);
    kinds
}

#[derive(Debug, Default)]
pub struct AuditSummary {
    pub checked: usize,
    /// Parameter sets the constructors reject as infeasible.
    pub infeasible: Vec<String>,
    pub failures: Vec<String>,
    /// Realized budgets above a bound the mechanism does not promise.
    pub findings: Vec<String>,
}

impl AuditSummary {
    fn check(&mut self, label: impl FnOnce() -> String, m: &ChannelMatrix, declared: f64, exact: bool) {
        self.checked += 1;
        let realized = realized_epsilon(m);
        let ok_budget = if exact {
            (realized - declared).abs() <= BUDGET_TOLERANCE
        } else {
            realized <= declared + BUDGET_TOLERANCE
        };
        if !ok_budget || !m.is_row_stochastic(STOCHASTIC_TOLERANCE) {
            self.failures
                .push(format!("{}: declared {declared}, realized {realized}", label()));
        }
    }
}

/// Audits every single-attribute and longitudinal mechanism over the grid.
pub fn audit_grid() -> AuditSummary {
    let mut s = AuditSummary::default();
    for &eps in &AUDIT_EPS {
        for &k in &AUDIT_KS {
            for kind in OracleKind::ALL {
                let oracle = FrequencyOracle::new(kind, eps, k).unwrap();
                let exact = matches!(kind, OracleKind::Grr | OracleKind::Sue | OracleKind::Oue);
                let seeds: &[u64] = if matches!(kind, OracleKind::Blh | OracleKind::Olh) {
                    &LH_SEEDS
                } else {
                    &[0]
                };
                for &seed in seeds {
                    let m = oracle_channel(&oracle, seed).unwrap();
                    s.check(|| format!("{kind} eps={eps} k={k} seed={seed}"), &m, eps, exact);
                }
            }
            for &frac in &EPS1_FRACTIONS {
                let budget = LongBudget::new(eps, frac * eps).unwrap();
                for kind in long_kinds() {
                    if kind == LongKind::DBitFlipPm {
                        for d in 1..=k {
                            let mech = LongMechanism::new(kind, budget, k, d).unwrap();
                            for buckets in [(0..d).collect::<Vec<_>>(), (k - d..k).rev().collect()] {
                                let m = long_mechanism_channel(&mech, &buckets).unwrap();
                                s.check(
                                    || format!("{kind} eps_perm={eps} k={k} buckets={buckets:?}"),
                                    &m,
                                    eps,
                                    false,
                                );
                            }
                        }
                        continue;
                    }
                    let chain = match LongMechanism::new(kind, budget, k, 1) {
                        Ok(LongMechanism::Chain(c)) => c,
                        Err(LdpError::InfeasibleBudget(_)) => {
                            s.infeasible
                                .push(format!("{kind} eps_perm={eps} eps_1={} k={k}", frac * eps));
                            continue;
                        }
                        other => panic!("unexpected {other:?}"),
                    };
                    let (first, second) = long_channels(&chain).unwrap();
                    let label = |stage: &str| format!("{kind} {stage} eps_perm={eps} eps_1={} k={k}", frac * eps);
                    s.check(|| label("round1"), &first, eps, true);
                    s.check(
                        || label("end-to-end"),
                        &compose(&first, &second).unwrap(),
                        frac * eps,
                        true,
                    );
                }
            }
        }
    }
    s
}

/// Audits the multidimensional solutions on small product domains. RS+FD is
/// held to the amplified budget over all tuple pairs; its budget over pairs
/// differing in one attribute is recorded in `findings` when it exceeds `eps`.
pub fn audit_mdim_grid() -> AuditSummary {
    let mut s = AuditSummary::default();
    for &eps in &AUDIT_EPS {
        for ks in [vec![2, 2], vec![3, 3], vec![2, 2, 2]] {
            for kind in OracleKind::ALL {
                for solution in [Solution::Spl, Solution::Smp] {
                    let proto = MdimProtocol::new(&MdimConfig::new(ks.clone(), eps, solution, kind)).unwrap();
                    let m = mdim_channel(&proto, 7).unwrap();
                    let exact = solution == Solution::Spl
                        && matches!(kind, OracleKind::Grr | OracleKind::Sue | OracleKind::Oue);
                    s.check(|| format!("{solution:?}[{kind}] eps={eps} ks={ks:?}"), &m, eps, exact);
                }
            }
            let rsfd = [
                (OracleKind::Grr, FakeMode::Zero),
                (OracleKind::Sue, FakeMode::Zero),
                (OracleKind::Sue, FakeMode::Rnd),
                (OracleKind::Oue, FakeMode::Zero),
                (OracleKind::Oue, FakeMode::Rnd),
            ];
            for (kind, fake) in rsfd {
                let cfg = MdimConfig::new(ks.clone(), eps, Solution::Rsfd, kind).with_fake_mode(fake);
                let m = mdim_channel(&MdimProtocol::new(&cfg).unwrap(), 0).unwrap();
                s.check(
                    || format!("rsfd[{kind},{fake:?}] eps={eps} ks={ks:?} any-tuple"),
                    &m,
                    amplify(eps, ks.len()).unwrap(),
                    false,
                );
                let one = realized_epsilon_over(&m, |a, b| {
                    digits(a, &ks)
                        .iter()
                        .zip(digits(b, &ks))
                        .filter(|(x, y)| **x != *y)
                        .count()
                        == 1
                });
                if one > eps + BUDGET_TOLERANCE {
                    s.findings.push(format!(
                        "rsfd[{kind},{fake:?}] eps={eps} ks={ks:?} one-attribute: {one}"
                    ));
                }
            }
        }
    }
    s
}

/// `[0.5, 0.2, 0.1, 0.1, 0.1]` at k = 5; other sizes keep 0.5 and 0.2 and share the rest.
pub fn skewed_counts(k: usize, n: usize) -> Vec<usize> {
    assert!(k >= 3 && n.is_multiple_of(10));
    let mut c = vec![n / 2, n / 5];
    let rest = n - n / 2 - n / 5;
    for i in 0..k - 2 {
        c.push(rest / (k - 2) + usize::from(i < rest % (k - 2)));
    }
    c
}

pub fn skewed_dataset(ks: &[usize], n: usize) -> Dataset {
    Dataset::from_counts(&ks.iter().map(|&k| skewed_counts(k, n)).collect::<Vec<_>>()).unwrap()
}

/// Every (task, protocol, solution) combination the harness offers.
pub fn all_combinations(n: usize) -> Vec<ExperimentConfig> {
    let ks = vec![3, 5, 7];
    let mut out = Vec::new();
    for kind in OracleKind::ALL {
        out.push(ExperimentConfig::single(kind, 2.0, n, 5));
        for solution in [Solution::Spl, Solution::Smp] {
            out.push(ExperimentConfig::mdim(solution, kind, 6.0, n, ks.clone()));
        }
    }
    out.push(ExperimentConfig::mdim(
        Solution::Rsfd,
        OracleKind::Grr,
        2.0,
        n,
        ks.clone(),
    ));
    for kind in [OracleKind::Sue, OracleKind::Oue] {
        for fake in [FakeMode::Zero, FakeMode::Rnd] {
            out.push(ExperimentConfig {
                fake_mode: fake,
                ..ExperimentConfig::mdim(Solution::Rsfd, kind, 2.0, n, ks.clone())
            });
        }
    }
    for kind in long_kinds() {
        out.push(ExperimentConfig::long(kind, 4.0, 2.0, n, 5));
        for solution in [Solution::Spl, Solution::Smp] {
            out.push(ExperimentConfig::long_mdim(solution, kind, 12.0, 6.0, n, ks.clone()));
        }
    }
    out
}

pub fn label(cfg: &ExperimentConfig) -> String {
    let mut s = format!("{}/{}", cfg.task, cfg.protocol);
    if let Some(sol) = cfg.solution {
        s += &format!("/{sol:?}");
    }
    if cfg.solution == Some(Solution::Rsfd) && cfg.protocol != Protocol::Oracle(OracleKind::Grr) {
        s += &format!("/{:?}", cfg.fake_mode);
    }
    s
}

/// Looser tolerance for estimators that only see a subgroup of users.
pub fn grouped(cfg: &ExperimentConfig) -> bool {
    cfg.solution == Some(Solution::Smp) || cfg.protocol == Protocol::Long(LongKind::DBitFlipPm)
}

#[derive(Debug)]
pub struct BiasCheck {
    pub label: String,
    /// Largest |mean estimate - truth| over attributes and values.
    pub worst: f64,
    /// `worst` in units of the standard error of the mean.
    pub worst_z: f64,
    pub tolerance: f64,
}

pub fn bias_check(cfg: &ExperimentConfig, ds: &Dataset, tight: f64, loose: f64) -> BiasCheck {
    let res = run_on_dataset(cfg, ds).unwrap();
    let r = res.runs.len() as f64;
    let (mut worst, mut worst_z) = (0.0f64, 0.0f64);
    for (j, truth) in res.true_freq.iter().enumerate() {
        for (v, &t) in truth.iter().enumerate() {
            let mean = res.est_freq[j][v];
            let var = res.runs.iter().map(|run| (run.est[j][v] - mean).powi(2)).sum::<f64>() / (r - 1.0);
            let dev = (mean - t).abs();
            worst = worst.max(dev);
            worst_z = worst_z.max(dev / (var / r).sqrt().max(1e-300));
        }
    }
    BiasCheck {
        label: label(cfg),
        worst,
        worst_z,
        tolerance: if grouped(cfg) { loose } else { tight },
    }
}

/// Mean of the per-value sample variances over values held by nobody,
/// and the closed-form variance at frequency zero.
pub fn zero_frequency_variance(kind: OracleKind, eps: f64, k: usize, n: usize, trials: usize, seed: u64) -> (f64, f64) {
    let mut counts = vec![0; k];
    counts[0] = n;
    let ds = Dataset::from_counts(&[counts]).unwrap();
    let cfg = ExperimentConfig {
        trials,
        seed,
        ..ExperimentConfig::single(kind, eps, n, k)
    };
    let res = run_on_dataset(&cfg, &ds).unwrap();
    let r = res.runs.len() as f64;
    let empirical = (1..k)
        .map(|v| {
            let mean = res.runs.iter().map(|run| run.est[0][v]).sum::<f64>() / r;
            res.runs.iter().map(|run| (run.est[0][v] - mean).powi(2)).sum::<f64>() / (r - 1.0)
        })
        .sum::<f64>()
        / (k - 1) as f64;
    let (p, q) = FrequencyOracle::new(kind, eps, k).unwrap().support_probabilities();
    (empirical, q * (1.0 - q) / (n as f64 * (p - q).powi(2)))
}

/// Pairs of channels that must coincide exactly: a one-attribute
/// multidimensional protocol and its base protocol.
pub fn reduction_pairs(k: usize) -> Vec<(String, ChannelMatrix, ChannelMatrix)> {
    let mut out = Vec::new();
    let eps = 1.0;
    for kind in OracleKind::ALL {
        let base = oracle_channel(&FrequencyOracle::new(kind, eps, k).unwrap(), 5).unwrap();
        for solution in [Solution::Spl, Solution::Smp] {
            let proto = MdimProtocol::new(&MdimConfig::new(vec![k], eps, solution, kind)).unwrap();
            out.push((
                format!("{solution:?}[{kind}]"),
                mdim_channel(&proto, 5).unwrap(),
                base.clone(),
            ));
        }
    }
    let rsfd = [
        (OracleKind::Grr, FakeMode::Zero),
        (OracleKind::Sue, FakeMode::Rnd),
        (OracleKind::Oue, FakeMode::Zero),
    ];
    for (kind, fake) in rsfd {
        let base = oracle_channel(&FrequencyOracle::new(kind, eps, k).unwrap(), 0).unwrap();
        let cfg = MdimConfig::new(vec![k], eps, Solution::Rsfd, kind).with_fake_mode(fake);
        out.push((
            format!("Rsfd[{kind},{fake:?}]"),
            mdim_channel(&MdimProtocol::new(&cfg).unwrap(), 0).unwrap(),
            base,
        ));
    }
    let budget = LongBudget::new(2.0, 1.0).unwrap();
    for kind in long_kinds() {
        let mech = LongMechanism::new(kind, budget, k, 2).unwrap();
        let buckets = vec![vec![1, 2]];
        let base = long_mechanism_channel(&mech, &buckets[0]).unwrap();
        for solution in [LongSolution::LSpl, LongSolution::LSmp] {
            let cfg = LongMdimConfig {
                ks: vec![k],
                budget,
                solution,
                protocol: kind,
                dbit_d: 2,
            };
            let proto = LongMdimProtocol::new(&cfg).unwrap();
            out.push((
                format!("{solution:?}[{kind}]"),
                long_mdim_channel(&proto, &buckets).unwrap(),
                base.clone(),
            ));
        }
    }
    out
}

/// Channel of a bare mechanism, for tests that build parameters directly.
pub fn channel(mech: Mechanism<'_>) -> ChannelMatrix {
    enumerate_channel(mech).unwrap()
}

pub fn chain(kind: LongKind, eps_perm: f64, eps_1: f64, k: usize) -> Option<LongProtocol> {
    match LongMechanism::new(kind, LongBudget::new(eps_perm, eps_1).unwrap(), k, 1) {
        Ok(LongMechanism::Chain(c)) => Some(c),
        _ => None,
    }
}
