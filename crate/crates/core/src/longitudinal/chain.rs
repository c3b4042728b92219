//! Two-round chains: a memoized first round at `eps_perm` followed by a fresh
//! second round tuned so that a single report satisfies `eps_1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LongBudget;
use crate::error::{check_domain, LdpError, Result};
use crate::oracles::{ue_epsilon, GrrParams, UeParams, UeVariant};

/// Tolerance on the composed budget accepted at construction time.
pub const BUDGET_TOLERANCE: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// L-GRR: GRR in both rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongGrrParams {
    pub k: usize,
    pub budget: LongBudget,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    /// End-to-end probability of reporting the true value.
    pub p_star: f64,
    /// End-to-end probability of reporting one specific other value.
    pub q_star: f64,
}

impl LongGrrParams {
    /// Chain with explicit keep probabilities for both rounds. Budgets are the realized ones.
    pub fn from_probabilities(k: usize, p1: f64, p2: f64) -> Result<Self> {
        check_domain(k)?;
        let km1 = (k - 1) as f64;
        let (q1, q2) = ((1.0 - p1) / km1, (1.0 - p2) / km1);
        let p_star = p1 * p2 + (1.0 - p1) * q2;
        let q_star = q1 * p2 + p1 * q2 + (k as f64 - 2.0) * q1 * q2;
        if !(p1 > q1 && p2 > q2 && p1 <= 1.0 && p2 <= 1.0 && p_star > q_star) {
            return Err(LdpError::DegenerateChannel(p_star - q_star));
        }
        let budget = LongBudget {
            eps_perm: (p1 / q1).ln(),
            eps_1: (p_star / q_star).ln(),
        };
        Ok(Self {
            k,
            budget,
            p1,
            q1,
            p2,
            q2,
            p_star,
            q_star,
        })
    }

    pub fn round1(&self) -> GrrParams {
        GrrParams {
            k: self.k,
            eps: self.budget.eps_perm,
            p: self.p1,
            q: self.q1,
        }
    }

    pub fn round2(&self) -> GrrParams {
        GrrParams {
            k: self.k,
            eps: (self.p2 / self.q2).ln(),
            p: self.p2,
            q: self.q2,
        }
    }
}

/// Solves the round-2 GRR keep probability so that the composed channel has
/// likelihood ratio exactly `e^{eps_1}`.
pub fn solve_l_grr(budget: LongBudget, k: usize) -> Result<LongGrrParams> {
    check_domain(k)?;
    let r1 = GrrParams::new(budget.eps_perm, k)?;
    let (p1, q1) = (r1.p, r1.q);
    let e1 = budget.eps_1.exp();
    let km1 = (k - 1) as f64;
    let p2 = (e1 * (p1 + (k as f64 - 2.0) * q1) - km1 * q1) / ((p1 - q1) * (km1 + e1));
    if !(p2 > 0.0 && p2 <= 1.0) {
        return Err(LdpError::InfeasibleBudget(format!(
            "L-GRR round-2 keep probability {p2} outside (0, 1]"
        )));
    }
    let mut params = LongGrrParams::from_probabilities(k, p1, p2)
        .map_err(|_| LdpError::InfeasibleBudget(format!("L-GRR composed channel is degenerate (p2 = {p2})")))?;
    let realized = params.budget.eps_1;
    if (realized - budget.eps_1).abs() > BUDGET_TOLERANCE {
        return Err(LdpError::InfeasibleBudget(format!(
            "L-GRR composed budget {realized} differs from {}",
            budget.eps_1
        )));
    }
    params.budget = budget;
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LongUeVariant {
    /// SUE then SUE (basic RAPPOR).
    #[serde(rename = "l-sue")]
    LSue,
    /// OUE then OUE.
    #[serde(rename = "l-oue")]
    LOue,
    /// SUE then OUE.
    #[serde(rename = "l-soue")]
    LSoue,
    /// OUE then SUE.
    #[serde(rename = "l-osue")]
    LOsue,
}

impl LongUeVariant {
    pub const ALL: [LongUeVariant; 4] = [
        LongUeVariant::LSue,
        LongUeVariant::LOue,
        LongUeVariant::LSoue,
        LongUeVariant::LOsue,
    ];

    pub fn rounds(self) -> (UeVariant, UeVariant) {
        match self {
            LongUeVariant::LSue => (UeVariant::Sue, UeVariant::Sue),
            LongUeVariant::LOue => (UeVariant::Oue, UeVariant::Oue),
            LongUeVariant::LSoue => (UeVariant::Sue, UeVariant::Oue),
            LongUeVariant::LOsue => (UeVariant::Oue, UeVariant::Sue),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LongUeVariant::LSue => "l-sue",
            LongUeVariant::LOue => "l-oue",
            LongUeVariant::LSoue => "l-soue",
            LongUeVariant::LOsue => "l-osue",
        }
    }
}

impl fmt::Display for LongUeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LongUeVariant {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        LongUeVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| LdpError::InvalidConfig(format!("unknown L-UE variant {s:?}")))
    }
}

/// Chained unary encoding: per-bit probabilities for both rounds and end to end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongUeParams {
    pub variant: LongUeVariant,
    pub budget: LongBudget,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub p_star: f64,
    pub q_star: f64,
}

fn compose_bits(p1: f64, q1: f64, p2: f64, q2: f64) -> (f64, f64) {
    (p1 * p2 + (1.0 - p1) * q2, q1 * p2 + (1.0 - q1) * q2)
}

impl LongUeParams {
    /// Chain with explicit per-bit probabilities. Budgets are the realized ones.
    pub fn from_probabilities(variant: LongUeVariant, p1: f64, q1: f64, p2: f64, q2: f64) -> Result<Self> {
        let ok = |p: f64, q: f64| (0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q) && p > q;
        let (p_star, q_star) = compose_bits(p1, q1, p2, q2);
        if !(ok(p1, q1) && ok(p2, q2)) {
            return Err(LdpError::DegenerateChannel(p_star - q_star));
        }
        let budget = LongBudget {
            eps_perm: ue_epsilon(p1, q1),
            eps_1: ue_epsilon(p_star, q_star),
        };
        Ok(Self {
            variant,
            budget,
            p1,
            q1,
            p2,
            q2,
            p_star,
            q_star,
        })
    }

    pub fn round1(&self) -> UeParams {
        UeParams {
            variant: self.variant.rounds().0,
            eps: self.budget.eps_perm,
            p: self.p1,
            q: self.q1,
        }
    }

    pub fn round2(&self) -> UeParams {
        UeParams {
            variant: self.variant.rounds().1,
            eps: ue_epsilon(self.p2, self.q2),
            p: self.p2,
            q: self.q2,
        }
    }

    /// `q*(1-q*)/(p*-q*)^2`, the per-user variance factor of the estimator near zero frequency.
    pub fn variance_factor(&self) -> f64 {
        self.q_star * (1.0 - self.q_star) / (self.p_star - self.q_star).powi(2)
    }
}

/// Round-2 probabilities as a function of the free parameter.
fn round2_of(family: UeVariant, x: f64) -> (f64, f64) {
    match family {
        UeVariant::Sue => (x, 1.0 - x),
        UeVariant::Oue => (0.5, x),
    }
}

/// Solves the free round-2 parameter by bisection so that the composed per-bit
/// channel satisfies `eps_1` exactly.
///
/// Symmetric second rounds search `p2` in `[1/2, 1]`; optimized second rounds
/// fix `p2 = 1/2` and search `q2` in `[0, 1/2]`. The composed budget is
/// monotone in the free parameter over both brackets.
pub fn solve_l_ue(budget: LongBudget, variant: LongUeVariant) -> Result<LongUeParams> {
    let (first, second) = variant.rounds();
    let r1 = UeParams::new(budget.eps_perm, first)?;
    let (p1, q1) = (r1.p, r1.q);
    let composed = |x: f64| {
        let (p2, q2) = round2_of(second, x);
        let (ps, qs) = compose_bits(p1, q1, p2, q2);
        ue_epsilon(ps, qs)
    };
    // `lo` is the no-privacy-loss end (eps = 0), `hi` the least noisy end.
    let (mut lo, mut hi) = match second {
        UeVariant::Sue => (0.5, 1.0),
        UeVariant::Oue => (0.5, 0.0),
    };
    let max_eps = composed(hi);
    // Negated so NaN budgets are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(budget.eps_1 < max_eps) {
        return Err(LdpError::InfeasibleBudget(format!(
            "{variant} reaches at most eps_1 = {max_eps:.6} at eps_perm = {}",
            budget.eps_perm
        )));
    }
    for _ in 0..BISECTION_MAX_ITER {
        if (hi - lo).abs() <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if composed(mid) < budget.eps_1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let (p2, q2) = round2_of(second, x);
    let mut params = LongUeParams::from_probabilities(variant, p1, q1, p2, q2)
        .map_err(|e| LdpError::InfeasibleBudget(e.to_string()))?;
    if (params.budget.eps_1 - budget.eps_1).abs() > BUDGET_TOLERANCE {
        return Err(LdpError::InfeasibleBudget(format!(
            "bisection converged to eps_1 = {} instead of {}",
            params.budget.eps_1, budget.eps_1
        )));
    }
    params.budget = budget;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(eps_perm: f64, eps_1: f64) -> LongBudget {
        LongBudget::new(eps_perm, eps_1).unwrap()
    }

    #[test]
    fn grr_fixed_point_at_equal_budgets() {
        // eps_1 = eps_perm is rejected as input, but the closed form gives p2 = 1 there.
        for k in [2usize, 3, 7] {
            let r1 = GrrParams::new(1.3, k).unwrap();
            let e1 = 1.3f64.exp();
            let km1 = (k - 1) as f64;
            let p2 = (e1 * (r1.p + (k as f64 - 2.0) * r1.q) - km1 * r1.q) / ((r1.p - r1.q) * (km1 + e1));
            assert!((p2 - 1.0).abs() < 1e-12, "k={k}: {p2}");
        }
        assert!(matches!(LongBudget::new(1.3, 1.3), Err(LdpError::InvalidBudget(_))));
    }

    /// Independent route: bisection on the ratio of the explicitly composed
    /// 2x2 channel, without the closed form.
    #[test]
    fn grr_binary_matches_bisection() {
        let l = solve_l_grr(budget(2.0, 1.0), 2).unwrap();
        let r1 = GrrParams::new(2.0, 2).unwrap();
        let ratio = |p2: f64| {
            let q2 = 1.0 - p2;
            let diag = r1.p * p2 + r1.q * q2;
            let off = r1.p * q2 + r1.q * p2;
            (diag / off).ln()
        };
        let (mut lo, mut hi) = (0.5, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((l.p2 - lo).abs() < 1e-12, "{} vs {lo}", l.p2);
        assert!((ratio(l.p2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grr_k5_ratio() {
        let l = solve_l_grr(budget(2.0, 1.0), 5).unwrap();
        assert!((l.p_star / l.q_star - 1f64.exp()).abs() < 1e-9);
        assert!((l.p_star + 4.0 * l.q_star - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grr_monotone_in_eps1() {
        let mut prev = 0.0;
        for i in 1..40 {
            let l = solve_l_grr(budget(3.0, 3.0 * i as f64 / 40.0), 4).unwrap();
            assert!(l.p2 > prev);
            prev = l.p2;
        }
    }

    #[test]
    fn ue_identity_holds() {
        for variant in LongUeVariant::ALL {
            let l = solve_l_ue(budget(2.0, 1.0), variant).unwrap();
            assert!((ue_epsilon(l.p_star, l.q_star) - 1.0).abs() < 1e-9, "{variant}");
            assert!((ue_epsilon(l.p1, l.q1) - 2.0).abs() < 1e-9, "{variant}");
        }
    }

    #[test]
    fn osue_beats_sue() {
        let sue = solve_l_ue(budget(2.0, 1.0), LongUeVariant::LSue).unwrap();
        let osue = solve_l_ue(budget(2.0, 1.0), LongUeVariant::LOsue).unwrap();
        assert!(osue.variance_factor() <= sue.variance_factor());
    }

    #[test]
    fn symmetric_second_round_limit() {
        for variant in [LongUeVariant::LSue, LongUeVariant::LOsue] {
            let l = solve_l_ue(budget(2.0, 2.0 - 1e-7), variant).unwrap();
            assert!(l.p2 > 1.0 - 1e-5, "{variant}: p2 = {}", l.p2);
        }
    }

    #[test]
    fn optimized_second_round_limit() {
        // With p2 fixed at 1/2 the chain tops out below eps_perm; approaching
        // that ceiling drives q2 to zero.
        for variant in [LongUeVariant::LOue, LongUeVariant::LSoue] {
            let r1 = UeParams::new(2.0, variant.rounds().0).unwrap();
            let (ps, qs) = compose_bits(r1.p, r1.q, 0.5, 0.0);
            let ceiling = ue_epsilon(ps, qs);
            assert!(ceiling < 2.0);
            let l = solve_l_ue(budget(2.0, ceiling - 1e-7), variant).unwrap();
            assert!(l.q2 < 1e-5, "{variant}: q2 = {}", l.q2);
            assert!(matches!(
                solve_l_ue(budget(2.0, ceiling + 1e-3), variant),
                Err(LdpError::InfeasibleBudget(_))
            ));
        }
    }

    #[test]
    fn ue_monotone_in_eps1() {
        for variant in LongUeVariant::ALL {
            let mut prev: Option<LongUeParams> = None;
            for i in 1..20 {
                let Ok(l) = solve_l_ue(budget(4.0, 4.0 * i as f64 / 20.0), variant) else {
                    break;
                };
                if let Some(p) = prev {
                    // Less noise in round two as eps_1 grows.
                    assert!(l.p2 - l.q2 > p.p2 - p.q2, "{variant}");
                    assert!(l.budget.eps_1 > p.budget.eps_1);
                }
                prev = Some(l);
            }
            assert!(prev.is_some());
        }
    }
}
