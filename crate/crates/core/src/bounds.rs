//! Closed-form approximation ratios and the comparisons between them.
//!
//! Every ratio multiplies `v(SDP) ≤ 0`, so larger is better.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facered::r0_of;
use crate::rounding::ratio_bound;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("gamma = {0} must lie in [0, 1)")]
    Gamma(f64),
    #[error("m and n must be positive")]
    EmptyDimension,
    #[error("constraint ranks must be nonempty and positive")]
    Ranks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub m: usize,
    pub n: usize,
    pub gamma: f64,
    pub ranks: Vec<usize>,
    pub r0: usize,
    pub r_tilde: usize,
    /// `(1−γ)²/(√m+γ)²`
    pub tseng: f64,
    /// `(1−γ)²/(√r̃+γ)²`
    pub new_ratio: f64,
    /// `1/(2 ln(2(m+1)μ))`, `μ = min{m+1, maxₖ rankₖ}`
    pub nv: f64,
    /// Same with `μ̄ = min{r0+1, maxₖ rankₖ}`.
    pub nv_improved: f64,
    /// `(1−γ)²/(4 ln(4·m·n·maxₖ rankₖ))`
    pub ye: f64,
    /// `(1−γ)²/(4 ln(4·m·r̃·r̄))`, `r̄ = min{r0, maxₖ rankₖ}`
    pub ye_improved: f64,
}

impl BoundReport {
    /// `new_ratio / tseng = (√m+γ)²/(√r̃+γ)²`
    pub fn improvement(&self) -> f64 {
        self.new_ratio / self.tseng
    }
}

fn nv_value(m: usize, mu: usize) -> f64 {
    1.0 / (2.0 * (2.0 * (m as f64 + 1.0) * mu as f64).ln())
}

fn ye_value(gamma: f64, arg: f64) -> f64 {
    (1.0 - gamma).powi(2) / (4.0 * (4.0 * arg).ln())
}

pub fn bound_values(m: usize, n: usize, gamma: f64, ranks: &[usize]) -> Result<BoundReport, BoundError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(BoundError::Gamma(gamma));
    }
    if m == 0 || n == 0 {
        return Err(BoundError::EmptyDimension);
    }
    if ranks.is_empty() || ranks.contains(&0) {
        return Err(BoundError::Ranks);
    }
    let max_rank = *ranks.iter().max().unwrap();
    let r0 = r0_of(m);
    let r_tilde = r0.min(n + 1);
    let r_bar = r0.min(max_rank);
    Ok(BoundReport {
        m,
        n,
        gamma,
        ranks: ranks.to_vec(),
        r0,
        r_tilde,
        tseng: ratio_bound(gamma, m),
        new_ratio: ratio_bound(gamma, r_tilde),
        nv: nv_value(m, (m + 1).min(max_rank)),
        nv_improved: nv_value(m, (r0 + 1).min(max_rank)),
        ye: ye_value(gamma, (m * n * max_rank) as f64),
        ye_improved: ye_value(gamma, (m * r_tilde * r_bar) as f64),
    })
}

/// Choice of `μ` in the comparison against `1/(2 ln(2(m+1)μ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuRule {
    /// `μ = m + 1`: some `FᵏᵀFᵏ` has rank at least `m + 1`.
    MPlusOne,
    /// `μ = min{m+1, n}`: a ball constraint in dimension `n`.
    Dimension(usize),
    /// `μ = min{m+1, max rank}` for a fixed largest constraint rank.
    MaxRank(usize),
}

impl MuRule {
    pub fn mu(&self, m: usize) -> usize {
        match *self {
            MuRule::MPlusOne => m + 1,
            MuRule::Dimension(k) | MuRule::MaxRank(k) => (m + 1).min(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub m: usize,
    pub r0: usize,
    pub new_ratio: f64,
    pub nv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub rows: Vec<CrossoverRow>,
    /// Largest `m` such that `new_ratio > nv` for every `3 ≤ m' ≤ m`.
    pub crossover: Option<usize>,
    /// Every `m ≥ 3` in the sweep where `new_ratio ≤ nv`.
    pub failures: Vec<usize>,
}

/// Sweeps `m = 1..=m_max` comparing `(1−γ)²/(√r0+γ)²` against the `μ` rule.
/// The dimension is taken large enough that `r̃ = r0`.
pub fn crossover_sweep(m_max: usize, gamma: f64, rule: MuRule) -> Result<CrossoverReport, BoundError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(BoundError::Gamma(gamma));
    }
    if m_max < 2 {
        return Err(BoundError::EmptyDimension);
    }
    let rows: Vec<CrossoverRow> = (1..=m_max)
        .map(|m| {
            let r0 = r0_of(m);
            CrossoverRow {
                m,
                r0,
                new_ratio: ratio_bound(gamma, r0),
                nv: nv_value(m, rule.mu(m)),
            }
        })
        .collect();
    let failures: Vec<usize> = rows
        .iter()
        .filter(|r| r.m >= 3 && r.new_ratio <= r.nv)
        .map(|r| r.m)
        .collect();
    let crossover = match failures.first() {
        Some(&3) => None,
        Some(&f) => Some(f - 1),
        None if m_max >= 3 => Some(m_max),
        None => None,
    };
    Ok(CrossoverReport {
        rows,
        crossover,
        failures,
    })
}

pub const CSV_HEADER: &str = "m,r0,tseng,new,nv,nv_improved,ye_improved";

pub fn csv_row(r: &BoundReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.m, r.r0, r.tseng, r.new_ratio, r.nv, r.nv_improved, r.ye_improved
    )
}

pub fn to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}
