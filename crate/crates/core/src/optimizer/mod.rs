//! Exponent programs over weight profiles `β ∈ [0,1]^k`.
//!
//! A vertex of weight `n^{β}` appears about `n^{1-αβ}` times, and a pair of
//! such vertices is joined with probability `n^{min(β_i+β_j-1, 0)}`. The
//! programs here maximize or minimize piecewise-linear functions of `β`:
//!
//! * [`solve_b`]: the typical count exponent `B(H)`;
//! * [`solve_r`]: the rate `R(H)` of the event `N(H) > n^γ`;
//! * [`solve_exponential_theta`]: the number `n^θ` of planted hubs needed
//!   when `γ` is out of reach of polynomial deviations;
//! * [`solve_r_ustat`]: the same rate for an arbitrary exponent function.
//!
//! The piecewise parts are handled by enumerating which vertices sit below
//! `1/α` and solving one linear program per assignment.

mod grid;
mod rates;
pub(crate) mod simplex;
mod ustat;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{grid_oracle_r, grid_oracle_theta, GRID_BUDGET};
pub use rates::{check_assumption1, solve_b, solve_exponential_theta, solve_r, typical_threshold};
pub use ustat::{solve_r_ustat, ExponentFunction};

/// Weight exponents, one per pattern vertex, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BetaProfile(Vec<f64>);

impl BetaProfile {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if let Some(b) = beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::param(format!("beta components must lie in [0, 1], found {b}")));
        }
        Ok(BetaProfile(beta))
    }

    /// Clamps tiny numerical excursions outside `[0, 1]`.
    pub(crate) fn from_solver(beta: Vec<f64>) -> Self {
        BetaProfile(beta.into_iter().map(|b| b.clamp(0.0, 1.0)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Vertices with `β_i > 1/α`, i.e. hubs heavier than the typical maximum.
    pub fn hubs(&self, alpha: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 1.0 / alpha + 1e-9).collect()
    }
}

/// Outcome of one of the exponent programs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// Optimal objective; absent when infeasible.
    pub value: Option<f64>,
    pub beta: Option<BetaProfile>,
    pub feasible: bool,
    /// Per-vertex branch indicators of the winning assignment.
    pub pattern: Vec<u8>,
    /// Whether the `≥ γ` constraint is active at the optimum.
    pub tight: bool,
    /// Set when the result comes from a search without optimality
    /// guarantee.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub heuristic: bool,
}

impl RateResult {
    pub(crate) fn infeasible() -> Self {
        RateResult {
            value: None,
            beta: None,
            feasible: false,
            pattern: Vec::new(),
            tight: false,
            heuristic: false,
        }
    }
}

/// `Σ (1 - αβ_i) + Σ_E min(β_i + β_j - 1, 0)`.
pub fn b_objective(edges: &[(usize, usize)], beta: &[f64], alpha: f64) -> f64 {
    beta.iter().map(|b| 1.0 - alpha * b).sum::<f64>() + edge_sum(edges, beta)
}

/// `Σ min(1 - αβ_i, 0)`.
pub fn r_objective(beta: &[f64], alpha: f64) -> f64 {
    beta.iter().map(|b| (1.0 - alpha * b).min(0.0)).sum()
}

/// `Σ max(1 - αβ_i, 0) + Σ_E min(β_i + β_j - 1, 0)`.
pub fn r_constraint(edges: &[(usize, usize)], beta: &[f64], alpha: f64) -> f64 {
    beta.iter().map(|b| (1.0 - alpha * b).max(0.0)).sum::<f64>() + edge_sum(edges, beta)
}

/// `Σ max(1 - αβ_i, θ) + Σ_E min(β_i + β_j - 1, 0)`.
pub fn theta_constraint(edges: &[(usize, usize)], beta: &[f64], alpha: f64, theta: f64) -> f64 {
    beta.iter().map(|b| (1.0 - alpha * b).max(theta)).sum::<f64>() + edge_sum(edges, beta)
}

pub(crate) fn edge_sum(edges: &[(usize, usize)], beta: &[f64]) -> f64 {
    edges.iter().map(|&(i, j)| (beta[i] + beta[j] - 1.0).min(0.0)).sum()
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    crate::model::PowerLawParams::new(alpha).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_result_json_shape() {
        let r = RateResult {
            value: Some(-0.5),
            beta: Some(BetaProfile::new(vec![0.0, 0.0, 1.0]).unwrap()),
            feasible: true,
            pattern: vec![1, 1, 0],
            tight: true,
            heuristic: false,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys.len(), 5);
        for key in ["value", "beta", "feasible", "pattern", "tight"] {
            assert!(keys.contains(&key));
        }
        assert_eq!(v["beta"], serde_json::json!([0.0, 0.0, 1.0]));
        let back: RateResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        assert!(BetaProfile::new(vec![1.2]).is_err());
    }

    #[test]
    fn raw_functions() {
        let tri = [(0, 1), (0, 2), (1, 2)];
        assert_eq!(b_objective(&tri, &[0.5; 3], 1.5), 0.75);
        assert_eq!(r_objective(&[0.0, 0.0, 1.0], 1.5), -0.5);
        assert_eq!(r_constraint(&tri, &[0.0, 0.0, 1.0], 1.5), 1.0);
        assert_eq!(theta_constraint(&tri, &[0.0, 1.0, 1.0], 1.5, 0.5), 2.0);
    }
}
