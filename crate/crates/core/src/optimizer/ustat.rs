use std::fmt;
use std::sync::Arc;

use super::rates::solve_r_edges;
use super::{check_alpha, edge_sum, r_objective, BetaProfile, RateResult};
use crate::error::{Error, Result};

type Exponent = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A user-supplied exponent `g(β_1, …, β_k)` replacing the edge sum in the
/// rate program, with an evaluation budget.
#[derive(Clone)]
pub struct ExponentFunction {
    func: Arc<Exponent>,
    concave: bool,
    budget: u64,
    edges: Option<Vec<(usize, usize)>>,
}

impl fmt::Debug for ExponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExponentFunction")
            .field("concave", &self.concave)
            .field("budget", &self.budget)
            .field("edges", &self.edges)
            .finish()
    }
}

impl ExponentFunction {
    pub fn new<F>(func: F, budget: u64) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ExponentFunction {
            func: Arc::new(func),
            concave: false,
            budget,
            edges: None,
        }
    }

    /// `g(β) = Σ_E min(β_i + β_j - 1, 0)`; solved exactly.
    pub fn edge_separable(edges: Vec<(usize, usize)>) -> Self {
        let e = edges.clone();
        ExponentFunction {
            func: Arc::new(move |beta: &[f64]| edge_sum(&e, beta)),
            concave: true,
            budget: u64::MAX,
            edges: Some(edges),
        }
    }

    pub fn with_concave(mut self, concave: bool) -> Self {
        self.concave = concave;
        self
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn eval(&self, beta: &[f64]) -> f64 {
        (self.func)(beta)
    }
}

/// `max Σ min(1 - αβ_i, 0)` subject to `Σ max(1 - αβ_i, 0) + g(β) ≥ γ`.
///
/// Edge-separable exponents go through the exact solver. Anything else gets
/// a lattice scan followed by coordinate refinement and is marked
/// heuristic.
pub fn solve_r_ustat(g: &ExponentFunction, k: usize, alpha: f64, gamma: f64) -> Result<RateResult> {
    check_alpha(alpha)?;
    if k == 0 || k > crate::catalog::MAX_PATTERN_VERTICES {
        return Err(Error::param(format!("k must be in 1..=8, got {k}")));
    }
    if let Some(edges) = &g.edges {
        if edges.iter().any(|&(i, j)| i >= k || j >= k || i == j) {
            return Err(Error::param("edge list does not fit k vertices"));
        }
        return Ok(solve_r_edges(k, edges, alpha, gamma));
    }

    let mut evals = 0u64;
    let budget = g.budget.max(2);
    let feasible_value = |beta: &[f64], evals: &mut u64| -> Option<f64> {
        *evals += 1;
        let c: f64 = beta.iter().map(|b| (1.0 - alpha * b).max(0.0)).sum::<f64>() + g.eval(beta);
        (c >= gamma).then(|| r_objective(beta, alpha))
    };

    // lattice scan on at most half the budget
    let mut res = 1usize;
    while ((res + 2) as f64).powi(k as i32) <= budget as f64 / 2.0 && res < 1_000 {
        res += 1;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; k];
    'scan: loop {
        let beta: Vec<f64> = idx.iter().map(|&i| i as f64 / res as f64).collect();
        if let Some(v) = feasible_value(&beta, &mut evals) {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, beta));
            }
        }
        for d in (0..k).rev() {
            if idx[d] < res {
                idx[d] += 1;
                continue 'scan;
            }
            idx[d] = 0;
        }
        break;
    }

    if let Some((mut value, mut beta)) = best.take() {
        let mut step = 1.0 / res as f64;
        while step > 1e-9 && evals < budget {
            let mut improved = false;
            for i in 0..k {
                for dir in [-1.0, 1.0] {
                    let mut cand = beta.clone();
                    cand[i] = (cand[i] + dir * step).clamp(0.0, 1.0);
                    if let Some(v) = feasible_value(&cand, &mut evals) {
                        if v > value + 1e-15 {
                            value = v;
                            beta = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = Some((value, beta));
    }

    Ok(match best {
        None => RateResult {
            heuristic: true,
            ..RateResult::infeasible()
        },
        Some((value, beta)) => {
            let c: f64 = beta.iter().map(|b| (1.0 - alpha * b).max(0.0)).sum::<f64>() + g.eval(&beta);
            RateResult {
                value: Some(value),
                pattern: beta.iter().map(|b| u8::from(1.0 - alpha * b >= 0.0)).collect(),
                tight: (c - gamma).abs() <= 1e-6,
                beta: Some(BetaProfile::from_solver(beta)),
                feasible: true,
                heuristic: true,
            }
        }
    })
}
