//! Exhaustive lattice search used as an independent check on the LP solvers.

use super::{check_alpha, r_constraint, theta_constraint, BetaProfile, RateResult};
use crate::catalog::SubgraphPattern;
use crate::error::{Error, Result};

/// Maximum number of search-tree nodes a single oracle call may visit.
pub const GRID_BUDGET: u64 = 1_000_000_000;

struct Search<'a> {
    k: usize,
    g: usize,
    alpha: f64,
    gamma: f64,
    theta: f64,
    /// Neighbors of each vertex with a smaller index.
    back: Vec<Vec<usize>>,
    beta: Vec<f64>,
    best: Option<(f64, Vec<f64>)>,
    visited: u64,
    stop_at_first: bool,
    _h: &'a SubgraphPattern,
}

impl Search<'_> {
    fn vertex_term(&self, b: f64) -> f64 {
        (1.0 - self.alpha * b).max(self.theta)
    }

    /// Largest `β` a single remaining vertex may take without dropping the
    /// objective to the incumbent.
    fn cap(&self, objective: f64) -> f64 {
        match &self.best {
            Some((v, _)) if !self.stop_at_first => ((1.0 + objective - v) / self.alpha).min(1.0),
            _ => 1.0,
        }
    }

    /// Contribution of vertex `j` at `β_j = c` to the constraint, counting
    /// only edges to the assigned prefix `0..depth`.
    fn partial_term(&self, j: usize, depth: usize, c: f64) -> f64 {
        let mut v = self.vertex_term(c);
        for &i in &self.back[j] {
            if i < depth {
                v += (self.beta[i] + c - 1.0).min(0.0);
            }
        }
        v
    }

    /// Breakpoints of [`Self::partial_term`] in `[0, cap]`, ascending.
    fn breakpoints(&self, j: usize, depth: usize, cap: f64) -> Vec<f64> {
        let mut pts = vec![0.0, cap, 1.0 / self.alpha];
        if self.theta > 0.0 {
            pts.push((1.0 - self.theta) / self.alpha);
        }
        pts.extend(self.back[j].iter().filter(|&&i| i < depth).map(|&i| 1.0 - self.beta[i]));
        pts.retain(|&c| (0.0..=cap).contains(&c));
        pts.sort_unstable_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// Upper bound on what an unassigned vertex `j` can add to the
    /// constraint given the assigned prefix. The term is piecewise linear in
    /// `β_j`, so the maximum sits at a breakpoint.
    fn free_vertex_bound(&self, j: usize, depth: usize, cap: f64) -> f64 {
        self.breakpoints(j, depth, cap)
            .into_iter()
            .map(|c| self.partial_term(j, depth, c))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn over_budget(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > GRID_BUDGET {
            return Err(Error::param(format!(
                "grid search exceeded {GRID_BUDGET} nodes (k={}, G={})",
                self.k, self.g
            )));
        }
        Ok(())
    }

    fn record(&mut self, objective: f64) -> bool {
        self.best = Some((objective, self.beta.clone()));
        self.stop_at_first || objective >= 0.0
    }

    /// The last coordinate: the smallest feasible lattice value is also the
    /// best one, so it is located segment by segment instead of scanned.
    fn last_vertex(&mut self, objective: f64, constraint: f64) -> Result<bool> {
        let j = self.k - 1;
        let cap = self.cap(objective);
        let need = self.gamma - 1e-12 - constraint;
        let g = self.g as f64;
        let pts = self.breakpoints(j, j, cap);
        for w in pts.windows(2).chain(std::iter::once(&[pts[pts.len() - 1], pts[pts.len() - 1]][..])) {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (self.partial_term(j, j, p), self.partial_term(j, j, q));
            let lo = if fp >= need {
                p
            } else if fq >= need && fq > fp {
                p + (need - fp) / (fq - fp) * (q - p)
            } else {
                continue;
            };
            let first = ((lo * g) - 1e-9).ceil().max(0.0) as usize;
            let last = ((q * g) + 1e-9).floor().min(g) as usize;
            for step in first.saturating_sub(1)..=last.min(first + 1) {
                self.over_budget()?;
                let c = step as f64 / g;
                if self.partial_term(j, j, c) < need {
                    continue;
                }
                let obj = objective + (1.0 - self.alpha * c).min(0.0);
                if self.best.as_ref().is_some_and(|(v, _)| obj <= *v + 1e-12) {
                    return Ok(false);
                }
                self.beta[j] = c;
                return Ok(self.record(obj));
            }
        }
        Ok(false)
    }

    fn dfs(&mut self, depth: usize, objective: f64, constraint: f64) -> Result<bool> {
        self.over_budget()?;
        if depth == self.k - 1 {
            return self.last_vertex(objective, constraint);
        }
        for step in 0..=self.g {
            let b = step as f64 / self.g as f64;
            let obj = objective + (1.0 - self.alpha * b).min(0.0);
            if self.best.as_ref().is_some_and(|(v, _)| obj <= *v + 1e-12) {
                // the objective only decreases with larger β
                break;
            }
            self.beta[depth] = b;
            let mut con = constraint + self.vertex_term(b);
            for &i in &self.back[depth] {
                con += (self.beta[i] + b - 1.0).min(0.0);
            }
            let cap = self.cap(obj);
            let bound: f64 = (depth + 1..self.k).map(|j| self.free_vertex_bound(j, depth + 1, cap)).sum();
            if con + bound < self.gamma - 1e-12 {
                continue;
            }
            if self.dfs(depth + 1, obj, con)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn search<'a>(h: &'a SubgraphPattern, alpha: f64, gamma: f64, g: usize, theta: f64, stop_at_first: bool) -> Search<'a> {
    let k = h.k();
    let mut back = vec![Vec::new(); k];
    for &(u, v) in h.edges() {
        let (a, b) = (u.min(v), u.max(v));
        back[b].push(a);
    }
    Search {
        k,
        g,
        alpha,
        gamma,
        theta,
        back,
        beta: vec![0.0; k],
        best: None,
        visited: 0,
        stop_at_first,
        _h: h,
    }
}

/// Best `R(H)` over the lattice `{0, 1/G, …, 1}^k`, with the
/// lexicographically smallest optimal lattice point. Within `k(α+2)/G` of
/// the continuous optimum when the feasible set has interior near it.
pub fn grid_oracle_r(h: &SubgraphPattern, alpha: f64, gamma: f64, g: usize) -> Result<RateResult> {
    check_alpha(alpha)?;
    if g < 10 {
        return Err(Error::param(format!("grid resolution must be at least 10, got {g}")));
    }
    let mut s = search(h, alpha, gamma, g, 0.0, false);
    s.dfs(0, 0.0, 0.0)?;
    Ok(match s.best {
        None => RateResult::infeasible(),
        Some((value, beta)) => RateResult {
            value: Some(value),
            pattern: beta.iter().map(|b| u8::from(1.0 - alpha * b >= -1e-12)).collect(),
            tight: (r_constraint(h.edges(), &beta, alpha) - gamma).abs() <= 1e-9,
            beta: Some(BetaProfile::from_solver(beta)),
            feasible: true,
            heuristic: false,
        },
    })
}

/// Smallest lattice `θ ∈ {0, 1/G, …, 1}` for which some lattice `β` meets
/// `Σ max(1 - αβ_i, θ) + Σ_E min(β_i + β_j - 1, 0) ≥ γ`.
pub fn grid_oracle_theta(h: &SubgraphPattern, alpha: f64, gamma: f64, g: usize) -> Result<RateResult> {
    check_alpha(alpha)?;
    if g < 10 {
        return Err(Error::param(format!("grid resolution must be at least 10, got {g}")));
    }
    for step in 0..=g {
        let theta = step as f64 / g as f64;
        let mut s = search(h, alpha, gamma, g, theta, true);
        s.dfs(0, 0.0, 0.0)?;
        if let Some((_, beta)) = s.best {
            return Ok(RateResult {
                value: Some(theta),
                pattern: beta.iter().map(|b| u8::from(1.0 - alpha * b >= theta)).collect(),
                tight: (theta_constraint(h.edges(), &beta, alpha, theta) - gamma).abs() <= 1e-9,
                beta: Some(BetaProfile::from_solver(beta)),
                feasible: true,
                heuristic: false,
            });
        }
    }
    Ok(RateResult::infeasible())
}
