use rayon::prelude::*;

use super::simplex::{LinearProgram, LpOutcome, Sense};
use super::{check_alpha, r_constraint, theta_constraint, BetaProfile, RateResult};
use crate::catalog::SubgraphPattern;
use crate::error::{Error, Result};

/// Two optimal values closer than this count as a tie.
const TIE_TOL: f64 = 1e-9;
const STRICT_TOL: f64 = 1e-9;
const TIGHT_TOL: f64 = 1e-7;

/// One linear program together with the linear "goal" it optimizes, so the
/// optimum can be re-imposed as a constraint for tie-breaking.
#[derive(Clone)]
pub(crate) struct GoalLp {
    pub lp: LinearProgram,
    pub beta: Vec<usize>,
    pub goal: Vec<(usize, f64)>,
    pub goal_const: f64,
}

impl GoalLp {
    fn new(k: usize) -> Self {
        let mut lp = LinearProgram::new();
        let beta = (0..k).map(|_| lp.add_var(0.0, 1.0)).collect();
        GoalLp {
            lp,
            beta,
            goal: Vec::new(),
            goal_const: 0.0,
        }
    }

    /// Adds `ζ_e ≤ min(β_i + β_j - 1, 0)` for every edge and returns the
    /// `ζ` variables.
    fn add_edge_terms(&mut self, edges: &[(usize, usize)]) -> Vec<usize> {
        edges
            .iter()
            .map(|&(i, j)| {
                let z = self.lp.add_var(-1.0, 0.0);
                self.lp
                    .add_row(vec![(z, 1.0), (self.beta[i], -1.0), (self.beta[j], -1.0)], Sense::Le, -1.0);
                z
            })
            .collect()
    }

    fn solve_goal(&self) -> Option<(f64, Vec<f64>)> {
        let mut lp = self.lp.clone();
        lp.clear_objective();
        for &(v, c) in &self.goal {
            lp.set_objective(v, c);
        }
        match lp.maximize() {
            LpOutcome::Optimal { value, x } => Some((value + self.goal_const, x)),
            _ => None,
        }
    }

    fn with_goal_at_least(&self, target: f64) -> LinearProgram {
        let mut lp = self.lp.clone();
        lp.add_row(self.goal.clone(), Sense::Ge, target - self.goal_const);
        lp
    }
}

/// Maximizes the goal over all programs, then picks the lexicographically
/// smallest `β` among optimal solutions. Returns `(value, β, program index)`.
pub(crate) fn lexmax(programs: &[GoalLp]) -> Option<(f64, Vec<f64>, usize)> {
    let solved: Vec<Option<(f64, Vec<f64>)>> = programs.par_iter().map(GoalLp::solve_goal).collect();
    let values: Vec<Option<f64>> = solved.iter().map(|s| s.as_ref().map(|s| s.0)).collect();
    let best = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return None;
    }
    let mut candidates: Vec<(usize, LinearProgram)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_some_and(|v| v >= best - TIE_TOL))
        .map(|(i, _)| (i, programs[i].with_goal_at_least(best)))
        .collect();
    let k = programs[0].beta.len();
    let first = candidates[0].0;
    let mut winner = (first, solved[first].as_ref().map(|s| s.1.clone()).unwrap_or_default());
    for coord in 0..k {
        let results: Vec<Option<Vec<f64>>> = candidates
            .par_iter()
            .map(|(i, lp)| {
                let mut lp = lp.clone();
                lp.clear_objective();
                lp.set_objective(programs[*i].beta[coord], -1.0);
                match lp.maximize() {
                    LpOutcome::Optimal { x, .. } => Some(x),
                    _ => None,
                }
            })
            .collect();
        let mut min_val = f64::INFINITY;
        for ((i, _), x) in candidates.iter().zip(&results) {
            if let Some(x) = x {
                let v = x[programs[*i].beta[coord]];
                if v < min_val - TIE_TOL {
                    min_val = v;
                    winner = (*i, x.clone());
                }
            }
        }
        let mut next = Vec::new();
        for ((i, mut lp), x) in candidates.into_iter().zip(results) {
            if x.is_some_and(|x| x[programs[i].beta[coord]] <= min_val + TIE_TOL) {
                lp.add_row(vec![(programs[i].beta[coord], 1.0)], Sense::Le, min_val);
                next.push((i, lp));
            }
        }
        if next.is_empty() {
            break;
        }
        candidates = next;
    }
    let (idx, x) = winner;
    let beta = programs[idx].beta.iter().map(|&v| x[v]).collect();
    Some((best, beta, idx))
}

fn b_program(k: usize, edges: &[(usize, usize)], alpha: f64, cap: f64) -> GoalLp {
    let mut p = GoalLp::new(k);
    if cap < 1.0 {
        for &b in &p.beta.clone() {
            p.lp.add_row(vec![(b, 1.0)], Sense::Le, cap);
        }
    }
    let zeta = p.add_edge_terms(edges);
    p.goal = p.beta.iter().map(|&b| (b, -alpha)).chain(zeta.iter().map(|&z| (z, 1.0))).collect();
    p.goal_const = k as f64;
    p
}

fn branch_pattern(beta: &[f64], alpha: f64, level: f64) -> Vec<u8> {
    beta.iter().map(|b| u8::from(1.0 - alpha * b >= level - STRICT_TOL)).collect()
}

/// `B(H) = max_β Σ (1 - αβ_i) + Σ_E min(β_i + β_j - 1, 0)`, the exponent of
/// the typical count of `H`.
pub fn solve_b(h: &SubgraphPattern, alpha: f64) -> Result<RateResult> {
    check_alpha(alpha)?;
    let program = b_program(h.k(), h.edges(), alpha, 1.0);
    let (value, beta, _) = lexmax(std::slice::from_ref(&program)).ok_or(Error::Unbounded)?;
    Ok(RateResult {
        value: Some(value),
        pattern: branch_pattern(&beta, alpha, 0.0),
        beta: Some(BetaProfile::from_solver(beta)),
        feasible: true,
        tight: false,
        heuristic: false,
    })
}

/// Largest `γ` for which `R(H) = 0`: the maximum of the `B` objective
/// restricted to `[0, 1/α]^k`. Equals `B(H)` under the interior-optimum
/// condition of [`check_assumption1`].
pub fn typical_threshold(h: &SubgraphPattern, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let program = b_program(h.k(), h.edges(), alpha, 1.0 / alpha);
    program.solve_goal().map(|s| s.0).ok_or(Error::Unbounded)
}

/// Whether every maximizer of the `B` program lies in `[0, 1/α)^k`. Each
/// coordinate is pushed as high as the optimal face allows, so alternative
/// optima touching `1/α` are detected too.
pub fn check_assumption1(h: &SubgraphPattern, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    let program = b_program(h.k(), h.edges(), alpha, 1.0);
    let best = program.solve_goal().ok_or(Error::Unbounded)?.0;
    let face = program.with_goal_at_least(best);
    for &b in &program.beta {
        let mut lp = face.clone();
        lp.clear_objective();
        lp.set_objective(b, 1.0);
        if let LpOutcome::Optimal { value, .. } = lp.maximize() {
            if value >= 1.0 / alpha - STRICT_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// R-program for one branch assignment: vertices with bit set count
/// `1 - αβ_i` towards the constraint, the others count 0. Since the
/// constraint takes the maximum of the two, the best assignment recovers
/// the piecewise program exactly.
pub(crate) fn r_program(k: usize, edges: &[(usize, usize)], alpha: f64, gamma: f64, mask: u32) -> GoalLp {
    let mut p = GoalLp::new(k);
    let delta: Vec<usize> = (0..k).map(|_| p.lp.add_var(-1.0, 0.0)).collect();
    for i in 0..k {
        // δ_i ≤ 1 - αβ_i
        p.lp.add_row(vec![(delta[i], 1.0), (p.beta[i], alpha)], Sense::Le, 1.0);
    }
    let zeta = p.add_edge_terms(edges);
    let mut row: Vec<(usize, f64)> = zeta.iter().map(|&z| (z, 1.0)).collect();
    let mut rhs = gamma;
    for i in 0..k {
        if mask >> i & 1 == 1 {
            row.push((p.beta[i], -alpha));
            rhs -= 1.0;
        }
    }
    p.lp.add_row(row, Sense::Ge, rhs);
    p.goal = delta.iter().map(|&d| (d, 1.0)).collect();
    p
}

pub(crate) fn solve_r_edges(k: usize, edges: &[(usize, usize)], alpha: f64, gamma: f64) -> RateResult {
    let programs: Vec<GoalLp> = (0..1u32 << k).map(|m| r_program(k, edges, alpha, gamma, m)).collect();
    match lexmax(&programs) {
        None => RateResult::infeasible(),
        Some((value, beta, _)) => RateResult {
            value: Some(value.min(0.0)),
            pattern: branch_pattern(&beta, alpha, 0.0),
            tight: (r_constraint(edges, &beta, alpha) - gamma).abs() <= TIGHT_TOL,
            beta: Some(BetaProfile::from_solver(beta)),
            feasible: true,
            heuristic: false,
        },
    }
}

/// `R(H) = max Σ min(1 - αβ_i, 0)` subject to
/// `Σ max(1 - αβ_i, 0) + Σ_E min(β_i + β_j - 1, 0) ≥ γ`.
///
/// `P(N(H) > n^γ)` decays like `n^{R(H)}`. Infeasibility means no weight
/// profile reaches `n^γ` copies.
pub fn solve_r(h: &SubgraphPattern, alpha: f64, gamma: f64) -> Result<RateResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    Ok(solve_r_edges(h.k(), h.edges(), alpha, gamma))
}

/// `min θ ∈ [0,1]` subject to `Σ max(1 - αβ_i, θ) + Σ_E min(β_i+β_j-1, 0) ≥ γ`:
/// about `n^θ` planted hubs are needed to reach `n^γ` copies.
pub fn solve_exponential_theta(h: &SubgraphPattern, alpha: f64, gamma: f64) -> Result<RateResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let k = h.k();
    let programs: Vec<GoalLp> = (0..1u32 << k)
        .map(|mask| {
            let mut p = GoalLp::new(k);
            let theta = p.lp.add_var(0.0, 1.0);
            let t: Vec<usize> = (0..k).map(|_| p.lp.add_var(-1.0, 1.0)).collect();
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    p.lp.add_row(vec![(t[i], 1.0), (p.beta[i], alpha)], Sense::Le, 1.0);
                } else {
                    p.lp.add_row(vec![(t[i], 1.0), (theta, -1.0)], Sense::Le, 0.0);
                }
            }
            let zeta = p.add_edge_terms(h.edges());
            let row = t.iter().chain(&zeta).map(|&v| (v, 1.0)).collect();
            p.lp.add_row(row, Sense::Ge, gamma);
            p.goal = vec![(theta, -1.0)];
            p
        })
        .collect();
    match lexmax(&programs) {
        None => Ok(RateResult::infeasible()),
        Some((neg_theta, beta, _)) => {
            let theta = (-neg_theta).clamp(0.0, 1.0);
            Ok(RateResult {
                value: Some(theta),
                pattern: branch_pattern(&beta, alpha, theta),
                tight: (theta_constraint(h.edges(), &beta, alpha, theta) - gamma).abs() <= TIGHT_TOL,
                beta: Some(BetaProfile::from_solver(beta)),
                feasible: true,
                heuristic: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::enumerate_connected;
    use crate::optimizer::{b_objective, r_objective};
    use approx::assert_relative_eq;

    fn beta(r: &RateResult) -> Vec<f64> {
        r.beta.as_ref().unwrap().as_slice().to_vec()
    }

    #[test]
    fn clique_b_values() {
        for k in 3..=6 {
            for alpha in [1.1, 1.3, 1.5, 1.7, 1.9] {
                let r = solve_b(&SubgraphPattern::clique(k).unwrap(), alpha).unwrap();
                assert_relative_eq!(r.value.unwrap(), k as f64 * (2.0 - alpha) / 2.0, epsilon = 1e-9);
                for b in beta(&r) {
                    assert_relative_eq!(b, 0.5, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn small_b_values() {
        let c5 = SubgraphPattern::cycle(5).unwrap();
        let r = solve_b(&c5, 1.5).unwrap();
        assert_relative_eq!(r.value.unwrap(), 1.25, epsilon = 1e-9);
        // a single edge is maximized by two light vertices
        let edge = SubgraphPattern::path(2).unwrap();
        let r = solve_b(&edge, 1.5).unwrap();
        assert_relative_eq!(r.value.unwrap(), 1.0, epsilon = 1e-9);
        assert_eq!(beta(&r), vec![0.0, 0.0]);
    }

    #[test]
    fn assumption1_examples() {
        for k in 3..=6 {
            for alpha in [1.2, 1.5, 1.9] {
                assert!(check_assumption1(&SubgraphPattern::clique(k).unwrap(), alpha).unwrap());
            }
        }
        assert!(!check_assumption1(&SubgraphPattern::star(5).unwrap(), 1.5).unwrap());
        assert!(!check_assumption1(&SubgraphPattern::path(3).unwrap(), 1.5).unwrap());
    }

    #[test]
    fn triangle_rates() {
        let k3 = SubgraphPattern::clique(3).unwrap();
        let r = solve_r(&k3, 1.5, 1.0).unwrap();
        assert_relative_eq!(r.value.unwrap(), -0.5, epsilon = 1e-9);
        let b = beta(&r);
        assert_relative_eq!(b[0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(b[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(b[2], 1.0, epsilon = 1e-9);
        assert!(r.tight);
        assert_eq!(r.pattern, vec![1, 1, 0]);
        assert!(!solve_r(&k3, 1.5, 2.0).unwrap().feasible);
        let r = solve_r(&k3, 1.5, 0.5).unwrap();
        assert_eq!(r.value, Some(0.0));
        assert!(solve_r(&k3, 1.5, 0.0).is_err());
    }

    #[test]
    fn exponential_theta_values() {
        let k3 = SubgraphPattern::clique(3).unwrap();
        let r = solve_exponential_theta(&k3, 1.5, 2.0).unwrap();
        // two weight-n hubs and n^{1/2}-many partners: n * n^θ * n^θ = n^2
        assert_relative_eq!(r.value.unwrap(), 0.5, epsilon = 1e-9);
        let b = beta(&r);
        assert_relative_eq!(theta_constraint(k3.edges(), &b, 1.5, 0.5), 2.0, epsilon = 1e-9);
        assert!(!solve_exponential_theta(&k3, 1.5, 3.5).unwrap().feasible);
        assert_eq!(solve_exponential_theta(&k3, 1.5, 0.5).unwrap().value, Some(0.0));
    }

    #[test]
    fn theta_zero_iff_r_feasible() {
        for h in enumerate_connected(4).unwrap() {
            for gamma in [0.5, 1.0, 1.5, 2.0, 2.5] {
                let r = solve_r(&h, 1.5, gamma).unwrap();
                let t = solve_exponential_theta(&h, 1.5, gamma).unwrap();
                assert!(t.feasible);
                assert_eq!(r.feasible, t.value.unwrap() <= 1e-9, "{} gamma {gamma}", h.edge_string());
            }
        }
    }

    #[test]
    fn optimum_reverifies_against_raw_functions() {
        for h in enumerate_connected(4).unwrap() {
            for gamma in [0.3, 1.0, 1.7] {
                let r = solve_r(&h, 1.3, gamma).unwrap();
                if let Some(b) = &r.beta {
                    assert!((r_objective(b.as_slice(), 1.3) - r.value.unwrap()).abs() <= 1e-9);
                    assert!(r_constraint(h.edges(), b.as_slice(), 1.3) >= gamma - 1e-9);
                }
                let b = solve_b(&h, 1.3).unwrap();
                let bb = b.beta.unwrap();
                assert!((b_objective(h.edges(), bb.as_slice(), 1.3) - b.value.unwrap()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn r_monotone_in_gamma() {
        for h in enumerate_connected(4).unwrap() {
            let mut last = 0.0;
            let mut feasible = true;
            for i in 1..=30 {
                let r = solve_r(&h, 1.6, i as f64 * 0.1).unwrap();
                if !feasible {
                    assert!(!r.feasible);
                }
                feasible = r.feasible;
                if let Some(v) = r.value {
                    assert!(v <= last + 1e-9);
                    assert!(v <= 0.0);
                    last = v;
                }
            }
        }
    }

    #[test]
    fn clique_hub_count() {
        // just above the typical exponent, k-2 hubs carry the deviation
        for (k, alpha) in [(3, 1.75), (4, 1.7), (5, 1.8)] {
            let h = SubgraphPattern::clique(k).unwrap();
            let gamma = k as f64 * (2.0 - alpha) / 2.0 + 0.01;
            let r = solve_r(&h, alpha, gamma).unwrap();
            let b = r.beta.unwrap();
            let hubs = b.hubs(alpha);
            assert_eq!(hubs.len(), k - 2, "k={k} beta={:?}", b.as_slice());
            let expected: f64 = hubs.iter().map(|&i| 1.0 - alpha * b.as_slice()[i]).sum();
            assert_relative_eq!(r.value.unwrap(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn relabeling_leaves_values_unchanged() {
        let h = SubgraphPattern::new(5, vec![(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let g = h.relabel(&perm).unwrap();
        for gamma in [0.6, 1.2] {
            let a = solve_r(&h, 1.4, gamma).unwrap();
            let b = solve_r(&g, 1.4, gamma).unwrap();
            assert_eq!(a.feasible, b.feasible);
            if let (Some(x), Some(y)) = (a.value, b.value) {
                assert_relative_eq!(x, y, epsilon = 1e-9);
            }
        }
        assert_relative_eq!(
            solve_b(&h, 1.4).unwrap().value.unwrap(),
            solve_b(&g, 1.4).unwrap().value.unwrap(),
            epsilon = 1e-9
        );
    }
}
