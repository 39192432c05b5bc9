//! The power-law rank-1 inhomogeneous random graph.
//!
//! Vertex weights are i.i.d. exact Pareto(α) on `[1, ∞)`, so
//! `P(W > x) = x^{-α}` and `μ = E[W] = α/(α-1)`. Vertices `i` and `j` are
//! joined independently with probability `min(w_i w_j / (μ n), 1)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphSample;
use crate::seed::RandomSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawParams {
    alpha: f64,
}

impl PowerLawParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::param(format!("alpha must lie in (1, 2), got {alpha}")));
        }
        Ok(PowerLawParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `E[W] = α/(α-1)`.
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }

    /// Exact tail `P(W > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            x.powf(-self.alpha)
        }
    }

    /// `μ n`, the normalisation of the connection kernel.
    pub fn mu_n(&self, n: usize) -> f64 {
        self.mean() * n as f64
    }
}

/// Inverse of the Pareto tail: the weight `x` with `P(W > x) = u`.
pub fn pareto_inverse_cdf(u: f64, alpha: f64) -> Result<f64> {
    PowerLawParams::new(alpha)?;
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::param(format!("u must lie in (0, 1], got {u}")));
    }
    Ok(u.powf(-1.0 / alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    alpha: f64,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, alpha: f64) -> Result<Self> {
        PowerLawParams::new(alpha)?;
        if weights.is_empty() {
            return Err(Error::param("weight vector must be non-empty"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 1.0) || !w.is_finite()) {
            return Err(Error::param(format!("weights must be finite and >= 1, found {w}")));
        }
        Ok(WeightVector { weights, alpha })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn params(&self) -> PowerLawParams {
        PowerLawParams { alpha: self.alpha }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu_n(&self) -> f64 {
        self.params().mu_n(self.n())
    }
}

pub fn sample_weights(n: usize, alpha: f64, seed: RandomSeed) -> Result<WeightVector> {
    PowerLawParams::new(alpha)?;
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let mut rng = seed.rng();
    let exponent = -1.0 / alpha;
    let weights = (0..n)
        .map(|_| {
            // 1 - U lies in (0, 1]
            let u = 1.0 - rng.random::<f64>();
            u.powf(exponent)
        })
        .collect();
    Ok(WeightVector { weights, alpha })
}

/// Chung-Lu connection probability `min(w_i w_j / (μ n), 1)`.
pub fn edge_probability(wi: f64, wj: f64, n: usize, alpha: f64) -> f64 {
    let mu = alpha / (alpha - 1.0);
    (wi * wj / (mu * n as f64)).min(1.0)
}

/// Realizes a graph from the weights.
///
/// Vertices are visited in decreasing weight order; for a fixed source the
/// connection probabilities towards later vertices are nonincreasing, so the
/// run of rejected candidates can be skipped geometrically at the current
/// probability and then thinned. Expected cost is `O(n + |E|)`.
pub fn sample_graph(weights: &WeightVector, seed: RandomSeed) -> GraphSample {
    let n = weights.n();
    let w = weights.as_slice();
    let mu_n = weights.mu_n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| w[i]).collect();

    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for u in 0..n.saturating_sub(1) {
        let wu = sorted[u];
        let mut v = u + 1;
        let mut p = (wu * sorted[v] / mu_n).min(1.0);
        while v < n && p > 0.0 {
            if p < 1.0 {
                let r = 1.0 - rng.random::<f64>();
                let skip = (r.ln() / (1.0 - p).ln()).floor();
                if skip >= (n - v) as f64 {
                    break;
                }
                v += skip as usize;
                if v >= n {
                    break;
                }
            }
            let q = (wu * sorted[v] / mu_n).min(1.0);
            if rng.random::<f64>() < q / p {
                edges.push((order[u], order[v]));
            }
            p = q;
            v += 1;
        }
    }
    GraphSample::from_edges_unchecked(n, &edges)
}

/// Overwrites the first `hub_weights.len()` weights.
pub fn plant_hubs(weights: &WeightVector, hub_weights: &[f64]) -> Result<WeightVector> {
    if hub_weights.len() > weights.n() {
        return Err(Error::param(format!(
            "{} hubs requested for {} vertices",
            hub_weights.len(),
            weights.n()
        )));
    }
    if let Some(h) = hub_weights.iter().find(|h| !(**h >= 1.0) || !h.is_finite()) {
        return Err(Error::param(format!("hub weights must be finite and >= 1, found {h}")));
    }
    let mut planted = weights.weights.clone();
    planted[..hub_weights.len()].copy_from_slice(hub_weights);
    Ok(WeightVector {
        weights: planted,
        alpha: weights.alpha,
    })
}
