//! Closed-form exponents and numeric evaluators for the asymptotic
//! quantities: the clique-mean exponent, the hub threshold `c_a(n)`, hub
//! contributions `S^{(h)}`, the rate `J(ζ)` and the empirical-tail envelope.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PowerLawParams, WeightVector};
use crate::quadrature::{integrate_free, integrate_free_qmc, Estimate};
use crate::seed::RandomSeed;
use crate::util::binomial;

const BISECTION_CAP: usize = 200;

/// A polynomial exponent in `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentValue {
    pub value: f64,
}

fn check_alpha(alpha: f64) -> Result<PowerLawParams> {
    PowerLawParams::new(alpha)
}

/// `k(2-α)/2`, the growth exponent of the expected k-clique count.
pub fn expected_clique_exponent(k: usize, alpha: f64) -> Result<ExponentValue> {
    if k < 2 {
        return Err(Error::param("k must be at least 2"));
    }
    check_alpha(alpha)?;
    Ok(ExponentValue {
        value: k as f64 * (2.0 - alpha) / 2.0,
    })
}

/// `α* = 1 - (2 - k(2-α)) / (4(α-1))`, the growth exponent of `c_a(n)`.
pub fn hub_exponent(k: usize, alpha: f64) -> Result<ExponentValue> {
    if k < 3 {
        return Err(Error::param("hub exponent needs k >= 3"));
    }
    check_alpha(alpha)?;
    Ok(ExponentValue {
        value: 1.0 - (2.0 - k as f64 * (2.0 - alpha)) / (4.0 * (alpha - 1.0)),
    })
}

/// `m_n^{(k)} = C(n,k) ∫ f_n dF^k`, the expected k-clique count, by
/// quadrature. Uses the tensor rule up to `k = 3` and the shifted lattice
/// above.
pub fn expected_clique_mean(n: usize, k: usize, alpha: f64) -> Result<Estimate> {
    let params = check_alpha(alpha)?;
    if k < 2 || k > n {
        return Err(Error::param(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mu_n = params.mu_n(n);
    let integral = if k <= 3 {
        Estimate {
            value: integrate_free(&[], k, mu_n, alpha),
            error: 0.0,
        }
    } else {
        integrate_free_qmc(&[], k, mu_n, alpha, RandomSeed::new(k as u64))
    };
    let scale = binomial(n, k);
    Ok(Estimate {
        value: scale * integral.value,
        error: scale * integral.error,
    })
}

fn hub_pair_product(hubs: &[f64], mu_n: f64) -> f64 {
    let mut prod = 1.0;
    for (i, &a) in hubs.iter().enumerate() {
        for &b in &hubs[i + 1..] {
            prod *= (a * b / mu_n).min(1.0);
        }
    }
    prod
}

/// `S^{(h)}(n)`: expected number of k-cliques on `h` given hub weights and
/// `k-h` Pareto vertices, per choice of those vertices. Tensor quadrature
/// for `k-h <= 2`, shifted lattice (with error estimate) above.
pub fn s_hub_numeric(hub_weights: &[f64], k: usize, alpha: f64, n: usize) -> Result<Estimate> {
    let params = check_alpha(alpha)?;
    let h = hub_weights.len();
    if h == 0 || h >= k {
        return Err(Error::param(format!("need 1 <= h <= k-1 hub weights, got h={h}, k={k}")));
    }
    if let Some(b) = hub_weights.iter().find(|b| !(**b >= 1.0) || !b.is_finite()) {
        return Err(Error::param(format!("hub weights must be finite and >= 1, found {b}")));
    }
    let mu_n = params.mu_n(n);
    let hubs = hub_pair_product(hub_weights, mu_n);
    let free = k - h;
    let integral = if free <= 2 {
        Estimate {
            value: integrate_free(hub_weights, free, mu_n, alpha),
            error: 0.0,
        }
    } else {
        integrate_free_qmc(hub_weights, free, mu_n, alpha, RandomSeed::new((k * 64 + h) as u64))
    };
    Ok(Estimate {
        value: hubs * integral.value,
        error: hubs * integral.error,
    })
}

/// Leading-order `S^{(k-2)}` for `k-2` equal hubs of weight `b`:
/// `(1/μn) (α(k-2) / ((α-1)(k-α-1)) (b/μn)^{α-1})^2`.
pub fn s_hub_asymptotic_equal(b: f64, k: usize, alpha: f64, n: usize) -> Result<f64> {
    let params = check_alpha(alpha)?;
    if k < 3 {
        return Err(Error::param("need k >= 3"));
    }
    let mu_n = params.mu_n(n);
    let kf = k as f64;
    let inner = alpha * (kf - 2.0) / ((alpha - 1.0) * (kf - alpha - 1.0)) * (b / mu_n).powf(alpha - 1.0);
    Ok(inner * inner / mu_n)
}

/// `c_a(n)`: the smallest common weight `c` such that planting `k-2` hubs of
/// weight `c` raises the expected k-clique count through them above
/// `a m_n^{(k)}`, i.e. `C(n,2) S^{(k-2)}(c,…,c) > a m_n^{(k)}`.
///
/// Bisection in `ln c` on `[1, μn]` to relative tolerance `tol`.
pub fn solve_c_a(n: usize, a: f64, k: usize, alpha: f64, tol: f64) -> Result<f64> {
    let params = check_alpha(alpha)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param(format!("a must be positive, got {a}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    if k < 3 || k > n {
        return Err(Error::param(format!("need 3 <= k <= n, got k={k}")));
    }
    let target = a * expected_clique_mean(n, k, alpha)?.value;
    let pairs = binomial(n, 2);
    let excess = |c: f64| -> Result<f64> {
        let hubs = vec![c; k - 2];
        Ok(pairs * s_hub_numeric(&hubs, k, alpha, n)?.value - target)
    };
    let max_weight = params.mu_n(n);
    if excess(max_weight)? <= 0.0 {
        return Err(Error::InfeasibleThreshold { a, max_weight });
    }
    if excess(1.0)? > 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, max_weight.ln());
    let step = (1.0 + tol).ln().min(-(1.0 - tol).ln()) * 0.5;
    for _ in 0..BISECTION_CAP {
        if hi - lo <= step {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid.exp())? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

/// `J(ζ) = (1+ζ) log(ζ + 1/(1+ζ)) / 3`.
pub fn j_rate(zeta: f64) -> Result<f64> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::param(format!("zeta must be finite and >= 0, got {zeta}")));
    }
    Ok((1.0 + zeta) * (zeta + 1.0 / (1.0 + zeta)).ln() / 3.0)
}

/// Slack `A`, tail constant `c` and window exponent `δ` of the envelope
/// event; the window is `[n^{1/α-δ}, n^{1/α+δ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub slack: f64,
    pub tail_constant: f64,
    pub delta: f64,
}

impl EnvelopeParams {
    pub fn new(slack: f64, tail_constant: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("A", slack), ("c", tail_constant), ("delta", delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("envelope parameter {name} must be positive, got {v}")));
            }
        }
        Ok(EnvelopeParams {
            slack,
            tail_constant,
            delta,
        })
    }

    pub fn lower(&self, n: usize, alpha: f64) -> f64 {
        (n as f64).powf(1.0 / alpha - self.delta)
    }

    pub fn upper(&self, n: usize, alpha: f64) -> f64 {
        (n as f64).powf(1.0 / alpha + self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeClause {
    Bulk,
    Window,
    Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeViolation {
    pub clause: EnvelopeClause,
    pub x: f64,
    pub empirical: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub holds: bool,
    pub violations: Vec<EnvelopeViolation>,
}

/// Checks the three clauses of the envelope event for the empirical tail
/// `F̄_n(x) = #{i: w_i > x}/n`. Since `F̄_n` is a step function, the
/// suprema are attained just below sample points, so only those are tested.
pub fn envelope_check(weights: &WeightVector, params: &EnvelopeParams) -> EnvelopeReport {
    let n = weights.n();
    let alpha = weights.alpha();
    let nf = n as f64;
    let a = params.lower(n, alpha);
    let b = params.upper(n, alpha);
    let factor = 1.0 + params.slack;
    let mut sorted = weights.as_slice().to_vec();
    sorted.sort_unstable_by(|x, y| x.total_cmp(y));

    let mut violations = Vec::new();
    // bulk: F̄_n(v^-) = #{w >= v}/n against (1+A) v^{-α}
    let mut i = 0;
    while i < n && sorted[i] < a {
        let v = sorted[i];
        let empirical = (n - i) as f64 / nf;
        let bound = factor * v.powf(-alpha);
        if empirical > bound {
            violations.push(EnvelopeViolation {
                clause: EnvelopeClause::Bulk,
                x: v,
                empirical,
                bound,
            });
        }
        while i < n && sorted[i] == v {
            i += 1;
        }
    }
    let above = |x: f64| (n - sorted.partition_point(|&w| w <= x)) as f64 / nf;
    let window = above(a);
    let window_bound = factor * a.powf(-alpha);
    if window > window_bound {
        violations.push(EnvelopeViolation {
            clause: EnvelopeClause::Window,
            x: a,
            empirical: window,
            bound: window_bound,
        });
    }
    let tail = above(b);
    let tail_bound = factor * params.tail_constant / nf;
    if tail > tail_bound {
        violations.push(EnvelopeViolation {
            clause: EnvelopeClause::Tail,
            x: b,
            empirical: tail,
            bound: tail_bound,
        });
    }
    EnvelopeReport {
        holds: violations.is_empty(),
        violations,
    }
}
