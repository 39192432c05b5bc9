//! Deterministic integration against products of Pareto measures.
//!
//! All integrands here are products of `min(x_i x_j / (μn), 1)` over some
//! set of pairs. The last free coordinate is always integrated in closed
//! form; outer coordinates use composite Gauss-Legendre in `t = ln x`, with
//! panel edges at the kinks of the kernel, or a randomly shifted Kronecker
//! lattice when there are too many of them.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rand::Rng;

use crate::seed::RandomSeed;

const GL_DEGREE: usize = 12;
const MAX_PANEL_WIDTH: f64 = 0.25;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_DEGREE).unwrap()))
}

/// `(hi^e - lo^e) / e` without cancellation for small `e`.
fn power_difference(lo: f64, hi: f64, e: f64) -> f64 {
    if hi.is_infinite() {
        debug_assert!(e < 0.0);
        return -lo.powf(e) / e;
    }
    lo.powf(e) * (e * (hi / lo).ln()).exp_m1() / e
}

/// `∫_1^∞ ∏_i min(h_i z / μn, 1) α z^{-α-1} dz`, exactly.
pub fn pinned_tail_integral(pinned: &[f64], mu_n: f64, alpha: f64) -> f64 {
    // thresholds above which each factor saturates, ascending
    let mut taus: Vec<f64> = pinned.iter().map(|&h| mu_n / h).collect();
    taus.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut first_active = taus.partition_point(|&t| t <= 1.0);
    let mut coef: f64 = taus[first_active..].iter().map(|t| 1.0 / t).product();
    let mut lo = 1.0;
    let mut total = 0.0;
    loop {
        let j = (taus.len() - first_active) as f64;
        let hi = taus.get(first_active).copied().unwrap_or(f64::INFINITY);
        if hi > lo {
            total += coef * alpha * power_difference(lo, hi, j - alpha);
        }
        if first_active == taus.len() {
            break;
        }
        coef *= taus[first_active];
        lo = hi;
        first_active += 1;
    }
    total
}

fn saturating_product(x: f64, pinned: &[f64], mu_n: f64) -> f64 {
    pinned.iter().map(|&p| (p * x / mu_n).min(1.0)).product()
}

/// Integrates `free` independent Pareto coordinates against all pairwise
/// kernel factors among them and with the pinned weights. Factors among the
/// pinned weights themselves are not included.
pub fn integrate_free(pinned: &[f64], free: usize, mu_n: f64, alpha: f64) -> f64 {
    let mut buf = pinned.to_vec();
    nested(&mut buf, free, mu_n, alpha)
}

fn nested(pinned: &mut Vec<f64>, free: usize, mu_n: f64, alpha: f64) -> f64 {
    match free {
        0 => 1.0,
        1 => pinned_tail_integral(pinned, mu_n, alpha),
        _ => {
            let big_l = mu_n.ln();
            let mut edges = vec![0.0, 0.5 * big_l, big_l];
            for &p in pinned.iter() {
                edges.push(p.ln());
                edges.push(big_l - p.ln());
            }
            edges.retain(|e| (0.0..=big_l).contains(e));
            edges.sort_unstable_by(|a, b| a.total_cmp(b));
            edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

            let eval = |x: f64, pinned: &mut Vec<f64>| {
                let outer = saturating_product(x, pinned, mu_n);
                if outer == 0.0 {
                    return 0.0;
                }
                pinned.push(x);
                let inner = nested(pinned, free - 1, mu_n, alpha);
                pinned.pop();
                outer * inner
            };

            let mut total = 0.0;
            for w in edges.windows(2) {
                let (a, b) = (w[0], w[1]);
                let panels = ((b - a) / MAX_PANEL_WIDTH).ceil().max(1.0) as usize;
                let h = (b - a) / panels as f64;
                for p in 0..panels {
                    let lo = a + p as f64 * h;
                    total += rule().integrate(lo, lo + h, |t| {
                        alpha * (-alpha * t).exp() * eval(t.exp(), pinned)
                    });
                }
            }
            // beyond x = μn every factor touching x is saturated
            total + mu_n.powf(-alpha) * eval(mu_n, pinned)
        }
    }
}

/// A Monte Carlo style value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const QMC_POINTS: usize = 1 << 18;
const QMC_SHIFTS: usize = 4;
/// Outer coordinates are truncated at `t = ln μn + QMC_TAIL / α`; the lost
/// mass is at most `e^{-QMC_TAIL}` of the tail beyond `μn`.
const QMC_TAIL: f64 = 14.0;

/// Same integral as [`integrate_free`] by a Kronecker lattice over the outer
/// coordinates in `t = ln x`, tent-periodized, with randomly shifted copies.
/// The reported error is the standard error over the shifts.
///
/// In `t` the integrand is a bounded bump around `t = ln μn / 2`, which a
/// lattice resolves far better than the heavy-tailed `x` coordinates.
pub fn integrate_free_qmc(pinned: &[f64], free: usize, mu_n: f64, alpha: f64, seed: RandomSeed) -> Estimate {
    if free <= 1 {
        let v = integrate_free(pinned, free, mu_n, alpha);
        return Estimate { value: v, error: 0.0 };
    }
    let dims = free - 1;
    let top = mu_n.ln() + QMC_TAIL / alpha;
    let gen: Vec<f64> = first_primes(dims).iter().map(|&p| (p as f64).sqrt().fract()).collect();
    let mut rng = seed.rng();
    let shifts: Vec<Vec<f64>> = (0..QMC_SHIFTS).map(|_| (0..dims).map(|_| rng.random::<f64>()).collect()).collect();
    let estimates: Vec<f64> = shifts
        .iter()
        .map(|shift| {
            use rayon::prelude::*;
            let chunk = 4096;
            let partial: Vec<f64> = (0..QMC_POINTS.div_ceil(chunk))
                .into_par_iter()
                .map(|c| {
                    let mut xs = pinned.to_vec();
                    let mut s = 0.0;
                    for i in c * chunk..((c + 1) * chunk).min(QMC_POINTS) {
                        xs.truncate(pinned.len());
                        let mut f = 1.0;
                        for d in 0..dims {
                            let u = ((i as f64) * gen[d] + shift[d]).fract();
                            let t = top * (1.0 - (2.0 * u - 1.0).abs());
                            let x = t.exp();
                            f *= top * alpha * (-alpha * t).exp() * saturating_product(x, &xs, mu_n);
                            xs.push(x);
                        }
                        if f > 0.0 {
                            f *= pinned_tail_integral(&xs, mu_n, alpha);
                        }
                        s += f;
                    }
                    s
                })
                .collect();
            partial.iter().sum::<f64>() / QMC_POINTS as f64
        })
        .collect();
    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Estimate {
        value: mean,
        error: (var / m).sqrt(),
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
