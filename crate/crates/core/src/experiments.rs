//! Reproducible Monte Carlo drivers.
//!
//! Every replica draws from its own seed, derived from the master seed and
//! the task index `(n index, replica)`, and results are reduced in task
//! order. Reports are therefore identical for any worker count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{expected_clique_exponent, solve_c_a};
use crate::catalog::{enumerate_connected, SubgraphPattern};
use crate::conditional::conditional_expected_auto;
use crate::counting::{count_cliques, count_subgraph_copies};
use crate::error::{Error, Result};
use crate::graph::GraphSample;
use crate::model::{plant_hubs, sample_graph, sample_weights};
use crate::optimizer::{
    check_assumption1, grid_oracle_r, solve_b, solve_exponential_theta, solve_r, typical_threshold,
};
use crate::seed::RandomSeed;

/// Tolerance on fitted exponents used for the scaling verdicts.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Tolerance on the fitted tail exponent against `R(H)`.
pub const TAIL_TOLERANCE: f64 = 0.1;
/// Smallest tail probability the scan will try to estimate.
pub const MIN_TAIL_PROBABILITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Scaling,
    Planted,
    Figure1,
    Tailscan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json-lines")]
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" | "jsonl" => Ok(OutputFormat::JsonLines),
            other => Err(Error::param(format!("unknown output format {other:?} (csv | json-lines)"))),
        }
    }
}

/// Fully resolved experiment settings. Also the on-disk config format: a
/// flat JSON object with these keys, all optional, unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub alpha: f64,
    pub k: usize,
    /// Pattern file; when absent the k-clique is used.
    pub pattern: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub a: f64,
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Use conditional expectations instead of realized counts (scaling).
    pub conditional: bool,
    /// Sample budget when a conditional count is too large to sum exactly.
    pub samples: usize,
    /// Lattice resolution of the grid oracle (figure1); chosen from `k`
    /// when absent.
    pub grid: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            alpha: 1.5,
            k: 3,
            pattern: None,
            gamma: None,
            a: 1.0,
            n_grid: vec![1000, 2000, 4000, 8000, 16000],
            replicas: 200,
            seed: 1,
            workers: None,
            out: None,
            format: OutputFormat::Csv,
            conditional: false,
            samples: 200_000,
            grid: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        crate::model::PowerLawParams::new(self.alpha)?;
        if self.replicas == 0 {
            return Err(Error::param("replicas must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::param("n-grid must not be empty"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("n-grid must be strictly increasing"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::param("samples must be at least 1"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::param(format!("gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }

    /// The pattern under study: the pattern file if given, else `K_k`.
    pub fn target_pattern(&self) -> Result<SubgraphPattern> {
        match &self.pattern {
            Some(path) => read_pattern(path),
            None => SubgraphPattern::clique(self.k),
        }
    }

    fn gamma(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::param("this experiment needs gamma"))
    }

    pub fn master(&self) -> RandomSeed {
        RandomSeed::new(self.seed)
    }
}

pub fn read_pattern(path: &Path) -> Result<SubgraphPattern> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SubgraphPattern::parse(&text)
}

/// Least-squares fit of `ln y = intercept + slope ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Data(format!("need at least 3 points for a fit, got {}", points.len())));
    }
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*v > 0.0) || !(*n > 0.0)) {
        return Err(Error::Data(format!("log-log fit needs positive data, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("all n values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        r_squared,
        points: points.len(),
    })
}

/// One cell of a report table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Float)
    }

    /// CSV rendering: floats in shortest round-trip form, empty for `Empty`.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// `x`/`y` series for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub yerr: Option<Vec<f64>>,
    pub reference_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

/// A report that renders as a table plus plot series.
pub trait Tabular: Serialize {
    fn columns(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<Cell>>;
    fn plotdata(&self) -> PlotData;
}

pub fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::param(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `replicas` tasks for each `n` in parallel; results come back grouped
/// by `n` in replica order. Task `(i, r)` gets seed `master.child(i).child(r)`.
pub fn replicate<T, F>(config: &ExperimentConfig, task: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, usize, RandomSeed) -> Result<T> + Sync + Send,
{
    let master = config.master();
    let (grid, reps) = (config.n_grid.len(), config.replicas);
    let flat: Vec<T> = with_workers(config.workers, || {
        (0..grid * reps)
            .into_par_iter()
            .map(|t| {
                let (i, r) = (t / reps, t % reps);
                task(config.n_grid[i], r, master.child(i as u64).child(r as u64))
            })
            .collect::<Result<Vec<T>>>()
    })??;
    let mut grouped: Vec<Vec<T>> = Vec::with_capacity(grid);
    let mut it = flat.into_iter();
    for _ in 0..grid {
        grouped.push(it.by_ref().take(reps).collect());
    }
    Ok(grouped)
}

fn mean_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, Some((var / m).sqrt()))
}

pub fn realized_count(g: &GraphSample, h: &SubgraphPattern) -> f64 {
    if h.is_clique() {
        count_cliques(g, h.k()).value() as f64
    } else {
        count_subgraph_copies(g, h).value() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub replicas: usize,
    pub mean: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub config: ExperimentConfig,
    pub pattern: String,
    pub assumption1: bool,
    pub expected_slope: f64,
    pub tolerance: f64,
    pub rows: Vec<ScalingRow>,
    pub fit: Option<SlopeFit>,
    pub verdict: Option<bool>,
}

/// Mean count of `H` against `n`, with a log-log slope compared to the
/// clique exponent `k(2-α)/2` or, for general patterns, `B(H)`.
pub fn run_expectation_scaling(config: &ExperimentConfig) -> Result<ScalingReport> {
    config.validate()?;
    let h = config.target_pattern()?;
    let alpha = config.alpha;
    let expected_slope = if h.is_clique() && h.k() >= 2 {
        expected_clique_exponent(h.k(), alpha)?.value
    } else {
        solve_b(&h, alpha)?.value.unwrap_or(f64::NAN)
    };
    let assumption1 = check_assumption1(&h, alpha)?;
    let counts = replicate(config, |n, _, seed| {
        let w = sample_weights(n, alpha, seed.child(0))?;
        if config.conditional {
            conditional_expected_auto(&w, &h, config.samples, seed.child(1)).map(|c| c.value)
        } else {
            Ok(realized_count(&sample_graph(&w, seed.child(1)), &h))
        }
    })?;
    let rows: Vec<ScalingRow> = config
        .n_grid
        .iter()
        .zip(&counts)
        .map(|(&n, values)| {
            let (mean, stderr) = mean_stderr(values);
            ScalingRow {
                n,
                replicas: values.len(),
                mean,
                stderr,
            }
        })
        .collect();
    let fit = if config.replicas >= 2 && rows.len() >= 3 && rows.iter().all(|r| r.mean > 0.0) {
        Some(fit_log_slope(&rows.iter().map(|r| (r.n as f64, r.mean)).collect::<Vec<_>>())?)
    } else {
        None
    };
    let verdict = fit.map(|f| (f.slope - expected_slope).abs() <= SLOPE_TOLERANCE);
    Ok(ScalingReport {
        config: config.clone(),
        pattern: h.edge_string(),
        assumption1,
        expected_slope,
        tolerance: SLOPE_TOLERANCE,
        rows,
        fit,
        verdict,
    })
}

impl Tabular for ScalingReport {
    fn columns(&self) -> Vec<&'static str> {
        vec!["n", "replicas", "mean", "stderr", "expected_slope", "fitted_slope", "verdict"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n as u64),
                    Cell::Int(r.replicas as u64),
                    Cell::Float(r.mean),
                    Cell::opt(r.stderr),
                    Cell::Float(self.expected_slope),
                    Cell::opt(self.fit.map(|f| f.slope)),
                    self.verdict.map_or(Cell::Empty, Cell::Bool),
                ]
            })
            .collect()
    }

    fn plotdata(&self) -> PlotData {
        PlotData {
            title: format!("mean count of {} (alpha = {})", self.pattern, self.config.alpha),
            x_label: "n".into(),
            y_label: "mean count".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                name: "mean".into(),
                x: self.rows.iter().map(|r| r.n as f64).collect(),
                y: self.rows.iter().map(|r| r.mean).collect(),
                yerr: self.rows.iter().map(|r| r.stderr).collect(),
                reference_slope: Some(self.expected_slope),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedRow {
    pub n: usize,
    pub hub_weight: f64,
    pub hubs: usize,
    pub baseline_mean: f64,
    pub baseline_stderr: Option<f64>,
    pub planted_mean: f64,
    pub planted_stderr: Option<f64>,
    pub ratio: f64,
    pub target: f64,
    /// `(k-2)(1 - α log_n c_a(n))`: exponent of the probability of seeing
    /// that many hubs naturally.
    pub probability_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedReport {
    pub config: ExperimentConfig,
    pub warning: Option<String>,
    pub rows: Vec<PlantedRow>,
}

/// Paired comparison of the k-clique count with and without `k-2` hubs of
/// weight `c_a(n)`: the same weights and graph seed are used for both arms,
/// with the first `k-2` weights overwritten in the planted arm.
pub fn run_planted_hub_experiment(config: &ExperimentConfig) -> Result<PlantedReport> {
    config.validate()?;
    let (k, alpha, a) = (config.k, config.alpha, config.a);
    if k < 3 {
        return Err(Error::param("planted-hub experiment needs k >= 3"));
    }
    let warning = (alpha <= 2.0 - 2.0 / k as f64).then(|| {
        format!("alpha = {alpha} is not above 2 - 2/k = {:.4}; c_a(n) need not exceed the typical maximum", 2.0 - 2.0 / k as f64)
    });
    let hubs = k - 2;
    let thresholds: Vec<f64> = config
        .n_grid
        .iter()
        .map(|&n| solve_c_a(n, a, k, alpha, 1e-6))
        .collect::<Result<_>>()?;
    let grid = config.n_grid.clone();
    let pairs = replicate(config, |n, _, seed| {
        let i = grid.iter().position(|&m| m == n).expect("n from grid");
        let w = sample_weights(n, alpha, seed.child(0))?;
        let planted = plant_hubs(&w, &vec![thresholds[i]; hubs])?;
        let base = count_cliques(&sample_graph(&w, seed.child(1)), k).value() as f64;
        let with_hubs = count_cliques(&sample_graph(&planted, seed.child(1)), k).value() as f64;
        Ok((base, with_hubs))
    })?;
    let rows = config
        .n_grid
        .iter()
        .zip(&thresholds)
        .zip(&pairs)
        .map(|((&n, &c), values)| {
            let base: Vec<f64> = values.iter().map(|p| p.0).collect();
            let plant: Vec<f64> = values.iter().map(|p| p.1).collect();
            let (bm, bs) = mean_stderr(&base);
            let (pm, ps) = mean_stderr(&plant);
            PlantedRow {
                n,
                hub_weight: c,
                hubs,
                baseline_mean: bm,
                baseline_stderr: bs,
                planted_mean: pm,
                planted_stderr: ps,
                ratio: pm / bm,
                target: 1.0 + a,
                probability_exponent: hubs as f64 * (1.0 - alpha * c.ln() / (n as f64).ln()),
            }
        })
        .collect();
    Ok(PlantedReport {
        config: config.clone(),
        warning,
        rows,
    })
}

impl Tabular for PlantedReport {
    fn columns(&self) -> Vec<&'static str> {
        vec![
            "n",
            "hub_weight",
            "hubs",
            "baseline_mean",
            "baseline_stderr",
            "planted_mean",
            "planted_stderr",
            "ratio",
            "target",
            "probability_exponent",
        ]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n as u64),
                    Cell::Float(r.hub_weight),
                    Cell::Int(r.hubs as u64),
                    Cell::Float(r.baseline_mean),
                    Cell::opt(r.baseline_stderr),
                    Cell::Float(r.planted_mean),
                    Cell::opt(r.planted_stderr),
                    Cell::Float(r.ratio),
                    Cell::Float(r.target),
                    Cell::Float(r.probability_exponent),
                ]
            })
            .collect()
    }

    fn plotdata(&self) -> PlotData {
        let x: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        PlotData {
            title: format!("planted hubs, k = {}, alpha = {}, a = {}", self.config.k, self.config.alpha, self.config.a),
            x_label: "n".into(),
            y_label: "mean k-clique count".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series {
                    name: "baseline".into(),
                    x: x.clone(),
                    y: self.rows.iter().map(|r| r.baseline_mean).collect(),
                    yerr: self.rows.iter().map(|r| r.baseline_stderr).collect(),
                    reference_slope: expected_clique_exponent(self.config.k, self.config.alpha).ok().map(|e| e.value),
                },
                Series {
                    name: "planted".into(),
                    x,
                    y: self.rows.iter().map(|r| r.planted_mean).collect(),
                    yerr: self.rows.iter().map(|r| r.planted_stderr).collect(),
                    reference_slope: None,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Row {
    pub index: usize,
    pub edges: String,
    pub edge_count: usize,
    pub aut: u64,
    pub b: f64,
    pub assumption1: bool,
    /// Largest γ with `R = 0`.
    pub typical_threshold: f64,
    pub r_feasible: bool,
    pub r: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub hubs: Option<usize>,
    pub theta: Option<f64>,
    pub grid_r: Option<f64>,
    pub grid_feasible: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Report {
    pub alpha: f64,
    pub gamma: f64,
    pub k: usize,
    pub grid: usize,
    pub rows: Vec<Figure1Row>,
}

/// Grid resolution used for the figure-1 cross-check when none is given.
pub fn default_grid(k: usize) -> usize {
    match k {
        0..=4 => 100,
        5 => 50,
        _ => 30,
    }
}

/// `B`, `R`, `β*` and (when `R` is infeasible) `θ` for every connected
/// pattern on `k` vertices, each row cross-checked against the grid oracle.
pub fn run_figure1_table(alpha: f64, gamma: f64, k: usize, grid: Option<usize>) -> Result<Figure1Report> {
    if !(3..=6).contains(&k) {
        return Err(Error::param(format!("figure1 needs 3 <= k <= 6, got {k}")));
    }
    let g = grid.unwrap_or_else(|| default_grid(k));
    let patterns = enumerate_connected(k)?;
    let rows = patterns
        .iter()
        .enumerate()
        .map(|(index, h)| {
            let b = solve_b(h, alpha)?.value.unwrap_or(f64::NAN);
            let r = solve_r(h, alpha, gamma)?;
            let theta = if r.feasible {
                None
            } else {
                solve_exponential_theta(h, alpha, gamma)?.value
            };
            let oracle = grid_oracle_r(h, alpha, gamma, g)?;
            let agree = r.feasible == oracle.feasible
                && match (r.value, oracle.value) {
                    (Some(x), Some(y)) => (x - y).abs() <= 2.0 * k as f64 / g as f64,
                    _ => true,
                };
            Ok(Figure1Row {
                index,
                edges: h.edge_string(),
                edge_count: h.edge_count(),
                aut: h.aut_count(),
                b,
                assumption1: check_assumption1(h, alpha)?,
                typical_threshold: typical_threshold(h, alpha)?,
                r_feasible: r.feasible,
                r: r.value,
                hubs: r.beta.as_ref().map(|b| b.hubs(alpha).len()),
                beta: r.beta.map(|b| b.as_slice().to_vec()),
                theta,
                grid_r: oracle.value,
                grid_feasible: oracle.feasible,
                agree,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Figure1Report {
        alpha,
        gamma,
        k,
        grid: g,
        rows,
    })
}

fn fmt_beta(beta: &[f64]) -> String {
    beta.iter().map(|b| format!("{:.6}", b)).collect::<Vec<_>>().join(" ")
}

impl Tabular for Figure1Report {
    fn columns(&self) -> Vec<&'static str> {
        vec![
            "index",
            "edges",
            "edge_count",
            "aut",
            "B",
            "assumption1",
            "typical_threshold",
            "R_feasible",
            "R",
            "beta",
            "hubs",
            "theta",
            "grid_R",
            "grid_feasible",
            "agree",
        ]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.index as u64),
                    Cell::Text(r.edges.clone()),
                    Cell::Int(r.edge_count as u64),
                    Cell::Int(r.aut),
                    Cell::Float(r.b),
                    Cell::Bool(r.assumption1),
                    Cell::Float(r.typical_threshold),
                    Cell::Bool(r.r_feasible),
                    Cell::opt(r.r),
                    r.beta.as_ref().map_or(Cell::Empty, |b| Cell::Text(fmt_beta(b))),
                    r.hubs.map_or(Cell::Empty, |h| Cell::Int(h as u64)),
                    Cell::opt(r.theta),
                    Cell::opt(r.grid_r),
                    Cell::Bool(r.grid_feasible),
                    Cell::Bool(r.agree),
                ]
            })
            .collect()
    }

    fn plotdata(&self) -> PlotData {
        let feasible: Vec<&Figure1Row> = self.rows.iter().filter(|r| r.r_feasible).collect();
        let infeasible: Vec<&Figure1Row> = self.rows.iter().filter(|r| !r.r_feasible).collect();
        PlotData {
            title: format!("rates for connected patterns on {} vertices (alpha = {}, gamma = {})", self.k, self.alpha, self.gamma),
            x_label: "edge count".into(),
            y_label: "R(H) or theta".into(),
            log_x: false,
            log_y: false,
            series: vec![
                Series {
                    name: "R".into(),
                    x: feasible.iter().map(|r| r.edge_count as f64).collect(),
                    y: feasible.iter().map(|r| r.r.unwrap_or(f64::NAN)).collect(),
                    yerr: None,
                    reference_slope: None,
                },
                Series {
                    name: "theta".into(),
                    x: infeasible.iter().map(|r| r.edge_count as f64).collect(),
                    y: infeasible.iter().map(|r| r.theta.unwrap_or(f64::NAN)).collect(),
                    yerr: None,
                    reference_slope: None,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub n: usize,
    pub threshold: f64,
    pub replicas: usize,
    pub hits: usize,
    pub frequency: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub config: ExperimentConfig,
    pub pattern: String,
    pub gamma: f64,
    pub predicted_rate: f64,
    pub tolerance: f64,
    pub rows: Vec<TailRow>,
    pub fit: Option<SlopeFit>,
    pub verdict: Option<bool>,
}

/// Frequency of `{C^{(n)}(H) > n^γ}` over weight draws, where `C^{(n)}` is
/// the expected count given the weights, against `n^{R(H)}`.
///
/// Refuses when `R(H)` is infeasible or when the predicted probability at
/// the largest `n` is below what the replica budget can resolve.
pub fn run_tail_probability_scan(config: &ExperimentConfig) -> Result<TailReport> {
    config.validate()?;
    let h = config.target_pattern()?;
    let (alpha, gamma) = (config.alpha, config.gamma()?);
    let rate = solve_r(&h, alpha, gamma)?;
    let Some(predicted_rate) = rate.value else {
        return Err(Error::Refused(format!(
            "no weight profile reaches n^{gamma} copies (R infeasible); \
             large deviations at this level need a growing number of hubs, \
             see the planted experiment"
        )));
    };
    let n_max = *config.n_grid.last().expect("validated");
    let predicted = (n_max as f64).powf(predicted_rate);
    let resolvable = MIN_TAIL_PROBABILITY.max(10.0 / config.replicas as f64);
    if predicted < resolvable {
        return Err(Error::Refused(format!(
            "predicted probability n^R = {predicted:.3e} at n = {n_max} is below {resolvable:.1e}, \
             too rare to estimate with {} replicas; use the planted experiment instead",
            config.replicas
        )));
    }
    let hits = replicate(config, |n, _, seed| {
        let w = sample_weights(n, alpha, seed.child(0))?;
        let c = conditional_expected_auto(&w, &h, config.samples, seed.child(1))?.value;
        Ok(c > (n as f64).powf(gamma))
    })?;
    let rows: Vec<TailRow> = config
        .n_grid
        .iter()
        .zip(&hits)
        .map(|(&n, h)| {
            let count = h.iter().filter(|&&x| x).count();
            let p = count as f64 / h.len() as f64;
            TailRow {
                n,
                threshold: (n as f64).powf(gamma),
                replicas: h.len(),
                hits: count,
                frequency: p,
                stderr: (p * (1.0 - p) / h.len() as f64).sqrt(),
            }
        })
        .collect();
    let fit = if rows.len() >= 3 && rows.iter().all(|r| r.hits > 0) {
        Some(fit_log_slope(&rows.iter().map(|r| (r.n as f64, r.frequency)).collect::<Vec<_>>())?)
    } else {
        None
    };
    let verdict = fit.map(|f| (f.slope - predicted_rate).abs() <= TAIL_TOLERANCE);
    Ok(TailReport {
        config: config.clone(),
        pattern: h.edge_string(),
        gamma,
        predicted_rate,
        tolerance: TAIL_TOLERANCE,
        rows,
        fit,
        verdict,
    })
}

impl Tabular for TailReport {
    fn columns(&self) -> Vec<&'static str> {
        vec!["n", "threshold", "replicas", "hits", "frequency", "stderr", "predicted_rate", "fitted_slope", "verdict"]
    }

    fn rows(&self) -> Vec<Vec<Cell>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n as u64),
                    Cell::Float(r.threshold),
                    Cell::Int(r.replicas as u64),
                    Cell::Int(r.hits as u64),
                    Cell::Float(r.frequency),
                    Cell::Float(r.stderr),
                    Cell::Float(self.predicted_rate),
                    Cell::opt(self.fit.map(|f| f.slope)),
                    self.verdict.map_or(Cell::Empty, Cell::Bool),
                ]
            })
            .collect()
    }

    fn plotdata(&self) -> PlotData {
        PlotData {
            title: format!("P(C > n^{}) for {} (alpha = {})", self.gamma, self.pattern, self.config.alpha),
            x_label: "n".into(),
            y_label: "frequency".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                name: "frequency".into(),
                x: self.rows.iter().map(|r| r.n as f64).collect(),
                y: self.rows.iter().map(|r| r.frequency).collect(),
                yerr: Some(self.rows.iter().map(|r| r.stderr).collect()),
                reference_slope: Some(self.predicted_rate),
            }],
        }
    }
}
