use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use irgdev_core::catalog::{enumerate_connected, SubgraphPattern};
use irgdev_core::experiments::{
    replicate, run_expectation_scaling, run_figure1_table, run_planted_hub_experiment,
    run_tail_probability_scan, realized_count, Cell, ExperimentConfig, ExperimentKind, OutputFormat, PlotData,
    Tabular,
};
use irgdev_core::conditional::conditional_expected_auto;
use irgdev_core::model::{sample_graph, sample_weights};
use irgdev_core::optimizer::{check_assumption1, solve_b, solve_exponential_theta, solve_r, typical_threshold};
use irgdev_core::{Error, GraphSample, RateResult};

/// Large deviations of subgraph counts in power-law random graphs.
#[derive(Parser)]
#[command(name = "irgdev", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph and write its edge list.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Number of vertices (default: first n-grid entry).
        #[arg(long)]
        n: Option<usize>,
        /// Also write the weight vector (one weight per line) to this path.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Count copies of a pattern in sampled graphs, or in an edge-list file.
    Count {
        #[command(flatten)]
        common: Common,
        /// Edge list (CSV with header u,v, as written by `sample`).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Expected pattern count conditional on sampled weights.
    Cexpect {
        #[command(flatten)]
        common: Common,
    },
    /// B, R and the exponential-regime theta for one pattern.
    Rates {
        #[command(flatten)]
        common: Common,
    },
    /// All connected patterns on k vertices.
    Catalog {
        #[command(flatten)]
        common: Common,
    },
    /// Mean count against n with a log-log slope fit.
    Scaling {
        #[command(flatten)]
        common: Common,
    },
    /// Count shift caused by planting k-2 hubs of weight c_a(n).
    Planted {
        #[command(flatten)]
        common: Common,
    },
    /// Rate table over every connected pattern on k vertices.
    Figure1 {
        #[command(flatten)]
        common: Common,
    },
    /// Frequency of conditional counts above n^gamma against n.
    Tailscan {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Pattern file: "k m" then m lines "i j".
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Excess factor for the planted experiment.
    #[arg(long)]
    a: Option<f64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json-lines
    #[arg(long)]
    format: Option<String>,
    /// Sample budget for conditional counts too large to sum exactly.
    #[arg(long)]
    samples: Option<usize>,
    /// Grid-oracle resolution for figure1.
    #[arg(long)]
    grid: Option<usize>,
    /// Scaling: average conditional instead of realized counts.
    #[arg(long)]
    conditional: bool,
}

impl Common {
    fn resolve(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str::<ExperimentConfig>(&text)
                    .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let (Some(want), Some(have)) = (kind, c.experiment) {
            if want != have {
                return Err(Error::Parameter(format!(
                    "config file is for the {have:?} experiment, not {want:?}"
                )));
            }
        }
        c.experiment = kind.or(c.experiment);
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(alpha, k, a, n_grid, replicas, seed, samples);
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        if self.pattern.is_some() {
            c.pattern = self.pattern.clone();
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        if let Some(f) = &self.format {
            c.format = f.parse()?;
        }
        c.conditional |= self.conditional;
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 4,
        Error::Refused(_) | Error::InfeasibleThreshold { .. } | Error::Unbounded => 3,
        _ => 2,
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Header plus rows, written as CSV or as one JSON object per row.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn write(&self, format: OutputFormat, out: Option<&Path>) -> Result<(), Error> {
        let label = out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
            None => Box::new(io::stdout().lock()),
        };
        let csv_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: label.clone(),
                source,
            },
            other => Error::Data(format!("{other:?}")),
        };
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                w.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::to_csv)).map_err(csv_err)?;
                }
                w.flush().map_err(io_err(&label))?;
            }
            OutputFormat::JsonLines => {
                let mut w = sink;
                for row in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), serde_json::to_value(v).expect("cell serializes")))
                        .collect();
                    serde_json::to_writer(&mut w, &obj).map_err(|e| Error::Data(e.to_string()))?;
                    w.write_all(b"\n").map_err(io_err(&label))?;
                }
                w.flush().map_err(io_err(&label))?;
            }
        }
        Ok(())
    }
}

/// `results.csv` -> `results.plotdata.json`.
fn plotdata_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.plotdata.json"))
}

#[derive(Serialize)]
struct Companion<'a, R: Serialize> {
    report: &'a R,
    plot: PlotData,
}

fn emit_report<R: Tabular>(report: &R, config: &ExperimentConfig) -> Result<(), Error> {
    let table = Table {
        columns: report.columns(),
        rows: report.rows(),
    };
    table.write(config.format, config.out.as_deref())?;
    if let Some(out) = &config.out {
        let path = plotdata_path(out);
        let file = File::create(&path).map_err(io_err(&path))?;
        let companion = Companion {
            report,
            plot: report.plotdata(),
        };
        serde_json::to_writer_pretty(BufWriter::new(file), &companion)
            .map_err(|e| Error::Data(e.to_string()))?;
        log::info!("wrote {} and {}", out.display(), path.display());
    }
    Ok(())
}

fn read_edge_list(path: &Path) -> Result<GraphSample, Error> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    let mut edges = Vec::new();
    let mut n = 0;
    for record in reader.deserialize::<(usize, usize)>() {
        let (u, v) = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    GraphSample::from_edges(n, &edges)
}

fn rate_cells(program: &str, r: &RateResult) -> Vec<Cell> {
    let pattern = r.pattern.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("");
    vec![
        Cell::Text(program.into()),
        r.value.map_or(Cell::Empty, Cell::Float),
        Cell::Bool(r.feasible),
        Cell::Bool(r.tight),
        r.beta.as_ref().map_or(Cell::Empty, |b| {
            Cell::Text(b.as_slice().iter().map(|x| format!("{x:.9}")).collect::<Vec<_>>().join(" "))
        }),
        Cell::Text(pattern),
    ]
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sample { common, n, weights } => {
            let c = common.resolve(None)?;
            let n = n.unwrap_or(c.n_grid[0]);
            // same stream as replica 0 of the first grid point in `count`
            let seed = c.master().child(0).child(0);
            let w = sample_weights(n, c.alpha, seed.child(0))?;
            let g = sample_graph(&w, seed.child(1));
            log::info!("n = {n}, edges = {}", g.edge_count());
            if let Some(path) = weights {
                let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
                for x in w.as_slice() {
                    writeln!(f, "{x}").map_err(io_err(&path))?;
                }
                f.flush().map_err(io_err(&path))?;
            }
            let table = Table {
                columns: vec!["u", "v"],
                rows: g.edges().map(|(u, v)| vec![Cell::Int(u as u64), Cell::Int(v as u64)]).collect(),
            };
            table.write(c.format, c.out.as_deref())
        }
        Command::Count { common, graph } => {
            let c = common.resolve(None)?;
            let h = c.target_pattern()?;
            let columns = vec!["n", "replica", "count"];
            let rows = if let Some(path) = graph {
                let g = read_edge_list(&path)?;
                vec![vec![Cell::Int(g.n() as u64), Cell::Empty, Cell::Float(realized_count(&g, &h))]]
            } else {
                let counts = replicate(&c, |n, _, seed| {
                    let w = sample_weights(n, c.alpha, seed.child(0))?;
                    Ok(realized_count(&sample_graph(&w, seed.child(1)), &h))
                })?;
                grid_rows(&c, counts, |v| vec![Cell::Float(v)])
            };
            Table { columns, rows }.write(c.format, c.out.as_deref())
        }
        Command::Cexpect { common } => {
            let c = common.resolve(None)?;
            let h = c.target_pattern()?;
            let values = replicate(&c, |n, _, seed| {
                let w = sample_weights(n, c.alpha, seed.child(0))?;
                conditional_expected_auto(&w, &h, c.samples, seed.child(1))
            })?;
            let rows = grid_rows(&c, values, |v| {
                let mode = serde_json::to_value(v.mode).expect("mode serializes");
                vec![
                    Cell::Float(v.value),
                    Cell::Float(v.stderr),
                    Cell::Text(mode.as_str().unwrap_or_default().into()),
                ]
            });
            Table {
                columns: vec!["n", "replica", "value", "stderr", "mode"],
                rows,
            }
            .write(c.format, c.out.as_deref())
        }
        Command::Rates { common } => {
            let c = common.resolve(None)?;
            let h = c.target_pattern()?;
            let b = solve_b(&h, c.alpha)?;
            log::info!(
                "assumption 1: {}, typical threshold: {}",
                check_assumption1(&h, c.alpha)?,
                typical_threshold(&h, c.alpha)?
            );
            let mut results = vec![("B", b)];
            let mut r_infeasible = false;
            if let Some(gamma) = c.gamma {
                let r = solve_r(&h, c.alpha, gamma)?;
                r_infeasible = !r.feasible;
                results.push(("R", r));
                if r_infeasible {
                    results.push(("theta", solve_exponential_theta(&h, c.alpha, gamma)?));
                }
            }
            match c.format {
                OutputFormat::Csv => Table {
                    columns: vec!["program", "value", "feasible", "tight", "beta", "pattern"],
                    rows: results.iter().map(|(p, r)| rate_cells(p, r)).collect(),
                }
                .write(c.format, c.out.as_deref())?,
                OutputFormat::JsonLines => {
                    let label = c.out.clone().unwrap_or_else(|| "<stdout>".into());
                    let mut sink: Box<dyn Write> = match &c.out {
                        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
                        None => Box::new(io::stdout().lock()),
                    };
                    for (program, r) in &results {
                        let mut v = serde_json::to_value(r).expect("rate result serializes");
                        v["program"] = (*program).into();
                        writeln!(sink, "{v}").map_err(io_err(&label))?;
                    }
                    sink.flush().map_err(io_err(&label))?;
                }
            }
            if r_infeasible {
                return Err(Error::Refused(format!(
                    "R is infeasible at gamma = {}; theta reported instead",
                    c.gamma.unwrap_or_default()
                )));
            }
            Ok(())
        }
        Command::Catalog { common } => {
            let c = common.resolve(None)?;
            let patterns = enumerate_connected(c.k)?;
            let rows = patterns
                .iter()
                .enumerate()
                .map(|(i, h): (usize, &SubgraphPattern)| {
                    vec![
                        Cell::Int(i as u64),
                        Cell::Int(h.k() as u64),
                        Cell::Int(h.edge_count() as u64),
                        Cell::Int(h.aut_count()),
                        Cell::Int(h.canonical_code() as u64),
                        Cell::Text(h.edge_string()),
                    ]
                })
                .collect();
            Table {
                columns: vec!["index", "k", "edge_count", "aut", "canonical_code", "edges"],
                rows,
            }
            .write(c.format, c.out.as_deref())
        }
        Command::Scaling { common } => {
            let c = common.resolve(Some(ExperimentKind::Scaling))?;
            let report = run_expectation_scaling(&c)?;
            if !report.assumption1 {
                log::warn!("pattern fails Assumption 1 at alpha = {}; B(H) may not be the scaling exponent", c.alpha);
            }
            emit_report(&report, &c)
        }
        Command::Planted { common } => {
            let c = common.resolve(Some(ExperimentKind::Planted))?;
            let report = run_planted_hub_experiment(&c)?;
            if let Some(w) = &report.warning {
                log::warn!("{w}");
            }
            emit_report(&report, &c)
        }
        Command::Figure1 { common } => {
            let c = common.resolve(Some(ExperimentKind::Figure1))?;
            let gamma = c.gamma.ok_or_else(|| Error::Parameter("figure1 needs --gamma".into()))?;
            if c.pattern.is_some() {
                return Err(Error::Parameter("figure1 covers every pattern on k vertices; --pattern does not apply".into()));
            }
            let report = run_figure1_table(c.alpha, gamma, c.k, c.grid)?;
            let disagreements = report.rows.iter().filter(|r| !r.agree).count();
            if disagreements > 0 {
                log::warn!("{disagreements} rows disagree with the grid oracle");
            }
            emit_report(&report, &c)
        }
        Command::Tailscan { common } => {
            let c = common.resolve(Some(ExperimentKind::Tailscan))?;
            let report = run_tail_probability_scan(&c)?;
            emit_report(&report, &c)
        }
    }
}

/// Rows `n, replica, ...` in task order.
fn grid_rows<T>(c: &ExperimentConfig, values: Vec<Vec<T>>, cells: impl Fn(T) -> Vec<Cell>) -> Vec<Vec<Cell>> {
    let mut rows = Vec::new();
    for (&n, group) in c.n_grid.iter().zip(values) {
        for (r, v) in group.into_iter().enumerate() {
            let mut row = vec![Cell::Int(n as u64), Cell::Int(r as u64)];
            row.extend(cells(v));
            rows.push(row);
        }
    }
    rows
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
