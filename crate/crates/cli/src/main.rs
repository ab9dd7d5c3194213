use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use terminator_tcp::dataset::{ingest, Format};
use terminator_tcp::sim::{simulate, Algorithm, EvaluationReport, ReportFormat, SimulationConfig, Timing};
use terminator_tcp::synth::{generate_synthetic, SyntheticSpec};
use terminator_tcp::{Error, SessionHistory};

const CELLS_FILE: &str = "cells.json";

#[derive(Parser)]
#[command(name = "tcprio", version, about = "Replay-simulate test-case prioritization strategies")]
struct Cli {
    /// key = value file whose keys mirror the long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and print a summary.
    Ingest {
        file: PathBuf,
        /// jsonl or csv; guessed from the extension by default.
        #[arg(long)]
        format: Option<String>,
    },
    /// Replay sessions and score the selected strategies.
    Simulate(SimulateArgs),
    /// Generate a synthetic history as JSONL.
    Synth(SynthArgs),
    /// Re-render the report of a previous simulation.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated ids (A1,A2,B1..B5,C1,D1..D3,E1..E3,F1..F3) or "all".
    #[arg(long)]
    algos: Option<String>,
    /// 1-based first session to prioritize.
    #[arg(long)]
    start: Option<usize>,
    /// Range "1..20" (inclusive) or list "1,2,5".
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Record zero overhead, making outputs reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    tests: Option<usize>,
    #[arg(long)]
    sessions: Option<usize>,
    #[arg(long)]
    base_rate: Option<f64>,
    #[arg(long)]
    persistence: Option<f64>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    cluster_break_rate: Option<f64>,
    #[arg(long)]
    cluster_correlation: Option<f64>,
    #[arg(long)]
    skip_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Dataset the simulation ran on; needed for curve-csv.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Options from the config file, keyed by flag name with `-` and `_` unified.
#[derive(Default)]
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))
    }

    fn parse(text: &str) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, message: "expected key = value".into() })?;
            map.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|v| v.parse().map_err(|e| Error::Config(format!("{key} = {v:?}: {e}"))))
            .transpose()
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::Config(format!("--{name} is required")))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::Config(format!("bad seed list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn parse_algos(s: &str) -> Result<Vec<Algorithm>, Error> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    Algorithm::parse_list(s)
}

fn load_dataset(path: &Path, format: Option<&str>) -> Result<SessionHistory, Error> {
    let format = match format {
        Some(f) => f.parse()?,
        None => Format::from_path(path),
    };
    ingest(path, format)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_ingest(file: &Path, format: Option<&str>) -> anyhow::Result<()> {
    let h = load_dataset(file, format)?;
    let failing_sessions = (0..h.session_count()).filter(|&s| !h.failures(s).is_empty()).count();
    let failures: usize = (0..h.session_count()).map(|s| h.failures(s).len()).sum();
    println!("tests: {}", h.n_tests());
    println!("sessions: {}", h.session_count());
    println!("sessions with failures: {failing_sessions}");
    println!("failures: {failures}");
    Ok(())
}

/// Per-cell execution order as test ids, the serialized form of an order.
#[derive(Serialize)]
struct OrderRecord<'a> {
    session: &'a str,
    algorithm: Algorithm,
    seed: Option<u64>,
    order: Vec<&'a str>,
}

fn write_orders(report: &EvaluationReport, h: &SessionHistory, path: &Path) -> anyhow::Result<()> {
    let mut w = create(path)?;
    for c in &report.cells {
        let rec = OrderRecord {
            session: &h.session_ids()[c.session],
            algorithm: c.algorithm,
            seed: c.seed,
            order: c.order.iter().map(|&t| h.test(t).test_id.as_str()).collect(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn run_simulate(args: SimulateArgs, file: &FileConfig) -> anyhow::Result<()> {
    let data: PathBuf = required(file.pick(args.data, "data")?, "data")?;
    let out: PathBuf = required(file.pick(args.out, "out")?, "out")?;
    let defaults = SimulationConfig::default();
    let config = SimulationConfig {
        algorithms: match file.pick(args.algos, "algos")? {
            Some(s) => parse_algos(&s)?,
            None => defaults.algorithms,
        },
        start_session: file.pick(args.start, "start")?.unwrap_or(defaults.start_session),
        seeds: match file.pick(args.seeds, "seeds")? {
            Some(s) => parse_seeds(&s)?,
            None => defaults.seeds,
        },
        batch_size: file.pick(args.n1, "n1")?.unwrap_or(defaults.batch_size),
        certainty_threshold: file.pick(args.n2, "n2")?.unwrap_or(defaults.certainty_threshold),
        alpha: file.pick(args.alpha, "alpha")?.unwrap_or(defaults.alpha),
        timing: if args.no_timing || file.get::<bool>("no-timing")?.unwrap_or(false) {
            Timing::Disabled
        } else {
            Timing::WallClock
        },
    };
    config.validate()?;

    let h = load_dataset(&data, None)?;
    info!("loaded {} tests x {} sessions from {}", h.n_tests(), h.session_count(), data.display());
    let report = simulate(&h, &config)?;

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = create(&out.join(CELLS_FILE))?;
    serde_json::to_writer(&mut w, &report.cells)?;
    w.flush()?;
    write_orders(&report, &h, &out.join("orders.jsonl"))?;
    report.write_table(create(&out.join("report.txt"))?)?;
    report.write_csv(create(&out.join("report.csv"))?)?;
    report.write_curves(&h, create(&out.join("curves.csv"))?)?;
    report.write_table(io::stdout().lock())?;
    info!("wrote {} cells to {}", report.cells.len(), out.display());
    Ok(())
}

fn run_synth(args: SynthArgs, file: &FileConfig) -> anyhow::Result<()> {
    let d = SyntheticSpec::default();
    let spec = SyntheticSpec {
        n_tests: file.pick(args.tests, "tests")?.unwrap_or(d.n_tests),
        n_sessions: file.pick(args.sessions, "sessions")?.unwrap_or(d.n_sessions),
        base_rate: file.pick(args.base_rate, "base-rate")?.unwrap_or(d.base_rate),
        persistence: file.pick(args.persistence, "persistence")?.unwrap_or(d.persistence),
        n_clusters: file.pick(args.clusters, "clusters")?.unwrap_or(d.n_clusters),
        cluster_break_rate: file
            .pick(args.cluster_break_rate, "cluster-break-rate")?
            .unwrap_or(d.cluster_break_rate),
        cluster_correlation: file
            .pick(args.cluster_correlation, "cluster-correlation")?
            .unwrap_or(d.cluster_correlation),
        skip_rate: file.pick(args.skip_rate, "skip-rate")?.unwrap_or(d.skip_rate),
        seed: file.pick(args.seed, "seed")?.unwrap_or(d.seed),
        ..d
    };
    let out: Option<PathBuf> = file.pick(args.out, "out")?;
    let h = generate_synthetic(&spec)?;
    let mut w = output(out.as_deref())?;
    h.write_jsonl(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run_report(args: ReportArgs, file: &FileConfig) -> anyhow::Result<()> {
    let input: PathBuf = required(file.pick(args.input, "input")?, "input")?;
    let format: ReportFormat = match file.pick(args.format, "format")? {
        Some(f) => f.parse::<ReportFormat>()?,
        None => ReportFormat::Table,
    };
    let data: Option<PathBuf> = file.pick(args.data, "data")?;
    let out: Option<PathBuf> = file.pick(args.out, "out")?;
    if format == ReportFormat::CurveCsv && data.is_none() {
        return Err(Error::Config("curve-csv needs --data".into()).into());
    }

    let path = input.join(CELLS_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let cells = serde_json::from_str(&text).map_err(Error::from)?;
    let report = EvaluationReport::from_cells(cells);
    let history = data.as_deref().map(|p| load_dataset(p, None)).transpose()?;
    let mut w = output(out.as_deref())?;
    report.write(format, history.as_ref(), &mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Ingest { file: path, format } => {
            let format = file.pick(format, "format")?;
            run_ingest(&path, format.as_deref())
        }
        Command::Simulate(a) => run_simulate(a, &file),
        Command::Synth(a) => run_synth(a, &file),
        Command::Report(a) => run_report(a, &file),
    }
}

/// Malformed data and bad options exit with 2; I/O failures with 1.
fn is_validation(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<Error>().is_some_and(|e| !matches!(e, Error::Io { .. }))
            || c.downcast_ref::<serde_json::Error>().is_some()
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { 2 } else { 1 })
        }
    }
}
