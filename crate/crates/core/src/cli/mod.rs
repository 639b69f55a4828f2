//! Subcommand front end. Exit codes: 0 success, 1 I/O failure, 2 parse
//! error, 3 validation failure, 4 search exhausted, 5 prime-power blocked.

pub mod docs;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::code::{build, validate, CodeSpec, Side, ValidationReport};
use crate::decoder::{Classifier, Decoder};
use crate::deval::{run as de_run, threshold, DeConfig, DeModel};
use crate::ets::{build_full_library, count, read_library, verify_library, write_library, Pattern};
use crate::gf2::write_alist;
use crate::girth::{block_8cycle_count, census, girth};
use crate::latdist::{latent_distance, LatentContext};
use crate::search::{construct, SearchError};
use crate::simulator::{read_csv, run_point, write_csv, FerPoint};

use docs::{
    digest, spec_digest, CodeSpecDocument, DocError, Provenance, SearchConfigDocument, SimulationDocument, TOOL_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_EXHAUSTED: i32 = 4;
pub const EXIT_BLOCKED: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<DocError> for CliError {
    fn from(e: DocError) -> Self {
        let code = match e {
            DocError::Parse(_) | DocError::Schema(_) => EXIT_PARSE,
            DocError::Invalid(_) => EXIT_VALIDATION,
        };
        Self::new(code, e.to_string())
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "apmqc",
    version,
    about = "Affine-permutation quantum LDPC codes: construct, analyse, simulate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    X,
    Z,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::X => Side::X,
            SideArg::Z => Side::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Joint,
    Binary,
    Bsc,
}

impl From<ModelArg> for DeModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Joint => DeModel::Joint,
            ModelArg::Binary => DeModel::Binary,
            ModelArg::Bsc => DeModel::Bsc,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for (or replay) an assignment and write its spec document.
    Construct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Search log destination (stderr when omitted).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Structural checks and girth of a spec.
    Validate {
        spec: PathBuf,
        /// Also write the JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Lifted cycle counts per side.
    Cycles {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        lengths: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elementary trapping-set library (JSON lines).
    Ets {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<String>>,
    },
    /// Latent-based distance upper bound.
    Latdist {
        spec: PathBuf,
        #[arg(long, default_value_t = 192)]
        stride: usize,
        #[arg(long, default_value_t = 3)]
        combos: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo FER campaign; resumes from an existing CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Density-evolution threshold by bisection.
    De {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// `lo,hi`
        #[arg(long, value_delimiter = ',')]
        bracket: Option<Vec<f64>>,
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the error-proxy trajectory at this p instead of bisecting.
        #[arg(long)]
        trajectory: Option<f64>,
    },
    /// Export an active (or latent) check matrix in alist format.
    Alist {
        spec: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        latent: bool,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: CliError) -> CliError {
    CliError::new(e.code, format!("{}: {}", path.display(), e.message))
}

pub fn load_spec(path: &Path) -> Result<CodeSpec, CliError> {
    let text = read(path)?;
    CodeSpecDocument::parse(&text)
        .and_then(|d| d.to_spec())
        .map_err(|e| with_path(path, e.into()))
}

fn header(spec: &CodeSpec) -> String {
    format!("# {TOOL_VERSION}, spec {}\n", spec_digest(spec))
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult {
    print!("{text}");
    match out {
        Some(p) => write(p, text),
        None => Ok(()),
    }
}

fn execute(cmd: Command) -> CliResult {
    match cmd {
        Command::Construct { config, out, log, seed } => cmd_construct(&config, &out, log.as_deref(), seed),
        Command::Validate { spec, summary } => cmd_validate(&spec, summary.as_deref()),
        Command::Cycles { spec, lengths, out } => {
            let spec = load_spec(&spec)?;
            if let Some(&bad) = lengths.iter().find(|&&l| l < 4 || l % 2 != 0) {
                return Err(CliError::new(
                    EXIT_VALIDATION,
                    format!("cycle length {bad} must be even and >= 4"),
                ));
            }
            emit(out.as_ref(), &cycles_report(&spec, &lengths))
        }
        Command::Ets { spec, out, patterns } => cmd_ets(&spec, &out, patterns),
        Command::Latdist {
            spec,
            stride,
            combos,
            out,
        } => {
            let spec = load_spec(&spec)?;
            let pair = build(&spec);
            let ctx = LatentContext::new(&spec, &pair);
            let report = latent_distance(&ctx, stride, combos);
            emit(out.as_ref(), &format!("{}{report}", header(&spec)))
        }
        Command::Simulate {
            spec,
            config,
            library,
            out,
            seed,
            workers,
        } => cmd_simulate(&spec, &config, library.as_deref(), &out, seed, workers),
        Command::De {
            config,
            j,
            l,
            population,
            iterations,
            bracket,
            resolution,
            seed,
            model,
            out,
            trajectory,
        } => {
            let mut cfg = match &config {
                Some(p) => DeConfig::from_toml(&read(p)?).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?,
                None => DeConfig::default(),
            };
            cfg.j = j.unwrap_or(cfg.j);
            cfg.l = l.unwrap_or(cfg.l);
            cfg.population = population.unwrap_or(cfg.population);
            cfg.iterations = iterations.unwrap_or(cfg.iterations);
            cfg.resolution = resolution.unwrap_or(cfg.resolution);
            cfg.seed = seed.unwrap_or(cfg.seed);
            if let Some(m) = model {
                cfg.model = m.into();
            }
            if let Some(b) = bracket {
                let [lo, hi] = b[..] else {
                    return Err(CliError::new(EXIT_PARSE, "--bracket takes two values: lo,hi"));
                };
                cfg.bracket = [lo, hi];
            }
            let head = format!("# {TOOL_VERSION}, config {}\n", digest(&cfg.to_toml()));
            if let Some(p) = trajectory {
                let t = de_run(&cfg, p);
                return emit(out.as_ref(), &format!("{head}{}", t.to_csv()));
            }
            let report = threshold(&cfg).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
            emit(out.as_ref(), &format!("{head}{report}\n"))
        }
        Command::Alist {
            spec,
            side,
            out,
            latent,
        } => {
            let spec = load_spec(&spec)?;
            let pair = build(&spec);
            let side: Side = side.into();
            let m = if latent { pair.latent(side) } else { pair.active(side) };
            write(&out, &write_alist(m))
        }
    }
}

fn cmd_construct(config: &Path, out: &Path, log: Option<&Path>, seed: Option<u64>) -> CliResult {
    let text = read(config)?;
    let mut doc = SearchConfigDocument::parse(&text).map_err(|e| with_path(config, e.into()))?;
    if let Some(s) = seed {
        doc.seed = s;
    }
    let cfg = doc.to_config().map_err(|e| with_path(config, e.into()))?;
    let outcome = construct(&cfg).map_err(|e| {
        let code = match e {
            SearchError::Blocked(_) => EXIT_BLOCKED,
            SearchError::Exhausted { .. } => EXIT_EXHAUSTED,
            SearchError::Table(_) | SearchError::Config(_) | SearchError::FixedRejected(_) => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    })?;
    let prov = Provenance {
        seed: Some(doc.seed),
        tool_version: TOOL_VERSION.into(),
        config_digest: Some(digest(&doc.emit())),
    };
    write(out, &CodeSpecDocument::from_spec(&outcome.spec, prov).emit())?;
    let log_text = format!("{}{}", header(&outcome.spec), outcome.log);
    match log {
        Some(p) => write(p, &log_text),
        None => {
            eprint!("{log_text}");
            Ok(())
        }
    }
}

/// Machine-readable part of `validate`.
#[derive(Debug, Serialize)]
pub struct ValidateSummary {
    pub tool_version: String,
    pub spec_digest: String,
    pub all_pass: bool,
    pub girth: Option<usize>,
    pub report: ValidationReport,
}

pub fn validate_summary(spec: &CodeSpec) -> ValidateSummary {
    let pair = build(spec);
    let report = validate(&pair, spec);
    ValidateSummary {
        tool_version: TOOL_VERSION.into(),
        spec_digest: spec_digest(spec),
        all_pass: report.all_pass(),
        girth: girth(spec),
        report,
    }
}

fn cmd_validate(path: &Path, summary_out: Option<&Path>) -> CliResult {
    let spec = load_spec(path)?;
    let summary = validate_summary(&spec);
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    println!("{}{}", header(&spec), summary.report.to_string().trim_end());
    println!("girth = {}", summary.girth.map_or("none".into(), |g| g.to_string()));
    println!("--- summary ---\n{json}");
    if let Some(p) = summary_out {
        write(p, &(json + "\n"))?;
    }
    if summary.all_pass {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_VALIDATION,
            format!("validation failed: {}", summary.report.failures().join("; ")),
        ))
    }
}

pub fn cycles_report(spec: &CodeSpec, lengths: &[usize]) -> String {
    let c = census(spec, lengths);
    let mut s = header(spec);
    s.push_str(&c.to_string());
    if spec.is_standard_active() {
        let b = block_8cycle_count(&spec.delta(), spec.half());
        s.push_str(&format!(
            "block-level 8-cycles = {b}, lifted lower bound = {b} x {} = {}\n",
            spec.lift(),
            b * spec.lift()
        ));
    }
    s
}

fn cmd_ets(path: &Path, out: &Path, patterns: Option<Vec<String>>) -> CliResult {
    let spec = load_spec(path)?;
    let patterns: Vec<Pattern> = match patterns {
        None => Pattern::ALL.to_vec(),
        Some(list) => list
            .iter()
            .map(|s| s.parse().map_err(|e: String| CliError::new(EXIT_PARSE, e)))
            .collect::<Result<_, _>>()?,
    };
    let lib = build_full_library(&spec, &patterns);
    verify_library(&spec, &lib).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
    write(out, &format!("{}{}", header(&spec), write_library(&lib)))?;
    print!("{}", header(&spec));
    for side in Side::BOTH {
        for &p in &patterns {
            println!("{side} {p}: {}", count(&lib, side, p));
        }
    }
    println!("total entries: {}", lib.len());
    Ok(())
}

fn cmd_simulate(
    spec_path: &Path,
    config: &Path,
    library: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    workers: Option<usize>,
) -> CliResult {
    let spec = load_spec(spec_path)?;
    let mut doc = SimulationDocument::parse(&read(config)?).map_err(|e| with_path(config, e.into()))?;
    if let Some(s) = seed {
        doc.seed = s;
    }
    let workers = match workers.unwrap_or(doc.workers) {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    };
    let pair = build(&spec);
    let report = validate(&pair, &spec);
    if !report.all_pass() {
        return Err(CliError::new(
            EXIT_VALIDATION,
            format!("spec fails validation: {}", report.failures().join("; ")),
        ));
    }
    let mut decoder = Decoder::new(&pair, doc.decoder.clone());
    match library {
        Some(p) if p.exists() => {
            let lib = read_library(&read(p)?).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?;
            verify_library(&spec, &lib).map_err(|e| CliError::new(EXIT_VALIDATION, e.to_string()))?;
            decoder = decoder.with_library(lib);
        }
        Some(p) => eprintln!(
            "warning: library {} not found; decoding without trapping-set lookup",
            p.display()
        ),
        None => eprintln!("warning: no library given; decoding without trapping-set lookup"),
    }
    let classifier = Classifier::new(&pair);
    let digest = decoder.cfg.digest();
    let mut points: Vec<FerPoint> = if out.exists() {
        read_csv(&read(out)?).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", out.display())))?
    } else {
        Vec::new()
    };
    for &p in &doc.p {
        if points
            .iter()
            .any(|pt| pt.p == p && pt.seed == doc.seed && pt.config_digest == digest)
        {
            eprintln!("p = {p}: already complete, skipping");
            continue;
        }
        let pt = run_point(&decoder, &classifier, p, doc.stop, doc.seed, workers);
        eprintln!("p = {p}: {} events in {} frames", pt.events, pt.frames);
        points.push(pt);
        write(out, &write_csv(&points))?;
    }
    print!("{}", write_csv(&points));
    Ok(())
}

/// Entry point for the binary.
pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(run(["apmqc", "frobnicate"]), EXIT_PARSE);
        let dir = tmp();
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "schema_version = 1\nP = \n").unwrap();
        assert_eq!(
            run(["apmqc".as_ref(), "validate".as_ref(), bad.as_os_str()]),
            EXIT_PARSE
        );
        let missing = dir.path().join("missing.toml");
        assert_eq!(
            run(["apmqc".as_ref(), "validate".as_ref(), missing.as_os_str()]),
            EXIT_IO
        );
    }

    #[test]
    fn de_rejects_invalid_bracket() {
        let code = run([
            "apmqc",
            "de",
            "--model",
            "binary",
            "--population",
            "2000",
            "--iterations",
            "20",
            "--bracket",
            "0.0,0.001",
        ]);
        assert_eq!(code, EXIT_VALIDATION);
    }
}
