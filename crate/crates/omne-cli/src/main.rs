//! Command line front end: `omne run` answers one program, `omne bench`
//! sweeps a directory of instances and emits a CSV comparison.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use omne::parse::{detect_format, parse, Format};
use omne::{
    cautious_reasoning, CautiousResult, EngineError, EngineOptions, OneOfPolicy, Program,
    ProgressEvent, Strategy,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCOHERENT: u8 = 10;
const EXIT_TIMEOUT: u8 = 20;

#[derive(Parser)]
#[command(
    name = "omne",
    version,
    about = "Cautious reasoning over ground answer-set programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the atoms true in every stable model of one program
    Run(RunArgs),
    /// Run several algorithms over a directory of instances, emitting CSV
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Or,
    Ict,
    Opt,
    One,
    Cm,
    Enum,
}

impl Algo {
    fn strategy(self) -> Strategy {
        match self {
            Algo::Or => Strategy::Or,
            Algo::Ict => Strategy::Ict,
            Algo::Opt => Strategy::Opt,
            Algo::One => Strategy::One,
            Algo::Cm => Strategy::Cm,
            Algo::Enum => Strategy::Enumerate,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Sniff the input: a leading `asp` header means the machine format
    Auto,
    Text,
    Aspif,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OneOfArg {
    /// Pick the candidate with the highest branching activity
    Activity,
    /// Pick the candidate with the lowest atom id
    Index,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    /// Program file to answer
    file: PathBuf,
    /// Refinement algorithm
    #[arg(long, value_enum, default_value_t = Algo::Cm)]
    algorithm: Algo,
    /// Input syntax
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    format: FormatArg,
    /// Comma-separated atoms to project the answer onto (overrides the
    /// program's own query directive)
    #[arg(long)]
    query: Option<String>,
    /// Time limit in seconds; 0 means none
    #[arg(long, default_value_t = 0.0)]
    timeout: f64,
    /// Seed for all randomized tie-breaking
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report refinement progress on stderr
    #[arg(long)]
    progress: bool,
    /// How strategies pick one atom out of a candidate set
    #[arg(long, value_enum, default_value_t = OneOfArg::Activity)]
    oneof: OneOfArg,
    /// Enforce choice-rule lower bounds (on) or treat them as advisory (off)
    #[arg(long, value_enum, default_value_t = Switch::On)]
    strict_choice_bounds: Switch,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance files (*.lp and *.aspif)
    dir: PathBuf,
    /// Comma-separated algorithms to compare
    #[arg(long, default_value = "or,ict,opt,one,cm")]
    algorithms: String,
    /// Worker threads; 0 means one per CPU
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Per-run time limit in seconds; 0 means none
    #[arg(long, default_value_t = 0.0)]
    timeout: f64,
    /// Seed for all randomized tie-breaking
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(args) => run(&args),
        Cmd::Bench(args) => match bench(&args) {
            Ok(()) => ExitCode::from(EXIT_OK),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_ERROR)
            }
        },
    }
}

fn timeout_option(seconds: f64) -> Result<Option<Duration>> {
    if !seconds.is_finite() || seconds < 0.0 {
        bail!("--timeout must be a non-negative number of seconds");
    }
    Ok(if seconds == 0.0 {
        None
    } else {
        Some(Duration::from_secs_f64(seconds))
    })
}

fn load_program(path: &Path, format: FormatArg) -> Result<Program> {
    let input =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = match format {
        FormatArg::Auto => detect_format(&input),
        FormatArg::Text => Format::Text,
        FormatArg::Aspif => Format::Aspif,
    };
    parse(&input, format).with_context(|| format!("parsing {}", path.display()))
}

/// Splits a comma-separated atom list. Commas inside parentheses or double
/// quotes belong to the atom name (`"reach(a,b)"`), not the list.
fn split_query_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0u32;
    let mut in_quotes = false;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            '(' if !in_quotes => {
                depth += 1;
                current.push(c);
            }
            ')' if !in_quotes => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if !in_quotes && depth == 0 => {
                out.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    out.push(current);
    out.iter()
        .map(|raw| {
            let t = raw.trim();
            let t = t
                .strip_prefix('"')
                .and_then(|t| t.strip_suffix('"'))
                .unwrap_or(t);
            t.to_string()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn apply_query_override(program: &mut Program, list: &str) -> Result<()> {
    let mut query = BTreeSet::new();
    for name in split_query_list(list) {
        let atom = program
            .atoms
            .lookup(&name)
            .with_context(|| format!("unknown query atom '{name}'"))?;
        query.insert(atom);
    }
    program.query = query;
    Ok(())
}

fn run(args: &RunArgs) -> ExitCode {
    let mut program = match load_program(&args.file, args.format) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    if let Some(list) = &args.query {
        if let Err(e) = apply_query_override(&mut program, list) {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let timeout = match timeout_option(args.timeout) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let opts = EngineOptions {
        strategy: args.algorithm.strategy(),
        seed: args.seed,
        strict_choice_bounds: args.strict_choice_bounds == Switch::On,
        timeout,
        oneof: match args.oneof {
            OneOfArg::Activity => OneOfPolicy::Activity,
            OneOfArg::Index => OneOfPolicy::Index,
        },
    };
    let progress = args.progress;
    let mut sink = |e: ProgressEvent| {
        if progress {
            eprintln!(
                "PROGRESS {:.3} {} {} {}",
                e.elapsed.as_secs_f64(),
                e.proved.len(),
                e.overestimate.len(),
                e.kind.name()
            );
        }
    };
    match cautious_reasoning(&program, &opts, &mut sink) {
        Ok((CautiousResult::Consequences(cc), _stats)) => {
            let mut names: Vec<&str> = cc.iter().map(|a| program.atoms.name(*a)).collect();
            names.sort_unstable();
            for name in names {
                println!("{name}");
            }
            ExitCode::from(EXIT_OK)
        }
        Ok((CautiousResult::Incoherent, _stats)) => {
            println!("INCOHERENT");
            ExitCode::from(EXIT_INCOHERENT)
        }
        Err(EngineError::Timeout) => {
            eprintln!("error: time limit exceeded");
            ExitCode::from(EXIT_TIMEOUT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

// ----- bench --------------------------------------------------------------

struct BenchRow {
    instance: String,
    strategy: Strategy,
    outcome: String,
    time_s: f64,
    solver_calls: u64,
    solved: bool,
}

fn parse_algorithms(list: &str) -> Result<Vec<Strategy>> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let name = part.trim();
        if name.is_empty() {
            continue;
        }
        let strat = Strategy::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .with_context(|| format!("unknown algorithm '{name}'"))?;
        if !out.contains(&strat) {
            out.push(strat);
        }
    }
    if out.is_empty() {
        bail!("--algorithms names no algorithm");
    }
    Ok(out)
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("lp") | Some("aspif")
                )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn bench_one(path: &Path, strategy: Strategy, args: &BenchArgs) -> BenchRow {
    let instance = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let timeout = timeout_option(args.timeout).expect("validated before dispatch");
    let mut row = BenchRow {
        instance,
        strategy,
        outcome: String::new(),
        time_s: 0.0,
        solver_calls: 0,
        solved: false,
    };
    let program = match load_program(path, FormatArg::Auto) {
        Ok(p) => p,
        Err(_) => {
            row.outcome = "error".into();
            return row;
        }
    };
    let opts = EngineOptions {
        strategy,
        seed: args.seed,
        timeout,
        ..EngineOptions::default()
    };
    let mut sink = |_e: ProgressEvent| {};
    let started = Instant::now();
    match cautious_reasoning(&program, &opts, &mut sink) {
        Ok((CautiousResult::Consequences(cc), stats)) => {
            row.outcome = format!("answer={}", cc.len());
            row.time_s = started.elapsed().as_secs_f64();
            row.solver_calls = stats.solver_calls;
            row.solved = true;
        }
        Ok((CautiousResult::Incoherent, stats)) => {
            row.outcome = "INCOHERENT".into();
            row.time_s = started.elapsed().as_secs_f64();
            row.solver_calls = stats.solver_calls;
            row.solved = true;
        }
        Err(EngineError::Timeout) => {
            row.outcome = "timeout".into();
            // Account a timed-out run at exactly its limit so totals are
            // reproducible and comparable across algorithms.
            row.time_s = args.timeout;
        }
        Err(_) => {
            row.outcome = "error".into();
        }
    }
    row
}

fn bench(args: &BenchArgs) -> Result<()> {
    let algorithms = parse_algorithms(&args.algorithms)?;
    timeout_option(args.timeout)?;
    let files = instance_files(&args.dir)?;

    let tasks: Vec<(&PathBuf, Strategy)> = files
        .iter()
        .flat_map(|f| algorithms.iter().map(move |&s| (f, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building the worker pool")?;
    use rayon::prelude::*;
    let rows: Vec<BenchRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(f, s)| bench_one(f, *s, args))
            .collect()
    });

    let mut writer = csv::Writer::from_writer(std::io::stdout());
    writer.write_record(["instance", "strategy", "outcome", "time_s", "solver_calls"])?;
    for row in &rows {
        writer.write_record([
            row.instance.as_str(),
            row.strategy.name(),
            row.outcome.as_str(),
            &format!("{:.6}", row.time_s),
            &row.solver_calls.to_string(),
        ])?;
    }
    for &strategy in &algorithms {
        let of_strategy: Vec<&BenchRow> = rows.iter().filter(|r| r.strategy == strategy).collect();
        let solved = of_strategy.iter().filter(|r| r.solved).count();
        let time: f64 = of_strategy.iter().map(|r| r.time_s).sum();
        let calls: u64 = of_strategy.iter().map(|r| r.solver_calls).sum();
        writer.write_record([
            "TOTAL",
            strategy.name(),
            &format!("solved={solved}"),
            &format!("{time:.6}"),
            &calls.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
