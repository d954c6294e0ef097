mod render;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netupdate_core::instances::{self, FixtureError, GenError};
use netupdate_core::netmodel::{parse_instance_with, ModelError, NetworkInstance, ParseOptions};
use netupdate_core::oracle::{self, OracleError, DEFAULT_NODE_LIMIT};
use netupdate_core::planner::{self, PlanFormatError};
use netupdate_core::{GenMode, GenParams, PlanMode, WaitedPlan};
use rayon::prelude::*;
use thiserror::Error;

use render::Target;

/// Plans consistent network updates.
#[derive(Parser, Debug)]
#[command(name = "netupdate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan the update of an instance, or of every instance in a directory.
    Plan {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Optimal)]
        mode: Mode,
        /// Plan every `*.json` instance in this directory independently.
        #[arg(long, value_name = "DIR", conflicts_with_all = ["instance", "fixture"], requires = "out")]
        batch: Option<PathBuf>,
        /// Output directory for `--batch`; one `<name>.plan.json` per instance.
        #[arg(long, value_name = "DIR", requires = "batch")]
        out: Option<PathBuf>,
    },
    /// Check a plan against an instance.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "FILE")]
        plan: PathBuf,
    },
    /// Exhaustive search for the fewest rounds.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Refuse instances with more changed nodes than this.
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: usize,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GenKind::Independent)]
        mode: GenKind,
        /// Nodes given fresh out-edges in `perturb` mode.
        #[arg(long, default_value_t = 1)]
        rewire: usize,
        /// Write here instead of standard output.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Write a DOT rendering.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Target::Union)]
        target: Target,
        /// Round to show with `--target plan-step`, counting from 1.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Plan to step through; the optimal plan when omitted.
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
    },
    /// List the bundled example instances, or print one.
    Fixtures {
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Instance file.
    #[arg(value_name = "INSTANCE", conflicts_with = "fixture")]
    instance: Option<PathBuf>,
    /// Bundled example instead of a file.
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Optimal,
    Sequential,
}

impl From<Mode> for PlanMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Optimal => PlanMode::Optimal,
            Mode::Sequential => PlanMode::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    Independent,
    Perturb,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Instance { path: PathBuf, source: ModelError },
    #[error("{}: {source}", path.display())]
    Plan { path: PathBuf, source: PlanFormatError },
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Stdout(#[from] io::Error),
}

/// Outcome of a command that ran to completion.
enum Answer {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_file(path: &Path) -> Result<NetworkInstance, CliError> {
    let opts = ParseOptions {
        reduce_multi_source: true,
    };
    parse_instance_with(&read(path)?, opts).map_err(|source| CliError::Instance {
        path: path.to_owned(),
        source,
    })
}

fn load(input: &Input) -> Result<NetworkInstance, CliError> {
    match (&input.instance, &input.fixture) {
        (Some(path), _) => parse_file(path),
        (None, Some(name)) => Ok(instances::fixture(name)?.instance),
        (None, None) => Err(CliError::Usage("give an instance file or --fixture NAME".into())),
    }
}

fn load_plan(path: &Path) -> Result<WaitedPlan, CliError> {
    WaitedPlan::from_json(&read(path)?).map_err(|source| CliError::Plan {
        path: path.to_owned(),
        source,
    })
}

fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn run(command: Command) -> Result<Answer, CliError> {
    match command {
        Command::Plan {
            batch: Some(dir),
            out: Some(out),
            mode,
            ..
        } => plan_batch(&dir, &out, mode.into()),
        Command::Plan { input, mode, .. } => {
            let plan = planner::plan(&load(&input)?, mode.into());
            emit(&plan.to_json())?;
            Ok(if plan.is_solved() { Answer::Yes } else { Answer::No })
        }
        Command::Verify { input, plan } => {
            let net = load(&input)?;
            let plan = load_plan(&plan)?;
            let verdict = oracle::verify_plan(&net, &plan)?;
            match verdict.violation {
                None => {
                    emit(&format!("ok ({})", verdict.regime))?;
                    Ok(Answer::Yes)
                }
                Some(v) => {
                    emit(&format!("violation ({}): {v}", verdict.regime))?;
                    Ok(Answer::No)
                }
            }
        }
        Command::Oracle { input, node_limit } => {
            let result = oracle::search_min_rounds(&load(&input)?, node_limit)?;
            let witness = result.witness.as_ref().map(|w| &w.rounds);
            let value = serde_json::json!({
                "exists": result.exists,
                "min_rounds": result.min_rounds,
                "witness": witness,
            });
            emit(&serde_json::to_string_pretty(&value).expect("plain JSON value"))?;
            Ok(if result.exists { Answer::Yes } else { Answer::No })
        }
        Command::Gen {
            nodes,
            density,
            seed,
            mode,
            rewire,
            output,
        } => {
            let mode = match mode {
                GenKind::Independent => GenMode::Independent,
                GenKind::Perturb => GenMode::Perturb { rewire },
            };
            let net = instances::generate(GenParams {
                nodes,
                density,
                seed,
                mode,
            })?;
            match output {
                Some(path) => write_atomic(&path, &net.to_json())?,
                None => emit(&net.to_json())?,
            }
            Ok(Answer::Yes)
        }
        Command::Render {
            input,
            target,
            step,
            plan,
        } => {
            let net = load(&input)?;
            let plan = match (target, plan) {
                (Target::PlanStep, Some(path)) => Some(load_plan(&path)?),
                (Target::PlanStep, None) => Some(planner::plan_optimal(&net)),
                (_, _) => None,
            };
            let dot = render::dot(&net, target, plan.as_ref(), step).map_err(CliError::Usage)?;
            emit(&dot)?;
            Ok(Answer::Yes)
        }
        Command::Fixtures { show: Some(name) } => {
            emit(instances::fixture_text(&name)?)?;
            Ok(Answer::Yes)
        }
        Command::Fixtures { show: None } => {
            for f in instances::all_fixtures() {
                let rounds = f.expected.min_rounds.map_or("-".to_owned(), |r| r.to_string());
                emit(&format!(
                    "{:<22} solvable={:<5} min_rounds={:<2} {}",
                    f.name, f.expected.solvable, rounds, f.expected.notes
                ))?;
            }
            Ok(Answer::Yes)
        }
    }
}

/// Writes through a temporary file in the target directory, so readers see
/// either the old contents or the new ones.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.write_all(b"\n").map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn plan_batch(dir: &Path, out: &Path, mode: PlanMode) -> Result<Answer, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no *.json instances in {}", dir.display())));
    }
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_owned(),
        source,
    })?;

    let results: Vec<(String, Result<WaitedPlan, CliError>)> = files
        .par_iter()
        .map(|path| {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let result = parse_file(path).and_then(|net| {
                let plan = planner::plan(&net, mode);
                write_atomic(&out.join(format!("{name}.plan.json")), &plan.to_json())?;
                Ok(plan)
            });
            (name, result)
        })
        .collect();

    let (mut failed, mut stuck) = (false, false);
    for (name, result) in results {
        match result {
            Ok(plan) => {
                stuck |= !plan.is_solved();
                emit(&format!("{name}: {} in {} rounds", plan.status, plan.rounds.len()))?;
            }
            Err(e) => {
                failed = true;
                eprintln!("error: {e}");
            }
        }
    }
    if failed {
        Err(CliError::Usage("some instances could not be planned".into()))
    } else if stuck {
        Ok(Answer::No)
    } else {
        Ok(Answer::Yes)
    }
}
