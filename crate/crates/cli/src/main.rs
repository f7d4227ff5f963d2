//! `mutagoal`: goal-oriented mutation testing for MiniLang projects.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mutagoal_core::corpus::{build_manifest, render_manifest, MANIFEST_FILE};
use mutagoal_core::engine::{build_kill_matrix, precheck, Status};
use mutagoal_core::focal::build_index;
use mutagoal_core::interp::{CostMode, Verdict};
use mutagoal_core::mutantgen::{generate_mutants, parse_operators, Operator};
use mutagoal_core::report::{compute_report, render, Format, ReportError, ReportInput};
use mutagoal_core::store::{run_persisted, FocalFile, OutDir, RunRequest};
use mutagoal_core::verify::verify;
use mutagoal_core::{load_project, Config, Project, Settings, Strategy};

macro_rules! out {
    ($o:expr, $($arg:tt)*) => {
        $o.push_str(&format!($($arg)*))
    };
}

macro_rules! outln {
    ($o:expr, $($arg:tt)*) => {{
        $o.push_str(&format!($($arg)*));
        $o.push('\n');
    }};
}

#[derive(Parser)]
#[command(
    name = "mutagoal",
    version,
    about = "Goal-oriented mutation testing for MiniLang"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and resolve a project, then run its tests on the original code.
    Check { project: PathBuf },
    /// List generated mutants with their locations and diffs.
    Mutants {
        project: PathBuf,
        #[arg(long, value_parser = parse_ops)]
        ops: Option<BTreeSet<Operator>>,
    },
    /// Print method kinds, focal methods per test and the inverse table as JSON.
    Focal { project: PathBuf },
    /// Run a mutation campaign and store its results.
    Run {
        project: PathBuf,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Discard earlier results for the strategy instead of resuming.
        #[arg(long)]
        fresh: bool,
        #[command(flatten)]
        common: CampaignArgs,
    },
    /// Execute every mutant against every test and store the kill matrix.
    Matrix {
        project: PathBuf,
        #[command(flatten)]
        common: CampaignArgs,
    },
    /// Summarise stored results per class and technique.
    Report {
        out: PathBuf,
        /// Default: `format` in ./mutagoal.conf, else table.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Recompute every reported number from the raw records and compare.
    Verify { out: PathBuf },
    /// Regenerate a fixture's manifest.json from its sources.
    Manifest {
        fixture: PathBuf,
        #[arg(long)]
        description: Option<String>,
        /// Print to stdout instead of writing the file.
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Args, Default)]
struct CampaignArgs {
    #[arg(long, value_parser = parse_ops)]
    ops: Option<BTreeSet<Operator>>,
    /// Worker threads; results do not depend on this.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Step budget per test execution.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    #[arg(long, value_enum)]
    cost: Option<CostArg>,
    /// Output directory (default: ./out, or `out` in mutagoal.conf).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Full,
    Class,
    Focal,
    /// full, class and focal in turn
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Steps,
    Wall,
}

fn parse_ops(s: &str) -> Result<BTreeSet<Operator>, String> {
    parse_operators(s)
}

impl CampaignArgs {
    fn config(&self) -> Config {
        Config {
            operators: self.ops.clone(),
            budget: self.budget,
            jobs: self.jobs.map(|j| j as usize),
            out: self.out.clone(),
            cost: self.cost.map(|c| match c {
                CostArg::Steps => CostMode::Steps,
                CostArg::Wall => CostMode::Wall,
            }),
            ..Config::default()
        }
    }
}

fn load(path: &Path) -> Result<Project> {
    load_project(path).with_context(|| format!("cannot load project {}", path.display()))
}

fn settings(project: &Project, cli: Config) -> Settings {
    cli.or(project.config.clone()).resolve()
}

fn print_lints(project: &Project) {
    for lint in &project.program.lints {
        eprintln!("warning: {}: {}", lint.location, lint.message);
    }
}

/// Runs the original tests; on failure lists them and reports a campaign error.
fn gate(o: &mut String, project: &Project, settings: &Settings) -> Result<bool> {
    match precheck(&project.program, &settings.cost) {
        Ok(()) => Ok(true),
        Err(failing) => {
            eprintln!(
                "precheck failed: {} test(s) fail on the original program",
                failing.len()
            );
            for f in failing {
                let why = match &f.verdict {
                    Verdict::AssertionFailure {
                        location,
                        expected,
                        actual,
                    } => format!("{location}: expected {expected}, got {actual}"),
                    Verdict::ExecutionError { kind, location } => format!("{location}: {kind}"),
                    Verdict::StepBudgetExceeded => "step budget exceeded".to_string(),
                    Verdict::Pass => unreachable!("only failures are listed"),
                };
                outln!(o, "FAILED {} ({why})", f.test);
            }
            Ok(false)
        }
    }
}

fn check(o: &mut String, path: &Path) -> Result<ExitCode> {
    let project = load(path)?;
    print_lints(&project);
    let settings = settings(&project, Config::default());
    if !gate(o, &project, &settings)? {
        return Ok(ExitCode::FAILURE);
    }
    let p = &project.program;
    outln!(
        o,
        "ok: {} classes, {} methods, {} suites, {} tests",
        p.classes.len(),
        p.method_count(),
        p.suites.len(),
        p.test_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn mutants(o: &mut String, path: &Path, ops: Option<BTreeSet<Operator>>) -> Result<ExitCode> {
    let project = load(path)?;
    let settings = settings(
        &project,
        Config {
            operators: ops,
            ..Config::default()
        },
    );
    for m in generate_mutants(&project.program, &settings.operators) {
        outln!(o, "{} {} {}", m.id, m.location, m.operator.description());
        out!(o, "{}", m.diff());
    }
    Ok(ExitCode::SUCCESS)
}

fn focal(o: &mut String, path: &Path) -> Result<ExitCode> {
    let project = load(path)?;
    let file = FocalFile::from_index(&build_index(&project.program));
    outln!(o, "{}", serde_json::to_string_pretty(&file)?);
    Ok(ExitCode::SUCCESS)
}

fn run(
    o: &mut String,
    path: &Path,
    strategy: Option<StrategyArg>,
    fresh: bool,
    args: &CampaignArgs,
) -> Result<ExitCode> {
    let project = load(path)?;
    print_lints(&project);
    let mut cli = args.config();
    cli.strategy = match strategy {
        Some(StrategyArg::Full) => Some(Strategy::Full),
        Some(StrategyArg::Class) => Some(Strategy::Class),
        Some(StrategyArg::Focal) => Some(Strategy::Focal),
        Some(StrategyArg::All) | None => None,
    };
    let settings = settings(&project, cli);
    let strategies: Vec<Strategy> = match strategy {
        Some(StrategyArg::All) => Strategy::ALL.to_vec(),
        _ => vec![settings.strategy],
    };
    if !gate(o, &project, &settings)? {
        return Ok(ExitCode::FAILURE);
    }
    let mutants = generate_mutants(&project.program, &settings.operators);
    let index = build_index(&project.program);
    let out = OutDir::new(&settings.out);
    for strategy in strategies {
        let summary = run_persisted(
            &out,
            &RunRequest {
                program: &project.program,
                mutants: &mutants,
                index: &index,
                operators: &settings.operators,
                strategy,
                cost: settings.cost,
                jobs: settings.jobs,
                fresh,
            },
        )?;
        let count =
            |f: fn(&Status) -> bool| summary.results.iter().filter(|r| f(&r.status)).count();
        outln!(
            o,
            "{strategy}: {} mutants, {} killed, {} survived, {} not covered, {} errors{}",
            summary.results.len(),
            count(|s| s.is_killed()),
            count(|s| matches!(s, Status::Survived)),
            count(|s| matches!(s, Status::NotCovered)),
            count(|s| matches!(s, Status::Error { .. })),
            if summary.resumed > 0 {
                format!(" ({} resumed)", summary.resumed)
            } else {
                String::new()
            }
        );
    }
    outln!(o, "results written to {}", out.path().display());
    Ok(ExitCode::SUCCESS)
}

fn matrix(o: &mut String, path: &Path, args: &CampaignArgs) -> Result<ExitCode> {
    let project = load(path)?;
    print_lints(&project);
    let settings = settings(&project, args.config());
    if !gate(o, &project, &settings)? {
        return Ok(ExitCode::FAILURE);
    }
    let mutants = generate_mutants(&project.program, &settings.operators);
    let index = build_index(&project.program);
    let matrix = build_kill_matrix(&project.program, &mutants, &settings.cost, settings.jobs);
    let out = OutDir::new(&settings.out);
    let records: Vec<_> = mutants.iter().map(|m| m.record()).collect();
    out.write_mutants(&records)?;
    out.write_focal(&FocalFile::from_index(&index))?;
    out.write_matrix(&matrix)?;
    let killed = (0..matrix.mutants.len())
        .filter(|&i| matrix.cells[i].iter().any(|c| c.killed))
        .count();
    outln!(
        o,
        "matrix: {} mutants x {} tests, {} killed by some test; written to {}",
        matrix.mutants.len(),
        matrix.tests.len(),
        killed,
        out.path().display()
    );
    Ok(ExitCode::SUCCESS)
}

fn report(o: &mut String, dir: &Path, format: Option<FormatArg>) -> Result<ExitCode> {
    let out = OutDir::new(dir);
    let data = out.load()?;
    let focal_methods = data.focal.focal_methods();
    let computed = compute_report(&ReportInput {
        mutants: &data.mutants,
        results: &data.results,
        focal_methods: &focal_methods,
        cost_mode: data.cost_mode(),
    });
    let mut report = match computed {
        Ok(r) => r,
        Err(e @ ReportError::MissingBaseline) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::FAILURE);
        }
        Err(e) => bail!(e),
    };
    out.write_report(&report)?;
    if report.cost_mode == CostMode::Steps {
        report.measured_wall_micros =
            out.measured_wall(&data.mutants, data.results.keys().copied())?;
    }
    // Without --format, a mutagoal.conf in the working directory decides.
    let format = match format {
        Some(FormatArg::Table) => Format::Table,
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => Config::load(Path::new("."))?.resolve().format,
    };
    out!(o, "{}", render(&report, format));
    Ok(ExitCode::SUCCESS)
}

fn verify_dir(o: &mut String, dir: &Path) -> Result<ExitCode> {
    let data = OutDir::new(dir).load()?;
    let v = verify(&data);
    out!(o, "{}", v.render());
    Ok(if v.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn manifest(
    o: &mut String,
    dir: &Path,
    description: Option<String>,
    dry_run: bool,
) -> Result<ExitCode> {
    let path = dir.join(MANIFEST_FILE);
    let previous = mutagoal_core::corpus::read_manifest(dir).ok();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .context("fixture path has no name")?;
    let description = description
        .or_else(|| previous.map(|m| m.description))
        .unwrap_or_default();
    let text = render_manifest(&build_manifest(&name, &description, dir)?);
    if dry_run {
        out!(o, "{text}");
    } else {
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        outln!(o, "wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// Writes everything at once; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
    {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut o = String::new();
    let result = match cli.command {
        Command::Check { project } => check(&mut o, &project),
        Command::Mutants { project, ops } => mutants(&mut o, &project, ops),
        Command::Focal { project } => focal(&mut o, &project),
        Command::Run {
            project,
            strategy,
            fresh,
            common,
        } => run(&mut o, &project, strategy, fresh, &common),
        Command::Matrix { project, common } => matrix(&mut o, &project, &common),
        Command::Report { out, format } => report(&mut o, &out, format),
        Command::Verify { out } => verify_dir(&mut o, &out),
        Command::Manifest {
            fixture,
            description,
            dry_run,
        } => manifest(&mut o, &fixture, description, dry_run),
    };
    emit(&o);
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
