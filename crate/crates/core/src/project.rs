//! Loading a project directory and its `mutagoal.conf`.
//!
//! A project is a directory with production classes under `src/` and test
//! suites under `tests/`, all in `.mini` files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::ProjectError;
use crate::frontend::ast::Program;
use crate::frontend::parse_program;
use crate::interp::{CostMode, CostModel, DEFAULT_STEP_BUDGET};
use crate::mutantgen::{parse_operators, Operator};
use crate::report::Format;
use crate::selection::Strategy;

pub const CONFIG_FILE: &str = "mutagoal.conf";

fn io_error(path: &Path, source: std::io::Error) -> ProjectError {
    ProjectError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn collect(
    dir: &Path,
    root: &Path,
    out: &mut BTreeMap<String, String>,
) -> Result<(), ProjectError> {
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_error(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect(&path, root, out)?;
        } else if path.extension().is_some_and(|e| e == "mini") {
            let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
            let rel = path.strip_prefix(root).expect("walk stays under root");
            let key: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            out.insert(key.join("/"), text);
        }
    }
    Ok(())
}

/// Reads every `.mini` file under `src/` and `tests/`, keyed by its
/// `/`-separated path relative to `root`.
pub fn read_sources(root: &Path) -> Result<BTreeMap<String, String>, ProjectError> {
    let mut files = BTreeMap::new();
    let src = root.join("src");
    if !src.is_dir() {
        return Err(io_error(
            &src,
            std::io::Error::new(std::io::ErrorKind::NotFound, "missing src/ directory"),
        ));
    }
    collect(&src, root, &mut files)?;
    let tests = root.join("tests");
    if tests.is_dir() {
        collect(&tests, root, &mut files)?;
    }
    Ok(files)
}

/// Settings that may come from the command line or from `mutagoal.conf`.
/// Unset fields fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    pub operators: Option<BTreeSet<Operator>>,
    pub strategy: Option<Strategy>,
    pub budget: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub cost: Option<CostMode>,
}

impl Config {
    /// Parses `key = value` lines. `#` starts a comment. A relative `out`
    /// is resolved against `base`.
    pub fn parse(text: &str, path: &str, base: &Path) -> Result<Config, ProjectError> {
        let mut config = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ProjectError::Config {
                path: path.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let value = value.trim();
            match key.trim() {
                "operators" => config.operators = Some(parse_operators(value).map_err(err)?),
                "strategy" => config.strategy = Some(value.parse().map_err(err)?),
                "budget" => {
                    let b: u64 = value
                        .parse()
                        .map_err(|_| err(format!("bad budget `{value}`")))?;
                    if b == 0 {
                        return Err(err("budget must be positive".into()));
                    }
                    config.budget = Some(b);
                }
                "jobs" => {
                    let j: usize = value
                        .parse()
                        .map_err(|_| err(format!("bad jobs `{value}`")))?;
                    config.jobs = Some(j.max(1));
                }
                "out" => config.out = Some(base.join(value)),
                "format" => config.format = Some(value.parse().map_err(err)?),
                "cost" => config.cost = Some(value.parse().map_err(err)?),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(config)
    }

    /// Reads `root/mutagoal.conf` if present.
    pub fn load(root: &Path) -> Result<Config, ProjectError> {
        let path = root.join(CONFIG_FILE);
        if !path.is_file() {
            return Ok(Config::default());
        }
        let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        Config::parse(&text, &path.display().to_string(), root)
    }

    /// Fields of `self` win over `fallback`.
    pub fn or(self, fallback: Config) -> Config {
        Config {
            operators: self.operators.or(fallback.operators),
            strategy: self.strategy.or(fallback.strategy),
            budget: self.budget.or(fallback.budget),
            jobs: self.jobs.or(fallback.jobs),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            cost: self.cost.or(fallback.cost),
        }
    }

    pub fn resolve(self) -> Settings {
        let cost_mode = self.cost.unwrap_or_default();
        Settings {
            operators: self
                .operators
                .unwrap_or_else(|| Operator::ALL.into_iter().collect()),
            strategy: self.strategy.unwrap_or(Strategy::Focal),
            cost: CostModel::new(cost_mode, self.budget.unwrap_or(DEFAULT_STEP_BUDGET))
                .expect("budget validated positive"),
            jobs: self.jobs.unwrap_or(1).max(1),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            format: self.format.unwrap_or(Format::Table),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub operators: BTreeSet<Operator>,
    pub strategy: Strategy,
    pub cost: CostModel,
    pub jobs: usize,
    pub out: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone)]
pub struct Project {
    pub root: PathBuf,
    pub program: Program,
    pub config: Config,
}

pub fn load_project(root: &Path) -> Result<Project, ProjectError> {
    let files = read_sources(root)?;
    let program = parse_program(&files)?;
    let config = Config::load(root)?;
    Ok(Project {
        root: root.to_path_buf(),
        program,
        config,
    })
}
