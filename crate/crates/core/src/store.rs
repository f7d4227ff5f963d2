//! The campaign output directory.
//!
//! ```text
//! out/
//!   mutants.jsonl            one MutantRecord per line
//!   focal.json               method kinds, focal methods per test, inverse table, lints
//!   campaign-<strategy>.json settings a results file was produced under
//!   results-<strategy>.jsonl one MutantResult per line, in mutant order
//!   timing-<strategy>.jsonl  measured wall time per mutant (step cost model only)
//!   matrix.csv               mutant × test outcomes
//!   report.json              last rendered report
//! ```
//!
//! Results files are appended chunk by chunk, so an interrupted run resumes
//! where it stopped.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{run_campaign, Cell, KillMatrix, MutantResult};
use crate::focal::{FocalIndex, MethodKind, TestFocal};
use crate::frontend::ast::{Lint, MethodRef, Program, TestId};
use crate::interp::{CostMode, CostModel};
use crate::mutantgen::{fingerprint, Mutant, MutantRecord, Operator};
use crate::report::CampaignReport;
use crate::selection::Strategy;

pub const MUTANTS_FILE: &str = "mutants.jsonl";
pub const FOCAL_FILE: &str = "focal.json";
pub const MATRIX_FILE: &str = "matrix.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path} was produced with different settings ({field}); rerun with --fresh")]
    MetaMismatch { path: String, field: &'static str },
    #[error("{0} is missing")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodTests {
    pub method: MethodRef,
    pub tests: Vec<TestId>,
}

/// Serialized focal analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocalFile {
    pub kinds: Vec<MethodKind>,
    pub tests: Vec<TestFocal>,
    pub methods: Vec<MethodTests>,
    pub lints: Vec<Lint>,
}

impl FocalFile {
    pub fn from_index(index: &FocalIndex) -> FocalFile {
        let records = index.test_records();
        let order: Vec<&TestId> = records.iter().map(|r| &r.test_id).collect();
        let methods = index
            .methods()
            .map(|(m, tests)| MethodTests {
                method: m.clone(),
                tests: order
                    .iter()
                    .filter(|t| tests.contains(**t))
                    .map(|t| (*t).clone())
                    .collect(),
            })
            .collect();
        FocalFile {
            kinds: index.kinds().to_vec(),
            tests: records,
            methods,
            lints: index.lints().to_vec(),
        }
    }

    pub fn to_index(&self) -> FocalIndex {
        FocalIndex::from_parts(self.kinds.clone(), self.tests.clone())
    }

    /// Tests in global execution order.
    pub fn test_order(&self) -> Vec<TestId> {
        self.tests.iter().map(|t| t.test_id.clone()).collect()
    }

    pub fn focal_methods(&self) -> BTreeSet<MethodRef> {
        self.methods.iter().map(|m| m.method.clone()).collect()
    }
}

/// Settings that results of one strategy depend on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignMeta {
    pub strategy: Strategy,
    pub operators: Vec<Operator>,
    pub budget: u64,
    pub cost_mode: CostMode,
    pub fingerprint: String,
    pub mutants: usize,
}

impl CampaignMeta {
    fn mismatch(&self, other: &CampaignMeta) -> Option<&'static str> {
        if self.strategy != other.strategy {
            Some("strategy")
        } else if self.operators != other.operators {
            Some("operators")
        } else if self.budget != other.budget {
            Some("budget")
        } else if self.cost_mode != other.cost_mode {
            Some("cost model")
        } else if self.fingerprint != other.fingerprint {
            Some("program")
        } else if self.mutants != other.mutants {
            Some("mutant count")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Timing {
    mutant: String,
    wall_micros: u64,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn to_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("record serializes");
    s.push('\n');
    s
}

fn write_atomic(path: &Path, text: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}

/// Parses JSON lines. With `lenient`, a malformed final line (an
/// interrupted write) is dropped instead of reported.
fn read_jsonl<T: DeserializeOwned>(path: &Path, lenient: bool) -> Result<Vec<T>, StoreError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if lenient && i + 1 == lines.len() => {}
            Err(e) => {
                return Err(StoreError::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("record serializes");
    s.push('\n');
    s
}

pub fn render_matrix(matrix: &KillMatrix) -> String {
    let mut out = String::from("mutant");
    for t in &matrix.tests {
        out.push(',');
        out.push_str(t.as_str());
    }
    out.push('\n');
    for (m, row) in matrix.mutants.iter().zip(&matrix.cells) {
        out.push_str(m);
        for c in row {
            out.push_str(if c.killed { ",K:" } else { ",P:" });
            out.push_str(&c.steps.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, path: &str) -> Result<KillMatrix, StoreError> {
    let err = |line: usize, message: String| StoreError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty matrix".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("mutant") {
        return Err(err(1, "header must start with `mutant`".into()));
    }
    let tests: Vec<TestId> = cols.map(|t| TestId(t.to_string())).collect();
    let mut matrix = KillMatrix {
        tests,
        ..KillMatrix::default()
    };
    for (i, line) in lines.enumerate() {
        let mut cells = line.split(',');
        let id = cells.next().unwrap_or_default();
        let row: Vec<Cell> = cells
            .map(|c| {
                let (kind, steps) = c.split_once(':').ok_or(())?;
                let steps: u64 = steps.parse().map_err(|_| ())?;
                match kind {
                    "K" => Ok(Cell {
                        killed: true,
                        steps,
                    }),
                    "P" => Ok(Cell {
                        killed: false,
                        steps,
                    }),
                    _ => Err(()),
                }
            })
            .collect::<Result<_, ()>>()
            .map_err(|_| err(i + 2, "cells must be K:<steps> or P:<steps>".into()))?;
        if row.len() != matrix.tests.len() {
            return Err(err(
                i + 2,
                format!("expected {} cells, found {}", matrix.tests.len(), row.len()),
            ));
        }
        matrix.mutants.push(id.to_string());
        matrix.cells.push(row);
    }
    Ok(matrix)
}

/// SHA-256 of the rendered matrix.
pub fn matrix_digest(matrix: &KillMatrix) -> String {
    hex::encode(Sha256::digest(render_matrix(matrix).as_bytes()))
}

/// Everything persisted in an output directory.
#[derive(Debug, Clone)]
pub struct OutData {
    pub mutants: Vec<MutantRecord>,
    pub focal: FocalFile,
    pub results: BTreeMap<Strategy, Vec<MutantResult>>,
    pub metas: BTreeMap<Strategy, CampaignMeta>,
    pub matrix: Option<KillMatrix>,
    pub report: Option<CampaignReport>,
}

impl OutData {
    /// The cost model shared by the stored results; steps when there is none.
    pub fn cost_mode(&self) -> CostMode {
        self.metas
            .values()
            .next()
            .map_or(CostMode::Steps, |m| m.cost_mode)
    }
}

#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>) -> OutDir {
        OutDir { root: root.into() }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn results_file(&self, strategy: Strategy) -> PathBuf {
        self.file(&format!("results-{strategy}.jsonl"))
    }

    pub fn meta_file(&self, strategy: Strategy) -> PathBuf {
        self.file(&format!("campaign-{strategy}.json"))
    }

    pub fn timing_file(&self, strategy: Strategy) -> PathBuf {
        self.file(&format!("timing-{strategy}.jsonl"))
    }

    pub fn create(&self) -> Result<(), StoreError> {
        fs::create_dir_all(&self.root).map_err(io(&self.root))
    }

    pub fn write_mutants(&self, mutants: &[MutantRecord]) -> Result<(), StoreError> {
        self.create()?;
        let text: String = mutants.iter().map(to_line).collect();
        write_atomic(&self.file(MUTANTS_FILE), &text)
    }

    pub fn read_mutants(&self) -> Result<Vec<MutantRecord>, StoreError> {
        read_jsonl(&self.file(MUTANTS_FILE), false)
    }

    pub fn write_focal(&self, focal: &FocalFile) -> Result<(), StoreError> {
        self.create()?;
        write_atomic(&self.file(FOCAL_FILE), &pretty(focal))
    }

    pub fn read_focal(&self) -> Result<FocalFile, StoreError> {
        read_json(&self.file(FOCAL_FILE))
    }

    pub fn write_results(
        &self,
        strategy: Strategy,
        results: &[MutantResult],
    ) -> Result<(), StoreError> {
        self.create()?;
        let text: String = results.iter().map(to_line).collect();
        write_atomic(&self.results_file(strategy), &text)
    }

    /// `None` when no campaign has been run for `strategy`.
    pub fn read_results(
        &self,
        strategy: Strategy,
    ) -> Result<Option<Vec<MutantResult>>, StoreError> {
        let path = self.results_file(strategy);
        if !path.is_file() {
            return Ok(None);
        }
        read_jsonl(&path, false).map(Some)
    }

    pub fn write_meta(&self, meta: &CampaignMeta) -> Result<(), StoreError> {
        self.create()?;
        write_atomic(&self.meta_file(meta.strategy), &pretty(meta))
    }

    pub fn read_meta(&self, strategy: Strategy) -> Result<Option<CampaignMeta>, StoreError> {
        let path = self.meta_file(strategy);
        if !path.is_file() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }

    /// Measured wall time per mutant, when a timing sidecar exists.
    pub fn read_timing(&self, strategy: Strategy) -> Result<BTreeMap<String, u64>, StoreError> {
        let path = self.timing_file(strategy);
        if !path.is_file() {
            return Ok(BTreeMap::new());
        }
        let rows: Vec<Timing> = read_jsonl(&path, true)?;
        Ok(rows
            .into_iter()
            .map(|t| (t.mutant, t.wall_micros))
            .collect())
    }

    pub fn write_matrix(&self, matrix: &KillMatrix) -> Result<(), StoreError> {
        self.create()?;
        write_atomic(&self.file(MATRIX_FILE), &render_matrix(matrix))
    }

    pub fn read_matrix(&self) -> Result<Option<KillMatrix>, StoreError> {
        let path = self.file(MATRIX_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        parse_matrix(&text, &path.display().to_string()).map(Some)
    }

    pub fn write_report(&self, report: &CampaignReport) -> Result<(), StoreError> {
        self.create()?;
        write_atomic(&self.file(REPORT_FILE), &crate::report::render_json(report))
    }

    pub fn read_report(&self) -> Result<Option<CampaignReport>, StoreError> {
        let path = self.file(REPORT_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }

    pub fn load(&self) -> Result<OutData, StoreError> {
        let mutants_path = self.file(MUTANTS_FILE);
        if !mutants_path.is_file() {
            return Err(StoreError::Missing(mutants_path.display().to_string()));
        }
        let focal_path = self.file(FOCAL_FILE);
        if !focal_path.is_file() {
            return Err(StoreError::Missing(focal_path.display().to_string()));
        }
        let mut results = BTreeMap::new();
        let mut metas = BTreeMap::new();
        for s in Strategy::ALL {
            if let Some(r) = self.read_results(s)? {
                results.insert(s, r);
            }
            if let Some(m) = self.read_meta(s)? {
                metas.insert(s, m);
            }
        }
        Ok(OutData {
            mutants: self.read_mutants()?,
            focal: self.read_focal()?,
            results,
            metas,
            matrix: self.read_matrix()?,
            report: self.read_report()?,
        })
    }

    /// Sums sidecar wall times per (class, strategy) row and per strategy
    /// total. Rows with any untimed mutant are left out.
    pub fn measured_wall(
        &self,
        mutants: &[MutantRecord],
        strategies: impl IntoIterator<Item = Strategy>,
    ) -> Result<BTreeMap<(Option<String>, Strategy), u64>, StoreError> {
        let mut out = BTreeMap::new();
        for s in strategies {
            let timing = self.read_timing(s)?;
            if timing.is_empty() {
                continue;
            }
            let mut sums: BTreeMap<Option<String>, Option<u64>> = BTreeMap::new();
            for m in mutants {
                let t = timing.get(&m.id).copied();
                for key in [Some(m.class.clone()), None] {
                    let e = sums.entry(key).or_insert(Some(0));
                    *e = e.zip(t).map(|(a, b)| a + b);
                }
            }
            for (key, sum) in sums {
                if let Some(sum) = sum {
                    out.insert((key, s), sum);
                }
            }
        }
        Ok(out)
    }
}

pub struct RunRequest<'a> {
    pub program: &'a Program,
    pub mutants: &'a [Mutant],
    pub index: &'a FocalIndex,
    pub operators: &'a BTreeSet<Operator>,
    pub strategy: Strategy,
    pub cost: CostModel,
    pub jobs: usize,
    /// Discard earlier results for this strategy instead of resuming.
    pub fresh: bool,
}

#[derive(Debug)]
pub struct RunSummary {
    pub results: Vec<MutantResult>,
    /// Mutants whose results were taken from an earlier, interrupted run.
    pub resumed: usize,
}

fn append(path: &Path, text: &str) -> Result<(), StoreError> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(io(path))?;
    w.flush().map_err(io(path))?;
    w.get_ref().sync_data().map_err(io(path))
}

/// Runs a campaign and persists it, resuming a previous partial run of the
/// same strategy and settings.
pub fn run_persisted(out: &OutDir, req: &RunRequest<'_>) -> Result<RunSummary, StoreError> {
    out.create()?;
    let meta = CampaignMeta {
        strategy: req.strategy,
        operators: req.operators.iter().copied().collect(),
        budget: req.cost.budget(),
        cost_mode: req.cost.mode,
        fingerprint: fingerprint(req.program),
        mutants: req.mutants.len(),
    };
    let results_path = out.results_file(req.strategy);
    let timing_path = out.timing_file(req.strategy);
    if req.fresh {
        for p in [&results_path, &timing_path, &out.meta_file(req.strategy)] {
            if p.is_file() {
                fs::remove_file(p).map_err(io(p))?;
            }
        }
    }
    match out.read_meta(req.strategy)? {
        Some(old) => {
            if let Some(field) = old.mismatch(&meta) {
                return Err(StoreError::MetaMismatch {
                    path: out.meta_file(req.strategy).display().to_string(),
                    field,
                });
            }
        }
        None if results_path.is_file() => {
            return Err(StoreError::MetaMismatch {
                path: results_path.display().to_string(),
                field: "unknown settings",
            })
        }
        None => {}
    }

    let records: Vec<MutantRecord> = req.mutants.iter().map(Mutant::record).collect();
    out.write_mutants(&records)?;
    out.write_focal(&FocalFile::from_index(req.index))?;
    out.write_meta(&meta)?;

    let wanted: BTreeSet<&str> = req.mutants.iter().map(|m| m.id.as_str()).collect();
    let mut done: BTreeMap<String, MutantResult> = BTreeMap::new();
    if results_path.is_file() {
        for r in read_jsonl::<MutantResult>(&results_path, true)? {
            if wanted.contains(r.mutant.as_str()) && r.strategy == req.strategy {
                done.insert(r.mutant.clone(), r);
            }
        }
    }
    let resumed = done.len();
    let kept: Vec<&MutantResult> = req.mutants.iter().filter_map(|m| done.get(&m.id)).collect();
    write_atomic(
        &results_path,
        &kept.iter().map(|r| to_line(*r)).collect::<String>(),
    )?;
    if !timing_path.is_file() {
        File::create(&timing_path).map_err(io(&timing_path))?;
    }

    let remaining: Vec<Mutant> = req
        .mutants
        .iter()
        .filter(|m| !done.contains_key(&m.id))
        .cloned()
        .collect();
    let chunk = (req.jobs.max(1) * 8).max(32);
    for batch in remaining.chunks(chunk) {
        let results = run_campaign(
            req.program,
            batch,
            req.index,
            req.strategy,
            &req.cost,
            req.jobs,
        );
        let timing: String = results
            .iter()
            .map(|r| {
                to_line(&Timing {
                    mutant: r.mutant.clone(),
                    wall_micros: r.wall_time.as_micros() as u64,
                })
            })
            .collect();
        append(
            &results_path,
            &results.iter().map(to_line).collect::<String>(),
        )?;
        if req.cost.mode == CostMode::Steps {
            append(&timing_path, &timing)?;
        }
        for r in results {
            done.insert(r.mutant.clone(), r);
        }
    }

    let results: Vec<MutantResult> = req
        .mutants
        .iter()
        .map(|m| done.remove(&m.id).expect("every mutant evaluated"))
        .collect();
    out.write_results(req.strategy, &results)?;
    Ok(RunSummary { results, resumed })
}
