//! Bundled fixture projects and their manifests.
//!
//! Each fixture directory holds a project plus `manifest.json` recording
//! what analysis of that project is expected to produce. Loading a fixture
//! compares the cheap entries and fails on drift; [`Corpus::deep_drift`]
//! also recomputes the kill matrix.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{build_kill_matrix, KillMatrix};
use crate::error::ProjectError;
use crate::focal::{build_index, FocalIndex};
use crate::frontend::ast::{MethodRef, TestId};
use crate::mutantgen::{generate_mutants, Mutant, Operator};
use crate::project::{load_project, Project, Settings};
use crate::report::{format_speed_up, Rational};
use crate::selection::{select, Strategy};
use crate::store::matrix_digest;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub description: String,
    /// Command that regenerates this file.
    pub generated_by: String,
    pub classes: usize,
    pub tests: usize,
    pub mutants: usize,
    pub mutants_by_operator: BTreeMap<Operator, usize>,
    pub focal: BTreeMap<TestId, Vec<MethodRef>>,
    pub budget: u64,
    pub matrix_digest: String,
    /// Speed-up over the full suite, rendered, per non-full strategy.
    pub speed_up: BTreeMap<Strategy, String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error("{path}: {message}")]
    Manifest { path: String, message: String },
    #[error("fixture `{name}` drifted from its manifest: {}", .entries.join("; "))]
    Drift { name: String, entries: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub dir: PathBuf,
    pub project: Project,
    pub settings: Settings,
    pub mutants: Vec<Mutant>,
    pub index: FocalIndex,
    pub manifest: Manifest,
}

fn operator_counts(mutants: &[Mutant]) -> BTreeMap<Operator, usize> {
    let mut counts: BTreeMap<Operator, usize> = Operator::ALL.iter().map(|&o| (o, 0)).collect();
    for m in mutants {
        *counts.entry(m.operator).or_default() += 1;
    }
    counts
}

fn focal_map(index: &FocalIndex) -> BTreeMap<TestId, Vec<MethodRef>> {
    index
        .tests()
        .map(|(t, ms)| (t.clone(), ms.iter().cloned().collect()))
        .collect()
}

/// Speed-up of each strategy over the full suite, read off the matrix.
pub fn matrix_speed_ups(
    project: &Project,
    mutants: &[Mutant],
    index: &FocalIndex,
    matrix: &KillMatrix,
) -> BTreeMap<Strategy, Option<Rational>> {
    let cost = |s: Strategy| -> u64 {
        mutants
            .iter()
            .map(|m| {
                let sel = select(m, &project.program, index, s);
                matrix.derive(&m.id, &sel.tests).map_or(0, |(_, _, c)| c)
            })
            .sum()
    };
    let full = cost(Strategy::Full);
    [Strategy::Class, Strategy::Focal]
        .into_iter()
        .map(|s| {
            let c = cost(s);
            (s, (c != 0).then(|| Rational::new(full, c)))
        })
        .collect()
}

/// Computes a manifest from scratch, including the kill matrix.
pub fn build_manifest(name: &str, description: &str, dir: &Path) -> Result<Manifest, CorpusError> {
    let project = load_project(dir)?;
    let settings = project.config.clone().resolve();
    let mutants = generate_mutants(&project.program, &settings.operators);
    let index = build_index(&project.program);
    let matrix = build_kill_matrix(&project.program, &mutants, &settings.cost, settings.jobs);
    let speed_up = matrix_speed_ups(&project, &mutants, &index, &matrix)
        .into_iter()
        .map(|(s, r)| (s, format_speed_up(r)))
        .collect();
    Ok(Manifest {
        name: name.to_string(),
        description: description.to_string(),
        generated_by: format!("mutagoal manifest fixtures/{name}"),
        classes: project.program.classes.len(),
        tests: project.program.test_count(),
        mutants: mutants.len(),
        mutants_by_operator: operator_counts(&mutants),
        focal: focal_map(&index),
        budget: settings.cost.budget(),
        matrix_digest: matrix_digest(&matrix),
        speed_up,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let path = dir.join(MANIFEST_FILE);
    let err = |message: String| CorpusError::Manifest {
        path: path.display().to_string(),
        message,
    };
    let text = fs::read_to_string(&path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}

pub fn render_manifest(manifest: &Manifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

/// Loads a fixture and fails if its structure, mutants or focal methods
/// drifted from the manifest.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    let manifest = read_manifest(dir)?;
    let project = load_project(dir)?;
    let settings = project.config.clone().resolve();
    let mutants = generate_mutants(&project.program, &settings.operators);
    let index = build_index(&project.program);
    let corpus = Corpus {
        dir: dir.to_path_buf(),
        project,
        settings,
        mutants,
        index,
        manifest,
    };
    let entries = corpus.shallow_drift();
    if !entries.is_empty() {
        return Err(CorpusError::Drift {
            name: corpus.manifest.name.clone(),
            entries,
        });
    }
    Ok(corpus)
}

impl Corpus {
    fn shallow_drift(&self) -> Vec<String> {
        let m = &self.manifest;
        let p = &self.project.program;
        let mut out = Vec::new();
        let mut cmp = |what: &str, expected: String, actual: String| {
            if expected != actual {
                out.push(format!("{what}: manifest {expected}, actual {actual}"));
            }
        };
        cmp(
            "classes",
            m.classes.to_string(),
            p.classes.len().to_string(),
        );
        cmp("tests", m.tests.to_string(), p.test_count().to_string());
        cmp(
            "mutants",
            m.mutants.to_string(),
            self.mutants.len().to_string(),
        );
        cmp(
            "mutants by operator",
            format!("{:?}", m.mutants_by_operator),
            format!("{:?}", operator_counts(&self.mutants)),
        );
        cmp(
            "budget",
            m.budget.to_string(),
            self.settings.cost.budget().to_string(),
        );
        let focal = focal_map(&self.index);
        for (t, ms) in &m.focal {
            match focal.get(t) {
                Some(actual) if actual == ms => {}
                Some(actual) => out.push(format!(
                    "focal methods of {t}: manifest {ms:?}, actual {actual:?}"
                )),
                None => out.push(format!("test {t} no longer exists")),
            }
        }
        for t in focal.keys().filter(|t| !m.focal.contains_key(*t)) {
            out.push(format!("test {t} is not in the manifest"));
        }
        out
    }

    pub fn kill_matrix(&self) -> KillMatrix {
        build_kill_matrix(
            &self.project.program,
            &self.mutants,
            &self.settings.cost,
            self.settings.jobs,
        )
    }

    /// Drift in the matrix-derived entries, given a freshly built matrix.
    pub fn deep_drift(&self, matrix: &KillMatrix) -> Vec<String> {
        let mut out = Vec::new();
        let digest = matrix_digest(matrix);
        if digest != self.manifest.matrix_digest {
            out.push(format!(
                "matrix digest: manifest {}, actual {digest}",
                self.manifest.matrix_digest
            ));
        }
        for (s, r) in matrix_speed_ups(&self.project, &self.mutants, &self.index, matrix) {
            let actual = format_speed_up(r);
            if self.manifest.speed_up.get(&s) != Some(&actual) {
                out.push(format!(
                    "{s} speed-up: manifest {:?}, actual {actual}",
                    self.manifest.speed_up.get(&s)
                ));
            }
        }
        out
    }
}
