//! Python bindings. Results cross the boundary as plain dicts and lists,
//! using the same field names as the files in the output directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mutagoal_core::engine::{precheck, Status};
use mutagoal_core::focal::build_index;
use mutagoal_core::mutantgen::{generate_mutants, parse_operators, Operator};
use mutagoal_core::report::{compute_report, render, Format, ReportInput};
use mutagoal_core::store::{run_persisted, FocalFile, OutDir, RunRequest};
use mutagoal_core::verify::verify as verify_data;
use mutagoal_core::{load_project, Config, Project, Strategy};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn load(project: &Path) -> PyResult<Project> {
    load_project(project).map_err(err)
}

fn operators(ops: Option<&str>) -> PyResult<Option<BTreeSet<Operator>>> {
    ops.map(parse_operators)
        .transpose()
        .map_err(PyValueError::new_err)
}

/// Runs the original tests. Returns program sizes and the failing tests.
#[pyfunction]
fn check(py: Python<'_>, project: PathBuf) -> PyResult<Py<PyAny>> {
    let p = load(&project)?;
    let settings = p.config.clone().resolve();
    let failing = match py.detach(|| precheck(&p.program, &settings.cost)) {
        Ok(()) => Vec::new(),
        Err(tests) => tests
            .into_iter()
            .map(|t| serde_json::json!({ "test": t.test.to_string(), "outcome": t.verdict }))
            .collect(),
    };
    let value = serde_json::json!({
        "classes": p.program.classes.len(),
        "methods": p.program.method_count(),
        "suites": p.program.suites.len(),
        "tests": p.program.test_count(),
        "failing": failing,
    });
    to_py(py, &value)
}

/// Mutants in generation order, as in `mutants.jsonl`.
#[pyfunction]
#[pyo3(signature = (project, ops=None))]
fn mutants(py: Python<'_>, project: PathBuf, ops: Option<&str>) -> PyResult<Py<PyAny>> {
    let p = load(&project)?;
    let settings = Config {
        operators: operators(ops)?,
        ..Config::default()
    }
    .or(p.config.clone())
    .resolve();
    let records: Vec<_> = generate_mutants(&p.program, &settings.operators)
        .iter()
        .map(|m| m.record())
        .collect();
    to_py(py, &records)
}

/// Method kinds, focal methods per test and the inverse table.
#[pyfunction]
fn focal(py: Python<'_>, project: PathBuf) -> PyResult<Py<PyAny>> {
    let p = load(&project)?;
    to_py(py, &FocalFile::from_index(&build_index(&p.program)))
}

/// Runs one campaign and stores it under `out`. Arguments left as `None`
/// come from the project's `mutagoal.conf`, then the defaults.
#[pyfunction]
#[pyo3(signature = (project, strategy=None, out=None, jobs=None, budget=None, ops=None, fresh=false))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    project: PathBuf,
    strategy: Option<&str>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    budget: Option<u64>,
    ops: Option<&str>,
    fresh: bool,
) -> PyResult<Py<PyAny>> {
    let p = load(&project)?;
    let strategy: Option<Strategy> = strategy
        .map(str::parse)
        .transpose()
        .map_err(PyValueError::new_err)?;
    if budget == Some(0) {
        return Err(PyValueError::new_err("budget must be positive"));
    }
    let cli = Config {
        operators: operators(ops)?,
        strategy,
        budget,
        jobs,
        out,
        ..Config::default()
    };
    let settings = cli.or(p.config.clone()).resolve();
    let summary = py.detach(|| {
        if let Err(failing) = precheck(&p.program, &settings.cost) {
            let names: Vec<String> = failing.iter().map(|f| f.test.to_string()).collect();
            return Err(format!("precheck failed: {}", names.join(", ")));
        }
        let mutants = generate_mutants(&p.program, &settings.operators);
        let index = build_index(&p.program);
        run_persisted(
            &OutDir::new(&settings.out),
            &RunRequest {
                program: &p.program,
                mutants: &mutants,
                index: &index,
                operators: &settings.operators,
                strategy: settings.strategy,
                cost: settings.cost,
                jobs: settings.jobs,
                fresh,
            },
        )
        .map_err(|e| e.to_string())
    });
    let summary = summary.map_err(PyRuntimeError::new_err)?;
    let count = |f: fn(&Status) -> bool| summary.results.iter().filter(|r| f(&r.status)).count();
    let value = serde_json::json!({
        "strategy": settings.strategy,
        "out": settings.out,
        "mutants": summary.results.len(),
        "killed": count(|s| s.is_killed()),
        "survived": count(|s| matches!(s, Status::Survived)),
        "not_covered": count(|s| matches!(s, Status::NotCovered)),
        "errors": count(|s| matches!(s, Status::Error { .. })),
        "resumed": summary.resumed,
    });
    to_py(py, &value)
}

/// Computes the report for an output directory and writes `report.json`.
/// With `format=None` the report comes back as a dict, otherwise as text.
#[pyfunction]
#[pyo3(signature = (out, format=None))]
fn report(py: Python<'_>, out: PathBuf, format: Option<&str>) -> PyResult<Py<PyAny>> {
    let format: Option<Format> = format
        .map(str::parse)
        .transpose()
        .map_err(PyValueError::new_err)?;
    let dir = OutDir::new(out);
    let data = dir.load().map_err(err)?;
    let focal_methods = data.focal.focal_methods();
    let report = compute_report(&ReportInput {
        mutants: &data.mutants,
        results: &data.results,
        focal_methods: &focal_methods,
        cost_mode: data.cost_mode(),
    })
    .map_err(err)?;
    dir.write_report(&report).map_err(err)?;
    match format {
        Some(f) => Ok(render(&report, f).into_pyobject(py)?.into_any().unbind()),
        None => to_py(py, &report),
    }
}

/// Cross-checks a complete output directory. Returns `(ok, lines)`.
#[pyfunction]
fn verify(out: PathBuf) -> PyResult<(bool, Vec<String>)> {
    let data = OutDir::new(out).load().map_err(err)?;
    let v = verify_data(&data);
    Ok((v.ok(), v.render().lines().map(String::from).collect()))
}

#[pymodule]
fn mutagoal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(mutants, m)?)?;
    m.add_function(wrap_pyfunction!(focal, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
