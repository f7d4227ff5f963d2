//! Independent reconciliation of an output directory: every reported
//! number is recomputed from the raw records and compared.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::MutantResult;
use crate::frontend::ast::{MethodRef, TestId};
use crate::report::{compute_report, ReportInput};
use crate::selection::Strategy;
use crate::store::OutData;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, problems: Vec<String>) -> Check {
        let ok = problems.is_empty();
        let detail = if ok {
            "ok".to_string()
        } else {
            let shown: Vec<&str> = problems.iter().take(5).map(String::as_str).collect();
            let more = problems.len().saturating_sub(5);
            let mut d = shown.join("; ");
            if more > 0 {
                d.push_str(&format!("; and {more} more"));
            }
            d
        };
        Check {
            name: name.into(),
            ok,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn render(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {}\n",
                    if c.ok { "ok  " } else { "FAIL" },
                    c.name,
                    c.detail
                )
            })
            .collect()
    }
}

/// Test selection recomputed from persisted focal data alone.
fn selection(
    method: &MethodRef,
    strategy: Strategy,
    order: &[TestId],
    tests_of: &BTreeMap<MethodRef, BTreeSet<TestId>>,
) -> Vec<TestId> {
    let suite = format!("{}Test", method.class);
    order
        .iter()
        .filter(|t| match strategy {
            Strategy::Full => true,
            Strategy::Class => t.as_str().split_once('.').map(|(s, _)| s) == Some(suite.as_str()),
            Strategy::Focal => tests_of.get(method).is_some_and(|s| s.contains(*t)),
        })
        .cloned()
        .collect()
}

fn killed_ids(results: &[MutantResult]) -> BTreeSet<&str> {
    results
        .iter()
        .filter(|r| r.status.is_killed())
        .map(|r| r.mutant.as_str())
        .collect()
}

pub fn verify(data: &OutData) -> Verification {
    let mut checks = Vec::new();
    let order = data.focal.test_order();
    let tests_of: BTreeMap<MethodRef, BTreeSet<TestId>> = data
        .focal
        .methods
        .iter()
        .map(|m| (m.method.clone(), m.tests.iter().cloned().collect()))
        .collect();
    let focal_methods = data.focal.focal_methods();
    let method_of: BTreeMap<&str, MethodRef> = data
        .mutants
        .iter()
        .map(|m| (m.id.as_str(), m.method_ref()))
        .collect();
    let in_focal: BTreeSet<&str> = data
        .mutants
        .iter()
        .filter(|m| focal_methods.contains(&m.method_ref()))
        .map(|m| m.id.as_str())
        .collect();

    checks.push(Check::new(
        "baseline present",
        if data.results.contains_key(&Strategy::Full) {
            vec![]
        } else {
            vec!["no full-suite results".into()]
        },
    ));

    let mut inverse = Vec::new();
    for t in &data.focal.tests {
        for m in &t.focal_methods {
            if !tests_of.get(m).is_some_and(|s| s.contains(&t.test_id)) {
                inverse.push(format!(
                    "{} lists {m} but the inverse table does not",
                    t.test_id
                ));
            }
        }
    }
    for (m, tests) in &tests_of {
        for t in tests {
            let listed = data
                .focal
                .tests
                .iter()
                .any(|r| &r.test_id == t && r.focal_methods.contains(m));
            if !listed {
                inverse.push(format!(
                    "inverse table maps {m} to {t} but the test does not list it"
                ));
            }
        }
    }
    checks.push(Check::new("focal index is inverse-consistent", inverse));

    for (&strategy, results) in &data.results {
        let mut problems = Vec::new();
        let ids: Vec<&str> = results.iter().map(|r| r.mutant.as_str()).collect();
        let expected: Vec<&str> = data.mutants.iter().map(|m| m.id.as_str()).collect();
        if ids != expected {
            problems.push(format!(
                "{} results for {} mutants, or out of order",
                ids.len(),
                expected.len()
            ));
        }
        for r in results {
            if r.strategy != strategy {
                problems.push(format!("{} is labelled {}", r.mutant, r.strategy));
            }
            if !r.is_consistent() {
                problems.push(format!("{} has inconsistent counts", r.mutant));
            }
            if let Some(m) = method_of.get(r.mutant.as_str()) {
                let n = selection(m, strategy, &order, &tests_of).len();
                if n != r.tests_considered {
                    problems.push(format!(
                        "{} considered {} tests, selection has {n}",
                        r.mutant, r.tests_considered
                    ));
                }
            }
        }
        checks.push(Check::new(
            format!("{strategy} results are well-formed"),
            problems,
        ));
    }

    if let Some(full) = data.results.get(&Strategy::Full) {
        let full_kills = killed_ids(full);
        for (&strategy, results) in &data.results {
            if strategy == Strategy::Full {
                continue;
            }
            let extra: Vec<String> = killed_ids(results)
                .difference(&full_kills)
                .map(|id| format!("{id} killed by {strategy} only"))
                .collect();
            checks.push(Check::new(
                format!("{strategy} kills are a subset of full kills"),
                extra,
            ));
        }
    }

    if let Some(matrix) = &data.matrix {
        for (&strategy, results) in &data.results {
            let mut problems = Vec::new();
            for r in results {
                let Some(m) = method_of.get(r.mutant.as_str()) else {
                    continue;
                };
                let sel = selection(m, strategy, &order, &tests_of);
                match matrix.derive(&r.mutant, &sel) {
                    None => problems.push(format!("{} missing from matrix", r.mutant)),
                    Some((killed, executed, cost)) => {
                        let got = (r.status.is_killed(), r.tests_executed, r.cost_steps);
                        if got != (killed, executed, cost) {
                            problems.push(format!(
                                "{}: recorded {got:?}, matrix gives {:?}",
                                r.mutant,
                                (killed, executed, cost)
                            ));
                        }
                    }
                }
            }
            checks.push(Check::new(
                format!("{strategy} results agree with the kill matrix"),
                problems,
            ));
        }

        if let Some(report) = &data.report {
            let mut problems = Vec::new();
            let killable = |strategy: Strategy| -> usize {
                in_focal
                    .iter()
                    .filter(|id| {
                        let m = &method_of[**id];
                        matrix.killed_by_any(id, &selection(m, strategy, &order, &tests_of))
                    })
                    .count()
            };
            let full = killable(Strategy::Full);
            for row in report.rows.iter().filter(|r| r.class.is_none()) {
                let fn_matrix = full - killable(row.technique).min(full);
                if row.false_negatives as usize != fn_matrix {
                    problems.push(format!(
                        "{} reports {} false negatives, matrix gives {fn_matrix}",
                        row.technique, row.false_negatives
                    ));
                }
            }
            checks.push(Check::new(
                "false negatives match the kill matrix",
                problems,
            ));
        }
    }

    if let Some(report) = &data.report {
        let mut problems = Vec::new();
        if data.results.contains_key(&Strategy::Full) {
            match compute_report(&ReportInput {
                mutants: &data.mutants,
                results: &data.results,
                focal_methods: &focal_methods,
                cost_mode: data.cost_mode(),
            }) {
                Ok(fresh) if fresh.rows == report.rows && fresh.cost_mode == report.cost_mode => {}
                Ok(_) => problems
                    .push("report.json differs from a recomputation over the results".into()),
                Err(e) => problems.push(e.to_string()),
            }
            let full_focal_kills = data.results[&Strategy::Full]
                .iter()
                .filter(|r| r.status.is_killed() && in_focal.contains(r.mutant.as_str()))
                .count() as u64;
            for row in report.rows.iter().filter(|r| r.class.is_none()) {
                let Some(results) = data.results.get(&row.technique) else {
                    problems.push(format!("report has {} rows but no results", row.technique));
                    continue;
                };
                let kills = results
                    .iter()
                    .filter(|r| r.status.is_killed() && in_focal.contains(r.mutant.as_str()))
                    .count() as u64;
                if row.focal_killed != kills || row.focal_mutants != in_focal.len() as u64 {
                    problems.push(format!(
                        "{} focal counts disagree with the results",
                        row.technique
                    ));
                }
                let expected_q = (full_focal_kills != 0)
                    .then(|| crate::report::Rational::new(kills, full_focal_kills));
                if row.quality_vs_full != expected_q {
                    problems.push(format!(
                        "{} quality score disagrees with the results",
                        row.technique
                    ));
                }
            }
        }
        checks.push(Check::new(
            "report.json reconciles with the results",
            problems,
        ));
    }

    Verification { checks }
}
