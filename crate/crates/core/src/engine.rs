//! Campaign execution: precheck, per-mutant runs with early stop, and the
//! exhaustive kill matrix used as ground truth.
//!
//! Parallelism is over mutants only. Each worker runs its own interpreter over
//! the shared program; results come back in mutant order whatever the schedule.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::focal::FocalIndex;
use crate::frontend::ast::{Program, TestId};
use crate::interp::{run_suite, run_test, CostModel, TestOutcome, Verdict};
use crate::mutantgen::{fingerprint, materialize_with_origin, Mutant};
use crate::selection::{select, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Killed {
        killed_by: TestId,
        /// 1-based position of the killing test in the selection.
        position: usize,
        reason: KillReason,
    },
    Survived,
    NotCovered,
    /// The mutant could not be applied; recorded and skipped.
    Error {
        message: String,
    },
}

impl Status {
    pub fn is_killed(&self) -> bool {
        matches!(self, Status::Killed { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KillReason {
    AssertionFailure,
    ExecutionError,
    StepBudgetExceeded,
}

impl KillReason {
    pub fn of(verdict: &Verdict) -> Option<KillReason> {
        match verdict {
            Verdict::Pass => None,
            Verdict::AssertionFailure { .. } => Some(KillReason::AssertionFailure),
            Verdict::ExecutionError { .. } => Some(KillReason::ExecutionError),
            Verdict::StepBudgetExceeded => Some(KillReason::StepBudgetExceeded),
        }
    }
}

/// Outcome of one mutant under one strategy.
///
/// Equality ignores `wall_time`, which is never persisted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MutantResult {
    pub mutant: String,
    pub strategy: Strategy,
    #[serde(flatten)]
    pub status: Status,
    pub tests_considered: usize,
    pub tests_executed: usize,
    pub cost_steps: u64,
    /// Only persisted under the wall-clock cost model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_micros: Option<u64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for MutantResult {
    fn eq(&self, other: &Self) -> bool {
        self.mutant == other.mutant
            && self.strategy == other.strategy
            && self.status == other.status
            && self.tests_considered == other.tests_considered
            && self.tests_executed == other.tests_executed
            && self.cost_steps == other.cost_steps
            && self.wall_micros == other.wall_micros
    }
}

impl Eq for MutantResult {}

impl MutantResult {
    /// Checks the count invariants tying status to tests executed.
    pub fn is_consistent(&self) -> bool {
        match &self.status {
            Status::Killed { position, .. } => {
                *position >= 1
                    && self.tests_executed == *position
                    && *position <= self.tests_considered
            }
            Status::Survived => self.tests_executed == self.tests_considered,
            Status::NotCovered => self.tests_considered == 0 && self.tests_executed == 0,
            Status::Error { .. } => self.tests_executed == 0,
        }
    }
}

/// Runs every test on the unmutated program. `Err` lists the failing tests.
pub fn precheck(program: &Program, cost: &CostModel) -> Result<(), Vec<TestOutcome>> {
    let ids: Vec<TestId> = program.tests().into_iter().map(|(id, _)| id).collect();
    let failing: Vec<TestOutcome> = run_suite(program, &ids, cost, false)
        .into_iter()
        .filter(|o| !o.verdict.is_pass())
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(failing)
    }
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

/// Evaluates one mutant against its selection with early stop.
fn evaluate(
    program: &Program,
    origin: &str,
    index: &FocalIndex,
    mutant: &Mutant,
    strategy: Strategy,
    cost: &CostModel,
) -> MutantResult {
    let selection = select(mutant, program, index, strategy);
    let mut result = MutantResult {
        mutant: mutant.id.clone(),
        strategy,
        status: Status::NotCovered,
        tests_considered: selection.tests.len(),
        tests_executed: 0,
        cost_steps: 0,
        wall_micros: None,
        wall_time: Duration::ZERO,
    };
    if selection.tests.is_empty() {
        return result;
    }
    let mutated = match materialize_with_origin(program, origin, mutant) {
        Ok(p) => p,
        Err(e) => {
            result.status = Status::Error {
                message: e.to_string(),
            };
            return result;
        }
    };
    let outcomes = run_suite(&mutated, &selection.tests, cost, true);
    result.tests_executed = outcomes.len();
    result.cost_steps = outcomes.iter().map(|o| o.steps_executed).sum();
    result.wall_time = outcomes.iter().map(|o| o.wall_time).sum();
    result.status = match outcomes.last() {
        Some(last) => match KillReason::of(&last.verdict) {
            Some(reason) => Status::Killed {
                killed_by: last.test.clone(),
                position: outcomes.len(),
                reason,
            },
            None => Status::Survived,
        },
        None => Status::Survived,
    };
    if cost.mode == crate::interp::CostMode::Wall {
        result.wall_micros = Some(result.wall_time.as_micros() as u64);
    }
    result
}

/// Runs a mutation campaign under one strategy.
///
/// Results are returned in the order of `mutants`, independent of `jobs`.
pub fn run_campaign(
    program: &Program,
    mutants: &[Mutant],
    index: &FocalIndex,
    strategy: Strategy,
    cost: &CostModel,
    jobs: usize,
) -> Vec<MutantResult> {
    let origin = fingerprint(program);
    pool(jobs).install(|| {
        mutants
            .par_iter()
            .map(|m| evaluate(program, &origin, index, m, strategy, cost))
            .collect()
    })
}

/// One mutant × test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub killed: bool,
    pub steps: u64,
}

/// Complete mutant × test outcome table, evaluated without early stop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KillMatrix {
    pub mutants: Vec<String>,
    pub tests: Vec<TestId>,
    /// `cells[m][t]` for mutant row `m` and test column `t`.
    pub cells: Vec<Vec<Cell>>,
}

impl KillMatrix {
    pub fn row(&self, mutant: &str) -> Option<&[Cell]> {
        let i = self.mutants.iter().position(|m| m == mutant)?;
        Some(&self.cells[i])
    }

    pub fn column(&self, test: &TestId) -> Option<usize> {
        self.tests.iter().position(|t| t == test)
    }

    /// Status, executed count and cost a campaign must report for this
    /// mutant and selection, read off the matrix.
    pub fn derive(&self, mutant: &str, selection: &[TestId]) -> Option<(bool, usize, u64)> {
        let row = self.row(mutant)?;
        let mut cost = 0;
        for (k, t) in selection.iter().enumerate() {
            let cell = row[self.column(t)?];
            cost += cell.steps;
            if cell.killed {
                return Some((true, k + 1, cost));
            }
        }
        Some((false, selection.len(), cost))
    }

    /// True if any test in `tests` kills the mutant.
    pub fn killed_by_any(&self, mutant: &str, tests: &[TestId]) -> bool {
        self.row(mutant).is_some_and(|row| {
            tests
                .iter()
                .any(|t| self.column(t).is_some_and(|c| row[c].killed))
        })
    }
}

/// Evaluates every (mutant, test) pair. Budget exhaustion counts as a kill.
pub fn build_kill_matrix(
    program: &Program,
    mutants: &[Mutant],
    cost: &CostModel,
    jobs: usize,
) -> KillMatrix {
    let origin = fingerprint(program);
    let tests: Vec<(TestId, _)> = program.tests();
    let cells = pool(jobs).install(|| {
        mutants
            .par_iter()
            .map(|m| match materialize_with_origin(program, &origin, m) {
                Ok(mutated) => tests
                    .iter()
                    .map(|(id, _)| {
                        let test = mutated.test(id).expect("tests are not mutated");
                        let o = run_test(&mutated, id, test, cost);
                        Cell {
                            killed: !o.verdict.is_pass(),
                            steps: o.steps_executed,
                        }
                    })
                    .collect(),
                // a stale mutant kills nothing and costs nothing
                Err(_) => vec![
                    Cell {
                        killed: false,
                        steps: 0
                    };
                    tests.len()
                ],
            })
            .collect()
    });
    KillMatrix {
        mutants: mutants.iter().map(|m| m.id.clone()).collect(),
        tests: tests.into_iter().map(|(id, _)| id).collect(),
        cells,
    }
}
