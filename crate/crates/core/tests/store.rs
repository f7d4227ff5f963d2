mod common;

use std::collections::BTreeSet;
use std::fs;

use common::fixture;
use mutagoal_core::engine::build_kill_matrix;
use mutagoal_core::focal::{build_index, FocalIndex};
use mutagoal_core::interp::CostModel;
use mutagoal_core::mutantgen::{generate_mutants, Mutant, Operator};
use mutagoal_core::store::{run_persisted, OutDir, RunRequest, StoreError};
use mutagoal_core::{Program, Strategy};
use proptest::prelude::*;

struct Setup {
    program: Program,
    mutants: Vec<Mutant>,
    index: FocalIndex,
    operators: BTreeSet<Operator>,
}

fn setup() -> Setup {
    let program = fixture("quality-score").program;
    let operators: BTreeSet<Operator> = Operator::ALL.into_iter().collect();
    Setup {
        mutants: generate_mutants(&program, &operators),
        index: build_index(&program),
        program,
        operators,
    }
}

fn request(s: &Setup, strategy: Strategy, budget: u64, fresh: bool) -> RunRequest<'_> {
    RunRequest {
        program: &s.program,
        mutants: &s.mutants,
        index: &s.index,
        operators: &s.operators,
        strategy,
        cost: CostModel::steps(budget).unwrap(),
        jobs: 2,
        fresh,
    }
}

fn reference(s: &Setup) -> String {
    let dir = tempfile::tempdir().unwrap();
    let out = OutDir::new(dir.path());
    run_persisted(&out, &request(s, Strategy::Focal, 10_000, false)).unwrap();
    fs::read_to_string(out.results_file(Strategy::Focal)).unwrap()
}

#[test]
fn an_interrupted_run_resumes_to_the_same_file() {
    let s = setup();
    let expected = reference(&s);
    let dir = tempfile::tempdir().unwrap();
    let out = OutDir::new(dir.path());
    out.create().unwrap();
    let lines: Vec<&str> = expected.lines().collect();
    let mut partial: String = lines[..20].iter().map(|l| format!("{l}\n")).collect();
    partial.push_str(&lines[20][..lines[20].len() / 2]);
    fs::write(out.results_file(Strategy::Focal), partial).unwrap();
    let meta_dir = tempfile::tempdir().unwrap();
    let meta_out = OutDir::new(meta_dir.path());
    run_persisted(&meta_out, &request(&s, Strategy::Focal, 10_000, false)).unwrap();
    fs::copy(
        meta_out.meta_file(Strategy::Focal),
        out.meta_file(Strategy::Focal),
    )
    .unwrap();

    let summary = run_persisted(&out, &request(&s, Strategy::Focal, 10_000, false)).unwrap();
    assert_eq!(summary.resumed, 20);
    assert_eq!(
        fs::read_to_string(out.results_file(Strategy::Focal)).unwrap(),
        expected
    );
}

#[test]
fn changed_settings_refuse_to_resume() {
    let s = setup();
    let dir = tempfile::tempdir().unwrap();
    let out = OutDir::new(dir.path());
    run_persisted(&out, &request(&s, Strategy::Full, 10_000, false)).unwrap();
    let err = run_persisted(&out, &request(&s, Strategy::Full, 20_000, false)).unwrap_err();
    assert!(
        matches!(
            err,
            StoreError::MetaMismatch {
                field: "budget",
                ..
            }
        ),
        "{err}"
    );
    let summary = run_persisted(&out, &request(&s, Strategy::Full, 20_000, true)).unwrap();
    assert_eq!(summary.resumed, 0);
    let again = run_persisted(&out, &request(&s, Strategy::Full, 20_000, false)).unwrap();
    assert_eq!(again.resumed, s.mutants.len());
    assert_eq!(again.results, summary.results);
}

#[test]
fn results_without_settings_are_not_trusted() {
    let s = setup();
    let dir = tempfile::tempdir().unwrap();
    let out = OutDir::new(dir.path());
    out.create().unwrap();
    fs::write(out.results_file(Strategy::Class), "").unwrap();
    assert!(run_persisted(&out, &request(&s, Strategy::Class, 10_000, false)).is_err());
}

#[test]
fn everything_stays_inside_the_output_directory() {
    let s = setup();
    let parent = tempfile::tempdir().unwrap();
    let out = OutDir::new(parent.path().join("out"));
    for strategy in Strategy::ALL {
        run_persisted(&out, &request(&s, strategy, 10_000, false)).unwrap();
    }
    let matrix = build_kill_matrix(
        &s.program,
        &s.mutants,
        &CostModel::steps(10_000).unwrap(),
        2,
    );
    out.write_matrix(&matrix).unwrap();
    let top: Vec<String> = fs::read_dir(parent.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(top, ["out"]);
    let mut names: Vec<String> = fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "campaign-class.json",
            "campaign-focal.json",
            "campaign-full.json",
            "focal.json",
            "matrix.csv",
            "mutants.jsonl",
            "results-class.jsonl",
            "results-focal.jsonl",
            "results-full.jsonl",
            "timing-class.jsonl",
            "timing-focal.jsonl",
            "timing-full.jsonl",
        ]
    );
    let data = out.load().unwrap();
    assert_eq!(data.results.len(), 3);
    assert_eq!(data.matrix, Some(matrix));
    assert_eq!(data.mutants.len(), s.mutants.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn resuming_from_any_prefix_gives_the_same_results(cut in 0usize..=52, torn in any::<bool>()) {
        let s = setup();
        let expected = reference(&s);
        let dir = tempfile::tempdir().unwrap();
        let out = OutDir::new(dir.path());
        run_persisted(&out, &request(&s, Strategy::Focal, 10_000, false)).unwrap();
        let lines: Vec<&str> = expected.lines().collect();
        let cut = cut.min(lines.len());
        let mut partial: String = lines[..cut].iter().map(|l| format!("{l}\n")).collect();
        if torn && cut < lines.len() {
            partial.push_str(&lines[cut][..3]);
        }
        fs::write(out.results_file(Strategy::Focal), partial).unwrap();
        let summary = run_persisted(&out, &request(&s, Strategy::Focal, 10_000, false)).unwrap();
        prop_assert_eq!(summary.resumed, cut);
        prop_assert_eq!(fs::read_to_string(out.results_file(Strategy::Focal)).unwrap(), expected);
    }
}
