mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::{fixture_dir, FIXTURES};
use mutagoal_core::corpus::{
    build_manifest, load_corpus, read_manifest, render_manifest, CorpusError, MANIFEST_FILE,
};
use mutagoal_core::project::read_sources;

fn copy_fixture(name: &str, to: &Path) {
    for (rel, text) in read_sources(&fixture_dir(name)).unwrap() {
        let path = to.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }
    for extra in [MANIFEST_FILE, "mutagoal.conf"] {
        let from = fixture_dir(name).join(extra);
        if from.is_file() {
            fs::copy(from, to.join(extra)).unwrap();
        }
    }
}

#[test]
fn every_fixture_matches_its_manifest() {
    for name in FIXTURES {
        let corpus = load_corpus(&fixture_dir(name)).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(corpus.manifest.name, name);
        assert_eq!(
            corpus.manifest.generated_by,
            format!("mutagoal manifest fixtures/{name}")
        );
        let drift = corpus.deep_drift(&corpus.kill_matrix());
        assert!(drift.is_empty(), "{name}: {drift:?}");
    }
}

#[test]
fn regenerating_a_manifest_reproduces_the_committed_file() {
    for name in FIXTURES {
        let dir = fixture_dir(name);
        let committed = fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap();
        let old = read_manifest(&dir).unwrap();
        let fresh = build_manifest(name, &old.description, &dir).unwrap();
        assert_eq!(render_manifest(&fresh), committed, "{name}");
    }
}

#[test]
fn the_synthetic_corpus_is_large_enough() {
    let m = read_manifest(&fixture_dir("synthetic")).unwrap();
    assert!(m.classes >= 20, "{} classes", m.classes);
    assert!(m.tests >= 100, "{} tests", m.tests);
    assert!(m.mutants >= 500, "{} mutants", m.mutants);
}

#[test]
fn the_synthetic_sources_match_their_generator() {
    let Ok(status) = Command::new("python3").arg("--version").output() else {
        eprintln!("python3 not found; generator check skipped");
        return;
    };
    assert!(status.status.success());
    let out = tempfile::tempdir().unwrap();
    let ran = Command::new("python3")
        .arg(fixture_dir("synthetic").join("generate.py"))
        .arg(out.path())
        .status()
        .unwrap();
    assert!(ran.success());
    assert_eq!(
        read_sources(out.path()).unwrap(),
        read_sources(&fixture_dir("synthetic")).unwrap()
    );
}

#[test]
fn changed_sources_are_reported_as_drift() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture("bank-account", dir.path());
    assert!(load_corpus(dir.path()).is_ok());

    let src = dir.path().join("src/Account.mini");
    let text = fs::read_to_string(&src).unwrap();
    fs::write(
        &src,
        text.replace("n <= self.balance", "n < self.balance + 1"),
    )
    .unwrap();
    match load_corpus(dir.path()) {
        Err(CorpusError::Drift { entries, .. }) => {
            assert!(
                entries.iter().any(|e| e.starts_with("mutants:")),
                "{entries:?}"
            );
        }
        other => panic!("expected drift, got {:?}", other.map(|c| c.manifest.name)),
    }
}

#[test]
fn changed_behaviour_is_caught_by_the_deep_check() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture("bank-account", dir.path());
    let src = dir.path().join("src/Account.mini");
    let text = fs::read_to_string(&src).unwrap();
    fs::write(
        &src,
        text.replace("return self.balance", "return self.balance + 0"),
    )
    .unwrap();
    assert!(
        matches!(load_corpus(dir.path()), Err(CorpusError::Drift { .. })),
        "extra CRP and AOR sites"
    );

    copy_fixture("bank-account", dir.path());
    let tests = dir.path().join("tests/AccountTest.mini");
    let text = fs::read_to_string(&tests).unwrap();
    fs::write(&tests, text.replace("        assertTrue(success)\n", "")).unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    let drift = corpus.deep_drift(&corpus.kill_matrix());
    assert!(
        drift.iter().any(|d| d.starts_with("matrix digest")),
        "{drift:?}"
    );
}
