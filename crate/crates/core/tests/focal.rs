mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fixture, gen_class, gen_program, FIXTURES};
use mutagoal_core::focal::{build_index, classify_methods, segment, FocalIndex, Kind};
use mutagoal_core::frontend::ast::{walk_stmts, ClassDecl, Expr, Receiver, Stmt};
use mutagoal_core::{parse_program, MethodRef, Program, TestId};
use proptest::prelude::*;

/// Methods of `class` that reach a field assignment through `self.` calls,
/// found by walking the call graph from every method.
fn reaches_assignment(class: &ClassDecl) -> BTreeSet<String> {
    let mut edges: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    let mut writes = BTreeSet::new();
    for m in &class.methods {
        let callees = edges.entry(&m.name).or_default();
        walk_stmts(&m.body, &mut |s| {
            if matches!(s, Stmt::SetField { .. }) {
                writes.insert(m.name.clone());
            }
            for e in s.own_exprs() {
                e.walk_postorder(&mut |n| {
                    if let Expr::Call {
                        receiver: Receiver::SelfRef,
                        method,
                        ..
                    } = n
                    {
                        callees.insert(method.clone());
                    }
                });
            }
        });
    }
    let mut out = BTreeSet::new();
    for m in &class.methods {
        let mut seen = BTreeSet::new();
        let mut stack = vec![m.name.clone()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            if writes.contains(&n) {
                out.insert(m.name.clone());
                break;
            }
            stack.extend(edges.get(n.as_str()).into_iter().flatten().cloned());
        }
    }
    out
}

fn check_index(p: &Program, index: &FocalIndex) -> Result<(), String> {
    let kinds = classify_methods(p);
    let declared: usize = p.classes.iter().map(|c| c.methods.len()).sum();
    if kinds.len() != declared {
        return Err(format!("{} kinds for {declared} methods", kinds.len()));
    }
    for class in &p.classes {
        let mutators = reaches_assignment(class);
        for m in &class.methods {
            let r = MethodRef::new(&class.name, &m.name);
            let expected = if mutators.contains(&m.name) {
                Kind::Mutator
            } else {
                Kind::Inspector
            };
            if index.kind(&r) != Some(expected) {
                return Err(format!(
                    "{r} is {:?}, expected {expected:?}",
                    index.kind(&r)
                ));
            }
        }
    }
    for (t, ms) in index.tests() {
        for m in ms {
            if index.kind(m) != Some(Kind::Mutator) {
                return Err(format!("{t} has non-mutator focal {m}"));
            }
            if !index.tests_of(m).contains(t) {
                return Err(format!("{m} does not list {t}"));
            }
        }
    }
    for (m, ts) in index.methods() {
        for t in ts {
            if !index.focal(t).is_some_and(|f| f.contains(m)) {
                return Err(format!("{t} does not list {m}"));
            }
        }
    }
    for (id, test) in p.tests() {
        let seg = segment(test);
        let mut next = 0;
        for s in &seg.scenarios {
            if s.pre_oracle.start != next
                || s.pre_oracle.end != s.oracle.start
                || s.oracle.is_empty()
            {
                return Err(format!("{id}: sub-scenarios do not tile the body"));
            }
            if !test.body[s.oracle.clone()]
                .iter()
                .all(|st| st.is_assertion())
            {
                return Err(format!("{id}: oracle block holds a non-assertion"));
            }
            next = s.oracle.end;
        }
        let tail = seg.trailing.clone().unwrap_or(next..next);
        if tail.start != next || tail.end != test.body.len() {
            return Err(format!("{id}: statements left outside every sub-scenario"));
        }
        if test.body[tail].iter().any(|st| st.is_assertion()) {
            return Err(format!("{id}: assertion outside an oracle block"));
        }
    }
    Ok(())
}

fn focal_of(index: &FocalIndex, test: &str) -> BTreeSet<String> {
    index
        .focal(&TestId(test.into()))
        .unwrap()
        .iter()
        .map(ToString::to_string)
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn withdraw_is_the_focal_method_of_its_test() {
    let p = fixture("bank-account").program;
    let index = build_index(&p);
    assert_eq!(
        focal_of(&index, "AccountTest.testWithdraw"),
        set(&["Account.withdraw"])
    );
    let kind = |m| index.kind(&MethodRef::new("Account", m));
    assert_eq!(kind("getBalance"), Some(Kind::Inspector));
    for m in ["withdraw", "deposit", "authenticate"] {
        assert_eq!(kind(m), Some(Kind::Mutator), "{m}");
    }
}

#[test]
fn fixture_indexes_are_consistent() {
    for name in FIXTURES {
        let p = fixture(name).program;
        check_index(&p, &build_index(&p)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn a_helper_called_only_indirectly_is_never_focal() {
    let p = fixture("uncovered-helper").program;
    let index = build_index(&p);
    assert_eq!(
        index.kind(&MethodRef::new("Inventory", "clear")),
        Some(Kind::Mutator)
    );
    assert!(!index.is_focal(&MethodRef::new("Inventory", "clear")));
    assert_eq!(
        focal_of(&index, "InventoryTest.testRefill"),
        set(&["Inventory.refill"])
    );
}

#[test]
fn an_eager_test_has_one_focal_method_per_sub_scenario() {
    let p = fixture("eager-test").program;
    let index = build_index(&p);
    let id = TestId("ApplianceTest.testEverything".into());
    assert_eq!(index.segmentation(&id).unwrap().scenarios.len(), 3);
    assert_eq!(
        focal_of(&index, id.as_str()),
        set(&["Counter.increment", "Lamp.toggle", "Thermostat.lower"])
    );
}

#[test]
fn a_mutator_inside_an_assertion_is_focal() {
    let tree = std::collections::BTreeMap::from([
        (
            "src/Account.mini".to_string(),
            include_str!("../../../fixtures/bank-account/src/Account.mini").to_string(),
        ),
        (
            "tests/AccountTest.mini".to_string(),
            "suite AccountTest {\n    test testInline {\n        a := new Account()\n        a.authenticate(1234)\n        a.deposit(10)\n        assertTrue(a.withdraw(6))\n    }\n}\n".to_string(),
        ),
    ]);
    let p = parse_program(&tree).unwrap();
    let index = build_index(&p);
    assert_eq!(
        focal_of(&index, "AccountTest.testInline"),
        set(&["Account.withdraw"])
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generated_indexes_are_consistent(
        class in gen_class(),
        calls in prop::collection::vec((-3i64..3, -3i64..3, 0i64..2), 0..4),
    ) {
        let p = gen_program(&class, &calls);
        prop_assert_eq!(check_index(&p, &build_index(&p)), Ok(()));
    }
}
