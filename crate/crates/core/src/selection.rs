//! Test scoping strategies: the full suite, the tests of the mutated class,
//! or the tests that have the mutated method as a focal method.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::focal::FocalIndex;
use crate::frontend::ast::{MethodRef, Program, TestId};
use crate::mutantgen::Mutant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Full,
    Class,
    Focal,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Full, Strategy::Class, Strategy::Focal];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Class => "class",
            Strategy::Focal => "focal",
        }
    }

    /// Row label used in report tables.
    pub fn technique(self) -> &'static str {
        match self {
            Strategy::Full => "Full Test Suite",
            Strategy::Class => "Class Based",
            Strategy::Focal => "Focal Methods",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Strategy::Full),
            "class" => Ok(Strategy::Class),
            "focal" => Ok(Strategy::Focal),
            other => Err(format!(
                "unknown strategy `{other}` (expected full, class or focal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSelection {
    pub mutant: String,
    pub strategy: Strategy,
    pub tests: Vec<TestId>,
    /// Whether any test has the mutated method as a focal method.
    pub has_focal_tests: bool,
}

/// Orders tests by suite file path, then declaration order. Unknown ids are dropped.
pub fn order_tests(tests: &BTreeSet<TestId>, program: &Program) -> Vec<TestId> {
    program
        .tests()
        .into_iter()
        .map(|(id, _)| id)
        .filter(|id| tests.contains(id))
        .collect()
}

/// The tests a strategy considers for a mutant in `method`, in global order.
pub fn select_for_method(
    method: &MethodRef,
    program: &Program,
    index: &FocalIndex,
    strategy: Strategy,
) -> Vec<TestId> {
    match strategy {
        Strategy::Full => program.tests().into_iter().map(|(id, _)| id).collect(),
        Strategy::Class => {
            let suite = format!("{}Test", method.class);
            program
                .tests()
                .into_iter()
                .map(|(id, _)| id)
                .filter(|id| id.as_str().split_once('.').map(|(s, _)| s) == Some(suite.as_str()))
                .collect()
        }
        Strategy::Focal => order_tests(&index.tests_of(method), program),
    }
}

pub fn select(
    mutant: &Mutant,
    program: &Program,
    index: &FocalIndex,
    strategy: Strategy,
) -> TestSelection {
    TestSelection {
        mutant: mutant.id.clone(),
        strategy,
        tests: select_for_method(&mutant.method, program, index, strategy),
        has_focal_tests: index.is_focal(&mutant.method),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focal::build_index;
    use crate::frontend::parse_program;
    use std::collections::BTreeMap;

    fn program() -> Program {
        let tree = BTreeMap::from([
            (
                "src/A.mini".to_string(),
                "class A {\n field x = 0\n method set(v) {\n  self.x := v\n }\n method bump() {\n  self.x := self.x + 1\n }\n method get() returns {\n  return self.x\n }\n method helper() {\n  self.x := 0\n }\n}\n".to_string(),
            ),
            (
                "tests/B.mini".to_string(),
                "suite BTest {\n test b1 {\n  a := new A()\n  a.set(2)\n  assertEqual(a.get(), 2)\n }\n}\n".to_string(),
            ),
            (
                "tests/A.mini".to_string(),
                "suite ATest {\n test a1 {\n  a := new A()\n  a.bump()\n  assertEqual(a.get(), 1)\n }\n test a2 {\n  a := new A()\n  assertEqual(a.get(), 0)\n }\n}\n".to_string(),
            ),
        ]);
        parse_program(&tree).unwrap()
    }

    fn ids(names: &[&str]) -> Vec<TestId> {
        names.iter().map(|n| TestId(n.to_string())).collect()
    }

    #[test]
    fn strategies() {
        let p = program();
        let index = build_index(&p);
        let m = |n: &str| MethodRef::new("A", n);
        assert_eq!(
            select_for_method(&m("set"), &p, &index, Strategy::Full),
            ids(&["ATest.a1", "ATest.a2", "BTest.b1"])
        );
        assert_eq!(
            select_for_method(&m("set"), &p, &index, Strategy::Class),
            ids(&["ATest.a1", "ATest.a2"])
        );
        // the focal test lives in a differently named suite
        assert_eq!(
            select_for_method(&m("set"), &p, &index, Strategy::Focal),
            ids(&["BTest.b1"])
        );
        assert!(select_for_method(&m("helper"), &p, &index, Strategy::Focal).is_empty());
        assert!(!index.is_focal(&m("helper")));
    }

    #[test]
    fn ordering_ignores_input_order() {
        let p = program();
        let a: BTreeSet<TestId> = ids(&["BTest.b1", "ATest.a2"]).into_iter().collect();
        assert_eq!(order_tests(&a, &p), ids(&["ATest.a2", "BTest.b1"]));
        let single: BTreeSet<TestId> = ids(&["ATest.a1"]).into_iter().collect();
        assert_eq!(order_tests(&single, &p), ids(&["ATest.a1"]));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("nonsense".parse::<Strategy>().is_err());
    }
}
