//! Focal-method detection and the method-level test traceability index.
//!
//! A method is a *mutator* when it writes a field of `self`, directly or
//! through a call on `self` to another mutator; every other method is an
//! *inspector*. A test is split into sub-scenarios, each ending in a run of
//! assertions. Within a sub-scenario the focal methods are the last mutator
//! invoked on each asserted object, plus any mutator whose result is asserted.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::frontend::static_class;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mutator,
    Inspector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodKind {
    pub method: MethodRef,
    pub kind: Kind,
}

fn writes_self_field(body: &[Stmt]) -> bool {
    let mut found = false;
    walk_stmts(body, &mut |s| found |= matches!(s, Stmt::SetField { .. }));
    found
}

fn self_calls(body: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk_stmts(body, &mut |s| {
        for e in s.own_exprs() {
            e.walk_postorder(&mut |n| {
                if let Expr::Call {
                    receiver: Receiver::SelfRef,
                    method,
                    ..
                } = n
                {
                    out.insert(method.clone());
                }
            });
        }
    });
    out
}

/// Classifies every declared method, in class and declaration order.
pub fn classify_methods(program: &Program) -> Vec<MethodKind> {
    let mut out = Vec::new();
    for class in &program.classes {
        let calls: Vec<BTreeSet<String>> =
            class.methods.iter().map(|m| self_calls(&m.body)).collect();
        let mut mutator: Vec<bool> = class
            .methods
            .iter()
            .map(|m| writes_self_field(&m.body))
            .collect();
        // least fixpoint over the self-call graph
        loop {
            let mut changed = false;
            for (i, callees) in calls.iter().enumerate() {
                if mutator[i] {
                    continue;
                }
                let reaches = class
                    .methods
                    .iter()
                    .enumerate()
                    .any(|(j, m)| mutator[j] && callees.contains(&m.name));
                if reaches {
                    mutator[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (m, is_mutator) in class.methods.iter().zip(mutator) {
            out.push(MethodKind {
                method: MethodRef::new(&class.name, &m.name),
                kind: if is_mutator {
                    Kind::Mutator
                } else {
                    Kind::Inspector
                },
            });
        }
    }
    out
}

pub type KindTable = BTreeMap<MethodRef, Kind>;

pub fn kind_table(kinds: &[MethodKind]) -> KindTable {
    kinds.iter().map(|k| (k.method.clone(), k.kind)).collect()
}

/// A span of test statements followed by the run of assertions that closes it.
/// Ranges are statement indices, end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubScenario {
    pub pre_oracle: Range<usize>,
    pub oracle: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    pub scenarios: Vec<SubScenario>,
    /// Statements after the last assertion; they belong to no sub-scenario.
    pub trailing: Option<Range<usize>>,
}

/// Splits a test into sub-scenarios, one per maximal run of assertions.
pub fn segment(test: &TestCase) -> Segmentation {
    let mut seg = Segmentation::default();
    let mut start = 0;
    let mut i = 0;
    let n = test.body.len();
    while i < n {
        if test.body[i].is_assertion() {
            let oracle_start = i;
            while i < n && test.body[i].is_assertion() {
                i += 1;
            }
            seg.scenarios.push(SubScenario {
                pre_oracle: start..oracle_start,
                oracle: oracle_start..i,
            });
            start = i;
        } else {
            i += 1;
        }
    }
    if start < n {
        seg.trailing = Some(start..n);
    }
    seg
}

/// A tracked object: a local name and which binding of it.
type Binding = (String, usize);

#[derive(Debug, Clone)]
struct CallEvent {
    receiver: Binding,
    method: Option<MethodRef>,
}

/// What one test statement does, with every local resolved to its binding.
#[derive(Debug, Default)]
struct StmtFacts {
    calls: Vec<CallEvent>,
    reads: Vec<Binding>,
    binds: Option<Binding>,
}

fn resolve_method(program: &Program, class: Option<&str>, method: &str) -> Option<MethodRef> {
    if let Some(c) = class.and_then(|c| program.class(c)) {
        return c.method(method).map(|_| MethodRef::new(&c.name, method));
    }
    let mut owners = program
        .classes
        .iter()
        .filter(|c| c.method(method).is_some());
    match (owners.next(), owners.next()) {
        (Some(c), None) => Some(MethodRef::new(&c.name, method)),
        _ => None,
    }
}

fn facts(program: &Program, test: &TestCase) -> Vec<StmtFacts> {
    let mut generation: BTreeMap<String, usize> = BTreeMap::new();
    let mut classes: BTreeMap<Binding, Option<String>> = BTreeMap::new();
    let mut out = Vec::with_capacity(test.body.len());
    for stmt in &test.body {
        let mut f = StmtFacts::default();
        let current = |name: &str, generation: &BTreeMap<String, usize>| -> Binding {
            (name.to_string(), generation.get(name).copied().unwrap_or(0))
        };
        for e in stmt.exprs() {
            e.walk_postorder(&mut |n| match n {
                Expr::Local(name) => f.reads.push(current(name, &generation)),
                Expr::Call {
                    receiver: Receiver::Local(name),
                    method,
                    ..
                } => {
                    let receiver = current(name, &generation);
                    let class = classes.get(&receiver).cloned().flatten();
                    f.reads.push(receiver.clone());
                    f.calls.push(CallEvent {
                        method: resolve_method(program, class.as_deref(), method),
                        receiver,
                    });
                }
                _ => {}
            });
        }
        if let TestStmt::Let { name, value } = stmt {
            let g = generation.entry(name.clone()).or_insert(0);
            *g += 1;
            let binding = (name.clone(), *g);
            classes.insert(binding.clone(), static_class(value));
            f.binds = Some(binding);
        }
        out.push(f);
    }
    out
}

/// Focal methods of one test: the union over its sub-scenarios.
pub fn extract_focal(program: &Program, test: &TestCase, kinds: &KindTable) -> BTreeSet<MethodRef> {
    let facts = facts(program, test);
    let is_mutator = |m: &Option<MethodRef>| {
        m.as_ref()
            .is_some_and(|m| kinds.get(m) == Some(&Kind::Mutator))
    };
    let bound_at: BTreeMap<&Binding, usize> = facts
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.binds.as_ref().map(|b| (b, i)))
        .collect();

    let mut focal = BTreeSet::new();
    for scenario in segment(test).scenarios {
        // Mutator calls inside assertions act as if made just before the oracle.
        let events: Vec<&CallEvent> = scenario
            .pre_oracle
            .clone()
            .chain(scenario.oracle.clone())
            .flat_map(|i| facts[i].calls.iter())
            .filter(|c| is_mutator(&c.method))
            .collect();
        for i in scenario.oracle.clone() {
            for c in &facts[i].calls {
                if is_mutator(&c.method) {
                    focal.insert(c.method.clone().unwrap());
                }
            }
        }

        // Everything an assertion reads, followed back through the bindings it came from.
        let mut asserted: BTreeSet<Binding> = BTreeSet::new();
        let mut work: Vec<Binding> = scenario
            .oracle
            .clone()
            .flat_map(|i| facts[i].reads.iter().cloned())
            .collect();
        while let Some(b) = work.pop() {
            if !asserted.insert(b.clone()) {
                continue;
            }
            if let Some(&at) = bound_at.get(&b) {
                for c in &facts[at].calls {
                    if is_mutator(&c.method) {
                        focal.insert(c.method.clone().unwrap());
                    }
                }
                work.extend(facts[at].reads.iter().cloned());
            }
        }

        for object in &asserted {
            if let Some(last) = events.iter().rev().find(|c| &c.receiver == object) {
                focal.insert(last.method.clone().unwrap());
            }
        }
    }
    focal
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFocal {
    pub test_id: TestId,
    pub focal_methods: Vec<MethodRef>,
    pub sub_scenario_count: usize,
    pub sub_scenarios: Vec<SubScenario>,
}

/// Bidirectional map between tests and the production methods they focus on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FocalIndex {
    kinds: Vec<MethodKind>,
    focal: BTreeMap<TestId, BTreeSet<MethodRef>>,
    tests_of: BTreeMap<MethodRef, BTreeSet<TestId>>,
    scenarios: BTreeMap<TestId, Segmentation>,
    /// Tests in global order.
    order: Vec<TestId>,
    lints: Vec<Lint>,
}

impl FocalIndex {
    pub fn focal(&self, test: &TestId) -> Option<&BTreeSet<MethodRef>> {
        self.focal.get(test)
    }

    pub fn tests_of(&self, method: &MethodRef) -> BTreeSet<TestId> {
        self.tests_of.get(method).cloned().unwrap_or_default()
    }

    /// True if some test has `method` as a focal method.
    pub fn is_focal(&self, method: &MethodRef) -> bool {
        self.tests_of.contains_key(method)
    }

    pub fn kinds(&self) -> &[MethodKind] {
        &self.kinds
    }

    pub fn kind(&self, method: &MethodRef) -> Option<Kind> {
        self.kinds
            .iter()
            .find(|k| &k.method == method)
            .map(|k| k.kind)
    }

    pub fn segmentation(&self, test: &TestId) -> Option<&Segmentation> {
        self.scenarios.get(test)
    }

    pub fn lints(&self) -> &[Lint] {
        &self.lints
    }

    pub fn tests(&self) -> impl Iterator<Item = (&TestId, &BTreeSet<MethodRef>)> {
        self.order.iter().map(move |t| (t, &self.focal[t]))
    }

    pub fn methods(&self) -> impl Iterator<Item = (&MethodRef, &BTreeSet<TestId>)> {
        self.tests_of.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn test_records(&self) -> Vec<TestFocal> {
        self.order
            .iter()
            .map(|t| {
                let seg = &self.scenarios[t];
                TestFocal {
                    test_id: t.clone(),
                    focal_methods: self.focal[t].iter().cloned().collect(),
                    sub_scenario_count: seg.scenarios.len(),
                    sub_scenarios: seg.scenarios.clone(),
                }
            })
            .collect()
    }

    /// Rebuilds an index from its persisted parts.
    pub fn from_parts(kinds: Vec<MethodKind>, tests: Vec<TestFocal>) -> FocalIndex {
        let mut index = FocalIndex {
            kinds,
            ..FocalIndex::default()
        };
        for t in tests {
            index.insert(
                t.test_id,
                t.focal_methods.into_iter().collect(),
                Segmentation {
                    scenarios: t.sub_scenarios,
                    trailing: None,
                },
            );
        }
        index
    }

    fn insert(&mut self, test: TestId, methods: BTreeSet<MethodRef>, seg: Segmentation) {
        for m in &methods {
            self.tests_of
                .entry(m.clone())
                .or_default()
                .insert(test.clone());
        }
        self.order.push(test.clone());
        self.scenarios.insert(test.clone(), seg);
        self.focal.insert(test, methods);
    }
}

/// Runs focal extraction over every test of the program.
pub fn build_index(program: &Program) -> FocalIndex {
    let kinds = classify_methods(program);
    let table = kind_table(&kinds);
    let mut index = FocalIndex {
        kinds,
        ..FocalIndex::default()
    };
    for (id, test) in program.tests() {
        let seg = segment(test);
        if let Some(trailing) = &seg.trailing {
            let (s, t) = program.test_position(&id).expect("listed test");
            let location = program
                .source_map
                .location(NodeKey::TestStmt {
                    suite: s,
                    test: t,
                    stmt: trailing.start,
                })
                .expect("parser records test statements");
            index.lints.push(Lint {
                location,
                message: format!("{id}: statements after the last assertion form no sub-scenario"),
            });
        }
        let focal = extract_focal(program, test, &table);
        index.insert(id, focal, seg);
    }
    index
}
