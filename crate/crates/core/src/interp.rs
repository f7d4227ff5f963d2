//! Deterministic tree-walking interpreter for MiniLang test cases.
//!
//! Cost is counted in steps: one per statement executed and one per
//! expression node evaluated. Every test starts from an empty heap, so a
//! verdict depends only on the program, the test and the budget.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
const MAX_CALL_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    #[default]
    Steps,
    Wall,
}

impl std::str::FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "steps" => Ok(CostMode::Steps),
            "wall" => Ok(CostMode::Wall),
            other => Err(format!(
                "unknown cost mode `{other}` (expected steps or wall)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub mode: CostMode,
    /// Step budget per test; always positive.
    budget: u64,
}

impl CostModel {
    pub fn new(mode: CostMode, budget: u64) -> Option<CostModel> {
        (budget > 0).then_some(CostModel { mode, budget })
    }

    pub fn steps(budget: u64) -> Option<CostModel> {
        CostModel::new(CostMode::Steps, budget)
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            mode: CostMode::Steps,
            budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    DivisionByZero,
    Overflow,
    TypeMismatch,
    UnboundLocal,
    UnknownMethod,
    ArityMismatch,
    MissingReturn,
    VoidValue,
    StackOverflow,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::DivisionByZero => "division by zero",
            ErrorKind::Overflow => "integer overflow",
            ErrorKind::TypeMismatch => "type mismatch",
            ErrorKind::UnboundLocal => "unbound local",
            ErrorKind::UnknownMethod => "unknown method",
            ErrorKind::ArityMismatch => "arity mismatch",
            ErrorKind::MissingReturn => "missing return",
            ErrorKind::VoidValue => "void value used",
            ErrorKind::StackOverflow => "call depth exceeded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    AssertionFailure {
        location: Location,
        expected: String,
        actual: String,
    },
    ExecutionError {
        kind: ErrorKind,
        location: Location,
    },
    StepBudgetExceeded,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcome {
    pub test: TestId,
    pub verdict: Verdict,
    pub steps_executed: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Obj(usize),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Obj(id) => write!(f, "<object #{id}>"),
        }
    }
}

impl From<Literal> for Value {
    fn from(lit: Literal) -> Self {
        match lit {
            Literal::Int(v) => Value::Int(v),
            Literal::Bool(b) => Value::Bool(b),
        }
    }
}

fn same_kind(a: Value, b: Value) -> bool {
    matches!(
        (a, b),
        (Value::Int(_), Value::Int(_)) | (Value::Bool(_), Value::Bool(_))
    )
}

/// One live object: its class and a field store aligned with the class's declared fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectInstance {
    pub class: usize,
    pub fields: Vec<Value>,
}

enum Halt {
    Error(ErrorKind, NodeKey),
    Budget,
    Failed {
        at: NodeKey,
        expected: String,
        actual: String,
    },
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

struct Frame {
    this: Option<usize>,
    locals: Vec<(String, Value)>,
}

impl Frame {
    fn get(&self, name: &str) -> Option<Value> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    fn set(&mut self, name: &str, value: Value) {
        match self.locals.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.locals.push((name.to_string(), value)),
        }
    }
}

struct Machine<'p> {
    program: &'p Program,
    budget: u64,
    steps: u64,
    heap: Vec<ObjectInstance>,
    depth: usize,
}

type Exec<T> = Result<T, Halt>;

/// Where an expression sits, so errors can report the enclosing statement.
#[derive(Clone, Copy)]
struct Site {
    stmt: NodeKey,
}

impl<'p> Machine<'p> {
    fn tick(&mut self) -> Exec<()> {
        if self.steps >= self.budget {
            return Err(Halt::Budget);
        }
        self.steps += 1;
        Ok(())
    }

    fn value(&mut self, frame: &mut Frame, e: &Expr, site: Site) -> Exec<Value> {
        match self.eval(frame, e, site)? {
            Some(v) => Ok(v),
            None => Err(Halt::Error(ErrorKind::VoidValue, site.stmt)),
        }
    }

    fn int(&mut self, frame: &mut Frame, e: &Expr, site: Site) -> Exec<i64> {
        match self.value(frame, e, site)? {
            Value::Int(v) => Ok(v),
            _ => Err(Halt::Error(ErrorKind::TypeMismatch, site.stmt)),
        }
    }

    fn boolean(&mut self, frame: &mut Frame, e: &Expr, site: Site) -> Exec<bool> {
        match self.value(frame, e, site)? {
            Value::Bool(b) => Ok(b),
            _ => Err(Halt::Error(ErrorKind::TypeMismatch, site.stmt)),
        }
    }

    fn eval(&mut self, frame: &mut Frame, e: &Expr, site: Site) -> Exec<Option<Value>> {
        self.tick()?;
        let err = |kind| Halt::Error(kind, site.stmt);
        let v = match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Local(name) => frame
                .get(name)
                .ok_or_else(|| err(ErrorKind::UnboundLocal))?,
            Expr::Field(name) => {
                let this = frame.this.expect("field reads only occur in methods");
                let obj = &self.heap[this];
                let idx = self.program.classes[obj.class]
                    .fields
                    .iter()
                    .position(|f| &f.name == name)
                    .expect("resolved field");
                obj.fields[idx]
            }
            Expr::Not(inner) => Value::Bool(!self.boolean(frame, inner, site)?),
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::And => {
                    let l = self.boolean(frame, lhs, site)?;
                    Value::Bool(l && self.boolean(frame, rhs, site)?)
                }
                BinOp::Or => {
                    let l = self.boolean(frame, lhs, site)?;
                    Value::Bool(l || self.boolean(frame, rhs, site)?)
                }
                BinOp::Eq | BinOp::Ne => {
                    let l = self.value(frame, lhs, site)?;
                    let r = self.value(frame, rhs, site)?;
                    let eq = match (l, r) {
                        (Value::Int(a), Value::Int(b)) => a == b,
                        (Value::Bool(a), Value::Bool(b)) => a == b,
                        (Value::Obj(a), Value::Obj(b)) => a == b,
                        _ => return Err(err(ErrorKind::TypeMismatch)),
                    };
                    Value::Bool(if *op == BinOp::Eq { eq } else { !eq })
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let l = self.int(frame, lhs, site)?;
                    let r = self.int(frame, rhs, site)?;
                    Value::Bool(match op {
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        _ => l >= r,
                    })
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                    let l = self.int(frame, lhs, site)?;
                    let r = self.int(frame, rhs, site)?;
                    if matches!(op, BinOp::Div | BinOp::Rem) && r == 0 {
                        return Err(err(ErrorKind::DivisionByZero));
                    }
                    let out = match op {
                        BinOp::Add => l.checked_add(r),
                        BinOp::Sub => l.checked_sub(r),
                        BinOp::Mul => l.checked_mul(r),
                        BinOp::Div => l.checked_div(r),
                        _ => l.checked_rem(r),
                    };
                    Value::Int(out.ok_or_else(|| err(ErrorKind::Overflow))?)
                }
            },
            Expr::New { class, args } => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.value(frame, a, site)?);
                }
                let class_idx = self.program.class_index(class).expect("resolved class");
                let decl = &self.program.classes[class_idx];
                let mut fields: Vec<Value> = decl.fields.iter().map(|f| f.init.into()).collect();
                if !values.is_empty() {
                    if values.len() != fields.len() {
                        return Err(err(ErrorKind::ArityMismatch));
                    }
                    for (slot, v) in fields.iter_mut().zip(values) {
                        if !same_kind(*slot, v) {
                            return Err(err(ErrorKind::TypeMismatch));
                        }
                        *slot = v;
                    }
                }
                self.heap.push(ObjectInstance {
                    class: class_idx,
                    fields,
                });
                Value::Obj(self.heap.len() - 1)
            }
            Expr::Call {
                receiver,
                method,
                args,
            } => {
                let target = match receiver {
                    Receiver::SelfRef => frame.this.expect("self calls only occur in methods"),
                    Receiver::Local(name) => match frame.get(name) {
                        Some(Value::Obj(id)) => id,
                        Some(_) => return Err(err(ErrorKind::TypeMismatch)),
                        None => return Err(err(ErrorKind::UnboundLocal)),
                    },
                };
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.value(frame, a, site)?);
                }
                return self.call(target, method, values, site);
            }
        };
        Ok(Some(v))
    }

    fn call(
        &mut self,
        target: usize,
        method: &str,
        args: Vec<Value>,
        site: Site,
    ) -> Exec<Option<Value>> {
        let class = self.heap[target].class;
        let decl = &self.program.classes[class];
        let Some(mi) = decl.methods.iter().position(|m| m.name == method) else {
            return Err(Halt::Error(ErrorKind::UnknownMethod, site.stmt));
        };
        let m = &decl.methods[mi];
        if m.params.len() != args.len() {
            return Err(Halt::Error(ErrorKind::ArityMismatch, site.stmt));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Halt::Error(ErrorKind::StackOverflow, site.stmt));
        }
        let mut frame = Frame {
            this: Some(target),
            locals: m.params.iter().cloned().zip(args).collect(),
        };
        self.depth += 1;
        let flow = self.block(&mut frame, &m.body, class, mi, 0);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal if m.returns_value => {
                let end = NodeKey::Method { class, method: mi };
                Err(Halt::Error(ErrorKind::MissingReturn, end))
            }
            Flow::Normal => Ok(None),
        }
    }

    /// Executes a block whose first statement has pre-order index `first`.
    fn block(
        &mut self,
        frame: &mut Frame,
        block: &[Stmt],
        class: usize,
        method: usize,
        first: usize,
    ) -> Exec<Flow> {
        let mut index = first;
        for stmt in block {
            let site = Site {
                stmt: NodeKey::Stmt {
                    class,
                    method,
                    stmt: index,
                },
            };
            self.tick()?;
            match stmt {
                Stmt::Let { name, value } => {
                    let v = self.value(frame, value, site)?;
                    frame.set(name, v);
                }
                Stmt::SetField { field, value } => {
                    let v = self.value(frame, value, site)?;
                    let this = frame.this.expect("methods have a receiver");
                    let obj_class = self.heap[this].class;
                    let idx = self.program.classes[obj_class]
                        .fields
                        .iter()
                        .position(|f| &f.name == field)
                        .expect("resolved field");
                    let slot = &mut self.heap[this].fields[idx];
                    if !same_kind(*slot, v) {
                        return Err(Halt::Error(ErrorKind::TypeMismatch, site.stmt));
                    }
                    *slot = v;
                }
                Stmt::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    let flow = if self.boolean(frame, cond, site)? {
                        self.block(frame, then_block, class, method, index + 1)?
                    } else if let Some(els) = else_block {
                        let else_first = index + 1 + count(then_block);
                        self.block(frame, els, class, method, else_first)?
                    } else {
                        Flow::Normal
                    };
                    if let Flow::Return(_) = flow {
                        return Ok(flow);
                    }
                }
                Stmt::While { cond, body } => {
                    while self.boolean(frame, cond, site)? {
                        if let Flow::Return(v) =
                            self.block(frame, body, class, method, index + 1)?
                        {
                            return Ok(Flow::Return(v));
                        }
                        // re-testing the condition counts as executing the loop statement again
                        self.tick()?;
                    }
                }
                Stmt::Return(value) => {
                    let v = match value {
                        Some(e) => Some(self.value(frame, e, site)?),
                        None => None,
                    };
                    return Ok(Flow::Return(v));
                }
                Stmt::Expr(e) => {
                    self.eval(frame, e, site)?;
                }
            }
            index += count(std::slice::from_ref(stmt));
        }
        Ok(Flow::Normal)
    }

    fn test_body(&mut self, suite: usize, test: usize, body: &[TestStmt]) -> Exec<()> {
        let mut frame = Frame {
            this: None,
            locals: Vec::new(),
        };
        for (index, stmt) in body.iter().enumerate() {
            let site = Site {
                stmt: NodeKey::TestStmt {
                    suite,
                    test,
                    stmt: index,
                },
            };
            self.tick()?;
            match stmt {
                TestStmt::Let { name, value } => {
                    let v = self.value(&mut frame, value, site)?;
                    frame.set(name, v);
                }
                TestStmt::Expr(e) => {
                    self.eval(&mut frame, e, site)?;
                }
                TestStmt::Assert(a) => {
                    let (expected, actual) = match a {
                        Assertion::True(e) => (Value::Bool(true), self.value(&mut frame, e, site)?),
                        Assertion::False(e) => {
                            (Value::Bool(false), self.value(&mut frame, e, site)?)
                        }
                        Assertion::Equal(actual, expected) => {
                            let a = self.value(&mut frame, actual, site)?;
                            let e = self.value(&mut frame, expected, site)?;
                            (e, a)
                        }
                    };
                    if expected != actual {
                        return Err(Halt::Failed {
                            at: site.stmt,
                            expected: expected.to_string(),
                            actual: actual.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn count(block: &[Stmt]) -> usize {
    let mut n = 0;
    walk_stmts(block, &mut |_| n += 1);
    n
}

/// Runs one test against `program` from a fresh heap.
///
/// Failures of any kind are encoded in the verdict.
pub fn run_test(program: &Program, id: &TestId, test: &TestCase, cost: &CostModel) -> TestOutcome {
    let (suite, index) = program.test_position(id).expect("test belongs to program");
    debug_assert_eq!(&program.suites[suite].tests[index], test);
    let started = Instant::now();
    let mut m = Machine {
        program,
        budget: cost.budget,
        steps: 0,
        heap: Vec::new(),
        depth: 0,
    };
    let result = m.test_body(suite, index, &test.body);
    let location = |key| {
        program
            .source_map
            .location(key)
            .unwrap_or_else(|| Location {
                file: "<unknown>".into(),
                line: 0,
                column: 0,
            })
    };
    let verdict = match result {
        Ok(()) => Verdict::Pass,
        Err(Halt::Budget) => Verdict::StepBudgetExceeded,
        Err(Halt::Error(kind, at)) => Verdict::ExecutionError {
            kind,
            location: location(at),
        },
        Err(Halt::Failed {
            at,
            expected,
            actual,
        }) => Verdict::AssertionFailure {
            location: location(at),
            expected,
            actual,
        },
    };
    TestOutcome {
        test: id.clone(),
        verdict,
        steps_executed: m.steps,
        wall_time: started.elapsed(),
    }
}

/// Runs `tests` in order. With `early_stop`, halts after the first non-pass verdict.
pub fn run_suite(
    program: &Program,
    tests: &[TestId],
    cost: &CostModel,
    early_stop: bool,
) -> Vec<TestOutcome> {
    let mut out = Vec::with_capacity(tests.len());
    for id in tests {
        let test = program.test(id).expect("selected test belongs to program");
        let outcome = run_test(program, id, test, cost);
        let stop = early_stop && !outcome.verdict.is_pass();
        out.push(outcome);
        if stop {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use std::collections::BTreeMap;

    const ACCOUNT: &str = include_str!("../../../fixtures/bank-account/src/Account.mini");
    const ACCOUNT_TEST: &str =
        include_str!("../../../fixtures/bank-account/tests/AccountTest.mini");

    fn program(src: &str, tests: &str) -> Program {
        parse_program(&BTreeMap::from([
            ("src/A.mini".to_string(), src.to_string()),
            ("tests/T.mini".to_string(), tests.to_string()),
        ]))
        .unwrap()
    }

    fn run_all(p: &Program, cost: &CostModel) -> Vec<TestOutcome> {
        let ids: Vec<TestId> = p.tests().into_iter().map(|(id, _)| id).collect();
        run_suite(p, &ids, cost, false)
    }

    #[test]
    fn bank_account_passes() {
        let p = program(ACCOUNT, ACCOUNT_TEST);
        let out = run_all(&p, &CostModel::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].verdict, Verdict::Pass);
        assert!(out[0].steps_executed > 0);
    }

    #[test]
    fn trivial_assertion_is_cheap() {
        let p = program(
            "class A {\n}\n",
            "suite ATest {\n test t {\n  assertTrue(true)\n }\n}\n",
        );
        let out = run_all(&p, &CostModel::default());
        assert_eq!(out[0].verdict, Verdict::Pass);
        assert_eq!(out[0].steps_executed, 2);
    }

    #[test]
    fn wrong_balance_is_an_assertion_failure() {
        let src = ACCOUNT.replace("self.balance - n", "self.balance + n");
        let p = program(&src, ACCOUNT_TEST);
        match &run_all(&p, &CostModel::default())[0].verdict {
            Verdict::AssertionFailure {
                expected, actual, ..
            } => {
                assert_eq!(expected, "4");
                assert_eq!(actual, "16");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infinite_loop_hits_the_budget() {
        let src = "class A {\n field x = 0\n method spin() {\n  while true {\n   self.x := self.x + 1\n  }\n }\n}\n";
        let tests =
            "suite ATest {\n test t {\n  a := new A()\n  a.spin()\n  assertTrue(true)\n }\n}\n";
        let p = program(src, tests);
        let cost = CostModel::steps(500).unwrap();
        let out = run_all(&p, &cost);
        assert_eq!(out[0].verdict, Verdict::StepBudgetExceeded);
        assert!(out[0].steps_executed <= 500);
    }

    #[test]
    fn arithmetic_errors() {
        let src = "class A {\n method div(n) returns {\n  return 10 / n\n }\n method big() returns {\n  return 9223372036854775807 + 1\n }\n}\n";
        let tests = "suite ATest {\n test zero {\n  a := new A()\n  assertEqual(a.div(0), 1)\n }\n test over {\n  a := new A()\n  assertEqual(a.big(), 1)\n }\n}\n";
        let p = program(src, tests);
        let out = run_all(&p, &CostModel::default());
        let kinds: Vec<_> = out
            .iter()
            .map(|o| match &o.verdict {
                Verdict::ExecutionError { kind, .. } => kind.clone(),
                v => panic!("unexpected {v:?}"),
            })
            .collect();
        assert_eq!(kinds, vec![ErrorKind::DivisionByZero, ErrorKind::Overflow]);
    }

    #[test]
    fn early_stop_halts_after_first_failure() {
        let tests = "suite ATest {\n test a {\n  assertTrue(true)\n }\n test b {\n  assertTrue(false)\n }\n test c {\n  assertTrue(true)\n }\n}\n";
        let p = program("class A {\n}\n", tests);
        let ids: Vec<TestId> = p.tests().into_iter().map(|(id, _)| id).collect();
        assert_eq!(run_suite(&p, &ids, &CostModel::default(), true).len(), 2);
        assert_eq!(run_suite(&p, &ids, &CostModel::default(), false).len(), 3);
    }

    #[test]
    fn heap_is_fresh_per_test() {
        let src = "class C {\n field n = 0\n method inc() {\n  self.n := self.n + 1\n }\n method get() returns {\n  return self.n\n }\n}\n";
        let tests = "suite CTest {\n test one {\n  c := new C()\n  c.inc()\n  assertEqual(c.get(), 1)\n }\n test again {\n  c := new C()\n  c.inc()\n  assertEqual(c.get(), 1)\n }\n}\n";
        let p = program(src, tests);
        assert!(run_all(&p, &CostModel::default())
            .iter()
            .all(|o| o.verdict.is_pass()));
    }

    #[test]
    fn zero_budget_is_rejected() {
        assert!(CostModel::steps(0).is_none());
        assert_eq!("wall".parse::<CostMode>(), Ok(CostMode::Wall));
    }
}
