//! Source model for MiniLang programs and their test suites.
//!
//! The tree holds no positions. Spans live in [`SourceMap`], keyed by
//! [`NodeKey`], so that two programs compare equal whenever their structure
//! does, regardless of layout.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Binary operators, grouped into arithmetic, relational and logical families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_relational(self) -> bool {
        self.precedence() == 4
    }
}

/// Precedence of the prefix `not` operator, between `and` and the relations.
pub const NOT_PRECEDENCE: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Receiver {
    SelfRef,
    Local(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Local(String),
    /// `self.f`
    Field(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
    New {
        class: String,
        args: Vec<Expr>,
    },
    Call {
        receiver: Receiver,
        method: String,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Visits every node in post-order (children left to right, then the node).
    ///
    /// This is the numbering used by the source map and by mutation patches.
    pub fn walk_postorder<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk_postorder(f);
                rhs.walk_postorder(f);
            }
            Expr::Not(inner) => inner.walk_postorder(f),
            Expr::New { args, .. } | Expr::Call { args, .. } => {
                for arg in args {
                    arg.walk_postorder(f);
                }
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Local(_) | Expr::Field(_) => {}
        }
        f(self);
    }

    pub fn walk_postorder_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        match self {
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk_postorder_mut(f);
                rhs.walk_postorder_mut(f);
            }
            Expr::Not(inner) => inner.walk_postorder_mut(f),
            Expr::New { args, .. } | Expr::Call { args, .. } => {
                for arg in args {
                    arg.walk_postorder_mut(f);
                }
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Local(_) | Expr::Field(_) => {}
        }
        f(self);
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk_postorder(&mut |_| n += 1);
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    /// `name := expr`
    Let {
        name: String,
        value: Expr,
    },
    /// `self.field := expr`
    SetField {
        field: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Vec<Stmt>,
        else_block: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    /// An invocation evaluated for its effect.
    Expr(Expr),
}

impl Stmt {
    /// The expressions owned directly by this statement, excluding nested blocks.
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match self {
            Stmt::Let { value, .. } | Stmt::SetField { value, .. } => vec![value],
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => vec![cond],
            Stmt::Return(Some(e)) | Stmt::Expr(e) => vec![e],
            Stmt::Return(None) => vec![],
        }
    }

    pub fn own_exprs_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Stmt::Let { value, .. } | Stmt::SetField { value, .. } => vec![value],
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => vec![cond],
            Stmt::Return(Some(e)) | Stmt::Expr(e) => vec![e],
            Stmt::Return(None) => vec![],
        }
    }
}

/// Visits statements in pre-order: a statement, then its then-block, then its else-block.
pub fn walk_stmts<'a>(block: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for stmt in block {
        f(stmt);
        match stmt {
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                walk_stmts(then_block, f);
                if let Some(els) = else_block {
                    walk_stmts(els, f);
                }
            }
            Stmt::While { body, .. } => walk_stmts(body, f),
            _ => {}
        }
    }
}

/// Mutable pre-order walk; the same numbering as [`walk_stmts`].
pub fn walk_stmts_mut(block: &mut [Stmt], f: &mut dyn FnMut(&mut Stmt)) {
    for stmt in block {
        f(stmt);
        match stmt {
            Stmt::If {
                then_block,
                else_block,
                ..
            } => {
                walk_stmts_mut(then_block, f);
                if let Some(els) = else_block {
                    walk_stmts_mut(els, f);
                }
            }
            Stmt::While { body, .. } => walk_stmts_mut(body, f),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldDecl {
    pub name: String,
    pub init: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub returns_value: bool,
}

impl MethodDecl {
    pub fn stmt_count(&self) -> usize {
        let mut n = 0;
        walk_stmts(&self.body, &mut |_| n += 1);
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
}

impl ClassDecl {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    True(Expr),
    False(Expr),
    /// `assertEqual(actual, expected)`
    Equal(Expr, Expr),
}

impl Assertion {
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            Assertion::True(e) | Assertion::False(e) => vec![e],
            Assertion::Equal(a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TestStmt {
    Let { name: String, value: Expr },
    Expr(Expr),
    Assert(Assertion),
}

impl TestStmt {
    pub fn is_assertion(&self) -> bool {
        matches!(self, TestStmt::Assert(_))
    }

    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            TestStmt::Let { value, .. } => vec![value],
            TestStmt::Expr(e) => vec![e],
            TestStmt::Assert(a) => a.exprs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestCase {
    pub name: String,
    pub body: Vec<TestStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestSuite {
    pub name: String,
    pub tests: Vec<TestCase>,
}

/// Position of a node: file index into [`SourceMap::files`], 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub file: usize,
    pub line: u32,
    pub column: u32,
}

/// Addresses a node of a [`Program`].
///
/// Statement indices are pre-order within a method body; expression indices
/// are post-order within the statement that owns them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Class(usize),
    Field {
        class: usize,
        field: usize,
    },
    Method {
        class: usize,
        method: usize,
    },
    Stmt {
        class: usize,
        method: usize,
        stmt: usize,
    },
    Expr {
        class: usize,
        method: usize,
        stmt: usize,
        expr: usize,
    },
    Suite(usize),
    Test {
        suite: usize,
        test: usize,
    },
    TestStmt {
        suite: usize,
        test: usize,
        stmt: usize,
    },
    TestExpr {
        suite: usize,
        test: usize,
        stmt: usize,
        expr: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub files: Vec<String>,
    pub spans: BTreeMap<NodeKey, Span>,
}

impl SourceMap {
    pub fn span(&self, key: NodeKey) -> Option<Span> {
        self.spans.get(&key).copied()
    }

    pub fn file_of(&self, key: NodeKey) -> Option<&str> {
        self.span(key).map(|s| self.files[s.file].as_str())
    }

    pub fn location(&self, key: NodeKey) -> Option<Location> {
        self.span(key).map(|s| Location {
            file: self.files[s.file].clone(),
            line: s.line,
            column: s.column,
        })
    }
}

/// A resolved, printable source position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// A non-fatal finding recorded while loading or analysing a program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lint {
    pub location: Location,
    pub message: String,
}

/// Identifies a production method. Serialized as `Class.method`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodRef {
    pub class: String,
    pub method: String,
}

impl MethodRef {
    pub fn new(class: impl Into<String>, method: impl Into<String>) -> Self {
        MethodRef {
            class: class.into(),
            method: method.into(),
        }
    }
}

impl std::str::FromStr for MethodRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((class, method)) if !class.is_empty() && !method.is_empty() => {
                Ok(MethodRef::new(class, method))
            }
            _ => Err(format!("`{s}` is not of the form Class.method")),
        }
    }
}

impl Serialize for MethodRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.method)
    }
}

/// `<Suite>.<test>`; unique across a program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestId(pub String);

impl TestId {
    pub fn new(suite: &str, test: &str) -> Self {
        TestId(format!("{suite}.{test}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A parsed and resolved MiniLang project. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    pub suites: Vec<TestSuite>,
    pub source_map: SourceMap,
    pub lints: Vec<Lint>,
}

impl Program {
    /// Equality of classes and suites, ignoring layout and lints.
    pub fn structurally_eq(&self, other: &Program) -> bool {
        self.classes == other.classes
            && self.suites == other.suites
            && self.class_files() == other.class_files()
            && self.suite_files() == other.suite_files()
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn method(&self, r: &MethodRef) -> Option<&MethodDecl> {
        self.class(&r.class).and_then(|c| c.method(&r.method))
    }

    pub fn class_file(&self, class: usize) -> &str {
        self.source_map
            .file_of(NodeKey::Class(class))
            .unwrap_or_default()
    }

    pub fn suite_file(&self, suite: usize) -> &str {
        self.source_map
            .file_of(NodeKey::Suite(suite))
            .unwrap_or_default()
    }

    fn class_files(&self) -> Vec<&str> {
        (0..self.classes.len())
            .map(|i| self.class_file(i))
            .collect()
    }

    fn suite_files(&self) -> Vec<&str> {
        (0..self.suites.len()).map(|i| self.suite_file(i)).collect()
    }

    pub fn method_count(&self) -> usize {
        self.classes.iter().map(|c| c.methods.len()).sum()
    }

    pub fn test_count(&self) -> usize {
        self.suites.iter().map(|s| s.tests.len()).sum()
    }

    /// Every test with its id, in suite-file order then declaration order.
    pub fn tests(&self) -> Vec<(TestId, &TestCase)> {
        let mut suites: Vec<usize> = (0..self.suites.len()).collect();
        suites.sort_by(|&a, &b| self.suite_file(a).cmp(self.suite_file(b)).then(a.cmp(&b)));
        suites
            .into_iter()
            .flat_map(|s| {
                let suite = &self.suites[s];
                suite
                    .tests
                    .iter()
                    .map(move |t| (TestId::new(&suite.name, &t.name), t))
            })
            .collect()
    }

    pub fn test(&self, id: &TestId) -> Option<&TestCase> {
        let (suite, test) = id.0.split_once('.')?;
        self.suites
            .iter()
            .find(|s| s.name == suite)?
            .tests
            .iter()
            .find(|t| t.name == test)
    }

    /// Locates a test as (suite index, test index).
    pub fn test_position(&self, id: &TestId) -> Option<(usize, usize)> {
        let (suite, test) = id.0.split_once('.')?;
        let s = self.suites.iter().position(|s| s.name == suite)?;
        let t = self.suites[s].tests.iter().position(|t| t.name == test)?;
        Some((s, t))
    }
}
