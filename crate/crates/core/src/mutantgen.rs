//! First-order mutant generation over production classes.
//!
//! A mutant is a patch against one node of a method body. Patches are
//! checked against a fingerprint of the program they were generated from,
//! so applying one to a different program fails instead of corrupting it.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::MutantError;
use crate::frontend::ast::*;
use crate::frontend::printer::{print_program, stmt_head};

/// Mutation operator codes, ordered by code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    /// Arithmetic operator replacement.
    #[serde(rename = "AOR")]
    Aor,
    /// Condition negation of `if` and `while`.
    #[serde(rename = "CNB")]
    Cnb,
    /// Integer constant replacement.
    #[serde(rename = "CRP")]
    Crp,
    /// Logical connector replacement.
    #[serde(rename = "LCR")]
    Lcr,
    /// Relational operator replacement.
    #[serde(rename = "ROR")]
    Ror,
}

impl Operator {
    pub const ALL: [Operator; 5] = [
        Operator::Aor,
        Operator::Cnb,
        Operator::Crp,
        Operator::Lcr,
        Operator::Ror,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Operator::Aor => "AOR",
            Operator::Cnb => "CNB",
            Operator::Crp => "CRP",
            Operator::Lcr => "LCR",
            Operator::Ror => "ROR",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Operator::Aor => "arithmetic operator replacement: + and -, * and /, % to *",
            Operator::Cnb => "negate the condition of an if or while",
            Operator::Crp => "integer constant c to c+1, and to 0 when c is not 0",
            Operator::Lcr => "logical connector replacement: and and or",
            Operator::Ror => "relational operator replacement: < and <=, > and >=, == and !=",
        }
    }

    /// The replacement for a binary operator, when this operator applies to it.
    pub fn replace_binop(self, op: BinOp) -> Option<BinOp> {
        use BinOp::*;
        match (self, op) {
            (Operator::Aor, Add) => Some(Sub),
            (Operator::Aor, Sub) => Some(Add),
            (Operator::Aor, Mul) => Some(Div),
            (Operator::Aor, Div) => Some(Mul),
            (Operator::Aor, Rem) => Some(Mul),
            (Operator::Ror, Lt) => Some(Le),
            (Operator::Ror, Le) => Some(Lt),
            (Operator::Ror, Gt) => Some(Ge),
            (Operator::Ror, Ge) => Some(Gt),
            (Operator::Ror, Eq) => Some(Ne),
            (Operator::Ror, Ne) => Some(Eq),
            (Operator::Lcr, And) => Some(Or),
            (Operator::Lcr, Or) => Some(And),
            _ => None,
        }
    }

    /// Replacement constants for an integer literal, in variant order.
    pub fn replace_int(self, c: i64) -> Vec<i64> {
        if self != Operator::Crp {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some(next) = c.checked_add(1) {
            out.push(next);
        }
        if c != 0 && c.checked_add(1) != Some(0) {
            out.push(0);
        }
        out
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Operator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AOR" => Ok(Operator::Aor),
            "CNB" => Ok(Operator::Cnb),
            "CRP" => Ok(Operator::Crp),
            "LCR" => Ok(Operator::Lcr),
            "ROR" => Ok(Operator::Ror),
            other => Err(format!("unknown mutation operator `{other}`")),
        }
    }
}

/// Parses a comma-separated operator list such as `AOR,ROR`.
pub fn parse_operators(list: &str) -> Result<BTreeSet<Operator>, String> {
    let ops: BTreeSet<Operator> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    if ops.is_empty() {
        return Err("no mutation operators enabled".into());
    }
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edit {
    BinOp { from: BinOp, to: BinOp },
    IntLit { from: i64, to: i64 },
    NegateCondition,
}

/// Where an edit applies: a statement of a method, and for expression edits the
/// post-order index of the node among the statement's own expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Patch {
    pub class: usize,
    pub method: usize,
    pub stmt: usize,
    pub expr: Option<usize>,
    pub edit: Edit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    /// `<file>:<class>.<method>:<stmt-index>:<op-code>:<seq>`
    pub id: String,
    pub operator: Operator,
    pub method: MethodRef,
    pub location: Location,
    /// Canonical text of the statement's first line before and after the edit.
    pub original: String,
    pub mutated: String,
    pub patch: Patch,
    /// Fingerprint of the program the patch was generated against.
    pub origin: String,
}

impl Mutant {
    /// A unified diff of the changed line.
    pub fn diff(&self) -> String {
        format!(
            "--- a/{file}\n+++ b/{file}\n@@ -{line} +{line} @@\n-{}\n+{}\n",
            self.original,
            self.mutated,
            file = self.location.file,
            line = self.location.line,
        )
    }

    pub fn record(&self) -> MutantRecord {
        MutantRecord {
            id: self.id.clone(),
            operator: self.operator,
            class: self.method.class.clone(),
            method: self.method.method.clone(),
            file: self.location.file.clone(),
            line: self.location.line,
            column: self.location.column,
            original: self.original.clone(),
            mutated: self.mutated.clone(),
        }
    }
}

/// The persisted form of a mutant (one line of `mutants.jsonl`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub id: String,
    pub operator: Operator,
    pub class: String,
    pub method: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub original: String,
    pub mutated: String,
}

impl MutantRecord {
    pub fn method_ref(&self) -> MethodRef {
        MethodRef::new(&self.class, &self.method)
    }
}

/// SHA-256 of the canonical program text; equal for structurally equal programs.
pub fn fingerprint(program: &Program) -> String {
    let mut hasher = Sha256::new();
    for (path, text) in print_program(program) {
        hasher.update(path.as_bytes());
        hasher.update([0]);
        hasher.update(text.as_bytes());
        hasher.update([0]);
    }
    hex::encode(hasher.finalize())
}

/// Every edit the enabled operators allow on one statement, in (operator, site, variant) order.
fn statement_edits(stmt: &Stmt, ops: &BTreeSet<Operator>) -> Vec<(Operator, Option<usize>, Edit)> {
    let mut nodes = Vec::new();
    for e in stmt.own_exprs() {
        e.walk_postorder(&mut |n| nodes.push(n));
    }
    let mut out = Vec::new();
    for &op in ops {
        if op == Operator::Cnb {
            if matches!(stmt, Stmt::If { .. } | Stmt::While { .. }) {
                out.push((op, None, Edit::NegateCondition));
            }
            continue;
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Expr::Binary { op: from, .. } => {
                    if let Some(to) = op.replace_binop(*from) {
                        out.push((op, Some(i), Edit::BinOp { from: *from, to }));
                    }
                }
                Expr::Int(c) => {
                    for to in op.replace_int(*c) {
                        out.push((op, Some(i), Edit::IntLit { from: *c, to }));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Generates all first-order mutants of the production classes.
///
/// Order: file, class and method declaration order, statement pre-order,
/// operator code, then variant sequence. Test suites are never mutated.
pub fn generate_mutants(program: &Program, enabled: &BTreeSet<Operator>) -> Vec<Mutant> {
    let origin = fingerprint(program);
    let mut out = Vec::new();
    for (ci, class) in program.classes.iter().enumerate() {
        let file = program.class_file(ci);
        for (mi, method) in class.methods.iter().enumerate() {
            let mut stmts = Vec::new();
            walk_stmts(&method.body, &mut |s| stmts.push(s));
            for (si, stmt) in stmts.into_iter().enumerate() {
                let mut seq = 0;
                let mut last_op = None;
                for (op, expr, edit) in statement_edits(stmt, enabled) {
                    if last_op != Some(op) {
                        seq = 0;
                        last_op = Some(op);
                    }
                    let patch = Patch {
                        class: ci,
                        method: mi,
                        stmt: si,
                        expr,
                        edit,
                    };
                    let mut mutated_stmt = stmt.clone();
                    apply_to_stmt(&mut mutated_stmt, expr, edit);
                    let key = match expr {
                        Some(e) => NodeKey::Expr {
                            class: ci,
                            method: mi,
                            stmt: si,
                            expr: e,
                        },
                        None => NodeKey::Stmt {
                            class: ci,
                            method: mi,
                            stmt: si,
                        },
                    };
                    let location = program
                        .source_map
                        .location(key)
                        .expect("parser records every node");
                    out.push(Mutant {
                        id: format!(
                            "{file}:{}.{}:{si}:{}:{seq}",
                            class.name,
                            method.name,
                            op.code()
                        ),
                        operator: op,
                        method: MethodRef::new(&class.name, &method.name),
                        location,
                        original: stmt_head(stmt),
                        mutated: stmt_head(&mutated_stmt),
                        patch,
                        origin: origin.clone(),
                    });
                    seq += 1;
                }
            }
        }
    }
    out
}

/// Applies an edit to a statement; returns false if the addressed node does not match.
fn apply_to_stmt(stmt: &mut Stmt, expr: Option<usize>, edit: Edit) -> bool {
    match (expr, edit) {
        (None, Edit::NegateCondition) => match stmt {
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => {
                let inner = std::mem::replace(cond, Expr::Bool(false));
                *cond = Expr::Not(Box::new(inner));
                true
            }
            _ => false,
        },
        (Some(target), edit) => {
            let mut index = 0;
            let mut applied = false;
            for e in stmt.own_exprs_mut() {
                e.walk_postorder_mut(&mut |node| {
                    if index == target {
                        applied = match (node, edit) {
                            (Expr::Binary { op, .. }, Edit::BinOp { from, to }) if *op == from => {
                                *op = to;
                                true
                            }
                            (Expr::Int(c), Edit::IntLit { from, to }) if *c == from => {
                                *c = to;
                                true
                            }
                            _ => false,
                        };
                    }
                    index += 1;
                });
            }
            applied
        }
        (None, _) => false,
    }
}

/// Returns the mutated program. The input is left untouched.
pub fn materialize(program: &Program, mutant: &Mutant) -> Result<Program, MutantError> {
    materialize_with_origin(program, &fingerprint(program), mutant)
}

/// Like [`materialize`], with the program's fingerprint already computed.
pub fn materialize_with_origin(
    program: &Program,
    origin: &str,
    mutant: &Mutant,
) -> Result<Program, MutantError> {
    let stale = |reason: &str| MutantError::Stale {
        id: mutant.id.clone(),
        reason: reason.to_string(),
    };
    if origin != mutant.origin {
        return Err(stale("generated from a different program"));
    }
    let p = mutant.patch;
    let mut out = program.clone();
    let method = out
        .classes
        .get_mut(p.class)
        .and_then(|c| c.methods.get_mut(p.method))
        .ok_or_else(|| stale("method no longer exists"))?;
    let mut index = 0;
    let mut outcome = Err(stale("statement no longer exists"));
    walk_stmts_mut(&mut method.body, &mut |stmt| {
        if index == p.stmt {
            outcome = if stmt_head(stmt) != mutant.original {
                Err(stale("statement text changed"))
            } else if apply_to_stmt(stmt, p.expr, p.edit) {
                Ok(())
            } else {
                Err(stale("patched node does not match"))
            };
        }
        index += 1;
    });
    outcome?;
    Ok(out)
}
