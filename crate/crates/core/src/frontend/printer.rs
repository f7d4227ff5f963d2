//! Canonical text for MiniLang nodes. Re-parsing the output yields the same tree.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn expr_precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => op.precedence(),
        Expr::Not(_) => NOT_PRECEDENCE,
        _ => u8::MAX,
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Int(v) => write!(out, "{v}").unwrap(),
        Expr::Bool(b) => write!(out, "{b}").unwrap(),
        Expr::Local(name) => out.push_str(name),
        Expr::Field(name) => write!(out, "self.{name}").unwrap(),
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_operand(out, lhs, expr_precedence(lhs) < p);
            write!(out, " {} ", op.symbol()).unwrap();
            write_operand(out, rhs, expr_precedence(rhs) <= p);
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            write_operand(out, inner, expr_precedence(inner) < NOT_PRECEDENCE);
        }
        Expr::New { class, args } => {
            write!(out, "new {class}").unwrap();
            write_args(out, args);
        }
        Expr::Call {
            receiver,
            method,
            args,
        } => {
            match receiver {
                Receiver::SelfRef => out.push_str("self"),
                Receiver::Local(name) => out.push_str(name),
            }
            write!(out, ".{method}").unwrap();
            write_args(out, args);
        }
    }
}

/// The first line of a statement: the whole statement for simple ones,
/// `if cond {` / `while cond {` for compound ones.
pub fn stmt_head(s: &Stmt) -> String {
    match s {
        Stmt::Let { name, value } => format!("{name} := {}", print_expr(value)),
        Stmt::SetField { field, value } => format!("self.{field} := {}", print_expr(value)),
        Stmt::If { cond, .. } => format!("if {} {{", print_expr(cond)),
        Stmt::While { cond, .. } => format!("while {} {{", print_expr(cond)),
        Stmt::Return(None) => "return".to_string(),
        Stmt::Return(Some(e)) => format!("return {}", print_expr(e)),
        Stmt::Expr(e) => print_expr(e),
    }
}

fn write_block(out: &mut String, block: &[Stmt], depth: usize) {
    for s in block {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    writeln!(out, "{pad}{}", stmt_head(s)).unwrap();
    match s {
        Stmt::If {
            then_block,
            else_block,
            ..
        } => {
            write_block(out, then_block, depth + 1);
            match else_block {
                Some(els) => {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    write_block(out, els, depth + 1);
                    writeln!(out, "{pad}}}").unwrap();
                }
                None => writeln!(out, "{pad}}}").unwrap(),
            }
        }
        Stmt::While { body, .. } => {
            write_block(out, body, depth + 1);
            writeln!(out, "{pad}}}").unwrap();
        }
        _ => {}
    }
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, 0);
    out
}

pub fn print_method(m: &MethodDecl) -> String {
    let mut out = String::new();
    write_method(&mut out, m, 0);
    out
}

fn write_method(out: &mut String, m: &MethodDecl, depth: usize) {
    let pad = INDENT.repeat(depth);
    let returns = if m.returns_value { " returns" } else { "" };
    writeln!(
        out,
        "{pad}method {}({}){returns} {{",
        m.name,
        m.params.join(", ")
    )
    .unwrap();
    write_block(out, &m.body, depth + 1);
    writeln!(out, "{pad}}}").unwrap();
}

pub fn print_class(c: &ClassDecl) -> String {
    let mut out = String::new();
    writeln!(out, "class {} {{", c.name).unwrap();
    for f in &c.fields {
        writeln!(out, "{INDENT}field {} = {}", f.name, f.init).unwrap();
    }
    for (i, m) in c.methods.iter().enumerate() {
        if i > 0 || !c.fields.is_empty() {
            out.push('\n');
        }
        write_method(&mut out, m, 1);
    }
    out.push_str("}\n");
    out
}

pub fn test_stmt_text(s: &TestStmt) -> String {
    match s {
        TestStmt::Let { name, value } => format!("{name} := {}", print_expr(value)),
        TestStmt::Expr(e) => print_expr(e),
        TestStmt::Assert(Assertion::True(e)) => format!("assertTrue({})", print_expr(e)),
        TestStmt::Assert(Assertion::False(e)) => format!("assertFalse({})", print_expr(e)),
        TestStmt::Assert(Assertion::Equal(a, b)) => {
            format!("assertEqual({}, {})", print_expr(a), print_expr(b))
        }
    }
}

pub fn print_test(t: &TestCase) -> String {
    let mut out = String::new();
    write_test(&mut out, t, 0);
    out
}

fn write_test(out: &mut String, t: &TestCase, depth: usize) {
    let pad = INDENT.repeat(depth);
    writeln!(out, "{pad}test {} {{", t.name).unwrap();
    for s in &t.body {
        writeln!(out, "{pad}{INDENT}{}", test_stmt_text(s)).unwrap();
    }
    writeln!(out, "{pad}}}").unwrap();
}

pub fn print_suite(s: &TestSuite) -> String {
    let mut out = String::new();
    writeln!(out, "suite {} {{", s.name).unwrap();
    for (i, t) in s.tests.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_test(&mut out, t, 1);
    }
    out.push_str("}\n");
    out
}

/// Prints a whole program back to a source tree, one text per file.
pub fn print_program(p: &Program) -> BTreeMap<String, String> {
    let mut files: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, c) in p.classes.iter().enumerate() {
        files
            .entry(p.class_file(i).to_string())
            .or_default()
            .push(print_class(c));
    }
    for (i, s) in p.suites.iter().enumerate() {
        files
            .entry(p.suite_file(i).to_string())
            .or_default()
            .push(print_suite(s));
    }
    files
        .into_iter()
        .map(|(path, decls)| (path, decls.join("\n")))
        .collect()
}
