//! MiniLang front end: lexer, parser, resolver and printer.

pub mod ast;
mod lexer;
mod parser;
pub mod printer;
mod resolve;

use std::collections::BTreeMap;

pub use parser::FileKind;
pub(crate) use resolve::static_class;

use crate::error::FrontendError;
use ast::{NodeKey, Program};

/// Parses and resolves a source tree (relative path → text).
///
/// Paths under `src/` hold classes, paths under `tests/` hold suites. Files
/// are processed in lexicographic path order, so the result depends only on
/// the tree's contents.
pub fn parse_program(source_tree: &BTreeMap<String, String>) -> Result<Program, FrontendError> {
    let mut program = Program::default();
    for (file, (path, text)) in source_tree.iter().enumerate() {
        let kind = FileKind::of_path(path)
            .ok_or_else(|| FrontendError::UnknownPath { path: path.clone() })?;
        let parsed = parser::parse_file(path, file, text, kind)?;
        let class_base = program.classes.len();
        let suite_base = program.suites.len();
        program.source_map.files.push(path.clone());
        for (key, span) in parsed.spans {
            program
                .source_map
                .spans
                .insert(rebase(key, class_base, suite_base), span);
        }
        program.classes.extend(parsed.classes);
        program.suites.extend(parsed.suites);
    }
    program.lints = resolve::resolve(&program)?;
    Ok(program)
}

fn rebase(key: NodeKey, cb: usize, sb: usize) -> NodeKey {
    match key {
        NodeKey::Class(c) => NodeKey::Class(c + cb),
        NodeKey::Field { class, field } => NodeKey::Field {
            class: class + cb,
            field,
        },
        NodeKey::Method { class, method } => NodeKey::Method {
            class: class + cb,
            method,
        },
        NodeKey::Stmt {
            class,
            method,
            stmt,
        } => NodeKey::Stmt {
            class: class + cb,
            method,
            stmt,
        },
        NodeKey::Expr {
            class,
            method,
            stmt,
            expr,
        } => NodeKey::Expr {
            class: class + cb,
            method,
            stmt,
            expr,
        },
        NodeKey::Suite(s) => NodeKey::Suite(s + sb),
        NodeKey::Test { suite, test } => NodeKey::Test {
            suite: suite + sb,
            test,
        },
        NodeKey::TestStmt { suite, test, stmt } => NodeKey::TestStmt {
            suite: suite + sb,
            test,
            stmt,
        },
        NodeKey::TestExpr {
            suite,
            test,
            stmt,
            expr,
        } => NodeKey::TestExpr {
            suite: suite + sb,
            test,
            stmt,
            expr,
        },
    }
}

/// Any node that has a canonical text form.
pub trait PrettyPrint {
    fn pretty_print(&self) -> String;
}

impl PrettyPrint for ast::Expr {
    fn pretty_print(&self) -> String {
        printer::print_expr(self)
    }
}

impl PrettyPrint for ast::Stmt {
    fn pretty_print(&self) -> String {
        printer::print_stmt(self)
    }
}

impl PrettyPrint for ast::MethodDecl {
    fn pretty_print(&self) -> String {
        printer::print_method(self)
    }
}

impl PrettyPrint for ast::ClassDecl {
    fn pretty_print(&self) -> String {
        printer::print_class(self)
    }
}

impl PrettyPrint for ast::TestStmt {
    fn pretty_print(&self) -> String {
        printer::test_stmt_text(self)
    }
}

impl PrettyPrint for ast::TestCase {
    fn pretty_print(&self) -> String {
        printer::print_test(self)
    }
}

impl PrettyPrint for ast::TestSuite {
    fn pretty_print(&self) -> String {
        printer::print_suite(self)
    }
}

/// Concatenation of every file, each preceded by a `# file: <path>` comment line.
impl PrettyPrint for Program {
    fn pretty_print(&self) -> String {
        printer::print_program(self)
            .into_iter()
            .map(|(path, text)| format!("# file: {path}\n{text}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ACCOUNT: &str = include_str!("../../../../fixtures/bank-account/src/Account.mini");
    const ACCOUNT_TEST: &str =
        include_str!("../../../../fixtures/bank-account/tests/AccountTest.mini");

    fn tree(files: &[(&str, &str)]) -> BTreeMap<String, String> {
        files
            .iter()
            .map(|(p, t)| (p.to_string(), t.to_string()))
            .collect()
    }

    #[test]
    fn bank_account_shape() {
        let p = parse_program(&tree(&[
            ("src/Account.mini", ACCOUNT),
            ("tests/AccountTest.mini", ACCOUNT_TEST),
        ]))
        .unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.method_count(), 4);
        assert_eq!(p.suites.len(), 1);
        assert_eq!(p.test_count(), 1);
        assert!(p.lints.is_empty());
    }

    #[test]
    fn empty_class_has_no_methods() {
        let p = parse_program(&tree(&[("src/E.mini", "class E {\n}\n")])).unwrap();
        assert_eq!(p.classes[0].methods.len(), 0);
        assert_eq!(p.test_count(), 0);
    }

    #[test]
    fn missing_argument_names_the_expected_token() {
        let tests = ACCOUNT_TEST.replace("assertEqual(balance, 4)", "assertEqual(balance)");
        let err = parse_program(&tree(&[
            ("src/Account.mini", ACCOUNT),
            ("tests/AccountTest.mini", &tests),
        ]))
        .unwrap_err();
        match err {
            FrontendError::Syntax {
                location, expected, ..
            } => {
                assert_eq!(location.file, "tests/AccountTest.mini");
                assert!(expected.iter().any(|e| e.contains(',')), "{expected:?}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn arity_mismatch_is_unresolved() {
        let tests = ACCOUNT_TEST.replace("account.deposit(10)", "account.deposit(10, 2)");
        let err = parse_program(&tree(&[
            ("src/Account.mini", ACCOUNT),
            ("tests/AccountTest.mini", &tests),
        ]));
        assert!(err.is_err());
        assert!(err.unwrap_err().location().is_some());
    }

    #[test]
    fn classes_only_under_src() {
        let err = parse_program(&tree(&[("tests/A.mini", "class A {\n}\n")])).unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Syntax { .. } | FrontendError::Invalid { .. }
        ));
        let err = parse_program(&tree(&[("lib/A.mini", "class A {\n}\n")])).unwrap_err();
        assert!(matches!(err, FrontendError::UnknownPath { .. }));
    }

    #[test]
    fn field_assignment_prints_canonically() {
        let p = parse_program(&tree(&[(
            "src/A.mini",
            "class A {\n field x = 0\n method m(n) {\n  self.x := (self.x + n) * 2\n  self.x := self.x - (n - 1)\n }\n}\n",
        )]))
        .unwrap();
        let body = &p.classes[0].methods[0].body;
        assert_eq!(body[0].pretty_print(), "self.x := (self.x + n) * 2\n");
        assert_eq!(body[1].pretty_print(), "self.x := self.x - (n - 1)\n");
    }

    #[test]
    fn printing_reparses_to_the_same_tree() {
        let p = parse_program(&tree(&[
            ("src/Account.mini", ACCOUNT),
            ("tests/AccountTest.mini", ACCOUNT_TEST),
        ]))
        .unwrap();
        let printed: BTreeMap<String, String> = printer::print_program(&p);
        let q = parse_program(&printed).unwrap();
        assert!(p.structurally_eq(&q));
        assert_eq!(printer::print_program(&q), printed);
    }
}
