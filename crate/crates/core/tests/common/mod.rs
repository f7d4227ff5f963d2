#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use mutagoal_core::frontend::ast::{
    BinOp, ClassDecl, Expr, FieldDecl, Literal, MethodDecl, Receiver, Stmt,
};
use mutagoal_core::frontend::printer::print_class;
use mutagoal_core::{load_project, parse_program, Program, Project};
use proptest::prelude::*;

pub const FIXTURES: [&str; 6] = [
    "bank-account",
    "uncovered-helper",
    "eager-test",
    "seeded-failure",
    "quality-score",
    "synthetic",
];

/// Fixtures small enough to run a full matrix in every test.
pub const SMALL_FIXTURES: [&str; 5] = [
    "bank-account",
    "uncovered-helper",
    "eager-test",
    "seeded-failure",
    "quality-score",
];

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Project {
    load_project(&fixture_dir(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const OPS: [BinOp; 13] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Rem,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-40i64..40).prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        prop_oneof![Just("a"), Just("b")].prop_map(|n| Expr::Local(n.into())),
        prop_oneof![Just("x"), Just("y"), Just("flag")].prop_map(|n| Expr::Field(n.into())),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                prop::sample::select(OPS.to_vec()),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            inner.prop_map(|e| Expr::Call {
                receiver: Receiver::SelfRef,
                method: "helper".into(),
                args: vec![e],
            }),
        ]
    })
}

pub fn stmt() -> impl Strategy<Value = Stmt> {
    let simple = prop_oneof![
        (prop_oneof![Just("x"), Just("y"), Just("flag")], expr()).prop_map(|(f, value)| {
            Stmt::SetField {
                field: f.into(),
                value,
            }
        }),
        expr().prop_map(|e| Stmt::Return(Some(e))),
    ];
    simple.prop_recursive(2, 8, 3, |inner| {
        let block = prop::collection::vec(inner, 1..3);
        prop_oneof![
            (expr(), block.clone(), prop::option::of(block.clone())).prop_map(
                |(cond, then_block, else_block)| Stmt::If {
                    cond,
                    then_block,
                    else_block,
                }
            ),
            (expr(), block).prop_map(|(cond, body)| Stmt::While { cond, body }),
        ]
    })
}

/// A class `Gen` with a generated method `m(a, b)` and a fixed `helper(n)`.
pub fn gen_class() -> impl Strategy<Value = ClassDecl> {
    (-5i64..5, prop::collection::vec(stmt(), 1..5), expr()).prop_map(|(y, mut body, last)| {
        body.push(Stmt::Return(Some(last)));
        ClassDecl {
            name: "Gen".into(),
            fields: vec![
                FieldDecl {
                    name: "x".into(),
                    init: Literal::Int(0),
                },
                FieldDecl {
                    name: "y".into(),
                    init: Literal::Int(y),
                },
                FieldDecl {
                    name: "flag".into(),
                    init: Literal::Bool(false),
                },
            ],
            methods: vec![
                MethodDecl {
                    name: "m".into(),
                    params: vec!["a".into(), "b".into()],
                    body,
                    returns_value: true,
                },
                MethodDecl {
                    name: "helper".into(),
                    params: vec!["n".into()],
                    body: vec![Stmt::Return(Some(Expr::binary(
                        BinOp::Add,
                        Expr::Local("n".into()),
                        Expr::Field("x".into()),
                    )))],
                    returns_value: true,
                },
            ],
        }
    })
}

/// Source of a suite whose tests call `m` with the given arguments and
/// compare against the given expected values.
pub fn gen_suite(calls: &[(i64, i64, i64)]) -> String {
    let mut s = String::from("suite GenTest {\n");
    for (i, (a, b, want)) in calls.iter().enumerate() {
        s.push_str(&format!(
            "    test t{i} {{\n        g := new Gen()\n        r := g.m({a}, {b})\n        assertEqual(r, {want})\n    }}\n"
        ));
    }
    s.push_str("}\n");
    s
}

pub fn gen_program(class: &ClassDecl, calls: &[(i64, i64, i64)]) -> Program {
    let tree = BTreeMap::from([
        ("src/Gen.mini".to_string(), print_class(class)),
        ("tests/GenTest.mini".to_string(), gen_suite(calls)),
    ]);
    parse_program(&tree).unwrap_or_else(|e| panic!("{e}\n{}", tree["src/Gen.mini"]))
}
