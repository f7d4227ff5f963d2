mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fixture, gen_class, gen_program, FIXTURES};
use mutagoal_core::frontend::ast::{walk_stmts, BinOp, Expr, Stmt};
use mutagoal_core::frontend::printer::print_program;
use mutagoal_core::mutantgen::{generate_mutants, materialize, Operator};
use mutagoal_core::{parse_program, MethodRef, Program};
use proptest::prelude::*;

fn all_ops() -> BTreeSet<Operator> {
    Operator::ALL.into_iter().collect()
}

/// Mutation sites per (method, operator), counted straight off the tree
/// with its own replacement table.
fn site_oracle(p: &Program) -> BTreeMap<(MethodRef, Operator), usize> {
    fn binop(op: BinOp) -> Option<Operator> {
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div | Rem => Some(Operator::Aor),
            Lt | Le | Gt | Ge | Eq | Ne => Some(Operator::Ror),
            And | Or => Some(Operator::Lcr),
        }
    }
    let mut counts = BTreeMap::new();
    for class in &p.classes {
        for m in &class.methods {
            let r = MethodRef::new(&class.name, &m.name);
            let mut bump = |op: Operator, n: usize| {
                if n > 0 {
                    *counts.entry((r.clone(), op)).or_insert(0) += n;
                }
            };
            walk_stmts(&m.body, &mut |s| {
                if matches!(s, Stmt::If { .. } | Stmt::While { .. }) {
                    bump(Operator::Cnb, 1);
                }
                for e in s.own_exprs() {
                    e.walk_postorder(&mut |node| match node {
                        Expr::Binary { op, .. } => bump(binop(*op).unwrap(), 1),
                        Expr::Int(c) => {
                            let plus_one = c.checked_add(1);
                            let zero = *c != 0 && plus_one != Some(0);
                            bump(Operator::Crp, plus_one.is_some() as usize + zero as usize);
                        }
                        _ => {}
                    });
                }
            });
        }
    }
    counts
}

fn generated_counts(p: &Program) -> BTreeMap<(MethodRef, Operator), usize> {
    let mut counts = BTreeMap::new();
    for m in generate_mutants(p, &all_ops()) {
        *counts.entry((m.method.clone(), m.operator)).or_insert(0) += 1;
    }
    counts
}

/// Number of nodes that differ between two expressions, or `None` when the
/// change is more than a relabelling or a single negation.
fn node_changes(a: &Expr, b: &Expr) -> Option<usize> {
    if let Expr::Not(inner) = b {
        if **inner == *a {
            return Some(1);
        }
    }
    match (a, b) {
        (
            Expr::Binary {
                op: o1,
                lhs: l1,
                rhs: r1,
            },
            Expr::Binary {
                op: o2,
                lhs: l2,
                rhs: r2,
            },
        ) => Some((o1 != o2) as usize + node_changes(l1, l2)? + node_changes(r1, r2)?),
        (Expr::Not(x), Expr::Not(y)) => node_changes(x, y),
        (Expr::Int(x), Expr::Int(y)) => Some((x != y) as usize),
        (
            Expr::Call {
                receiver: r1,
                method: m1,
                args: a1,
            },
            Expr::Call {
                receiver: r2,
                method: m2,
                args: a2,
            },
        ) if r1 == r2 && m1 == m2 && a1.len() == a2.len() => {
            a1.iter().zip(a2).map(|(x, y)| node_changes(x, y)).sum()
        }
        (
            Expr::New {
                class: c1,
                args: a1,
            },
            Expr::New {
                class: c2,
                args: a2,
            },
        ) if c1 == c2 && a1.len() == a2.len() => {
            a1.iter().zip(a2).map(|(x, y)| node_changes(x, y)).sum()
        }
        _ => (a == b).then_some(0),
    }
}

fn stmt_changes(a: &[Stmt], b: &[Stmt]) -> Option<usize> {
    if a.len() != b.len() {
        return None;
    }
    let mut total = 0;
    for (x, y) in a.iter().zip(b) {
        total += match (x, y) {
            (
                Stmt::If {
                    cond: c1,
                    then_block: t1,
                    else_block: e1,
                },
                Stmt::If {
                    cond: c2,
                    then_block: t2,
                    else_block: e2,
                },
            ) => {
                let els = match (e1, e2) {
                    (Some(e1), Some(e2)) => stmt_changes(e1, e2)?,
                    (None, None) => 0,
                    _ => return None,
                };
                node_changes(c1, c2)? + stmt_changes(t1, t2)? + els
            }
            (Stmt::While { cond: c1, body: b1 }, Stmt::While { cond: c2, body: b2 }) => {
                node_changes(c1, c2)? + stmt_changes(b1, b2)?
            }
            _ if std::mem::discriminant(x) == std::mem::discriminant(y) => {
                let (ex, ey) = (x.own_exprs(), y.own_exprs());
                if ex.len() != ey.len() {
                    return None;
                }
                let mut n = 0;
                for (p, q) in ex.into_iter().zip(ey) {
                    n += node_changes(p, q)?;
                }
                n
            }
            _ => return None,
        };
    }
    Some(total)
}

fn program_changes(a: &Program, b: &Program) -> Option<usize> {
    let mut total = 0;
    for (c1, c2) in a.classes.iter().zip(&b.classes) {
        if c1.fields != c2.fields || c1.methods.len() != c2.methods.len() {
            return None;
        }
        for (m1, m2) in c1.methods.iter().zip(&c2.methods) {
            total += stmt_changes(&m1.body, &m2.body)?;
        }
    }
    (a.suites == b.suites).then_some(total)
}

fn check_validity(p: &Program) -> Result<(), String> {
    for m in generate_mutants(p, &all_ops()) {
        let mutated = materialize(p, &m).map_err(|e| e.to_string())?;
        let reparsed = parse_program(&print_program(&mutated))
            .map_err(|e| format!("{} does not re-parse: {e}", m.id))?;
        if !reparsed.structurally_eq(&mutated) {
            return Err(format!("{} changes shape when printed", m.id));
        }
        if m.original == m.mutated {
            return Err(format!("{} is textually identical", m.id));
        }
        if program_changes(p, &mutated) != Some(1) {
            return Err(format!("{} does not change exactly one node", m.id));
        }
    }
    Ok(())
}

#[test]
fn bank_account_counts_per_method() {
    let p = fixture("bank-account").program;
    let expected: BTreeMap<(MethodRef, Operator), usize> = [
        ("authenticate", Operator::Ror, 1),
        ("deposit", Operator::Aor, 1),
        ("deposit", Operator::Cnb, 1),
        ("deposit", Operator::Crp, 1),
        ("deposit", Operator::Lcr, 1),
        ("deposit", Operator::Ror, 1),
        ("withdraw", Operator::Aor, 1),
        ("withdraw", Operator::Cnb, 1),
        ("withdraw", Operator::Lcr, 1),
        ("withdraw", Operator::Ror, 1),
    ]
    .into_iter()
    .map(|(m, op, n)| ((MethodRef::new("Account", m), op), n))
    .collect();
    assert_eq!(site_oracle(&p), expected);
    assert_eq!(generated_counts(&p), expected);
}

#[test]
fn fixture_counts_match_the_site_oracle() {
    for name in FIXTURES {
        let p = fixture(name).program;
        assert_eq!(generated_counts(&p), site_oracle(&p), "{name}");
    }
}

#[test]
fn every_fixture_mutant_is_valid() {
    for name in FIXTURES {
        let p = fixture(name).program;
        if let Err(e) = check_validity(&p) {
            panic!("{name}: {e}");
        }
    }
}

#[test]
fn generation_is_stable() {
    for name in FIXTURES {
        let p = fixture(name).program;
        let a = generate_mutants(&p, &all_ops());
        let b = generate_mutants(&fixture(name).program, &all_ops());
        assert_eq!(a, b, "{name}");
        let ids: BTreeSet<&str> = a.iter().map(|m| m.id.as_str()).collect();
        assert_eq!(ids.len(), a.len(), "{name}: duplicate ids");
    }
}

#[test]
fn operator_filter_selects_a_subset() {
    let p = fixture("quality-score").program;
    let all = generate_mutants(&p, &all_ops());
    for op in Operator::ALL {
        let only = generate_mutants(&p, &BTreeSet::from([op]));
        let expected: Vec<_> = all.iter().filter(|m| m.operator == op).cloned().collect();
        assert_eq!(only, expected, "{op}");
    }
}

#[test]
fn constant_minus_one_has_a_single_replacement() {
    assert_eq!(Operator::Crp.replace_int(-1), vec![0]);
    assert_eq!(Operator::Crp.replace_int(0), vec![1]);
    assert_eq!(Operator::Crp.replace_int(7), vec![8, 0]);
    assert_eq!(Operator::Crp.replace_int(i64::MAX), vec![0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn generated_mutants_are_valid(class in gen_class()) {
        let p = gen_program(&class, &[]);
        prop_assert_eq!(check_validity(&p), Ok(()));
    }

    #[test]
    fn generated_counts_match_the_site_oracle(class in gen_class()) {
        let p = gen_program(&class, &[]);
        prop_assert_eq!(generated_counts(&p), site_oracle(&p));
    }
}
