//! Load-time checks: declarations are unique and every name resolves.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use crate::error::FrontendError;

struct Resolver<'a> {
    program: &'a Program,
    lints: Vec<Lint>,
}

fn loc(program: &Program, key: NodeKey) -> Location {
    program
        .source_map
        .location(key)
        .unwrap_or_else(|| Location {
            file: "<unknown>".into(),
            line: 0,
            column: 0,
        })
}

/// Validates a freshly parsed program and returns the lints it produced.
pub(crate) fn resolve(program: &Program) -> Result<Vec<Lint>, FrontendError> {
    let mut r = Resolver {
        program,
        lints: Vec::new(),
    };
    r.declarations()?;
    for (ci, class) in program.classes.iter().enumerate() {
        for (mi, method) in class.methods.iter().enumerate() {
            r.method(ci, mi, class, method)?;
        }
    }
    for (si, suite) in program.suites.iter().enumerate() {
        for (ti, test) in suite.tests.iter().enumerate() {
            r.test(si, ti, test)?;
        }
    }
    Ok(r.lints)
}

fn unique<'n>(
    names: impl Iterator<Item = (&'n str, NodeKey)>,
    kind: &'static str,
    program: &Program,
) -> Result<(), FrontendError> {
    let mut seen = BTreeSet::new();
    for (name, key) in names {
        if !seen.insert(name) {
            return Err(FrontendError::Duplicate {
                location: loc(program, key),
                kind,
                name: name.to_string(),
            });
        }
    }
    Ok(())
}

/// What the resolver knows about a local's object class.
type Scope = BTreeMap<String, Option<String>>;

impl<'a> Resolver<'a> {
    fn declarations(&mut self) -> Result<(), FrontendError> {
        let p = self.program;
        unique(
            p.classes
                .iter()
                .enumerate()
                .map(|(i, c)| (c.name.as_str(), NodeKey::Class(i))),
            "class",
            p,
        )?;
        for (ci, c) in p.classes.iter().enumerate() {
            unique(
                c.fields.iter().enumerate().map(|(fi, f)| {
                    (
                        f.name.as_str(),
                        NodeKey::Field {
                            class: ci,
                            field: fi,
                        },
                    )
                }),
                "field",
                p,
            )?;
            unique(
                c.methods.iter().enumerate().map(|(mi, m)| {
                    (
                        m.name.as_str(),
                        NodeKey::Method {
                            class: ci,
                            method: mi,
                        },
                    )
                }),
                "method",
                p,
            )?;
            for (mi, m) in c.methods.iter().enumerate() {
                let key = NodeKey::Method {
                    class: ci,
                    method: mi,
                };
                unique(m.params.iter().map(|n| (n.as_str(), key)), "parameter", p)?;
            }
        }
        unique(
            p.suites
                .iter()
                .enumerate()
                .map(|(i, s)| (s.name.as_str(), NodeKey::Suite(i))),
            "suite",
            p,
        )?;
        for (si, s) in p.suites.iter().enumerate() {
            if !s.name.ends_with("Test") {
                return Err(FrontendError::Invalid {
                    location: loc(p, NodeKey::Suite(si)),
                    message: format!("suite name `{}` must end with `Test`", s.name),
                });
            }
            unique(
                s.tests.iter().enumerate().map(|(ti, t)| {
                    (
                        t.name.as_str(),
                        NodeKey::Test {
                            suite: si,
                            test: ti,
                        },
                    )
                }),
                "test",
                p,
            )?;
        }
        Ok(())
    }

    fn method(
        &mut self,
        ci: usize,
        mi: usize,
        class: &ClassDecl,
        method: &MethodDecl,
    ) -> Result<(), FrontendError> {
        let mut scope: Scope = method.params.iter().map(|p| (p.clone(), None)).collect();
        let mut index = 0usize;
        let mut result = Ok(());
        walk_stmts(&method.body, &mut |stmt| {
            if result.is_err() {
                return;
            }
            let stmt_key = NodeKey::Stmt {
                class: ci,
                method: mi,
                stmt: index,
            };
            let stmt_index = index;
            let expr_key = move |expr| NodeKey::Expr {
                class: ci,
                method: mi,
                stmt: stmt_index,
                expr,
            };
            index += 1;
            result = (|| {
                let mut counter = 0;
                for e in stmt.own_exprs() {
                    self.expr(e, Some(class), &scope, &mut counter, &expr_key)?;
                }
                match stmt {
                    Stmt::Let { name, value } => {
                        scope.insert(name.clone(), static_class(value));
                    }
                    Stmt::SetField { field, .. } if class.field(field).is_none() => {
                        return Err(FrontendError::Unresolved {
                            location: loc(self.program, stmt_key),
                            kind: "field",
                            name: format!("{}.{field}", class.name),
                        });
                    }
                    Stmt::Return(value) if value.is_some() != method.returns_value => {
                        let message = if method.returns_value {
                            format!(
                                "method `{}` declares `returns` but returns nothing",
                                method.name
                            )
                        } else {
                            format!(
                                "method `{}` returns a value without declaring `returns`",
                                method.name
                            )
                        };
                        return Err(FrontendError::Invalid {
                            location: loc(self.program, stmt_key),
                            message,
                        });
                    }
                    _ => {}
                }
                Ok(())
            })();
        });
        result
    }

    fn test(&mut self, si: usize, ti: usize, test: &TestCase) -> Result<(), FrontendError> {
        let test_key = NodeKey::Test {
            suite: si,
            test: ti,
        };
        if test.body.is_empty() {
            return Err(FrontendError::Invalid {
                location: loc(self.program, test_key),
                message: format!("test `{}` has an empty body", test.name),
            });
        }
        if !test.body.iter().any(TestStmt::is_assertion) {
            self.lints.push(Lint {
                location: loc(self.program, test_key),
                message: format!("test `{}` has no assertion", test.name),
            });
        }
        let mut scope = Scope::new();
        for (index, stmt) in test.body.iter().enumerate() {
            let expr_key = |expr| NodeKey::TestExpr {
                suite: si,
                test: ti,
                stmt: index,
                expr,
            };
            let mut counter = 0;
            for e in stmt.exprs() {
                self.expr(e, None, &scope, &mut counter, &expr_key)?;
            }
            if let TestStmt::Let { name, value } = stmt {
                scope.insert(name.clone(), static_class(value));
            }
        }
        Ok(())
    }

    /// Checks one expression tree; `counter` tracks the post-order index for locations.
    fn expr(
        &self,
        e: &Expr,
        this: Option<&ClassDecl>,
        scope: &Scope,
        counter: &mut usize,
        key: &dyn Fn(usize) -> NodeKey,
    ) -> Result<(), FrontendError> {
        let mut result = Ok(());
        e.walk_postorder(&mut |node| {
            let here = key(*counter);
            *counter += 1;
            if result.is_err() {
                return;
            }
            result = self.node(node, this, scope, here);
        });
        result
    }

    fn node(
        &self,
        node: &Expr,
        this: Option<&ClassDecl>,
        scope: &Scope,
        here: NodeKey,
    ) -> Result<(), FrontendError> {
        let p = self.program;
        let unresolved = |kind, name: String| FrontendError::Unresolved {
            location: loc(p, here),
            kind,
            name,
        };
        let arity = |target: &MethodDecl, owner: &str, given: usize| {
            if target.params.len() == given {
                Ok(())
            } else {
                Err(FrontendError::Invalid {
                    location: loc(p, here),
                    message: format!(
                        "`{owner}.{}` takes {} argument(s), {given} given",
                        target.name,
                        target.params.len()
                    ),
                })
            }
        };
        match node {
            Expr::Local(name) if !scope.contains_key(name) => {
                Err(unresolved("local", name.clone()))
            }
            Expr::Field(name) => {
                let class = this.expect("parser rejects self outside classes");
                match class.field(name) {
                    Some(_) => Ok(()),
                    None => Err(unresolved("field", format!("{}.{name}", class.name))),
                }
            }
            Expr::New { class, args } => {
                let Some(decl) = p.class(class) else {
                    return Err(unresolved("class", class.clone()));
                };
                if args.is_empty() || args.len() == decl.fields.len() {
                    Ok(())
                } else {
                    Err(FrontendError::Invalid {
                        location: loc(p, here),
                        message: format!(
                            "`new {class}` takes 0 or {} argument(s), {} given",
                            decl.fields.len(),
                            args.len()
                        ),
                    })
                }
            }
            Expr::Call {
                receiver,
                method,
                args,
            } => match receiver {
                Receiver::SelfRef => {
                    let class = this.expect("parser rejects self outside classes");
                    match class.method(method) {
                        Some(m) => arity(m, &class.name, args.len()),
                        None => Err(unresolved("method", format!("{}.{method}", class.name))),
                    }
                }
                Receiver::Local(local) => {
                    let Some(known) = scope.get(local) else {
                        return Err(unresolved("local", local.clone()));
                    };
                    match known.as_deref().and_then(|c| p.class(c)) {
                        Some(class) => match class.method(method) {
                            Some(m) => arity(m, &class.name, args.len()),
                            None => Err(unresolved("method", format!("{}.{method}", class.name))),
                        },
                        None => {
                            if p.classes.iter().any(|c| c.method(method).is_some()) {
                                Ok(())
                            } else {
                                Err(unresolved("method", method.clone()))
                            }
                        }
                    }
                }
            },
            _ => Ok(()),
        }
    }
}

/// The class of the object a binding holds, when it is syntactically evident.
pub(crate) fn static_class(value: &Expr) -> Option<String> {
    match value {
        Expr::New { class, .. } => Some(class.clone()),
        _ => None,
    }
}
