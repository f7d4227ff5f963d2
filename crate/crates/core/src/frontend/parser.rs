//! Recursive-descent parser for MiniLang, one statement per line.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::FrontendError;

/// What a file may declare, decided by its directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Production,
    Tests,
}

impl FileKind {
    pub fn of_path(path: &str) -> Option<FileKind> {
        let path = path.trim_start_matches("./");
        if path.starts_with("src/") {
            Some(FileKind::Production)
        } else if path.starts_with("tests/") {
            Some(FileKind::Tests)
        } else {
            None
        }
    }
}

/// Declarations of one file plus the spans recorded while parsing it.
///
/// Node keys use file-local class and suite indices; the caller rebases them.
#[derive(Debug, Default)]
pub(crate) struct ParsedFile {
    pub classes: Vec<ClassDecl>,
    pub suites: Vec<TestSuite>,
    pub spans: BTreeMap<NodeKey, Span>,
}

/// Where the expressions currently being parsed belong.
#[derive(Clone, Copy)]
enum Owner {
    Method { class: usize, method: usize },
    Test { suite: usize, test: usize },
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    path: &'a str,
    file: usize,
    spans: BTreeMap<NodeKey, Span>,
    /// Anchors of expression nodes in creation order, which is post-order.
    expr_spans: Vec<Span>,
    in_class: bool,
}

pub(crate) fn parse_file(
    path: &str,
    file: usize,
    text: &str,
    kind: FileKind,
) -> Result<ParsedFile, FrontendError> {
    let toks = tokenize(text).map_err(|e| FrontendError::Lex {
        location: Location {
            file: path.to_string(),
            line: e.line,
            column: e.column,
        },
        message: e.message,
    })?;
    let mut p = Parser {
        toks,
        pos: 0,
        path,
        file,
        spans: BTreeMap::new(),
        expr_spans: Vec::new(),
        in_class: false,
    };
    let mut out = ParsedFile::default();
    loop {
        p.skip_newlines();
        match (kind, p.peek()) {
            (_, Tok::Eof) => break,
            (FileKind::Production, Tok::Class) => {
                let idx = out.classes.len();
                let class = p.class_decl(idx)?;
                out.classes.push(class);
            }
            (FileKind::Tests, Tok::Suite) => {
                let idx = out.suites.len();
                let suite = p.suite_decl(idx)?;
                out.suites.push(suite);
            }
            (FileKind::Production, _) => return Err(p.expected(&["`class`"])),
            (FileKind::Tests, _) => return Err(p.expected(&["`suite`"])),
        }
    }
    out.spans = p.spans;
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        let t = &self.toks[self.pos];
        Span {
            file: self.file,
            line: t.line,
            column: t.column,
        }
    }

    fn location(&self) -> Location {
        let t = &self.toks[self.pos];
        Location {
            file: self.path.to_string(),
            line: t.line,
            column: t.column,
        }
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expected(&self, what: &[&str]) -> FrontendError {
        FrontendError::Syntax {
            location: self.location(),
            expected: what.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn eat(&mut self, tok: Tok) -> Result<(), FrontendError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.expected(&[&format!("`{}`", tok.text())]))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.expected(&["identifier"])),
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.advance();
        }
    }

    fn end_of_line(&mut self) -> Result<(), FrontendError> {
        match self.peek() {
            Tok::Newline => {
                self.advance();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.expected(&["end of line"])),
        }
    }

    /// Consumes `{` and either `}` on the same line or a newline.
    /// Returns true when the block was closed immediately.
    fn open_block(&mut self) -> Result<bool, FrontendError> {
        self.eat(Tok::LBrace)?;
        if *self.peek() == Tok::RBrace {
            self.advance();
            return Ok(true);
        }
        match self.peek() {
            Tok::Newline => {
                self.advance();
                Ok(false)
            }
            _ => Err(self.expected(&["end of line", "`}`"])),
        }
    }

    fn class_decl(&mut self, class: usize) -> Result<ClassDecl, FrontendError> {
        self.spans.insert(NodeKey::Class(class), self.span());
        self.eat(Tok::Class)?;
        let name = self.ident()?;
        let mut decl = ClassDecl {
            name,
            fields: Vec::new(),
            methods: Vec::new(),
        };
        self.in_class = true;
        if !self.open_block()? {
            loop {
                self.skip_newlines();
                match self.peek() {
                    Tok::RBrace => {
                        self.advance();
                        break;
                    }
                    Tok::Field => {
                        let key = NodeKey::Field {
                            class,
                            field: decl.fields.len(),
                        };
                        self.spans.insert(key, self.span());
                        self.advance();
                        let name = self.ident()?;
                        self.eat(Tok::Equals)?;
                        let init = self.literal()?;
                        self.end_of_line()?;
                        decl.fields.push(FieldDecl { name, init });
                    }
                    Tok::Method => {
                        let method = decl.methods.len();
                        let m = self.method_decl(class, method)?;
                        decl.methods.push(m);
                    }
                    _ => return Err(self.expected(&["`field`", "`method`", "`}`"])),
                }
            }
        }
        self.in_class = false;
        self.end_of_line()?;
        Ok(decl)
    }

    fn literal(&mut self) -> Result<Literal, FrontendError> {
        let loc = self.location();
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Literal::Bool(true))
            }
            Tok::False => {
                self.advance();
                Ok(Literal::Bool(false))
            }
            Tok::Int(v) => {
                self.advance();
                int_literal(v, false, loc).map(Literal::Int)
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.advance();
                        int_literal(v, true, loc).map(Literal::Int)
                    }
                    _ => Err(self.expected(&["integer"])),
                }
            }
            _ => Err(self.expected(&["literal"])),
        }
    }

    fn method_decl(&mut self, class: usize, method: usize) -> Result<MethodDecl, FrontendError> {
        self.spans
            .insert(NodeKey::Method { class, method }, self.span());
        self.eat(Tok::Method)?;
        let name = self.ident()?;
        self.eat(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.ident()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.eat(Tok::RParen)?;
        let returns_value = if *self.peek() == Tok::Returns {
            self.advance();
            true
        } else {
            false
        };
        let mut counter = 0;
        let body = self.block(Owner::Method { class, method }, &mut counter)?;
        self.end_of_line()?;
        Ok(MethodDecl {
            name,
            params,
            body,
            returns_value,
        })
    }

    /// Parses `{ ... }` up to and including the closing brace.
    fn block(&mut self, owner: Owner, counter: &mut usize) -> Result<Vec<Stmt>, FrontendError> {
        let mut stmts = Vec::new();
        if self.open_block()? {
            return Ok(stmts);
        }
        loop {
            self.skip_newlines();
            if *self.peek() == Tok::RBrace {
                self.advance();
                return Ok(stmts);
            }
            if *self.peek() == Tok::Eof {
                return Err(self.expected(&["`}`"]));
            }
            stmts.push(self.stmt(owner, counter)?);
        }
    }

    fn record_exprs(&mut self, owner: Owner, stmt: usize) {
        for (expr, span) in std::mem::take(&mut self.expr_spans).into_iter().enumerate() {
            let key = match owner {
                Owner::Method { class, method } => NodeKey::Expr {
                    class,
                    method,
                    stmt,
                    expr,
                },
                Owner::Test { suite, test } => NodeKey::TestExpr {
                    suite,
                    test,
                    stmt,
                    expr,
                },
            };
            self.spans.insert(key, span);
        }
    }

    fn stmt(&mut self, owner: Owner, counter: &mut usize) -> Result<Stmt, FrontendError> {
        let Owner::Method { class, method } = owner else {
            unreachable!("method statements are only parsed inside classes")
        };
        let index = *counter;
        *counter += 1;
        self.spans.insert(
            NodeKey::Stmt {
                class,
                method,
                stmt: index,
            },
            self.span(),
        );
        self.expr_spans.clear();
        let stmt = match self.peek().clone() {
            Tok::If => self.if_stmt(owner, index, counter)?,
            Tok::While => {
                self.advance();
                let cond = self.expr()?;
                self.record_exprs(owner, index);
                let body = self.block(owner, counter)?;
                self.end_of_line()?;
                Stmt::While { cond, body }
            }
            Tok::Return => {
                self.advance();
                let value = match self.peek() {
                    Tok::Newline | Tok::Eof => None,
                    _ => Some(self.expr()?),
                };
                self.record_exprs(owner, index);
                self.end_of_line()?;
                Stmt::Return(value)
            }
            Tok::SelfKw if *self.peek_at(3) == Tok::Assign => {
                self.advance();
                self.eat(Tok::Dot)?;
                let field = self.ident()?;
                self.eat(Tok::Assign)?;
                let value = self.expr()?;
                self.record_exprs(owner, index);
                self.end_of_line()?;
                Stmt::SetField { field, value }
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::Assign => {
                self.advance();
                self.advance();
                let value = self.expr()?;
                self.record_exprs(owner, index);
                self.end_of_line()?;
                Stmt::Let { name, value }
            }
            _ => {
                let e = self.invocation_stmt()?;
                self.record_exprs(owner, index);
                self.end_of_line()?;
                Stmt::Expr(e)
            }
        };
        Ok(stmt)
    }

    fn if_stmt(
        &mut self,
        owner: Owner,
        index: usize,
        counter: &mut usize,
    ) -> Result<Stmt, FrontendError> {
        self.eat(Tok::If)?;
        let cond = self.expr()?;
        self.record_exprs(owner, index);
        let then_block = self.block(owner, counter)?;
        let else_block = if *self.peek() == Tok::Else {
            self.advance();
            if *self.peek() == Tok::If {
                // `else if` is sugar for an else block holding one conditional.
                let Owner::Method { class, method } = owner else {
                    unreachable!()
                };
                let nested = *counter;
                *counter += 1;
                self.spans.insert(
                    NodeKey::Stmt {
                        class,
                        method,
                        stmt: nested,
                    },
                    self.span(),
                );
                self.expr_spans.clear();
                let inner = self.if_stmt(owner, nested, counter)?;
                return Ok(Stmt::If {
                    cond,
                    then_block,
                    else_block: Some(vec![inner]),
                });
            }
            Some(self.block(owner, counter)?)
        } else {
            None
        };
        self.end_of_line()?;
        Ok(Stmt::If {
            cond,
            then_block,
            else_block,
        })
    }

    fn invocation_stmt(&mut self) -> Result<Expr, FrontendError> {
        let start = self.location();
        let found = self.peek().to_string();
        let e = self.expr()?;
        if matches!(e, Expr::Call { .. }) {
            Ok(e)
        } else {
            Err(FrontendError::Syntax {
                location: start,
                expected: vec!["statement".into()],
                found,
            })
        }
    }

    fn suite_decl(&mut self, suite: usize) -> Result<TestSuite, FrontendError> {
        self.spans.insert(NodeKey::Suite(suite), self.span());
        self.eat(Tok::Suite)?;
        let name = self.ident()?;
        let mut tests = Vec::new();
        if !self.open_block()? {
            loop {
                self.skip_newlines();
                match self.peek() {
                    Tok::RBrace => {
                        self.advance();
                        break;
                    }
                    Tok::Test => {
                        let test = tests.len();
                        tests.push(self.test_decl(suite, test)?);
                    }
                    _ => return Err(self.expected(&["`test`", "`}`"])),
                }
            }
        }
        self.end_of_line()?;
        Ok(TestSuite { name, tests })
    }

    fn test_decl(&mut self, suite: usize, test: usize) -> Result<TestCase, FrontendError> {
        self.spans
            .insert(NodeKey::Test { suite, test }, self.span());
        self.eat(Tok::Test)?;
        let name = self.ident()?;
        let mut body = Vec::new();
        let owner = Owner::Test { suite, test };
        if !self.open_block()? {
            loop {
                self.skip_newlines();
                match self.peek() {
                    Tok::RBrace => {
                        self.advance();
                        break;
                    }
                    Tok::Eof => return Err(self.expected(&["`}`"])),
                    _ => {}
                }
                let stmt = body.len();
                self.spans
                    .insert(NodeKey::TestStmt { suite, test, stmt }, self.span());
                self.expr_spans.clear();
                let s = self.test_stmt()?;
                self.record_exprs(owner, stmt);
                self.end_of_line()?;
                body.push(s);
            }
        }
        self.end_of_line()?;
        Ok(TestCase { name, body })
    }

    fn test_stmt(&mut self) -> Result<TestStmt, FrontendError> {
        match self.peek().clone() {
            Tok::AssertTrue | Tok::AssertFalse => {
                let positive = *self.peek() == Tok::AssertTrue;
                self.advance();
                self.eat(Tok::LParen)?;
                let e = self.expr()?;
                self.eat(Tok::RParen)?;
                Ok(TestStmt::Assert(if positive {
                    Assertion::True(e)
                } else {
                    Assertion::False(e)
                }))
            }
            Tok::AssertEqual => {
                self.advance();
                self.eat(Tok::LParen)?;
                let actual = self.expr()?;
                self.eat(Tok::Comma)?;
                let expected = self.expr()?;
                self.eat(Tok::RParen)?;
                Ok(TestStmt::Assert(Assertion::Equal(actual, expected)))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::Assign => {
                self.advance();
                self.advance();
                let value = self.expr()?;
                Ok(TestStmt::Let { name, value })
            }
            _ => Ok(TestStmt::Expr(self.invocation_stmt()?)),
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        self.expr_prec(0)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::And => BinOp::And,
            Tok::Or => BinOp::Or,
            _ => return None,
        })
    }

    /// Precedence climbing; every operator is left-associative.
    fn expr_prec(&mut self, min: u8) -> Result<Expr, FrontendError> {
        let mut lhs = if *self.peek() == Tok::Not {
            let at = self.span();
            self.advance();
            let inner = self.expr_prec(NOT_PRECEDENCE)?;
            self.expr_spans.push(at);
            Expr::Not(Box::new(inner))
        } else {
            self.primary()?
        };
        while let Some(op) = self.binop() {
            if op.precedence() < min {
                break;
            }
            let at = self.span();
            self.advance();
            let rhs = self.expr_prec(op.precedence() + 1)?;
            self.expr_spans.push(at);
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn args(&mut self) -> Result<Vec<Expr>, FrontendError> {
        self.eat(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        if *self.peek() != Tok::RParen {
            return Err(self.expected(&["`,`", "`)`"]));
        }
        self.advance();
        Ok(args)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let at = self.span();
        let loc = self.location();
        let e = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Expr::Int(int_literal(v, false, loc)?)
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.advance();
                        Expr::Int(int_literal(v, true, loc)?)
                    }
                    _ => return Err(self.expected(&["integer"])),
                }
            }
            Tok::True => {
                self.advance();
                Expr::Bool(true)
            }
            Tok::False => {
                self.advance();
                Expr::Bool(false)
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.eat(Tok::RParen)?;
                // parentheses create no node
                return Ok(e);
            }
            Tok::SelfKw => {
                if !self.in_class {
                    return Err(FrontendError::Invalid {
                        location: loc,
                        message: "`self` is only valid inside a class".into(),
                    });
                }
                self.advance();
                self.eat(Tok::Dot)?;
                let name = self.ident()?;
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    Expr::Call {
                        receiver: Receiver::SelfRef,
                        method: name,
                        args,
                    }
                } else {
                    Expr::Field(name)
                }
            }
            Tok::Ident(name) => {
                self.advance();
                if *self.peek() == Tok::Dot {
                    self.advance();
                    let method = self.ident()?;
                    if *self.peek() != Tok::LParen {
                        return Err(self.expected(&["`(`"]));
                    }
                    let args = self.args()?;
                    Expr::Call {
                        receiver: Receiver::Local(name),
                        method,
                        args,
                    }
                } else {
                    Expr::Local(name)
                }
            }
            Tok::New => {
                self.advance();
                let class = self.ident()?;
                let args = self.args()?;
                Expr::New { class, args }
            }
            _ => return Err(self.expected(&["expression"])),
        };
        self.expr_spans.push(at);
        Ok(e)
    }
}

fn int_literal(v: u64, negative: bool, location: Location) -> Result<i64, FrontendError> {
    let value = if negative {
        if v == 1 << 63 {
            Some(i64::MIN)
        } else {
            i64::try_from(v).ok().map(|x| -x)
        }
    } else {
        i64::try_from(v).ok()
    };
    value.ok_or_else(|| FrontendError::Invalid {
        location,
        message: format!(
            "integer literal {}{v} does not fit in 64 bits",
            if negative { "-" } else { "" }
        ),
    })
}
