use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    // keywords
    Class,
    Field,
    Method,
    Returns,
    SelfKw,
    If,
    Else,
    While,
    Return,
    New,
    True,
    False,
    And,
    Or,
    Not,
    Suite,
    Test,
    AssertTrue,
    AssertFalse,
    AssertEqual,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Assign,
    Equals,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::Newline => "end of line",
            Tok::Eof => "end of file",
            other => return write!(f, "`{}`", other.text()),
        };
        f.write_str(s)
    }
}

impl Tok {
    /// Source text of fixed tokens.
    pub fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Field => "field",
            Tok::Method => "method",
            Tok::Returns => "returns",
            Tok::SelfKw => "self",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::New => "new",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Suite => "suite",
            Tok::Test => "test",
            Tok::AssertTrue => "assertTrue",
            Tok::AssertFalse => "assertFalse",
            Tok::AssertEqual => "assertEqual",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => ":=",
            Tok::Equals => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Ident(_) | Tok::Int(_) | Tok::Newline | Tok::Eof => "",
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "field" => Tok::Field,
        "method" => Tok::Method,
        "returns" => Tok::Returns,
        "self" => Tok::SelfKw,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        "new" => Tok::New,
        "true" => Tok::True,
        "false" => Tok::False,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "suite" => Tok::Suite,
        "test" => Tok::Test,
        "assertTrue" => Tok::AssertTrue,
        "assertFalse" => Tok::AssertFalse,
        "assertEqual" => Tok::AssertEqual,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// Splits source text into tokens. Newlines are significant; `#` starts a comment.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    for (line_idx, line) in src.lines().enumerate() {
        let line_no = line_idx as u32 + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i as u32 + 1;
            let push = |out: &mut Vec<Token>, tok| {
                out.push(Token {
                    tok,
                    line: line_no,
                    column,
                })
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                push(&mut out, keyword(&word).unwrap_or(Tok::Ident(word)));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<u64>().map_err(|_| LexError {
                    line: line_no,
                    column,
                    message: format!("integer literal `{text}` out of range"),
                })?;
                push(&mut out, Tok::Int(value));
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::NotEq, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', _) => (Tok::Equals, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('%', _) => (Tok::Percent, 1),
                _ => {
                    return Err(LexError {
                        line: line_no,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            push(&mut out, tok);
            i += width;
        }
        out.push(Token {
            tok: Tok::Newline,
            line: line_no,
            column: chars.len() as u32 + 1,
        });
    }
    let last_line = src.lines().count() as u32 + 1;
    out.push(Token {
        tok: Tok::Eof,
        line: last_line,
        column: 1,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_keywords() {
        assert_eq!(
            toks("self.balance := self.balance - n # withdraw"),
            vec![
                Tok::SelfKw,
                Tok::Dot,
                Tok::Ident("balance".into()),
                Tok::Assign,
                Tok::SelfKw,
                Tok::Dot,
                Tok::Ident("balance".into()),
                Tok::Minus,
                Tok::Ident("n".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
        assert_eq!(
            toks("a<=b != c>=d"),
            vec![
                Tok::Ident("a".into()),
                Tok::Le,
                Tok::Ident("b".into()),
                Tok::NotEq,
                Tok::Ident("c".into()),
                Tok::Ge,
                Tok::Ident("d".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("x\n  y := 1").unwrap();
        assert_eq!((t[2].line, t[2].column), (2, 3));
        assert_eq!((t[3].line, t[3].column), (2, 5));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("x := 1 $").unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));
        assert!(tokenize("x := 99999999999999999999999").is_err());
    }
}
