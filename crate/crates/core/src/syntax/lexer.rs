//! Tokenizer for the ASCII concrete syntax.

use crate::rat::Rat;
use num_bigint::BigInt;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// `#1`, `#2`, ... — template placeholders, only meaningful where enabled.
    Placeholder(u32),
    Number(Rat),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Leq,
    Geq,
    Eq,
    Neq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Iff,
    Exists,
    Forall,
    Assign,
    Plus,
    Minus,
    StarOp,
    Semi,
    ChoicePlus,
    ChoiceMinus,
    Question,
    DualOp,
    Prime,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Placeholder(k) => return write!(f, "placeholder `#{k}`"),
            Tok::Number(_) => "number",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Leq => "`<=`",
            Tok::Geq => "`>=`",
            Tok::Eq => "`=`",
            Tok::Neq => "`!=`",
            Tok::Bang => "`!`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::Iff => "`<->`",
            Tok::Exists => "`\\exists`",
            Tok::Forall => "`\\forall`",
            Tok::Assign => "`:=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::StarOp => "`*`",
            Tok::Semi => "`;`",
            Tok::ChoicePlus => "`++`",
            Tok::ChoiceMinus => "`--`",
            Tok::Question => "`?`",
            Tok::DualOp => "`^d`",
            Tok::Prime => "`'`",
            Tok::Comma => "`,`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub fn lex(input: &str) -> Result<Vec<SpannedTok>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    let n = chars.len();

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(SpannedTok { tok: $tok, pos: $pos })
        };
    }

    while i < n {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |i: &mut usize, col: &mut u32, k: usize| {
            *i += k;
            *col += k as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(&mut i, &mut col, 1),
            '(' => {
                push!(Tok::LParen, pos);
                advance(&mut i, &mut col, 1);
            }
            ')' => {
                push!(Tok::RParen, pos);
                advance(&mut i, &mut col, 1);
            }
            '{' => {
                push!(Tok::LBrace, pos);
                advance(&mut i, &mut col, 1);
            }
            '}' => {
                push!(Tok::RBrace, pos);
                advance(&mut i, &mut col, 1);
            }
            '[' => {
                push!(Tok::LBracket, pos);
                advance(&mut i, &mut col, 1);
            }
            ']' => {
                push!(Tok::RBracket, pos);
                advance(&mut i, &mut col, 1);
            }
            ',' => {
                push!(Tok::Comma, pos);
                advance(&mut i, &mut col, 1);
            }
            ';' => {
                push!(Tok::Semi, pos);
                advance(&mut i, &mut col, 1);
            }
            '?' => {
                push!(Tok::Question, pos);
                advance(&mut i, &mut col, 1);
            }
            '\'' => {
                push!(Tok::Prime, pos);
                advance(&mut i, &mut col, 1);
            }
            '&' => {
                push!(Tok::Amp, pos);
                advance(&mut i, &mut col, 1);
            }
            '|' => {
                push!(Tok::Pipe, pos);
                advance(&mut i, &mut col, 1);
            }
            '*' => {
                push!(Tok::StarOp, pos);
                advance(&mut i, &mut col, 1);
            }
            '=' => {
                push!(Tok::Eq, pos);
                advance(&mut i, &mut col, 1);
            }
            '+' => {
                if chars.get(i + 1) == Some(&'+') {
                    push!(Tok::ChoicePlus, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Plus, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'-') {
                    push!(Tok::ChoiceMinus, pos);
                    advance(&mut i, &mut col, 2);
                } else if chars.get(i + 1) == Some(&'>') {
                    push!(Tok::Arrow, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Minus, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    push!(Tok::Iff, pos);
                    advance(&mut i, &mut col, 3);
                } else if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Leq, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Lt, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Geq, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Gt, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Neq, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    push!(Tok::Bang, pos);
                    advance(&mut i, &mut col, 1);
                }
            }
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Assign, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    return Err(LexError {
                        pos,
                        msg: "expected `:=`".to_string(),
                    });
                }
            }
            '^' => {
                if chars.get(i + 1) == Some(&'d') {
                    push!(Tok::DualOp, pos);
                    advance(&mut i, &mut col, 2);
                } else {
                    return Err(LexError {
                        pos,
                        msg: "expected `^d`".to_string(),
                    });
                }
            }
            '\\' => {
                let mut j = i + 1;
                while j < n && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                let word: String = chars[i + 1..j].iter().collect();
                match word.as_str() {
                    "exists" => push!(Tok::Exists, pos),
                    "forall" => push!(Tok::Forall, pos),
                    _ => {
                        return Err(LexError {
                            pos,
                            msg: format!("unknown operator `\\{word}`"),
                        })
                    }
                }
                let k = j - i;
                advance(&mut i, &mut col, k);
            }
            '#' => {
                let mut j = i + 1;
                while j < n && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(LexError {
                        pos,
                        msg: "expected digits after `#`".to_string(),
                    });
                }
                let idx: u32 = chars[i + 1..j]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| LexError {
                        pos,
                        msg: "placeholder index out of range".to_string(),
                    })?;
                push!(Tok::Placeholder(idx), pos);
                let k = j - i;
                advance(&mut i, &mut col, k);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < n && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let numer: String = chars[i..j].iter().collect();
                let mut denom = String::new();
                // `p/q` is a single rational literal; no division operator exists.
                if chars.get(j) == Some(&'/') {
                    let mut k = j + 1;
                    while k < n && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(LexError {
                            pos,
                            msg: "expected denominator digits after `/`".to_string(),
                        });
                    }
                    denom = chars[j + 1..k].iter().collect();
                    j = k;
                }
                let p: BigInt = numer.parse().unwrap();
                let q: BigInt = if denom.is_empty() {
                    BigInt::from(1)
                } else {
                    denom.parse().unwrap()
                };
                if q == BigInt::from(0) {
                    return Err(LexError {
                        pos,
                        msg: "zero denominator in rational literal".to_string(),
                    });
                }
                push!(Tok::Number(Rat::new(p, q)), pos);
                let k = j - i;
                advance(&mut i, &mut col, k);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < n && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                push!(Tok::Ident(word), pos);
                let k = j - i;
                advance(&mut i, &mut col, k);
            }
            '/' => {
                return Err(LexError {
                    pos,
                    msg: "no division operator; rational literals are written `p/q`".to_string(),
                })
            }
            c => {
                return Err(LexError {
                    pos,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(SpannedTok {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
