//! Recursive-descent parser for terms, formulas, and games.
//!
//! Precedence, tightest first:
//! formulas — `!`/quantifiers/modalities, `&`, `|`, `->` (right-assoc), `<->`;
//! games — postfix `*`/`^d`, `;`, then `++`/`--` at equal precedence;
//! terms — unary `-`, `*`, then `+`/`-`.

use super::ast::{Formula, Game, Term};
use super::lexer::{lex, Pos, SpannedTok, Tok};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    fn at(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        }
    }
}

/// What to parse from a source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseKind {
    Formula,
    Game,
    Term,
}

/// Parse result for [`parse`].
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Formula(Formula),
    Game(Game),
    Term(Term),
}

/// Parses `text` as a formula, game, or term in desugared core form.
pub fn parse(text: &str, kind: ParseKind) -> Result<Parsed, ParseError> {
    match kind {
        ParseKind::Formula => parse_formula(text).map(Parsed::Formula),
        ParseKind::Game => parse_game(text).map(Parsed::Game),
        ParseKind::Term => parse_term(text).map(Parsed::Term),
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, false)?.run(|p| p.formula())
}

pub fn parse_game(text: &str) -> Result<Game, ParseError> {
    Parser::new(text, false)?.run(|p| p.game())
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    Parser::new(text, false)?.run(|p| p.term())
}

/// Parses a uniform-substitution template: a formula in which `#1..#k`
/// placeholders may occur in term positions.
pub fn parse_template(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, true)?.run(|p| p.formula())
}

/// Name used to smuggle placeholder `#k` through [`Term::Var`].
pub fn placeholder_name(k: u32) -> String {
    format!("#{k}")
}

/// Inverse of [`placeholder_name`].
pub fn placeholder_index(name: &str) -> Option<u32> {
    name.strip_prefix('#').and_then(|s| s.parse().ok())
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    allow_placeholders: bool,
}

impl Parser {
    fn new(text: &str, allow_placeholders: bool) -> Result<Parser, ParseError> {
        let toks = lex(text).map_err(|e| ParseError::at(e.pos, e.msg))?;
        Ok(Parser {
            toks,
            pos: 0,
            allow_placeholders,
        })
    }

    fn run<T>(mut self, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let out = f(&mut self)?;
        self.expect_eof()?;
        Ok(out)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::at(
                self.here(),
                format!("expected {t}, found {}", self.peek()),
            ))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(ParseError::at(
                self.here(),
                format!("unexpected trailing {}", self.peek()),
            ))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(x)
            }
            other => Err(ParseError::at(
                self.here(),
                format!("expected identifier, found {other}"),
            )),
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.f_iff()
    }

    fn f_iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.f_implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.f_implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn f_implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.f_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.f_implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn f_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.f_and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.f_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn f_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.f_unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.f_unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn f_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.f_unary()?))
            }
            Tok::Exists => {
                self.bump();
                let x = self.ident()?;
                Ok(Formula::exists(x, self.f_unary()?))
            }
            Tok::Forall => {
                self.bump();
                let x = self.ident()?;
                Ok(Formula::forall(x, self.f_unary()?))
            }
            Tok::Lt => {
                self.bump();
                let g = self.game()?;
                self.expect(Tok::Gt)?;
                Ok(Formula::diamond(g, self.f_unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let g = self.game()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::boxm(g, self.f_unary()?))
            }
            _ => self.f_atom(),
        }
    }

    fn f_atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(word) if word == "true" => {
                self.bump();
                Ok(Formula::tru())
            }
            Tok::Ident(word) if word == "false" => {
                self.bump();
                Ok(Formula::fals())
            }
            Tok::Ident(name) if self.peek2() == &Tok::LParen => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if self.peek() != &Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Formula::pred(name, args))
            }
            _ => {
                // Either a comparison between terms, a bare nullary predicate,
                // or a parenthesized formula. Try the term route first and
                // rewind if it does not pan out.
                let save = self.pos;
                if let Ok(lhs) = self.term() {
                    if let Some(cmp) = self.comparison_op() {
                        let rhs = self.term()?;
                        return Ok(cmp(lhs, rhs));
                    }
                    if let Term::Var(name) = lhs {
                        if placeholder_index(&name).is_none() {
                            return Ok(Formula::pred(name, vec![]));
                        }
                    }
                    self.pos = save;
                } else {
                    self.pos = save;
                }
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(f)
                } else {
                    Err(ParseError::at(
                        self.here(),
                        format!("expected formula, found {}", self.peek()),
                    ))
                }
            }
        }
    }

    /// Consumes a comparison operator, returning the matching constructor.
    #[allow(clippy::type_complexity)]
    fn comparison_op(&mut self) -> Option<fn(Term, Term) -> Formula> {
        let f: fn(Term, Term) -> Formula = match self.peek() {
            Tok::Eq => Formula::eq,
            Tok::Neq => Formula::neq,
            Tok::Geq => Formula::geq,
            Tok::Leq => Formula::leq,
            Tok::Gt => Formula::gt,
            Tok::Lt => Formula::lt,
            _ => return None,
        };
        self.bump();
        Some(f)
    }

    // ---- games ----

    fn game(&mut self) -> Result<Game, ParseError> {
        let mut lhs = self.g_seq()?;
        loop {
            if self.eat(&Tok::ChoicePlus) {
                let rhs = self.g_seq()?;
                lhs = Game::choice(lhs, rhs);
            } else if self.eat(&Tok::ChoiceMinus) {
                let rhs = self.g_seq()?;
                lhs = Game::demonic_choice(lhs, rhs);
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn g_seq(&mut self) -> Result<Game, ParseError> {
        let mut lhs = self.g_postfix()?;
        while self.eat(&Tok::Semi) {
            let rhs = self.g_postfix()?;
            lhs = Game::seq(lhs, rhs);
        }
        Ok(lhs)
    }

    fn g_postfix(&mut self) -> Result<Game, ParseError> {
        let mut g = self.g_atom()?;
        loop {
            if self.eat(&Tok::StarOp) {
                g = Game::star(g);
            } else if self.eat(&Tok::DualOp) {
                g = Game::dual(g);
            } else {
                break;
            }
        }
        Ok(g)
    }

    fn g_atom(&mut self) -> Result<Game, ParseError> {
        match self.peek().clone() {
            Tok::Question => {
                self.bump();
                let f = self.formula()?;
                Ok(Game::test(f))
            }
            Tok::LBrace => {
                self.bump();
                let mut eqs = Vec::new();
                loop {
                    let x = self.ident()?;
                    self.expect(Tok::Prime)?;
                    self.expect(Tok::Eq)?;
                    let rhs = self.term()?;
                    if eqs.iter().any(|(y, _)| *y == x) {
                        return Err(ParseError::at(
                            self.here(),
                            format!("variable `{x}` bound twice by differential equation system"),
                        ));
                    }
                    eqs.push((x, rhs));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                let domain = if self.eat(&Tok::Amp) {
                    Some(self.formula()?)
                } else {
                    None
                };
                self.expect(Tok::RBrace)?;
                Ok(Game::ode(eqs, domain))
            }
            Tok::LParen => {
                self.bump();
                let g = self.game()?;
                self.expect(Tok::RParen)?;
                Ok(g)
            }
            Tok::Ident(x) if self.peek2() == &Tok::Assign => {
                self.bump();
                self.bump();
                let t = self.term()?;
                Ok(Game::assign(x, t))
            }
            // A bare identifier is a schematic atomic game, read as the test
            // of a nullary predicate of the same name.
            Tok::Ident(x) if x != "true" && x != "false" => {
                self.bump();
                Ok(Game::test(Formula::pred(x, vec![])))
            }
            other => Err(ParseError::at(
                self.here(),
                format!("expected game, found {other}"),
            )),
        }
    }

    // ---- terms ----

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.t_mul()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.t_mul()?;
                lhs = lhs.add(rhs);
            } else if self.eat(&Tok::Minus) {
                let rhs = self.t_mul()?;
                lhs = lhs.sub(rhs);
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn t_mul(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.t_unary()?;
        while self.eat(&Tok::StarOp) {
            let rhs = self.t_unary()?;
            lhs = lhs.mul(rhs);
        }
        Ok(lhs)
    }

    fn t_unary(&mut self) -> Result<Term, ParseError> {
        if self.eat(&Tok::Minus) {
            // Fold negated literals so `-3` is a literal, keeping literal
            // printing invertible.
            Ok(match self.t_unary()? {
                Term::Lit(r) => Term::Lit(-r),
                t => t.neg(),
            })
        } else {
            self.t_atom()
        }
    }

    fn t_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Number(r) => {
                self.bump();
                Ok(Term::Lit(r))
            }
            Tok::Ident(x) if x != "true" && x != "false" => {
                self.bump();
                Ok(Term::Var(x))
            }
            Tok::Placeholder(k) => {
                if !self.allow_placeholders {
                    return Err(ParseError::at(
                        self.here(),
                        "placeholders are only allowed in substitution templates",
                    ));
                }
                self.bump();
                Ok(Term::Var(placeholder_name(k)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => Err(ParseError::at(
                self.here(),
                format!("expected term, found {other}"),
            )),
        }
    }
}
