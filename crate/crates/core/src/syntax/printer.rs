//! Pretty printer emitting minimal parentheses.
//!
//! Inverse of the parser on the corpus: `parse(format(a)) == a`. Resugaring
//! hints are honored when the node still has the matching desugared shape and
//! ignored otherwise.

use super::ast::{AndHint, DualHint, Formula, Game, GeqHint, NotHint, Term};
use crate::rat::{format_rat, is_negative};

pub fn format_term(t: &Term) -> String {
    let mut s = String::new();
    term(t, 1, &mut s);
    s
}

pub fn format_formula(f: &Formula) -> String {
    let mut s = String::new();
    formula(f, 1, &mut s);
    s
}

pub fn format_game(g: &Game) -> String {
    let mut s = String::new();
    game(g, 1, &mut s);
    s
}

// Term precedence: 1 add/sub, 2 mul, 3 unary minus, 4 atom.
fn term(t: &Term, min: u8, out: &mut String) {
    let prec = match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Mul(..) => 2,
        Term::Neg(..) => 3,
        Term::Var(_) | Term::Lit(_) => 4,
    };
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Lit(r) => out.push_str(&format_rat(r)),
        Term::Neg(a) => {
            out.push('-');
            if starts_with_minus(a) {
                out.push('(');
                term(a, 1, out);
                out.push(')');
            } else {
                term(a, 3, out);
            }
        }
        Term::Add(a, b) => {
            term(a, 1, out);
            out.push('+');
            term(b, 2, out);
        }
        Term::Sub(a, b) => {
            term(a, 1, out);
            out.push('-');
            // `a--b` would lex as demonic choice.
            if starts_with_minus(b) {
                out.push('(');
                term(b, 1, out);
                out.push(')');
            } else {
                term(b, 2, out);
            }
        }
        Term::Mul(a, b) => {
            term(a, 2, out);
            out.push('*');
            term(b, 3, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn starts_with_minus(t: &Term) -> bool {
    matches!(t, Term::Neg(_)) || matches!(t, Term::Lit(r) if is_negative(r))
}

// Formula precedence: 1 iff, 2 implies, 3 or, 4 and, 5 unary, 6 atom.
fn formula(f: &Formula, min: u8, out: &mut String) {
    if let Some(s) = atom_sugar(f) {
        // Comparisons and constants are atoms regardless of their core shape.
        out.push_str(&s);
        return;
    }
    let prec = formula_prec(f);
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Pred(p, args) => {
            out.push_str(p);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                term(a, 1, out);
            }
            out.push(')');
        }
        Formula::Geq(a, b, _) => {
            term(a, 1, out);
            out.push_str(">=");
            term(b, 1, out);
        }
        Formula::And(a, b, hint) => {
            if *hint == AndHint::Iff {
                if let Some((l, r)) = f.as_iff() {
                    formula(l, 2, out);
                    out.push_str(" <-> ");
                    formula(r, 2, out);
                    if paren {
                        out.push(')');
                    }
                    return;
                }
            }
            formula(a, 4, out);
            out.push_str(" & ");
            formula(b, 5, out);
        }
        Formula::Not(inner, hint) => {
            match hint {
                NotHint::Or => {
                    if let Some((a, b)) = f.as_or() {
                        formula(a, 3, out);
                        out.push_str(" | ");
                        formula(b, 4, out);
                        if paren {
                            out.push(')');
                        }
                        return;
                    }
                }
                NotHint::Implies => {
                    if let Some((a, b)) = f.as_implies() {
                        formula(a, 3, out);
                        out.push_str(" -> ");
                        formula(b, 2, out);
                        if paren {
                            out.push(')');
                        }
                        return;
                    }
                }
                NotHint::Forall => {
                    if let Some((x, body)) = f.as_forall() {
                        out.push_str("\\forall ");
                        out.push_str(x);
                        out.push(' ');
                        formula(body, 5, out);
                        if paren {
                            out.push(')');
                        }
                        return;
                    }
                }
                _ => {}
            }
            out.push('!');
            formula(inner, 5, out);
        }
        Formula::Exists(x, body) => {
            out.push_str("\\exists ");
            out.push_str(x);
            out.push(' ');
            formula(body, 5, out);
        }
        Formula::Diamond(g, body) => {
            out.push('<');
            game(g, 1, out);
            out.push_str("> ");
            formula(body, 5, out);
        }
        Formula::Box_(g, body) => {
            out.push('[');
            game(g, 1, out);
            out.push_str("] ");
            formula(body, 5, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Pred(..) | Formula::Geq(..) => 6,
        Formula::And(_, _, hint) => {
            if *hint == AndHint::Iff && f.as_iff().is_some() {
                1
            } else {
                4
            }
        }
        Formula::Not(_, hint) => match hint {
            NotHint::Or if f.as_or().is_some() => 3,
            NotHint::Implies if f.as_implies().is_some() => 2,
            _ => 5,
        },
        Formula::Exists(..) | Formula::Diamond(..) | Formula::Box_(..) => 5,
    }
}

/// Renders comparison sugar and boolean constants, which print as atoms.
fn atom_sugar(f: &Formula) -> Option<String> {
    match f {
        Formula::Geq(a, b, GeqHint::True) => {
            if *a == Term::int(0) && *b == Term::int(0) {
                return Some("true".to_string());
            }
        }
        Formula::Geq(b, a, GeqHint::Leq) => {
            return Some(format!("{}<={}", format_term(a), format_term(b)));
        }
        Formula::Not(inner, NotHint::False) => {
            if **inner == Formula::tru() {
                return Some("false".to_string());
            }
        }
        Formula::Not(inner, NotHint::Lt) => {
            if let Formula::Geq(a, b, _) = inner.as_ref() {
                return Some(format!("{}<{}", format_term(a), format_term(b)));
            }
        }
        Formula::Not(inner, NotHint::Gt) => {
            if let Formula::Geq(b, a, _) = inner.as_ref() {
                return Some(format!("{}>{}", format_term(a), format_term(b)));
            }
        }
        Formula::Not(inner, NotHint::Neq) => {
            if let Formula::And(l, r, _) = inner.as_ref() {
                if let (Formula::Geq(a1, b1, _), Formula::Geq(b2, a2, _)) = (l.as_ref(), r.as_ref())
                {
                    if a1 == a2 && b1 == b2 {
                        return Some(format!("{}!={}", format_term(a1), format_term(b1)));
                    }
                }
            }
        }
        Formula::And(l, r, AndHint::Eq) => {
            if let (Formula::Geq(a1, b1, _), Formula::Geq(b2, a2, _)) = (l.as_ref(), r.as_ref()) {
                if a1 == a2 && b1 == b2 {
                    return Some(format!("{}={}", format_term(a1), format_term(b1)));
                }
            }
        }
        _ => {}
    }
    None
}

// Game precedence: 1 choice, 2 seq, 3 postfix, 4 atom.
fn game(g: &Game, min: u8, out: &mut String) {
    if let Game::Dual(_, DualHint::DemonicChoice) = g {
        if let Some((a, b)) = g.as_demonic_choice() {
            let paren = min > 1;
            if paren {
                out.push('(');
            }
            game(a, 1, out);
            out.push_str(" -- ");
            game(b, 2, out);
            if paren {
                out.push(')');
            }
            return;
        }
    }
    let prec = match g {
        Game::Choice(..) => 1,
        Game::Seq(..) => 2,
        Game::Star(..) | Game::Dual(..) => 3,
        Game::Assign(..) | Game::Ode(_) | Game::Test(_) => 4,
    };
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match g {
        Game::Assign(x, t) => {
            out.push_str(x);
            out.push_str(":=");
            term(t, 1, out);
        }
        Game::Ode(sys) => {
            out.push('{');
            for (i, (x, rhs)) in sys.eqs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(x);
                out.push_str("'=");
                term(rhs, 1, out);
            }
            if let Some(d) = &sys.domain {
                out.push_str(" & ");
                formula(d, 1, out);
            }
            out.push('}');
        }
        Game::Test(f) => {
            // A nullary-predicate test is a schematic atomic game and prints
            // as its bare name.
            if let Formula::Pred(name, args) = f.as_ref() {
                if args.is_empty() {
                    out.push_str(name);
                    if paren {
                        out.push(')');
                    }
                    return;
                }
            }
            out.push('?');
            if test_body_is_safe(f) {
                formula(f, 1, out);
            } else {
                out.push('(');
                formula(f, 1, out);
                out.push(')');
            }
        }
        Game::Choice(a, b) => {
            game(a, 1, out);
            out.push_str(" ++ ");
            game(b, 2, out);
        }
        Game::Seq(a, b) => {
            game(a, 2, out);
            out.push_str("; ");
            game(b, 3, out);
        }
        Game::Star(a) => {
            postfix_operand(a, out);
            out.push('*');
        }
        Game::Dual(a, _) => {
            postfix_operand(a, out);
            out.push_str("^d");
        }
    }
    if paren {
        out.push(')');
    }
}

/// Assignments and tests end in a term, which would swallow a following `*`
/// as multiplication; parenthesize them under postfix operators. Schematic
/// atomic games (bare symbols) are safe.
fn postfix_operand(g: &Game, out: &mut String) {
    let bare_symbol = matches!(g, Game::Test(f) if matches!(f.as_ref(), Formula::Pred(_, args) if args.is_empty()));
    if !bare_symbol && matches!(g, Game::Assign(..) | Game::Test(_)) {
        out.push('(');
        game(g, 1, out);
        out.push(')');
    } else {
        game(g, 3, out);
    }
}

/// A test body prints bare only when its rendering cannot be extended by the
/// following token stream (comparisons, constants, predicate applications).
fn test_body_is_safe(f: &Formula) -> bool {
    atom_sugar(f).is_some() || matches!(f, Formula::Pred(..) | Formula::Geq(..))
}
