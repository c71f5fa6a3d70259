//! Abstract syntax trees for terms, formulas, and games.
//!
//! Formulas and games are always stored in desugared core form. Derived
//! operators (`|`, `->`, `<->`, `\forall`, `=`, `!=`, `<=`, `<`, `>`, `true`,
//! `false`, and demonic choice `--`) desugar on construction and carry a
//! resugaring hint so the printer can reproduce the surface form. Hints are
//! formatting metadata only: equality and hashing ignore them.

use crate::rat::Rat;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

/// Polynomial term with rational coefficients. No division operator exists;
/// rational literals are kept in lowest terms with positive denominator by
/// the underlying representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Lit(Rat),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn lit(r: Rat) -> Term {
        Term::Lit(r)
    }

    pub fn int(n: i64) -> Term {
        Term::Lit(crate::rat::rat(n))
    }

    pub fn add(self, other: Term) -> Term {
        Term::Add(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: Term) -> Term {
        Term::Sub(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Term) -> Term {
        Term::Mul(Box::new(self), Box::new(other))
    }

    pub fn neg(self) -> Term {
        Term::Neg(Box::new(self))
    }

    /// Variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Lit(_) => {}
            Term::Neg(t) => t.collect_vars(out),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Resugaring hint on a [`Formula::Geq`] node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeqHint {
    #[default]
    Plain,
    /// `Geq(b, a)` printed as `a <= b`.
    Leq,
    /// `Geq(0, 0)` printed as `true`.
    True,
}

/// Resugaring hint on a [`Formula::Not`] node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NotHint {
    #[default]
    Plain,
    /// `Not(And(Not a, Not b))` printed as `a | b`.
    Or,
    /// `Not(And(a, Not b))` printed as `a -> b`.
    Implies,
    /// `Not(Geq(a, b))` printed as `a < b`.
    Lt,
    /// `Not(Geq(b, a))` printed as `a > b`.
    Gt,
    /// `Not(Eq-pair)` printed as `a != b`.
    Neq,
    /// `Not(Exists(x, Not f))` printed as `\forall x f`.
    Forall,
    /// `Not(true)` printed as `false`.
    False,
}

/// Resugaring hint on a [`Formula::And`] node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AndHint {
    #[default]
    Plain,
    /// `And(Geq(a,b), Geq(b,a))` printed as `a = b`.
    Eq,
    /// `And(Implies(a,b), Implies(b,a))` printed as `a <-> b`.
    Iff,
}

/// Resugaring hint on a [`Game::Dual`] node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualHint {
    #[default]
    Plain,
    /// `Dual(Choice(Dual a, Dual b))` printed as `a -- b`.
    DemonicChoice,
}

/// Game-logic formula in desugared core form: predicate applications,
/// `>=`-comparisons, negation, conjunction, existential quantification, and
/// the two winning-strategy modalities. `[a]f` is a primitive constructor so
/// proofs can cite the determinacy axiom explicitly.
#[derive(Debug, Clone)]
pub enum Formula {
    Pred(String, Vec<Term>),
    Geq(Term, Term, GeqHint),
    Not(Box<Formula>, NotHint),
    And(Box<Formula>, Box<Formula>, AndHint),
    Exists(String, Box<Formula>),
    Diamond(Box<Game>, Box<Formula>),
    Box_(Box<Game>, Box<Formula>),
}

/// Hybrid game in desugared core form: the seven core constructors only.
/// Demonic choice `a -- b` desugars to `(a^d ++ b^d)^d`.
#[derive(Debug, Clone)]
pub enum Game {
    Assign(String, Term),
    /// `{x'=t, ...}` optionally constrained by an evolution domain `& f`.
    /// Each variable is bound at most once by the system.
    Ode(OdeSystem),
    Test(Box<Formula>),
    Choice(Box<Game>, Box<Game>),
    Seq(Box<Game>, Box<Game>),
    Star(Box<Game>),
    Dual(Box<Game>, DualHint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    /// `(variable, right-hand side)` pairs in source order.
    pub eqs: Vec<(String, Term)>,
    /// Evolution domain constraint; `None` when unconstrained.
    pub domain: Option<Formula>,
}

impl OdeSystem {
    pub fn new(eqs: Vec<(String, Term)>, domain: Option<Formula>) -> OdeSystem {
        OdeSystem { eqs, domain }
    }

    /// The domain is absent or syntactically `true`.
    pub fn domain_is_trivial(&self) -> bool {
        match &self.domain {
            None => true,
            Some(f) => *f == Formula::tru(),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        use Formula::*;
        match (self, other) {
            (Pred(p, a), Pred(q, b)) => p == q && a == b,
            (Geq(a1, b1, _), Geq(a2, b2, _)) => a1 == a2 && b1 == b2,
            (Not(a, _), Not(b, _)) => a == b,
            (And(a1, b1, _), And(a2, b2, _)) => a1 == a2 && b1 == b2,
            (Exists(x, a), Exists(y, b)) => x == y && a == b,
            (Diamond(g, a), Diamond(h, b)) | (Box_(g, a), Box_(h, b)) => g == h && a == b,
            _ => false,
        }
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        use Formula::*;
        std::mem::discriminant(self).hash(state);
        match self {
            Pred(p, a) => {
                p.hash(state);
                a.hash(state);
            }
            Geq(a, b, _) => {
                a.hash(state);
                b.hash(state);
            }
            Not(a, _) => a.hash(state),
            And(a, b, _) => {
                a.hash(state);
                b.hash(state);
            }
            Exists(x, a) => {
                x.hash(state);
                a.hash(state);
            }
            Diamond(g, a) | Box_(g, a) => {
                g.hash(state);
                a.hash(state);
            }
        }
    }
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        use Game::*;
        match (self, other) {
            (Assign(x, t), Assign(y, s)) => x == y && t == s,
            (Ode(a), Ode(b)) => a == b,
            (Test(a), Test(b)) => a == b,
            (Choice(a1, b1), Choice(a2, b2)) | (Seq(a1, b1), Seq(a2, b2)) => {
                a1 == a2 && b1 == b2
            }
            (Star(a), Star(b)) => a == b,
            (Dual(a, _), Dual(b, _)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Game {}

impl Hash for Game {
    fn hash<H: Hasher>(&self, state: &mut H) {
        use Game::*;
        std::mem::discriminant(self).hash(state);
        match self {
            Assign(x, t) => {
                x.hash(state);
                t.hash(state);
            }
            Ode(sys) => {
                sys.eqs.hash(state);
                if let Some(d) = &sys.domain {
                    d.hash(state);
                }
            }
            Test(f) => f.hash(state),
            Choice(a, b) | Seq(a, b) => {
                a.hash(state);
                b.hash(state);
            }
            Star(a) => a.hash(state),
            Dual(a, _) => a.hash(state),
        }
    }
}

impl Formula {
    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Pred(name.into(), args)
    }

    pub fn geq(a: Term, b: Term) -> Formula {
        Formula::Geq(a, b, GeqHint::Plain)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f), NotHint::Plain)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b), AndHint::Plain)
    }

    pub fn exists(x: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(f))
    }

    pub fn diamond(g: Game, f: Formula) -> Formula {
        Formula::Diamond(Box::new(g), Box::new(f))
    }

    pub fn boxm(g: Game, f: Formula) -> Formula {
        Formula::Box_(Box::new(g), Box::new(f))
    }

    /// `true`, stored as `0 >= 0`.
    pub fn tru() -> Formula {
        Formula::Geq(Term::int(0), Term::int(0), GeqHint::True)
    }

    /// `false`, stored as `!(0 >= 0)`.
    pub fn fals() -> Formula {
        Formula::Not(Box::new(Formula::tru()), NotHint::False)
    }

    /// `a | b`, stored as `!(!a & !b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Not(
            Box::new(Formula::And(
                Box::new(Formula::not(a)),
                Box::new(Formula::not(b)),
                AndHint::Plain,
            )),
            NotHint::Or,
        )
    }

    /// `a -> b`, stored as `!(a & !b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Not(
            Box::new(Formula::And(
                Box::new(a),
                Box::new(Formula::not(b)),
                AndHint::Plain,
            )),
            NotHint::Implies,
        )
    }

    /// `a <-> b`, stored as `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::And(
            Box::new(Formula::implies(a.clone(), b.clone())),
            Box::new(Formula::implies(b, a)),
            AndHint::Iff,
        )
    }

    /// `\forall x f`, stored as `!\exists x !f`.
    pub fn forall(x: impl Into<String>, f: Formula) -> Formula {
        Formula::Not(
            Box::new(Formula::Exists(x.into(), Box::new(Formula::not(f)))),
            NotHint::Forall,
        )
    }

    /// `a = b`, stored as `a >= b & b >= a`.
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::And(
            Box::new(Formula::geq(a.clone(), b.clone())),
            Box::new(Formula::geq(b, a)),
            AndHint::Eq,
        )
    }

    /// `a != b`, stored as `!(a = b)`.
    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::Not(Box::new(Formula::eq(a, b)), NotHint::Neq)
    }

    /// `a <= b`, stored as `b >= a`.
    pub fn leq(a: Term, b: Term) -> Formula {
        Formula::Geq(b, a, GeqHint::Leq)
    }

    /// `a < b`, stored as `!(a >= b)`.
    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Not(Box::new(Formula::geq(a, b)), NotHint::Lt)
    }

    /// `a > b`, stored as `!(b >= a)`.
    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::Not(Box::new(Formula::geq(b, a)), NotHint::Gt)
    }

    /// Destructures an implication-shaped formula `!(a & !b)` into `(a, b)`.
    pub fn as_implies(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner, _) = self {
            if let Formula::And(a, b, _) = inner.as_ref() {
                if let Formula::Not(bb, _) = b.as_ref() {
                    return Some((a, bb));
                }
            }
        }
        None
    }

    /// Destructures a disjunction-shaped formula `!(!a & !b)` into `(a, b)`.
    pub fn as_or(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner, _) = self {
            if let Formula::And(a, b, _) = inner.as_ref() {
                if let (Formula::Not(aa, _), Formula::Not(bb, _)) = (a.as_ref(), b.as_ref()) {
                    return Some((aa, bb));
                }
            }
        }
        None
    }

    /// Destructures an equivalence-shaped formula into `(a, b)`.
    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::And(l, r, _) = self {
            let (a1, b1) = l.as_implies()?;
            let (b2, a2) = r.as_implies()?;
            if a1 == a2 && b1 == b2 {
                return Some((a1, b1));
            }
        }
        None
    }

    /// Destructures a universally quantified formula `!\exists x !f` into `(x, f)`.
    pub fn as_forall(&self) -> Option<(&str, &Formula)> {
        if let Formula::Not(inner, _) = self {
            if let Formula::Exists(x, body) = inner.as_ref() {
                if let Formula::Not(f, _) = body.as_ref() {
                    return Some((x, f));
                }
            }
        }
        None
    }
}

impl Game {
    pub fn assign(x: impl Into<String>, t: Term) -> Game {
        Game::Assign(x.into(), t)
    }

    pub fn ode(eqs: Vec<(String, Term)>, domain: Option<Formula>) -> Game {
        Game::Ode(OdeSystem::new(eqs, domain))
    }

    pub fn test(f: Formula) -> Game {
        Game::Test(Box::new(f))
    }

    pub fn choice(a: Game, b: Game) -> Game {
        Game::Choice(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Game, b: Game) -> Game {
        Game::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(a: Game) -> Game {
        Game::Star(Box::new(a))
    }

    pub fn dual(a: Game) -> Game {
        Game::Dual(Box::new(a), DualHint::Plain)
    }

    /// Demonic choice `a -- b`, stored as `(a^d ++ b^d)^d`.
    pub fn demonic_choice(a: Game, b: Game) -> Game {
        Game::Dual(
            Box::new(Game::choice(Game::dual(a), Game::dual(b))),
            DualHint::DemonicChoice,
        )
    }

    /// Recognizes the demonic-choice shape `(a^d ++ b^d)^d`, hint or not.
    pub fn as_demonic_choice(&self) -> Option<(&Game, &Game)> {
        if let Game::Dual(inner, _) = self {
            if let Game::Choice(a, b) = inner.as_ref() {
                if let (Game::Dual(aa, _), Game::Dual(bb, _)) = (a.as_ref(), b.as_ref()) {
                    return Some((aa, bb));
                }
            }
        }
        None
    }

    /// True when the game contains no differential equation.
    pub fn is_ode_free(&self) -> bool {
        match self {
            Game::Assign(..) => true,
            Game::Ode(_) => false,
            Game::Test(f) => f.is_ode_free(),
            Game::Choice(a, b) | Game::Seq(a, b) => a.is_ode_free() && b.is_ode_free(),
            Game::Star(a) | Game::Dual(a, _) => a.is_ode_free(),
        }
    }

    /// True when the game contains no dual operator.
    pub fn is_dual_free(&self) -> bool {
        match self {
            Game::Assign(..) | Game::Ode(_) => true,
            Game::Test(f) => f.is_dual_free(),
            Game::Choice(a, b) | Game::Seq(a, b) => a.is_dual_free() && b.is_dual_free(),
            Game::Star(a) => a.is_dual_free(),
            Game::Dual(..) => false,
        }
    }
}

impl Formula {
    pub fn is_ode_free(&self) -> bool {
        match self {
            Formula::Pred(..) | Formula::Geq(..) => true,
            Formula::Not(a, _) => a.is_ode_free(),
            Formula::And(a, b, _) => a.is_ode_free() && b.is_ode_free(),
            Formula::Exists(_, a) => a.is_ode_free(),
            Formula::Diamond(g, a) | Formula::Box_(g, a) => g.is_ode_free() && a.is_ode_free(),
        }
    }

    pub fn is_dual_free(&self) -> bool {
        match self {
            Formula::Pred(..) | Formula::Geq(..) => true,
            Formula::Not(a, _) => a.is_dual_free(),
            Formula::And(a, b, _) => a.is_dual_free() && b.is_dual_free(),
            Formula::Exists(_, a) => a.is_dual_free(),
            Formula::Diamond(g, a) | Formula::Box_(g, a) => g.is_dual_free() && a.is_dual_free(),
        }
    }
}
