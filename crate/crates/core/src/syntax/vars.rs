//! Binding analysis: free and bound variable sets.
//!
//! A game binds a variable when some assignment or differential equation
//! anywhere inside writes it. Free variables are the read occurrences;
//! quantifiers remove their variable from the free set, modalities do not
//! (the conservative direction for admissibility checks).

use super::ast::{Formula, Game, Term};
use std::collections::BTreeSet;

/// Free and bound variables of an AST.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarSets {
    pub free: BTreeSet<String>,
    pub bound: BTreeSet<String>,
}

impl VarSets {
    /// Every variable occurring anywhere (free or bound).
    pub fn all(&self) -> BTreeSet<String> {
        self.free.union(&self.bound).cloned().collect()
    }
}

pub fn term_vars(t: &Term) -> VarSets {
    VarSets {
        free: t.vars(),
        bound: BTreeSet::new(),
    }
}

pub fn game_vars(g: &Game) -> VarSets {
    let mut vs = VarSets::default();
    collect_game(g, &mut vs);
    vs
}

pub fn formula_vars(f: &Formula) -> VarSets {
    let mut vs = VarSets::default();
    collect_formula(f, &mut vs);
    vs
}

fn collect_game(g: &Game, vs: &mut VarSets) {
    match g {
        Game::Assign(x, t) => {
            vs.bound.insert(x.clone());
            t.collect_vars(&mut vs.free);
        }
        Game::Ode(sys) => {
            for (x, rhs) in &sys.eqs {
                vs.bound.insert(x.clone());
                // The initial value of an evolved variable is read.
                vs.free.insert(x.clone());
                rhs.collect_vars(&mut vs.free);
            }
            if let Some(d) = &sys.domain {
                collect_formula(d, vs);
            }
        }
        Game::Test(f) => collect_formula(f, vs),
        Game::Choice(a, b) | Game::Seq(a, b) => {
            collect_game(a, vs);
            collect_game(b, vs);
        }
        Game::Star(a) | Game::Dual(a, _) => collect_game(a, vs),
    }
}

fn collect_formula(f: &Formula, vs: &mut VarSets) {
    match f {
        Formula::Pred(_, args) => {
            for a in args {
                a.collect_vars(&mut vs.free);
            }
        }
        Formula::Geq(a, b, _) => {
            a.collect_vars(&mut vs.free);
            b.collect_vars(&mut vs.free);
        }
        Formula::Not(a, _) => collect_formula(a, vs),
        Formula::And(a, b, _) => {
            collect_formula(a, vs);
            collect_formula(b, vs);
        }
        Formula::Exists(x, body) => {
            let mut inner = VarSets::default();
            collect_formula(body, &mut inner);
            inner.free.remove(x);
            vs.free.extend(inner.free);
            vs.bound.extend(inner.bound);
            vs.bound.insert(x.clone());
        }
        Formula::Diamond(g, body) | Formula::Box_(g, body) => {
            collect_game(g, vs);
            collect_formula(body, vs);
        }
    }
}

/// Predicate symbols occurring in a formula, with their arities.
pub fn predicate_arities(f: &Formula) -> std::collections::BTreeMap<String, usize> {
    let mut out = std::collections::BTreeMap::new();
    collect_preds_formula(f, &mut out);
    out
}

fn collect_preds_formula(f: &Formula, out: &mut std::collections::BTreeMap<String, usize>) {
    match f {
        Formula::Pred(p, args) => {
            out.insert(p.clone(), args.len());
        }
        Formula::Geq(..) => {}
        Formula::Not(a, _) => collect_preds_formula(a, out),
        Formula::And(a, b, _) => {
            collect_preds_formula(a, out);
            collect_preds_formula(b, out);
        }
        Formula::Exists(_, a) => collect_preds_formula(a, out),
        Formula::Diamond(g, a) | Formula::Box_(g, a) => {
            collect_preds_game(g, out);
            collect_preds_formula(a, out);
        }
    }
}

fn collect_preds_game(g: &Game, out: &mut std::collections::BTreeMap<String, usize>) {
    match g {
        Game::Assign(..) => {}
        Game::Ode(sys) => {
            if let Some(d) = &sys.domain {
                collect_preds_formula(d, out);
            }
        }
        Game::Test(f) => collect_preds_formula(f, out),
        Game::Choice(a, b) | Game::Seq(a, b) => {
            collect_preds_game(a, out);
            collect_preds_game(b, out);
        }
        Game::Star(a) | Game::Dual(a, _) => collect_preds_game(a, out),
    }
}

/// Smallest natural-number suffix on `base` not occurring anywhere in `taken`.
/// Returns `base` itself when unused.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut k: u64 = 0;
    loop {
        let candidate = format!("{base}{k}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}
