//! Syntactic transformations: evolution-domain elimination, dual normal
//! form, translation into a fixpoint calculus, and the advance-notice
//! counter encoding.

use crate::poly::{term_to_poly, Poly};
use crate::rat::Rat;
use crate::semantics::{FiniteSpace, PredicateInterpretation, SemError, StateSet};
use crate::syntax::ast::{DualHint, Formula, Game, OdeSystem, Term};
use crate::syntax::{formula_vars, fresh_name, game_vars, rename_all, subst_term};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("expected exactly one repetition, found {0}")]
    MultipleStars(usize),
    #[error("no repetition to encode")]
    NoStar,
    #[error("the designated repetition is Demon's, not Angel's")]
    NotAngelsStar,
}

/// Replaces every constrained differential equation by the equivalent
/// there-and-back-again game: save the clock, evolve forward freely, let the
/// opponent copy the state and evolve it backwards, then survive the check
/// that the domain held at every time not before the start. Systems lacking
/// a clock first gain a fresh `t'=1`. The output has no evolution domains.
pub fn remove_evolution_domains(game: &Game) -> Game {
    let mut taken: BTreeSet<String> = game_vars(game).all();
    rewrite_game(game, &mut taken)
}

fn rewrite_game(game: &Game, taken: &mut BTreeSet<String>) -> Game {
    match game {
        Game::Assign(..) => game.clone(),
        Game::Test(f) => Game::Test(Box::new(rewrite_formula(f, taken))),
        Game::Choice(a, b) => Game::choice(rewrite_game(a, taken), rewrite_game(b, taken)),
        Game::Seq(a, b) => Game::seq(rewrite_game(a, taken), rewrite_game(b, taken)),
        Game::Star(a) => Game::star(rewrite_game(a, taken)),
        Game::Dual(a, h) => Game::Dual(Box::new(rewrite_game(a, taken)), *h),
        Game::Ode(sys) => {
            // Unconstrained systems (including an explicit `& true`) stay.
            if sys.domain_is_trivial() {
                return game.clone();
            }
            let psi = sys.domain.clone().expect("nontrivial domain");
            let mut eqs = sys.eqs.clone();
            // Locate a clock (rate exactly 1), augmenting when absent.
            let one = Poly::constant(crate::rat::rat(1));
            let clock = match eqs.iter().find(|(_, rhs)| term_to_poly(rhs) == one) {
                Some((c, _)) => c.clone(),
                None => {
                    let c = fresh_claim("t", taken);
                    eqs.push((c.clone(), Term::int(1)));
                    c
                }
            };
            let t0 = fresh_claim("t0", taken);
            // Copy vector: a single-variable system copies into plain `z`.
            let copies: Vec<(String, String)> = if eqs.len() == 1 {
                vec![(eqs[0].0.clone(), fresh_claim("z", taken))]
            } else {
                eqs.iter()
                    .map(|(v, _)| (v.clone(), fresh_claim(&format!("z{v}"), taken)))
                    .collect()
            };
            let rename_term_all = |t: &Term| -> Term {
                let mut out = t.clone();
                for (v, z) in &copies {
                    out = subst_term(&out, v, &Term::var(z.clone()));
                }
                out
            };
            let rename_formula_all = |f: &Formula| -> Formula {
                let mut out = f.clone();
                for (v, z) in &copies {
                    out = rename_all(&out, v, z);
                }
                out
            };
            let z_of = |v: &str| -> String {
                copies
                    .iter()
                    .find(|(orig, _)| orig == v)
                    .map(|(_, z)| z.clone())
                    .expect("copied variable")
            };

            let forward = Game::ode(eqs.clone(), None);
            let copy_chain = seq_chain(
                copies
                    .iter()
                    .map(|(v, z)| Game::assign(z.clone(), Term::var(v.clone())))
                    .collect(),
            );
            let backward = Game::ode(
                eqs.iter()
                    .map(|(v, rhs)| (z_of(v), rename_term_all(rhs).neg()))
                    .collect(),
                None,
            );
            let check = Game::test(Formula::implies(
                Formula::geq(Term::var(z_of(&clock)), Term::var(t0.clone())),
                rename_formula_all(&psi),
            ));
            seq_chain(vec![
                Game::assign(t0, Term::var(clock)),
                forward,
                Game::dual(Game::seq(copy_chain, backward)),
                check,
            ])
        }
    }
}

fn rewrite_formula(f: &Formula, taken: &mut BTreeSet<String>) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Geq(..) => f.clone(),
        Formula::Not(a, h) => Formula::Not(Box::new(rewrite_formula(a, taken)), *h),
        Formula::And(a, b, h) => Formula::And(
            Box::new(rewrite_formula(a, taken)),
            Box::new(rewrite_formula(b, taken)),
            *h,
        ),
        Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(rewrite_formula(a, taken))),
        Formula::Diamond(g, a) => Formula::diamond(
            rewrite_game(g, taken),
            rewrite_formula(a, taken),
        ),
        Formula::Box_(g, a) => Formula::boxm(
            rewrite_game(g, taken),
            rewrite_formula(a, taken),
        ),
    }
}

/// Applies evolution-domain elimination below every modality of a formula.
pub fn remove_evolution_domains_formula(f: &Formula) -> Formula {
    let mut taken = formula_vars(f).all();
    rewrite_formula(f, &mut taken)
}

fn fresh_claim(base: &str, taken: &mut BTreeSet<String>) -> String {
    let name = fresh_name(base, taken);
    taken.insert(name.clone());
    name
}

fn seq_chain(mut games: Vec<Game>) -> Game {
    let first = games.remove(0);
    games.into_iter().fold(first, Game::seq)
}

/// Pushes duals to atomic games: double duals collapse, assignment duals
/// drop, and compound duals distribute into demonic choice, sequential
/// composition of duals, and demonic repetition.
pub fn dual_normal_form(game: &Game) -> Game {
    match game {
        Game::Assign(..) | Game::Ode(_) | Game::Test(_) => game.clone(),
        Game::Choice(a, b) => Game::choice(dual_normal_form(a), dual_normal_form(b)),
        Game::Seq(a, b) => Game::seq(dual_normal_form(a), dual_normal_form(b)),
        Game::Star(a) => Game::star(dual_normal_form(a)),
        Game::Dual(a, _) => dualize(a),
    }
}

/// Normal form of `g^d`.
fn dualize(g: &Game) -> Game {
    match g {
        // Dual assignment is the assignment: deterministic moves have no
        // choices to hand over.
        Game::Assign(..) => g.clone(),
        Game::Ode(_) | Game::Test(_) => Game::dual(g.clone()),
        Game::Choice(a, b) => Game::demonic_choice(dualize(a), dualize(b)),
        Game::Seq(a, b) => Game::seq(dualize(a), dualize(b)),
        // (a*)^d is the demonic repetition of a^d.
        Game::Star(a) => Game::Dual(
            Box::new(Game::star(Game::dual(dualize(a)))),
            DualHint::Plain,
        ),
        Game::Dual(a, _) => dual_normal_form(a),
    }
}

/// Fixpoint-calculus formulas: set-variable application, predicates,
/// comparisons, boolean structure, differential-equation diamonds, and least
/// fixpoints (bound set variables occur positively). Quantifiers are the
/// usual abbreviations.
#[derive(Debug, Clone, PartialEq)]
pub enum MuFormula {
    SetApp(String, Vec<Term>),
    Pred(String, Vec<Term>),
    Geq(Term, Term),
    Not(Box<MuFormula>),
    And(Box<MuFormula>, Box<MuFormula>),
    Or(Box<MuFormula>, Box<MuFormula>),
    Implies(Box<MuFormula>, Box<MuFormula>),
    Exists(String, Box<MuFormula>),
    Forall(String, Box<MuFormula>),
    DiamondOde(OdeSystem, Box<MuFormula>),
    Mu {
        var: String,
        params: Vec<String>,
        body: Box<MuFormula>,
    },
}

impl fmt::Display for MuFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn args(ts: &[Term]) -> String {
            ts.iter()
                .map(crate::syntax::format_term)
                .collect::<Vec<_>>()
                .join(",")
        }
        match self {
            MuFormula::SetApp(x, ts) => write!(f, "{x}({})", args(ts)),
            MuFormula::Pred(p, ts) => write!(f, "{p}({})", args(ts)),
            MuFormula::Geq(a, b) => write!(
                f,
                "{}>={}",
                crate::syntax::format_term(a),
                crate::syntax::format_term(b)
            ),
            MuFormula::Not(a) => write!(f, "!({a})"),
            MuFormula::And(a, b) => write!(f, "({a} & {b})"),
            MuFormula::Or(a, b) => write!(f, "({a} | {b})"),
            MuFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            MuFormula::Exists(x, a) => write!(f, "\\exists {x} {a}"),
            MuFormula::Forall(x, a) => write!(f, "\\forall {x} ({a})"),
            MuFormula::DiamondOde(sys, a) => write!(
                f,
                "<{}> ({a})",
                crate::syntax::format_game(&Game::Ode(sys.clone()))
            ),
            MuFormula::Mu { var, body, .. } => write!(f, "mu {var}. ({body})"),
        }
    }
}

/// Structural translation of a formula into the fixpoint calculus.
pub fn to_mu_calculus(f: &Formula) -> MuFormula {
    let mut fresh_pool: BTreeSet<String> = formula_vars(f).all();
    fresh_pool.extend(crate::syntax::predicate_arities(f).keys().cloned());
    let mut ctx = MuCtx {
        taken: fresh_pool,
        set_vars: Vec::new(),
    };
    reduct(f, &mut ctx)
}

struct MuCtx {
    taken: BTreeSet<String>,
    /// Predicate names standing for bound set variables.
    set_vars: Vec<String>,
}

fn reduct(f: &Formula, ctx: &mut MuCtx) -> MuFormula {
    match f {
        Formula::Pred(p, args) => {
            if ctx.set_vars.iter().any(|v| v == p) {
                MuFormula::SetApp(p.clone(), args.clone())
            } else {
                MuFormula::Pred(p.clone(), args.clone())
            }
        }
        Formula::Geq(a, b, _) => MuFormula::Geq(a.clone(), b.clone()),
        Formula::Not(a, _) => {
            // Keep derived shapes readable in the output text.
            if let Some((l, r)) = f.as_or() {
                return MuFormula::Or(
                    Box::new(reduct(l, ctx)),
                    Box::new(reduct(r, ctx)),
                );
            }
            if let Some((l, r)) = f.as_implies() {
                return MuFormula::Implies(
                    Box::new(reduct(l, ctx)),
                    Box::new(reduct(r, ctx)),
                );
            }
            if let Some((x, body)) = f.as_forall() {
                return MuFormula::Forall(x.to_string(), Box::new(reduct(body, ctx)));
            }
            MuFormula::Not(Box::new(reduct(a, ctx)))
        }
        Formula::And(a, b, _) => MuFormula::And(
            Box::new(reduct(a, ctx)),
            Box::new(reduct(b, ctx)),
        ),
        Formula::Exists(x, a) => MuFormula::Exists(x.clone(), Box::new(reduct(a, ctx))),
        Formula::Box_(g, body) => {
            // reduct([a]f) = reduct(<a^d>f).
            let dual = Formula::diamond(Game::dual((**g).clone()), (**body).clone());
            reduct(&dual, ctx)
        }
        Formula::Diamond(g, body) => match g.as_ref() {
            Game::Test(psi) => MuFormula::And(
                Box::new(reduct(psi, ctx)),
                Box::new(reduct(body, ctx)),
            ),
            Game::Choice(a, b) => MuFormula::Or(
                Box::new(reduct(&Formula::diamond((**a).clone(), (**body).clone()), ctx)),
                Box::new(reduct(&Formula::diamond((**b).clone(), (**body).clone()), ctx)),
            ),
            Game::Seq(a, b) => reduct(
                &Formula::diamond(
                    (**a).clone(),
                    Formula::diamond((**b).clone(), (**body).clone()),
                ),
                ctx,
            ),
            Game::Dual(a, _) => reduct(
                &Formula::not(Formula::diamond(
                    (**a).clone(),
                    Formula::not((**body).clone()),
                )),
                ctx,
            ),
            Game::Star(a) => {
                let set_var = fresh_claim("X", &mut ctx.taken);
                let params: Vec<String> = game_vars(a).all().into_iter().collect();
                let app = Formula::Pred(
                    set_var.clone(),
                    params.iter().map(|x| Term::var(x.clone())).collect(),
                );
                let unfolding = Formula::or(
                    (**body).clone(),
                    Formula::diamond((**a).clone(), app),
                );
                ctx.set_vars.push(set_var.clone());
                let inner = reduct(&unfolding, ctx);
                ctx.set_vars.pop();
                MuFormula::Mu {
                    var: set_var,
                    params,
                    body: Box::new(inner),
                }
            }
            Game::Assign(x, theta) => {
                let y = fresh_claim("y", &mut ctx.taken);
                let renamed = rename_all(body, x, &y);
                let inner = reduct(&renamed, ctx);
                MuFormula::Forall(
                    y.clone(),
                    Box::new(MuFormula::Implies(
                        Box::new(MuFormula::eq_terms(Term::var(y), theta.clone())),
                        Box::new(inner),
                    )),
                )
            }
            Game::Ode(sys) => MuFormula::DiamondOde(sys.clone(), Box::new(reduct(body, ctx))),
        },
    }
}

impl MuFormula {
    fn eq_terms(a: Term, b: Term) -> MuFormula {
        MuFormula::And(
            Box::new(MuFormula::Geq(a.clone(), b.clone())),
            Box::new(MuFormula::Geq(b, a)),
        )
    }

    /// Recognizes the let-binding shape emitted by the assignment rule:
    /// `\forall y (y = theta -> body)`.
    fn as_let(&self) -> Option<(&str, &Term, &MuFormula)> {
        if let MuFormula::Forall(y, inner) = self {
            if let MuFormula::Implies(eq, body) = inner.as_ref() {
                if let MuFormula::And(l, r) = eq.as_ref() {
                    if let (MuFormula::Geq(a1, b1), MuFormula::Geq(b2, a2)) =
                        (l.as_ref(), r.as_ref())
                    {
                        if a1 == a2 && b1 == b2 {
                            if let Term::Var(v) = a1 {
                                if v == y {
                                    return Some((y, b1, body));
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// Rewrites the single Angel repetition of the formula with the counter
/// encoding: pick a count up front, then repeat while decrementing, and pass
/// the final zero check.
pub fn encode_advance_notice(f: &Formula) -> Result<Formula, TransformError> {
    let mut stars = 0usize;
    count_stars_formula(f, &mut stars);
    match stars {
        0 => return Err(TransformError::NoStar),
        1 => {}
        n => return Err(TransformError::MultipleStars(n)),
    }
    let mut taken = formula_vars(f).all();
    let counter = fresh_claim("c", &mut taken);
    encode_formula(f, &counter, 0).ok_or(TransformError::NotAngelsStar)
}

fn count_stars_formula(f: &Formula, n: &mut usize) {
    match f {
        Formula::Pred(..) | Formula::Geq(..) => {}
        Formula::Not(a, _) | Formula::Exists(_, a) => count_stars_formula(a, n),
        Formula::And(a, b, _) => {
            count_stars_formula(a, n);
            count_stars_formula(b, n);
        }
        Formula::Diamond(g, a) | Formula::Box_(g, a) => {
            count_stars_game(g, n);
            count_stars_formula(a, n);
        }
    }
}

fn count_stars_game(g: &Game, n: &mut usize) {
    match g {
        Game::Assign(..) | Game::Ode(_) => {}
        Game::Test(f) => count_stars_formula(f, n),
        Game::Choice(a, b) | Game::Seq(a, b) => {
            count_stars_game(a, n);
            count_stars_game(b, n);
        }
        Game::Star(a) => {
            *n += 1;
            count_stars_game(a, n);
        }
        Game::Dual(a, _) => count_stars_game(a, n),
    }
}

fn encode_formula(f: &Formula, counter: &str, duals: usize) -> Option<Formula> {
    Some(match f {
        Formula::Pred(..) | Formula::Geq(..) => f.clone(),
        Formula::Not(a, h) => Formula::Not(Box::new(encode_formula(a, counter, duals)?), *h),
        Formula::And(a, b, h) => Formula::And(
            Box::new(encode_formula(a, counter, duals)?),
            Box::new(encode_formula(b, counter, duals)?),
            *h,
        ),
        Formula::Exists(x, a) => {
            Formula::Exists(x.clone(), Box::new(encode_formula(a, counter, duals)?))
        }
        Formula::Diamond(g, a) => Formula::diamond(
            encode_game(g, counter, duals)?,
            encode_formula(a, counter, duals)?,
        ),
        Formula::Box_(g, a) => Formula::boxm(
            encode_game(g, counter, duals)?,
            encode_formula(a, counter, duals)?,
        ),
    })
}

fn encode_game(g: &Game, counter: &str, duals: usize) -> Option<Game> {
    Some(match g {
        Game::Assign(..) | Game::Ode(_) => g.clone(),
        Game::Test(f) => Game::test(encode_formula(f, counter, duals)?),
        Game::Choice(a, b) => Game::choice(
            encode_game(a, counter, duals)?,
            encode_game(b, counter, duals)?,
        ),
        Game::Seq(a, b) => Game::seq(
            encode_game(a, counter, duals)?,
            encode_game(b, counter, duals)?,
        ),
        Game::Dual(a, h) => Game::Dual(Box::new(encode_game(a, counter, duals + 1)?), *h),
        Game::Star(body) => {
            if duals % 2 != 0 {
                return None;
            }
            let c = counter.to_string();
            seq_chain(vec![
                Game::assign(c.clone(), Term::int(0)),
                Game::star(Game::assign(
                    c.clone(),
                    Term::var(c.clone()).add(Term::int(1)),
                )),
                Game::star(Game::seq(
                    (**body).clone(),
                    Game::assign(c.clone(), Term::var(c.clone()).sub(Term::int(1))),
                )),
                Game::test(Formula::eq(Term::var(c), Term::int(0))),
            ])
        }
    })
}

/// Finite-space evaluator for translated formulas; a testing oracle only.
/// Works pointwise over valuations so that the fresh let-bound variables of
/// the assignment rule need no dimension in the space.
#[doc(hidden)]
pub fn eval_mu_finite(
    f: &MuFormula,
    space: &FiniteSpace,
    interp: &PredicateInterpretation,
) -> Result<StateSet, SemError> {
    let mut out = StateSet::empty(space.len());
    for i in 0..space.len() {
        let valuation: std::collections::BTreeMap<String, Rat> = space
            .dims()
            .iter()
            .cloned()
            .zip(space.states()[i].iter().cloned())
            .collect();
        let mut env = Vec::new();
        if eval_mu_at(f, &valuation, space, interp, &mut env)? {
            out.insert(i);
        }
    }
    Ok(out)
}

type SetEnv = Vec<(String, Vec<String>, std::collections::HashSet<Vec<Rat>>)>;

fn eval_mu_at(
    f: &MuFormula,
    valuation: &std::collections::BTreeMap<String, Rat>,
    space: &FiniteSpace,
    interp: &PredicateInterpretation,
    env: &mut SetEnv,
) -> Result<bool, SemError> {
    use crate::poly::eval_term;
    if let Some((y, theta, body)) = f.as_let() {
        let mut v = valuation.clone();
        v.insert(y.to_string(), eval_term(theta, valuation));
        return eval_mu_at(body, &v, space, interp, env);
    }
    match f {
        MuFormula::SetApp(x, args) => {
            let tuple: Vec<Rat> = args.iter().map(|t| eval_term(t, valuation)).collect();
            let set = env
                .iter()
                .rev()
                .find(|(v, _, _)| v == x)
                .map(|(_, _, s)| s)
                .ok_or_else(|| SemError::MissingInterpretation(x.clone()))?;
            Ok(set.contains(&tuple))
        }
        MuFormula::Pred(p, args) => {
            let tuple: Vec<Rat> = args.iter().map(|t| eval_term(t, valuation)).collect();
            interp.holds(p, &tuple)
        }
        MuFormula::Geq(a, b) => Ok(eval_term(a, valuation) >= eval_term(b, valuation)),
        MuFormula::Not(a) => Ok(!eval_mu_at(a, valuation, space, interp, env)?),
        MuFormula::And(a, b) => Ok(eval_mu_at(a, valuation, space, interp, env)?
            && eval_mu_at(b, valuation, space, interp, env)?),
        MuFormula::Or(a, b) => Ok(eval_mu_at(a, valuation, space, interp, env)?
            || eval_mu_at(b, valuation, space, interp, env)?),
        MuFormula::Implies(a, b) => Ok(!eval_mu_at(a, valuation, space, interp, env)?
            || eval_mu_at(b, valuation, space, interp, env)?),
        MuFormula::Exists(x, a) => {
            for v in dim_values(space, x)? {
                let mut val = valuation.clone();
                val.insert(x.clone(), v);
                if eval_mu_at(a, &val, space, interp, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        MuFormula::Forall(x, a) => {
            for v in dim_values(space, x)? {
                let mut val = valuation.clone();
                val.insert(x.clone(), v);
                if !eval_mu_at(a, &val, space, interp, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        MuFormula::DiamondOde(..) => Err(SemError::UnsupportedGame(
            "the finite fixpoint evaluator is ODE-free".to_string(),
        )),
        MuFormula::Mu { var, params, body } => {
            // Tuple domain: per-parameter values realized by the space.
            let mut domain: Vec<Vec<Rat>> = vec![vec![]];
            for p in params {
                let values = dim_values(space, p)?;
                let mut next = Vec::new();
                for t in &domain {
                    for v in &values {
                        let mut u = t.clone();
                        u.push(v.clone());
                        next.push(u);
                    }
                }
                domain = next;
            }
            let mut approx: std::collections::HashSet<Vec<Rat>> =
                std::collections::HashSet::new();
            loop {
                let mut next = std::collections::HashSet::new();
                for tuple in &domain {
                    let mut val = valuation.clone();
                    for (p, v) in params.iter().zip(tuple) {
                        val.insert(p.clone(), v.clone());
                    }
                    env.push((var.clone(), params.clone(), approx.clone()));
                    let holds = eval_mu_at(body, &val, space, interp, env)?;
                    env.pop();
                    if holds {
                        next.insert(tuple.clone());
                    }
                }
                if next == approx {
                    break;
                }
                approx = next;
            }
            env.push((var.clone(), params.clone(), approx));
            let tuple: Vec<Rat> = params
                .iter()
                .map(|p| valuation.get(p).cloned().unwrap_or_else(|| crate::rat::rat(0)))
                .collect();
            let result = env.last().unwrap().2.contains(&tuple);
            env.pop();
            Ok(result)
        }
    }
}

fn dim_values(space: &FiniteSpace, x: &str) -> Result<Vec<Rat>, SemError> {
    let d = space
        .dims()
        .iter()
        .position(|v| v == x)
        .ok_or_else(|| SemError::UnknownVariable(x.to_string()))?;
    let set: BTreeSet<Rat> = space.states().iter().map(|s| s[d].clone()).collect();
    Ok(set.into_iter().collect())
}
