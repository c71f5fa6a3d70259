//! Admissible term substitution and uniform predicate substitution.

use super::ast::{Formula, Game, OdeSystem, Term};
use super::parser::placeholder_name;
use super::vars::{formula_vars, game_vars};
use std::collections::BTreeSet;

/// A substitution was blocked by a capturing binder.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substitution not admissible: binder of `{binder}` captures at {position}")]
    Admissibility { binder: String, position: String },
    #[error("predicate `{pred}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("substitution template mentions the substituted predicate `{0}`")]
    TemplateMentionsPred(String),
}

/// Replaces every free occurrence of `x` in `t` by `theta`. Terms have no
/// binders, so this is total.
pub fn subst_term(t: &Term, x: &str, theta: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => theta.clone(),
        Term::Var(_) | Term::Lit(_) => t.clone(),
        Term::Neg(a) => Term::Neg(Box::new(subst_term(a, x, theta))),
        Term::Add(a, b) => Term::Add(
            Box::new(subst_term(a, x, theta)),
            Box::new(subst_term(b, x, theta)),
        ),
        Term::Sub(a, b) => Term::Sub(
            Box::new(subst_term(a, x, theta)),
            Box::new(subst_term(b, x, theta)),
        ),
        Term::Mul(a, b) => Term::Mul(
            Box::new(subst_term(a, x, theta)),
            Box::new(subst_term(b, x, theta)),
        ),
    }
}

/// Replaces every free occurrence of `x` in `f` by `theta`.
///
/// Fails when a replaced occurrence lies in the scope of a quantifier or
/// modality binding `x` or a variable of `theta`. Occurrences under a
/// quantifier that rebinds `x` itself are not free and are skipped silently.
pub fn substitute(f: &Formula, x: &str, theta: &Term) -> Result<Formula, SubstError> {
    if let Term::Var(y) = theta {
        if y == x {
            return Ok(f.clone());
        }
    }
    let theta_vars = theta.vars();
    let mut ctx = Ctx {
        x,
        theta,
        theta_vars: &theta_vars,
        blocking: Vec::new(),
    };
    subst_formula(f, &mut ctx, &mut vec!["formula".to_string()])
}

struct Ctx<'a> {
    x: &'a str,
    theta: &'a Term,
    theta_vars: &'a BTreeSet<String>,
    /// Binders in scope that would capture a replacement.
    blocking: Vec<String>,
}

impl Ctx<'_> {
    fn is_relevant_binder(&self, v: &str) -> bool {
        v == self.x || self.theta_vars.contains(v)
    }

    fn check_replace(&self, path: &[String]) -> Result<(), SubstError> {
        if let Some(b) = self.blocking.first() {
            Err(SubstError::Admissibility {
                binder: b.clone(),
                position: path.join("."),
            })
        } else {
            Ok(())
        }
    }
}

fn subst_in_term(
    t: &Term,
    ctx: &Ctx<'_>,
    path: &[String],
) -> Result<Term, SubstError> {
    if t.vars().contains(ctx.x) {
        ctx.check_replace(path)?;
        Ok(subst_term(t, ctx.x, ctx.theta))
    } else {
        Ok(t.clone())
    }
}

fn subst_formula(
    f: &Formula,
    ctx: &mut Ctx<'_>,
    path: &mut Vec<String>,
) -> Result<Formula, SubstError> {
    let out = match f {
        Formula::Pred(p, args) => {
            let mut new_args = Vec::with_capacity(args.len());
            for a in args {
                new_args.push(subst_in_term(a, ctx, path)?);
            }
            Formula::Pred(p.clone(), new_args)
        }
        Formula::Geq(a, b, h) => Formula::Geq(
            subst_in_term(a, ctx, path)?,
            subst_in_term(b, ctx, path)?,
            *h,
        ),
        Formula::Not(a, h) => {
            path.push("!".to_string());
            let r = Formula::Not(Box::new(subst_formula(a, ctx, path)?), *h);
            path.pop();
            r
        }
        Formula::And(a, b, h) => {
            path.push("&L".to_string());
            let l = subst_formula(a, ctx, path)?;
            path.pop();
            path.push("&R".to_string());
            let r = subst_formula(b, ctx, path)?;
            path.pop();
            Formula::And(Box::new(l), Box::new(r), *h)
        }
        Formula::Exists(y, body) => {
            if y == ctx.x {
                // Occurrences below are rebound, hence not replaced.
                f.clone()
            } else {
                let pushed = ctx.is_relevant_binder(y);
                if pushed {
                    ctx.blocking.push(format!("\\exists {y}"));
                }
                path.push(format!("\\exists {y}"));
                let r = subst_formula(body, ctx, path);
                path.pop();
                if pushed {
                    ctx.blocking.pop();
                }
                Formula::Exists(y.clone(), Box::new(r?))
            }
        }
        Formula::Diamond(g, body) | Formula::Box_(g, body) => {
            let bound = game_vars(g).bound;
            let mut pushed = 0;
            for v in &bound {
                if ctx.is_relevant_binder(v) {
                    ctx.blocking.push(format!("modality binding {v}"));
                    pushed += 1;
                }
            }
            path.push("modality".to_string());
            let res = (|| {
                let g2 = subst_game(g, ctx, path)?;
                let b2 = subst_formula(body, ctx, path)?;
                Ok((g2, b2))
            })();
            path.pop();
            for _ in 0..pushed {
                ctx.blocking.pop();
            }
            let (g2, b2) = res?;
            match f {
                Formula::Diamond(..) => Formula::Diamond(Box::new(g2), Box::new(b2)),
                _ => Formula::Box_(Box::new(g2), Box::new(b2)),
            }
        }
    };
    Ok(out)
}

fn subst_game(g: &Game, ctx: &mut Ctx<'_>, path: &mut Vec<String>) -> Result<Game, SubstError> {
    let out = match g {
        Game::Assign(v, t) => Game::Assign(v.clone(), subst_in_term(t, ctx, path)?),
        Game::Ode(sys) => {
            let mut eqs = Vec::with_capacity(sys.eqs.len());
            for (v, rhs) in &sys.eqs {
                eqs.push((v.clone(), subst_in_term(rhs, ctx, path)?));
            }
            let domain = match &sys.domain {
                None => None,
                Some(d) => Some(subst_formula(d, ctx, path)?),
            };
            Game::Ode(OdeSystem::new(eqs, domain))
        }
        Game::Test(f) => Game::Test(Box::new(subst_formula(f, ctx, path)?)),
        Game::Choice(a, b) => Game::Choice(
            Box::new(subst_game(a, ctx, path)?),
            Box::new(subst_game(b, ctx, path)?),
        ),
        Game::Seq(a, b) => Game::Seq(
            Box::new(subst_game(a, ctx, path)?),
            Box::new(subst_game(b, ctx, path)?),
        ),
        Game::Star(a) => Game::Star(Box::new(subst_game(a, ctx, path)?)),
        Game::Dual(a, h) => Game::Dual(Box::new(subst_game(a, ctx, path)?), *h),
    };
    Ok(out)
}

/// Raw textual substitution of a term for a variable in every term position,
/// ignoring binders. Only sound for placeholder variables, which nothing can
/// bind, and for the reinterpretation mode of uniform substitution, where
/// capture by the template's own binders is the intended reading.
pub(crate) fn raw_subst(f: &Formula, x: &str, theta: &Term) -> Formula {
    match f {
        Formula::Pred(p, args) => Formula::Pred(
            p.clone(),
            args.iter().map(|t| subst_term(t, x, theta)).collect(),
        ),
        Formula::Geq(a, b, h) => {
            Formula::Geq(subst_term(a, x, theta), subst_term(b, x, theta), *h)
        }
        Formula::Not(a, h) => Formula::Not(Box::new(raw_subst(a, x, theta)), *h),
        Formula::And(a, b, h) => Formula::And(
            Box::new(raw_subst(a, x, theta)),
            Box::new(raw_subst(b, x, theta)),
            *h,
        ),
        Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(raw_subst(a, x, theta))),
        Formula::Diamond(g, a) => Formula::Diamond(
            Box::new(raw_subst_game(g, x, theta)),
            Box::new(raw_subst(a, x, theta)),
        ),
        Formula::Box_(g, a) => Formula::Box_(
            Box::new(raw_subst_game(g, x, theta)),
            Box::new(raw_subst(a, x, theta)),
        ),
    }
}

fn raw_subst_game(g: &Game, x: &str, theta: &Term) -> Game {
    match g {
        Game::Assign(v, t) => Game::Assign(v.clone(), subst_term(t, x, theta)),
        Game::Ode(sys) => Game::Ode(OdeSystem::new(
            sys.eqs
                .iter()
                .map(|(v, rhs)| (v.clone(), subst_term(rhs, x, theta)))
                .collect(),
            sys.domain.as_ref().map(|d| raw_subst(d, x, theta)),
        )),
        Game::Test(f) => Game::Test(Box::new(raw_subst(f, x, theta))),
        Game::Choice(a, b) => Game::Choice(
            Box::new(raw_subst_game(a, x, theta)),
            Box::new(raw_subst_game(b, x, theta)),
        ),
        Game::Seq(a, b) => Game::Seq(
            Box::new(raw_subst_game(a, x, theta)),
            Box::new(raw_subst_game(b, x, theta)),
        ),
        Game::Star(a) => Game::Star(Box::new(raw_subst_game(a, x, theta))),
        Game::Dual(a, h) => Game::Dual(Box::new(raw_subst_game(a, x, theta)), *h),
    }
}

/// Uniformly renames `x` to `y` in every position, including binders.
/// Total; capture-free whenever `y` is fresh for the formula.
pub fn rename_all(f: &Formula, x: &str, y: &str) -> Formula {
    let ren = |v: &String| if v == x { y.to_string() } else { v.clone() };
    match f {
        Formula::Pred(p, args) => Formula::Pred(
            p.clone(),
            args.iter().map(|t| rename_term(t, x, y)).collect(),
        ),
        Formula::Geq(a, b, h) => Formula::Geq(rename_term(a, x, y), rename_term(b, x, y), *h),
        Formula::Not(a, h) => Formula::Not(Box::new(rename_all(a, x, y)), *h),
        Formula::And(a, b, h) => Formula::And(
            Box::new(rename_all(a, x, y)),
            Box::new(rename_all(b, x, y)),
            *h,
        ),
        Formula::Exists(v, body) => Formula::Exists(ren(v), Box::new(rename_all(body, x, y))),
        Formula::Diamond(g, body) => Formula::Diamond(
            Box::new(rename_all_game(g, x, y)),
            Box::new(rename_all(body, x, y)),
        ),
        Formula::Box_(g, body) => Formula::Box_(
            Box::new(rename_all_game(g, x, y)),
            Box::new(rename_all(body, x, y)),
        ),
    }
}

pub fn rename_all_game(g: &Game, x: &str, y: &str) -> Game {
    let ren = |v: &String| if v == x { y.to_string() } else { v.clone() };
    match g {
        Game::Assign(v, t) => Game::Assign(ren(v), rename_term(t, x, y)),
        Game::Ode(sys) => Game::Ode(OdeSystem::new(
            sys.eqs
                .iter()
                .map(|(v, rhs)| (ren(v), rename_term(rhs, x, y)))
                .collect(),
            sys.domain.as_ref().map(|d| rename_all(d, x, y)),
        )),
        Game::Test(f) => Game::Test(Box::new(rename_all(f, x, y))),
        Game::Choice(a, b) => Game::Choice(
            Box::new(rename_all_game(a, x, y)),
            Box::new(rename_all_game(b, x, y)),
        ),
        Game::Seq(a, b) => Game::Seq(
            Box::new(rename_all_game(a, x, y)),
            Box::new(rename_all_game(b, x, y)),
        ),
        Game::Star(a) => Game::Star(Box::new(rename_all_game(a, x, y))),
        Game::Dual(a, h) => Game::Dual(Box::new(rename_all_game(a, x, y)), *h),
    }
}

fn rename_term(t: &Term, x: &str, y: &str) -> Term {
    subst_term(t, x, &Term::var(y))
}

/// Uniform substitution: replaces every occurrence of `p(args...)` in `f` by
/// the template with `#i` instantiated to the i-th argument.
///
/// Two admissibility regimes apply. When every occurrence carries the same
/// vector of distinct variables as arguments and the instantiated template
/// reads no variables outside that vector, the replacement denotes a plain
/// reinterpretation of `p` and is admissible in any binder context. Otherwise
/// each occurrence is checked individually: the argument instantiation must
/// not be captured inside the template, and no enclosing binder may bind a
/// template variable that is not carried by an argument.
pub fn uniform_substitute(
    f: &Formula,
    p: &str,
    arity: usize,
    template: &Formula,
) -> Result<Formula, SubstError> {
    for (idx, _) in placeholder_indices(template) {
        if idx == 0 || idx as usize > arity {
            return Err(SubstError::ArityMismatch {
                pred: p.to_string(),
                expected: arity,
                found: idx as usize,
            });
        }
    }
    let occurrences = collect_occurrences(f, p)?;
    for occ in &occurrences {
        if occ.args.len() != arity {
            return Err(SubstError::ArityMismatch {
                pred: p.to_string(),
                expected: arity,
                found: occ.args.len(),
            });
        }
    }
    if occurrences.is_empty() {
        return Ok(f.clone());
    }
    if is_identity_template(template, p, arity) {
        return Ok(f.clone());
    }
    if super::vars::predicate_arities(template).contains_key(p) {
        return Err(SubstError::TemplateMentionsPred(p.to_string()));
    }

    // Reinterpretation mode: all occurrences p(x1,...,xk) over one vector of
    // distinct variables, with the instantiated template reading only those.
    // The slots take the variables verbatim (capture by template binders is
    // the intended reading: the template denotes a relation of exactly those
    // variables), so any binder context around the occurrences is fine.
    if let Some(vars) = common_distinct_var_args(&occurrences) {
        let mut inst = template.clone();
        for (i, v) in vars.iter().enumerate() {
            inst = raw_subst(&inst, &placeholder_name(i as u32 + 1), &Term::var(v.clone()));
        }
        let free = formula_vars(&inst).free;
        if free.iter().all(|v| vars.contains(v)) {
            return Ok(replace_pred(f, p, &|_| Ok(inst.clone()))?);
        }
    }

    // Per-occurrence mode.
    let fixed: BTreeSet<String> = formula_vars(template)
        .free
        .into_iter()
        .filter(|v| !v.starts_with('#'))
        .collect();
    replace_pred_checked(f, p, template, &fixed, &mut BTreeSet::new())
}

struct Occurrence {
    args: Vec<Term>,
}

fn collect_occurrences(f: &Formula, p: &str) -> Result<Vec<Occurrence>, SubstError> {
    let mut out = Vec::new();
    fn walk_f(f: &Formula, p: &str, out: &mut Vec<Occurrence>) {
        match f {
            Formula::Pred(q, args) if q == p => out.push(Occurrence { args: args.clone() }),
            Formula::Pred(..) | Formula::Geq(..) => {}
            Formula::Not(a, _) => walk_f(a, p, out),
            Formula::And(a, b, _) => {
                walk_f(a, p, out);
                walk_f(b, p, out);
            }
            Formula::Exists(_, a) => walk_f(a, p, out),
            Formula::Diamond(g, a) | Formula::Box_(g, a) => {
                walk_g(g, p, out);
                walk_f(a, p, out);
            }
        }
    }
    fn walk_g(g: &Game, p: &str, out: &mut Vec<Occurrence>) {
        match g {
            Game::Assign(..) => {}
            Game::Ode(sys) => {
                if let Some(d) = &sys.domain {
                    walk_f(d, p, out);
                }
            }
            Game::Test(f) => walk_f(f, p, out),
            Game::Choice(a, b) | Game::Seq(a, b) => {
                walk_g(a, p, out);
                walk_g(b, p, out);
            }
            Game::Star(a) | Game::Dual(a, _) => walk_g(a, p, out),
        }
    }
    walk_f(f, p, &mut out);
    Ok(out)
}

fn placeholder_indices(f: &Formula) -> Vec<(u32, ())> {
    formula_vars(f)
        .free
        .iter()
        .filter_map(|v| super::parser::placeholder_index(v).map(|k| (k, ())))
        .collect()
}

fn is_identity_template(template: &Formula, p: &str, arity: usize) -> bool {
    if let Formula::Pred(q, args) = template {
        q == p
            && args.len() == arity
            && args
                .iter()
                .enumerate()
                .all(|(i, a)| *a == Term::var(placeholder_name(i as u32 + 1)))
    } else {
        false
    }
}

fn common_distinct_var_args(occs: &[Occurrence]) -> Option<Vec<String>> {
    let first: Vec<String> = occs[0]
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => Some(v.clone()),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let distinct: BTreeSet<&String> = first.iter().collect();
    if distinct.len() != first.len() {
        return None;
    }
    for occ in &occs[1..] {
        let args: Vec<String> = occ
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect::<Option<_>>()?;
        if args != first {
            return None;
        }
    }
    Some(first)
}

/// Substitutes the placeholders of `template` by `args`, checking that no
/// template binder captures argument variables.
fn instantiate_template(template: &Formula, args: &[Term]) -> Result<Formula, SubstError> {
    let mut out = template.clone();
    for (i, arg) in args.iter().enumerate() {
        out = substitute(&out, &placeholder_name(i as u32 + 1), arg)?;
    }
    Ok(out)
}

fn replace_pred(
    f: &Formula,
    p: &str,
    mk: &impl Fn(&[Term]) -> Result<Formula, SubstError>,
) -> Result<Formula, SubstError> {
    let out = match f {
        Formula::Pred(q, args) if q == p => mk(args)?,
        Formula::Pred(..) | Formula::Geq(..) => f.clone(),
        Formula::Not(a, h) => Formula::Not(Box::new(replace_pred(a, p, mk)?), *h),
        Formula::And(a, b, h) => Formula::And(
            Box::new(replace_pred(a, p, mk)?),
            Box::new(replace_pred(b, p, mk)?),
            *h,
        ),
        Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(replace_pred(a, p, mk)?)),
        Formula::Diamond(g, a) => Formula::Diamond(
            Box::new(replace_pred_game(g, p, mk)?),
            Box::new(replace_pred(a, p, mk)?),
        ),
        Formula::Box_(g, a) => Formula::Box_(
            Box::new(replace_pred_game(g, p, mk)?),
            Box::new(replace_pred(a, p, mk)?),
        ),
    };
    Ok(out)
}

fn replace_pred_game(
    g: &Game,
    p: &str,
    mk: &impl Fn(&[Term]) -> Result<Formula, SubstError>,
) -> Result<Game, SubstError> {
    let out = match g {
        Game::Assign(..) => g.clone(),
        Game::Ode(sys) => Game::Ode(OdeSystem::new(
            sys.eqs.clone(),
            match &sys.domain {
                None => None,
                Some(d) => Some(replace_pred(d, p, mk)?),
            },
        )),
        Game::Test(f) => Game::Test(Box::new(replace_pred(f, p, mk)?)),
        Game::Choice(a, b) => Game::Choice(
            Box::new(replace_pred_game(a, p, mk)?),
            Box::new(replace_pred_game(b, p, mk)?),
        ),
        Game::Seq(a, b) => Game::Seq(
            Box::new(replace_pred_game(a, p, mk)?),
            Box::new(replace_pred_game(b, p, mk)?),
        ),
        Game::Star(a) => Game::Star(Box::new(replace_pred_game(a, p, mk)?)),
        Game::Dual(a, h) => Game::Dual(Box::new(replace_pred_game(a, p, mk)?), *h),
    };
    Ok(out)
}

fn replace_pred_checked(
    f: &Formula,
    p: &str,
    template: &Formula,
    fixed: &BTreeSet<String>,
    bound: &mut BTreeSet<String>,
) -> Result<Formula, SubstError> {
    let out = match f {
        Formula::Pred(q, args) if q == p => {
            if let Some(captured) = fixed.iter().find(|v| bound.contains(*v)) {
                return Err(SubstError::Admissibility {
                    binder: captured.clone(),
                    position: format!("occurrence of {q}(..)"),
                });
            }
            instantiate_template(template, args)?
        }
        Formula::Pred(..) | Formula::Geq(..) => f.clone(),
        Formula::Not(a, h) => Formula::Not(
            Box::new(replace_pred_checked(a, p, template, fixed, bound)?),
            *h,
        ),
        Formula::And(a, b, h) => Formula::And(
            Box::new(replace_pred_checked(a, p, template, fixed, bound)?),
            Box::new(replace_pred_checked(b, p, template, fixed, bound)?),
            *h,
        ),
        Formula::Exists(x, a) => {
            let added = bound.insert(x.clone());
            let r = replace_pred_checked(a, p, template, fixed, bound);
            if added {
                bound.remove(x);
            }
            Formula::Exists(x.clone(), Box::new(r?))
        }
        Formula::Diamond(g, a) | Formula::Box_(g, a) => {
            let game_bound = game_vars(g).bound;
            let added: Vec<String> = game_bound
                .into_iter()
                .filter(|v| bound.insert(v.clone()))
                .collect();
            let res = (|| {
                let g2 = replace_pred_checked_game(g, p, template, fixed, bound)?;
                let a2 = replace_pred_checked(a, p, template, fixed, bound)?;
                Ok((g2, a2))
            })();
            for v in added {
                bound.remove(&v);
            }
            let (g2, a2) = res?;
            match f {
                Formula::Diamond(..) => Formula::Diamond(Box::new(g2), Box::new(a2)),
                _ => Formula::Box_(Box::new(g2), Box::new(a2)),
            }
        }
    };
    Ok(out)
}

fn replace_pred_checked_game(
    g: &Game,
    p: &str,
    template: &Formula,
    fixed: &BTreeSet<String>,
    bound: &mut BTreeSet<String>,
) -> Result<Game, SubstError> {
    let out = match g {
        Game::Assign(..) => g.clone(),
        Game::Ode(sys) => Game::Ode(OdeSystem::new(
            sys.eqs.clone(),
            match &sys.domain {
                None => None,
                Some(d) => Some(replace_pred_checked(d, p, template, fixed, bound)?),
            },
        )),
        Game::Test(f) => Game::Test(Box::new(replace_pred_checked(f, p, template, fixed, bound)?)),
        Game::Choice(a, b) => Game::Choice(
            Box::new(replace_pred_checked_game(a, p, template, fixed, bound)?),
            Box::new(replace_pred_checked_game(b, p, template, fixed, bound)?),
        ),
        Game::Seq(a, b) => Game::Seq(
            Box::new(replace_pred_checked_game(a, p, template, fixed, bound)?),
            Box::new(replace_pred_checked_game(b, p, template, fixed, bound)?),
        ),
        Game::Star(a) => Game::Star(Box::new(replace_pred_checked_game(
            a, p, template, fixed, bound,
        )?)),
        Game::Dual(a, h) => Game::Dual(
            Box::new(replace_pred_checked_game(a, p, template, fixed, bound)?),
            *h,
        ),
    };
    Ok(out)
}
