//! Derived-rule macros expanding to primitive steps.
//!
//! Each expansion passes the proof checker; the glue between axiom instances
//! is discharged as propositional arithmetic leaves. Only the converse
//! Barcan macro emits genuine first-order oracle leaves, because quantifier
//! distribution over modal formulas lies outside the linear fragment.

use super::axioms::AxiomId;
use crate::syntax::ast::{Formula, Game};
use crate::syntax::game_vars;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroName {
    /// From `f -> [a] f` conclude `f -> [a*] f`.
    Ind,
    /// From `f -> [a] f` and `f -> g` conclude `f -> [a*] g`.
    IndR,
    /// From `f <-> g` conclude `<a> f <-> <a> g` (two monotonicity steps).
    Re,
    /// From `f -> g` conclude `[a] f -> [a] g`.
    MBox,
    /// Converse Barcan: `\exists x <a> f -> <a> \exists x f` for `x` not in `a`.
    Cb,
    /// Completeness-style repetition proof: from the oracle pre-fixpoint
    /// premise conclude `F -> <a*> G`.
    LoopDiamond,
}

impl MacroName {
    pub fn parse(s: &str) -> Option<MacroName> {
        Some(match s {
            "ind" => MacroName::Ind,
            "ind_R" => MacroName::IndR,
            "RE" => MacroName::Re,
            "M_box" => MacroName::MBox,
            "cB" => MacroName::Cb,
            "loop_diamond" => MacroName::LoopDiamond,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MacroName::Ind => "ind",
            MacroName::IndR => "ind_R",
            MacroName::Re => "RE",
            MacroName::MBox => "M_box",
            MacroName::Cb => "cB",
            MacroName::LoopDiamond => "loop_diamond",
        }
    }
}

impl fmt::Display for MacroName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MacroError {
    #[error("macro {0}: expected {1} premise(s), got {2}")]
    ArgCount(&'static str, usize, usize),
    #[error("macro {0}: premise shape mismatch: {1}")]
    Shape(&'static str, String),
}

/// Reference inside a macro expansion: a macro argument or an earlier
/// emitted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalRef {
    Arg(usize),
    Local(usize),
}

/// Primitive rule with local references; the currency of expansions and of
/// the checker core.
#[derive(Debug, Clone)]
pub enum MacroRule {
    Axiom(AxiomId),
    Mp(LocalRef, LocalRef),
    Gen(String, LocalRef),
    M(LocalRef),
    Fp(LocalRef),
    Us {
        premise: LocalRef,
        pred: String,
        arity: usize,
        template: Formula,
    },
    Arith,
    Oracle,
}

pub type Expansion = Vec<(MacroRule, Formula)>;

struct Builder {
    steps: Expansion,
}

impl Builder {
    fn new() -> Builder {
        Builder { steps: Vec::new() }
    }

    fn push(&mut self, rule: MacroRule, conclusion: Formula) -> LocalRef {
        self.steps.push((rule, conclusion));
        LocalRef::Local(self.steps.len() - 1)
    }

    fn axiom(&mut self, id: AxiomId, conclusion: Formula) -> LocalRef {
        self.push(MacroRule::Axiom(id), conclusion)
    }

    fn arith(&mut self, conclusion: Formula) -> LocalRef {
        self.push(MacroRule::Arith, conclusion)
    }

    /// Arithmetic when dischargeable, oracle otherwise.
    fn arith_or_oracle(&mut self, conclusion: Formula) -> LocalRef {
        if super::taut::discharge_arith(&conclusion).is_ok() {
            self.push(MacroRule::Arith, conclusion)
        } else {
            self.push(MacroRule::Oracle, conclusion)
        }
    }

    fn mp(&mut self, imp: LocalRef, ant: LocalRef, conclusion: Formula) -> LocalRef {
        self.push(MacroRule::Mp(imp, ant), conclusion)
    }

    /// Chain `a -> (b -> ... -> goal)` against premises via repeated MP.
    fn mp_chain(&mut self, mut imp: LocalRef, imp_formula: &Formula, premises: &[LocalRef]) -> LocalRef {
        let mut cur = imp_formula.clone();
        for p in premises {
            let (_, rest) = cur.as_implies().expect("mp chain shape");
            let rest = rest.clone();
            imp = self.mp(imp, *p, rest.clone());
            cur = rest;
        }
        imp
    }
}

fn shape(name: &'static str, why: impl Into<String>) -> MacroError {
    MacroError::Shape(name, why.into())
}

/// Expands a macro into primitive steps whose final conclusion must be the
/// declared one.
pub fn macro_expand(
    name: MacroName,
    args: &[Formula],
    declared: &Formula,
) -> Result<Expansion, MacroError> {
    match name {
        MacroName::Ind => {
            let [premise] = expect_args::<1>(name, args)?;
            let (psi, alpha) = ind_premise_shape(name.name(), premise)?;
            Ok(ind_fragment(&psi, &alpha, LocalRef::Arg(0)))
        }
        MacroName::IndR => {
            let [premise, weaken] = expect_args::<2>(name, args)?;
            let (psi, alpha) = ind_premise_shape(name.name(), premise)?;
            let (psi2, phi) = weaken
                .as_implies()
                .ok_or_else(|| shape(name.name(), "second premise is not an implication"))?;
            if *psi2 != psi {
                return Err(shape(name.name(), "premises speak about different invariants"));
            }
            let phi = phi.clone();
            let mut b = Builder::new();
            let frag = ind_fragment(&psi, &alpha, LocalRef::Arg(0));
            let mut last = LocalRef::Arg(0);
            for (rule, conc) in frag {
                last = b.push(rule, conc);
            }
            let star = Game::star(alpha.clone());
            // f -> [a*] f , f -> g   gives   f -> [a*] g via M_box on the box.
            let mbox = mbox_fragment(&psi, &phi, &star);
            let mut mbox_last = LocalRef::Arg(1);
            let offset = b.steps.len();
            for (rule, conc) in mbox {
                // Shift argument references: the M_box fragment's Arg(0) is
                // our second premise.
                let shifted = shift_rule(rule, offset, LocalRef::Arg(1));
                mbox_last = b.push(shifted, conc);
            }
            let box_psi = Formula::boxm(star.clone(), psi.clone());
            let box_phi = Formula::boxm(star, phi.clone());
            let t = Formula::implies(
                Formula::implies(psi.clone(), box_psi.clone()),
                Formula::implies(
                    Formula::implies(box_psi.clone(), box_phi.clone()),
                    Formula::implies(psi.clone(), box_phi.clone()),
                ),
            );
            let ti = b.arith(t.clone());
            let chained = b.mp_chain(ti, &t, &[last, mbox_last]);
            let _ = chained;
            Ok(b.steps)
        }
        MacroName::Re => {
            let [premise] = expect_args::<1>(name, args)?;
            let (phi, psi) = premise
                .as_iff()
                .ok_or_else(|| shape(name.name(), "premise is not an equivalence"))?;
            let (dphi, dpsi) = match declared.as_iff() {
                Some((Formula::Diamond(g1, b1), Formula::Diamond(g2, b2))) if g1 == g2 => {
                    if **b1 != *phi || **b2 != *psi {
                        return Err(shape(
                            name.name(),
                            "declared conclusion does not match the premise bodies",
                        ));
                    }
                    (
                        Formula::Diamond(g1.clone(), b1.clone()),
                        Formula::Diamond(g2.clone(), b2.clone()),
                    )
                }
                _ => {
                    return Err(shape(
                        name.name(),
                        "declared conclusion is not `<a> f <-> <a> g`",
                    ))
                }
            };
            let (phi, psi) = (phi.clone(), psi.clone());
            let mut b = Builder::new();
            let fwd_t = Formula::implies(
                premise.clone(),
                Formula::implies(phi.clone(), psi.clone()),
            );
            let t1 = b.arith(fwd_t.clone());
            let fwd = b.mp(t1, LocalRef::Arg(0), Formula::implies(phi.clone(), psi.clone()));
            let m1 = b.push(
                MacroRule::M(fwd),
                Formula::implies(dphi.clone(), dpsi.clone()),
            );
            let bwd_t = Formula::implies(
                premise.clone(),
                Formula::implies(psi.clone(), phi.clone()),
            );
            let t2 = b.arith(bwd_t.clone());
            let bwd = b.mp(t2, LocalRef::Arg(0), Formula::implies(psi.clone(), phi.clone()));
            let m2 = b.push(
                MacroRule::M(bwd),
                Formula::implies(dpsi.clone(), dphi.clone()),
            );
            let join = Formula::implies(
                Formula::implies(dphi.clone(), dpsi.clone()),
                Formula::implies(
                    Formula::implies(dpsi.clone(), dphi.clone()),
                    Formula::iff(dphi.clone(), dpsi.clone()),
                ),
            );
            let tj = b.arith(join.clone());
            b.mp_chain(tj, &join, &[m1, m2]);
            Ok(b.steps)
        }
        MacroName::MBox => {
            let [premise] = expect_args::<1>(name, args)?;
            let (phi, psi) = premise
                .as_implies()
                .ok_or_else(|| shape(name.name(), "premise is not an implication"))?;
            let game = match declared.as_implies() {
                Some((Formula::Box_(g1, _), Formula::Box_(g2, _))) if g1 == g2 => (**g1).clone(),
                _ => {
                    return Err(shape(
                        name.name(),
                        "declared conclusion is not `[a] f -> [a] g`",
                    ))
                }
            };
            let (phi, psi) = (phi.clone(), psi.clone());
            let mut b = Builder::new();
            for (rule, conc) in mbox_fragment(&phi, &psi, &game) {
                b.push(rule, conc);
            }
            Ok(b.steps)
        }
        MacroName::Cb => {
            expect_args::<0>(name, args)?;
            let (lhs, rhs) = declared
                .as_implies()
                .ok_or_else(|| shape(name.name(), "conclusion is not an implication"))?;
            let (x, dia_phi) = match lhs {
                Formula::Exists(x, inner) => (x.clone(), inner.as_ref().clone()),
                _ => return Err(shape(name.name(), "hypothesis is not existential")),
            };
            let (game, phi) = match &dia_phi {
                Formula::Diamond(g, b) => ((**g).clone(), (**b).clone()),
                _ => return Err(shape(name.name(), "hypothesis body is not a diamond")),
            };
            let expected_rhs = Formula::diamond(game.clone(), Formula::exists(x.clone(), phi.clone()));
            if *rhs != expected_rhs {
                return Err(shape(name.name(), "conclusion is not `<a> \\exists x f`"));
            }
            if game_vars(&game).all().contains(&x) {
                return Err(shape(
                    name.name(),
                    format!("side condition violated: `{x}` occurs in the game"),
                ));
            }
            let mut b = Builder::new();
            let ex_phi = Formula::exists(x.clone(), phi.clone());
            let s1 = b.arith_or_oracle(Formula::implies(phi.clone(), ex_phi.clone()));
            let dia_ex = Formula::diamond(game.clone(), ex_phi.clone());
            let s2 = b.push(
                MacroRule::M(s1),
                Formula::implies(dia_phi.clone(), dia_ex.clone()),
            );
            let s3 = b.push(
                MacroRule::Gen(x.clone(), s2),
                Formula::forall(
                    x.clone(),
                    Formula::implies(dia_phi.clone(), dia_ex.clone()),
                ),
            );
            // First-order: from the closure, pull the existential out of the
            // antecedent since x is not free in the succedent.
            let fo = Formula::implies(
                Formula::forall(
                    x.clone(),
                    Formula::implies(dia_phi.clone(), dia_ex.clone()),
                ),
                declared.clone(),
            );
            let s4 = b.arith_or_oracle(fo);
            b.mp(s4, s3, declared.clone());
            Ok(b.steps)
        }
        MacroName::LoopDiamond => {
            let [premise] = expect_args::<1>(name, args)?;
            // premise: forall xs (G | <a> p(xs) -> p(xs)) -> (F -> p(xs))
            let (hyp, concl) = premise
                .as_implies()
                .ok_or_else(|| shape(name.name(), "premise is not an implication"))?;
            let (f_pre, p_app) = concl
                .as_implies()
                .ok_or_else(|| shape(name.name(), "premise consequent is not `F -> p(..)`"))?;
            let (pred, arity) = match p_app {
                Formula::Pred(p, a) => (p.clone(), a.len()),
                _ => return Err(shape(name.name(), "consequent head is not a predicate")),
            };
            // Peel the universal closure.
            let mut vars = Vec::new();
            let mut body = hyp;
            while let Some((x, inner)) = body.as_forall() {
                vars.push(x.to_string());
                body = inner;
            }
            let (orloc, _papp2) = body
                .as_implies()
                .ok_or_else(|| shape(name.name(), "closure body is not an implication"))?;
            let (goal, dia) = orloc
                .as_or()
                .ok_or_else(|| shape(name.name(), "closure hypothesis is not a disjunction"))?;
            let alpha = match dia {
                Formula::Diamond(g, _) => (**g).clone(),
                _ => return Err(shape(name.name(), "no loop-body diamond in the premise")),
            };
            let goal = goal.clone();
            let f_pre = f_pre.clone();
            // declared must be F -> <a*> G.
            let star = Game::star(alpha.clone());
            let t_formula = Formula::diamond(star.clone(), goal.clone());
            let expected = Formula::implies(f_pre.clone(), t_formula.clone());
            if *declared != expected {
                return Err(shape(
                    name.name(),
                    format!(
                        "declared conclusion differs from `{}`",
                        crate::syntax::format_formula(&expected)
                    ),
                ));
            }
            let mut b = Builder::new();
            // US: p := <a*> G.
            let substituted = crate::syntax::uniform_substitute(premise, &pred, arity, &t_formula)
                .map_err(|e| shape(name.name(), format!("uniform substitution fails: {e}")))?;
            let us = b.push(
                MacroRule::Us {
                    premise: LocalRef::Arg(0),
                    pred,
                    arity,
                    template: t_formula.clone(),
                },
                substituted.clone(),
            );
            // IterateD instance, closed under the same quantifier prefix.
            let iter = Formula::implies(
                Formula::or(
                    goal.clone(),
                    Formula::diamond(alpha.clone(), t_formula.clone()),
                ),
                t_formula.clone(),
            );
            let mut cur = b.axiom(AxiomId::IterateD, iter.clone());
            let mut cur_f = iter;
            for x in vars.iter().rev() {
                cur_f = Formula::forall(x.clone(), cur_f);
                cur = b.push(MacroRule::Gen(x.clone(), cur), cur_f.clone());
            }
            b.mp(us, cur, expected);
            Ok(b.steps)
        }
    }
}

fn expect_args<const N: usize>(
    name: MacroName,
    args: &[Formula],
) -> Result<[&Formula; N], MacroError> {
    if args.len() != N {
        return Err(MacroError::ArgCount(name.name(), N, args.len()));
    }
    Ok(std::array::from_fn(|i| &args[i]))
}

fn ind_premise_shape(name: &'static str, premise: &Formula) -> Result<(Formula, Game), MacroError> {
    match premise.as_implies() {
        Some((psi, Formula::Box_(g, body))) if **body == *psi => Ok((psi.clone(), (**g).clone())),
        _ => Err(shape(name, "premise is not `f -> [a] f`")),
    }
}

/// `f -> [a]f` (argument `arg`) to `f -> [a*]f`, via determinacy and the
/// fixpoint rule.
fn ind_fragment(psi: &Formula, alpha: &Game, arg: LocalRef) -> Expansion {
    let mut b = Builder::new();
    let box_psi = Formula::boxm(alpha.clone(), psi.clone());
    let dia_not = Formula::diamond(alpha.clone(), Formula::not(psi.clone()));
    let det1 = b.axiom(AxiomId::DetBox, Formula::iff(box_psi.clone(), Formula::not(dia_not.clone())));
    // (psi -> [a]psi) -> (([a]psi <-> !<a>!psi) -> ((!psi | <a>!psi) -> !psi))
    let fp_premise = Formula::implies(
        Formula::or(Formula::not(psi.clone()), dia_not.clone()),
        Formula::not(psi.clone()),
    );
    let t1 = Formula::implies(
        Formula::implies(psi.clone(), box_psi.clone()),
        Formula::implies(
            Formula::iff(box_psi.clone(), Formula::not(dia_not.clone())),
            fp_premise.clone(),
        ),
    );
    let t1i = b.arith(t1.clone());
    let fp_prem_step = b.mp_chain(t1i, &t1, &[arg, det1]);
    let star = Game::star(alpha.clone());
    let fp_conc = Formula::implies(
        Formula::diamond(star.clone(), Formula::not(psi.clone())),
        Formula::not(psi.clone()),
    );
    let fp = b.push(MacroRule::Fp(fp_prem_step), fp_conc.clone());
    let box_star = Formula::boxm(star.clone(), psi.clone());
    let dia_star_not = Formula::diamond(star.clone(), Formula::not(psi.clone()));
    let det2 = b.axiom(
        AxiomId::DetBox,
        Formula::iff(box_star.clone(), Formula::not(dia_star_not.clone())),
    );
    // (<a*>!psi -> !psi) -> (([a*]psi <-> !<a*>!psi) -> (psi -> [a*]psi))
    let t2 = Formula::implies(
        fp_conc,
        Formula::implies(
            Formula::iff(box_star.clone(), Formula::not(dia_star_not)),
            Formula::implies(psi.clone(), box_star),
        ),
    );
    let t2i = b.arith(t2.clone());
    b.mp_chain(t2i, &t2, &[fp, det2]);
    b.steps
}

/// `f -> g` (argument `Arg(0)`) to `[a]f -> [a]g`.
fn mbox_fragment(phi: &Formula, psi: &Formula, game: &Game) -> Expansion {
    let mut b = Builder::new();
    let contra = Formula::implies(Formula::not(psi.clone()), Formula::not(phi.clone()));
    let t1 = Formula::implies(Formula::implies(phi.clone(), psi.clone()), contra.clone());
    let t1i = b.arith(t1);
    let contra_step = b.mp(t1i, LocalRef::Arg(0), contra);
    let dia_npsi = Formula::diamond(game.clone(), Formula::not(psi.clone()));
    let dia_nphi = Formula::diamond(game.clone(), Formula::not(phi.clone()));
    let m = b.push(
        MacroRule::M(contra_step),
        Formula::implies(dia_npsi.clone(), dia_nphi.clone()),
    );
    let box_phi = Formula::boxm(game.clone(), phi.clone());
    let box_psi = Formula::boxm(game.clone(), psi.clone());
    let d1 = b.axiom(
        AxiomId::DetBox,
        Formula::iff(box_phi.clone(), Formula::not(dia_nphi.clone())),
    );
    let d2 = b.axiom(
        AxiomId::DetBox,
        Formula::iff(box_psi.clone(), Formula::not(dia_npsi.clone())),
    );
    let t2 = Formula::implies(
        Formula::implies(dia_npsi.clone(), dia_nphi.clone()),
        Formula::implies(
            Formula::iff(box_phi.clone(), Formula::not(dia_nphi)),
            Formula::implies(
                Formula::iff(box_psi.clone(), Formula::not(dia_npsi)),
                Formula::implies(box_phi, box_psi),
            ),
        ),
    );
    let t2i = b.arith(t2.clone());
    b.mp_chain(t2i, &t2, &[m, d1, d2]);
    b.steps
}

/// Re-targets a fragment's local references by `offset` and maps its single
/// argument to `new_arg`.
fn shift_rule(rule: MacroRule, offset: usize, new_arg: LocalRef) -> MacroRule {
    let map = |r: LocalRef| match r {
        LocalRef::Arg(0) => new_arg,
        LocalRef::Arg(i) => LocalRef::Arg(i),
        LocalRef::Local(i) => LocalRef::Local(i + offset),
    };
    match rule {
        MacroRule::Axiom(a) => MacroRule::Axiom(a),
        MacroRule::Mp(a, b) => MacroRule::Mp(map(a), map(b)),
        MacroRule::Gen(x, a) => MacroRule::Gen(x, map(a)),
        MacroRule::M(a) => MacroRule::M(map(a)),
        MacroRule::Fp(a) => MacroRule::Fp(map(a)),
        MacroRule::Us {
            premise,
            pred,
            arity,
            template,
        } => MacroRule::Us {
            premise: map(premise),
            pred,
            arity,
            template,
        },
        MacroRule::Arith => MacroRule::Arith,
        MacroRule::Oracle => MacroRule::Oracle,
    }
}
