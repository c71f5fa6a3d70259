//! Proof scripts and their verification.
//!
//! A proof is a topologically ordered list of named steps. Every conclusion
//! is re-derived from the rule, never trusted. Oracle leaves never fail a
//! proof; they are collected as obligations for the expressive base logic.

use super::axioms::{check_axiom_instance, AxiomId, KernelOptions};
use super::macros::{macro_expand, LocalRef, MacroName, MacroRule};
use super::taut::discharge_arith;
use crate::syntax::ast::Formula;
use crate::syntax::uniform_substitute;
use std::collections::HashMap;

/// Rule applied by one proof step; references name earlier steps.
#[derive(Debug, Clone)]
pub enum Rule {
    Axiom(AxiomId),
    /// `Mp(imp, ant)`: the first step concludes `ant -> conclusion`.
    Mp(String, String),
    Gen(String, String),
    M(String),
    Fp(String),
    Us {
        premise: String,
        pred: String,
        arity: usize,
        template: Formula,
    },
    Macro {
        name: MacroName,
        args: Vec<String>,
    },
    Arith,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct ProofStep {
    pub id: String,
    pub rule: Rule,
    pub conclusion: Formula,
}

#[derive(Debug, Clone)]
pub struct ProofScript {
    pub steps: Vec<ProofStep>,
    /// Name of the theorem step.
    pub qed: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Valid,
    Invalid { step: String, reason: String },
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    /// Conclusions of oracle leaves, in step order.
    pub oracle_obligations: Vec<Formula>,
    pub arith_discharged: usize,
    /// Conclusion of the qed step when valid.
    pub theorem: Option<Formula>,
}

struct Effect {
    oracle: Option<Formula>,
    arith: bool,
}

/// Checks one primitive rule application against resolved premises.
fn check_primitive(
    rule: &MacroRule,
    premise: impl Fn(LocalRef) -> Formula,
    conclusion: &Formula,
    opts: &KernelOptions,
) -> Result<Effect, String> {
    let none = Effect {
        oracle: None,
        arith: false,
    };
    match rule {
        MacroRule::Axiom(id) => {
            check_axiom_instance(*id, conclusion, opts).map_err(|e| e.to_string())?;
            Ok(none)
        }
        MacroRule::Mp(i, j) => {
            let imp = premise(*i);
            let ant = premise(*j);
            match imp.as_implies() {
                Some((a, b)) => {
                    if *a != ant {
                        return Err("antecedent mismatch".to_string());
                    }
                    if b != conclusion {
                        return Err("consequent mismatch".to_string());
                    }
                }
                None => {
                    // The implication may have been written in another
                    // desugared shape; compare with a synthesized one.
                    if imp != Formula::implies(ant.clone(), conclusion.clone()) {
                        return Err("first premise is not the required implication".to_string());
                    }
                }
            }
            Ok(none)
        }
        MacroRule::Gen(x, i) => {
            let p = premise(*i);
            if *conclusion == Formula::forall(x.clone(), p) {
                Ok(none)
            } else {
                Err("conclusion is not the universal closure of the premise".to_string())
            }
        }
        MacroRule::M(i) => {
            let p = premise(*i);
            let (l, r) = conclusion
                .as_implies()
                .ok_or("conclusion is not an implication")?;
            let (ga, phi) = match l {
                Formula::Diamond(g, b) => (g, b),
                _ => return Err("conclusion sides are not diamonds".to_string()),
            };
            let (gb, psi) = match r {
                Formula::Diamond(g, b) => (g, b),
                _ => return Err("conclusion sides are not diamonds".to_string()),
            };
            if ga != gb {
                return Err("modality games differ".to_string());
            }
            if p != Formula::implies((**phi).clone(), (**psi).clone()) {
                return Err("premise does not match the postcondition implication".to_string());
            }
            Ok(none)
        }
        MacroRule::Fp(i) => {
            let p = premise(*i);
            let (l, psi) = conclusion
                .as_implies()
                .ok_or("conclusion is not an implication")?;
            let (g, phi) = match l {
                Formula::Diamond(g, b) => (g, b),
                _ => return Err("conclusion hypothesis is not a diamond".to_string()),
            };
            let alpha = match g.as_ref() {
                crate::syntax::ast::Game::Star(a) => a,
                _ => return Err("conclusion game is not a repetition".to_string()),
            };
            let expected = Formula::implies(
                Formula::or(
                    (**phi).clone(),
                    Formula::diamond((**alpha).clone(), psi.clone()),
                ),
                psi.clone(),
            );
            if p != expected {
                return Err("premise is not the pre-fixpoint implication".to_string());
            }
            Ok(none)
        }
        MacroRule::Us {
            premise: i,
            pred,
            arity,
            template,
        } => {
            let p = premise(*i);
            let derived =
                uniform_substitute(&p, pred, *arity, template).map_err(|e| e.to_string())?;
            if derived != *conclusion {
                return Err(format!(
                    "uniform substitution yields `{}`",
                    crate::syntax::format_formula(&derived)
                ));
            }
            Ok(none)
        }
        MacroRule::Arith => {
            discharge_arith(conclusion).map_err(|e| e.to_string())?;
            Ok(Effect {
                oracle: None,
                arith: true,
            })
        }
        MacroRule::Oracle => Ok(Effect {
            oracle: Some(conclusion.clone()),
            arith: false,
        }),
    }
}

/// Checks a proof script. Deterministic; steps only reference earlier steps.
pub fn check_proof(script: &ProofScript, opts: &KernelOptions) -> Verdict {
    let mut by_id: HashMap<&str, usize> = HashMap::new();
    let mut obligations = Vec::new();
    let mut arith_count = 0usize;
    let invalid = |step: &str, reason: String| Verdict {
        status: Status::Invalid {
            step: step.to_string(),
            reason,
        },
        oracle_obligations: Vec::new(),
        arith_discharged: 0,
        theorem: None,
    };

    for (idx, step) in script.steps.iter().enumerate() {
        if by_id.contains_key(step.id.as_str()) {
            return invalid(&step.id, "duplicate step id".to_string());
        }
        let resolve = |name: &str| -> Result<usize, String> {
            match by_id.get(name) {
                Some(&i) if i < idx => Ok(i),
                Some(_) => Err(format!("step `{name}` is not earlier")),
                None => Err(format!("unknown step `{name}`")),
            }
        };
        let prim: Result<(MacroRule, Vec<Formula>), String> = match &step.rule {
            Rule::Axiom(id) => Ok((MacroRule::Axiom(*id), vec![])),
            Rule::Mp(a, b) => (|| {
                let i = resolve(a)?;
                let j = resolve(b)?;
                Ok((
                    MacroRule::Mp(LocalRef::Arg(0), LocalRef::Arg(1)),
                    vec![
                        script.steps[i].conclusion.clone(),
                        script.steps[j].conclusion.clone(),
                    ],
                ))
            })(),
            Rule::Gen(x, a) => (|| {
                let i = resolve(a)?;
                Ok((
                    MacroRule::Gen(x.clone(), LocalRef::Arg(0)),
                    vec![script.steps[i].conclusion.clone()],
                ))
            })(),
            Rule::M(a) => (|| {
                let i = resolve(a)?;
                Ok((
                    MacroRule::M(LocalRef::Arg(0)),
                    vec![script.steps[i].conclusion.clone()],
                ))
            })(),
            Rule::Fp(a) => (|| {
                let i = resolve(a)?;
                Ok((
                    MacroRule::Fp(LocalRef::Arg(0)),
                    vec![script.steps[i].conclusion.clone()],
                ))
            })(),
            Rule::Us {
                premise,
                pred,
                arity,
                template,
            } => (|| {
                let i = resolve(premise)?;
                Ok((
                    MacroRule::Us {
                        premise: LocalRef::Arg(0),
                        pred: pred.clone(),
                        arity: *arity,
                        template: template.clone(),
                    },
                    vec![script.steps[i].conclusion.clone()],
                ))
            })(),
            Rule::Arith => Ok((MacroRule::Arith, vec![])),
            Rule::Oracle => Ok((MacroRule::Oracle, vec![])),
            Rule::Macro { name, args } => {
                let arg_concs: Result<Vec<Formula>, String> = args
                    .iter()
                    .map(|a| resolve(a).map(|i| script.steps[i].conclusion.clone()))
                    .collect();
                let arg_concs = match arg_concs {
                    Ok(c) => c,
                    Err(e) => return invalid(&step.id, e),
                };
                let expansion = match macro_expand(*name, &arg_concs, &step.conclusion) {
                    Ok(x) => x,
                    Err(e) => return invalid(&step.id, e.to_string()),
                };
                // Validate the emitted fragment with the same primitives.
                let mut locals: Vec<Formula> = Vec::new();
                for (k, (rule, conc)) in expansion.iter().enumerate() {
                    let get = |r: LocalRef| -> Formula {
                        match r {
                            LocalRef::Arg(i) => arg_concs[i].clone(),
                            LocalRef::Local(i) => locals[i].clone(),
                        }
                    };
                    match check_primitive(rule, get, conc, opts) {
                        Ok(effect) => {
                            if let Some(o) = effect.oracle {
                                obligations.push(o);
                            }
                            if effect.arith {
                                arith_count += 1;
                            }
                            locals.push(conc.clone());
                        }
                        Err(e) => {
                            return invalid(
                                &step.id,
                                format!("macro {name} expansion step {k}: {e}"),
                            )
                        }
                    }
                }
                match locals.last() {
                    Some(last) if *last == step.conclusion => {}
                    _ => {
                        return invalid(
                            &step.id,
                            format!("macro {name} does not conclude the declared formula"),
                        )
                    }
                }
                by_id.insert(&step.id, idx);
                continue;
            }
        };
        let (rule, premises) = match prim {
            Ok(p) => p,
            Err(e) => return invalid(&step.id, e),
        };
        let get = |r: LocalRef| -> Formula {
            match r {
                LocalRef::Arg(i) => premises[i].clone(),
                LocalRef::Local(_) => unreachable!("no locals outside macros"),
            }
        };
        match check_primitive(&rule, get, &step.conclusion, opts) {
            Ok(effect) => {
                if let Some(o) = effect.oracle {
                    obligations.push(o);
                }
                if effect.arith {
                    arith_count += 1;
                }
            }
            Err(e) => return invalid(&step.id, e),
        }
        by_id.insert(&step.id, idx);
    }

    let theorem = match by_id.get(script.qed.as_str()) {
        Some(&i) => Some(script.steps[i].conclusion.clone()),
        None => {
            return invalid(&script.qed, "qed names an unknown step".to_string());
        }
    };
    Verdict {
        status: Status::Valid,
        oracle_obligations: obligations,
        arith_discharged: arith_count,
        theorem,
    }
}
