//! Discharge of arithmetic proof leaves.
//!
//! A leaf is accepted when, after abstracting every maximal non-arithmetic
//! subformula at the propositional level into an opaque atom, the formula is
//! valid under every boolean assignment of the opaque atoms, with each
//! residual linear-arithmetic formula decided exactly. Purely linear leaves
//! (the common case) go straight to the decision procedure. Leaves whose
//! validity genuinely depends on predicate symbols or quantifier-modal
//! interaction are not dischargeable here and must use oracle steps.

use crate::arith::{decide_linear, ArithError, LinearFormula, LinearVerdict};
use crate::syntax::ast::Formula;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TautError {
    #[error("not valid: {0}")]
    NotValid(String),
    #[error("too many distinct opaque subformulas ({0})")]
    TooManyOpaqueAtoms(usize),
    #[error("arithmetic conversion failed: {0}")]
    Arith(#[from] ArithError),
}

const MAX_OPAQUE: usize = 12;

/// Propositional skeleton with linear leaves kept and everything else
/// abstracted.
enum Skel {
    Lin(LinearFormula),
    Opaque(usize),
    Not(Box<Skel>),
    And(Box<Skel>, Box<Skel>),
}

pub fn discharge_arith(f: &Formula) -> Result<(), TautError> {
    let mut atoms: Vec<Formula> = Vec::new();
    let mut index: HashMap<Formula, usize> = HashMap::new();
    let skel = build_skeleton(f, &mut atoms, &mut index)?;
    let k = atoms.len();
    if k > MAX_OPAQUE {
        return Err(TautError::TooManyOpaqueAtoms(k));
    }
    for mask in 0u32..(1 << k) {
        let residual = instantiate(&skel, mask);
        match decide_linear(&residual) {
            LinearVerdict::Valid => {}
            LinearVerdict::NotValid(witness) => {
                let mut desc = String::new();
                for (i, a) in atoms.iter().enumerate() {
                    let v = mask & (1 << i) != 0;
                    desc.push_str(&format!(
                        "[{}] := {v}; ",
                        crate::syntax::format_formula(a)
                    ));
                }
                for (x, v) in &witness {
                    desc.push_str(&format!("{x} = {}; ", crate::rat::format_rat(v)));
                }
                return Err(TautError::NotValid(desc));
            }
        }
    }
    Ok(())
}

fn build_skeleton(
    f: &Formula,
    atoms: &mut Vec<Formula>,
    index: &mut HashMap<Formula, usize>,
) -> Result<Skel, TautError> {
    // A subformula that is linear arithmetic throughout, quantifiers
    // included, stays decidable as a unit.
    if let Ok(lin) = LinearFormula::try_from_formula(f) {
        return Ok(Skel::Lin(lin));
    }
    match f {
        Formula::Not(a, _) => Ok(Skel::Not(Box::new(build_skeleton(a, atoms, index)?))),
        Formula::And(a, b, _) => Ok(Skel::And(
            Box::new(build_skeleton(a, atoms, index)?),
            Box::new(build_skeleton(b, atoms, index)?),
        )),
        other => {
            let i = *index.entry(other.clone()).or_insert_with(|| {
                atoms.push(other.clone());
                atoms.len() - 1
            });
            Ok(Skel::Opaque(i))
        }
    }
}

fn instantiate(s: &Skel, mask: u32) -> LinearFormula {
    match s {
        Skel::Lin(l) => l.clone(),
        Skel::Opaque(i) => {
            if mask & (1 << i) != 0 {
                LinearFormula::True
            } else {
                LinearFormula::False
            }
        }
        Skel::Not(a) => LinearFormula::Not(Box::new(instantiate(a, mask))),
        Skel::And(a, b) => LinearFormula::And(
            Box::new(instantiate(a, mask)),
            Box::new(instantiate(b, mask)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn ok(s: &str) -> bool {
        discharge_arith(&parse_formula(s).unwrap()).is_ok()
    }

    #[test]
    fn pure_linear_leaves() {
        assert!(ok("\\forall x (x>=0 -> x+1>0)"));
        assert!(ok("x=0 -> (0=0 | 1=0)"));
        assert!(ok("\\exists x (x>0 & x<0) -> false"));
        assert!(ok("!\\exists x (x>0 & x<0)"));
        assert!(!ok("x>0"));
    }

    #[test]
    fn modal_atoms_abstract_propositionally() {
        assert!(ok("<a> f -> <a> f"));
        assert!(ok("(<a> f <-> 0=0) -> ((<b> f <-> 1=0) -> (x=0 -> 0=0 | 1=0) -> (x=0 -> <a> f | <b> f))"));
        // Unsound pattern must be rejected: distinct modal atoms are
        // independent.
        assert!(!ok("<a> f | !<b> f"));
        // Same modal subformula shares one atom.
        assert!(ok("<a> f | !<a> f"));
    }

    #[test]
    fn quantified_predicate_leaves_are_not_dischargeable() {
        assert!(!ok("\\forall x (p(x) -> p(x+1)) -> p(0)"));
    }
}
