//! Axiom schemata with explicit side-condition checks.

use super::ode::verify_solution_chain;
use crate::syntax::ast::{Formula, Game, Term};
use crate::syntax::{formula_vars, game_vars, substitute};
use std::fmt;

/// Identifiers of the axiom schemata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxiomId {
    /// `[a] f <-> !<a> !f` — determinacy.
    DetBox,
    /// `f(t) <-> <x:=t> f(x)` — assignment by admissible substitution.
    AssignD,
    /// `<{x'=t}> f <-> \exists s (s>=0 & <x:=sol(s)> f)` — solve by the
    /// verified symbolic solution; the time variable must be fresh.
    SolveD,
    /// `<?p> f <-> p & f`.
    TestD,
    /// `<a ++ b> f <-> <a> f | <b> f`.
    ChoiceD,
    /// `<a; b> f <-> <a> <b> f`.
    ComposeD,
    /// `f | <a> <a*> f -> <a*> f` — pre-fixpoint direction.
    IterateD,
    /// `<a*> f -> f | <a> <a*> f` — derived converse, admitted as a schema.
    IterateDConv,
    /// `<a^d> f <-> !<a> !f`.
    DualD,
    /// `f -> ([a] true -> [a] f)` when no free variable of `f` is bound by
    /// `a`; sound extension, off by default.
    Vk,
}

impl AxiomId {
    pub fn parse(s: &str) -> Option<AxiomId> {
        Some(match s {
            "DetBox" => AxiomId::DetBox,
            "AssignD" => AxiomId::AssignD,
            "SolveD" => AxiomId::SolveD,
            "TestD" => AxiomId::TestD,
            "ChoiceD" => AxiomId::ChoiceD,
            "ComposeD" => AxiomId::ComposeD,
            "IterateD" => AxiomId::IterateD,
            "IterateDConv" => AxiomId::IterateDConv,
            "DualD" => AxiomId::DualD,
            "VK" => AxiomId::Vk,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            AxiomId::DetBox => "DetBox",
            AxiomId::AssignD => "AssignD",
            AxiomId::SolveD => "SolveD",
            AxiomId::TestD => "TestD",
            AxiomId::ChoiceD => "ChoiceD",
            AxiomId::ComposeD => "ComposeD",
            AxiomId::IterateD => "IterateD",
            AxiomId::IterateDConv => "IterateDConv",
            AxiomId::DualD => "DualD",
            AxiomId::Vk => "VK",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("schema mismatch for {axiom}: {reason}")]
pub struct SchemaError {
    pub axiom: &'static str,
    pub reason: String,
}

fn err(axiom: AxiomId, reason: impl Into<String>) -> SchemaError {
    SchemaError {
        axiom: axiom.name(),
        reason: reason.into(),
    }
}

/// Kernel configuration: sound extension axioms are off by default.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelOptions {
    pub enable_vk: bool,
}

/// Checks that `f` is an instance of the schema `id`, including side
/// conditions. Equivalence axioms are accepted in either orientation.
pub fn check_axiom_instance(
    id: AxiomId,
    f: &Formula,
    opts: &KernelOptions,
) -> Result<(), SchemaError> {
    match id {
        AxiomId::DetBox => both_orientations(id, f, |l, r| {
            let (g, body) = match l {
                Formula::Box_(g, body) => (g, body),
                _ => return Err("left side is not a box modality".to_string()),
            };
            let expected = Formula::not(Formula::diamond(
                (**g).clone(),
                Formula::not((**body).clone()),
            ));
            if *r == expected {
                Ok(())
            } else {
                Err("right side is not the negated diamond dual".to_string())
            }
        }),
        AxiomId::AssignD => both_orientations(id, f, |l, r| {
            let (g, body) = match r {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err("no assignment modality side".to_string()),
            };
            let (x, t) = match g.as_ref() {
                Game::Assign(x, t) => (x, t),
                _ => return Err("modality game is not an assignment".to_string()),
            };
            match substitute(body, x, t) {
                Ok(expected) => {
                    if *l == expected {
                        Ok(())
                    } else {
                        Err(format!(
                            "substituted side differs from `{}`",
                            crate::syntax::format_formula(&expected)
                        ))
                    }
                }
                Err(e) => Err(format!("substitution not admissible: {e}")),
            }
        }),
        AxiomId::SolveD => both_orientations(id, f, |l, r| check_solve(l, r)),
        AxiomId::TestD => both_orientations(id, f, |l, r| {
            let (g, body) = match l {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err("left side is not a diamond".to_string()),
            };
            let test = match g.as_ref() {
                Game::Test(t) => t,
                _ => return Err("modality game is not a test".to_string()),
            };
            let expected = Formula::and((**test).clone(), (**body).clone());
            if *r == expected {
                Ok(())
            } else {
                Err("right side is not `test & body`".to_string())
            }
        }),
        AxiomId::ChoiceD => both_orientations(id, f, |l, r| {
            let (g, body) = match l {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err("left side is not a diamond".to_string()),
            };
            let (a, b) = match g.as_ref() {
                Game::Choice(a, b) => (a, b),
                _ => return Err("modality game is not a choice".to_string()),
            };
            let expected = Formula::or(
                Formula::diamond((**a).clone(), (**body).clone()),
                Formula::diamond((**b).clone(), (**body).clone()),
            );
            if *r == expected {
                Ok(())
            } else {
                Err("right side is not the disjunction of branch diamonds".to_string())
            }
        }),
        AxiomId::ComposeD => both_orientations(id, f, |l, r| {
            let (g, body) = match l {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err("left side is not a diamond".to_string()),
            };
            let (a, b) = match g.as_ref() {
                Game::Seq(a, b) => (a, b),
                _ => return Err("modality game is not sequential".to_string()),
            };
            let expected = Formula::diamond(
                (**a).clone(),
                Formula::diamond((**b).clone(), (**body).clone()),
            );
            if *r == expected {
                Ok(())
            } else {
                Err("right side is not the nested diamond".to_string())
            }
        }),
        AxiomId::IterateD => {
            let (l, r) = f
                .as_implies()
                .ok_or_else(|| err(id, "not an implication"))?;
            let (g, body) = match r {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err(err(id, "conclusion is not a repetition diamond")),
            };
            let alpha = match g.as_ref() {
                Game::Star(a) => a,
                _ => return Err(err(id, "conclusion game is not a repetition")),
            };
            let expected = Formula::or(
                (**body).clone(),
                Formula::diamond((**alpha).clone(), r.clone()),
            );
            if *l == expected {
                Ok(())
            } else {
                Err(err(id, "hypothesis is not `f | <a><a*>f`"))
            }
        }
        AxiomId::IterateDConv => {
            let (l, r) = f
                .as_implies()
                .ok_or_else(|| err(id, "not an implication"))?;
            let (g, body) = match l {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err(err(id, "hypothesis is not a repetition diamond")),
            };
            let alpha = match g.as_ref() {
                Game::Star(a) => a,
                _ => return Err(err(id, "hypothesis game is not a repetition")),
            };
            let expected = Formula::or(
                (**body).clone(),
                Formula::diamond((**alpha).clone(), l.clone()),
            );
            if *r == expected {
                Ok(())
            } else {
                Err(err(id, "conclusion is not `f | <a><a*>f`"))
            }
        }
        AxiomId::DualD => both_orientations(id, f, |l, r| {
            let (g, body) = match l {
                Formula::Diamond(g, body) => (g, body),
                _ => return Err("left side is not a diamond".to_string()),
            };
            let inner = match g.as_ref() {
                Game::Dual(a, _) => a,
                _ => return Err("modality game is not a dual".to_string()),
            };
            let expected = Formula::not(Formula::diamond(
                (**inner).clone(),
                Formula::not((**body).clone()),
            ));
            if *r == expected {
                Ok(())
            } else {
                Err("right side is not the negated inner diamond".to_string())
            }
        }),
        AxiomId::Vk => {
            if !opts.enable_vk {
                return Err(err(id, "extension axiom VK is disabled"));
            }
            let (phi, rest) = f
                .as_implies()
                .ok_or_else(|| err(id, "not an implication"))?;
            let (l, r) = rest
                .as_implies()
                .ok_or_else(|| err(id, "consequent is not an implication"))?;
            let g = match (l, r) {
                (Formula::Box_(g1, tru), Formula::Box_(g2, body)) => {
                    if **tru != Formula::tru() {
                        return Err(err(id, "inner hypothesis is not `[a] true`"));
                    }
                    if g1 != g2 {
                        return Err(err(id, "games differ"));
                    }
                    if **body != *phi {
                        return Err(err(id, "postcondition differs from the hypothesis"));
                    }
                    g1
                }
                _ => return Err(err(id, "consequent is not `[a]true -> [a]f`")),
            };
            let fv = formula_vars(phi).free;
            let bv = game_vars(g).bound;
            if let Some(x) = fv.intersection(&bv).next() {
                return Err(err(id, format!("free variable `{x}` is bound by the game")));
            }
            Ok(())
        }
    }
}

fn both_orientations(
    id: AxiomId,
    f: &Formula,
    check: impl Fn(&Formula, &Formula) -> Result<(), String>,
) -> Result<(), SchemaError> {
    let (l, r) = f.as_iff().ok_or_else(|| err(id, "not an equivalence"))?;
    match check(l, r) {
        Ok(()) => Ok(()),
        Err(e1) => match check(r, l) {
            Ok(()) => Ok(()),
            Err(e2) => Err(err(id, format!("{e1}; flipped: {e2}"))),
        },
    }
}

/// `<{x'=t,...}> f <-> \exists s (s>=0 & <x1:=e1>...<xn:=en> f)` with the
/// chain verified as the symbolic solution and `s` fresh.
fn check_solve(l: &Formula, r: &Formula) -> Result<(), String> {
    let (g, body) = match l {
        Formula::Diamond(g, body) => (g, body),
        _ => return Err("left side is not a diamond".to_string()),
    };
    let sys = match g.as_ref() {
        Game::Ode(sys) => sys,
        _ => return Err("modality game is not a differential equation".to_string()),
    };
    if !sys.domain_is_trivial() {
        return Err(
            "evolution domains are rejected here; remove them via the domain transformation first"
                .to_string(),
        );
    }
    let (time, inner) = match r {
        Formula::Exists(t, inner) => (t, inner),
        _ => return Err("right side is not existentially quantified".to_string()),
    };
    let (guard, mut chain_f) = match inner.as_ref() {
        Formula::And(a, b, _) => (a, b.as_ref()),
        _ => return Err("right side body is not a conjunction".to_string()),
    };
    let expected_guard = Formula::geq(Term::var(time.clone()), Term::int(0));
    if **guard != expected_guard {
        return Err("guard is not `t >= 0`".to_string());
    }
    let mut chain: Vec<(String, Term)> = Vec::new();
    loop {
        match chain_f {
            Formula::Diamond(g, next) => match g.as_ref() {
                Game::Assign(x, e) => {
                    chain.push((x.clone(), e.clone()));
                    chain_f = next;
                }
                _ => break,
            },
            _ => break,
        }
    }
    if chain.is_empty() {
        return Err("no assignment chain after the guard".to_string());
    }
    if chain_f != body.as_ref() {
        return Err("postconditions differ".to_string());
    }
    // Freshness: the time variable may not occur in the differential
    // equation side at all.
    let lhs_vars = formula_vars(l).all();
    if lhs_vars.contains(time) {
        return Err(format!("time variable `{time}` is not fresh"));
    }
    verify_solution_chain(&sys.eqs, time, &chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn check(id: AxiomId, s: &str) -> Result<(), SchemaError> {
        check_axiom_instance(id, &parse_formula(s).unwrap(), &KernelOptions::default())
    }

    #[test]
    fn choice_axiom() {
        check(AxiomId::ChoiceD, "<a ++ b> f <-> (<a> f | <b> f)").unwrap();
        assert!(check(AxiomId::ChoiceD, "<a ++ b> f <-> (<b> f | <a> f)").is_err());
    }

    #[test]
    fn detbox_axiom() {
        check(AxiomId::DetBox, "[a] f <-> !<a> !f").unwrap();
        check(AxiomId::DetBox, "!<a> !f <-> [a] f").unwrap();
        assert!(check(AxiomId::DetBox, "[a] f <-> <a> f").is_err());
    }

    #[test]
    fn assign_axiom() {
        check(AxiomId::AssignD, "x+1>0 <-> <x:=x+1> x>0").unwrap();
        check(AxiomId::AssignD, "0=0 <-> <x:=0> x=0").unwrap();
        assert!(check(AxiomId::AssignD, "x>0 <-> <x:=x+1> x>0").is_err());
    }

    #[test]
    fn solve_axiom() {
        check(
            AxiomId::SolveD,
            "<{x'=1}> x>0 <-> \\exists t (t>=0 & <x:=x+t> x>0)",
        )
        .unwrap();
        // A wrong solution is rejected.
        assert!(check(
            AxiomId::SolveD,
            "<{x'=1}> x>0 <-> \\exists t (t>=0 & <x:=x+2*t> x>0)",
        )
        .is_err());
        // Double integrator with the chain in dependency order.
        check(
            AxiomId::SolveD,
            "<{x'=v, v'=a}> x>0 <-> \\exists t (t>=0 & <x:=x+v*t+1/2*a*t*t> <v:=v+a*t> x>0)",
        )
        .unwrap();
        // Stale time variable is rejected.
        assert!(check(
            AxiomId::SolveD,
            "<{x'=1}> t>0 <-> \\exists t (t>=0 & <x:=x+t> t>0)",
        )
        .is_err());
    }

    #[test]
    fn iterate_axiom() {
        check(AxiomId::IterateD, "f | <a> <a*> f -> <a*> f").unwrap();
        check(AxiomId::IterateDConv, "<a*> f -> f | <a> <a*> f").unwrap();
        assert!(check(AxiomId::IterateD, "<a*> f -> f | <a> <a*> f").is_err());
    }

    #[test]
    fn vk_gating_and_side_condition() {
        let f = parse_formula("x=0 -> ([y:=0; (?y=1)^d] true -> [y:=0; (?y=1)^d] x=0)").unwrap();
        assert!(check_axiom_instance(AxiomId::Vk, &f, &KernelOptions::default()).is_err());
        let opts = KernelOptions { enable_vk: true };
        check_axiom_instance(AxiomId::Vk, &f, &opts).unwrap();
        // Side condition: free variable bound by the game.
        let bad = parse_formula("y=0 -> ([y:=0] true -> [y:=0] y=0)").unwrap();
        assert!(check_axiom_instance(AxiomId::Vk, &bad, &opts).is_err());
    }
}
