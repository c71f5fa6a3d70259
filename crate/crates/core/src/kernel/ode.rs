//! Symbolic solutions of polynomial differential equation systems whose
//! variable-dependency graph is acyclic, by iterated integration.

use crate::poly::{term_to_poly, Poly};
use crate::syntax::ast::Term;
use std::collections::{BTreeMap, BTreeSet};

/// Symbolic solution of an initial value problem. Each entry `(x, e)` gives
/// `x(t) = e` where `e` mentions the time variable and initial values only.
/// The order is safe for sequential assignment: no solution term mentions a
/// variable solved earlier in the list.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub time_var: String,
    pub solutions: Vec<(String, Term)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Unsolvable {
    #[error("cyclic variable dependency through {0:?}")]
    Cyclic(Vec<String>),
}

/// Solves `x' = theta(x)` symbolically for systems with an acyclic
/// dependency graph. Each returned solution satisfies `e(0) = x` and
/// `d/dt e = theta` with the other solutions substituted in, both verified
/// by symbolic differentiation before returning.
pub fn solve_polynomial_ode(
    system: &[(String, Term)],
    time_var: &str,
) -> Result<OdeSolution, Unsolvable> {
    let vars: BTreeSet<String> = system.iter().map(|(v, _)| v.clone()).collect();
    // v -> system variables its right-hand side reads.
    let deps: BTreeMap<String, BTreeSet<String>> = system
        .iter()
        .map(|(v, rhs)| {
            let reads: BTreeSet<String> = rhs.vars().intersection(&vars).cloned().collect();
            (v.clone(), reads)
        })
        .collect();

    // Solve in dependency order (dependencies first).
    let mut solved: BTreeMap<String, Poly> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut pending: Vec<String> = system.iter().map(|(v, _)| v.clone()).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|v| {
            let ready = deps[v].iter().all(|d| solved.contains_key(d));
            if ready {
                let rhs = system.iter().find(|(w, _)| w == v).map(|(_, t)| t).unwrap();
                let mut subst = solved.clone();
                subst.retain(|k, _| deps[v].contains(k));
                let integrand = term_to_poly(rhs).compose(&subst);
                let sol = Poly::var(v).add(&integrand.integrate(time_var));
                solved.insert(v.clone(), sol);
                order.push(v.clone());
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            return Err(Unsolvable::Cyclic(pending));
        }
    }

    // Verification by symbolic differentiation and evaluation at time 0.
    let full_subst: BTreeMap<String, Poly> = solved.clone();
    for (v, rhs) in system {
        let sol = &solved[v];
        assert_eq!(
            sol.eval_var(time_var, &crate::rat::rat(0)),
            Poly::var(v),
            "solution of {v} does not start at its initial value"
        );
        let derived = sol.diff(time_var);
        let expected = term_to_poly(rhs).compose(&full_subst);
        assert_eq!(derived, expected, "solution of {v} does not solve its equation");
    }

    // Emit dependents before their dependencies so that sequential
    // assignment reads only pre-state values.
    let mut emit: Vec<String> = Vec::new();
    let mut remaining: Vec<String> = system.iter().map(|(v, _)| v.clone()).collect();
    while !remaining.is_empty() {
        // Emittable when no other remaining variable depends on it.
        let emittable: Vec<String> = remaining
            .iter()
            .filter(|v| !remaining.iter().any(|w| w != *v && deps[w].contains(*v)))
            .cloned()
            .collect();
        assert!(!emittable.is_empty(), "dependency order emit failed");
        emit.extend(emittable.iter().cloned());
        remaining.retain(|v| !emittable.contains(v));
    }

    Ok(OdeSolution {
        time_var: time_var.to_string(),
        solutions: emit
            .into_iter()
            .map(|v| {
                let t = solved[&v].to_term();
                (v, t)
            })
            .collect(),
    })
}

/// Checks a claimed solution chain for the system: `e_j(0) = x_j`,
/// `d/dt e_j = theta_j` with all solutions substituted, and no solution term
/// reading a variable assigned earlier in the chain.
pub fn verify_solution_chain(
    system: &[(String, Term)],
    time_var: &str,
    chain: &[(String, Term)],
) -> Result<(), String> {
    let sys_vars: BTreeSet<String> = system.iter().map(|(v, _)| v.clone()).collect();
    let chain_vars: BTreeSet<String> = chain.iter().map(|(v, _)| v.clone()).collect();
    if sys_vars != chain_vars {
        return Err(format!(
            "solution chain assigns {chain_vars:?} but the system binds {sys_vars:?}"
        ));
    }
    let solutions: BTreeMap<String, Poly> = chain
        .iter()
        .map(|(v, e)| (v.clone(), term_to_poly(e)))
        .collect();
    let mut assigned: BTreeSet<String> = BTreeSet::new();
    for (v, e) in chain {
        for read in e.vars() {
            if assigned.contains(&read) {
                return Err(format!(
                    "solution for {v} reads {read}, which was already overwritten"
                ));
            }
        }
        assigned.insert(v.clone());
    }
    for (v, rhs) in system {
        let sol = &solutions[v];
        if sol.eval_var(time_var, &crate::rat::rat(0)) != Poly::var(v) {
            return Err(format!("solution for {v} does not equal {v} at time 0"));
        }
        let expected = term_to_poly(rhs).compose(&solutions);
        if sol.diff(time_var) != expected {
            return Err(format!(
                "solution for {v} does not satisfy {v}' = {}",
                crate::syntax::format_term(rhs)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn sys(entries: &[(&str, &str)]) -> Vec<(String, Term)> {
        entries
            .iter()
            .map(|(v, t)| (v.to_string(), parse_term(t).unwrap()))
            .collect()
    }

    #[test]
    fn solves_double_integrator() {
        let system = sys(&[("x", "v"), ("v", "a"), ("t", "1")]);
        let sol = solve_polynomial_ode(&system, "s").unwrap();
        let expect: BTreeMap<String, Poly> = [
            ("x", "x + v*s + 1/2*a*s*s"),
            ("v", "v + a*s"),
            ("t", "t + s"),
        ]
        .iter()
        .map(|(v, e)| (v.to_string(), term_to_poly(&parse_term(e).unwrap())))
        .collect();
        for (v, e) in &sol.solutions {
            assert_eq!(term_to_poly(e), expect[v], "solution for {v}");
        }
        // x reads v and a before they are overwritten.
        assert!(verify_solution_chain(&system, "s", &sol.solutions).is_ok());
    }

    #[test]
    fn solves_clock() {
        let system = sys(&[("x", "1")]);
        let sol = solve_polynomial_ode(&system, "s").unwrap();
        assert_eq!(
            term_to_poly(&sol.solutions[0].1),
            term_to_poly(&parse_term("x+s").unwrap())
        );
    }

    #[test]
    fn rejects_self_loop() {
        let system = sys(&[("x", "x")]);
        match solve_polynomial_ode(&system, "s") {
            Err(Unsolvable::Cyclic(vs)) => assert_eq!(vs, vec!["x".to_string()]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_chain() {
        let system = sys(&[("x", "v"), ("v", "a"), ("t", "1")]);
        // Perturbing a coefficient must fail verification.
        let bad = sys(&[("x", "x + v*s + 3/2*a*s*s"), ("v", "v + a*s"), ("t", "t + s")]);
        assert!(verify_solution_chain(&system, "s", &bad).is_err());
        // Wrong order: v assigned before x reads it.
        let misordered = sys(&[("v", "v + a*s"), ("x", "x + v*s + 1/2*a*s*s"), ("t", "t + s")]);
        assert!(verify_solution_chain(&system, "s", &misordered).is_err());
    }
}
