//! Linear real arithmetic: validity of quantified boolean combinations of
//! linear constraints, decided by variable elimination, plus a randomized
//! falsifier for oracle obligations mentioning uninterpreted predicates.

use crate::rat::{rat, Rat};
use crate::syntax::ast::{Formula, Term};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Linear arithmetic formula over rational-coefficient atoms
/// `sum c_i*x_i (>=|>) c`. Built from [`Formula`] by [`LinearFormula::try_from_formula`];
/// predicates and modalities are rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearFormula {
    /// `expr >= 0` (`strict` false) or `expr > 0` (`strict` true).
    Atom(LinExpr, bool),
    Not(Box<LinearFormula>),
    And(Box<LinearFormula>, Box<LinearFormula>),
    Or(Box<LinearFormula>, Box<LinearFormula>),
    Exists(String, Box<LinearFormula>),
    True,
    False,
}

/// Linear expression `sum coeffs[x]*x + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    fn from_term(t: &Term) -> Result<LinExpr, ArithError> {
        let p = crate::poly::term_to_poly(t);
        let mut out = LinExpr {
            coeffs: BTreeMap::new(),
            constant: rat(0),
        };
        for (m, c) in &p.terms {
            match m.len() {
                0 => out.constant = c.clone(),
                1 => {
                    let (x, e) = m.iter().next().unwrap();
                    if *e != 1 {
                        return Err(ArithError::NonlinearAtom(format!("{x}^{e}")));
                    }
                    out.coeffs.insert(x.clone(), c.clone());
                }
                _ => {
                    return Err(ArithError::NonlinearAtom(format!("{m:?}")));
                }
            }
        }
        Ok(out)
    }

    fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (x, c) in &other.coeffs {
            let e = out.coeffs.entry(x.clone()).or_insert_with(|| rat(0));
            *e -= c;
            if e.is_zero() {
                out.coeffs.remove(x);
            }
        }
        out.constant = &out.constant - &other.constant;
        out
    }

    fn vars(&self) -> BTreeSet<String> {
        self.coeffs.keys().cloned().collect()
    }

    fn eval(&self, v: &BTreeMap<String, Rat>) -> Rat {
        let mut acc = self.constant.clone();
        for (x, c) in &self.coeffs {
            acc += c * v.get(x).cloned().unwrap_or_else(|| rat(0));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("nonlinear atom at {0}")]
    NonlinearAtom(String),
    #[error("not a linear-arithmetic formula: contains {0}")]
    UnsupportedConstruct(String),
}

/// Verdict of the linear decision procedure.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearVerdict {
    Valid,
    /// A rational assignment to the free variables falsifying the formula.
    NotValid(BTreeMap<String, Rat>),
}

impl LinearFormula {
    /// Converts a predicate- and modality-free formula. `Exists` is kept;
    /// universal quantifiers arrive desugared as `!exists!`.
    pub fn try_from_formula(f: &Formula) -> Result<LinearFormula, ArithError> {
        match f {
            Formula::Pred(p, _) => Err(ArithError::UnsupportedConstruct(format!(
                "predicate symbol {p}"
            ))),
            Formula::Geq(a, b, _) => {
                let e = LinExpr::from_term(a)?.sub(&LinExpr::from_term(b)?);
                Ok(LinearFormula::Atom(e, false))
            }
            Formula::Not(a, _) => Ok(LinearFormula::Not(Box::new(Self::try_from_formula(a)?))),
            Formula::And(a, b, _) => Ok(LinearFormula::And(
                Box::new(Self::try_from_formula(a)?),
                Box::new(Self::try_from_formula(b)?),
            )),
            Formula::Exists(x, a) => Ok(LinearFormula::Exists(
                x.clone(),
                Box::new(Self::try_from_formula(a)?),
            )),
            Formula::Diamond(..) | Formula::Box_(..) => {
                Err(ArithError::UnsupportedConstruct("modality".to_string()))
            }
        }
    }

    fn free_vars(&self) -> BTreeSet<String> {
        match self {
            LinearFormula::Atom(e, _) => e.vars(),
            LinearFormula::Not(a) => a.free_vars(),
            LinearFormula::And(a, b) | LinearFormula::Or(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            LinearFormula::Exists(x, a) => {
                let mut s = a.free_vars();
                s.remove(x);
                s
            }
            LinearFormula::True | LinearFormula::False => BTreeSet::new(),
        }
    }

    fn evaluate(&self, v: &BTreeMap<String, Rat>) -> bool {
        match self {
            LinearFormula::Atom(e, strict) => {
                let val = e.eval(v);
                if *strict {
                    val.is_positive()
                } else {
                    !val.is_negative()
                }
            }
            LinearFormula::Not(a) => !a.evaluate(v),
            LinearFormula::And(a, b) => a.evaluate(v) && b.evaluate(v),
            LinearFormula::Or(a, b) => a.evaluate(v) || b.evaluate(v),
            LinearFormula::Exists(..) => panic!("evaluate on quantified formula"),
            LinearFormula::True => true,
            LinearFormula::False => false,
        }
    }
}

/// Decides validity of a linear formula. Free variables are read
/// universally. `NotValid` carries a falsifying rational witness.
pub fn decide_linear(f: &LinearFormula) -> LinearVerdict {
    // phi valid  iff  not exists(free vars). not phi  satisfiable.
    let negated = LinearFormula::Not(Box::new(f.clone()));
    match satisfy(&negated) {
        Some(witness) => LinearVerdict::NotValid(witness),
        None => LinearVerdict::Valid,
    }
}

/// Convenience wrapper: converts and decides a syntax-level formula.
pub fn decide_linear_formula(f: &Formula) -> Result<LinearVerdict, ArithError> {
    Ok(decide_linear(&LinearFormula::try_from_formula(f)?))
}

/// A satisfying assignment for the existential closure of `f`, or `None`.
fn satisfy(f: &LinearFormula) -> Option<BTreeMap<String, Rat>> {
    // Negation normal form over atoms with strictness polarity, then DNF,
    // then Fourier–Motzkin per disjunct, innermost quantifiers first.
    let nnf = to_nnf(f, false);
    sat_nnf(&nnf)
}

/// NNF with `Exists` kept structural; `negate` tracks polarity.
fn to_nnf(f: &LinearFormula, negate: bool) -> LinearFormula {
    match f {
        LinearFormula::Atom(e, strict) => {
            if negate {
                // !(e >= 0) == -e > 0 ; !(e > 0) == -e >= 0
                let neg = LinExpr {
                    coeffs: e.coeffs.iter().map(|(x, c)| (x.clone(), -c.clone())).collect(),
                    constant: -e.constant.clone(),
                };
                LinearFormula::Atom(neg, !*strict)
            } else {
                f.clone()
            }
        }
        LinearFormula::Not(a) => to_nnf(a, !negate),
        LinearFormula::And(a, b) => {
            let (l, r) = (to_nnf(a, negate), to_nnf(b, negate));
            if negate {
                LinearFormula::Or(Box::new(l), Box::new(r))
            } else {
                LinearFormula::And(Box::new(l), Box::new(r))
            }
        }
        LinearFormula::Or(a, b) => {
            let (l, r) = (to_nnf(a, negate), to_nnf(b, negate));
            if negate {
                LinearFormula::And(Box::new(l), Box::new(r))
            } else {
                LinearFormula::Or(Box::new(l), Box::new(r))
            }
        }
        LinearFormula::Exists(x, a) => {
            let body = to_nnf(a, false);
            let ex = LinearFormula::Exists(x.clone(), Box::new(body));
            if negate {
                // Left for the elimination stage, which negates the
                // quantifier-free result of eliminating the body.
                LinearFormula::Not(Box::new(ex))
            } else {
                ex
            }
        }
        LinearFormula::True => {
            if negate {
                LinearFormula::False
            } else {
                LinearFormula::True
            }
        }
        LinearFormula::False => {
            if negate {
                LinearFormula::True
            } else {
                LinearFormula::False
            }
        }
    }
}

/// Satisfiability with witness for NNF formulas (with residual `Not(Exists)`
/// blocks handled by recursion).
fn sat_nnf(f: &LinearFormula) -> Option<BTreeMap<String, Rat>> {
    // Eliminate inner quantifier blocks first: replace every Exists/Not-Exists
    // subformula by its quantifier-free equivalent over its free variables.
    let qf = eliminate_quantifiers(f);
    let free: Vec<String> = qf.free_vars().into_iter().collect();
    let disjuncts = dnf(&qf);
    for conj in disjuncts {
        if let Some(w) = sat_conjunction(&conj, &free) {
            return Some(w);
        }
    }
    None
}

/// One conjunct: `expr >= 0` or `expr > 0`.
type Constraint = (LinExpr, bool);

fn dnf(f: &LinearFormula) -> Vec<Vec<Constraint>> {
    match f {
        LinearFormula::Atom(e, s) => vec![vec![(e.clone(), *s)]],
        LinearFormula::And(a, b) => {
            let la = dnf(a);
            let lb = dnf(b);
            let mut out = Vec::new();
            for x in &la {
                for y in &lb {
                    let mut c = x.clone();
                    c.extend(y.clone());
                    out.push(c);
                }
            }
            out
        }
        LinearFormula::Or(a, b) => {
            let mut out = dnf(a);
            out.extend(dnf(b));
            out
        }
        LinearFormula::True => vec![vec![]],
        LinearFormula::False => vec![],
        LinearFormula::Not(_) | LinearFormula::Exists(..) => {
            unreachable!("quantifiers eliminated before DNF")
        }
    }
}

/// Replaces quantified subformulas bottom-up by quantifier-free equivalents.
fn eliminate_quantifiers(f: &LinearFormula) -> LinearFormula {
    match f {
        LinearFormula::Atom(..) | LinearFormula::True | LinearFormula::False => f.clone(),
        LinearFormula::And(a, b) => LinearFormula::And(
            Box::new(eliminate_quantifiers(a)),
            Box::new(eliminate_quantifiers(b)),
        ),
        LinearFormula::Or(a, b) => LinearFormula::Or(
            Box::new(eliminate_quantifiers(a)),
            Box::new(eliminate_quantifiers(b)),
        ),
        LinearFormula::Not(a) => {
            let inner = eliminate_quantifiers(a);
            // inner is quantifier-free; push the negation through.
            to_nnf(&inner, true)
        }
        LinearFormula::Exists(x, a) => {
            let inner = eliminate_quantifiers(a);
            eliminate_exists(&inner, x)
        }
    }
}

/// Fourier–Motzkin elimination of `x` from a quantifier-free formula.
pub fn eliminate_exists(f: &LinearFormula, x: &str) -> LinearFormula {
    let disjuncts = dnf(f);
    let mut out: Option<LinearFormula> = None;
    for conj in disjuncts {
        let elim = eliminate_from_conjunction(&conj, x);
        let piece = elim
            .into_iter()
            .map(|(e, s)| LinearFormula::Atom(e, s))
            .fold(LinearFormula::True, |acc, c| match acc {
                LinearFormula::True => c,
                other => LinearFormula::And(Box::new(other), Box::new(c)),
            });
        out = Some(match out {
            None => piece,
            Some(o) => LinearFormula::Or(Box::new(o), Box::new(piece)),
        });
    }
    out.unwrap_or(LinearFormula::False)
}

/// Fourier–Motzkin on one conjunction: combines lower and upper bounds on
/// `x`; strictness propagates when either side is strict.
fn eliminate_from_conjunction(conj: &[Constraint], x: &str) -> Vec<Constraint> {
    let mut lowers: Vec<(LinExpr, bool)> = Vec::new(); // x >=/ > bound-expr
    let mut uppers: Vec<(LinExpr, bool)> = Vec::new(); // x <=/ < bound-expr
    let mut rest: Vec<Constraint> = Vec::new();
    for (e, strict) in conj {
        match e.coeffs.get(x) {
            None => rest.push((e.clone(), *strict)),
            Some(c) => {
                // c*x + r >= 0  ->  x >= -r/c (c>0) or x <= -r/c (c<0)
                let mut r = e.clone();
                r.coeffs.remove(x);
                let bound = LinExpr {
                    coeffs: r
                        .coeffs
                        .iter()
                        .map(|(v, k)| (v.clone(), -(k / c)))
                        .collect(),
                    constant: -(&r.constant / c),
                };
                if c.is_positive() {
                    lowers.push((bound, *strict));
                } else {
                    uppers.push((bound, *strict));
                }
            }
        }
    }
    for (lo, ls) in &lowers {
        for (hi, hs) in &uppers {
            // lo <= x <= hi requires hi - lo >= 0 (strict if either side is).
            rest.push((hi.sub(lo), *ls || *hs));
        }
    }
    rest
}

/// Witness search for a conjunction by eliminating variables one at a time
/// and back-substituting rational values inside the surviving bounds.
fn sat_conjunction(conj: &[Constraint], free: &[String]) -> Option<BTreeMap<String, Rat>> {
    let mut stages: Vec<(String, Vec<Constraint>)> = Vec::new();
    let mut current = conj.to_vec();
    let mut vars: Vec<String> = free.to_vec();
    // Eliminate every variable appearing in the constraints.
    let mentioned: BTreeSet<String> = current.iter().flat_map(|(e, _)| e.vars()).collect();
    vars.retain(|v| mentioned.contains(v));
    for v in vars.clone() {
        stages.push((v.clone(), current.clone()));
        current = eliminate_from_conjunction(&current, &v);
    }
    // Ground conjunction: every atom must hold.
    let empty = BTreeMap::new();
    for (e, strict) in &current {
        let val = e.eval(&empty);
        let ok = if *strict {
            val.is_positive()
        } else {
            !val.is_negative()
        };
        if !ok {
            return None;
        }
    }
    // Back-substitute.
    let mut witness: BTreeMap<String, Rat> = BTreeMap::new();
    for (v, constraints) in stages.iter().rev() {
        let mut lo: Option<(Rat, bool)> = None; // (value, strict)
        let mut hi: Option<(Rat, bool)> = None;
        for (e, strict) in constraints {
            if let Some(c) = e.coeffs.get(v) {
                let mut r = e.clone();
                r.coeffs.remove(v);
                let bound = -(r.eval(&witness) / c);
                if c.is_positive() {
                    if lo.as_ref().map_or(true, |(b, bs)| {
                        bound > *b || (bound == *b && *strict && !bs)
                    }) {
                        lo = Some((bound, *strict));
                    }
                } else if hi.as_ref().map_or(true, |(b, bs)| {
                    bound < *b || (bound == *b && *strict && !bs)
                }) {
                    hi = Some((bound, *strict));
                }
            }
        }
        let value = match (&lo, &hi) {
            (None, None) => rat(0),
            (Some((l, ls)), None) => {
                if *ls {
                    l + rat(1)
                } else {
                    l.clone()
                }
            }
            (None, Some((h, hs))) => {
                if *hs {
                    h - rat(1)
                } else {
                    h.clone()
                }
            }
            (Some((l, ls)), Some((h, hs))) => {
                if l == h {
                    if *ls || *hs {
                        return None;
                    }
                    l.clone()
                } else if l < h {
                    (l + h) / rat(2)
                } else {
                    return None;
                }
            }
        };
        witness.insert(v.clone(), value);
    }
    // Defensive: confirm the witness satisfies the original conjunction.
    for (e, strict) in conj {
        let val = e.eval(&witness);
        let ok = if *strict {
            val.is_positive()
        } else {
            !val.is_negative()
        };
        if !ok {
            return None;
        }
    }
    Some(witness)
}

/// Outcome of the randomized oracle falsifier.
#[derive(Debug, Clone)]
pub enum FalsifyOutcome {
    NoCounterexampleFound,
    Counterexample {
        interpretation: crate::semantics::PredicateInterpretation,
        state: BTreeMap<String, Rat>,
        trial: usize,
    },
}

/// Searches for a counterexample to an oracle obligation by sampling
/// predicate interpretations as random box-union regions and rational
/// states, then evaluating the formula on the region backend. Deterministic
/// given the seed.
pub fn falsify_oracle(
    f: &Formula,
    budget: usize,
    seed: u64,
) -> Result<FalsifyOutcome, crate::semantics::SemError> {
    use crate::regions::{Interval, Region};
    use crate::semantics::{PredicateInterpretation, RegionEval, RepetitionMode, Schedule};
    use rand::Rng;
    use rand::SeedableRng;

    let vars = crate::syntax::formula_vars(f);
    let dims: Vec<String> = vars.all().into_iter().collect();
    let preds = crate::syntax::predicate_arities(f);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let sample_rat = |rng: &mut rand_chacha::ChaCha8Rng| -> Rat {
        let denom = *[1i64, 2, 3, 4].iter().nth(rng.gen_range(0..4)).unwrap();
        let numer = rng.gen_range(-4 * denom..=4 * denom);
        crate::rat::ratio(numer, denom)
    };

    for trial in 0..budget {
        let mut interp = PredicateInterpretation::new();
        for (p, &arity) in &preds {
            // Nullary predicates are all-or-nothing.
            if arity == 0 {
                let region = if rng.gen_bool(0.5) {
                    Region::full(vec![])
                } else {
                    Region::empty(vec![])
                };
                interp.insert(p.clone(), region);
                continue;
            }
            let slot_dims = PredicateInterpretation::slot_dims(arity);
            let n_boxes = rng.gen_range(0..=3);
            let mut boxes = Vec::new();
            for _ in 0..n_boxes {
                let mut ivs = Vec::new();
                for _ in 0..arity {
                    let iv = loop {
                        let lo_inf = rng.gen_bool(0.2);
                        let hi_inf = rng.gen_bool(0.2);
                        let a = sample_rat(&mut rng);
                        let b = sample_rat(&mut rng);
                        let (lo, hi) = if a <= b { (a, b) } else { (b.clone(), a) };
                        let candidate = Interval::new(
                            if lo_inf { None } else { Some(lo) },
                            rng.gen_bool(0.5),
                            if hi_inf { None } else { Some(hi) },
                            rng.gen_bool(0.5),
                        );
                        if let Some(iv) = candidate {
                            break iv;
                        }
                    };
                    ivs.push(iv);
                }
                boxes.push(ivs);
            }
            interp.insert(p.clone(), Region::from_boxes(slot_dims, boxes));
        }
        let state: BTreeMap<String, Rat> =
            dims.iter().map(|d| (d.clone(), sample_rat(&mut rng))).collect();

        let ev = RegionEval {
            dims: dims.clone(),
            interp: &interp,
            mode: RepetitionMode::Lfp,
            schedule: Schedule::default(),
        };
        let truth = ev.truth_set(f)?;
        let point: Vec<Rat> = dims.iter().map(|d| state[d].clone()).collect();
        if !truth.contains_point(&point) {
            return Ok(FalsifyOutcome::Counterexample {
                interpretation: interp,
                state,
                trial,
            });
        }
    }
    Ok(FalsifyOutcome::NoCounterexampleFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn decide(s: &str) -> LinearVerdict {
        decide_linear_formula(&parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn validity_examples() {
        assert_eq!(decide("\\forall x (x>=0 -> x+1>0)"), LinearVerdict::Valid);
        assert_eq!(decide("x=0 -> (0=0 | 1=0)"), LinearVerdict::Valid);
        match decide("\\exists x (x>0 & x<0)") {
            LinearVerdict::NotValid(_) => {}
            v => panic!("expected not_valid, got {v:?}"),
        }
    }

    #[test]
    fn witnesses_falsify() {
        // Free variables are universal; the witness must falsify exactly.
        match decide("x >= 1") {
            LinearVerdict::NotValid(w) => {
                assert!(w["x"] < crate::rat::rat(1));
            }
            v => panic!("expected witness, got {v:?}"),
        }
        match decide("x > y -> x > y + 1") {
            LinearVerdict::NotValid(w) => {
                assert!(w["x"] > w["y"]);
                assert!(w["x"] <= &w["y"] + crate::rat::rat(1));
            }
            v => panic!("expected witness, got {v:?}"),
        }
    }

    #[test]
    fn strictness_is_tracked_exactly() {
        assert_eq!(decide("x > 0 -> x >= 0"), LinearVerdict::Valid);
        assert!(matches!(
            decide("x >= 0 -> x > 0"),
            LinearVerdict::NotValid(_)
        ));
        assert_eq!(
            decide("\\exists x (x > 0 & x < 1/1000000)"),
            LinearVerdict::Valid
        );
    }

    #[test]
    fn rejects_nonlinear_and_predicates() {
        assert!(matches!(
            LinearFormula::try_from_formula(&parse_formula("x*x >= 0").unwrap()),
            Err(ArithError::NonlinearAtom(_))
        ));
        assert!(LinearFormula::try_from_formula(&parse_formula("p(x)").unwrap()).is_err());
    }

    #[test]
    fn elimination_preserves_validity() {
        for s in [
            "\\forall x (x>=0 -> x+1>0)",
            "\\forall x \\forall y (x>y -> x>=y)",
            "\\exists x (x>3 & x<4)",
            "\\forall y \\exists x (x > y)",
            "\\exists x (2*x = 7)",
        ] {
            let f = LinearFormula::try_from_formula(&parse_formula(s).unwrap()).unwrap();
            assert_eq!(decide_linear(&f), LinearVerdict::Valid, "{s}");
        }
    }

    #[test]
    fn falsifier_finds_empty_interpretation() {
        // forall x (p(x) -> p(x+1)) -> p(0): empty region for p refutes it.
        let f = parse_formula("\\forall x (p(x) -> p(x+1)) -> p(0)").unwrap();
        match falsify_oracle(&f, 1000, 7).unwrap() {
            FalsifyOutcome::Counterexample { .. } => {}
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn falsifier_is_deterministic_and_respects_tautologies() {
        let f = parse_formula("p(0) -> p(0)").unwrap();
        assert!(matches!(
            falsify_oracle(&f, 64, 3).unwrap(),
            FalsifyOutcome::NoCounterexampleFound
        ));
        let g = parse_formula("\\forall x (p(x) -> p(x+1)) -> p(0)").unwrap();
        let (a, b) = (falsify_oracle(&g, 500, 11).unwrap(), falsify_oracle(&g, 500, 11).unwrap());
        match (a, b) {
            (
                FalsifyOutcome::Counterexample { trial: t1, .. },
                FalsifyOutcome::Counterexample { trial: t2, .. },
            ) => assert_eq!(t1, t2),
            other => panic!("expected matching counterexamples, got {other:?}"),
        }
    }
}
