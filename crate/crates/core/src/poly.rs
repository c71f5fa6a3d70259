//! Multivariate polynomials over the rationals, as the normal form of terms.

use crate::rat::{rat, Rat};
use crate::syntax::ast::Term;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Monomial: variable names with positive exponents, sorted.
pub type Monomial = BTreeMap<String, u32>;

/// Polynomial in sparse form: monomial -> nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn var(x: &str) -> Poly {
        let mut m = Monomial::new();
        m.insert(x.to_string(), 1);
        let mut p = Poly::zero();
        p.terms.insert(m, rat(1));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the polynomial has degree 0.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(rat(0));
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::new()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let entry = out.terms.entry(m.clone()).or_insert_with(|| rat(0));
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (x, e) in m2 {
                    *m.entry(x.clone()).or_insert(0) += e;
                }
                let entry = out.terms.entry(m).or_insert_with(|| rat(0));
                *entry += c1 * c2;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Formal partial derivative with respect to `x`.
    pub fn diff(&self, x: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some(&e) = m.get(x) {
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(x);
                } else {
                    m2.insert(x.to_string(), e - 1);
                }
                let entry = out.terms.entry(m2).or_insert_with(|| rat(0));
                *entry += c * rat(e as i64);
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Formal antiderivative in `x` with constant 0.
    pub fn integrate(&self, x: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.get(x).copied().unwrap_or(0);
            let mut m2 = m.clone();
            m2.insert(x.to_string(), e + 1);
            out.terms.insert(m2, c / rat(e as i64 + 1));
        }
        out
    }

    /// Substitutes polynomials for variables.
    pub fn compose(&self, subst: &BTreeMap<String, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for (x, e) in m {
                let base = subst.get(x).cloned().unwrap_or_else(|| Poly::var(x));
                for _ in 0..*e {
                    acc = acc.mul(&base);
                }
            }
            out = out.add(&acc);
        }
        out
    }

    /// Evaluates at `x = v`, keeping other variables symbolic.
    pub fn eval_var(&self, x: &str, v: &Rat) -> Poly {
        let mut subst = BTreeMap::new();
        subst.insert(x.to_string(), Poly::constant(v.clone()));
        self.compose(&subst)
    }

    /// Evaluates fully at a rational valuation. Missing variables default to 0.
    pub fn eval(&self, valuation: &BTreeMap<String, Rat>) -> Rat {
        let mut acc = rat(0);
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (x, e) in m {
                let v = valuation.get(x).cloned().unwrap_or_else(|| rat(0));
                for _ in 0..*e {
                    prod *= &v;
                }
            }
            acc += prod;
        }
        acc
    }

    pub fn vars(&self) -> std::collections::BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.keys().cloned())
            .collect()
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.values().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Writes the polynomial back as a term, sorted by monomial.
    pub fn to_term(&self) -> Term {
        if self.terms.is_empty() {
            return Term::int(0);
        }
        let mut acc: Option<Term> = None;
        for (m, c) in &self.terms {
            let mut factor: Option<Term> = None;
            for (x, e) in m {
                for _ in 0..*e {
                    factor = Some(match factor {
                        None => Term::var(x),
                        Some(t) => t.mul(Term::var(x)),
                    });
                }
            }
            let piece = match factor {
                None => Term::Lit(c.clone()),
                Some(t) => {
                    if c == &rat(1) {
                        t
                    } else {
                        Term::Lit(c.clone()).mul(t)
                    }
                }
            };
            acc = Some(match acc {
                None => piece,
                Some(t) => t.add(piece),
            });
        }
        acc.unwrap()
    }
}

/// Normalizes a term into polynomial form.
pub fn term_to_poly(t: &Term) -> Poly {
    match t {
        Term::Var(x) => Poly::var(x),
        Term::Lit(r) => Poly::constant(r.clone()),
        Term::Neg(a) => term_to_poly(a).neg(),
        Term::Add(a, b) => term_to_poly(a).add(&term_to_poly(b)),
        Term::Sub(a, b) => term_to_poly(a).sub(&term_to_poly(b)),
        Term::Mul(a, b) => term_to_poly(a).mul(&term_to_poly(b)),
    }
}

/// Structural classification of an affine single-variable term `a*x + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Affine {
    Constant(Rat),
    /// `a*x + b` with `a != 0`.
    Linear { var: String, a: Rat, b: Rat },
}

/// Recognizes terms affine in at most one variable.
pub fn as_affine(t: &Term) -> Option<Affine> {
    let p = term_to_poly(t);
    if let Some(c) = p.as_constant() {
        return Some(Affine::Constant(c));
    }
    let vars = p.vars();
    if vars.len() != 1 || p.degree() > 1 {
        return None;
    }
    let var = vars.into_iter().next().unwrap();
    let mut lin = Monomial::new();
    lin.insert(var.clone(), 1);
    let a = p.terms.get(&lin).cloned().unwrap_or_else(|| rat(0));
    let b = p.terms.get(&Monomial::new()).cloned().unwrap_or_else(|| rat(0));
    Some(Affine::Linear { var, a, b })
}

/// Evaluates a term at a rational valuation.
pub fn eval_term(t: &Term, valuation: &BTreeMap<String, Rat>) -> Rat {
    match t {
        Term::Var(x) => valuation.get(x).cloned().unwrap_or_else(|| rat(0)),
        Term::Lit(r) => r.clone(),
        Term::Neg(a) => -eval_term(a, valuation),
        Term::Add(a, b) => eval_term(a, valuation) + eval_term(b, valuation),
        Term::Sub(a, b) => eval_term(a, valuation) - eval_term(b, valuation),
        Term::Mul(a, b) => eval_term(a, valuation) * eval_term(b, valuation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    #[test]
    fn normalization_and_equality() {
        let a = term_to_poly(&parse_term("x*(x+1) - x").unwrap());
        let b = term_to_poly(&parse_term("x*x").unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn differentiation() {
        // d/ds (x + v*s + 1/2*a*s*s) = v + a*s
        let p = term_to_poly(&parse_term("x + v*s + 1/2*a*s*s").unwrap());
        let d = p.diff("s");
        assert_eq!(d, term_to_poly(&parse_term("v + a*s").unwrap()));
    }

    #[test]
    fn integration_inverts_differentiation() {
        let p = term_to_poly(&parse_term("3*t*t + 2*t + 5").unwrap());
        assert_eq!(p.integrate("t").diff("t"), p);
    }

    #[test]
    fn affine_classification() {
        assert_eq!(as_affine(&parse_term("3/2").unwrap()), Some(Affine::Constant(crate::rat::ratio(3, 2))));
        match as_affine(&parse_term("2*x - 7").unwrap()) {
            Some(Affine::Linear { var, a, b }) => {
                assert_eq!(var, "x");
                assert_eq!(a, crate::rat::rat(2));
                assert_eq!(b, crate::rat::rat(-7));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(as_affine(&parse_term("x*x").unwrap()), None);
        assert_eq!(as_affine(&parse_term("x+y").unwrap()), None);
    }
}
