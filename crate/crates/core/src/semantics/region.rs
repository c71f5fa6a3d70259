//! Winning regions and truth sets over the interval-box region backend.
//!
//! Supported game fragment: assignments whose right-hand side is affine in at
//! most one variable, tests and goals built from single-variable atoms, and a
//! small catalog of differential equations — constant derivatives moving at
//! most one variable (with box-union evolution domains, reached monotonically
//! within one domain component), plus the domain-free one-dimensional flows
//! `x'=x` and `x'=x*x` with closed-form monotone reach sets. Anything else
//! reports `UnsupportedGame`.

use super::finite::PredicateInterpretation;
use super::iterate::{iterate_gfp, iterate_lfp, Schedule, StarOutcome, StarTrace};
use super::{RepetitionMode, SemError};
use crate::poly::{as_affine, term_to_poly, Affine, Poly};
use crate::rat::{rat, Rat};
use crate::regions::{Interval, Region};
use crate::syntax::ast::{Formula, Game, OdeSystem, Term};
use num_traits::Zero;

pub struct RegionEval<'a> {
    pub dims: Vec<String>,
    pub interp: &'a PredicateInterpretation,
    pub mode: RepetitionMode,
    pub schedule: Schedule,
}

impl RegionEval<'_> {
    fn dim_of(&self, var: &str) -> Result<(), SemError> {
        if self.dims.iter().any(|d| d == var) {
            Ok(())
        } else {
            Err(SemError::UnknownVariable(var.to_string()))
        }
    }

    /// Angel's winning region into `x`.
    pub fn angel(&self, g: &Game, x: &Region) -> Result<Region, SemError> {
        match g {
            Game::Assign(var, t) => self.assign_pre(var, t, x),
            Game::Ode(sys) => self.ode_pre(sys, x),
            Game::Test(f) => Ok(self.truth_set(f)?.intersect(x)?),
            Game::Choice(a, b) => Ok(self.angel(a, x)?.union(&self.angel(b, x)?)?),
            Game::Seq(a, b) => {
                let inner = self.angel(b, x)?;
                self.angel(a, &inner)
            }
            Game::Star(body) => match self.mode {
                RepetitionMode::Lfp => {
                    let trace = self.angel_star_trace(body, x)?;
                    match trace.outcome {
                        StarOutcome::Fixpoint { region, .. } => Ok(region),
                        StarOutcome::NonStabilizing { steps } => {
                            Err(SemError::NonStabilizing(steps))
                        }
                    }
                }
                RepetitionMode::OmegaStrategic => self.angel_star_omega(body, x),
                RepetitionMode::AdvanceNotice => Err(SemError::UnsupportedGame(
                    "advance-notice repetition is only available on the finite backend"
                        .to_string(),
                )),
            },
            Game::Dual(a, _) => Ok(self.angel(a, &x.complement())?.complement()),
        }
    }

    /// Demon's winning region into `x`, by the Demon clauses.
    pub fn demon(&self, g: &Game, x: &Region) -> Result<Region, SemError> {
        match g {
            Game::Assign(var, t) => self.assign_pre(var, t, x),
            Game::Ode(_) => {
                // All-durations clause: the states from which every legal
                // evolution stays inside x.
                Ok(self.angel(g, &x.complement())?.complement())
            }
            Game::Test(f) => Ok(self.truth_set(f)?.complement().union(x)?),
            Game::Choice(a, b) => Ok(self.demon(a, x)?.intersect(&self.demon(b, x)?)?),
            Game::Seq(a, b) => {
                let inner = self.demon(b, x)?;
                self.demon(a, &inner)
            }
            Game::Star(body) => {
                let trace = iterate_gfp(
                    x,
                    &Region::full(self.dims.clone()),
                    |z| {
                        let d = self.demon(body, z)?;
                        Ok(x.intersect(&d)?)
                    },
                    &self.schedule,
                )?;
                match trace.outcome {
                    StarOutcome::Fixpoint { region, .. } => Ok(region),
                    StarOutcome::NonStabilizing { steps } => Err(SemError::NonStabilizing(steps)),
                }
            }
            Game::Dual(a, _) => Ok(self.demon(a, &x.complement())?.complement()),
        }
    }

    /// Transfinite least-fixpoint iteration for `<body*>` with the full
    /// ordinal-tracked trace.
    pub fn angel_star_trace(&self, body: &Game, x: &Region) -> Result<StarTrace, SemError> {
        iterate_lfp(
            x,
            |z| {
                let a = self.angel(body, z)?;
                Ok(x.union(&a)?)
            },
            &self.schedule,
        )
    }

    /// Omega-strategic repetition: iterate to the first limit stage and stop.
    fn angel_star_omega(&self, body: &Game, x: &Region) -> Result<Region, SemError> {
        let mut sched = self.schedule.clone();
        sched.max_limit_levels = 1;
        sched.stop_at_first_limit = true;
        let trace = iterate_lfp(
            x,
            |z| {
                let a = self.angel(body, z)?;
                Ok(x.union(&a)?)
            },
            &sched,
        )?;
        match trace.outcome {
            StarOutcome::Fixpoint { region, .. } => Ok(region),
            StarOutcome::NonStabilizing { steps } => Err(SemError::NonStabilizing(steps)),
        }
    }

    fn assign_pre(&self, var: &str, t: &Term, x: &Region) -> Result<Region, SemError> {
        self.dim_of(var)?;
        match as_affine(t) {
            Some(Affine::Constant(c)) => Ok(x.map_dim(var, |iv| {
                if iv.contains(&c) {
                    Some(Interval::full())
                } else {
                    None
                }
            })?),
            Some(Affine::Linear { var: src, a, b }) => {
                self.dim_of(&src)?;
                if src == var {
                    // {s : a*s(var)+b in iv} per box.
                    let inv = rat(1) / &a;
                    let nb = -b;
                    Ok(x.map_dim(var, |iv| Some(iv.translate(&nb).scale(&inv)))?)
                } else {
                    // var := a*src + b: constrain src, free var.
                    let vi = x.dim_index(var)?;
                    let si = x.dim_index(&src)?;
                    let inv = rat(1) / &a;
                    let nb = -b;
                    let mut boxes = Vec::new();
                    for bx in x.boxes() {
                        let src_constraint = bx[vi].translate(&nb).scale(&inv);
                        if let Some(iv) = src_constraint.intersect(&bx[si]) {
                            let mut nbx = bx.clone();
                            nbx[si] = iv;
                            nbx[vi] = Interval::full();
                            boxes.push(nbx);
                        }
                    }
                    Ok(Region::from_boxes(x.dims().to_vec(), boxes))
                }
            }
            None => Err(SemError::UnsupportedGame(format!(
                "assignment rhs `{}` is not affine in a single variable",
                crate::syntax::format_term(t)
            ))),
        }
    }

    fn ode_pre(&self, sys: &OdeSystem, x: &Region) -> Result<Region, SemError> {
        for (v, _) in &sys.eqs {
            self.dim_of(v)?;
        }
        let polys: Vec<(String, Poly)> = sys
            .eqs
            .iter()
            .map(|(v, rhs)| (v.clone(), term_to_poly(rhs)))
            .collect();
        // Constant-derivative catalog.
        if polys.iter().all(|(_, p)| p.as_constant().is_some()) {
            let moving: Vec<(String, Rat)> = polys
                .iter()
                .filter_map(|(v, p)| {
                    let c = p.as_constant().unwrap();
                    if c.is_zero() {
                        None
                    } else {
                        Some((v.clone(), c))
                    }
                })
                .collect();
            if moving.len() > 1 {
                return Err(SemError::UnsupportedGame(
                    "constant-rate differential equations may move at most one variable"
                        .to_string(),
                ));
            }
            let domain = match &sys.domain {
                Some(d) if !sys.domain_is_trivial() => Some(self.truth_set(d)?),
                _ => None,
            };
            return match moving.into_iter().next() {
                None => match domain {
                    None => Ok(x.clone()),
                    Some(d) => Ok(d.intersect(x)?),
                },
                Some((m, c)) => match domain {
                    None => Ok(sweep_back(x, &m, &c)?),
                    Some(d) => {
                        // Stay within one domain component: for each domain
                        // box, sweep the goal restricted to it and intersect
                        // with it.
                        let mut acc = Region::empty(x.dims().to_vec());
                        for db in d.boxes() {
                            let comp = Region::from_box(d.dims().to_vec(), db.clone());
                            let target = x.intersect(&comp)?;
                            let swept = sweep_back(&target, &m, &c)?;
                            acc = acc.union(&swept.intersect(&comp)?)?;
                        }
                        Ok(acc)
                    }
                },
            };
        }
        // Nonlinear 1-D catalog: x'=x and x'=x*x, domain-free.
        if sys.eqs.len() == 1 && sys.domain_is_trivial() {
            let (m, p) = &polys[0];
            if *p == Poly::var(m) {
                return exp_like_pre(x, m, ExpKind::Linear);
            }
            if *p == Poly::var(m).mul(&Poly::var(m)) {
                return exp_like_pre(x, m, ExpKind::Square);
            }
        }
        Err(SemError::UnsupportedGame(format!(
            "differential equation outside the region catalog: {}",
            crate::syntax::format_game(&Game::Ode(sys.clone()))
        )))
    }

    /// Truth set of a formula, requiring box-expressible atoms.
    pub fn truth_set(&self, f: &Formula) -> Result<Region, SemError> {
        match f {
            Formula::Pred(p, args) => self.pred_pullback(p, args),
            Formula::Geq(a, b, _) => {
                let diff = term_to_poly(a).sub(&term_to_poly(b));
                match as_affine(&diff.to_term()) {
                    Some(Affine::Constant(c)) => {
                        if c >= rat(0) {
                            Ok(Region::full(self.dims.clone()))
                        } else {
                            Ok(Region::empty(self.dims.clone()))
                        }
                    }
                    Some(Affine::Linear { var, a, b }) => {
                        self.dim_of(&var)?;
                        let bound = -b / &a;
                        let iv = if a > rat(0) {
                            Interval::at_least(bound, true)
                        } else {
                            Interval::at_most(bound, true)
                        };
                        let r = Region::interval(&var, iv);
                        Ok(r.with_dims(&self.dims)?)
                    }
                    None => Err(SemError::UnsupportedAtom(format!(
                        "comparison `{}` involves several variables or is nonlinear",
                        crate::syntax::format_formula(f)
                    ))),
                }
            }
            Formula::Not(a, _) => Ok(self.truth_set(a)?.complement()),
            Formula::And(a, b, _) => Ok(self.truth_set(a)?.intersect(&self.truth_set(b)?)?),
            Formula::Exists(v, body) => {
                self.dim_of(v)?;
                Ok(self.truth_set(body)?.project_exists(v)?)
            }
            Formula::Diamond(g, body) => {
                let x = self.truth_set(body)?;
                self.angel(g, &x)
            }
            Formula::Box_(g, body) => {
                let x = self.truth_set(body)?;
                let direct = self.demon(g, &x)?;
                let dual = self.angel(g, &x.complement())?.complement();
                if !direct.equals(&dual)? {
                    return Err(SemError::DeterminacyViolation(format!(
                        "demon clauses disagree with the complement route on [{}]",
                        crate::syntax::format_game(g)
                    )));
                }
                Ok(direct)
            }
        }
    }

    /// Truth set of `p(args...)`: pulls the interpretation region back along
    /// the argument terms, each constant or affine in one variable.
    fn pred_pullback(&self, p: &str, args: &[Term]) -> Result<Region, SemError> {
        let region = self
            .interp
            .get(p)
            .ok_or_else(|| SemError::MissingInterpretation(p.to_string()))?;
        if region.dims().len() != args.len() {
            return Err(SemError::UnsupportedAtom(format!(
                "predicate {p}: arity {} vs interpretation arity {}",
                args.len(),
                region.dims().len()
            )));
        }
        let mut out_boxes = Vec::new();
        'boxes: for bx in region.boxes() {
            let mut nb = vec![Interval::full(); self.dims.len()];
            for (slot, arg) in bx.iter().zip(args) {
                match as_affine(arg) {
                    Some(Affine::Constant(c)) => {
                        if !slot.contains(&c) {
                            continue 'boxes;
                        }
                    }
                    Some(Affine::Linear { var, a, b }) => {
                        let d = self
                            .dims
                            .iter()
                            .position(|v| *v == var)
                            .ok_or_else(|| SemError::UnknownVariable(var.clone()))?;
                        let constraint = slot.translate(&-b).scale(&(rat(1) / &a));
                        match nb[d].intersect(&constraint) {
                            Some(iv) => nb[d] = iv,
                            None => continue 'boxes,
                        }
                    }
                    None => {
                        return Err(SemError::UnsupportedAtom(format!(
                            "predicate argument `{}` is not affine in one variable",
                            crate::syntax::format_term(arg)
                        )))
                    }
                }
            }
            out_boxes.push(nb);
        }
        Ok(Region::from_boxes(self.dims.clone(), out_boxes))
    }
}

/// `{s : exists r >= 0 with s + r*c on dimension m in x}` — the backward
/// sweep of a box union along a single constant-rate dimension.
fn sweep_back(x: &Region, m: &str, c: &Rat) -> Result<Region, SemError> {
    use num_traits::Signed;
    let positive = c.is_positive();
    Ok(x.map_dim(m, |iv| {
        if positive {
            Interval::new(None, false, iv.hi.clone(), iv.hi_closed)
        } else {
            Interval::new(iv.lo.clone(), iv.lo_closed, None, false)
        }
    })?)
}

enum ExpKind {
    /// `x'=x`: positive states grow without bound, negative states fall.
    Linear,
    /// `x'=x*x`: positive states grow without bound, negative states rise
    /// toward (never reaching) zero.
    Square,
}

fn exp_like_pre(x: &Region, m: &str, kind: ExpKind) -> Result<Region, SemError> {
    let zero = rat(0);
    let dims = x.dims().to_vec();
    let d = x.dim_index(m)?;
    let mut boxes = Vec::new();
    for bx in x.boxes() {
        let iv = &bx[d];
        let mut push = |piece: Option<Interval>| {
            if let Some(p) = piece {
                let mut nb = bx.clone();
                nb[d] = p;
                boxes.push(nb);
            }
        };
        // From v > 0 the flow sweeps [v, oo): reach iff v <= hi.
        push(Interval::new(
            Some(zero.clone()),
            false,
            iv.hi.clone(),
            iv.hi_closed,
        ));
        // The origin is an equilibrium.
        if iv.contains(&zero) {
            push(Some(Interval::point(zero.clone())));
        }
        match kind {
            ExpKind::Linear => {
                // From v < 0 the flow sweeps (-oo, v]: reach iff v >= lo.
                push(Interval::new(
                    iv.lo.clone(),
                    iv.lo_closed,
                    Some(zero.clone()),
                    false,
                ));
            }
            ExpKind::Square => {
                // From v < 0 the flow sweeps [v, 0): reach iff the goal meets
                // [v, 0), i.e. v is below some negative goal point.
                if let Some(j) = iv.intersect(&Interval::at_most(zero.clone(), false)) {
                    push(Interval::new(None, false, j.hi.clone(), j.hi_closed));
                }
            }
        }
    }
    Ok(Region::from_boxes(dims, boxes))
}
