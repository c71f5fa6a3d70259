//! Exact set-valued semantics over an explicit finite state space.
//!
//! The space must be forward-closed: every state reachable by one atomic
//! move from a member is a member, except that goal-absorbed states are not
//! expanded (sound for a single top-level repetition query whose goal
//! contains them, because goal states belong to the least fixpoint no matter
//! what their successors are). Atomic games act as the identity on absorbed
//! states.

use super::{RepetitionMode, SemError};
use crate::poly::eval_term;
use crate::rat::Rat;
use crate::regions::Region;
use crate::syntax::ast::{Formula, Game, Term};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

/// How a [`FiniteSpace`] was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Declared,
    ForwardClosure { goal_absorbing: bool },
}

/// Explicit finite state set over an ordered dimension list.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    dims: Vec<String>,
    states: Vec<Vec<Rat>>,
    index: HashMap<Vec<Rat>, usize>,
    absorbing: Vec<bool>,
    pub provenance: Provenance,
}

/// Subset of a finite space's states as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateSet{{")?;
        for i in self.iter() {
            write!(f, "{i},")?;
        }
        write!(f, "}}")
    }
}

impl StateSet {
    pub fn empty(len: usize) -> StateSet {
        StateSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> StateSet {
        let mut s = StateSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        out
    }

    pub fn intersect(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        out
    }

    pub fn complement(&self) -> StateSet {
        let mut out = StateSet::empty(self.len);
        for i in 0..self.len {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }
}

impl FiniteSpace {
    pub fn declared(dims: Vec<String>, mut states: Vec<Vec<Rat>>) -> FiniteSpace {
        states.sort();
        states.dedup();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let absorbing = vec![false; states.len()];
        FiniteSpace {
            dims,
            states,
            index,
            absorbing,
            provenance: Provenance::Declared,
        }
    }

    /// Grid of all combinations of the given per-dimension values.
    pub fn grid(dims: Vec<String>, values: &[Vec<Rat>]) -> FiniteSpace {
        assert_eq!(dims.len(), values.len());
        let mut states = vec![vec![]];
        for vals in values {
            let mut next = Vec::new();
            for s in &states {
                for v in vals {
                    let mut t = s.clone();
                    t.push(v.clone());
                    next.push(t);
                }
            }
            states = next;
        }
        FiniteSpace::declared(dims, states)
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn states(&self) -> &[Vec<Rat>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, state: &[Rat]) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.absorbing[i]
    }

    fn valuation(&self, i: usize) -> BTreeMap<String, Rat> {
        self.dims
            .iter()
            .cloned()
            .zip(self.states[i].iter().cloned())
            .collect()
    }

    /// Evaluates a term at state `i`.
    pub fn eval_term_at(&self, t: &Term, i: usize) -> Rat {
        eval_term(t, &self.valuation(i))
    }
}

/// Least forward-closed superset of `initials` under all assignment atoms of
/// `game`, optionally not expanding states satisfying `goal`.
pub fn finite_closure(
    dims: Vec<String>,
    initials: Vec<Vec<Rat>>,
    game: &Game,
    goal: Option<&Formula>,
    cap: usize,
) -> Result<FiniteSpace, SemError> {
    if !game.is_ode_free() {
        return Err(SemError::UnsupportedGame(
            "finite closure requires an ODE-free game".to_string(),
        ));
    }
    let mut assigns = Vec::new();
    collect_assigns(game, &mut assigns);
    let goal_holds = |state: &[Rat]| -> Result<bool, SemError> {
        match goal {
            None => Ok(false),
            Some(f) => eval_closed_formula(f, &dims, state),
        }
    };

    let mut states: Vec<Vec<Rat>> = Vec::new();
    let mut seen: HashSet<Vec<Rat>> = HashSet::new();
    let mut absorbed: Vec<Vec<Rat>> = Vec::new();
    let mut queue: Vec<Vec<Rat>> = initials;
    while let Some(s) = queue.pop() {
        if seen.contains(&s) {
            continue;
        }
        seen.insert(s.clone());
        if seen.len() > cap {
            return Err(SemError::ClosureExceedsCap(cap));
        }
        let absorb = goal_holds(&s)?;
        if absorb {
            absorbed.push(s.clone());
        }
        states.push(s.clone());
        if absorb {
            continue;
        }
        let valuation: BTreeMap<String, Rat> =
            dims.iter().cloned().zip(s.iter().cloned()).collect();
        for (x, t) in &assigns {
            let d = dims
                .iter()
                .position(|v| v == x)
                .ok_or_else(|| SemError::UnknownVariable(x.clone()))?;
            let mut target = s.clone();
            target[d] = eval_term(t, &valuation);
            if !seen.contains(&target) {
                queue.push(target);
            }
        }
    }
    let mut space = FiniteSpace::declared(dims, states);
    space.provenance = Provenance::ForwardClosure {
        goal_absorbing: goal.is_some(),
    };
    for s in absorbed {
        if let Some(i) = space.state_index(&s) {
            space.absorbing[i] = true;
        }
    }
    Ok(space)
}

fn collect_assigns(g: &Game, out: &mut Vec<(String, Term)>) {
    match g {
        Game::Assign(x, t) => out.push((x.clone(), t.clone())),
        Game::Ode(_) => {}
        Game::Test(f) => collect_assigns_formula(f, out),
        Game::Choice(a, b) | Game::Seq(a, b) => {
            collect_assigns(a, out);
            collect_assigns(b, out);
        }
        Game::Star(a) | Game::Dual(a, _) => collect_assigns(a, out),
    }
}

fn collect_assigns_formula(f: &Formula, out: &mut Vec<(String, Term)>) {
    match f {
        Formula::Pred(..) | Formula::Geq(..) => {}
        Formula::Not(a, _) => collect_assigns_formula(a, out),
        Formula::And(a, b, _) => {
            collect_assigns_formula(a, out);
            collect_assigns_formula(b, out);
        }
        Formula::Exists(_, a) => collect_assigns_formula(a, out),
        Formula::Diamond(g, a) | Formula::Box_(g, a) => {
            collect_assigns(g, out);
            collect_assigns_formula(a, out);
        }
    }
}

/// Evaluates a quantifier- and modality-free formula at a point.
pub fn eval_closed_formula(f: &Formula, dims: &[String], state: &[Rat]) -> Result<bool, SemError> {
    let valuation: BTreeMap<String, Rat> =
        dims.iter().cloned().zip(state.iter().cloned()).collect();
    eval_pointwise(f, &valuation)
}

fn eval_pointwise(f: &Formula, v: &BTreeMap<String, Rat>) -> Result<bool, SemError> {
    match f {
        Formula::Pred(p, _) => Err(SemError::MissingInterpretation(p.clone())),
        Formula::Geq(a, b, _) => Ok(eval_term(a, v) >= eval_term(b, v)),
        Formula::Not(a, _) => Ok(!eval_pointwise(a, v)?),
        Formula::And(a, b, _) => Ok(eval_pointwise(a, v)? && eval_pointwise(b, v)?),
        Formula::Exists(..) | Formula::Diamond(..) | Formula::Box_(..) => Err(
            SemError::UnsupportedAtom("quantifier or modality in pointwise formula".to_string()),
        ),
    }
}

/// Interpretation of predicate symbols as regions over their argument tuple.
#[derive(Debug, Clone, Default)]
pub struct PredicateInterpretation {
    regions: BTreeMap<String, Region>,
}

impl PredicateInterpretation {
    pub fn new() -> PredicateInterpretation {
        PredicateInterpretation::default()
    }

    /// Dimension names used for argument slots of arity `k`.
    pub fn slot_dims(arity: usize) -> Vec<String> {
        (1..=arity).map(|i| format!("#{i}")).collect()
    }

    /// Registers `p` with a region whose dims must be the slot dims.
    pub fn insert(&mut self, p: impl Into<String>, region: Region) {
        self.regions.insert(p.into(), region);
    }

    pub fn get(&self, p: &str) -> Option<&Region> {
        self.regions.get(p)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&String, &Region)> {
        self.regions.iter()
    }

    /// Membership of an argument tuple.
    pub fn holds(&self, p: &str, args: &[Rat]) -> Result<bool, SemError> {
        let region = self
            .regions
            .get(p)
            .ok_or_else(|| SemError::MissingInterpretation(p.to_string()))?;
        if region.dims().len() != args.len() {
            return Err(SemError::UnsupportedAtom(format!(
                "predicate {p} arity {} vs interpretation arity {}",
                args.len(),
                region.dims().len()
            )));
        }
        Ok(region.contains_point(args))
    }
}

pub struct FiniteEval<'a> {
    pub space: &'a FiniteSpace,
    pub interp: &'a PredicateInterpretation,
    pub mode: RepetitionMode,
}

impl FiniteEval<'_> {
    /// Angel's winning region into `x`.
    pub fn angel(&self, g: &Game, x: &StateSet) -> Result<StateSet, SemError> {
        match g {
            Game::Assign(var, t) => self.assign_pre(var, t, x),
            Game::Ode(_) => Err(SemError::UnsupportedGame(
                "finite backend admits only ODE-free games".to_string(),
            )),
            Game::Test(f) => Ok(self.truth_set(f)?.intersect(x)),
            Game::Choice(a, b) => Ok(self.angel(a, x)?.union(&self.angel(b, x)?)),
            Game::Seq(a, b) => {
                let inner = self.angel(b, x)?;
                self.angel(a, &inner)
            }
            Game::Star(a) => self.angel_star(a, x),
            Game::Dual(a, _) => Ok(self.angel(a, &x.complement())?.complement()),
        }
    }

    /// Demon's winning region into `x`, by the Demon clauses.
    pub fn demon(&self, g: &Game, x: &StateSet) -> Result<StateSet, SemError> {
        match g {
            Game::Assign(var, t) => self.assign_pre(var, t, x),
            Game::Ode(_) => Err(SemError::UnsupportedGame(
                "finite backend admits only ODE-free games".to_string(),
            )),
            Game::Test(f) => Ok(self.truth_set(f)?.complement().union(x)),
            Game::Choice(a, b) => Ok(self.demon(a, x)?.intersect(&self.demon(b, x)?)),
            Game::Seq(a, b) => {
                let inner = self.demon(b, x)?;
                self.demon(a, &inner)
            }
            Game::Star(a) => self.demon_star(a, x),
            Game::Dual(a, _) => Ok(self.demon(a, &x.complement())?.complement()),
        }
    }

    fn assign_pre(&self, var: &str, t: &Term, x: &StateSet) -> Result<StateSet, SemError> {
        let d = self
            .space
            .dims()
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| SemError::UnknownVariable(var.to_string()))?;
        let mut out = StateSet::empty(self.space.len());
        for i in 0..self.space.len() {
            if self.space.is_absorbing(i) {
                if x.contains(i) {
                    out.insert(i);
                }
                continue;
            }
            let mut target = self.space.states()[i].clone();
            target[d] = self.space.eval_term_at(t, i);
            match self.space.state_index(&target) {
                Some(j) => {
                    if x.contains(j) {
                        out.insert(i);
                    }
                }
                None => {
                    return Err(SemError::StateEscapesSpace(format!(
                        "{var} := {} from state {:?}",
                        crate::syntax::format_term(t),
                        self.space.states()[i]
                    )))
                }
            }
        }
        Ok(out)
    }

    fn angel_star(&self, body: &Game, x: &StateSet) -> Result<StateSet, SemError> {
        match self.mode {
            // On a finite lattice the iteration stabilizes within |states|
            // steps, so the omega-strategic truncation coincides with the
            // least fixpoint here.
            RepetitionMode::Lfp | RepetitionMode::OmegaStrategic => {
                let mut z = x.clone();
                loop {
                    let next = x.union(&self.angel(body, &z)?);
                    if next == z {
                        return Ok(z);
                    }
                    z = next;
                }
            }
            RepetitionMode::AdvanceNotice => {
                // Union over all fixed repetition counts n of the winning
                // region for the n-fold power of the body.
                let mut power = x.clone();
                let mut acc = x.clone();
                let mut seen = HashSet::new();
                seen.insert(power.clone());
                loop {
                    power = self.angel(body, &power)?;
                    acc = acc.union(&power);
                    if !seen.insert(power.clone()) {
                        return Ok(acc);
                    }
                }
            }
        }
    }

    fn demon_star(&self, body: &Game, x: &StateSet) -> Result<StateSet, SemError> {
        match self.mode {
            RepetitionMode::Lfp | RepetitionMode::OmegaStrategic => {
                let mut z = StateSet::full(self.space.len());
                loop {
                    let next = x.intersect(&self.demon(body, &z)?);
                    if next == z {
                        return Ok(z);
                    }
                    z = next;
                }
            }
            RepetitionMode::AdvanceNotice => {
                let mut power = x.clone();
                let mut acc = x.clone();
                let mut seen = HashSet::new();
                seen.insert(power.clone());
                loop {
                    power = self.demon(body, &power)?;
                    acc = acc.intersect(&power);
                    if !seen.insert(power.clone()) {
                        return Ok(acc);
                    }
                }
            }
        }
    }

    /// Truth set of a formula over the space.
    pub fn truth_set(&self, f: &Formula) -> Result<StateSet, SemError> {
        match f {
            Formula::Pred(p, args) => {
                let mut out = StateSet::empty(self.space.len());
                for i in 0..self.space.len() {
                    let vals: Vec<Rat> = args
                        .iter()
                        .map(|t| self.space.eval_term_at(t, i))
                        .collect();
                    if self.interp.holds(p, &vals)? {
                        out.insert(i);
                    }
                }
                Ok(out)
            }
            Formula::Geq(a, b, _) => {
                let mut out = StateSet::empty(self.space.len());
                for i in 0..self.space.len() {
                    if self.space.eval_term_at(a, i) >= self.space.eval_term_at(b, i) {
                        out.insert(i);
                    }
                }
                Ok(out)
            }
            Formula::Not(a, _) => Ok(self.truth_set(a)?.complement()),
            Formula::And(a, b, _) => Ok(self.truth_set(a)?.intersect(&self.truth_set(b)?)),
            Formula::Exists(var, body) => {
                // Witness values range over the values the space realizes in
                // that dimension; modified states must stay in the space.
                let d = self
                    .space
                    .dims()
                    .iter()
                    .position(|v| v == var)
                    .ok_or_else(|| SemError::UnknownVariable(var.clone()))?;
                let inner = self.truth_set(body)?;
                let values: BTreeSet<Rat> = self
                    .space
                    .states()
                    .iter()
                    .map(|s| s[d].clone())
                    .collect();
                let mut out = StateSet::empty(self.space.len());
                for i in 0..self.space.len() {
                    for v in &values {
                        let mut t = self.space.states()[i].clone();
                        t[d] = v.clone();
                        if let Some(j) = self.space.state_index(&t) {
                            if inner.contains(j) {
                                out.insert(i);
                                break;
                            }
                        }
                    }
                }
                Ok(out)
            }
            Formula::Diamond(g, body) => {
                let x = self.truth_set(body)?;
                self.angel(g, &x)
            }
            Formula::Box_(g, body) => {
                let x = self.truth_set(body)?;
                self.demon(g, &x)
            }
        }
    }
}
