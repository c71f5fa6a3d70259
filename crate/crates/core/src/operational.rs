//! Operational game semantics on finite action menus: game trees built by
//! structural unrolling, strategies as subtrees, plays, deadlock, and
//! backward-induction solving, cross-validated against the denotational
//! backends.
//!
//! Angel acts at a node iff the path to it crosses an even number of dual
//! marks. A player who must act but has no enabled successor deadlocks and
//! loses. Repetitions unroll a bounded number of times; with the budget at
//! least the finite-space size the truncation does not change verdicts.

use crate::poly::eval_term;
use crate::rat::Rat;
use crate::semantics::{FiniteEval, FiniteSpace, PredicateInterpretation, RepetitionMode, SemError};
use crate::syntax::ast::{Formula, Game, OdeSystem, Term};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;

pub type State = BTreeMap<String, Rat>;

/// One move in a play.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Left,
    Right,
    Stop,
    Repeat,
    /// Enters or leaves a dual game; flips the acting player.
    DualMark,
    Assign(String, Term),
    Test(Formula),
    /// Follow the differential equation for a duration from the menu.
    Ode(OdeSystem, Rat),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Left => write!(f, "left"),
            Action::Right => write!(f, "right"),
            Action::Stop => write!(f, "stop"),
            Action::Repeat => write!(f, "repeat"),
            Action::DualMark => write!(f, "d"),
            Action::Assign(x, t) => write!(f, "{x}:={}", crate::syntax::format_term(t)),
            Action::Test(p) => write!(f, "?{}", crate::syntax::format_formula(p)),
            Action::Ode(sys, r) => write!(
                f,
                "{}@{}",
                crate::syntax::format_game(&Game::Ode(sys.clone())),
                crate::rat::format_rat(r)
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Angel,
    Demon,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Angel => Player::Demon,
            Player::Demon => Player::Angel,
        }
    }
}

/// Tree node. The state is the one reached by playing the path from the
/// root; `None` marks a disabled action (failed test or impossible flow),
/// below which nothing is expanded.
#[derive(Debug, Clone)]
pub struct Node {
    pub state: Option<State>,
    pub children: Vec<(Action, Node)>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn enabled_children(&self) -> impl Iterator<Item = &(Action, Node)> {
        self.children.iter().filter(|(_, c)| c.state.is_some())
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.size()).sum::<usize>()
    }
}

#[derive(Debug, Clone)]
pub struct GameTree {
    pub root: Node,
    pub loop_budget: usize,
}

/// Finite menus for actions with infinitely many instances.
#[derive(Debug, Clone)]
pub struct Menus {
    pub durations: Vec<Rat>,
}

impl Default for Menus {
    fn default() -> Menus {
        Menus { durations: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("tree construction budget exceeded ({0} nodes)")]
    BudgetExceeded(usize),
    #[error("semantics error: {0}")]
    Sem(#[from] SemError),
}

const NODE_CAP: usize = 4_000_000;

/// Builds the operational tree of `game` from `state`. Repetitions unroll at
/// most `loop_budget` times; at budget exhaustion only stopping remains.
pub fn build_tree(
    game: &Game,
    state: &State,
    menus: &Menus,
    loop_budget: usize,
) -> Result<GameTree, TreeError> {
    let builder = Builder {
        menus,
        loop_budget,
        nodes: Cell::new(0),
    };
    let root = builder.game(game, Some(state.clone()), &|s| Ok(Node {
        state: s,
        children: vec![],
    }))?;
    Ok(GameTree { root, loop_budget })
}

type Cont<'a> = dyn Fn(Option<State>) -> Result<Node, TreeError> + 'a;

struct Builder<'a> {
    menus: &'a Menus,
    loop_budget: usize,
    nodes: Cell<usize>,
}

impl Builder<'_> {
    fn tick(&self) -> Result<(), TreeError> {
        let n = self.nodes.get() + 1;
        self.nodes.set(n);
        if n > NODE_CAP {
            Err(TreeError::BudgetExceeded(NODE_CAP))
        } else {
            Ok(())
        }
    }

    /// Plays the atomic action and continues; disabled actions become bare
    /// `None` leaves (nothing below them is reachable).
    fn atomic(
        &self,
        action: Action,
        state: &Option<State>,
        next: &Cont<'_>,
    ) -> Result<(Action, Node), TreeError> {
        self.tick()?;
        let new_state = match state {
            Some(s) => apply_action(&action, s)?,
            None => None,
        };
        let child = if new_state.is_some() {
            next(new_state)?
        } else {
            Node {
                state: None,
                children: vec![],
            }
        };
        Ok((action, child))
    }

    fn game(
        &self,
        game: &Game,
        state: Option<State>,
        next: &Cont<'_>,
    ) -> Result<Node, TreeError> {
        self.tick()?;
        match game {
            Game::Assign(x, t) => {
                let child = self.atomic(Action::Assign(x.clone(), t.clone()), &state, next)?;
                Ok(Node {
                    state,
                    children: vec![child],
                })
            }
            Game::Test(p) => {
                let child = self.atomic(Action::Test((**p).clone()), &state, next)?;
                Ok(Node {
                    state,
                    children: vec![child],
                })
            }
            Game::Ode(sys) => {
                let mut children = Vec::new();
                for r in &self.menus.durations {
                    children.push(self.atomic(
                        Action::Ode(sys.clone(), r.clone()),
                        &state,
                        next,
                    )?);
                }
                Ok(Node { state, children })
            }
            Game::Choice(a, b) => {
                let left = self.game(a, state.clone(), next)?;
                let right = self.game(b, state.clone(), next)?;
                Ok(Node {
                    state,
                    children: vec![(Action::Left, left), (Action::Right, right)],
                })
            }
            Game::Seq(a, b) => {
                let cont = |s: Option<State>| self.game(b, s, next);
                self.game(a, state, &cont)
            }
            Game::Star(body) => self.star_round(body, state, self.loop_budget, next),
            Game::Dual(inner, _) => {
                // d ^ g(inner) ^ d: mark on entry, mark again at each
                // completed inner play.
                let close = |s: Option<State>| -> Result<Node, TreeError> {
                    self.tick()?;
                    let after = next(s.clone())?;
                    Ok(Node {
                        state: s,
                        children: vec![(Action::DualMark, after)],
                    })
                };
                let sub = self.game(inner, state.clone(), &close)?;
                Ok(Node {
                    state,
                    children: vec![(Action::DualMark, sub)],
                })
            }
        }
    }

    fn star_round(
        &self,
        body: &Game,
        state: Option<State>,
        remaining: usize,
        next: &Cont<'_>,
    ) -> Result<Node, TreeError> {
        self.tick()?;
        let stop_child = next(state.clone())?;
        let mut children = vec![(Action::Stop, stop_child)];
        if remaining > 0 {
            let cont = |s: Option<State>| self.star_round(body, s, remaining - 1, next);
            let sub = self.game(body, state.clone(), &cont)?;
            children.push((Action::Repeat, sub));
        }
        Ok(Node { state, children })
    }
}

/// Plays one action from a state; `None` when the action is not enabled.
pub fn apply_action(action: &Action, state: &State) -> Result<Option<State>, SemError> {
    match action {
        Action::Left | Action::Right | Action::Stop | Action::Repeat | Action::DualMark => {
            Ok(Some(state.clone()))
        }
        Action::Assign(x, t) => {
            let mut s = state.clone();
            s.insert(x.clone(), eval_term(t, state));
            Ok(Some(s))
        }
        Action::Test(p) => Ok(if eval_condition(p, state)? {
            Some(state.clone())
        } else {
            None
        }),
        Action::Ode(sys, r) => play_ode(sys, r, state),
    }
}

/// Plays a whole action sequence; `None` as soon as one action is disabled.
pub fn play(actions: &[Action], state: &State) -> Result<Option<State>, SemError> {
    let mut cur = state.clone();
    for a in actions {
        match apply_action(a, &cur)? {
            Some(s) => cur = s,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

fn eval_condition(f: &Formula, state: &State) -> Result<bool, SemError> {
    let dims: Vec<String> = state.keys().cloned().collect();
    let vals: Vec<Rat> = state.values().cloned().collect();
    crate::semantics::eval_closed_formula(f, &dims, &vals)
}

/// The unique flow of the system for the given duration; undefined when no
/// domain-respecting flow of that duration exists.
fn play_ode(sys: &OdeSystem, duration: &Rat, state: &State) -> Result<Option<State>, SemError> {
    if duration < &crate::rat::rat(0) {
        return Ok(None);
    }
    let mut names = std::collections::BTreeSet::new();
    for (v, t) in &sys.eqs {
        names.insert(v.clone());
        names.extend(t.vars());
    }
    if let Some(d) = &sys.domain {
        names.extend(crate::syntax::formula_vars(d).all());
    }
    let time = crate::syntax::fresh_name("tau", &names);
    let sol = crate::kernel::solve_polynomial_ode(&sys.eqs, &time)
        .map_err(|e| SemError::UnsupportedGame(format!("unsolvable system: {e}")))?;
    let at = |zeta: &Rat| -> State {
        let mut env = state.clone();
        env.insert(time.clone(), zeta.clone());
        let mut out = state.clone();
        for (v, e) in &sol.solutions {
            out.insert(v.clone(), eval_term(e, &env));
        }
        out
    };
    if let Some(domain) = &sys.domain {
        if !sys.domain_is_trivial() {
            // Domains in the operational corpus are clock-type (monotone
            // flows against box constraints), so endpoint-plus-grid checks
            // are exact there.
            let steps = 16i64;
            for k in 0..=steps {
                let zeta = duration * crate::rat::ratio(k, steps);
                if !eval_condition(domain, &at(&zeta))? {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(at(duration)))
}

/// A strategy as a subtree: the owner picks exactly one successor at their
/// nodes; all opponent successors are kept.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Owner's unique pick at this node.
    Pick(Action, Box<Strategy>),
    /// Opponent node: responses for every enabled action.
    Responses(Vec<(Action, Strategy)>),
    /// End of play for this branch.
    Leaf,
}

impl Strategy {
    /// The action path when the owner always moves and the opponent plays
    /// `choices` in order at their decision points.
    pub fn flatten_picks(&self) -> Vec<Action> {
        match self {
            Strategy::Pick(a, rest) => {
                let mut v = vec![a.clone()];
                v.extend(rest.flatten_picks());
                v
            }
            Strategy::Responses(rs) => {
                if rs.len() == 1 {
                    let mut v = vec![rs[0].0.clone()];
                    v.extend(rs[0].1.flatten_picks());
                    v
                } else {
                    vec![]
                }
            }
            Strategy::Leaf => vec![],
        }
    }
}

/// Verdict of backward induction with an extracted, re-validated witness.
#[derive(Debug, Clone)]
pub struct Solved {
    pub angel_wins: bool,
    /// Winning strategy for the winner.
    pub witness: Strategy,
}

/// Solves the finite tree by backward induction for the winning condition
/// `goal` on leaf states; the returned witness is re-validated by playing it
/// against every opponent behavior.
pub fn solve_tree(
    tree: &GameTree,
    goal: &dyn Fn(&State) -> Result<bool, SemError>,
) -> Result<Solved, SemError> {
    let angel_wins = wins(&tree.root, Player::Angel, Player::Angel, goal)?;
    let winner = if angel_wins {
        Player::Angel
    } else {
        Player::Demon
    };
    let witness = extract(&tree.root, Player::Angel, winner, goal)?;
    let ok = validate(&tree.root, Player::Angel, winner, &witness, goal)?;
    if !ok {
        return Err(SemError::DeterminacyViolation(
            "extracted strategy fails re-validation".to_string(),
        ));
    }
    Ok(Solved {
        angel_wins,
        witness,
    })
}

/// Does `for_player` have a winning strategy (into `goal` for Angel, into
/// its complement for Demon is handled by the caller via the goal closure)?
fn wins(
    node: &Node,
    acting: Player,
    for_player: Player,
    goal: &dyn Fn(&State) -> Result<bool, SemError>,
) -> Result<bool, SemError> {
    let state = node
        .state
        .as_ref()
        .expect("wins() is only called on enabled nodes");
    if node.is_leaf() {
        let in_goal = goal(state)?;
        return Ok(match for_player {
            Player::Angel => in_goal,
            Player::Demon => !in_goal,
        });
    }
    let enabled: Vec<&(Action, Node)> = node.enabled_children().collect();
    if enabled.is_empty() {
        // The acting player deadlocks and loses.
        return Ok(acting != for_player);
    }
    let mut any = false;
    let mut all = true;
    for (action, child) in enabled {
        let next_acting = if *action == Action::DualMark {
            acting.opponent()
        } else {
            acting
        };
        let w = wins(child, next_acting, for_player, goal)?;
        any |= w;
        all &= w;
    }
    Ok(if acting == for_player { any } else { all })
}

fn extract(
    node: &Node,
    acting: Player,
    owner: Player,
    goal: &dyn Fn(&State) -> Result<bool, SemError>,
) -> Result<Strategy, SemError> {
    if node.is_leaf() {
        return Ok(Strategy::Leaf);
    }
    let enabled: Vec<&(Action, Node)> = node.enabled_children().collect();
    if enabled.is_empty() {
        return Ok(Strategy::Leaf);
    }
    let next = |a: &Action| {
        if *a == Action::DualMark {
            acting.opponent()
        } else {
            acting
        }
    };
    if acting == owner {
        for (action, child) in &enabled {
            if wins(child, next(action), owner, goal)? {
                let sub = extract(child, next(action), owner, goal)?;
                return Ok(Strategy::Pick(action.clone(), Box::new(sub)));
            }
        }
        // Unreachable for winning owners; pick anything to stay total.
        let (action, child) = enabled[0];
        let sub = extract(child, next(action), owner, goal)?;
        Ok(Strategy::Pick(action.clone(), Box::new(sub)))
    } else {
        let mut responses = Vec::new();
        for (action, child) in enabled {
            let sub = extract(child, next(action), owner, goal)?;
            responses.push((action.clone(), sub));
        }
        Ok(Strategy::Responses(responses))
    }
}

/// Exhaustively plays the strategy against every opponent behavior.
fn validate(
    node: &Node,
    acting: Player,
    owner: Player,
    strategy: &Strategy,
    goal: &dyn Fn(&State) -> Result<bool, SemError>,
) -> Result<bool, SemError> {
    let state = node.state.as_ref().expect("validate on enabled nodes");
    if node.is_leaf() {
        let in_goal = goal(state)?;
        return Ok(match owner {
            Player::Angel => in_goal,
            Player::Demon => !in_goal,
        });
    }
    let enabled: Vec<&(Action, Node)> = node.enabled_children().collect();
    if enabled.is_empty() {
        return Ok(acting != owner);
    }
    let next = |a: &Action| {
        if *a == Action::DualMark {
            acting.opponent()
        } else {
            acting
        }
    };
    if acting == owner {
        match strategy {
            Strategy::Pick(action, rest) => {
                let child = enabled
                    .iter()
                    .find(|(a, _)| a == action)
                    .map(|(_, c)| c)
                    .ok_or_else(|| {
                        SemError::DeterminacyViolation(
                            "strategy picks a disabled action".to_string(),
                        )
                    })?;
                validate(child, next(action), owner, rest, goal)
            }
            _ => Err(SemError::DeterminacyViolation(
                "strategy shape mismatch at owner node".to_string(),
            )),
        }
    } else {
        match strategy {
            Strategy::Responses(rs) => {
                for (action, child) in enabled {
                    let sub = rs
                        .iter()
                        .find(|(a, _)| a == action)
                        .map(|(_, s)| s)
                        .ok_or_else(|| {
                            SemError::DeterminacyViolation(
                                "strategy misses an opponent action".to_string(),
                            )
                        })?;
                    if !validate(child, next(action), owner, sub, goal)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(SemError::DeterminacyViolation(
                "strategy shape mismatch at opponent node".to_string(),
            )),
        }
    }
}

/// Outcome of comparing operational and denotational semantics.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub agree: bool,
    pub operational_angel_wins: bool,
    pub denotational_angel_wins: bool,
    /// Set when the unroll budget was below the finite-space size.
    pub budget_warning: Option<String>,
}

/// Compares the backward-induction verdict with membership in the
/// denotational winning region on the finite backend.
pub fn cross_check(
    game: &Game,
    state: &State,
    goal: &Formula,
    space: &FiniteSpace,
    menus: &Menus,
    budget: usize,
) -> Result<CrossCheck, TreeError> {
    let tree = build_tree(game, state, menus, budget)?;
    let goal_fn = |s: &State| -> Result<bool, SemError> {
        let dims: Vec<String> = s.keys().cloned().collect();
        let vals: Vec<Rat> = s.values().cloned().collect();
        crate::semantics::eval_closed_formula(goal, &dims, &vals)
    };
    let solved = solve_tree(&tree, &goal_fn)?;

    let interp = PredicateInterpretation::new();
    let ev = FiniteEval {
        space,
        interp: &interp,
        mode: RepetitionMode::Lfp,
    };
    let goal_set = ev.truth_set(goal)?;
    let region = ev.angel(game, &goal_set)?;
    let point: Vec<Rat> = space
        .dims()
        .iter()
        .map(|d| state.get(d).cloned().unwrap_or_else(|| crate::rat::rat(0)))
        .collect();
    let idx = space
        .state_index(&point)
        .ok_or_else(|| SemError::StateEscapesSpace(format!("{point:?} not in space")))?;
    let denotational = region.contains(idx);
    let budget_warning = if budget < space.len() {
        Some(format!(
            "unroll budget {budget} below space size {}",
            space.len()
        ))
    } else {
        None
    };
    Ok(CrossCheck {
        agree: solved.angel_wins == denotational,
        operational_angel_wins: solved.angel_wins,
        denotational_angel_wins: denotational,
        budget_warning,
    })
}

/// Indented text rendering for the CLI.
pub fn format_tree(tree: &GameTree) -> String {
    let mut out = String::new();
    fn rec(node: &Node, acting: Player, indent: usize, out: &mut String) {
        for (action, child) in &node.children {
            let next = if *action == Action::DualMark {
                acting.opponent()
            } else {
                acting
            };
            let who = match acting {
                Player::Angel => "A",
                Player::Demon => "D",
            };
            let state = match &child.state {
                Some(s) => {
                    let parts: Vec<String> = s
                        .iter()
                        .map(|(k, v)| format!("{k}={}", crate::rat::format_rat(v)))
                        .collect();
                    parts.join(",")
                }
                None => "disabled".to_string(),
            };
            out.push_str(&format!(
                "{}{who} {action} -> {state}\n",
                "  ".repeat(indent)
            ));
            rec(child, next, indent + 1, out);
        }
    }
    rec(&tree.root, Player::Angel, 0, &mut out);
    out
}
