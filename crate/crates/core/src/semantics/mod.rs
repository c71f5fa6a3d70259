//! Executable denotational semantics: Angel/Demon winning regions and
//! formula truth sets over two backends, with three repetition modes.

pub mod finite;
pub mod iterate;
pub mod ordinal;
pub mod region;

pub use finite::{
    eval_closed_formula, finite_closure, FiniteEval, FiniteSpace, PredicateInterpretation,
    Provenance, StateSet,
};
pub use iterate::{Schedule, StarOutcome, StarTrace};
pub use ordinal::OrdinalCounter;
pub use region::RegionEval;

use crate::regions::{Region, RegionError};
use crate::syntax::ast::{Formula, Game};

/// Semantics of repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepetitionMode {
    /// The least-fixpoint semantics; the only mode matching the denotational
    /// definition.
    #[default]
    Lfp,
    /// Players announce the repetition count up front (finite backend only).
    AdvanceNotice,
    /// Winning-region iteration truncated at the first omega limit.
    OmegaStrategic,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemError {
    #[error("unsupported game for this backend: {0}")]
    UnsupportedGame(String),
    #[error("unsupported atom for the region backend: {0}")]
    UnsupportedAtom(String),
    #[error("no interpretation for predicate symbol `{0}`")]
    MissingInterpretation(String),
    #[error("variable `{0}` is not a backend dimension")]
    UnknownVariable(String),
    #[error("move leaves the finite space: {0}")]
    StateEscapesSpace(String),
    #[error("forward closure exceeds cap of {0} states")]
    ClosureExceedsCap(usize),
    #[error("fixpoint iteration did not stabilize within {0} steps")]
    NonStabilizing(usize),
    #[error("determinacy violation (engine bug): {0}")]
    DeterminacyViolation(String),
    #[error("region error: {0}")]
    Region(#[from] RegionError),
}

/// A semantics backend: interval-box regions over named dimensions, or an
/// explicit finite state space. Both carry a predicate interpretation.
pub enum Backend<'a> {
    Region {
        dims: Vec<String>,
        interp: &'a PredicateInterpretation,
        schedule: Schedule,
    },
    Finite {
        space: &'a FiniteSpace,
        interp: &'a PredicateInterpretation,
    },
}

/// Winning set for a query, in the backend's currency.
#[derive(Debug, Clone)]
pub enum WinningSet {
    Region(Region),
    Finite(StateSet),
}

impl WinningSet {
    pub fn as_region(&self) -> Option<&Region> {
        match self {
            WinningSet::Region(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_states(&self) -> Option<&StateSet> {
        match self {
            WinningSet::Finite(s) => Some(s),
            _ => None,
        }
    }
}

impl Backend<'_> {
    fn region_eval(&self, mode: RepetitionMode) -> Option<RegionEval<'_>> {
        match self {
            Backend::Region {
                dims,
                interp,
                schedule,
            } => Some(RegionEval {
                dims: dims.clone(),
                interp,
                mode,
                schedule: schedule.clone(),
            }),
            _ => None,
        }
    }

    fn finite_eval(&self, mode: RepetitionMode) -> Option<FiniteEval<'_>> {
        match self {
            Backend::Finite { space, interp } => Some(FiniteEval {
                space,
                interp,
                mode,
            }),
            _ => None,
        }
    }
}

/// Angel's winning region for achieving `x` in `game`.
pub fn angel_region(
    game: &Game,
    x: &WinningSet,
    backend: &Backend<'_>,
    mode: RepetitionMode,
) -> Result<WinningSet, SemError> {
    match (backend.region_eval(mode), backend.finite_eval(mode), x) {
        (Some(ev), _, WinningSet::Region(r)) => Ok(WinningSet::Region(ev.angel(game, r)?)),
        (_, Some(ev), WinningSet::Finite(s)) => Ok(WinningSet::Finite(ev.angel(game, s)?)),
        _ => Err(SemError::UnsupportedGame(
            "winning set does not match the backend".to_string(),
        )),
    }
}

/// Demon's winning region, computed both by the Demon clauses and as the
/// complement of Angel's region for the complement goal; the two must agree.
pub fn demon_region(
    game: &Game,
    x: &WinningSet,
    backend: &Backend<'_>,
    mode: RepetitionMode,
) -> Result<WinningSet, SemError> {
    match (backend.region_eval(mode), backend.finite_eval(mode), x) {
        (Some(ev), _, WinningSet::Region(r)) => {
            let direct = ev.demon(game, r)?;
            let dual = ev.angel(game, &r.complement())?.complement();
            if !direct.equals(&dual)? {
                return Err(SemError::DeterminacyViolation(format!(
                    "direct {direct} vs dual {dual}"
                )));
            }
            Ok(WinningSet::Region(direct))
        }
        (_, Some(ev), WinningSet::Finite(s)) => {
            let direct = ev.demon(game, s)?;
            let dual = ev.angel(game, &s.complement())?.complement();
            if direct != dual {
                return Err(SemError::DeterminacyViolation(
                    "finite-backend demon clauses disagree with the complement route".to_string(),
                ));
            }
            Ok(WinningSet::Finite(direct))
        }
        _ => Err(SemError::UnsupportedGame(
            "winning set does not match the backend".to_string(),
        )),
    }
}

/// Truth set of a formula over the backend.
pub fn eval_formula(
    f: &Formula,
    backend: &Backend<'_>,
    mode: RepetitionMode,
) -> Result<WinningSet, SemError> {
    if let Some(ev) = backend.region_eval(mode) {
        return Ok(WinningSet::Region(ev.truth_set(f)?));
    }
    if let Some(ev) = backend.finite_eval(mode) {
        return Ok(WinningSet::Finite(ev.truth_set(f)?));
    }
    unreachable!()
}

/// Ordinal-tracked iteration of the repetition winning region on the region
/// backend, with the full iterate trace.
pub fn iterate_star(
    body: &Game,
    x: &Region,
    dims: Vec<String>,
    interp: &PredicateInterpretation,
    schedule: &Schedule,
) -> Result<StarTrace, SemError> {
    let ev = RegionEval {
        dims,
        interp,
        mode: RepetitionMode::Lfp,
        schedule: schedule.clone(),
    };
    ev.angel_star_trace(body, x)
}
