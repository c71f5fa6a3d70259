//! Ordinal-tracked transfinite fixpoint iteration over regions.
//!
//! Successor stages apply the step function; when the last few iterates
//! differ only by a single interval endpoint advancing in arithmetic
//! progression, the limit stage replaces that endpoint by an infinity and
//! iteration resumes at the next ordinal level. Detected patterns are
//! confirmed over extra steps and the accelerated set is checked against the
//! step function; a failed pattern falls back to honest non-stabilization.

use super::ordinal::OrdinalCounter;
use super::SemError;
use crate::rat::Rat;
use crate::regions::{Interval, Region};

#[derive(Debug, Clone)]
pub struct Schedule {
    /// Total iteration budget (successor steps across all levels).
    pub max_steps: usize,
    /// Extra confirming steps a pattern must survive before acceleration.
    pub confirm_steps: usize,
    /// Maximum nesting depth of limit stages (1 = plain omega limits).
    pub max_limit_levels: usize,
    /// Stop and report the current set at the first limit stage.
    pub stop_at_first_limit: bool,
}

impl Default for Schedule {
    fn default() -> Schedule {
        Schedule {
            max_steps: 512,
            confirm_steps: 3,
            max_limit_levels: 2,
            stop_at_first_limit: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StarOutcome {
    Fixpoint {
        region: Region,
        ordinal: OrdinalCounter,
    },
    NonStabilizing {
        steps: usize,
    },
}

#[derive(Debug, Clone)]
pub struct StarTrace {
    /// Iterates in stage order, including limit stages.
    pub iterates: Vec<(OrdinalCounter, Region)>,
    pub outcome: StarOutcome,
}

impl StarTrace {
    /// The iterate at an exact ordinal, if that stage was computed.
    pub fn at(&self, ordinal: &OrdinalCounter) -> Option<&Region> {
        self.iterates
            .iter()
            .find(|(o, _)| o == ordinal)
            .map(|(_, r)| r)
    }
}

/// Increasing transfinite iteration from `x` under `step` (which must be
/// inflationary, e.g. `z -> x U body(z)`).
pub fn iterate_lfp(
    x: &Region,
    mut step: impl FnMut(&Region) -> Result<Region, SemError>,
    schedule: &Schedule,
) -> Result<StarTrace, SemError> {
    iterate_directed(x, &mut step, schedule, Direction::Increasing)
}

/// Decreasing transfinite iteration from `start` under `step` (which must be
/// deflationary, e.g. `z -> x intersect body(z)`), for greatest fixpoints.
pub fn iterate_gfp(
    _x: &Region,
    start: &Region,
    mut step: impl FnMut(&Region) -> Result<Region, SemError>,
    schedule: &Schedule,
) -> Result<StarTrace, SemError> {
    iterate_directed(start, &mut step, schedule, Direction::Decreasing)
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Increasing,
    Decreasing,
}

fn iterate_directed(
    start: &Region,
    step: &mut dyn FnMut(&Region) -> Result<Region, SemError>,
    schedule: &Schedule,
    direction: Direction,
) -> Result<StarTrace, SemError> {
    let mut ordinal = OrdinalCounter::zero();
    let mut cur = start.clone();
    let mut iterates = vec![(ordinal.clone(), cur.clone())];
    // histories[level]: level 0 holds successor iterates since the last
    // limit; level j>0 holds the results of level-j limit stages.
    let mut histories: Vec<Vec<Region>> = vec![vec![cur.clone()]];
    let mut steps = 0usize;

    loop {
        if steps >= schedule.max_steps {
            return Ok(StarTrace {
                iterates,
                outcome: StarOutcome::NonStabilizing { steps },
            });
        }
        steps += 1;
        let next = step(&cur)?;
        if next.equals(&cur)? {
            return Ok(StarTrace {
                iterates,
                outcome: StarOutcome::Fixpoint {
                    region: cur,
                    ordinal,
                },
            });
        }
        ordinal = ordinal.succ();
        cur = next;
        iterates.push((ordinal.clone(), cur.clone()));
        histories[0].push(cur.clone());

        // Cascade of limit detections, innermost level first.
        let mut level = 0usize;
        while level < schedule.max_limit_levels {
            let Some(limit) = detect_limit(&histories[level], schedule.confirm_steps, direction)
            else {
                break;
            };
            // The true limit of an inflationary chain L satisfies
            // step(L) superset L (dually for deflationary chains); reject
            // accelerations that fail this.
            steps += 1;
            let probe = step(&limit)?;
            let plausible = match direction {
                Direction::Increasing => limit.difference(&probe)?.is_empty(),
                Direction::Decreasing => probe.difference(&limit)?.is_empty(),
            };
            if !plausible {
                break;
            }
            ordinal = ordinal.limit_bump(level + 1);
            cur = limit;
            iterates.push((ordinal.clone(), cur.clone()));
            histories[0] = vec![cur.clone()];
            for h in histories.iter_mut().take(level + 1).skip(1) {
                h.clear();
            }
            if histories.len() <= level + 1 {
                histories.push(Vec::new());
            }
            histories[level + 1].push(cur.clone());
            if schedule.stop_at_first_limit {
                return Ok(StarTrace {
                    iterates,
                    outcome: StarOutcome::Fixpoint {
                        region: cur,
                        ordinal,
                    },
                });
            }
            level += 1;
        }
    }
}

/// One endpoint of one box moving by a constant stride.
#[derive(Debug, Clone, PartialEq)]
struct MoveSig {
    /// Boxes shared by both iterates.
    stable: Vec<Vec<Interval>>,
    /// The moving box with the moving dimension blanked.
    frame: Vec<Interval>,
    dim: usize,
    upper_endpoint: bool,
    closed: bool,
    stride: Rat,
}

/// Detects an arithmetic single-endpoint progression over the last
/// `confirm + 2` consecutive differences of the history.
fn detect_limit(history: &[Region], confirm: usize, direction: Direction) -> Option<Region> {
    let window = confirm + 2;
    if history.len() < window + 1 {
        return None;
    }
    let tail = &history[history.len() - window - 1..];
    let mut sig: Option<MoveSig> = None;
    for pair in tail.windows(2) {
        let s = diff_signature(&pair[0], &pair[1])?;
        let grows = if s.upper_endpoint {
            s.stride > crate::rat::rat(0)
        } else {
            s.stride < crate::rat::rat(0)
        };
        let wanted = match direction {
            Direction::Increasing => grows,
            Direction::Decreasing => !grows,
        };
        if !wanted {
            return None;
        }
        match &sig {
            None => sig = Some(s),
            Some(prev) => {
                if *prev != s {
                    return None;
                }
            }
        }
    }
    let sig = sig?;
    let last = tail.last().unwrap();
    Some(accelerate(last, &sig, direction))
}

/// Compares consecutive iterates: `Some` when they differ in exactly one box
/// differing in exactly one endpoint of one dimension.
fn diff_signature(a: &Region, b: &Region) -> Option<MoveSig> {
    if a.dims() != b.dims() || a.boxes().len() != b.boxes().len() {
        return None;
    }
    // Normal forms are sorted and duplicate-free, so boxes form sets.
    let only_a: Vec<&Vec<Interval>> = a
        .boxes()
        .iter()
        .filter(|bx| !b.boxes().contains(bx))
        .collect();
    let only_b: Vec<&Vec<Interval>> = b
        .boxes()
        .iter()
        .filter(|bx| !a.boxes().contains(bx))
        .collect();
    let stable: Vec<Vec<Interval>> = a
        .boxes()
        .iter()
        .filter(|bx| b.boxes().contains(bx))
        .cloned()
        .collect();
    if only_a.len() != 1 || only_b.len() != 1 {
        return None;
    }
    let (xa, xb) = (only_a[0], only_b[0]);
    let mut moving = None;
    for (d, (ia, ib)) in xa.iter().zip(xb).enumerate() {
        if ia != ib {
            if moving.is_some() {
                return None;
            }
            moving = Some(d);
        }
    }
    let d = moving?;
    let (ia, ib) = (&xa[d], &xb[d]);
    // Same lower bound, moving upper bound?
    if ia.lo == ib.lo && ia.lo_closed == ib.lo_closed {
        if let (Some(va), Some(vb)) = (&ia.hi, &ib.hi) {
            if ia.hi_closed == ib.hi_closed {
                let mut frame = xa.clone();
                frame[d] = Interval::full();
                return Some(MoveSig {
                    stable,
                    frame,
                    dim: d,
                    upper_endpoint: true,
                    closed: ia.hi_closed,
                    stride: vb - va,
                });
            }
        }
    }
    if ia.hi == ib.hi && ia.hi_closed == ib.hi_closed {
        if let (Some(va), Some(vb)) = (&ia.lo, &ib.lo) {
            if ia.lo_closed == ib.lo_closed {
                let mut frame = xa.clone();
                frame[d] = Interval::full();
                return Some(MoveSig {
                    stable,
                    frame,
                    dim: d,
                    upper_endpoint: false,
                    closed: ia.lo_closed,
                    stride: vb - va,
                });
            }
        }
    }
    None
}

fn accelerate(last: &Region, sig: &MoveSig, direction: Direction) -> Region {
    // Locate the moving box in the last iterate: it matches the frame on all
    // dimensions but sig.dim.
    let mut boxes: Vec<Vec<Interval>> = Vec::new();
    let mut done = false;
    for bx in last.boxes() {
        let matches_frame = !done
            && bx
                .iter()
                .enumerate()
                .all(|(d, iv)| d == sig.dim || *iv == sig.frame[d]);
        if matches_frame && !sig.stable.contains(bx) {
            done = true;
            match direction {
                Direction::Increasing => {
                    let iv = &bx[sig.dim];
                    let widened = if sig.upper_endpoint {
                        Interval::new(iv.lo.clone(), iv.lo_closed, None, false)
                    } else {
                        Interval::new(None, false, iv.hi.clone(), iv.hi_closed)
                    };
                    if let Some(w) = widened {
                        let mut nb = bx.clone();
                        nb[sig.dim] = w;
                        boxes.push(nb);
                    }
                }
                Direction::Decreasing => {
                    // The receding box vanishes in the intersection.
                }
            }
        } else {
            boxes.push(bx.clone());
        }
    }
    Region::from_boxes(last.dims().to_vec(), boxes)
}
