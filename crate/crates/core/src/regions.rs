//! Exact set algebra of finite unions of axis-aligned boxes over the
//! rationals, with open/closed and infinite endpoints.
//!
//! Regions are kept semi-canonical: no empty boxes, no box contained in
//! another, and boxes agreeing on all but one dimension with touching
//! intervals are merged. Equality is extensional, decided by emptiness of the
//! symmetric difference, so it does not depend on the box decomposition.

use crate::rat::{format_rat, Rat};
use std::cmp::Ordering;
use std::fmt;

/// One-dimensional interval. `None` endpoints are infinite and always open;
/// a point interval has both endpoints closed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<Rat>,
    pub lo_closed: bool,
    pub hi: Option<Rat>,
    pub hi_closed: bool,
}

impl Interval {
    /// Builds an interval, returning `None` when it would be empty.
    pub fn new(lo: Option<Rat>, lo_closed: bool, hi: Option<Rat>, hi_closed: bool) -> Option<Interval> {
        let lo_closed = lo_closed && lo.is_some();
        let hi_closed = hi_closed && hi.is_some();
        if let (Some(a), Some(b)) = (&lo, &hi) {
            match a.cmp(b) {
                Ordering::Greater => return None,
                Ordering::Equal if !(lo_closed && hi_closed) => return None,
                _ => {}
            }
        }
        Some(Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        })
    }

    pub fn full() -> Interval {
        Interval {
            lo: None,
            lo_closed: false,
            hi: None,
            hi_closed: false,
        }
    }

    pub fn point(v: Rat) -> Interval {
        Interval {
            lo: Some(v.clone()),
            lo_closed: true,
            hi: Some(v),
            hi_closed: true,
        }
    }

    /// `[lo, hi]`, `[lo, hi)`, etc. from finite endpoints.
    pub fn bounded(lo: Rat, lo_closed: bool, hi: Rat, hi_closed: bool) -> Option<Interval> {
        Interval::new(Some(lo), lo_closed, Some(hi), hi_closed)
    }

    pub fn at_least(v: Rat, closed: bool) -> Interval {
        Interval {
            lo: Some(v),
            lo_closed: closed,
            hi: None,
            hi_closed: false,
        }
    }

    pub fn at_most(v: Rat, closed: bool) -> Interval {
        Interval {
            lo: None,
            lo_closed: false,
            hi: Some(v),
            hi_closed: closed,
        }
    }

    pub fn contains(&self, r: &Rat) -> bool {
        let above = match &self.lo {
            None => true,
            Some(v) => r > v || (self.lo_closed && r == v),
        };
        let below = match &self.hi {
            None => true,
            Some(v) => r < v || (self.hi_closed && r == v),
        };
        above && below
    }

    pub fn is_full(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = max_lo(
            (&self.lo, self.lo_closed),
            (&other.lo, other.lo_closed),
        );
        let (hi, hi_closed) = min_hi(
            (&self.hi, self.hi_closed),
            (&other.hi, other.hi_closed),
        );
        Interval::new(lo.clone(), lo_closed, hi.clone(), hi_closed)
    }

    /// Union when the two intervals overlap or touch.
    pub fn merge(&self, other: &Interval) -> Option<Interval> {
        if !self.touches(other) {
            return None;
        }
        let (lo, lo_closed) = min_lo(
            (&self.lo, self.lo_closed),
            (&other.lo, other.lo_closed),
        );
        let (hi, hi_closed) = max_hi(
            (&self.hi, self.hi_closed),
            (&other.hi, other.hi_closed),
        );
        Interval::new(lo.clone(), lo_closed, hi.clone(), hi_closed)
    }

    /// Overlapping or adjacent (union is a single interval).
    pub fn touches(&self, other: &Interval) -> bool {
        if self.intersect(other).is_some() {
            return true;
        }
        let adjacent = |hi: &Interval, lo: &Interval| match (&hi.hi, &lo.lo) {
            (Some(a), Some(b)) => a == b && (hi.hi_closed || lo.lo_closed),
            _ => false,
        };
        adjacent(self, other) || adjacent(other, self)
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        lo_cmp((&other.lo, other.lo_closed), (&self.lo, self.lo_closed)) != Ordering::Greater
            && hi_cmp((&self.hi, self.hi_closed), (&other.hi, other.hi_closed)) != Ordering::Greater
    }

    /// Complement as up to two intervals.
    pub fn complement(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        if let Some(v) = &self.lo {
            out.push(Interval::at_most(v.clone(), !self.lo_closed));
        }
        if let Some(v) = &self.hi {
            out.push(Interval::at_least(v.clone(), !self.hi_closed));
        }
        out
    }

    pub fn translate(&self, c: &Rat) -> Interval {
        Interval {
            lo: self.lo.as_ref().map(|v| v + c),
            lo_closed: self.lo_closed,
            hi: self.hi.as_ref().map(|v| v + c),
            hi_closed: self.hi_closed,
        }
    }

    /// Scales by a nonzero factor, flipping the interval when negative.
    pub fn scale(&self, c: &Rat) -> Interval {
        use num_traits::Signed;
        assert!(!num_traits::Zero::is_zero(c));
        if c.is_positive() {
            Interval {
                lo: self.lo.as_ref().map(|v| v * c),
                lo_closed: self.lo_closed,
                hi: self.hi.as_ref().map(|v| v * c),
                hi_closed: self.hi_closed,
            }
        } else {
            Interval {
                lo: self.hi.as_ref().map(|v| v * c),
                lo_closed: self.hi_closed,
                hi: self.lo.as_ref().map(|v| v * c),
                hi_closed: self.lo_closed,
            }
        }
    }
}

type Lo<'a> = (&'a Option<Rat>, bool);

/// Orders lower bounds by position on the number line, inclusive-first.
fn lo_cmp(a: Lo<'_>, b: Lo<'_>) -> Ordering {
    match (a.0, b.0) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y).then_with(|| match (a.1, b.1) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => Ordering::Equal,
        }),
    }
}

fn hi_cmp(a: Lo<'_>, b: Lo<'_>) -> Ordering {
    match (a.0, b.0) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y).then_with(|| match (a.1, b.1) {
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => Ordering::Equal,
        }),
    }
}

fn max_lo<'a>(a: Lo<'a>, b: Lo<'a>) -> (&'a Option<Rat>, bool) {
    if lo_cmp(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

fn min_lo<'a>(a: Lo<'a>, b: Lo<'a>) -> (&'a Option<Rat>, bool) {
    if lo_cmp(a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}

fn min_hi<'a>(a: Lo<'a>, b: Lo<'a>) -> (&'a Option<Rat>, bool) {
    if hi_cmp(a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}

fn max_hi<'a>(a: Lo<'a>, b: Lo<'a>) -> (&'a Option<Rat>, bool) {
    if hi_cmp(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch(Vec<String>, Vec<String>),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
}

/// Finite union of axis-aligned boxes over an ordered list of dimensions.
#[derive(Debug, Clone)]
pub struct Region {
    dims: Vec<String>,
    boxes: Vec<Vec<Interval>>,
}

impl Region {
    pub fn empty(dims: Vec<String>) -> Region {
        Region { dims, boxes: vec![] }
    }

    pub fn full(dims: Vec<String>) -> Region {
        let n = dims.len();
        Region {
            dims,
            boxes: vec![vec![Interval::full(); n]],
        }
    }

    pub fn from_box(dims: Vec<String>, intervals: Vec<Interval>) -> Region {
        assert_eq!(dims.len(), intervals.len());
        let mut r = Region {
            dims,
            boxes: vec![intervals],
        };
        r.normalize();
        r
    }

    pub fn from_boxes(dims: Vec<String>, boxes: Vec<Vec<Interval>>) -> Region {
        for b in &boxes {
            assert_eq!(b.len(), dims.len());
        }
        let mut r = Region { dims, boxes };
        r.normalize();
        r
    }

    /// 1-D region from one interval.
    pub fn interval(dim: &str, iv: Interval) -> Region {
        Region::from_box(vec![dim.to_string()], vec![iv])
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn boxes(&self) -> &[Vec<Interval>] {
        &self.boxes
    }

    pub fn dim_index(&self, var: &str) -> Result<usize, RegionError> {
        self.dims
            .iter()
            .position(|d| d == var)
            .ok_or_else(|| RegionError::UnknownDimension(var.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.boxes.len() == 1 && self.boxes[0].iter().all(Interval::is_full)
    }

    pub fn contains_point(&self, point: &[Rat]) -> bool {
        assert_eq!(point.len(), self.dims.len());
        self.boxes
            .iter()
            .any(|b| b.iter().zip(point).all(|(iv, v)| iv.contains(v)))
    }

    fn check_dims(&self, other: &Region) -> Result<(), RegionError> {
        if self.dims != other.dims {
            Err(RegionError::DimensionMismatch(
                self.dims.clone(),
                other.dims.clone(),
            ))
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region, RegionError> {
        self.check_dims(other)?;
        let mut boxes = self.boxes.clone();
        boxes.extend(other.boxes.clone());
        let mut r = Region {
            dims: self.dims.clone(),
            boxes,
        };
        r.normalize();
        Ok(r)
    }

    pub fn intersect(&self, other: &Region) -> Result<Region, RegionError> {
        self.check_dims(other)?;
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                let mut cut = Vec::with_capacity(a.len());
                let mut ok = true;
                for (ia, ib) in a.iter().zip(b) {
                    match ia.intersect(ib) {
                        Some(iv) => cut.push(iv),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    boxes.push(cut);
                }
            }
        }
        let mut r = Region {
            dims: self.dims.clone(),
            boxes,
        };
        r.normalize();
        Ok(r)
    }

    pub fn complement(&self) -> Region {
        let mut acc = Region::full(self.dims.clone());
        for b in &self.boxes {
            // Complement of one box: union over dimensions of the cylinder
            // over that dimension's interval complement.
            let mut pieces = Region::empty(self.dims.clone());
            for (d, iv) in b.iter().enumerate() {
                for c in iv.complement() {
                    let mut cyl = vec![Interval::full(); self.dims.len()];
                    cyl[d] = c;
                    pieces.boxes.push(cyl);
                }
            }
            pieces.normalize();
            acc = acc.intersect(&pieces).expect("same dims");
        }
        acc
    }

    pub fn difference(&self, other: &Region) -> Result<Region, RegionError> {
        self.intersect(&other.complement())
    }

    /// Extensional equality via emptiness of both differences.
    pub fn equals(&self, other: &Region) -> Result<bool, RegionError> {
        Ok(self.difference(other)?.is_empty() && other.difference(self)?.is_empty())
    }

    pub fn translate(&self, var: &str, c: &Rat) -> Result<Region, RegionError> {
        let d = self.dim_index(var)?;
        let mut r = self.clone();
        for b in &mut r.boxes {
            b[d] = b[d].translate(c);
        }
        r.normalize();
        Ok(r)
    }

    /// Scales dimension `var` by nonzero `c`.
    pub fn scale(&self, var: &str, c: &Rat) -> Result<Region, RegionError> {
        let d = self.dim_index(var)?;
        let mut r = self.clone();
        for b in &mut r.boxes {
            b[d] = b[d].scale(c);
        }
        r.normalize();
        Ok(r)
    }

    /// Existential projection: drops the constraint on `var`, keeping the
    /// dimension. Exact for box unions.
    pub fn project_exists(&self, var: &str) -> Result<Region, RegionError> {
        let d = self.dim_index(var)?;
        let mut r = self.clone();
        for b in &mut r.boxes {
            b[d] = Interval::full();
        }
        r.normalize();
        Ok(r)
    }

    /// Replaces the constraint on `var` box-by-box via `f`, dropping boxes
    /// where `f` returns `None`.
    pub fn map_dim(
        &self,
        var: &str,
        mut f: impl FnMut(&Interval) -> Option<Interval>,
    ) -> Result<Region, RegionError> {
        let d = self.dim_index(var)?;
        let mut boxes = Vec::new();
        for b in &self.boxes {
            if let Some(iv) = f(&b[d]) {
                let mut nb = b.clone();
                nb[d] = iv;
                boxes.push(nb);
            }
        }
        let mut r = Region {
            dims: self.dims.clone(),
            boxes,
        };
        r.normalize();
        Ok(r)
    }

    /// Splits every box along `var` into (piece ∩ given interval) with a tag,
    /// useful for sign analysis. Returns boxes with the dimension restricted.
    pub fn restrict_dim(&self, var: &str, iv: &Interval) -> Result<Region, RegionError> {
        self.map_dim(var, |cur| cur.intersect(iv))
    }

    /// Fixes `var := value` and removes the dimension.
    pub fn slice_dim(&self, var: &str, value: &Rat) -> Result<Region, RegionError> {
        let d = self.dim_index(var)?;
        let mut dims = self.dims.clone();
        dims.remove(d);
        let mut boxes = Vec::new();
        for b in &self.boxes {
            if b[d].contains(value) {
                let mut nb = b.clone();
                nb.remove(d);
                boxes.push(nb);
            }
        }
        let mut r = Region { dims, boxes };
        r.normalize();
        Ok(r)
    }

    /// Re-expresses the region over a superset/reordering of its dimensions;
    /// new dimensions are unconstrained.
    pub fn with_dims(&self, target: &[String]) -> Result<Region, RegionError> {
        let mut index = Vec::with_capacity(self.dims.len());
        for d in &self.dims {
            match target.iter().position(|t| t == d) {
                Some(i) => index.push(i),
                None => return Err(RegionError::UnknownDimension(d.clone())),
            }
        }
        let mut boxes = Vec::new();
        for b in &self.boxes {
            let mut nb = vec![Interval::full(); target.len()];
            for (iv, &i) in b.iter().zip(&index) {
                nb[i] = iv.clone();
            }
            boxes.push(nb);
        }
        let mut r = Region {
            dims: target.to_vec(),
            boxes,
        };
        r.normalize();
        Ok(r)
    }

    fn normalize(&mut self) {
        // Antichain: remove boxes contained in another.
        self.boxes.sort();
        self.boxes.dedup();
        loop {
            let mut removed = false;
            let mut keep = vec![true; self.boxes.len()];
            for i in 0..self.boxes.len() {
                if !keep[i] {
                    continue;
                }
                for j in 0..self.boxes.len() {
                    if i == j || !keep[j] {
                        continue;
                    }
                    let sub = self.boxes[i]
                        .iter()
                        .zip(&self.boxes[j])
                        .all(|(a, b)| a.subset_of(b));
                    if sub {
                        keep[i] = false;
                        removed = true;
                        break;
                    }
                }
            }
            if removed {
                let mut idx = 0;
                self.boxes.retain(|_| {
                    let k = keep[idx];
                    idx += 1;
                    k
                });
            }
            // One-dimensional merge of boxes agreeing on all other dims.
            let mut merged = false;
            'outer: for i in 0..self.boxes.len() {
                for j in i + 1..self.boxes.len() {
                    if let Some(nb) = try_merge(&self.boxes[i], &self.boxes[j]) {
                        self.boxes[i] = nb;
                        self.boxes.swap_remove(j);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged && !removed {
                break;
            }
        }
        self.boxes.sort();
    }
}

/// Merges two boxes differing in at most one dimension with touching
/// intervals there.
fn try_merge(a: &[Interval], b: &[Interval]) -> Option<Vec<Interval>> {
    let mut diff = None;
    for (d, (ia, ib)) in a.iter().zip(b).enumerate() {
        if ia != ib {
            if diff.is_some() {
                return None;
            }
            diff = Some(d);
        }
    }
    match diff {
        None => Some(a.to_vec()),
        Some(d) => {
            let merged = a[d].merge(&b[d])?;
            let mut nb = a.to_vec();
            nb[d] = merged;
            Some(nb)
        }
    }
}

// Orderable intervals for canonical box sorting.
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        lo_cmp((&self.lo, self.lo_closed), (&other.lo, other.lo_closed))
            .then_with(|| hi_cmp((&self.hi, self.hi_closed), (&other.hi, other.hi_closed)))
    }
}

impl PartialEq for Region {
    /// Structural equality of normal forms; use [`Region::equals`] for
    /// extensional comparison.
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.boxes == other.boxes
    }
}

impl Eq for Region {}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            None => write!(f, "(-inf,")?,
            Some(v) => write!(f, "{}{},", if self.lo_closed { '[' } else { '(' }, format_rat(v))?,
        }
        match &self.hi {
            None => write!(f, "+inf)"),
            Some(v) => write!(f, "{}{}", format_rat(v), if self.hi_closed { ']' } else { ')' }),
        }
    }
}

impl fmt::Display for Region {
    /// CLI text form: `{x: [0,1) u [2,+inf); y: (-inf,+inf)}`, boxes joined
    /// by `|`. Boxes differing only in one dimension display as an interval
    /// union in that dimension.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return write!(f, "{{}}");
        }
        // Group boxes that agree everywhere except one dimension.
        let mut groups: Vec<(Vec<Interval>, usize, Vec<Interval>)> = Vec::new();
        let mut used = vec![false; self.boxes.len()];
        for i in 0..self.boxes.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut members = vec![self.boxes[i].clone()];
            let mut dim = None;
            for j in i + 1..self.boxes.len() {
                if used[j] {
                    continue;
                }
                let diffs: Vec<usize> = (0..self.dims.len())
                    .filter(|&d| self.boxes[i][d] != self.boxes[j][d])
                    .collect();
                let candidate = match (dim, diffs.as_slice()) {
                    (None, [d]) => Some(*d),
                    (Some(d0), [d]) if *d == d0 => Some(d0),
                    _ => None,
                };
                if let Some(d) = candidate {
                    if members
                        .iter()
                        .all(|m| (0..self.dims.len()).all(|k| k == d || m[k] == self.boxes[j][k]))
                    {
                        dim = Some(d);
                        members.push(self.boxes[j].clone());
                        used[j] = true;
                    }
                }
            }
            let d = dim.unwrap_or(0);
            let ivs: Vec<Interval> = members.iter().map(|m| m[d].clone()).collect();
            groups.push((members[0].clone(), d, ivs));
        }
        let mut first_group = true;
        for (rep, d, ivs) in groups {
            if !first_group {
                write!(f, " | ")?;
            }
            first_group = false;
            write!(f, "{{")?;
            for (k, name) in self.dims.iter().enumerate() {
                if k > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{name}: ")?;
                if k == d && ivs.len() > 1 {
                    for (m, iv) in ivs.iter().enumerate() {
                        if m > 0 {
                            write!(f, " u ")?;
                        }
                        write!(f, "{iv}")?;
                    }
                } else {
                    write!(f, "{}", rep[k])?;
                }
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn iv(lo: i64, lc: bool, hi: i64, hc: bool) -> Interval {
        Interval::bounded(rat(lo), lc, rat(hi), hc).unwrap()
    }

    #[test]
    fn complement_of_half_open() {
        // [0,1) over {x} -> (-inf,0) u [1,inf)
        let r = Region::interval("x", iv(0, true, 1, false));
        let c = r.complement();
        assert_eq!(c.boxes().len(), 2);
        assert!(c.contains_point(&[rat(-1)]));
        assert!(c.contains_point(&[rat(1)]));
        assert!(!c.contains_point(&[rat(0)]));
        assert!(!c.contains_point(&[crate::rat::ratio(1, 2)]));
    }

    #[test]
    fn adjacent_intervals_merge() {
        let a = Region::interval("x", iv(0, true, 1, false));
        let b = Region::interval("x", iv(1, true, 2, false));
        let u = a.union(&b).unwrap();
        assert_eq!(u.boxes().len(), 1);
        assert!(u.equals(&Region::interval("x", iv(0, true, 2, false))).unwrap());
    }

    #[test]
    fn endpoint_openness_matters() {
        let a = Region::interval("x", iv(0, true, 1, false));
        let b = Region::interval("x", iv(0, true, 1, true));
        assert!(!a.equals(&b).unwrap());
    }

    #[test]
    fn full_equals_complement_of_empty() {
        let dims = vec!["x".to_string(), "y".to_string()];
        let full = Region::full(dims.clone());
        let empty = Region::empty(dims);
        assert!(full.equals(&empty.complement()).unwrap());
    }

    #[test]
    fn translate_iterates_reproduce_growing_interval() {
        // Starting from [0,1), repeatedly union with the +1 translate:
        // after n steps the set is [0,n+1).
        let mut r = Region::interval("x", iv(0, true, 1, false));
        for n in 1..=5i64 {
            let shifted = r.translate("x", &rat(1)).unwrap();
            r = r.union(&shifted).unwrap();
            let expected = Region::interval("x", iv(0, true, n + 1, false));
            assert!(r.equals(&expected).unwrap(), "at n={n}");
        }
    }

    #[test]
    fn double_complement_is_identity() {
        let dims = vec!["x".to_string(), "y".to_string()];
        let r = Region::from_boxes(
            dims,
            vec![
                vec![iv(0, true, 1, false), Interval::full()],
                vec![iv(2, false, 5, true), iv(-1, true, 1, true)],
            ],
        );
        assert!(r.complement().complement().equals(&r).unwrap());
    }

    #[test]
    fn display_format() {
        let dims = vec!["x".to_string(), "y".to_string()];
        let r = Region::from_boxes(
            dims,
            vec![
                vec![iv(0, true, 1, false), Interval::full()],
                vec![Interval::at_least(rat(2), true), Interval::full()],
            ],
        );
        assert_eq!(r.to_string(), "{x: [0,1) u [2,+inf); y: (-inf,+inf)}");
    }

    #[test]
    fn projection_drops_constraint() {
        let dims = vec!["x".to_string(), "y".to_string()];
        let r = Region::from_box(dims, vec![iv(0, true, 1, true), iv(3, true, 4, true)]);
        let p = r.project_exists("x").unwrap();
        assert!(p.contains_point(&[rat(100), crate::rat::ratio(7, 2)]));
        assert!(!p.contains_point(&[rat(100), rat(5)]));
    }
}
