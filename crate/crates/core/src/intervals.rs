//! Interval cells over a time segment `[t0, theta0]`, partitions, and the
//! refinement order.
//!
//! A [`Cell`] is a finite disjoint union of intervals with any mix of open
//! and closed ends. Cells are kept in a canonical form (sorted, with no two
//! parts whose union is again an interval), so structural equality is set
//! equality.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Rat;

/// A nonempty interval with rational endpoints.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: Rat,
    hi: Rat,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Rat,
    hi: Rat,
    lo_closed: bool,
    hi_closed: bool,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Interval> {
        Interval::new(raw.lo, raw.hi, raw.lo_closed, raw.hi_closed)
    }
}

impl Interval {
    /// Fails if the described set is empty.
    pub fn new(lo: Rat, hi: Rat, lo_closed: bool, hi_closed: bool) -> Result<Interval> {
        match lo.cmp(&hi) {
            Ordering::Less => {}
            Ordering::Equal if lo_closed && hi_closed => {}
            _ => {
                return Err(Error::Invalid(format!(
                    "empty interval {}",
                    Interval { lo, hi, lo_closed, hi_closed }
                )))
            }
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    /// `None` when the set would be empty.
    pub fn try_new(lo: Rat, hi: Rat, lo_closed: bool, hi_closed: bool) -> Option<Interval> {
        Interval::new(lo, hi, lo_closed, hi_closed).ok()
    }

    pub fn closed(lo: Rat, hi: Rat) -> Result<Interval> {
        Interval::new(lo, hi, true, true)
    }

    pub fn open(lo: Rat, hi: Rat) -> Result<Interval> {
        Interval::new(lo, hi, false, false)
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: Rat, hi: Rat) -> Result<Interval> {
        Interval::new(lo, hi, true, false)
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: Rat, hi: Rat) -> Result<Interval> {
        Interval::new(lo, hi, false, true)
    }

    pub fn point(t: Rat) -> Interval {
        Interval { lo: t.clone(), hi: t, lo_closed: true, hi_closed: true }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, t: &Rat) -> bool {
        let above = match t.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match t.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// True if some punctured left neighbourhood `(t - d, t)` lies inside.
    pub fn contains_left_of(&self, t: &Rat) -> bool {
        self.lo < *t && *t <= self.hi
    }

    /// True if some punctured right neighbourhood `(t, t + d)` lies inside.
    pub fn contains_right_of(&self, t: &Rat) -> bool {
        self.lo <= *t && *t < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::try_new(lo, hi, lo_closed, hi_closed)
    }

    /// Order by left end, closed left ends first.
    fn cmp_start(&self, other: &Interval) -> Ordering {
        self.lo.cmp(&other.lo).then_with(|| other.lo_closed.cmp(&self.lo_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_singleton() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite disjoint union of intervals in canonical form. The empty list is ∅.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct Cell {
    parts: Vec<Interval>,
}

impl From<Vec<Interval>> for Cell {
    fn from(parts: Vec<Interval>) -> Cell {
        Cell::from_intervals(parts)
    }
}

impl From<Cell> for Vec<Interval> {
    fn from(cell: Cell) -> Vec<Interval> {
        cell.parts
    }
}

impl From<Interval> for Cell {
    fn from(i: Interval) -> Cell {
        Cell { parts: vec![i] }
    }
}

impl Cell {
    pub fn empty() -> Cell {
        Cell { parts: Vec::new() }
    }

    /// Union of arbitrary (possibly overlapping) intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(intervals: I) -> Cell {
        let mut parts: Vec<Interval> = intervals.into_iter().collect();
        parts.sort_by(Interval::cmp_start);
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for next in parts {
            if let Some(cur) = merged.last_mut() {
                let joins = next.lo < cur.hi || (next.lo == cur.hi && (cur.hi_closed || next.lo_closed));
                if joins {
                    match next.hi.cmp(&cur.hi) {
                        Ordering::Greater => {
                            cur.hi = next.hi;
                            cur.hi_closed = next.hi_closed;
                        }
                        Ordering::Equal => cur.hi_closed |= next.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            merged.push(next);
        }
        Cell { parts: merged }
    }

    /// Finite set of points, each an η-null singleton.
    pub fn points<I: IntoIterator<Item = Rat>>(points: I) -> Cell {
        Cell::from_intervals(points.into_iter().map(Interval::point))
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, t: &Rat) -> bool {
        self.parts.iter().any(|p| p.contains(t))
    }

    pub fn contains_left_of(&self, t: &Rat) -> bool {
        self.parts.iter().any(|p| p.contains_left_of(t))
    }

    pub fn contains_right_of(&self, t: &Rat) -> bool {
        self.parts.iter().any(|p| p.contains_right_of(t))
    }

    pub fn intersect(&self, other: &Cell) -> Cell {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                if let Some(i) = a.intersect(b) {
                    out.push(i);
                }
            }
        }
        Cell::from_intervals(out)
    }

    pub fn union(&self, other: &Cell) -> Cell {
        Cell::from_intervals(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    pub fn is_subset(&self, other: &Cell) -> bool {
        self.intersect(other) == *self
    }

    pub fn is_disjoint(&self, other: &Cell) -> bool {
        self.intersect(other).is_empty()
    }

    /// `domain ∖ self`; fails unless `self ⊆ domain`.
    pub fn complement(&self, domain: &Interval) -> Result<Cell> {
        let dom = Cell::from(domain.clone());
        if !self.is_subset(&dom) {
            return Err(Error::Domain(format!("cell {self} is not contained in {domain}")));
        }
        let mut gaps = Vec::new();
        let mut lo = domain.lo.clone();
        let mut lo_closed = domain.lo_closed;
        for p in &self.parts {
            if let Some(gap) = Interval::try_new(lo, p.lo.clone(), lo_closed, !p.lo_closed) {
                gaps.push(gap);
            }
            lo = p.hi.clone();
            lo_closed = !p.hi_closed;
        }
        if let Some(gap) = Interval::try_new(lo, domain.hi.clone(), lo_closed, domain.hi_closed) {
            gaps.push(gap);
        }
        Ok(Cell { parts: gaps })
    }

    /// Lebesgue measure: the total length of the parts.
    pub fn eta(&self) -> Rat {
        self.parts.iter().map(Interval::length).sum()
    }

    /// All endpoints of all parts, ascending, deduplicated.
    pub fn endpoints(&self) -> Vec<Rat> {
        let mut pts: Vec<Rat> = self.parts.iter().flat_map(|p| [p.lo.clone(), p.hi.clone()]).collect();
        pts.sort();
        pts.dedup();
        pts
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, "∪")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `cell_intersect`
pub fn cell_intersect(a: &Cell, b: &Cell) -> Cell {
    a.intersect(b)
}

/// `cell_complement`
pub fn cell_complement(a: &Cell, domain: &Interval) -> Result<Cell> {
    a.complement(domain)
}

/// Lebesgue length of a cell.
pub fn eta(a: &Cell) -> Rat {
    a.eta()
}

/// Finite family of nonempty, pairwise disjoint cells covering `domain`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Cell>", into = "Vec<Cell>")]
pub struct Partition {
    cells: Vec<Cell>,
    domain: Interval,
}

impl TryFrom<Vec<Cell>> for Partition {
    type Error = Error;

    fn try_from(cells: Vec<Cell>) -> Result<Partition> {
        let all = cells.iter().fold(Cell::empty(), |acc, c| acc.union(c));
        match all.parts() {
            [domain] => Partition::new(cells, domain.clone()),
            _ => Err(Error::Invalid("partition cells do not cover an interval".into())),
        }
    }
}

impl From<Partition> for Vec<Cell> {
    fn from(p: Partition) -> Vec<Cell> {
        p.cells
    }
}

impl Partition {
    pub fn new(cells: Vec<Cell>, domain: Interval) -> Result<Partition> {
        if cells.is_empty() {
            return Err(Error::Invalid("partition has no cells".into()));
        }
        if cells.iter().any(Cell::is_empty) {
            return Err(Error::Invalid("partition contains an empty cell".into()));
        }
        let mut parts: Vec<&Interval> = cells.iter().flat_map(|c| c.parts.iter()).collect();
        parts.sort_by(|a, b| a.cmp_start(b));
        // Consecutive parts must abut exactly, with complementary closedness.
        let mut lo = &domain.lo;
        let mut lo_closed = domain.lo_closed;
        for p in &parts {
            if p.lo != *lo || p.lo_closed != lo_closed {
                return Err(Error::Invalid(format!("cells do not tile {domain} near {}", p.lo)));
            }
            lo = &p.hi;
            lo_closed = !p.hi_closed;
        }
        if *lo != domain.hi || lo_closed == domain.hi_closed {
            return Err(Error::Invalid(format!("cells do not reach the end of {domain}")));
        }
        Ok(Partition { cells, domain })
    }

    /// `m` equal cells `[t_i, t_{i+1})`, the last one closed on the right.
    pub fn uniform(domain: &Interval, m: usize) -> Result<Partition> {
        if m == 0 {
            return Err(Error::Invalid("uniform partition needs at least one cell".into()));
        }
        let width = domain.length() / Rat::int(m as i64);
        let points: Vec<Rat> = (0..=m).map(|i| &domain.lo + &(&width * &Rat::int(i as i64))).collect();
        Partition::from_breakpoints(domain, &points)
    }

    /// Cells `[b_i, b_{i+1})` between the given points (plus the domain ends),
    /// the last one closed on the right when the domain is.
    pub fn from_breakpoints(domain: &Interval, points: &[Rat]) -> Result<Partition> {
        if domain.is_singleton() {
            return Ok(Partition { cells: vec![Cell::from(domain.clone())], domain: domain.clone() });
        }
        let mut pts: Vec<Rat> =
            points.iter().filter(|t| domain.lo < **t && **t < domain.hi).cloned().collect();
        pts.push(domain.lo.clone());
        pts.push(domain.hi.clone());
        pts.sort();
        pts.dedup();
        let last = pts.len() - 2;
        let cells = pts
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let lo_closed = if k == 0 { domain.lo_closed } else { true };
                let hi_closed = k == last && domain.hi_closed;
                Interval::new(w[0].clone(), w[1].clone(), lo_closed, hi_closed).map(Cell::from)
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(cells, domain.clone())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True iff every cell of `self` lies inside some cell of `coarse`.
    pub fn is_finer_than(&self, coarse: &Partition) -> bool {
        self.domain == coarse.domain && self.cells.iter().all(|f| coarse.cells.iter().any(|c| f.is_subset(c)))
    }

    /// Nonempty pairwise intersections of the two families.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        if self.domain != other.domain {
            return Err(Error::Domain(format!(
                "partitions over different domains {} and {}",
                self.domain, other.domain
            )));
        }
        let cells = self
            .cells
            .iter()
            .flat_map(|a| other.cells.iter().map(move |b| a.intersect(b)))
            .filter(|c| !c.is_empty())
            .collect();
        Ok(Partition { cells, domain: self.domain.clone() })
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.cells.iter()).finish()
    }
}

/// `is_finer(fine, coarse)`: whether `coarse ≺ fine`.
pub fn is_finer(fine: &Partition, coarse: &Partition) -> bool {
    fine.is_finer_than(coarse)
}

pub fn common_refinement(a: &Partition, b: &Partition) -> Result<Partition> {
    a.common_refinement(b)
}
