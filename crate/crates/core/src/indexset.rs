//! Eventually periodic subsets of the nonnegative integers.
//!
//! A set is stored as a finite transient part below a bound `B` plus a
//! residue pattern modulo a period `p` that decides membership for every
//! index `i >= B`. Boolean operations work on the joint period (the lcm of
//! the operand periods), and every result is brought to canonical form:
//! the smallest period first, then the smallest bound. Canonical forms are
//! unique, so derived `PartialEq` is extensional equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::config;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "IndexSetRepr", try_from = "IndexSetRepr")]
pub struct IndexSet {
    bound: u64,
    /// Sorted members below `bound`.
    transient: Vec<u64>,
    period: u64,
    /// `residues[r]` decides membership of `i >= bound` with `i % period == r`.
    residues: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct IndexSetRepr {
    bound: u64,
    transient: Vec<u64>,
    period: u64,
    residues: Vec<u64>,
}

impl From<IndexSet> for IndexSetRepr {
    fn from(s: IndexSet) -> Self {
        let residues = s.tail_residues().collect();
        IndexSetRepr { bound: s.bound, transient: s.transient, period: s.period, residues }
    }
}

impl TryFrom<IndexSetRepr> for IndexSet {
    type Error = Error;

    fn try_from(r: IndexSetRepr) -> Result<Self> {
        if r.period == 0 || r.residues.iter().any(|&x| x >= r.period) {
            return Err(Error::Format("index set residues must lie below a positive period".into()));
        }
        if r.transient.iter().any(|&x| x >= r.bound) {
            return Err(Error::Format("transient members must lie below the bound".into()));
        }
        let mut residues = vec![false; r.period as usize];
        for x in r.residues {
            residues[x as usize] = true;
        }
        IndexSet::from_parts(r.bound, r.transient, r.period, residues)
    }
}

fn check_period(period: u128) -> Result<u64> {
    let cap = config::period_cap();
    if period > cap as u128 {
        return Err(Error::PeriodCapExceeded { period, cap });
    }
    Ok(period as u64)
}

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet { bound: 0, transient: Vec::new(), period: 1, residues: vec![false] }
    }

    /// All of ℕ.
    pub fn all() -> Self {
        IndexSet { bound: 0, transient: Vec::new(), period: 1, residues: vec![true] }
    }

    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> Self {
        let mut transient: Vec<u64> = items.into_iter().collect();
        transient.sort_unstable();
        transient.dedup();
        let bound = transient.last().map_or(0, |&m| m + 1);
        let mut s = IndexSet { bound, transient, period: 1, residues: vec![false] };
        s.canonicalize();
        s
    }

    /// `{stride·j + offset : j >= 0}`.
    pub fn progression(stride: u64, offset: u64) -> Result<Self> {
        if stride == 0 {
            return Ok(Self::finite([offset]));
        }
        let period = check_period(stride as u128)?;
        let mut residues = vec![false; period as usize];
        residues[(offset % period) as usize] = true;
        let transient = Vec::new();
        Self::from_parts(offset, transient, period, residues)
    }

    /// `{i : i >= start}`.
    pub fn from_start(start: u64) -> Self {
        let mut s = IndexSet { bound: start, transient: Vec::new(), period: 1, residues: vec![true] };
        s.canonicalize();
        s
    }

    pub fn from_parts(bound: u64, transient: Vec<u64>, period: u64, residues: Vec<bool>) -> Result<Self> {
        check_period(period as u128)?;
        assert_eq!(residues.len() as u64, period, "residue table must have one entry per class");
        let mut transient: Vec<u64> = transient.into_iter().filter(|&x| x < bound).collect();
        transient.sort_unstable();
        transient.dedup();
        let mut s = IndexSet { bound, transient, period, residues };
        s.canonicalize();
        Ok(s)
    }

    /// Builds the set whose members below `bound` are decided by `member`
    /// and whose tail follows `member` on one representative per class
    /// modulo `period`.
    pub fn from_predicate<F: FnMut(u64) -> bool>(bound: u64, period: u64, mut member: F) -> Result<Self> {
        let period = check_period(period as u128)?;
        let transient = (0..bound).filter(|&i| member(i)).collect();
        let residues = (0..period)
            .map(|r| member(representative(bound, period, r)))
            .collect();
        Self::from_parts(bound, transient, period, residues)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn transient(&self) -> &[u64] {
        &self.transient
    }

    /// Residue classes (mod period) that are members beyond the bound.
    pub fn tail_residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.residues.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| r as u64)
    }

    /// The tail as progressions `(stride, first)`: members `first + stride·j`.
    pub fn tail_progressions(&self) -> Vec<(u64, u64)> {
        self.tail_residues()
            .map(|r| (self.period, representative(self.bound, self.period, r)))
            .collect()
    }

    pub fn member(&self, i: u64) -> bool {
        if i < self.bound {
            self.transient.binary_search(&i).is_ok()
        } else {
            self.residues[(i % self.period) as usize]
        }
    }

    pub fn is_empty(&self) -> bool {
        self.transient.is_empty() && !self.residues.iter().any(|&b| b)
    }

    pub fn is_finite(&self) -> bool {
        !self.residues.iter().any(|&b| b)
    }

    pub fn is_all(&self) -> bool {
        self.bound == 0 && self.residues.iter().all(|&b| b)
    }

    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.transient.len())
    }

    pub fn min(&self) -> Option<u64> {
        self.iter().next()
    }

    /// Members in increasing order (infinite when the tail is nonempty).
    pub fn iter(&self) -> Iter<'_> {
        Iter { set: self, next: 0 }
    }

    pub fn elements_below(&self, limit: u64) -> Vec<u64> {
        self.iter().take_while(|&i| i < limit).collect()
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &IndexSet) -> Result<IndexSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &IndexSet) -> Result<IndexSet> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> IndexSet {
        let transient = (0..self.bound).filter(|&i| !self.member(i)).collect();
        let residues = self.residues.iter().map(|&b| !b).collect();
        let mut s = IndexSet { bound: self.bound, transient, period: self.period, residues };
        s.canonicalize();
        s
    }

    pub fn is_subset(&self, other: &IndexSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    fn combine(&self, other: &IndexSet, op: impl Fn(bool, bool) -> bool) -> Result<IndexSet> {
        let joint = arith::lcm(self.period, other.period)
            .map(u128::from)
            .unwrap_or(u128::MAX);
        let period = check_period(joint)?;
        let bound = self.bound.max(other.bound);
        let transient = (0..bound)
            .filter(|&i| op(self.member(i), other.member(i)))
            .collect();
        let residues = (0..period)
            .map(|r| {
                op(
                    self.residues[(r % self.period) as usize],
                    other.residues[(r % other.period) as usize],
                )
            })
            .collect();
        let mut s = IndexSet { bound, transient, period, residues };
        s.canonicalize();
        Ok(s)
    }

    fn canonicalize(&mut self) {
        let p = self.period;
        for d in 1..p {
            if p.is_multiple_of(d) && (0..p).all(|r| self.residues[r as usize] == self.residues[(r % d) as usize]) {
                self.residues.truncate(d as usize);
                self.period = d;
                break;
            }
        }
        while self.bound > 0 {
            let last = self.bound - 1;
            let in_tail = self.residues[(last % self.period) as usize];
            let in_transient = self.transient.last() == Some(&last);
            if in_tail != in_transient {
                break;
            }
            if in_transient {
                self.transient.pop();
            }
            self.bound = last;
        }
    }
}

/// Smallest `c >= bound` with `c ≡ r (mod period)`.
pub(crate) fn representative(bound: u64, period: u64, r: u64) -> u64 {
    let shift = (r + period - bound % period) % period;
    bound + shift
}

pub struct Iter<'a> {
    set: &'a IndexSet,
    next: u64,
}

impl Iterator for Iter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let set = self.set;
        if self.next >= set.bound && set.is_finite() {
            return None;
        }
        loop {
            let i = self.next;
            self.next += 1;
            if set.member(i) {
                return Some(i);
            }
            if self.next >= set.bound && set.is_finite() {
                return None;
            }
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let mut parts: Vec<String> = Vec::new();
        if !self.transient.is_empty() {
            let items: Vec<String> = self.transient.iter().map(u64::to_string).collect();
            parts.push(format!("{{{}}}", items.join(", ")));
        }
        for (stride, first) in self.tail_progressions() {
            if stride == 1 {
                parts.push(format!("{{i ≥ {first}}}"));
            } else {
                parts.push(format!("{{{stride}j+{first} : j ≥ 0}}"));
            }
        }
        write!(f, "{}", parts.join(" ∪ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens() -> IndexSet {
        IndexSet::progression(2, 0).unwrap()
    }

    fn odds() -> IndexSet {
        IndexSet::progression(2, 1).unwrap()
    }

    fn window_eq(a: &IndexSet, f: impl Fn(u64) -> bool, limit: u64) {
        for i in 0..limit {
            assert_eq!(a.member(i), f(i), "index {i} of {a}");
        }
    }

    #[test]
    fn union_examples() {
        assert_eq!(evens().union(&odds()).unwrap(), IndexSet::all());
        assert_eq!(IndexSet::finite([0]).union(&IndexSet::empty()).unwrap(), IndexSet::finite([0]));
        let a = IndexSet::progression(2, 1).unwrap();
        let b = IndexSet::progression(2, 2).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u, IndexSet::from_start(1));
        window_eq(&u, |i| i >= 1, 2 * 2 + 4);
    }

    #[test]
    fn intersect_examples() {
        assert!(evens().intersect(&odds()).unwrap().is_empty());
        let s = IndexSet::finite([3, 9]).union(&IndexSet::progression(5, 2).unwrap()).unwrap();
        assert_eq!(s.intersect(&IndexSet::all()).unwrap(), s);
        let got = odds().intersect(&IndexSet::progression(3, 1).unwrap()).unwrap();
        assert_eq!(got, IndexSet::progression(6, 1).unwrap());
        window_eq(&got, |i| i % 2 == 1 && i % 3 == 1, 50);
    }

    #[test]
    fn difference_examples() {
        let gen = IndexSet::progression(2, 1)
            .unwrap()
            .difference(&IndexSet::progression(2, 3).unwrap())
            .unwrap();
        assert_eq!(gen, IndexSet::finite([1]));
        window_eq(&gen, |i| i == 1, 40);
        let s = IndexSet::progression(7, 4).unwrap();
        assert!(s.difference(&s).unwrap().is_empty());
        assert_eq!(IndexSet::all().difference(&IndexSet::finite([0])).unwrap(), IndexSet::from_start(1));
    }

    #[test]
    fn member_examples() {
        assert!(evens().member(4));
        assert!(!odds().member(0));
        assert!(IndexSet::progression(6, 1).unwrap().member(13));
    }

    #[test]
    fn canonical_period_and_bound() {
        // residues {0, 2} mod 4 is the even numbers.
        let s = IndexSet::from_parts(6, vec![0, 2, 4], 4, vec![true, false, true, false]).unwrap();
        assert_eq!(s, evens());
        assert_eq!(s.period(), 2);
        assert_eq!(s.bound(), 0);
    }

    #[test]
    fn period_cap_is_enforced() {
        let a = IndexSet::progression(999_983, 0).unwrap();
        let b = IndexSet::progression(999_979, 0).unwrap();
        assert!(matches!(a.union(&b), Err(Error::PeriodCapExceeded { .. })));
    }

    #[test]
    fn iteration_and_display() {
        let s = IndexSet::finite([0, 2]).union(&IndexSet::progression(3, 7).unwrap()).unwrap();
        assert_eq!(s.elements_below(15), vec![0, 2, 7, 10, 13]);
        assert_eq!(IndexSet::finite([4, 1]).iter().collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(IndexSet::empty().iter().count(), 0);
        assert_eq!(format!("{}", IndexSet::progression(2, 3).unwrap()), "{2j+3 : j ≥ 0}");
    }

    #[test]
    fn serde_roundtrip() {
        let s = IndexSet::finite([0, 5]).union(&IndexSet::progression(4, 9).unwrap()).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: IndexSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
