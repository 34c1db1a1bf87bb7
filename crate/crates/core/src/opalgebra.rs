//! Exact algebra for operators that are finite sums of rank-one dyads
//! `c|out⟩⟨in|` and affine shift families
//! `c·Σ_{j≥0} |outStride·j + outOffset⟩⟨inStride·j + inOffset|`.
//!
//! The class is closed under adjoint, addition and composition. Equality is
//! decided exactly in structure: past a computable column horizon every
//! column looks like the column one period earlier with all rows moved
//! along their progressions, so a finite window of columns settles any
//! identity.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::config;
use crate::error::{Error, Result};
use crate::indexset::{representative, IndexSet};


pub type Coefficient = Complex64;
pub type BasisIndex = u64;

pub(crate) fn is_negligible(c: Coefficient) -> bool {
    c.norm() <= config::tolerance()
}

/// `coeff·|out⟩⟨input|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadTerm {
    pub coeff: Coefficient,
    pub out: BasisIndex,
    pub input: BasisIndex,
}

/// `coeff·Σ_{j ≥ j_start} |out_stride·j + out_offset⟩⟨in_stride·j + in_offset|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftFamilyTerm {
    pub coeff: Coefficient,
    pub out_stride: u64,
    pub out_offset: u64,
    pub in_stride: u64,
    pub in_offset: u64,
    pub j_start: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Dyad(DyadTerm),
    Family(ShiftFamilyTerm),
}

impl ShiftFamilyTerm {
    pub fn new(coeff: Coefficient, out_stride: u64, out_offset: u64, in_stride: u64, in_offset: u64) -> Self {
        ShiftFamilyTerm { coeff, out_stride, out_offset, in_stride, in_offset, j_start: 0 }
    }

    fn key(&self) -> Result<FamilyKey> {
        if self.in_stride == 0 || self.out_stride == 0 {
            return Err(Error::UnsupportedForm(
                "shift families need strides >= 1; a stride-0 family is unbounded".into(),
            ));
        }
        let fold = |stride: u64, offset: u64| {
            stride
                .checked_mul(self.j_start)
                .and_then(|x| x.checked_add(offset))
                .ok_or_else(|| Error::UnsupportedForm("family offsets overflow".into()))
        };
        Ok(FamilyKey {
            in_stride: self.in_stride,
            in_offset: fold(self.in_stride, self.in_offset)?,
            out_stride: self.out_stride,
            out_offset: fold(self.out_stride, self.out_offset)?,
        })
    }
}

/// A family with `j_start` folded into the offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct FamilyKey {
    in_stride: u64,
    in_offset: u64,
    out_stride: u64,
    out_offset: u64,
}

impl FamilyKey {
    fn input_at(&self, j: u64) -> u64 {
        self.in_stride * j + self.in_offset
    }

    fn output_at(&self, j: u64) -> u64 {
        self.out_stride * j + self.out_offset
    }

    fn row_for_column(&self, c: u64) -> Option<u64> {
        if c < self.in_offset || !(c - self.in_offset).is_multiple_of(self.in_stride) {
            return None;
        }
        Some(self.output_at((c - self.in_offset) / self.in_stride))
    }

    fn column_for_row(&self, r: u64) -> Option<u64> {
        if r < self.out_offset || !(r - self.out_offset).is_multiple_of(self.out_stride) {
            return None;
        }
        Some(self.input_at((r - self.out_offset) / self.out_stride))
    }

    fn adjoint(&self) -> FamilyKey {
        FamilyKey {
            in_stride: self.out_stride,
            in_offset: self.out_offset,
            out_stride: self.in_stride,
            out_offset: self.in_offset,
        }
    }

    fn predecessor(&self) -> Option<(u64, u64)> {
        Some((
            self.out_offset.checked_sub(self.out_stride)?,
            self.in_offset.checked_sub(self.in_stride)?,
        ))
    }

    fn advanced(&self) -> FamilyKey {
        FamilyKey {
            in_offset: self.in_offset + self.in_stride,
            out_offset: self.out_offset + self.out_stride,
            ..*self
        }
    }

    /// Product `self ∘ rhs` of two families, if their index progressions meet.
    fn compose(&self, rhs: &FamilyKey) -> Option<FamilyKey> {
        let (j0, j_period) =
            arith::first_meeting(rhs.out_stride, rhs.out_offset, self.in_stride, self.in_offset)?;
        let k0 = (rhs.output_at(j0) - self.in_offset) / self.in_stride;
        let k_step = rhs.out_stride * j_period / self.in_stride;
        Some(FamilyKey {
            in_stride: rhs.in_stride * j_period,
            in_offset: rhs.input_at(j0),
            out_stride: self.out_stride * k_step,
            out_offset: self.output_at(k0),
        })
    }
}

/// An entry where two operators differ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub row: BasisIndex,
    pub col: BasisIndex,
    /// Left operand minus right operand at `(row, col)`.
    pub value: Coefficient,
    pub magnitude: f64,
}

/// Column horizon and period: for columns `c >= horizon`, column `c + period`
/// has the same nonzero pattern as column `c`, each row carried along its
/// progression, with identical amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnStructure {
    pub horizon: u64,
    pub period: u64,
}

impl ColumnStructure {
    /// Columns `[0, window)` decide every column-wise question.
    pub fn window(&self) -> u64 {
        self.horizon + self.period
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StructuredOperator {
    dyads: BTreeMap<(BasisIndex, BasisIndex), Coefficient>,
    families: BTreeMap<FamilyKey, Coefficient>,
}

impl StructuredOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::diagonal_family(Coefficient::new(1.0, 0.0), 1, 0)
    }

    pub fn dyad(coeff: Coefficient, out: BasisIndex, input: BasisIndex) -> Self {
        let mut op = Self::zero();
        op.dyads.insert((out, input), coeff);
        op.canonicalize();
        op
    }

    pub fn family(term: ShiftFamilyTerm) -> Result<Self> {
        Self::from_terms([Term::Family(term)])
    }

    /// `coeff·Σ_j |stride·j + offset⟩⟨stride·j + offset|`.
    pub fn diagonal_family(coeff: Coefficient, stride: u64, offset: u64) -> Self {
        let mut op = Self::zero();
        let key = FamilyKey { in_stride: stride, in_offset: offset, out_stride: stride, out_offset: offset };
        op.families.insert(key, coeff);
        op.canonicalize();
        op
    }

    /// Orthogonal projector onto the span of `set`.
    pub fn projector(set: &IndexSet) -> Self {
        let one = Coefficient::new(1.0, 0.0);
        let mut op = Self::zero();
        for &i in set.transient() {
            op.dyads.insert((i, i), one);
        }
        for (stride, first) in set.tail_progressions() {
            let key = FamilyKey { in_stride: stride, in_offset: first, out_stride: stride, out_offset: first };
            op.families.insert(key, one);
        }
        op.canonicalize();
        op
    }

    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Result<Self> {
        let mut op = Self::zero();
        for term in terms {
            op.push_term(term)?;
        }
        op.canonicalize();
        Ok(op)
    }

    fn push_term(&mut self, term: Term) -> Result<()> {
        match term {
            Term::Dyad(d) => *self.dyads.entry((d.out, d.input)).or_default() += d.coeff,
            Term::Family(f) => *self.families.entry(f.key()?).or_default() += f.coeff,
        }
        Ok(())
    }

    /// Canonical term list: dyads first in `(out, in)` order, then families.
    pub fn terms(&self) -> Vec<Term> {
        let dyads = self
            .dyads
            .iter()
            .map(|(&(out, input), &coeff)| Term::Dyad(DyadTerm { coeff, out, input }));
        let families = self.families.iter().map(|(k, &coeff)| {
            Term::Family(ShiftFamilyTerm {
                coeff,
                out_stride: k.out_stride,
                out_offset: k.out_offset,
                in_stride: k.in_stride,
                in_offset: k.in_offset,
                j_start: 0,
            })
        });
        dyads.chain(families).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.dyads.is_empty() && self.families.is_empty()
    }

    pub fn dyad_count(&self) -> usize {
        self.dyads.len()
    }

    pub fn family_count(&self) -> usize {
        self.families.len()
    }

    fn canonicalize(&mut self) {
        self.dyads.retain(|_, c| !is_negligible(*c));
        self.families.retain(|_, c| !is_negligible(*c));
        let eps = config::tolerance();
        loop {
            let mut rewrite = None;
            'search: for (&(out, input), &dc) in &self.dyads {
                for (key, &fc) in &self.families {
                    if key.predecessor() == Some((out, input)) && (dc - fc).norm() <= eps {
                        let grown = FamilyKey {
                            in_offset: input,
                            out_offset: out,
                            ..*key
                        };
                        rewrite = Some(((out, input), *key, grown, fc));
                        break 'search;
                    }
                    if (key.out_offset, key.in_offset) == (out, input) && (dc + fc).norm() <= eps {
                        rewrite = Some(((out, input), *key, key.advanced(), fc));
                        break 'search;
                    }
                }
            }
            let Some((dyad, old, new, coeff)) = rewrite else { break };
            self.dyads.remove(&dyad);
            self.families.remove(&old);
            let slot = self.families.entry(new).or_default();
            *slot += coeff;
            if is_negligible(*slot) {
                self.families.remove(&new);
            }
        }
    }

    pub fn scale(&self, factor: Coefficient) -> Self {
        let mut op = self.clone();
        op.dyads.values_mut().for_each(|c| *c *= factor);
        op.families.values_mut().for_each(|c| *c *= factor);
        op.canonicalize();
        op
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut op = self.clone();
        for (k, c) in &other.dyads {
            *op.dyads.entry(*k).or_default() += c;
        }
        for (k, c) in &other.families {
            *op.families.entry(*k).or_default() += c;
        }
        op.canonicalize();
        op
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Coefficient::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        let mut op = Self::zero();
        for (&(out, input), c) in &self.dyads {
            op.dyads.insert((input, out), c.conj());
        }
        for (k, c) in &self.families {
            op.families.insert(k.adjoint(), c.conj());
        }
        op.canonicalize();
        op
    }

    /// Operator product `self ∘ rhs` (`rhs` acts first).
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut op = Self::zero();
        for (&(ro, ri), &ca) in &self.dyads {
            for (&(so, si), &cb) in &rhs.dyads {
                if ri == so {
                    *op.dyads.entry((ro, si)).or_default() += ca * cb;
                }
            }
            for (kb, &cb) in &rhs.families {
                if let Some(col) = kb.column_for_row(ri) {
                    *op.dyads.entry((ro, col)).or_default() += ca * cb;
                }
            }
        }
        for (ka, &ca) in &self.families {
            for (&(so, si), &cb) in &rhs.dyads {
                if let Some(row) = ka.row_for_column(so) {
                    *op.dyads.entry((row, si)).or_default() += ca * cb;
                }
            }
            for (kb, &cb) in &rhs.families {
                if let Some(k) = ka.compose(kb) {
                    *op.families.entry(k).or_default() += ca * cb;
                }
            }
        }
        op.canonicalize();
        op
    }

    /// Matrix entry `⟨row|self|col⟩`.
    pub fn entry(&self, row: BasisIndex, col: BasisIndex) -> Coefficient {
        let mut acc = self.dyads.get(&(row, col)).copied().unwrap_or_default();
        for (k, c) in &self.families {
            if k.row_for_column(col) == Some(row) {
                acc += c;
            }
        }
        acc
    }

    /// Nonzero entries of column `col`.
    pub fn column(&self, col: BasisIndex) -> BTreeMap<BasisIndex, Coefficient> {
        let mut out: BTreeMap<BasisIndex, Coefficient> = BTreeMap::new();
        for (&(r, c), v) in &self.dyads {
            if c == col {
                *out.entry(r).or_default() += v;
            }
        }
        for (k, v) in &self.families {
            if let Some(r) = k.row_for_column(col) {
                *out.entry(r).or_default() += v;
            }
        }
        out.retain(|_, v| !is_negligible(*v));
        out
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        let mut out: BTreeMap<BasisIndex, Coefficient> = BTreeMap::new();
        for (&col, &amp) in &psi.entries {
            for (&(r, c), &v) in &self.dyads {
                if c == col {
                    *out.entry(r).or_default() += v * amp;
                }
            }
            for (k, &v) in &self.families {
                if let Some(r) = k.row_for_column(col) {
                    *out.entry(r).or_default() += v * amp;
                }
            }
        }
        let mut state = StateVector { entries: out };
        state.prune();
        state
    }

    pub fn column_structure(&self) -> Result<ColumnStructure> {
        self.structure_with(&[])
    }

    fn structure_with(&self, extra: &[FamilyKey]) -> Result<ColumnStructure> {
        let mut period: u64 = 1;
        for k in self.families.keys() {
            period = arith::lcm(period, k.in_stride).ok_or(Error::PeriodCapExceeded {
                period: u128::MAX,
                cap: config::period_cap(),
            })?;
        }
        let cap = config::period_cap();
        if period > cap {
            return Err(Error::PeriodCapExceeded { period: period as u128, cap });
        }
        let mut horizon = 0u64;
        for &(_, c) in self.dyads.keys() {
            horizon = horizon.max(c + 1);
        }
        let keys: Vec<&FamilyKey> = self.families.keys().chain(extra).collect();
        for k in &keys {
            horizon = horizon.max(k.in_offset + 1);
        }
        // Two families with different slopes can share a row in at most one
        // column; the horizon must lie past every such coincidence.
        for (a, f) in keys.iter().enumerate() {
            for g in &keys[a + 1..] {
                let (isf, osf, iof, oof) =
                    (f.in_stride as i128, f.out_stride as i128, f.in_offset as i128, f.out_offset as i128);
                let (isg, osg, iog, oog) =
                    (g.in_stride as i128, g.out_stride as i128, g.in_offset as i128, g.out_offset as i128);
                let slope = isg * osf - isf * osg;
                if slope == 0 {
                    continue;
                }
                let rhs = isf * isg * (oog - oof) + isg * osf * iof - isf * osg * iog;
                let crossing = rhs.div_euclid(slope) + 1;
                if crossing > 0 {
                    horizon = horizon.max(crossing as u64 + 1);
                }
            }
        }
        Ok(ColumnStructure { horizon, period })
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.first_nonzero()?.is_none())
    }

    fn first_nonzero(&self) -> Result<Option<Deviation>> {
        if self.is_empty() {
            return Ok(None);
        }
        let structure = self.column_structure()?;
        for col in 0..structure.window() {
            if let Some((&row, &value)) = self.column(col).iter().next() {
                return Ok(Some(Deviation { row, col, value, magnitude: value.norm() }));
            }
        }
        Ok(None)
    }

    /// Exact entrywise equality (amplitudes within the global tolerance).
    pub fn equals(&self, other: &Self) -> Result<bool> {
        self.sub(other).is_zero()
    }

    /// First entry (column-major) where `self` and `other` differ.
    pub fn first_deviation(&self, other: &Self) -> Result<Option<Deviation>> {
        self.sub(other).first_nonzero()
    }

    /// Every differing entry inside the deciding column window, up to `limit`.
    pub fn deviations(&self, other: &Self, limit: usize) -> Result<(u64, Vec<Deviation>)> {
        let diff = self.sub(other);
        let window = diff.column_structure()?.window();
        let mut found = Vec::new();
        'cols: for col in 0..window {
            for (row, value) in diff.column(col) {
                found.push(Deviation { row, col, value, magnitude: value.norm() });
                if found.len() >= limit {
                    break 'cols;
                }
            }
        }
        Ok((window, found))
    }

    /// Columns carrying a nonzero entry.
    pub fn input_support(&self) -> Result<IndexSet> {
        let s = self.column_structure()?;
        IndexSet::from_predicate(s.horizon, s.period, |c| !self.column(c).is_empty())
    }

    /// Rows carrying a nonzero entry (the range, for monomial operators).
    pub fn output_range(&self) -> Result<IndexSet> {
        self.adjoint().input_support()
    }

    /// At most one nonzero entry per column.
    pub fn is_monomial(&self) -> Result<bool> {
        let s = self.column_structure()?;
        Ok((0..s.window()).all(|c| self.column(c).len() <= 1))
    }

    /// Largest column norm together with the column attaining it. Exact over
    /// all of ℕ because column norms repeat with the column period.
    pub fn max_column_norm(&self) -> Result<(f64, u64)> {
        let s = self.column_structure()?;
        let mut best = (0.0, 0);
        for c in 0..s.window() {
            let n = self.column(c).values().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if n > best.0 {
                best = (n, c);
            }
        }
        Ok(best)
    }

    /// Largest index reachable from inputs below `input_bound`.
    pub fn reach(&self, input_bound: u64) -> u64 {
        let mut reach = 0;
        for &(r, c) in self.dyads.keys() {
            if c < input_bound {
                reach = reach.max(r + 1);
            }
        }
        for k in self.families.keys() {
            if k.in_offset < input_bound {
                let last_j = (input_bound - 1 - k.in_offset) / k.in_stride;
                reach = reach.max(k.output_at(last_j) + 1);
            }
        }
        reach
    }

    /// Diagonal entries `⟨i|self|i⟩` as an eventually periodic profile.
    pub fn diagonal_profile(&self) -> Result<DiagonalProfile> {
        let diagonal = FamilyKey { in_stride: 1, in_offset: 0, out_stride: 1, out_offset: 0 };
        let s = self.structure_with(&[diagonal])?;
        Ok(DiagonalProfile::sample(s.horizon, s.period, |i| self.entry(i, i)))
    }

    /// The diagonal operator with the given profile.
    pub fn from_diagonal_profile(profile: &DiagonalProfile) -> Self {
        let mut op = Self::zero();
        for (i, &v) in profile.head.iter().enumerate() {
            op.dyads.insert((i as u64, i as u64), v);
        }
        for (r, &v) in profile.tail.iter().enumerate() {
            let first = representative(profile.bound, profile.period, r as u64);
            let key = FamilyKey { in_stride: profile.period, in_offset: first, out_stride: profile.period, out_offset: first };
            op.families.insert(key, v);
        }
        op.canonicalize();
        op
    }

    /// `self` restricted to the columns in `set` (`self ∘ P_set`).
    pub fn restrict_columns(&self, set: &IndexSet) -> Self {
        self.compose(&Self::projector(set))
    }
}

impl fmt::Display for StructuredOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for term in self.terms() {
            match term {
                Term::Dyad(d) => parts.push(format!("{}|{}⟩⟨{}|", fmt_coeff(d.coeff), d.out, d.input)),
                Term::Family(k) => parts.push(format!(
                    "{}Σ_j|{}j+{}⟩⟨{}j+{}|",
                    fmt_coeff(k.coeff),
                    k.out_stride,
                    k.out_offset,
                    k.in_stride,
                    k.in_offset
                )),
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

fn fmt_coeff(c: Coefficient) -> String {
    if (c - Coefficient::new(1.0, 0.0)).norm() <= config::tolerance() {
        String::new()
    } else if c.im.abs() <= config::tolerance() {
        format!("{:.6}·", c.re)
    } else {
        format!("({:.6}{:+.6}i)·", c.re, c.im)
    }
}

/// Eventually periodic sequence of diagonal values: `head[i]` for
/// `i < bound`, `tail[i % period]` beyond.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalProfile {
    pub bound: u64,
    pub head: Vec<Coefficient>,
    pub period: u64,
    pub tail: Vec<Coefficient>,
}

impl DiagonalProfile {
    pub fn sample(bound: u64, period: u64, mut value: impl FnMut(u64) -> Coefficient) -> Self {
        let head = (0..bound).map(&mut value).collect();
        let tail = (0..period)
            .map(|r| value(representative(bound, period, r)))
            .collect();
        DiagonalProfile { bound, head, period, tail }
    }

    pub fn value(&self, i: u64) -> Coefficient {
        if i < self.bound {
            self.head[i as usize]
        } else {
            self.tail[(i % self.period) as usize]
        }
    }
}

/// Finitely supported vector over the countable basis.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<(BasisIndex, Coefficient)>", from = "Vec<(BasisIndex, Coefficient)>")]
pub struct StateVector {
    entries: BTreeMap<BasisIndex, Coefficient>,
}

impl From<StateVector> for Vec<(BasisIndex, Coefficient)> {
    fn from(s: StateVector) -> Self {
        s.entries.into_iter().collect()
    }
}

impl From<Vec<(BasisIndex, Coefficient)>> for StateVector {
    fn from(v: Vec<(BasisIndex, Coefficient)>) -> Self {
        StateVector::from_amplitudes(v)
    }
}

impl StateVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(i: BasisIndex) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(i, Coefficient::new(1.0, 0.0));
        StateVector { entries }
    }

    /// Sums repeated indices; drops negligible amplitudes.
    pub fn from_amplitudes<I: IntoIterator<Item = (BasisIndex, Coefficient)>>(amps: I) -> Self {
        let mut entries: BTreeMap<BasisIndex, Coefficient> = BTreeMap::new();
        for (i, c) in amps {
            *entries.entry(i).or_default() += c;
        }
        let mut s = StateVector { entries };
        s.prune();
        s
    }

    fn prune(&mut self) {
        self.entries.retain(|_, c| !is_negligible(*c));
    }

    pub fn get(&self, i: BasisIndex) -> Coefficient {
        self.entries.get(&i).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BasisIndex, Coefficient)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }

    pub fn support(&self) -> Vec<BasisIndex> {
        self.entries.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, factor: Coefficient) -> Self {
        StateVector::from_amplitudes(self.iter().map(|(i, c)| (i, c * factor)))
    }

    /// Unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > config::tolerance()).then(|| self.scale(Coefficient::new(1.0 / n, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= 1e3 * config::tolerance()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Coefficient {
        self.iter().map(|(i, c)| c.conj() * other.get(i)).sum()
    }

    pub fn max_index(&self) -> Option<BasisIndex> {
        self.entries.keys().next_back().copied()
    }
}
