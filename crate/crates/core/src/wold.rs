//! Splitting a monomial Kraus operator into its isometric part on the range
//! and its defect part, and the Wold decomposition of the isometric part
//! into a unitary piece and unilateral shifts.
//!
//! Orbits are read off the index map `σ` of a monomial partial isometry
//! `V`: column `i` goes to row `σ(i)`. Walking `σ` backwards from an index
//! ends at a generator (an index in `Supp(V) ∖ Rng(V)`), returns to the start
//! (a finite cycle) or never ends (a bilateral orbit). Depth is the number of
//! backward steps to the generator, so the generator itself has depth 0.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::config;
use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::instruments::Outcome;
use crate::opalgebra::{BasisIndex, StateVector, StructuredOperator};

/// Backward walks longer than this are taken to lie on a bilateral orbit.
/// The exact verification of the decomposition catches a wrong guess.
const WALK_BUDGET: u64 = 100_000;

/// `M = V + W` with `V` the columns of `M` indexed by `Rng(M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitParts {
    pub v: StructuredOperator,
    pub w: StructuredOperator,
}

fn split_violation(what: &str, op: &StructuredOperator, target: &StructuredOperator) -> Result<Option<Error>> {
    Ok(op.first_deviation(target)?.map(|d| {
        Error::SplitInvariantViolation(format!("{what} fails at ({}, {}) by {:.3e}", d.row, d.col, d.magnitude))
    }))
}

pub fn split(m: &StructuredOperator) -> Result<SplitParts> {
    if !m.is_monomial()? {
        return Err(Error::UnsupportedForm("split needs at most one nonzero entry per column".into()));
    }
    let range = m.output_range()?;
    let support = m.input_support()?;
    let v = m.restrict_columns(&range);
    let w = m.restrict_columns(&support.difference(&range)?);

    let zero = StructuredOperator::zero();
    let gram = v.adjoint().compose(&v);
    let checks = [
        ("M = V + W", v.add(&w), m.clone()),
        ("V†V is a projector", gram.compose(&gram), gram.clone()),
        ("V†W = 0", v.adjoint().compose(&w), zero.clone()),
        ("W†V = 0", w.adjoint().compose(&v), zero),
    ];
    for (what, lhs, rhs) in &checks {
        if let Some(err) = split_violation(what, lhs, rhs)? {
            return Err(err);
        }
    }
    Ok(SplitParts { v, w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Walk {
    Shift { generator: BasisIndex, depth: u64 },
    Cycle,
    Bilateral,
    Outside,
}

/// A shift orbit, named by its generator, with its first few indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShiftOrbit {
    pub generator: BasisIndex,
    pub prefix: Vec<BasisIndex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WoldDecomposition {
    /// Set when the decomposition belongs to an instrument outcome.
    pub outcome: Option<Outcome>,
    /// Orbits are listed for indices below this bound.
    pub window: u64,
    pub generators: IndexSet,
    pub shift_domain: IndexSet,
    pub unitary_domain: IndexSet,
    pub shift_orbits: Vec<ShiftOrbit>,
    /// Finite cycles meeting the window, each starting at its smallest index.
    pub cycles: Vec<Vec<BasisIndex>>,
    /// Window indices on generator-free infinite orbits.
    pub bilateral: Vec<BasisIndex>,
    pub u: StructuredOperator,
    pub s: StructuredOperator,
    s_adjoint: StructuredOperator,
}

struct Walker<'a> {
    v: &'a StructuredOperator,
    v_adjoint: StructuredOperator,
    generators: &'a IndexSet,
    cache: RefCell<HashMap<BasisIndex, Walk>>,
}

impl Walker<'_> {
    fn preimage(&self, i: BasisIndex) -> Option<BasisIndex> {
        self.v_adjoint.column(i).keys().next().copied()
    }

    fn image(&self, i: BasisIndex) -> Option<BasisIndex> {
        self.v.column(i).keys().next().copied()
    }

    fn walk(&self, start: BasisIndex) -> Walk {
        if let Some(&w) = self.cache.borrow().get(&start) {
            return w;
        }
        let result = self.walk_uncached(start);
        self.cache.borrow_mut().insert(start, result);
        result
    }

    fn walk_uncached(&self, start: BasisIndex) -> Walk {
        if self.image(start).is_none() {
            return Walk::Outside;
        }
        let mut cur = start;
        for depth in 0..WALK_BUDGET {
            if self.generators.member(cur) {
                return Walk::Shift { generator: cur, depth };
            }
            match self.preimage(cur) {
                Some(prev) if prev == start => return Walk::Cycle,
                Some(prev) => cur = prev,
                None => return Walk::Outside,
            }
        }
        Walk::Bilateral
    }

    fn cycle(&self, start: BasisIndex) -> Vec<BasisIndex> {
        let mut cycle = vec![start];
        let mut cur = start;
        while let Some(next) = self.image(cur) {
            if next == start {
                break;
            }
            cycle.push(next);
            cur = next;
        }
        let pivot = cycle.iter().enumerate().min_by_key(|(_, &x)| x).map_or(0, |(k, _)| k);
        cycle.rotate_left(pivot);
        cycle
    }

    fn forward(&self, start: BasisIndex, len: usize) -> Vec<BasisIndex> {
        let mut out = vec![start];
        while out.len() < len {
            match self.image(*out.last().expect("non-empty")) {
                Some(next) => out.push(next),
                None => break,
            }
        }
        out
    }
}

fn unimodular_tolerance() -> f64 {
    1e3 * config::tolerance()
}

pub fn wold_decompose(v: &StructuredOperator) -> Result<WoldDecomposition> {
    if !v.is_monomial()? {
        return Err(Error::UnsupportedForm("Wold decomposition needs a monomial operator".into()));
    }
    let structure = v.column_structure()?;
    for column in 0..structure.window() {
        if let Some((_, a)) = v.column(column).into_iter().next() {
            if (a.norm() - 1.0).abs() > unimodular_tolerance() {
                return Err(Error::NotIsometricOnSupport { column, amplitude: a.norm() });
            }
        }
    }
    let support = v.input_support()?;
    let range = v.output_range()?;
    // Unimodular columns still fail to be isometric if two of them share a row.
    if let Some(d) = v.adjoint().compose(v).first_deviation(&StructuredOperator::projector(&support))? {
        return Err(Error::NotIsometricOnSupport { column: d.col, amplitude: v.column(d.col).values().map(|a| a.norm()).sum() });
    }
    if let Some(index) = range.difference(&support)?.min() {
        return Err(Error::RangeEscapesSupport { index });
    }
    let generators = support.difference(&range)?;
    let walker = Walker { v, v_adjoint: v.adjoint(), generators: &generators, cache: RefCell::default() };

    let (shift_domain, unitary_domain, u, s) = extrapolate(v, &walker, &support, &generators, structure.horizon, structure.period)?;

    let window = structure.window();
    let mut shift_orbits = Vec::new();
    let mut cycles: Vec<Vec<BasisIndex>> = Vec::new();
    let mut bilateral = Vec::new();
    for i in 0..window {
        match walker.walk(i) {
            Walk::Shift { depth: 0, .. } => {
                shift_orbits.push(ShiftOrbit { generator: i, prefix: walker.forward(i, 6) });
            }
            Walk::Cycle => {
                let cycle = walker.cycle(i);
                if !cycles.contains(&cycle) {
                    cycles.push(cycle);
                }
            }
            Walk::Bilateral => bilateral.push(i),
            _ => {}
        }
    }

    Ok(WoldDecomposition {
        outcome: None,
        window,
        generators,
        shift_domain,
        unitary_domain,
        shift_orbits,
        cycles,
        bilateral,
        s_adjoint: s.adjoint(),
        u,
        s,
    })
}

type Domains = (IndexSet, IndexSet, StructuredOperator, StructuredOperator);

/// Samples the shift/unitary classification below a bound and over one
/// period, extends it periodically, and keeps the first candidate whose
/// pieces satisfy the decomposition identities exactly.
fn extrapolate(
    v: &StructuredOperator,
    walker: &Walker<'_>,
    support: &IndexSet,
    generators: &IndexSet,
    horizon: u64,
    period: u64,
) -> Result<Domains> {
    let cap = config::period_cap();
    for bound in [horizon, 2 * horizon + 1, 4 * horizon + 3] {
        for m in [1u64, 2, 3, 4, 6, 8, 12] {
            let Some(q) = period.checked_mul(m).filter(|&q| q <= cap) else { continue };
            let in_shift = |i| matches!(walker.walk(i), Walk::Shift { .. });
            let shift_domain = IndexSet::from_predicate(bound, q, in_shift)?.intersect(support)?;
            let unitary_domain = support.difference(&shift_domain)?;
            let u = v.restrict_columns(&unitary_domain);
            let s = v.restrict_columns(&shift_domain);
            if verify(v, &u, &s, &shift_domain, &unitary_domain, generators)? {
                return Ok((shift_domain, unitary_domain, u, s));
            }
        }
    }
    Err(Error::OrbitUndetermined(format!(
        "no periodic shift/unitary split of the support {support} passed verification"
    )))
}

fn verify(
    v: &StructuredOperator,
    u: &StructuredOperator,
    s: &StructuredOperator,
    shift_domain: &IndexSet,
    unitary_domain: &IndexSet,
    generators: &IndexSet,
) -> Result<bool> {
    if !generators.is_subset(shift_domain)? {
        return Ok(false);
    }
    let pu = StructuredOperator::projector(unitary_domain);
    let ps = StructuredOperator::projector(shift_domain);
    let shift_range = StructuredOperator::projector(&shift_domain.difference(generators)?);
    Ok(u.add(s).equals(v)?
        && u.adjoint().compose(u).equals(&pu)?
        && u.compose(&u.adjoint()).equals(&pu)?
        && s.adjoint().compose(s).equals(&ps)?
        && s.compose(&s.adjoint()).equals(&shift_range)?)
}

impl WoldDecomposition {
    /// Generator and depth of a shift-domain index.
    pub fn locate(&self, index: BasisIndex) -> Option<(BasisIndex, u64)> {
        if !self.shift_domain.member(index) {
            return None;
        }
        let mut cur = index;
        let mut depth = 0;
        loop {
            if self.generators.member(cur) {
                return Some((cur, depth));
            }
            cur = *self.s_adjoint.column(cur).keys().next()?;
            depth += 1;
        }
    }
}

/// Shift-orbit position of a state: the orbit (named by its generator) and
/// the probability of each depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MemoryReading {
    pub outcome: Option<Outcome>,
    pub orbit_id: BasisIndex,
    pub distribution: BTreeMap<u64, f64>,
}

impl MemoryReading {
    /// The depth when the state sits at a single one.
    pub fn depth(&self) -> Option<u64> {
        match self.distribution.len() {
            1 => self.distribution.keys().next().copied(),
            _ => None,
        }
    }
}

/// `None` when `psi` is zero, meets the unitary part or the complement of
/// `Supp(V)`, or spreads over several shift orbits.
pub fn read_memory(decomp: &WoldDecomposition, psi: &StateVector) -> Option<MemoryReading> {
    let total = psi.norm_sq();
    if total == 0.0 {
        return None;
    }
    let mut orbit = None;
    let mut distribution = BTreeMap::new();
    for (i, amp) in psi.iter() {
        let (generator, depth) = decomp.locate(i)?;
        if *orbit.get_or_insert(generator) != generator {
            return None;
        }
        *distribution.entry(depth).or_insert(0.0) += amp.norm_sqr() / total;
    }
    Some(MemoryReading { outcome: decomp.outcome, orbit_id: orbit?, distribution })
}
