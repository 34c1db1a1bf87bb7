//! Pure instruments: finitely many outcome-labelled contractions whose
//! effects `M_e†M_e` sum to the identity, plus builders for the standard
//! constructions.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certify;
use crate::config;
use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::opalgebra::{Coefficient, ShiftFamilyTerm, StructuredOperator};

/// Outcome label, 1-based by convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(pub u32);

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How the contraction bound of an operator was established.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContractionCheck {
    pub norm: f64,
    pub column: u64,
    /// True for monomial operators, where the largest column norm is the
    /// operator norm. Otherwise `norm` is the largest singular value of the
    /// deciding column window.
    pub exact: bool,
}

pub fn contraction_check(op: &StructuredOperator) -> Result<ContractionCheck> {
    let (norm, column) = op.max_column_norm()?;
    if op.is_monomial()? {
        return Ok(ContractionCheck { norm, column, exact: true });
    }
    let window = op.column_structure()?.window();
    let rows = op.reach(window) as usize;
    let mut dense = DMatrix::<Coefficient>::zeros(rows.max(1), window as usize);
    for c in 0..window {
        for (r, v) in op.column(c) {
            dense[(r as usize, c as usize)] = v;
        }
    }
    let sigma = dense
        .singular_values()
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    Ok(ContractionCheck { norm: sigma.max(norm), column, exact: false })
}

fn contraction_limit() -> f64 {
    1.0 + 1e3 * config::tolerance()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    entries: BTreeMap<Outcome, StructuredOperator>,
    verified: bool,
}

impl Instrument {
    /// Validates contractivity of every operator and, when
    /// `check_completeness` is set, that `Σ_e M_e†M_e = I`.
    pub fn new(entries: BTreeMap<Outcome, StructuredOperator>, check_completeness: bool) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInstrument);
        }
        for (outcome, op) in &entries {
            let check = contraction_check(op)?;
            if check.norm > contraction_limit() {
                return Err(Error::ContractionViolation { outcome: outcome.0, column: check.column, norm: check.norm });
            }
        }
        let inst = Instrument { entries, verified: false };
        if !check_completeness {
            return Ok(inst);
        }
        let sum = inst.effect_sum();
        let (window, witnesses) = sum.deviations(&StructuredOperator::identity(), 64)?;
        if !witnesses.is_empty() {
            return Err(Error::CompletenessViolation { window, witnesses });
        }
        Ok(Instrument { verified: true, ..inst })
    }

    /// `Σ_e M_e†M_e`.
    pub fn effect_sum(&self) -> StructuredOperator {
        self.entries
            .values()
            .fold(StructuredOperator::zero(), |acc, m| acc.add(&m.adjoint().compose(m)))
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn get(&self, outcome: Outcome) -> Option<&StructuredOperator> {
        self.entries.get(&outcome)
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, &StructuredOperator)> + '_ {
        self.entries.iter().map(|(&o, m)| (o, m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies `f` to every operator; the result is re-validated.
    pub fn map_operators(&self, mut f: impl FnMut(Outcome, &StructuredOperator) -> StructuredOperator) -> Result<Self> {
        let entries = self.iter().map(|(o, m)| (o, f(o, m))).collect();
        Instrument::new(entries, true)
    }

    /// Operator-level equality per outcome.
    pub fn equals(&self, other: &Instrument) -> Result<bool> {
        if self.entries.len() != other.entries.len() {
            return Ok(false);
        }
        for (o, m) in self.iter() {
            match other.get(o) {
                Some(n) if m.equals(n)? => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

pub fn make_instrument(entries: BTreeMap<Outcome, StructuredOperator>, check_completeness: bool) -> Result<Instrument> {
    Instrument::new(entries, check_completeness)
}

/// Effects `P_e = M_e†M_e`; each is positive by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    entries: BTreeMap<Outcome, StructuredOperator>,
}

impl Povm {
    /// Effects given directly. Only the identity-sum is checked; positivity
    /// is the caller's responsibility.
    pub fn from_effects(entries: BTreeMap<Outcome, StructuredOperator>) -> Result<Self> {
        let povm = Povm { entries };
        let sum = povm.sum();
        if let Some(dev) = sum.first_deviation(&StructuredOperator::identity())? {
            return Err(Error::InvalidPovm(dev));
        }
        Ok(povm)
    }

    pub fn get(&self, outcome: Outcome) -> Option<&StructuredOperator> {
        self.entries.get(&outcome)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, &StructuredOperator)> + '_ {
        self.entries.iter().map(|(&o, p)| (o, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> StructuredOperator {
        self.entries.values().fold(StructuredOperator::zero(), |acc, p| acc.add(p))
    }

    pub fn equals(&self, other: &Povm) -> Result<bool> {
        if self.entries.len() != other.entries.len() {
            return Ok(false);
        }
        for (o, p) in self.iter() {
            match other.get(o) {
                Some(q) if p.equals(q)? => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

pub fn povm(inst: &Instrument) -> Povm {
    Povm {
        entries: inst.iter().map(|(o, m)| (o, m.adjoint().compose(m))).collect(),
    }
}

fn real(x: f64) -> Coefficient {
    Coefficient::new(x, 0.0)
}

fn check_probabilities(n: usize, p: &[f64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::BadProbabilityVector("need at least one outcome".into()));
    }
    if p.len() != n {
        return Err(Error::BadProbabilityVector(format!("expected {n} probabilities, got {}", p.len())));
    }
    let eps = config::tolerance();
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < -eps || **x > 1.0 + eps) {
        return Err(Error::BadProbabilityVector(format!("entry {bad} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > eps {
        return Err(Error::BadProbabilityVector(format!("entries sum to {total}, not 1")));
    }
    Ok(p.iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

/// `M_l = √p_l|l⟩⟨0| + Σ_{j≥0} |n(j+1)+l⟩⟨nj+l|` for `l = 1..=n`: each
/// outcome owns one residue class of the positive integers and pushes it one
/// period up, while `|0⟩` is sent to the head of the class.
pub fn build_example_family(n: u32, p: &[f64]) -> Result<Instrument> {
    let p = check_probabilities(n as usize, p)?;
    let n64 = n as u64;
    let mut entries = BTreeMap::new();
    for l in 1..=n64 {
        let dyad = StructuredOperator::dyad(real(p[(l - 1) as usize].sqrt()), l, 0);
        let shift = StructuredOperator::family(ShiftFamilyTerm::new(real(1.0), n64, n64 + l, n64, l))?;
        entries.insert(Outcome(l as u32), dyad.add(&shift));
    }
    Instrument::new(entries, true)
}

/// `N_l = √p_l|0⟩⟨0| + Σ_{j≥0} |nj+l⟩⟨nj+l|`: same effects as
/// [`build_example_family`], but the state is left in place.
pub fn build_nonrepeatable_sibling(n: u32, p: &[f64]) -> Result<Instrument> {
    let p = check_probabilities(n as usize, p)?;
    let n64 = n as u64;
    let mut entries = BTreeMap::new();
    for l in 1..=n64 {
        let dyad = StructuredOperator::dyad(real(p[(l - 1) as usize].sqrt()), 0, 0);
        let diag = StructuredOperator::diagonal_family(real(1.0), n64, l);
        entries.insert(Outcome(l as u32), dyad.add(&diag));
    }
    Instrument::new(entries, true)
}

/// Two-outcome instrument whose defect parts `W_e` are not multiples of
/// partial isometries:
///
/// ```text
/// M1 = √p1|2⟩⟨0| + √p2|4⟩⟨1| + Σ_{n≥1} |2n+4⟩⟨2n|
/// M2 = √(1-p1)|3⟩⟨0| + √(1-p2)|5⟩⟨1| + Σ_{n≥1} |2n+5⟩⟨2n+1|
/// ```
pub fn build_binary_example(p1: f64, p2: f64) -> Result<Instrument> {
    for (name, x) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::ParameterOutOfRange(format!("{name} = {x} is outside [0, 1]")));
        }
    }
    let m1 = StructuredOperator::dyad(real(p1.sqrt()), 2, 0)
        .add(&StructuredOperator::dyad(real(p2.sqrt()), 4, 1))
        .add(&StructuredOperator::family(ShiftFamilyTerm::new(real(1.0), 2, 6, 2, 2))?);
    let m2 = StructuredOperator::dyad(real((1.0 - p1).sqrt()), 3, 0)
        .add(&StructuredOperator::dyad(real((1.0 - p2).sqrt()), 5, 1))
        .add(&StructuredOperator::family(ShiftFamilyTerm::new(real(1.0), 2, 7, 2, 3))?);
    let entries = BTreeMap::from([(Outcome(1), m1), (Outcome(2), m2)]);
    Instrument::new(entries, true)
}

/// Projective instrument `M_e = P_{S_e}` for a partition `S_1, …, S_k` of ℕ.
pub fn build_orthogonal(sets: &[IndexSet]) -> Result<Instrument> {
    let mut covered = IndexSet::empty();
    for (e, set) in sets.iter().enumerate() {
        if !covered.is_disjoint(set)? {
            let shared = covered.intersect(set)?;
            return Err(Error::CoverageViolation(format!("set {} overlaps earlier sets on {shared}", e + 1)));
        }
        covered = covered.union(set)?;
    }
    if !covered.is_all() {
        return Err(Error::CoverageViolation(format!("sets leave {} uncovered", covered.complement())));
    }
    let entries = sets
        .iter()
        .enumerate()
        .map(|(e, set)| (Outcome(e as u32 + 1), StructuredOperator::projector(set)))
        .collect();
    Instrument::new(entries, true)
}

/// Assembles `M_e = V_e + W_e` after checking every structural condition on
/// the isometric parts `V_e` and the defect parts `W_e`, then certifies the
/// result. The conditions are necessary; sufficiency is not assumed.
pub fn build_from_parts(parts: &BTreeMap<Outcome, (StructuredOperator, StructuredOperator)>) -> Result<Instrument> {
    let violation = |condition: &'static str, e: Outcome, f: Option<Outcome>, witness| Error::PartsViolation {
        condition,
        outcome: Some((e.0, f.map(|f| f.0))),
        witness,
    };
    let zero = StructuredOperator::zero();
    for (&e, (v, w)) in parts {
        let gram = v.adjoint().compose(v);
        if let Some(dev) = gram.compose(&gram).first_deviation(&gram)? {
            return Err(violation("V†V is a projector", e, None, Some(dev)));
        }
        if let Some(dev) = w.adjoint().compose(v).first_deviation(&zero)? {
            return Err(violation("W†V = 0", e, None, Some(dev)));
        }
        if let Some(dev) = v.adjoint().compose(w).first_deviation(&zero)? {
            return Err(violation("V†W = 0", e, None, Some(dev)));
        }
        let m = v.add(w);
        if !w.output_range()?.is_subset(&m.output_range()?)? {
            return Err(violation("Rng(W) ⊆ Rng(M)", e, None, None));
        }
    }
    for (&e, (ve, we)) in parts {
        for (&f, (vf, wf)) in parts {
            if e == f {
                continue;
            }
            if let Some(dev) = vf.adjoint().compose(ve).first_deviation(&zero)? {
                return Err(violation("V_f†V_e = 0", e, Some(f), Some(dev)));
            }
            if let Some(dev) = wf.adjoint().compose(we).first_deviation(&zero)? {
                return Err(violation("W_f†W_e = 0", e, Some(f), Some(dev)));
            }
        }
    }
    let total = parts.values().fold(StructuredOperator::zero(), |acc, (v, w)| {
        acc.add(&v.adjoint().compose(v)).add(&w.adjoint().compose(w))
    });
    if let Some(dev) = total.first_deviation(&StructuredOperator::identity())? {
        return Err(Error::PartsViolation { condition: "Σ(V†V + W†W) = I", outcome: None, witness: Some(dev) });
    }
    let entries = parts.iter().map(|(&e, (v, w))| (e, v.add(w))).collect();
    let inst = Instrument::new(entries, true)?;
    let report = certify::certify_repeatable(&inst)?;
    if !report.repeatable {
        return Err(Error::PartsViolation {
            condition: "assembled instrument is repeatable",
            outcome: None,
            witness: report.witnesses.first().map(|w| w.deviation),
        });
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::StateVector;

    fn fam(os: u64, oo: u64, is: u64, io: u64) -> StructuredOperator {
        StructuredOperator::family(ShiftFamilyTerm::new(real(1.0), os, oo, is, io)).unwrap()
    }

    #[test]
    fn example_family_n2() {
        let inst = build_example_family(2, &[0.5, 0.5]).unwrap();
        assert!(inst.is_verified());
        let m1 = StructuredOperator::dyad(real(0.5f64.sqrt()), 1, 0).add(&fam(2, 3, 2, 1));
        assert!(inst.get(Outcome(1)).unwrap().equals(&m1).unwrap());
    }

    #[test]
    fn example_family_n1_is_a_pure_shift() {
        let inst = build_example_family(1, &[1.0]).unwrap();
        assert_eq!(inst.len(), 1);
        let expected = StructuredOperator::dyad(real(1.0), 1, 0).add(&fam(1, 2, 1, 1));
        assert!(inst.get(Outcome(1)).unwrap().equals(&expected).unwrap());
        assert!(inst.get(Outcome(1)).unwrap().equals(&fam(1, 1, 1, 0)).unwrap());
    }

    #[test]
    fn example_family_drops_zero_dyads() {
        let inst = build_example_family(3, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inst.get(Outcome(2)).unwrap().dyad_count(), 0);
        assert_eq!(inst.get(Outcome(3)).unwrap().dyad_count(), 0);
        assert_eq!(inst.get(Outcome(1)).unwrap().dyad_count(), 1);
    }

    #[test]
    fn bad_probability_vectors() {
        assert!(matches!(build_example_family(2, &[0.5, 0.6]), Err(Error::BadProbabilityVector(_))));
        assert!(matches!(build_example_family(2, &[1.0]), Err(Error::BadProbabilityVector(_))));
        assert!(matches!(build_example_family(0, &[]), Err(Error::BadProbabilityVector(_))));
        assert!(matches!(build_nonrepeatable_sibling(2, &[1.5, -0.5]), Err(Error::BadProbabilityVector(_))));
    }

    #[test]
    fn single_identity_entry_is_valid() {
        let inst = make_instrument(BTreeMap::from([(Outcome(1), StructuredOperator::identity())]), true).unwrap();
        assert!(inst.is_verified());
    }

    #[test]
    fn empty_instrument_rejected() {
        assert_eq!(make_instrument(BTreeMap::new(), true), Err(Error::EmptyInstrument));
    }

    #[test]
    fn missing_outcome_is_incomplete() {
        let full = build_example_family(2, &[0.5, 0.5]).unwrap();
        let only_m1 = BTreeMap::from([(Outcome(1), full.get(Outcome(1)).unwrap().clone())]);
        match make_instrument(only_m1, true) {
            Err(Error::CompletenessViolation { witnesses, .. }) => {
                assert!(witnesses.iter().any(|d| d.row == 2 && d.col == 2 && (d.magnitude - 1.0).abs() < 1e-12));
                assert!(witnesses.iter().any(|d| d.row == 0 && d.col == 0));
            }
            other => panic!("expected completeness violation, got {other:?}"),
        }
        // Deferred checking accepts it but leaves it unverified.
        let only_m1 = BTreeMap::from([(Outcome(1), full.get(Outcome(1)).unwrap().clone())]);
        assert!(!make_instrument(only_m1, false).unwrap().is_verified());
    }

    #[test]
    fn contraction_violation() {
        let big = StructuredOperator::dyad(real(1.5), 0, 0);
        let err = make_instrument(BTreeMap::from([(Outcome(1), big)]), false).unwrap_err();
        assert!(matches!(err, Error::ContractionViolation { outcome: 1, column: 0, .. }));
        // Non-monomial: two unit entries in one column, norm √2.
        let wide = StructuredOperator::dyad(real(1.0), 0, 0).add(&StructuredOperator::dyad(real(1.0), 1, 0));
        let check = contraction_check(&wide).unwrap();
        assert!(!check.exact);
        assert!((check.norm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sibling_shares_the_povm() {
        let m = build_example_family(2, &[0.5, 0.5]).unwrap();
        let n = build_nonrepeatable_sibling(2, &[0.5, 0.5]).unwrap();
        assert!(povm(&m).equals(&povm(&n)).unwrap());
    }

    #[test]
    fn sibling_conditional_probability() {
        let n = build_nonrepeatable_sibling(2, &[0.5, 0.5]).unwrap();
        let psi = StateVector::basis(0);
        let after1 = n.get(Outcome(1)).unwrap().apply(&psi);
        let after21 = n.get(Outcome(2)).unwrap().apply(&after1);
        assert!((after21.norm_sq() / after1.norm_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sibling_single_outcome_is_identity() {
        let n = build_nonrepeatable_sibling(1, &[1.0]).unwrap();
        assert!(n.get(Outcome(1)).unwrap().equals(&StructuredOperator::identity()).unwrap());
    }

    #[test]
    fn binary_example_defect_parts() {
        let (p1, p2) = (0.3, 0.8);
        let inst = build_binary_example(p1, p2).unwrap();
        let defect = |o: u32| {
            let m = inst.get(Outcome(o)).unwrap();
            m.restrict_columns(&IndexSet::finite([0, 1]))
        };
        let w1 = defect(1);
        let w2 = defect(2);
        let g1 = w1.adjoint().compose(&w1);
        let g2 = w2.adjoint().compose(&w2);
        let expect1 = StructuredOperator::dyad(real(p1), 0, 0).add(&StructuredOperator::dyad(real(p2), 1, 1));
        let expect2 =
            StructuredOperator::dyad(real(1.0 - p1), 0, 0).add(&StructuredOperator::dyad(real(1.0 - p2), 1, 1));
        assert!(g1.equals(&expect1).unwrap());
        assert!(g2.equals(&expect2).unwrap());
        let pk = StructuredOperator::projector(&IndexSet::finite([0, 1]));
        assert!(g1.add(&g2).equals(&pk).unwrap());
    }

    #[test]
    fn binary_example_certain_outcome() {
        let inst = build_binary_example(1.0, 1.0).unwrap();
        let m2 = inst.get(Outcome(2)).unwrap();
        assert_eq!(m2.dyad_count(), 0);
        for i in [0, 1] {
            assert!(m2.apply(&StateVector::basis(i)).is_zero());
        }
        assert!(build_binary_example(1.2, 0.0).is_err());
    }

    #[test]
    fn orthogonal_builds() {
        let evens = IndexSet::progression(2, 0).unwrap();
        let odds = IndexSet::progression(2, 1).unwrap();
        let parity = build_orthogonal(&[evens.clone(), odds]).unwrap();
        assert_eq!(parity.len(), 2);
        let id = build_orthogonal(&[IndexSet::all()]).unwrap();
        assert!(id.get(Outcome(1)).unwrap().equals(&StructuredOperator::identity()).unwrap());
        let split = build_orthogonal(&[IndexSet::finite([0]), IndexSet::from_start(1)]).unwrap();
        assert_eq!(split.get(Outcome(1)).unwrap().output_range().unwrap(), IndexSet::finite([0]));
        assert!(matches!(build_orthogonal(std::slice::from_ref(&evens)), Err(Error::CoverageViolation(_))));
        assert!(matches!(build_orthogonal(&[evens, IndexSet::all()]), Err(Error::CoverageViolation(_))));
    }

    #[test]
    fn parts_reconstruct_the_examples() {
        let p: [f64; 2] = [0.4, 0.6];
        let mut parts = BTreeMap::new();
        for l in 1..=2u64 {
            let v = fam(2, 2 + l, 2, l);
            let w = StructuredOperator::dyad(real(p[(l - 1) as usize].sqrt()), l, 0);
            parts.insert(Outcome(l as u32), (v, w));
        }
        let built = build_from_parts(&parts).unwrap();
        assert!(built.equals(&build_example_family(2, &p).unwrap()).unwrap());

        let (p1, p2): (f64, f64) = (0.25, 0.9);
        let mut parts = BTreeMap::new();
        parts.insert(
            Outcome(1),
            (
                fam(2, 6, 2, 2),
                StructuredOperator::dyad(real(p1.sqrt()), 2, 0).add(&StructuredOperator::dyad(real(p2.sqrt()), 4, 1)),
            ),
        );
        parts.insert(
            Outcome(2),
            (
                fam(2, 7, 2, 3),
                StructuredOperator::dyad(real((1.0 - p1).sqrt()), 3, 0)
                    .add(&StructuredOperator::dyad(real((1.0 - p2).sqrt()), 5, 1)),
            ),
        );
        let built = build_from_parts(&parts).unwrap();
        assert!(built.equals(&build_binary_example(p1, p2).unwrap()).unwrap());
    }

    #[test]
    fn parts_without_defects_are_orthogonal() {
        let evens = StructuredOperator::diagonal_family(real(1.0), 2, 0);
        let odds = StructuredOperator::diagonal_family(real(1.0), 2, 1);
        let parts = BTreeMap::from([
            (Outcome(1), (evens, StructuredOperator::zero())),
            (Outcome(2), (odds, StructuredOperator::zero())),
        ]);
        let inst = build_from_parts(&parts).unwrap();
        assert!(certify::check_orthogonal(&povm(&inst)).unwrap());
    }

    #[test]
    fn parts_violations_are_named() {
        // V not a partial isometry.
        let parts = BTreeMap::from([(
            Outcome(1),
            (StructuredOperator::diagonal_family(real(0.5), 1, 0), StructuredOperator::zero()),
        )]);
        assert!(matches!(
            build_from_parts(&parts),
            Err(Error::PartsViolation { condition: "V†V is a projector", .. })
        ));
        // Overlapping isometric parts.
        let parts = BTreeMap::from([
            (Outcome(1), (StructuredOperator::identity(), StructuredOperator::zero())),
            (Outcome(2), (StructuredOperator::dyad(real(1.0), 0, 0), StructuredOperator::zero())),
        ]);
        assert!(matches!(build_from_parts(&parts), Err(Error::PartsViolation { condition: "V_f†V_e = 0", .. })));
        // Cross term: W lands on the range of V.
        let parts = BTreeMap::from([(
            Outcome(1),
            (StructuredOperator::dyad(real(1.0), 0, 0), StructuredOperator::dyad(real(0.5), 0, 1)),
        )]);
        assert!(matches!(build_from_parts(&parts), Err(Error::PartsViolation { condition: "W†V = 0", .. })));
    }

    #[test]
    fn povm_examples() {
        let inst = build_example_family(2, &[0.5, 0.5]).unwrap();
        let effects = povm(&inst);
        let p1 = StructuredOperator::dyad(real(0.5), 0, 0).add(&StructuredOperator::diagonal_family(real(1.0), 2, 1));
        assert!(effects.get(Outcome(1)).unwrap().equals(&p1).unwrap());

        let id = make_instrument(BTreeMap::from([(Outcome(1), StructuredOperator::identity())]), true).unwrap();
        assert!(povm(&id).get(Outcome(1)).unwrap().equals(&StructuredOperator::identity()).unwrap());

        let (p1v, p2v) = (0.3, 0.7);
        let bin = povm(&build_binary_example(p1v, p2v).unwrap());
        let expect = StructuredOperator::dyad(real(p1v), 0, 0)
            .add(&StructuredOperator::dyad(real(p2v), 1, 1))
            .add(&StructuredOperator::diagonal_family(real(1.0), 2, 2));
        assert!(bin.get(Outcome(1)).unwrap().equals(&expect).unwrap());
    }
}
