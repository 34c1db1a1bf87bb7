//! Repeatability and orthogonality verdicts.
//!
//! The verdict uses two operator identities, decided exactly:
//! `M_e†M_eM_e = M_e` (the effect acts as the identity on the range of
//! `M_e`) and `M_fM_e = 0` for `e ≠ f`. Inclusion of the range in the support
//! and mutual orthogonality of ranges are necessary conditions only; they
//! are reported as diagnostics and never decide the verdict.

mod classify;
mod finite;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config;
use crate::error::Result;
use crate::instruments::{povm, Instrument, Outcome, Povm};
use crate::opalgebra::{Deviation, StateVector, StructuredOperator};
use crate::simulate::random_state;

pub use classify::{classify_povm, PovmClassification};
pub use finite::{
    dense_orthogonal, dense_repeatable, finite_dim_corollary_suite, random_projective_instrument,
    random_sqrt_instrument, CorollaryReport, DenseInstrument, FINITE_DIM_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeDiagnostics {
    pub isometric_on_range: bool,
    pub range_in_support: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairDiagnostics {
    pub first: Outcome,
    pub second: Outcome,
    /// `M_second · M_first = 0`.
    pub product_vanishes: bool,
    /// `M_second† · M_first = 0`.
    pub ranges_orthogonal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub condition: String,
    pub outcome: Option<Outcome>,
    pub other: Option<Outcome>,
    /// Columns `[0, window)` decide the identity.
    pub window: u64,
    pub deviation: Deviation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificationReport {
    pub complete: bool,
    pub repeatable: bool,
    pub orthogonal: bool,
    pub per_outcome: BTreeMap<Outcome, OutcomeDiagnostics>,
    pub per_pair: Vec<PairDiagnostics>,
    pub witnesses: Vec<Witness>,
}

fn compare(
    lhs: &StructuredOperator,
    rhs: &StructuredOperator,
    condition: &str,
    outcome: Option<Outcome>,
    other: Option<Outcome>,
    witnesses: &mut Vec<Witness>,
) -> Result<bool> {
    let (window, found) = lhs.deviations(rhs, 1)?;
    match found.into_iter().next() {
        None => Ok(true),
        Some(deviation) => {
            witnesses.push(Witness { condition: condition.to_string(), outcome, other, window, deviation });
            Ok(false)
        }
    }
}

pub fn certify_repeatable(inst: &Instrument) -> Result<CertificationReport> {
    let mut witnesses = Vec::new();
    let zero = StructuredOperator::zero();
    let complete = compare(
        &inst.effect_sum(),
        &StructuredOperator::identity(),
        "Σ M_e†M_e = I",
        None,
        None,
        &mut witnesses,
    )?;

    let mut per_outcome = BTreeMap::new();
    for (e, m) in inst.iter() {
        let m_dag = m.adjoint();
        let isometric_on_range = compare(
            &m_dag.compose(&m.compose(m)),
            m,
            "M_e†M_eM_e = M_e",
            Some(e),
            None,
            &mut witnesses,
        )?;
        let range_in_support = m.output_range()?.is_subset(&m.input_support()?)?;
        per_outcome.insert(e, OutcomeDiagnostics { isometric_on_range, range_in_support });
    }

    let mut per_pair = Vec::new();
    for (e, me) in inst.iter() {
        for (f, mf) in inst.iter() {
            if e == f {
                continue;
            }
            let product_vanishes = compare(&mf.compose(me), &zero, "M_fM_e = 0", Some(e), Some(f), &mut witnesses)?;
            let ranges_orthogonal = mf.adjoint().compose(me).is_zero()?;
            per_pair.push(PairDiagnostics { first: e, second: f, product_vanishes, ranges_orthogonal });
        }
    }

    let repeatable = complete
        && per_outcome.values().all(|d| d.isometric_on_range)
        && per_pair.iter().all(|d| d.product_vanishes);
    let orthogonal = check_orthogonal(&povm(inst))?;
    Ok(CertificationReport { complete, repeatable, orthogonal, per_outcome, per_pair, witnesses })
}

/// `P_eP_f = δ_ef P_f` for every pair of effects.
pub fn check_orthogonal(povm: &Povm) -> Result<bool> {
    for (e, pe) in povm.iter() {
        for (f, pf) in povm.iter() {
            let product = pe.compose(pf);
            let target = if e == f { pf.clone() } else { StructuredOperator::zero() };
            if !product.equals(&target)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Worst observed `|p(f|e) − δ_ef|` per ordered outcome pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumericalRepeatability {
    pub deviations: BTreeMap<(Outcome, Outcome), f64>,
    /// Number of (state, first outcome) pairs with nonzero probability.
    pub samples: usize,
}

impl NumericalRepeatability {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.values().copied().fold(0.0, f64::max)
    }

    /// The verdict at tolerance `tol`.
    pub fn repeatable(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

/// Estimates `p(f|e) = ‖M_fM_eψ‖² / ‖M_eψ‖²` over `trials` random states
/// supported below `max_index` (seeded `ChaCha8Rng`).
pub fn check_repeatability_numerical(
    inst: &Instrument,
    trials: usize,
    max_index: u64,
    seed: u64,
) -> NumericalRepeatability {
    check_repeatability_numerical_with(inst, trials, max_index, seed, &[])
}

/// As [`check_repeatability_numerical`], with `extra` states checked first.
pub fn check_repeatability_numerical_with(
    inst: &Instrument,
    trials: usize,
    max_index: u64,
    seed: u64,
    extra: &[StateVector],
) -> NumericalRepeatability {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = NumericalRepeatability::default();
    for (e, _) in inst.iter() {
        for (f, _) in inst.iter() {
            result.deviations.insert((e, f), 0.0);
        }
    }
    let random = (0..trials).map(|_| random_state(&mut rng, max_index));
    let states: Vec<StateVector> = extra.iter().cloned().chain(random).collect();
    let eps = config::tolerance();
    for psi in &states {
        for (e, me) in inst.iter() {
            let after = me.apply(psi);
            let weight = after.norm_sq();
            if weight.sqrt() <= eps {
                continue;
            }
            result.samples += 1;
            for (f, mf) in inst.iter() {
                let conditional = mf.apply(&after).norm_sq() / weight;
                let target = if e == f { 1.0 } else { 0.0 };
                let slot = result.deviations.get_mut(&(e, f)).expect("pair initialised");
                *slot = slot.max((conditional - target).abs());
            }
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexset::IndexSet;
    use crate::instruments::{build_example_family, build_nonrepeatable_sibling, build_orthogonal, make_instrument};
    use crate::opalgebra::Coefficient;

    fn parity() -> Instrument {
        build_orthogonal(&[IndexSet::progression(2, 0).unwrap(), IndexSet::progression(2, 1).unwrap()]).unwrap()
    }

    #[test]
    fn example_family_is_repeatable_not_orthogonal() {
        let report = certify_repeatable(&build_example_family(2, &[0.5, 0.5]).unwrap()).unwrap();
        assert!(report.complete);
        assert!(report.repeatable);
        assert!(!report.orthogonal);
        assert!(report.per_outcome.values().all(|d| d.isometric_on_range && d.range_in_support));
        assert!(report.per_pair.iter().all(|d| d.product_vanishes && d.ranges_orthogonal));
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn sibling_fails_with_witness() {
        let report = certify_repeatable(&build_nonrepeatable_sibling(2, &[0.5, 0.5]).unwrap()).unwrap();
        assert!(!report.repeatable);
        assert!(!report.orthogonal);
        let w = report
            .witnesses
            .iter()
            .find(|w| w.condition == "M_fM_e = 0" && w.outcome == Some(Outcome(1)) && w.other == Some(Outcome(2)))
            .expect("product witness");
        assert_eq!((w.deviation.row, w.deviation.col), (0, 0));
        assert!((w.deviation.value - Coefficient::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parity_is_repeatable_and_orthogonal() {
        let report = certify_repeatable(&parity()).unwrap();
        assert!(report.repeatable && report.orthogonal);
    }

    #[test]
    fn orthogonality_examples() {
        let ex = povm(&build_example_family(2, &[0.5, 0.5]).unwrap());
        assert!(!check_orthogonal(&ex).unwrap());
        let product = ex.get(Outcome(1)).unwrap().compose(ex.get(Outcome(2)).unwrap());
        assert!(product.equals(&StructuredOperator::dyad(Coefficient::new(0.25, 0.0), 0, 0)).unwrap());
        assert!(check_orthogonal(&povm(&parity())).unwrap());
        let binary = povm(&crate::instruments::build_binary_example(0.3, 0.6).unwrap());
        assert!(!check_orthogonal(&binary).unwrap());
        let product = binary.get(Outcome(1)).unwrap().compose(binary.get(Outcome(2)).unwrap());
        assert!((product.entry(0, 0).re - 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn numerical_check_examples() {
        let ex = build_example_family(2, &[0.5, 0.5]).unwrap();
        let num = check_repeatability_numerical(&ex, 100, 32, 7);
        assert!(num.max_deviation() < 1e-12);
        assert!(num.samples >= 100);

        let id = make_instrument(BTreeMap::from([(Outcome(1), StructuredOperator::identity())]), true).unwrap();
        assert_eq!(check_repeatability_numerical(&id, 20, 16, 1).max_deviation(), 0.0);

        let sib = build_nonrepeatable_sibling(2, &[0.5, 0.5]).unwrap();
        let num = check_repeatability_numerical_with(&sib, 0, 32, 3, &[StateVector::basis(0)]);
        assert!((num.deviations[&(Outcome(1), Outcome(2))] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn numerical_check_is_seeded() {
        let sib = build_nonrepeatable_sibling(3, &[0.2, 0.3, 0.5]).unwrap();
        let a = check_repeatability_numerical(&sib, 50, 24, 11);
        let b = check_repeatability_numerical(&sib, 50, 24, 11);
        assert_eq!(a, b);
    }
}
