//! Splits a canonical-basis-diagonal POVM into orthogonal projections `Z_e`
//! and the remainders `T_e` living on a common block `Z_ω`:
//! `P_e = Z_e + T_e`, `Σ_e T_e = Z_ω`, `Z_e Z_f = δ_ef Z_e` over `X ∪ {ω}`.

use std::collections::BTreeMap;

use crate::arith;
use crate::config;
use crate::error::{Error, Result};
use crate::instruments::{Outcome, Povm};
use crate::opalgebra::{Coefficient, DiagonalProfile, StructuredOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct PovmClassification {
    pub admits_repeatable_form: bool,
    /// `(Z_e, T_e)` per outcome.
    pub per_outcome: BTreeMap<Outcome, (StructuredOperator, StructuredOperator)>,
    pub z_omega: StructuredOperator,
}

fn one() -> Coefficient {
    Coefficient::new(1.0, 0.0)
}

pub fn classify_povm(povm: &Povm) -> Result<PovmClassification> {
    let identity = StructuredOperator::identity();
    if let Some(dev) = povm.sum().first_deviation(&identity)? {
        return Err(Error::InvalidPovm(dev));
    }

    let mut profiles = BTreeMap::new();
    let (mut bound, mut period) = (0u64, 1u64);
    for (e, p) in povm.iter() {
        let profile = p.diagonal_profile()?;
        if !StructuredOperator::from_diagonal_profile(&profile).equals(p)? {
            return Err(Error::UnsupportedForm(format!("effect {e} is not diagonal in the canonical basis")));
        }
        bound = bound.max(profile.bound);
        period = arith::lcm(period, profile.period)
            .filter(|&x| x <= config::period_cap())
            .ok_or(Error::PeriodCapExceeded { period: u128::MAX, cap: config::period_cap() })?;
        profiles.insert(e, profile);
    }

    // Per index: the unique outcome whose effect is 1 there while all others
    // vanish, or `None` for the shared block ω.
    let eps = config::tolerance();
    let owner = |i: u64| -> Option<Outcome> {
        let mut found = None;
        for (&e, profile) in &profiles {
            let d = profile.value(i);
            if (d - one()).norm() <= eps {
                if found.is_some() {
                    return None;
                }
                found = Some(e);
            } else if d.norm() > eps {
                return None;
            }
        }
        found
    };

    let mut per_outcome = BTreeMap::new();
    for (&e, profile) in &profiles {
        let z = DiagonalProfile::sample(bound, period, |i| {
            if owner(i) == Some(e) { one() } else { Coefficient::default() }
        });
        let t = DiagonalProfile::sample(bound, period, |i| {
            if owner(i).is_none() { profile.value(i) } else { Coefficient::default() }
        });
        per_outcome.insert(
            e,
            (StructuredOperator::from_diagonal_profile(&z), StructuredOperator::from_diagonal_profile(&t)),
        );
    }
    let omega = DiagonalProfile::sample(bound, period, |i| {
        if owner(i).is_none() { one() } else { Coefficient::default() }
    });
    let z_omega = StructuredOperator::from_diagonal_profile(&omega);

    let admits_repeatable_form = verify_form(povm, &per_outcome, &z_omega, &profiles, bound, period)?;
    Ok(PovmClassification { admits_repeatable_form, per_outcome, z_omega })
}

fn verify_form(
    povm: &Povm,
    parts: &BTreeMap<Outcome, (StructuredOperator, StructuredOperator)>,
    z_omega: &StructuredOperator,
    profiles: &BTreeMap<Outcome, DiagonalProfile>,
    bound: u64,
    period: u64,
) -> Result<bool> {
    let zero = StructuredOperator::zero();
    for (e, p) in povm.iter() {
        let (z, t) = &parts[&e];
        if !z.add(t).equals(p)? {
            return Ok(false);
        }
    }
    for (ze, _) in parts.values() {
        for (_, tf) in parts.values() {
            if !ze.compose(tf).equals(&zero)? || !tf.compose(ze).equals(&zero)? {
                return Ok(false);
            }
        }
    }
    // T_e ≥ 0: diagonal with real nonnegative entries.
    let eps = config::tolerance();
    for profile in profiles.values() {
        let nonnegative = |v: Coefficient| v.im.abs() <= eps && v.re >= -eps;
        let window = bound + period;
        if !(0..window).all(|i| nonnegative(profile.value(i))) {
            return Ok(false);
        }
    }
    let t_sum = parts.values().fold(StructuredOperator::zero(), |acc, (_, t)| acc.add(t));
    if !t_sum.equals(z_omega)? {
        return Ok(false);
    }
    let zs: Vec<&StructuredOperator> = parts.values().map(|(z, _)| z).chain([z_omega]).collect();
    for (a, za) in zs.iter().enumerate() {
        for (b, zb) in zs.iter().enumerate() {
            let target = if a == b { (*za).clone() } else { zero.clone() };
            if !za.compose(zb).equals(&target)? {
                return Ok(false);
            }
        }
    }
    let z_sum = zs.iter().fold(StructuredOperator::zero(), |acc, z| acc.add(z));
    z_sum.equals(&StructuredOperator::identity())
}
