//! Born-rule sampling, repeated-measurement trajectories and the dense
//! truncation used to cross-check the symbolic algebra.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. A trajectory
//! consumes one `f64` per step from that generator. Batched runs give
//! trajectory `t` its own stream: the same seed with `set_stream(t)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config;
use crate::error::{Error, Result};
use crate::instruments::{Instrument, Outcome};
use crate::opalgebra::{BasisIndex, Coefficient, StateVector, StructuredOperator, Term};
use crate::wold::{self, MemoryReading, WoldDecomposition};

/// A normalized state on `1..=min(8, max_index)` distinct basis indices
/// below `max_index`, with complex Gaussian amplitudes.
pub fn random_state(rng: &mut impl Rng, max_index: u64) -> StateVector {
    let max_index = max_index.max(1);
    let size = rng.random_range(1..=max_index.min(8)) as usize;
    let positions = index::sample(rng, max_index as usize, size);
    loop {
        let amps: Vec<(BasisIndex, Coefficient)> = positions
            .iter()
            .map(|i| (i as u64, Coefficient::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
            .collect();
        if let Some(psi) = StateVector::from_amplitudes(amps).normalized() {
            return psi;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Measurement {
    pub outcome: Outcome,
    /// `‖M_eψ‖²`.
    pub probability: f64,
    pub state: StateVector,
}

/// Outcome probabilities `‖M_eψ‖²` and unnormalized post-measurement states.
pub fn born_distribution(inst: &Instrument, psi: &StateVector) -> Vec<(Outcome, f64, StateVector)> {
    inst.iter()
        .map(|(e, m)| {
            let after = m.apply(psi);
            (e, after.norm_sq(), after)
        })
        .collect()
}

/// One measurement driven by `rng`: inverse CDF over outcomes in label
/// order, with the uniform draw scaled by the total probability.
pub fn measure_with(inst: &Instrument, psi: &StateVector, rng: &mut impl Rng) -> Result<Measurement> {
    let dist = born_distribution(inst, psi);
    let total: f64 = dist.iter().map(|(_, p, _)| p).sum();
    if total <= config::tolerance() {
        return Err(Error::DegenerateState);
    }
    let u = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (e, p, after) in dist {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        chosen = Some((e, p, after));
        if u < cumulative {
            break;
        }
    }
    let (outcome, probability, after) = chosen.ok_or(Error::DegenerateState)?;
    let state = after.normalized().ok_or(Error::DegenerateState)?;
    Ok(Measurement { outcome, probability, state })
}

pub fn measure_once(inst: &Instrument, psi: &StateVector, seed: u64) -> Result<Measurement> {
    measure_with(inst, psi, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Per-outcome Wold decompositions used to attach memory readings.
/// Outcomes whose operator does not decompose simply carry no reading.
#[derive(Clone, Debug, Default)]
pub struct MemoryModel {
    pub decompositions: BTreeMap<Outcome, WoldDecomposition>,
}

impl MemoryModel {
    pub fn for_instrument(inst: &Instrument) -> Self {
        let decompositions = inst
            .iter()
            .filter_map(|(e, m)| {
                let parts = wold::split(m).ok()?;
                let mut d = wold::wold_decompose(&parts.v).ok()?;
                d.outcome = Some(e);
                Some((e, d))
            })
            .collect();
        MemoryModel { decompositions }
    }

    pub fn read(&self, outcome: Outcome, psi: &StateVector) -> Option<MemoryReading> {
        wold::read_memory(self.decompositions.get(&outcome)?, psi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrajectoryStep {
    /// 1-based.
    pub step: usize,
    pub outcome: Outcome,
    pub probability: f64,
    pub post_state: StateVector,
    pub memory: Option<MemoryReading>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub initial_state: StateVector,
    pub steps: Vec<TrajectoryStep>,
}

impl TrajectoryRecord {
    pub fn outcomes(&self) -> Vec<Outcome> {
        self.steps.iter().map(|s| s.outcome).collect()
    }

    /// Single memory depth per step, where defined.
    pub fn depths(&self) -> Vec<Option<u64>> {
        self.steps.iter().map(|s| s.memory.as_ref().and_then(MemoryReading::depth)).collect()
    }
}

pub fn run_trajectory(inst: &Instrument, psi: &StateVector, steps: usize, seed: u64) -> Result<TrajectoryRecord> {
    run_trajectory_with(inst, &MemoryModel::for_instrument(inst), psi, steps, seed)
}

/// As [`run_trajectory`], reusing precomputed decompositions.
pub fn run_trajectory_with(
    inst: &Instrument,
    memory: &MemoryModel,
    psi: &StateVector,
    steps: usize,
    seed: u64,
) -> Result<TrajectoryRecord> {
    if steps == 0 {
        return Err(Error::ParameterOutOfRange("a trajectory needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = psi.clone();
    let mut record = TrajectoryRecord { seed, initial_state: psi.clone(), steps: Vec::with_capacity(steps) };
    for step in 1..=steps {
        let m = measure_with(inst, &state, &mut rng)?;
        let reading = memory.read(m.outcome, &m.state);
        record.steps.push(TrajectoryStep {
            step,
            outcome: m.outcome,
            probability: m.probability,
            post_state: m.state.clone(),
            memory: reading,
        });
        state = m.state;
    }
    Ok(record)
}

/// Two-step counts: how often each outcome came first, and each ordered
/// pair `(first, second)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConditionalCounts {
    pub trajectories: u64,
    pub first: BTreeMap<Outcome, u64>,
    pub pairs: BTreeMap<(Outcome, Outcome), u64>,
}

impl ConditionalCounts {
    pub fn count(&self, first: Outcome, second: Outcome) -> u64 {
        self.pairs.get(&(first, second)).copied().unwrap_or(0)
    }

    /// Frequency of `second` given `first`, or `None` if `first` never occurred.
    pub fn frequency(&self, first: Outcome, second: Outcome) -> Option<f64> {
        let n = *self.first.get(&first)?;
        Some(self.count(first, second) as f64 / n as f64)
    }

    pub fn first_frequency(&self, first: Outcome) -> f64 {
        self.first.get(&first).copied().unwrap_or(0) as f64 / self.trajectories as f64
    }
}

/// Runs `trajectories` two-step trajectories; trajectory `t` draws its
/// initial state and both measurements from stream `t` of `seed`.
pub fn empirical_conditionals(
    inst: &Instrument,
    mut sampler: impl FnMut(&mut ChaCha8Rng) -> StateVector,
    trajectories: u64,
    seed: u64,
) -> Result<ConditionalCounts> {
    if trajectories == 0 {
        return Err(Error::ParameterOutOfRange("need at least one trajectory".into()));
    }
    let mut counts = ConditionalCounts { trajectories, ..Default::default() };
    for t in 0..trajectories {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let psi = sampler(&mut rng);
        let first = measure_with(inst, &psi, &mut rng)?;
        let second = measure_with(inst, &first.state, &mut rng)?;
        *counts.first.entry(first.outcome).or_default() += 1;
        *counts.pairs.entry((first.outcome, second.outcome)).or_default() += 1;
    }
    Ok(counts)
}

/// Columns `[0, valid_input_dim)` of an operator, realized on rows `[0, dim)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TruncationWindow {
    pub dim: usize,
    pub valid_input_dim: usize,
}

impl TruncationWindow {
    pub fn new(dim: usize, valid_input_dim: usize) -> Result<Self> {
        if dim == 0 || valid_input_dim == 0 || valid_input_dim > dim {
            return Err(Error::ParameterOutOfRange(format!(
                "window needs 1 <= validInputDim ({valid_input_dim}) <= dim ({dim})"
            )));
        }
        Ok(TruncationWindow { dim, valid_input_dim })
    }

    /// `op` maps `span{|0⟩, …, |validInputDim−1⟩}` into the window.
    pub fn check(&self, op: &StructuredOperator) -> Result<()> {
        let needed = op.reach(self.valid_input_dim as u64);
        if needed > self.dim as u64 {
            return Err(Error::WindowInvalid { needed, dim: self.dim as u64 });
        }
        Ok(())
    }
}

/// Entrywise realization: every term contributes its coefficient at each
/// `(out, in)` it covers with both indices below `dim`.
pub fn dense_oracle(op: &StructuredOperator, window: TruncationWindow) -> Result<DMatrix<Coefficient>> {
    window.check(op)?;
    let dim = window.dim;
    let mut dense = DMatrix::zeros(dim, dim);
    for term in op.terms() {
        match term {
            Term::Dyad(d) => {
                if (d.out as usize) < dim && (d.input as usize) < dim {
                    dense[(d.out as usize, d.input as usize)] += d.coeff;
                }
            }
            Term::Family(f) => {
                let mut j = f.j_start;
                loop {
                    let input = f.in_stride * j + f.in_offset;
                    if input as usize >= dim {
                        break;
                    }
                    let out = f.out_stride * j + f.out_offset;
                    if (out as usize) < dim {
                        dense[(out as usize, input as usize)] += f.coeff;
                    }
                    j += 1;
                }
            }
        }
    }
    Ok(dense)
}
