//! Eavesdropper strategies and the basis-information leakage estimator.
//!
//! Coherent attacks enter only through their classicalized form: a
//! probability distribution over Pauli error patterns, since the
//! protocol's checking statistics depend on nothing else. The correlated
//! variant draws one Pauli per basis-sequence position and repeats it
//! across all rounds, which leaves the mean error rate unchanged but
//! inflates the estimator's variance; it is the designated worst case for
//! the deviation experiments.
//!
//! Attack randomness is keyed by slot identity (position, round), never by
//! arrival order, and comes from a stream separate from the honest
//! parties', so enabling an attack does not perturb Alice's or Bob's draws.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2codes::BitVector;
use crate::qcore::{Basis, Pauli, QubitState};
use crate::rng;

/// How an intercept-resend attacker picks her measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisPolicy {
    AlwaysZ,
    AlwaysX,
    UniformRandom,
}

/// A probability distribution over the four Paulis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliProbs {
    i: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl PauliProbs {
    /// Validates non-negativity and normalization within 1e-9.
    pub fn new(i: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        for (name, p) in [("I", i), ("X", x), ("Y", y), ("Z", z)] {
            if p < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "negative probability {p} for {name}"
                )));
            }
        }
        let sum = i + x + y + z;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbability(format!(
                "Pauli probabilities sum to {sum}"
            )));
        }
        Ok(Self { i, x, y, z })
    }

    pub fn identity() -> Self {
        Self {
            i: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn get(&self, p: Pauli) -> f64 {
        match p {
            Pauli::I => self.i,
            Pauli::X => self.x,
            Pauli::Y => self.y,
            Pauli::Z => self.z,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for p in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            acc += self.get(p);
            if u < acc {
                return p;
            }
        }
        Pauli::Z
    }

    /// Marginal per-slot bit-error probability this channel induces when
    /// bases are uniform: sum of p_k times the per-Pauli error rate.
    pub fn marginal_error_rate(&self) -> f64 {
        Pauli::ALL
            .iter()
            .map(|&p| self.get(p) * crate::qcore::expected_error_rate(p))
            .sum()
    }
}

/// Eavesdropping strategy for a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackStrategy {
    /// Eve does nothing.
    NoAttack,
    /// Eve measures each transiting qubit in a policy-chosen basis and
    /// forwards the collapsed state.
    InterceptResend(BasisPolicy),
    /// One Pauli sampled independently per slot.
    PauliChannel(PauliProbs),
    /// One Pauli sampled per basis-sequence position, applied identically
    /// to all rounds at that position.
    CorrelatedPauli(PauliProbs),
    /// Eve measures every qubit in a fixed basis, records the outcome and
    /// forwards the collapsed state; inference happens after the session.
    BasisLearner(Basis),
}

impl AttackStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            AttackStrategy::NoAttack => "none",
            AttackStrategy::InterceptResend(_) => "intercept-resend",
            AttackStrategy::PauliChannel(_) => "pauli-channel",
            AttackStrategy::CorrelatedPauli(_) => "correlated-pauli",
            AttackStrategy::BasisLearner(_) => "basis-learner",
        }
    }
}

/// Identity of a transmission slot: basis-sequence position and round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotId {
    pub position: u32,
    pub round: u32,
}

impl SlotId {
    fn key(&self) -> u64 {
        (u64::from(self.round) << 32) | u64::from(self.position)
    }
}

/// What Eve saw or did at one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotObservation {
    pub position: u32,
    pub round: u32,
    pub measured_bit: Option<bool>,
    pub applied_pauli: Option<Pauli>,
    pub eve_basis: Option<Basis>,
}

/// Eve's per-session record: slot observations plus a per-position
/// posterior for "this position uses the X basis" (0.5 = uninformative;
/// see [`infer_basis_posterior`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    pub strategy: String,
    pub observations: Vec<SlotObservation>,
    pub basis_posterior: Vec<f64>,
}

impl EveRecord {
    pub fn empty(strategy: &AttackStrategy) -> Self {
        Self {
            strategy: strategy.label().to_string(),
            observations: Vec::new(),
            basis_posterior: Vec::new(),
        }
    }
}

/// Applies an attack to the in-flight qubits. Must run strictly before any
/// public announcement exists; the protocol enforces that ordering by
/// construction. Randomness is drawn from per-slot streams derived from
/// `eve_seed` and the slot identity, so the result is invariant under slot
/// reordering for the per-slot-independent strategies.
pub fn apply_attack(
    strategy: &AttackStrategy,
    slots: &[(SlotId, QubitState)],
    eve_seed: u64,
) -> Result<(Vec<QubitState>, EveRecord)> {
    match strategy {
        AttackStrategy::NoAttack => Ok((
            slots.iter().map(|&(_, s)| s).collect(),
            EveRecord::empty(strategy),
        )),
        AttackStrategy::InterceptResend(policy) => {
            let mut out = Vec::with_capacity(slots.len());
            let mut observations = Vec::with_capacity(slots.len());
            for &(id, state) in slots {
                let mut slot_rng = rng::indexed_stream(eve_seed, "eve.slot", id.key());
                let basis = match policy {
                    BasisPolicy::AlwaysZ => Basis::Z,
                    BasisPolicy::AlwaysX => Basis::X,
                    BasisPolicy::UniformRandom => Basis::from_bit(slot_rng.gen()),
                };
                let (bit, collapsed) = state.measure(basis, &mut slot_rng);
                out.push(collapsed);
                observations.push(SlotObservation {
                    position: id.position,
                    round: id.round,
                    measured_bit: Some(bit),
                    applied_pauli: None,
                    eve_basis: Some(basis),
                });
            }
            Ok((out, record(strategy, observations, slots)))
        }
        AttackStrategy::PauliChannel(probs) => {
            let mut out = Vec::with_capacity(slots.len());
            let mut observations = Vec::with_capacity(slots.len());
            for &(id, state) in slots {
                let mut slot_rng = rng::indexed_stream(eve_seed, "eve.slot", id.key());
                let pauli = probs.sample(&mut slot_rng);
                out.push(state.apply_pauli(pauli));
                observations.push(SlotObservation {
                    position: id.position,
                    round: id.round,
                    measured_bit: None,
                    applied_pauli: Some(pauli),
                    eve_basis: None,
                });
            }
            Ok((out, record(strategy, observations, slots)))
        }
        AttackStrategy::CorrelatedPauli(probs) => {
            check_complete_grid(slots)?;
            let mut per_position: BTreeMap<u32, Pauli> = BTreeMap::new();
            let mut out = Vec::with_capacity(slots.len());
            let mut observations = Vec::with_capacity(slots.len());
            for &(id, state) in slots {
                let pauli = *per_position.entry(id.position).or_insert_with(|| {
                    let mut pos_rng =
                        rng::indexed_stream(eve_seed, "eve.position", u64::from(id.position));
                    probs.sample(&mut pos_rng)
                });
                out.push(state.apply_pauli(pauli));
                observations.push(SlotObservation {
                    position: id.position,
                    round: id.round,
                    measured_bit: None,
                    applied_pauli: Some(pauli),
                    eve_basis: None,
                });
            }
            Ok((out, record(strategy, observations, slots)))
        }
        AttackStrategy::BasisLearner(basis) => {
            let mut out = Vec::with_capacity(slots.len());
            let mut observations = Vec::with_capacity(slots.len());
            for &(id, state) in slots {
                let mut slot_rng = rng::indexed_stream(eve_seed, "eve.slot", id.key());
                let (bit, collapsed) = state.measure(*basis, &mut slot_rng);
                out.push(collapsed);
                observations.push(SlotObservation {
                    position: id.position,
                    round: id.round,
                    measured_bit: Some(bit),
                    applied_pauli: None,
                    eve_basis: Some(*basis),
                });
            }
            Ok((out, record(strategy, observations, slots)))
        }
    }
}

fn record(
    strategy: &AttackStrategy,
    observations: Vec<SlotObservation>,
    slots: &[(SlotId, QubitState)],
) -> EveRecord {
    let positions = slots
        .iter()
        .map(|(id, _)| id.position as usize + 1)
        .max()
        .unwrap_or(0);
    EveRecord {
        strategy: strategy.label().to_string(),
        observations,
        basis_posterior: vec![0.5; positions],
    }
}

/// The correlated attack only makes sense on a complete position-by-round
/// grid: every position present for rounds 0..r exactly once.
fn check_complete_grid(slots: &[(SlotId, QubitState)]) -> Result<()> {
    let mut rounds_per_position: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut max_round = 0;
    for (id, _) in slots {
        rounds_per_position
            .entry(id.position)
            .or_default()
            .push(id.round);
        max_round = max_round.max(id.round);
    }
    let rounds = max_round as usize + 1;
    for (position, mut seen) in rounds_per_position {
        seen.sort_unstable();
        let expected: Vec<u32> = (0..rounds as u32).collect();
        if seen != expected {
            return Err(Error::IncompleteSlotGrid(format!(
                "position {position} has rounds {seen:?}, expected 0..{rounds}"
            )));
        }
    }
    Ok(())
}

/// Result of the basis-information leakage estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisInfoEstimate {
    /// Pooled plug-in mutual information, bits per basis position.
    pub mi_bits_per_position: f64,
    /// Standard error from batching the sessions.
    pub std_error: f64,
    pub sessions: usize,
    pub samples: usize,
}

const MIN_SESSIONS: usize = 100;
const BATCHES: usize = 10;

/// Empirical mutual information between Eve's per-position observation
/// statistics and the true basis bit, over many sessions.
///
/// Each (session, position) contributes one sample: the number of ones Eve
/// measured at that position across the rounds, paired with the position's
/// true basis bit. Requires records that carry measurements (intercept
/// resend or basis learner) and at least 100 sessions.
pub fn eve_basis_information(sessions: &[(EveRecord, BitVector)]) -> Result<BasisInfoEstimate> {
    if sessions.len() < MIN_SESSIONS {
        return Err(Error::InsufficientSamples {
            got: sessions.len(),
            need: MIN_SESSIONS,
        });
    }
    let mut per_session_samples: Vec<Vec<(bool, usize)>> = Vec::with_capacity(sessions.len());
    for (record, true_b) in sessions {
        let mut ones_per_position: BTreeMap<u32, usize> = BTreeMap::new();
        let mut any = false;
        for obs in &record.observations {
            if let Some(bit) = obs.measured_bit {
                any = true;
                *ones_per_position.entry(obs.position).or_default() += bit as usize;
            } else {
                ones_per_position.entry(obs.position).or_default();
            }
        }
        if !any {
            return Err(Error::EmptyInput(
                "records carry no measurements; basis information needs a measuring strategy"
                    .into(),
            ));
        }
        let samples: Vec<(bool, usize)> = ones_per_position
            .into_iter()
            .map(|(position, ones)| (true_b.get(position as usize), ones))
            .collect();
        per_session_samples.push(samples);
    }

    let pooled: Vec<(bool, usize)> = per_session_samples.iter().flatten().copied().collect();
    let mi = plug_in_mi(&pooled);

    let batch_size = sessions.len().div_ceil(BATCHES);
    let batch_mis: Vec<f64> = per_session_samples
        .chunks(batch_size)
        .map(|chunk| {
            let flat: Vec<(bool, usize)> = chunk.iter().flatten().copied().collect();
            plug_in_mi(&flat)
        })
        .collect();
    let k = batch_mis.len() as f64;
    let mean = batch_mis.iter().sum::<f64>() / k;
    let var = batch_mis
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (k - 1.0);
    let std_error = (var / k).sqrt();

    Ok(BasisInfoEstimate {
        mi_bits_per_position: mi,
        std_error,
        sessions: sessions.len(),
        samples: pooled.len(),
    })
}

fn plug_in_mi(samples: &[(bool, usize)]) -> f64 {
    let n = samples.len() as f64;
    let mut joint: BTreeMap<(bool, usize), f64> = BTreeMap::new();
    let mut basis_marginal = [0.0f64; 2];
    let mut obs_marginal: BTreeMap<usize, f64> = BTreeMap::new();
    for &(b, o) in samples {
        *joint.entry((b, o)).or_default() += 1.0;
        basis_marginal[b as usize] += 1.0;
        *obs_marginal.entry(o).or_default() += 1.0;
    }
    let mut mi = 0.0;
    for (&(b, o), &count) in &joint {
        let p_joint = count / n;
        let p_b = basis_marginal[b as usize] / n;
        let p_o = obs_marginal[&o] / n;
        mi += p_joint * (p_joint / (p_b * p_o)).log2();
    }
    mi
}

/// Per-position posterior P(basis = X | observations) under a two-point
/// observation model: each measured bit is 0 with probability `p0_given_z`
/// at a Z position and `p0_given_x` at an X position, with a uniform prior
/// over the basis bit. Pure plumbing for leakage experiments.
pub fn infer_basis_posterior(record: &EveRecord, p0_given_z: f64, p0_given_x: f64) -> Vec<f64> {
    let positions = record.basis_posterior.len();
    let mut log_likelihood_z = vec![0.0f64; positions];
    let mut log_likelihood_x = vec![0.0f64; positions];
    for obs in &record.observations {
        let Some(bit) = obs.measured_bit else {
            continue;
        };
        let idx = obs.position as usize;
        if idx >= positions {
            continue;
        }
        let (pz, px) = if bit {
            (1.0 - p0_given_z, 1.0 - p0_given_x)
        } else {
            (p0_given_z, p0_given_x)
        };
        log_likelihood_z[idx] += pz.max(f64::MIN_POSITIVE).ln();
        log_likelihood_x[idx] += px.max(f64::MIN_POSITIVE).ln();
    }
    log_likelihood_z
        .iter()
        .zip(&log_likelihood_x)
        .map(|(&lz, &lx)| {
            let m = lz.max(lx);
            let wz = (lz - m).exp();
            let wx = (lx - m).exp();
            wx / (wz + wx)
        })
        .collect()
}
