//! The session protocol: Alice encodes fresh random bits in bases drawn
//! from a pre-shared secret basis sequence, reusing the sequence for `r`
//! rounds; Bob measures in the same bases; a random half of the slots is
//! sacrificed as check bits; the surviving half is reconciled through a
//! nested code pair and distilled into coset-label keys.
//!
//! Phase ordering is strict and enforced by construction: every qubit is
//! transmitted (and any attack applied) before a single bit of public
//! discussion exists, so an eavesdropper can never adapt her interaction
//! to the announcements.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{apply_attack, AttackStrategy, EveRecord, SlotId};
use crate::error::{Error, Result};
use crate::gf2codes::{BitVector, NestedCodePair};
use crate::qcore::{Basis, QubitState};
use crate::rng;
use crate::sources::SourceModel;

/// Parameters of one session: `2n` qubits are sent, the basis sequence has
/// `2n/r` entries and is reused for `r` rounds, and `n` of the slots
/// become check bits.
#[derive(Debug, Clone)]
pub struct SessionParams {
    pub n: usize,
    pub r: usize,
    pub abort_threshold: f64,
    pub seed: u64,
    pub code_pair: Arc<NestedCodePair>,
}

impl SessionParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if self.r == 0 {
            return Err(Error::InvalidParams("r must be positive".into()));
        }
        if !(2 * self.n).is_multiple_of(self.r) {
            return Err(Error::InvalidParams(format!(
                "r must divide 2n: r = {}, 2n = {}",
                self.r,
                2 * self.n
            )));
        }
        if self.code_pair.block_len() > self.n {
            return Err(Error::InvalidParams(format!(
                "code block length {} exceeds the {} available code bits",
                self.code_pair.block_len(),
                self.n
            )));
        }
        if !(self.abort_threshold > 0.0 && self.abort_threshold < 1.0) {
            return Err(Error::InvalidParams(format!(
                "abort threshold must lie in (0, 1), got {}",
                self.abort_threshold
            )));
        }
        Ok(())
    }

    /// Length of the basis sequence: 2n/r.
    pub fn positions(&self) -> usize {
        2 * self.n / self.r
    }

    pub fn total_slots(&self) -> usize {
        2 * self.n
    }
}

/// Lifecycle of a pre-shared basis sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lifecycle {
    Active,
    Discarded,
}

/// Events that drive the basis-sequence lifecycle. Only using the final
/// key for encryption forces a discard: a ciphertext leaks information
/// about the key, and through it about the sequence. Aborted or completed
/// sessions leave the sequence reusable because the encoded bits are fresh
/// every time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifecycleEvent {
    KeyUsedForEncryption,
    SessionAborted,
    SessionSucceeded,
}

/// The pre-shared secret basis sequence: bit 0 selects Z, bit 1 selects X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSequence {
    bits: BitVector,
    lifecycle: Lifecycle,
}

impl BasisSequence {
    pub fn from_bits(bits: BitVector) -> Self {
        Self {
            bits,
            lifecycle: Lifecycle::Active,
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::from_bits(BitVector::random(len, rng))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn lifecycle(&self) -> Lifecycle {
        self.lifecycle
    }

    pub fn is_active(&self) -> bool {
        self.lifecycle == Lifecycle::Active
    }

    pub fn basis_at(&self, position: usize) -> Basis {
        Basis::from_bit(self.bits.get(position))
    }

    /// Applies a lifecycle event. Discarded sequences accept no further
    /// events; encryption use discards, aborts and successes do not.
    pub fn apply_event(self, event: LifecycleEvent) -> Result<Self> {
        if self.lifecycle == Lifecycle::Discarded {
            return Err(Error::DiscardedBasisSequence);
        }
        let lifecycle = match event {
            LifecycleEvent::KeyUsedForEncryption => Lifecycle::Discarded,
            LifecycleEvent::SessionAborted | LifecycleEvent::SessionSucceeded => Lifecycle::Active,
        };
        Ok(Self {
            bits: self.bits,
            lifecycle,
        })
    }
}

/// Full record of one session run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub alice_bits: BitVector,
    pub bob_bits: BitVector,
    pub slot_bases: BitVector,
    pub check_positions: Vec<u32>,
    pub check_error_count: usize,
    pub qber: f64,
    pub aborted: bool,
    pub announcement: Option<BitVector>,
    pub alice_key: Option<BitVector>,
    pub bob_key: Option<BitVector>,
    pub eve_record: Option<EveRecord>,
}

impl SessionTranscript {
    /// Slots not selected as check bits, in ascending order.
    pub fn code_positions(&self) -> Vec<u32> {
        let total = self.alice_bits.len() as u32;
        let mut check = self.check_positions.iter().copied().peekable();
        let mut code = Vec::with_capacity(total as usize - self.check_positions.len());
        for slot in 0..total {
            if check.peek() == Some(&slot) {
                check.next();
            } else {
                code.push(slot);
            }
        }
        code
    }

    /// Raw disagreements between Alice's and Bob's code bits, before
    /// reconciliation.
    pub fn code_error_count(&self) -> usize {
        self.code_positions()
            .iter()
            .filter(|&&slot| self.alice_bits.get(slot as usize) != self.bob_bits.get(slot as usize))
            .count()
    }

    /// Whether both keys exist and agree. `None` for aborted sessions.
    pub fn keys_agree(&self) -> Option<bool> {
        match (&self.alice_key, &self.bob_key) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        }
    }
}

/// Alice's preparation: `2n` fresh uniform random bits, each encoded in
/// the basis its slot position dictates. Slot `t * (2n/r) + j` carries
/// round `t`, position `j`. With an entangled source, the recorded bit is
/// Alice's measurement outcome rather than the requested one.
pub fn alice_prepare<R: Rng + ?Sized>(
    params: &SessionParams,
    b: &BasisSequence,
    source: &SourceModel,
    rng: &mut R,
) -> Result<(BitVector, Vec<QubitState>)> {
    if !b.is_active() {
        return Err(Error::DiscardedBasisSequence);
    }
    if b.len() != params.positions() {
        return Err(Error::DimensionMismatch {
            expected: params.positions(),
            got: b.len(),
        });
    }
    let positions = params.positions();
    let mut bits = BitVector::zeros(params.total_slots());
    let mut states = Vec::with_capacity(params.total_slots());
    for round in 0..params.r {
        for position in 0..positions {
            let slot = round * positions + position;
            let requested: bool = rng.gen();
            let (recorded, state) = source.emit(requested, b.basis_at(position), rng);
            bits.set(slot, recorded);
            states.push(state);
        }
    }
    Ok((bits, states))
}

/// Bob measures every slot in the basis its position dictates.
pub fn bob_measure<R: Rng + ?Sized>(
    states: &[QubitState],
    b: &BasisSequence,
    rng: &mut R,
) -> Result<BitVector> {
    let positions = b.len();
    if positions == 0 || !states.len().is_multiple_of(positions) {
        return Err(Error::DimensionMismatch {
            expected: positions,
            got: states.len(),
        });
    }
    let mut bits = BitVector::zeros(states.len());
    for (slot, state) in states.iter().enumerate() {
        let basis = b.basis_at(slot % positions);
        let (bit, _) = state.measure(basis, rng);
        bits.set(slot, bit);
    }
    Ok(bits)
}

/// Uniformly random partition of `total` slots into check and code halves
/// (partial Fisher-Yates), both returned in ascending order.
pub fn select_check_bits<R: Rng + ?Sized>(rng: &mut R, total: usize) -> (Vec<u32>, Vec<u32>) {
    let half = total / 2;
    let mut slots: Vec<u32> = (0..total as u32).collect();
    for i in 0..half {
        let j = rng.gen_range(i..total);
        slots.swap(i, j);
    }
    let mut check: Vec<u32> = slots[..half].to_vec();
    let mut code: Vec<u32> = slots[half..].to_vec();
    check.sort_unstable();
    code.sort_unstable();
    (check, code)
}

/// Compares announced check values: the error rate and whether to abort.
/// The comparison is strict: a rate exactly at the threshold passes.
pub fn estimate_and_test(
    alice_checks: &BitVector,
    bob_checks: &BitVector,
    threshold: f64,
) -> Result<(f64, bool)> {
    if alice_checks.len() != bob_checks.len() {
        return Err(Error::DimensionMismatch {
            expected: alice_checks.len(),
            got: bob_checks.len(),
        });
    }
    let errors = alice_checks
        .iter()
        .zip(bob_checks.iter())
        .filter(|(a, b)| a != b)
        .count();
    let qber = errors as f64 / alice_checks.len() as f64;
    Ok((qber, qber > threshold))
}

/// Outcome of reconciliation over all blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    /// Concatenated per-block announcements u + v.
    pub announcement: BitVector,
    pub alice_key: BitVector,
    pub bob_key: BitVector,
}

/// Code-bit reconciliation and key extraction.
///
/// The code bits are split into consecutive blocks of the pair's block
/// length (leftover bits are dropped). Per block, Alice draws a random C1
/// codeword `u` and announces `u + v`; Bob adds the announcement to his
/// noisy `v + e`, decodes the resulting `u + e` back to a C1 codeword, and
/// both take the coset label of their codeword as key bits.
pub fn reconcile<R: Rng + ?Sized>(
    pair: &NestedCodePair,
    alice_code: &BitVector,
    bob_code: &BitVector,
    rng: &mut R,
) -> Result<Reconciliation> {
    if alice_code.len() != bob_code.len() {
        return Err(Error::DimensionMismatch {
            expected: alice_code.len(),
            got: bob_code.len(),
        });
    }
    let block = pair.block_len();
    if alice_code.len() < block {
        return Err(Error::DimensionMismatch {
            expected: block,
            got: alice_code.len(),
        });
    }
    let blocks = alice_code.len() / block;
    let mut announcement = BitVector::zeros(0);
    let mut alice_key = BitVector::zeros(0);
    let mut bob_key = BitVector::zeros(0);
    for index in 0..blocks {
        let v = alice_code.slice(index * block, block);
        let received = bob_code.slice(index * block, block);
        let u = pair.c1().random_codeword(rng);
        let masked = u.xor(&v)?;
        alice_key.extend_from(&pair.coset_label(&u)?);
        let noisy_u = received.xor(&masked)?;
        let decoded = pair.decode_to_c1(&noisy_u)?;
        bob_key.extend_from(&pair.coset_label(&decoded)?);
        announcement.extend_from(&masked);
    }
    Ok(Reconciliation {
        announcement,
        alice_key,
        bob_key,
    })
}

/// Runs one full session.
///
/// Phases, in order: (1) Alice prepares and "transmits" all 2n qubits and
/// the attack acts on them; (2) Bob measures everything; (3) only then are
/// check positions drawn and check values compared; (4) surviving code
/// bits are reconciled into keys unless the session aborted. The returned
/// transcript is a pure function of (params, basis sequence, source,
/// attack).
pub fn run_session(
    params: &SessionParams,
    b: &BasisSequence,
    source: &SourceModel,
    attack: &AttackStrategy,
) -> Result<SessionTranscript> {
    params.validate()?;
    source.validate()?;
    if !b.is_active() {
        return Err(Error::DiscardedBasisSequence);
    }
    if b.len() != params.positions() {
        return Err(Error::DimensionMismatch {
            expected: params.positions(),
            got: b.len(),
        });
    }

    let mut alice_rng = rng::stream(params.seed, "alice");
    let mut bob_rng = rng::stream(params.seed, "bob");
    let mut sampler_rng = rng::stream(params.seed, "sampler");
    let eve_seed = rng::derive_seed(params.seed, "eve");

    // Phase 1: preparation, transmission, and any eavesdropping.
    let (alice_bits, states) = alice_prepare(params, b, source, &mut alice_rng)?;
    let positions = params.positions();
    let slots: Vec<(SlotId, QubitState)> = states
        .into_iter()
        .enumerate()
        .map(|(slot, state)| {
            (
                SlotId {
                    position: (slot % positions) as u32,
                    round: (slot / positions) as u32,
                },
                state,
            )
        })
        .collect();
    let (delivered, eve_record) = apply_attack(attack, &slots, eve_seed)?;

    // Phase 2: Bob receives and measures everything (his acknowledgement).
    let bob_bits = bob_measure(&delivered, b, &mut bob_rng)?;

    // Phase 3: public discussion starts only now.
    let (check_positions, code_positions) =
        select_check_bits(&mut sampler_rng, params.total_slots());
    let gather = |bits: &BitVector, idx: &[u32]| {
        BitVector::from_bits(idx.iter().map(|&slot| bits.get(slot as usize)).collect())
    };
    let alice_checks = gather(&alice_bits, &check_positions);
    let bob_checks = gather(&bob_bits, &check_positions);
    let check_error_count = alice_checks
        .iter()
        .zip(bob_checks.iter())
        .filter(|(a, b)| a != b)
        .count();
    let (qber, aborted) = estimate_and_test(&alice_checks, &bob_checks, params.abort_threshold)?;

    // Phase 4: reconciliation, unless aborted.
    let (announcement, alice_key, bob_key) = if aborted {
        (None, None, None)
    } else {
        let outcome = reconcile(
            &params.code_pair,
            &gather(&alice_bits, &code_positions),
            &gather(&bob_bits, &code_positions),
            &mut alice_rng,
        )?;
        (
            Some(outcome.announcement),
            Some(outcome.alice_key),
            Some(outcome.bob_key),
        )
    };

    let slot_bases = BitVector::from_bits(
        (0..params.total_slots())
            .map(|slot| b.bits().get(slot % positions))
            .collect(),
    );

    Ok(SessionTranscript {
        alice_bits,
        bob_bits,
        slot_bases,
        check_positions,
        check_error_count,
        qber,
        aborted,
        announcement,
        alice_key,
        bob_key,
        eve_record: match attack {
            AttackStrategy::NoAttack => None,
            _ => Some(eve_record),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{BasisPolicy, PauliProbs};
    use crate::gf2codes::steane_pair;
    use crate::qcore::Pauli;
    use crate::rng::stream;

    fn steane_params(n: usize, r: usize, seed: u64) -> SessionParams {
        SessionParams {
            n,
            r,
            abort_threshold: 0.11,
            seed,
            code_pair: Arc::new(steane_pair()),
        }
    }

    fn active_b(params: &SessionParams, seed: u64) -> BasisSequence {
        BasisSequence::random(params.positions(), &mut stream(seed, "basis"))
    }

    #[test]
    fn params_validation() {
        assert!(steane_params(7, 2, 0).validate().is_ok());
        assert!(steane_params(0, 1, 0).validate().is_err());
        assert!(steane_params(7, 0, 0).validate().is_err());
        // r = 4 does not divide 2n = 14.
        assert!(steane_params(7, 4, 0).validate().is_err());
        // Code block longer than available code bits.
        assert!(steane_params(6, 2, 0).validate().is_err());
        let mut p = steane_params(7, 2, 0);
        p.abort_threshold = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn prepare_uses_position_bases_per_round() {
        // positions = 2, r = 2, b = (0, 1): slots 0 and 2 are Z, 1 and 3 X.
        let params = steane_params(2, 2, 5);
        let b = BasisSequence::from_bits("01".parse().unwrap());
        let mut rng = stream(5, "alice");
        let (bits, states) = alice_prepare(&params, &b, &SourceModel::Ideal, &mut rng).unwrap();
        assert_eq!(bits.len(), 4);
        for (slot, state) in states.iter().enumerate() {
            let basis = b.basis_at(slot % 2);
            let expected = QubitState::bb84(bits.get(slot), basis);
            assert!(state.same_up_to_phase(&expected), "slot {slot}");
        }
    }

    #[test]
    fn prepare_is_deterministic() {
        let params = steane_params(16, 4, 99);
        let b = active_b(&params, 1);
        let run = || {
            let mut rng = stream(params.seed, "alice");
            alice_prepare(&params, &b, &SourceModel::Ideal, &mut rng).unwrap()
        };
        let (bits1, _) = run();
        let (bits2, _) = run();
        assert_eq!(bits1, bits2);
    }

    #[test]
    fn prepare_rejects_discarded_sequences() {
        let params = steane_params(7, 2, 0);
        let b = active_b(&params, 2)
            .apply_event(LifecycleEvent::KeyUsedForEncryption)
            .unwrap();
        let mut rng = stream(0, "alice");
        assert!(matches!(
            alice_prepare(&params, &b, &SourceModel::Ideal, &mut rng),
            Err(Error::DiscardedBasisSequence)
        ));
    }

    #[test]
    fn matched_bases_reproduce_bits_without_attack() {
        let params = steane_params(32, 4, 7);
        let b = active_b(&params, 3);
        let t = run_session(&params, &b, &SourceModel::Ideal, &AttackStrategy::NoAttack).unwrap();
        assert_eq!(t.alice_bits, t.bob_bits);
        assert_eq!(t.qber, 0.0);
        assert!(!t.aborted);
        assert_eq!(t.keys_agree(), Some(true));
        assert!(t.eve_record.is_none());
    }

    #[test]
    fn y_channel_flips_every_bit() {
        let params = steane_params(14, 2, 11);
        let b = active_b(&params, 4);
        let attack = AttackStrategy::PauliChannel(PauliProbs::new(0.0, 0.0, 1.0, 0.0).unwrap());
        let t = run_session(&params, &b, &SourceModel::Ideal, &attack).unwrap();
        for slot in 0..params.total_slots() {
            assert_ne!(t.alice_bits.get(slot), t.bob_bits.get(slot), "slot {slot}");
        }
        assert_eq!(t.qber, 1.0);
        assert!(t.aborted);
        assert!(t.alice_key.is_none() && t.bob_key.is_none());
    }

    #[test]
    fn z_channel_flips_exactly_x_basis_slots() {
        let params = steane_params(14, 2, 12);
        let b = active_b(&params, 5);
        let attack = AttackStrategy::PauliChannel(PauliProbs::new(0.0, 0.0, 0.0, 1.0).unwrap());
        let t = run_session(&params, &b, &SourceModel::Ideal, &attack).unwrap();
        for slot in 0..params.total_slots() {
            let x_basis = t.slot_bases.get(slot);
            let flipped = t.alice_bits.get(slot) != t.bob_bits.get(slot);
            assert_eq!(flipped, x_basis, "slot {slot}");
        }
    }

    #[test]
    fn check_selection_partitions_and_is_uniform() {
        let mut rng = stream(13, "sampler");
        let (check, code) = select_check_bits(&mut rng, 16);
        assert_eq!(check.len(), 8);
        assert_eq!(code.len(), 8);
        let mut all: Vec<u32> = check.iter().chain(code.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..16).collect::<Vec<u32>>());

        // n = 1: the single check slot should be slot 0 about half the time.
        let mut first = 0usize;
        let draws = 100_000;
        for _ in 0..draws {
            let (check, _) = select_check_bits(&mut rng, 2);
            first += (check[0] == 0) as usize;
        }
        let freq = first as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn check_selection_is_deterministic_per_seed() {
        let a = select_check_bits(&mut stream(14, "sampler"), 64);
        let b = select_check_bits(&mut stream(14, "sampler"), 64);
        assert_eq!(a, b);
    }

    #[test]
    fn estimate_and_test_cases() {
        let zeros: BitVector = "0000".parse().unwrap();
        let ones: BitVector = "1111".parse().unwrap();
        assert_eq!(
            estimate_and_test(&zeros, &zeros, 0.11).unwrap(),
            (0.0, false)
        );
        assert_eq!(estimate_and_test(&zeros, &ones, 0.11).unwrap(), (1.0, true));
        // Boundary: a rate exactly at the threshold does not abort.
        let half: BitVector = "1100".parse().unwrap();
        let (qber, abort) = estimate_and_test(&zeros, &half, 0.5).unwrap();
        assert_eq!(qber, 0.5);
        assert!(!abort);
        assert!(estimate_and_test(&zeros, &"000".parse().unwrap(), 0.5).is_err());
    }

    #[test]
    fn reconcile_without_errors_agrees() {
        let pair = steane_pair();
        let mut rng = stream(15, "reconcile");
        let v = BitVector::random(14, &mut rng);
        let out = reconcile(&pair, &v, &v, &mut rng).unwrap();
        assert_eq!(out.alice_key, out.bob_key);
        assert_eq!(out.alice_key.len(), 2); // two Steane blocks
        assert_eq!(out.announcement.len(), 14);
    }

    #[test]
    fn reconcile_corrects_all_single_errors_exhaustively() {
        let pair = steane_pair();
        let mut rng = stream(16, "reconcile-x");
        for flip in 0..7 {
            for _ in 0..4 {
                let v = BitVector::random(7, &mut rng);
                let mut noisy = v.clone();
                noisy.set(flip, !noisy.get(flip));
                let out = reconcile(&pair, &v, &noisy, &mut rng).unwrap();
                assert_eq!(out.alice_key, out.bob_key, "error at {flip}");
                assert_eq!(out.alice_key.len(), 1);
            }
        }
    }

    #[test]
    fn reconcile_drops_leftover_bits() {
        let pair = steane_pair();
        let mut rng = stream(17, "leftover");
        let v = BitVector::random(10, &mut rng); // 7 used, 3 dropped
        let out = reconcile(&pair, &v, &v, &mut rng).unwrap();
        assert_eq!(out.alice_key.len(), 1);
        assert_eq!(out.announcement.len(), 7);
    }

    #[test]
    fn entangled_source_outcomes_land_in_alice_bits() {
        let params = steane_params(32, 4, 21);
        let b = active_b(&params, 6);
        let src = SourceModel::entangled(1.0).unwrap();
        let t = run_session(&params, &b, &src, &AttackStrategy::NoAttack).unwrap();
        // Perfect pairs: Bob reproduces Alice's recorded outcomes exactly.
        assert_eq!(t.alice_bits, t.bob_bits);
        assert_eq!(t.qber, 0.0);
        assert_eq!(t.keys_agree(), Some(true));
    }

    #[test]
    fn run_session_rejects_discarded_and_mismatched_sequences() {
        let params = steane_params(7, 2, 31);
        let discarded = active_b(&params, 7)
            .apply_event(LifecycleEvent::KeyUsedForEncryption)
            .unwrap();
        assert!(matches!(
            run_session(
                &params,
                &discarded,
                &SourceModel::Ideal,
                &AttackStrategy::NoAttack
            ),
            Err(Error::DiscardedBasisSequence)
        ));
        let wrong_len = BasisSequence::from_bits("0101".parse().unwrap());
        assert!(run_session(
            &params,
            &wrong_len,
            &SourceModel::Ideal,
            &AttackStrategy::NoAttack
        )
        .is_err());
    }

    #[test]
    fn transcripts_are_deterministic() {
        let params = steane_params(28, 4, 77);
        let b = active_b(&params, 8);
        let attack = AttackStrategy::InterceptResend(BasisPolicy::UniformRandom);
        let t1 = run_session(&params, &b, &SourceModel::Ideal, &attack).unwrap();
        let t2 = run_session(&params, &b, &SourceModel::Ideal, &attack).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(
            serde_json::to_string(&t1).unwrap(),
            serde_json::to_string(&t2).unwrap()
        );
    }

    #[test]
    fn attack_does_not_perturb_honest_randomness() {
        // Alice's bits and the check partition are identical with and
        // without an attack: Eve draws from her own stream.
        let params = steane_params(28, 4, 78);
        let b = active_b(&params, 9);
        let clean =
            run_session(&params, &b, &SourceModel::Ideal, &AttackStrategy::NoAttack).unwrap();
        let attacked = run_session(
            &params,
            &b,
            &SourceModel::Ideal,
            &AttackStrategy::PauliChannel(PauliProbs::new(0.7, 0.1, 0.1, 0.1).unwrap()),
        )
        .unwrap();
        assert_eq!(clean.alice_bits, attacked.alice_bits);
        assert_eq!(clean.check_positions, attacked.check_positions);
    }

    #[test]
    fn lifecycle_transitions() {
        let b = BasisSequence::from_bits("0110".parse().unwrap());
        let b = b.apply_event(LifecycleEvent::SessionAborted).unwrap();
        assert!(b.is_active());
        let b = b.apply_event(LifecycleEvent::SessionSucceeded).unwrap();
        assert!(b.is_active());
        let b = b.apply_event(LifecycleEvent::KeyUsedForEncryption).unwrap();
        assert_eq!(b.lifecycle(), Lifecycle::Discarded);
        assert!(b.apply_event(LifecycleEvent::SessionAborted).is_err());
    }

    #[test]
    fn code_error_count_counts_raw_code_disagreements() {
        let params = steane_params(14, 2, 41);
        let b = active_b(&params, 10);
        let attack = AttackStrategy::PauliChannel(PauliProbs::new(0.0, 0.0, 1.0, 0.0).unwrap());
        let t = run_session(&params, &b, &SourceModel::Ideal, &attack).unwrap();
        // Y flips everything, so every code slot disagrees.
        assert_eq!(t.code_error_count(), params.n);
        assert_eq!(t.code_positions().len(), params.n);
    }

    #[test]
    fn transcript_json_round_trip() {
        let params = steane_params(14, 2, 51);
        let b = active_b(&params, 11);
        let t = run_session(
            &params,
            &b,
            &SourceModel::Ideal,
            &AttackStrategy::BasisLearner(Basis::Z),
        )
        .unwrap();
        let json = serde_json::to_string_pretty(&t).unwrap();
        let back: SessionTranscript = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn pauli_errors_respect_basis_structure() {
        // X Paulis never disturb X-basis slots; Z never disturbs Z-basis.
        for (pauli, spared) in [(Pauli::X, true), (Pauli::Z, false)] {
            let probs = match pauli {
                Pauli::X => PauliProbs::new(0.0, 1.0, 0.0, 0.0).unwrap(),
                _ => PauliProbs::new(0.0, 0.0, 0.0, 1.0).unwrap(),
            };
            let params = steane_params(14, 2, 61);
            let b = active_b(&params, 12);
            let t = run_session(
                &params,
                &b,
                &SourceModel::Ideal,
                &AttackStrategy::PauliChannel(probs),
            )
            .unwrap();
            for slot in 0..params.total_slots() {
                if t.slot_bases.get(slot) == spared {
                    assert_eq!(
                        t.alice_bits.get(slot),
                        t.bob_bits.get(slot),
                        "{pauli:?} disturbed a spared slot"
                    );
                }
            }
        }
    }
}
