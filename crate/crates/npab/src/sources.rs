//! Models of Alice's photon source.
//!
//! Three variants: an ideal BB84 source, an imperfect direct source whose
//! X-basis states are tilted toward the Z axis by a fixed angle (the
//! minimal one-parameter model under which the Z- and X-conditioned
//! ensembles become distinguishable and basis information leaks), and an
//! entangled source where Alice measures her half of a Bell-diagonal pair
//! and sends the other half, which keeps the two ensembles identical at
//! the density-operator level no matter how imperfect the pair is.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{density_of_ensemble, Basis, DensityMatrix, QubitState};

/// One of the four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Whether the two halves give opposite outcomes when both are
    /// measured in the given basis. Phi+ correlates in both bases; Phi-
    /// anticorrelates in X, Psi+ in Z, Psi- in both.
    pub fn anticorrelated_in(self, basis: Basis) -> bool {
        match (self, basis) {
            (BellState::PhiPlus, _) => false,
            (BellState::PhiMinus, Basis::Z) => false,
            (BellState::PhiMinus, Basis::X) => true,
            (BellState::PsiPlus, Basis::Z) => true,
            (BellState::PsiPlus, Basis::X) => false,
            (BellState::PsiMinus, _) => true,
        }
    }
}

/// Configuration of Alice's source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceModel {
    /// Emits the exact BB84 state for each (bit, basis).
    Ideal,
    /// Z-basis states are exact; X-basis states are rotated by `delta`
    /// radians toward the Z axis, so the X-conditioned ensemble acquires a
    /// Z-axis bias of sin(2*delta) and the two ensembles differ.
    ImperfectDirect { delta: f64 },
    /// Alice holds Bell-diagonal pairs with weight `fidelity` on Phi+ and
    /// the remainder spread evenly over the other three Bell states. She
    /// measures her half in the requested basis and sends the other half;
    /// her outcome replaces the requested bit.
    EntangledSource { fidelity: f64 },
}

impl SourceModel {
    /// Imperfect direct source; requires 0 <= delta < pi/4.
    pub fn imperfect_direct(delta: f64) -> Result<Self> {
        let model = SourceModel::ImperfectDirect { delta };
        model.validate()?;
        Ok(model)
    }

    /// Entangled source; requires 0.25 <= fidelity <= 1.
    pub fn entangled(fidelity: f64) -> Result<Self> {
        let model = SourceModel::EntangledSource { fidelity };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceModel::Ideal => Ok(()),
            SourceModel::ImperfectDirect { delta } => {
                if !(0.0..FRAC_PI_4).contains(&delta) {
                    Err(Error::InvalidSourceParameter(format!(
                        "delta must be in [0, pi/4), got {delta}"
                    )))
                } else {
                    Ok(())
                }
            }
            SourceModel::EntangledSource { fidelity } => {
                if !(0.25..=1.0).contains(&fidelity) {
                    Err(Error::InvalidSourceParameter(format!(
                        "fidelity must be in [0.25, 1], got {fidelity}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Emit one qubit for the requested bit and basis. Returns the bit
    /// Alice must record alongside the emitted state: for the entangled
    /// source that is her measurement outcome, which overrides the
    /// requested bit; the other models echo the request.
    pub fn emit<R: Rng + ?Sized>(
        &self,
        bit: bool,
        basis: Basis,
        rng: &mut R,
    ) -> (bool, QubitState) {
        match *self {
            SourceModel::Ideal => (bit, QubitState::bb84(bit, basis)),
            SourceModel::ImperfectDirect { delta } => (bit, imperfect_state(bit, basis, delta)),
            SourceModel::EntangledSource { fidelity } => {
                let bell = sample_bell(fidelity, rng);
                let alice_outcome: bool = rng.gen();
                let bob_bit = alice_outcome ^ bell.anticorrelated_in(basis);
                (alice_outcome, basis.eigenstate(bob_bit))
            }
        }
    }

    /// Density operator of Bob's qubit when Alice uses the given basis
    /// with uniformly random bits, computed analytically.
    pub fn ensemble_density(&self, basis: Basis) -> DensityMatrix {
        match *self {
            SourceModel::Ideal => density_of_ensemble(&[
                (0.5, basis.eigenstate(false)),
                (0.5, basis.eigenstate(true)),
            ])
            .expect("uniform two-state ensemble is valid"),
            SourceModel::ImperfectDirect { delta } => density_of_ensemble(&[
                (0.5, imperfect_state(false, basis, delta)),
                (0.5, imperfect_state(true, basis, delta)),
            ])
            .expect("uniform two-state ensemble is valid"),
            SourceModel::EntangledSource { fidelity } => {
                let mut members = Vec::with_capacity(8);
                for (bell, weight) in bell_weights(fidelity) {
                    for alice_outcome in [false, true] {
                        let bob_bit = alice_outcome ^ bell.anticorrelated_in(basis);
                        members.push((weight * 0.5, basis.eigenstate(bob_bit)));
                    }
                }
                density_of_ensemble(&members).expect("Bell weights sum to one")
            }
        }
    }
}

fn bell_weights(fidelity: f64) -> [(BellState, f64); 4] {
    let rest = (1.0 - fidelity) / 3.0;
    [
        (BellState::PhiPlus, fidelity),
        (BellState::PhiMinus, rest),
        (BellState::PsiPlus, rest),
        (BellState::PsiMinus, rest),
    ]
}

fn sample_bell<R: Rng + ?Sized>(fidelity: f64, rng: &mut R) -> BellState {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (bell, weight) in bell_weights(fidelity) {
        acc += weight;
        if u < acc {
            return bell;
        }
    }
    BellState::PsiMinus
}

/// Emitted state of the imperfect direct source. On the real-amplitude
/// circle cos(theta)|0> + sin(theta)|1>, the X states sit at pi/4 and
/// 3pi/4; a tilt of delta moves both toward the Z axis, to pi/4 - delta
/// and 3pi/4 + delta. The two states are no longer orthogonal, and the
/// equal mixture picks up a diagonal bias of sin(2*delta)/2.
fn imperfect_state(bit: bool, basis: Basis, delta: f64) -> QubitState {
    match (basis, bit) {
        (Basis::Z, b) => Basis::Z.eigenstate(b),
        (Basis::X, false) => QubitState::from_real_angle(FRAC_PI_4 - delta),
        (Basis::X, true) => QubitState::from_real_angle(3.0 * FRAC_PI_4 + delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{trace_distance, ALGEBRAIC_TOL};
    use crate::rng::stream;

    #[test]
    fn ideal_source_emits_bb84_states() {
        let mut rng = stream(1, "src-ideal");
        for basis in [Basis::Z, Basis::X] {
            for bit in [false, true] {
                let (recorded, state) = SourceModel::Ideal.emit(bit, basis, &mut rng);
                assert_eq!(recorded, bit);
                assert!(state.same_up_to_phase(&QubitState::bb84(bit, basis)));
            }
        }
    }

    #[test]
    fn zero_delta_matches_ideal() {
        let src = SourceModel::imperfect_direct(0.0).unwrap();
        let mut rng = stream(2, "src-delta0");
        for basis in [Basis::Z, Basis::X] {
            for bit in [false, true] {
                let (_, state) = src.emit(bit, basis, &mut rng);
                assert!(state.same_up_to_phase(&QubitState::bb84(bit, basis)));
            }
            assert!(
                trace_distance(
                    &src.ensemble_density(basis),
                    &SourceModel::Ideal.ensemble_density(basis)
                ) <= ALGEBRAIC_TOL
            );
        }
    }

    #[test]
    fn parameter_domains_are_enforced() {
        assert!(SourceModel::imperfect_direct(-0.1).is_err());
        assert!(SourceModel::imperfect_direct(FRAC_PI_4).is_err());
        assert!(SourceModel::imperfect_direct(0.3).is_ok());
        assert!(SourceModel::entangled(0.2).is_err());
        assert!(SourceModel::entangled(1.1).is_err());
        assert!(SourceModel::entangled(0.25).is_ok());
        assert!(SourceModel::entangled(1.0).is_ok());
    }

    #[test]
    fn ideal_ensembles_are_indistinguishable() {
        let z = SourceModel::Ideal.ensemble_density(Basis::Z);
        let x = SourceModel::Ideal.ensemble_density(Basis::X);
        assert!(trace_distance(&z, &x) <= ALGEBRAIC_TOL);
    }

    #[test]
    fn imperfect_ensembles_separate_and_grow_with_delta() {
        // Analytic oracle from the 2x2 eigenvalue computation: the mixture
        // of the two tilted X states is diag((1 +/- sin 2*delta)/2), so the
        // trace distance to I/2 is sin(2*delta)/2.
        let mut last = -1.0;
        for delta in [0.05, 0.1, 0.2, 0.3, 0.5] {
            let src = SourceModel::imperfect_direct(delta).unwrap();
            let d = trace_distance(
                &src.ensemble_density(Basis::Z),
                &src.ensemble_density(Basis::X),
            );
            let expected = (2.0 * delta).sin() / 2.0;
            assert!((d - expected).abs() <= ALGEBRAIC_TOL, "delta={delta}: {d}");
            assert!(d > last, "not strictly increasing at delta={delta}");
            last = d;
        }
    }

    #[test]
    fn tilted_x_states_lose_orthogonality() {
        // |<psi0|psi1>| = sin(2*delta): the tilt squeezes the X pair
        // together, which is exactly what lets the ensemble bias appear.
        let mut rng = stream(7, "src-overlap");
        for delta in [0.0, 0.1, 0.3] {
            let src = SourceModel::imperfect_direct(delta).unwrap();
            let (_, s0) = src.emit(false, Basis::X, &mut rng);
            let (_, s1) = src.emit(true, Basis::X, &mut rng);
            let overlap = s0.inner(&s1).norm();
            assert!(
                (overlap - (2.0 * delta).sin()).abs() <= ALGEBRAIC_TOL,
                "delta {delta}: overlap {overlap}"
            );
        }
    }

    #[test]
    fn entangled_ensembles_are_invariant_for_all_fidelities() {
        for f in [0.25, 0.5, 0.75, 0.9, 1.0] {
            let src = SourceModel::entangled(f).unwrap();
            let d = trace_distance(
                &src.ensemble_density(Basis::Z),
                &src.ensemble_density(Basis::X),
            );
            assert!(d <= ALGEBRAIC_TOL, "fidelity {f}: trace distance {d}");
        }
    }

    #[test]
    fn perfect_entangled_source_correlates_with_alice() {
        let src = SourceModel::entangled(1.0).unwrap();
        let mut rng = stream(3, "src-phi-plus");
        let mut ones = 0usize;
        let trials = 100_000;
        for i in 0..trials {
            let basis = if i % 2 == 0 { Basis::Z } else { Basis::X };
            let (alice_bit, bob_state) = src.emit(false, basis, &mut rng);
            let (bob_bit, _) = bob_state.measure(basis, &mut rng);
            assert_eq!(bob_bit, alice_bit);
            ones += alice_bit as usize;
        }
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "outcome frequency {freq}");
    }

    #[test]
    fn entangled_intrinsic_error_rate_matches_bell_weights() {
        // Measuring both halves in the same basis disagrees exactly when an
        // anticorrelated Bell state was drawn: probability 2(1-F)/3.
        let f = 0.7;
        let src = SourceModel::entangled(f).unwrap();
        let mut rng = stream(4, "src-intrinsic");
        let trials = 100_000;
        let mut errors = 0usize;
        for i in 0..trials {
            let basis = if i % 2 == 0 { Basis::Z } else { Basis::X };
            let (alice_bit, bob_state) = src.emit(false, basis, &mut rng);
            let (bob_bit, _) = bob_state.measure(basis, &mut rng);
            errors += (bob_bit != alice_bit) as usize;
        }
        let rate = errors as f64 / trials as f64;
        let expected = 2.0 * (1.0 - f) / 3.0;
        assert!((rate - expected).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn sampled_emissions_converge_to_analytic_density() {
        let cases = [
            SourceModel::Ideal,
            SourceModel::imperfect_direct(0.3).unwrap(),
            SourceModel::entangled(0.8).unwrap(),
        ];
        let mut rng = stream(5, "src-converge");
        for src in cases {
            for basis in [Basis::Z, Basis::X] {
                let samples = 100_000;
                let weight = 1.0 / samples as f64;
                let members: Vec<(f64, QubitState)> = (0..samples)
                    .map(|_| {
                        let bit: bool = rng.gen();
                        (weight, src.emit(bit, basis, &mut rng).1)
                    })
                    .collect();
                let empirical = density_of_ensemble(&members).unwrap();
                let analytic = src.ensemble_density(basis);
                let d = trace_distance(&empirical, &analytic);
                assert!(d < 0.01, "{src:?} {basis:?}: {d}");
            }
        }
    }
}
