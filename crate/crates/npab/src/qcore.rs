//! Exact single-qubit quantum mechanics: the four BB84 states, Hadamard and
//! Pauli operators, projective measurement, and 2x2 density matrices for
//! ensemble arguments.
//!
//! A state is two complex amplitudes, so the simulation is exact up to
//! floating point. State equality is defined up to global phase, which no
//! operation in the protocol can observe.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (normalization, Hermiticity, traces).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Preparation/measurement basis. Basis-sequence bit 0 selects `Z`
/// (canonical |0>, |1>), bit 1 selects `X` (the Hadamard-rotated pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn to_bit(self) -> bool {
        self == Basis::X
    }

    /// Eigenstate of this basis for the given bit value.
    pub fn eigenstate(self, bit: bool) -> QubitState {
        match (self, bit) {
            (Basis::Z, false) => QubitState::zero(),
            (Basis::Z, true) => QubitState::one(),
            (Basis::X, false) => QubitState::plus(),
            (Basis::X, true) => QubitState::minus(),
        }
    }
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Product of two Paulis, up to global phase.
    pub fn compose(self, other: Pauli) -> Pauli {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => p,
            (a, b) if a == b => I,
            (X, Y) | (Y, X) => Z,
            (Y, Z) | (Z, Y) => X,
            (X, Z) | (Z, X) => Y,
            _ => unreachable!(),
        }
    }

    /// Whether this operator flips the encoded bit of an eigenstate of the
    /// given basis. X flips Z-basis encodings, Z flips X-basis encodings,
    /// Y flips both, I flips neither.
    pub fn flips_bit_in(self, basis: Basis) -> bool {
        match (self, basis) {
            (Pauli::I, _) => false,
            (Pauli::X, b) => b == Basis::Z,
            (Pauli::Z, b) => b == Basis::X,
            (Pauli::Y, _) => true,
        }
    }
}

/// Analytic probability that the given Pauli error flips a transmitted bit
/// when the qubit is prepared and measured in a uniformly random shared
/// basis. The flip is deterministic given the basis (`flips_bit_in`), so
/// this is simply the fraction of bases the operator disturbs.
pub fn expected_error_rate(p: Pauli) -> f64 {
    let flips = [Basis::Z, Basis::X]
        .iter()
        .filter(|&&b| p.flips_bit_in(b))
        .count();
    flips as f64 / 2.0
}

/// Normalized pure state of one qubit. Equality is up to global phase; use
/// [`QubitState::same_up_to_phase`] rather than comparing amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct QubitState {
    amp0: Complex64,
    amp1: Complex64,
}

impl QubitState {
    /// Builds a state from amplitudes, rejecting non-normalized input.
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amp0, amp1 })
    }

    pub fn zero() -> Self {
        Self {
            amp0: Complex64::new(1.0, 0.0),
            amp1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            amp0: Complex64::new(0.0, 0.0),
            amp1: Complex64::new(1.0, 0.0),
        }
    }

    /// (|0> + |1>)/sqrt(2), the X-basis encoding of bit 0.
    pub fn plus() -> Self {
        Self {
            amp0: Complex64::new(SQRT_HALF, 0.0),
            amp1: Complex64::new(SQRT_HALF, 0.0),
        }
    }

    /// (|0> - |1>)/sqrt(2), the X-basis encoding of bit 1.
    pub fn minus() -> Self {
        Self {
            amp0: Complex64::new(SQRT_HALF, 0.0),
            amp1: Complex64::new(-SQRT_HALF, 0.0),
        }
    }

    /// The BB84 encoding of `bit` in `basis`.
    pub fn bb84(bit: bool, basis: Basis) -> Self {
        basis.eigenstate(bit)
    }

    /// cos(theta)|0> + sin(theta)|1>; used by source imperfection models.
    pub fn from_real_angle(theta: f64) -> Self {
        Self {
            amp0: Complex64::new(theta.cos(), 0.0),
            amp1: Complex64::new(theta.sin(), 0.0),
        }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// State equality up to global phase: |<self|other>| = 1.
    pub fn same_up_to_phase(&self, other: &Self) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= ALGEBRAIC_TOL
    }

    /// Applies the Hadamard transform, which swaps the Z and X bases.
    pub fn hadamard(&self) -> Self {
        Self {
            amp0: (self.amp0 + self.amp1) * SQRT_HALF,
            amp1: (self.amp0 - self.amp1) * SQRT_HALF,
        }
    }

    /// Applies a Pauli operator.
    pub fn apply_pauli(&self, p: Pauli) -> Self {
        let i = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => *self,
            Pauli::X => Self {
                amp0: self.amp1,
                amp1: self.amp0,
            },
            Pauli::Y => Self {
                amp0: -i * self.amp1,
                amp1: i * self.amp0,
            },
            Pauli::Z => Self {
                amp0: self.amp0,
                amp1: -self.amp1,
            },
        }
    }

    /// Projective measurement in the given basis. The outcome follows the
    /// Born rule and the returned state is the corresponding eigenstate.
    /// Consumes exactly one uniform draw from `rng` on every call.
    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> (bool, Self) {
        let p0 = match basis {
            Basis::Z => self.amp0.norm_sqr(),
            Basis::X => ((self.amp0 + self.amp1) * SQRT_HALF).norm_sqr(),
        };
        let u: f64 = rng.gen();
        let bit = u >= p0;
        (bit, basis.eigenstate(bit))
    }
}

/// 2x2 density operator: Hermitian, positive semidefinite, trace one.
#[derive(Debug, Clone, Copy)]
pub struct DensityMatrix {
    m: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (within
    /// [`ALGEBRAIC_TOL`]) before accepting the entries.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m[0][0].im.abs() > ALGEBRAIC_TOL
            || m[1][1].im.abs() > ALGEBRAIC_TOL
            || (m[0][1] - m[1][0].conj()).norm() > ALGEBRAIC_TOL
        {
            return Err(Error::InvalidDensityMatrix("not Hermitian".into()));
        }
        let trace = m[0][0].re + m[1][1].re;
        if (trace - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace = {trace}")));
        }
        let dm = Self { m };
        let [lo, _] = dm.eigenvalues();
        if lo < -ALGEBRAIC_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lo}"
            )));
        }
        Ok(dm)
    }

    /// |psi><psi| for a pure state.
    pub fn from_pure(state: &QubitState) -> Self {
        let a = state.amp0();
        let b = state.amp1();
        Self {
            m: [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
        }
    }

    /// I/2.
    pub fn maximally_mixed() -> Self {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[half, zero], [zero, half]],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    /// Eigenvalues of the (Hermitian) matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.m)
    }
}

fn hermitian_eigenvalues(m: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + m[0][1].norm_sqr()).sqrt();
    [mean - disc, mean + disc]
}

/// Density operator of a classical mixture of pure states. Probabilities
/// must be non-negative and sum to one within 1e-9.
pub fn density_of_ensemble(members: &[(f64, QubitState)]) -> Result<DensityMatrix> {
    let mut total = 0.0;
    for &(p, _) in members {
        if p < -1e-12 {
            return Err(Error::InvalidProbability(format!(
                "negative probability {p}"
            )));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!(
            "probabilities sum to {total}"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[zero; 2]; 2];
    for &(p, ref state) in members {
        let pure = DensityMatrix::from_pure(state);
        for (row, pure_row) in m.iter_mut().zip(&pure.m) {
            for (entry, &pure_entry) in row.iter_mut().zip(pure_row) {
                *entry += pure_entry * p;
            }
        }
    }
    // Renormalize the 1e-9 slack so the stricter DensityMatrix check holds.
    let trace = m[0][0].re + m[1][1].re;
    for row in &mut m {
        for entry in row.iter_mut() {
            *entry /= trace;
        }
    }
    DensityMatrix::new(m)
}

/// Trace distance (1/2) sum |eig(a - b)|: the maximum advantage any
/// measurement has at telling the two ensembles apart.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let entry = |i, j| a.entry(i, j) - b.entry(i, j);
    let diff = [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]];
    let [lo, hi] = hermitian_eigenvalues(&diff);
    (0.5 * (lo.abs() + hi.abs())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_state(rng: &mut impl Rng) -> QubitState {
        // Uniform over pure states (Haar on the Bloch sphere).
        let z: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        let theta = z.acos() / 2.0;
        let amp0 = Complex64::new(theta.cos(), 0.0);
        let amp1 = Complex64::from_polar(theta.sin(), phi);
        QubitState::new(amp0, amp1).unwrap()
    }

    #[test]
    fn hadamard_maps_between_bases() {
        assert!(QubitState::zero()
            .hadamard()
            .same_up_to_phase(&QubitState::plus()));
        assert!(QubitState::one()
            .hadamard()
            .same_up_to_phase(&QubitState::minus()));
        assert!(QubitState::plus()
            .hadamard()
            .same_up_to_phase(&QubitState::zero()));
        assert!(QubitState::minus()
            .hadamard()
            .same_up_to_phase(&QubitState::one()));
    }

    #[test]
    fn hadamard_is_involutive_on_random_states() {
        let mut rng = stream(11, "qcore-test");
        for _ in 0..200 {
            let s = random_state(&mut rng);
            assert!(s.hadamard().hadamard().same_up_to_phase(&s));
        }
    }

    #[test]
    fn pauli_examples() {
        assert!(QubitState::zero()
            .apply_pauli(Pauli::X)
            .same_up_to_phase(&QubitState::one()));
        assert!(QubitState::plus()
            .apply_pauli(Pauli::Z)
            .same_up_to_phase(&QubitState::minus()));
        // Y|0> = i|1>, equal to |1> up to global phase.
        assert!(QubitState::zero()
            .apply_pauli(Pauli::Y)
            .same_up_to_phase(&QubitState::one()));
    }

    #[test]
    fn pauli_composition_closed() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let composed = a.compose(b);
                let mut rng = stream(3, "compose");
                let s = random_state(&mut rng);
                let via_ops = s.apply_pauli(b).apply_pauli(a);
                let direct = s.apply_pauli(composed);
                assert!(via_ops.same_up_to_phase(&direct), "{a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn measurement_of_eigenstates_is_deterministic() {
        let mut rng = stream(5, "measure");
        for basis in [Basis::Z, Basis::X] {
            for bit in [false, true] {
                let (got, post) = basis.eigenstate(bit).measure(basis, &mut rng);
                assert_eq!(got, bit);
                assert!(post.same_up_to_phase(&basis.eigenstate(bit)));
            }
        }
    }

    #[test]
    fn measurement_is_idempotent() {
        let mut rng = stream(6, "idempotent");
        for _ in 0..100 {
            let s = random_state(&mut rng);
            for basis in [Basis::Z, Basis::X] {
                let (bit, post) = s.measure(basis, &mut rng);
                let (bit2, _) = post.measure(basis, &mut rng);
                assert_eq!(bit, bit2);
            }
        }
    }

    #[test]
    fn plus_measured_in_z_is_unbiased() {
        let mut rng = stream(7, "born");
        let trials = 100_000;
        let ones = (0..trials)
            .filter(|_| QubitState::plus().measure(Basis::Z, &mut rng).0)
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn minus_measured_in_x_is_one() {
        let mut rng = stream(8, "eigen-x");
        for _ in 0..100 {
            assert!(QubitState::minus().measure(Basis::X, &mut rng).0);
        }
    }

    #[test]
    fn ensemble_completeness_gives_maximally_mixed() {
        let z =
            density_of_ensemble(&[(0.5, QubitState::zero()), (0.5, QubitState::one())]).unwrap();
        let x =
            density_of_ensemble(&[(0.5, QubitState::plus()), (0.5, QubitState::minus())]).unwrap();
        let mixed = DensityMatrix::maximally_mixed();
        assert!(trace_distance(&z, &mixed) <= ALGEBRAIC_TOL);
        assert!(trace_distance(&x, &mixed) <= ALGEBRAIC_TOL);
        assert!(trace_distance(&z, &x) <= ALGEBRAIC_TOL);
    }

    #[test]
    fn ensemble_of_single_pure_state() {
        let rho = density_of_ensemble(&[(1.0, QubitState::zero())]).unwrap();
        assert!((rho.entry(0, 0).re - 1.0).abs() <= ALGEBRAIC_TOL);
        assert!(rho.entry(1, 1).norm() <= ALGEBRAIC_TOL);
    }

    #[test]
    fn ensemble_rejects_bad_probabilities() {
        assert!(density_of_ensemble(&[(0.7, QubitState::zero())]).is_err());
        assert!(
            density_of_ensemble(&[(1.5, QubitState::zero()), (-0.5, QubitState::one())]).is_err()
        );
    }

    #[test]
    fn trace_distance_extremes() {
        let zero = DensityMatrix::from_pure(&QubitState::zero());
        let one = DensityMatrix::from_pure(&QubitState::one());
        assert_eq!(trace_distance(&zero, &zero), 0.0);
        assert!((trace_distance(&zero, &one) - 1.0).abs() <= ALGEBRAIC_TOL);
        assert!((trace_distance(&zero, &one) - trace_distance(&one, &zero)).abs() <= ALGEBRAIC_TOL);
    }

    #[test]
    fn per_pauli_error_rates() {
        assert_eq!(expected_error_rate(Pauli::I), 0.0);
        assert_eq!(expected_error_rate(Pauli::Z), 0.5);
        assert_eq!(expected_error_rate(Pauli::X), 0.5);
        assert_eq!(expected_error_rate(Pauli::Y), 1.0);
    }

    #[test]
    fn pauli_flips_are_deterministic_per_basis() {
        // Exhaustive over the four BB84 states and four Paulis: the bit
        // flips exactly when flips_bit_in says so.
        let mut rng = stream(9, "flips");
        for basis in [Basis::Z, Basis::X] {
            for bit in [false, true] {
                for p in Pauli::ALL {
                    let sent = QubitState::bb84(bit, basis);
                    let (got, _) = sent.apply_pauli(p).measure(basis, &mut rng);
                    assert_eq!(got != bit, p.flips_bit_in(basis), "{p:?} in {basis:?}");
                }
            }
        }
    }

    #[test]
    fn monte_carlo_error_rates_match_analytic() {
        let mut rng = stream(10, "mc-rates");
        let trials = 100_000;
        for p in Pauli::ALL {
            let mut errors = 0usize;
            for _ in 0..trials {
                let basis = Basis::from_bit(rng.gen());
                let bit: bool = rng.gen();
                let (got, _) = QubitState::bb84(bit, basis)
                    .apply_pauli(p)
                    .measure(basis, &mut rng);
                if got != bit {
                    errors += 1;
                }
            }
            let freq = errors as f64 / trials as f64;
            assert!(
                (freq - expected_error_rate(p)).abs() < 0.01,
                "{p:?}: freq = {freq}"
            );
        }
    }

    proptest! {
        #[test]
        fn constructed_states_are_normalized(re0 in -1.0f64..1.0, im0 in -1.0f64..1.0,
                                             re1 in -1.0f64..1.0, im1 in -1.0f64..1.0) {
            let norm = (re0 * re0 + im0 * im0 + re1 * re1 + im1 * im1).sqrt();
            prop_assume!(norm > 1e-6);
            let s = QubitState::new(
                Complex64::new(re0 / norm, im0 / norm),
                Complex64::new(re1 / norm, im1 / norm),
            ).unwrap();
            let rho = DensityMatrix::from_pure(&s);
            let [lo, hi] = rho.eigenvalues();
            prop_assert!(lo >= -ALGEBRAIC_TOL);
            prop_assert!((hi - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn trace_distance_is_symmetric_and_bounded(z1 in -1.0f64..1.0, z2 in -1.0f64..1.0,
                                                   p1 in 0.0f64..std::f64::consts::TAU,
                                                   p2 in 0.0f64..std::f64::consts::TAU) {
            let mk = |z: f64, phi: f64| {
                let theta = z.acos() / 2.0;
                QubitState::new(
                    Complex64::new(theta.cos(), 0.0),
                    Complex64::from_polar(theta.sin(), phi),
                ).unwrap()
            };
            let a = DensityMatrix::from_pure(&mk(z1, p1));
            let b = DensityMatrix::from_pure(&mk(z2, p2));
            let d = trace_distance(&a, &b);
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!((d - trace_distance(&b, &a)).abs() <= ALGEBRAIC_TOL);
        }
    }
}
