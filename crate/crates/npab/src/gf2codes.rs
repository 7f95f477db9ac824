//! Binary linear algebra over GF(2): bit vectors, matrices, linear codes
//! with syndrome decoding, nested code pairs and coset-label key
//! extraction.
//!
//! Decoding is table-based minimum-distance decoding, limited to block
//! lengths of at most [`MAX_TABLE_BLOCK_LEN`] bits; the protocol needs
//! small demonstration codes, not production decoders. Larger payloads are
//! handled upstream by partitioning into blocks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest block length for which a full syndrome table is built.
pub const MAX_TABLE_BLOCK_LEN: usize = 24;

/// An element of F_2^n. Addition is componentwise XOR.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Uniformly random vector of length `n`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..n).map(|_| rng.gen()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn push(&mut self, value: bool) {
        self.bits.push(value);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Componentwise XOR; lengths must match.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a ^ b)
                .collect(),
        })
    }

    pub fn xor_in_place(&mut self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .fold(false, |acc, (&a, &b)| acc ^ (a & b)))
    }

    /// Copy of the sub-vector at `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self {
            bits: self.bits[start..start + len].to_vec(),
        }
    }

    pub fn extend_from(&mut self, other: &Self) {
        self.bits.extend_from_slice(&other.bits);
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::CodePairFormat(format!(
                        "invalid character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(Self { bits })
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A matrix over GF(2), stored as rows of equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: Vec<BitVector>,
    cols: usize,
}

impl BinaryMatrix {
    /// Builds a matrix from non-empty rows of equal length.
    pub fn new(rows: Vec<BitVector>) -> Result<Self> {
        let cols = rows
            .first()
            .map(BitVector::len)
            .ok_or_else(|| Error::InvalidCode("matrix needs at least one row".into()))?;
        Self::with_cols(rows, cols)
    }

    /// Builds a matrix with an explicit column count, allowing zero rows.
    pub fn with_cols(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        for row in &rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitVector> {
        self.rows.iter()
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows());
        for (i, row) in self.rows.iter().enumerate() {
            out.set(i, row.dot(v)?);
        }
        Ok(out)
    }

    /// Rank via Gaussian elimination.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Reduced row-echelon form with leftmost-pivot preference. Returns the
    /// reduced matrix (zero rows kept in place) and the pivot columns in
    /// ascending order.
    pub fn rref(&self) -> (BinaryMatrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row >= rows.len() {
                break;
            }
            let Some(found) = (pivot_row..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(pivot_row, found);
            let pivot = rows[pivot_row].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != pivot_row && row.get(col) {
                    row.xor_in_place(&pivot).expect("equal lengths");
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        (
            BinaryMatrix {
                rows,
                cols: self.cols,
            },
            pivots,
        )
    }

    /// Basis of the null space {v : M v = 0}, deterministic via RREF with
    /// leftmost pivots.
    pub fn null_space(&self) -> Vec<BitVector> {
        let (rref, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f, true);
                for (i, &p) in pivots.iter().enumerate() {
                    if rref.rows[i].get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }
}

/// Syndrome of `v` with respect to the parity-check matrix `h`.
pub fn syndrome(h: &BinaryMatrix, v: &BitVector) -> Result<BitVector> {
    h.mul_vec(v)
}

/// A binary linear [n, k] code given by a full-row-rank generator and a
/// consistent parity-check matrix.
#[derive(Debug, Clone)]
pub struct LinearCode {
    generator: BinaryMatrix,
    parity_check: BinaryMatrix,
}

impl LinearCode {
    /// Validates that `generator` has full row rank, that
    /// `generator * parity_check^T = 0`, and that
    /// `dim = n - rank(parity_check)`.
    pub fn new(generator: BinaryMatrix, parity_check: BinaryMatrix) -> Result<Self> {
        if generator.cols() != parity_check.cols() {
            return Err(Error::DimensionMismatch {
                expected: generator.cols(),
                got: parity_check.cols(),
            });
        }
        if generator.rank() != generator.rows() {
            return Err(Error::InvalidCode(
                "generator rows are linearly dependent".into(),
            ));
        }
        for g in generator.row_iter() {
            for h in parity_check.row_iter() {
                if g.dot(h)? {
                    return Err(Error::InvalidCode(
                        "generator row fails a parity check".into(),
                    ));
                }
            }
        }
        if generator.rows() + parity_check.rank() != generator.cols() {
            return Err(Error::InvalidCode(
                "dimension and parity-check rank do not add up to n".into(),
            ));
        }
        Ok(Self {
            generator,
            parity_check,
        })
    }

    /// Code spanned by the given generator rows; the parity check is the
    /// deterministically computed dual basis.
    pub fn from_generator(generator: BinaryMatrix) -> Result<Self> {
        let dual = BinaryMatrix::with_cols(generator.null_space(), generator.cols())?;
        Self::new(generator, dual)
    }

    /// Code with the given parity-check matrix; the generator is the
    /// deterministically computed null-space basis.
    pub fn from_parity_check(parity_check: BinaryMatrix) -> Result<Self> {
        let generator = BinaryMatrix::with_cols(parity_check.null_space(), parity_check.cols())?;
        Self::new(generator, parity_check)
    }

    pub fn block_len(&self) -> usize {
        self.generator.cols()
    }

    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BinaryMatrix {
        &self.parity_check
    }

    /// Encodes a k-bit message as `msg * G`.
    pub fn encode(&self, msg: &BitVector) -> Result<BitVector> {
        if msg.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: msg.len(),
            });
        }
        let mut out = BitVector::zeros(self.block_len());
        for (i, row) in self.generator.row_iter().enumerate() {
            if msg.get(i) {
                out.xor_in_place(row)?;
            }
        }
        Ok(out)
    }

    /// Whether `v` has an all-zero syndrome.
    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        Ok(syndrome(&self.parity_check, v)?.weight() == 0)
    }

    /// Uniformly random codeword (uniform message times generator).
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let msg = BitVector::random(self.dimension(), rng);
        self.encode(&msg).expect("message length matches dimension")
    }

    /// All 2^k codewords, in message-counting order. Intended for small
    /// demonstration codes and exhaustive tests.
    pub fn codewords(&self) -> impl Iterator<Item = BitVector> + '_ {
        let k = self.dimension();
        assert!(k <= MAX_TABLE_BLOCK_LEN, "too many codewords to enumerate");
        (0u32..(1 << k)).map(move |m| {
            let msg = BitVector::from_bits((0..k).map(|i| (m >> i) & 1 == 1).collect());
            self.encode(&msg).expect("message length matches dimension")
        })
    }
}

/// Precomputed minimum-distance decoder: one coset leader per syndrome.
///
/// Leaders are the minimum-weight error patterns, ties broken by the
/// lexicographically smallest pattern (position 0 most significant), fixed
/// once at build time.
#[derive(Debug, Clone)]
pub struct SyndromeTable {
    /// Coset leader per packed syndrome, as a bit mask in lexicographic
    /// key order (bit `n-1-i` of the mask is error position `i`).
    leaders: Vec<u32>,
    block_len: usize,
    parity_check: BinaryMatrix,
}

impl SyndromeTable {
    pub fn build(code: &LinearCode) -> Result<Self> {
        let n = code.block_len();
        if n > MAX_TABLE_BLOCK_LEN {
            return Err(Error::CodeTooLarge(n, MAX_TABLE_BLOCK_LEN));
        }
        let h = code.parity_check();
        let r = h.rows();
        // Syndrome of the weight-1 error at position i, packed into a u32.
        let col_syndromes: Vec<u32> = (0..n)
            .map(|i| {
                let mut e = BitVector::zeros(n);
                e.set(i, true);
                pack(&h.mul_vec(&e).expect("lengths match"))
            })
            .collect();
        let mut leaders: Vec<Option<u32>> = vec![None; 1 << r];
        let mut remaining = leaders.len();
        'outer: for weight in 0..=n {
            // Gosper's hack walks the weight-w masks in ascending numeric
            // order, which is ascending lexicographic order of the error
            // string under the key convention above.
            let mut mask: u64 = if weight == 0 { 0 } else { (1u64 << weight) - 1 };
            loop {
                if mask >= (1u64 << n) {
                    break;
                }
                let syn = syndrome_of_mask(mask as u32, n, &col_syndromes);
                if leaders[syn as usize].is_none() {
                    leaders[syn as usize] = Some(mask as u32);
                    remaining -= 1;
                    if remaining == 0 {
                        break 'outer;
                    }
                }
                if mask == 0 {
                    break;
                }
                let c = mask & mask.wrapping_neg();
                let ripple = mask + c;
                mask = ripple | (((mask ^ ripple) >> 2) / c);
            }
        }
        let leaders = leaders
            .into_iter()
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::InvalidCode("parity-check rows are dependent".into()))?;
        Ok(Self {
            leaders,
            block_len: n,
            parity_check: h.clone(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Decodes `v` to the codeword at minimum Hamming distance.
    pub fn decode(&self, v: &BitVector) -> Result<BitVector> {
        let syn = pack(&self.parity_check.mul_vec(v)?);
        let leader = self.leaders[syn as usize];
        let mut out = v.clone();
        for i in 0..self.block_len {
            if (leader >> (self.block_len - 1 - i)) & 1 == 1 {
                out.set(i, !out.get(i));
            }
        }
        Ok(out)
    }
}

fn pack(bits: &BitVector) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0u32, |acc, (i, b)| acc | ((b as u32) << i))
}

fn syndrome_of_mask(mask: u32, n: usize, col_syndromes: &[u32]) -> u32 {
    let mut m = mask;
    let mut syn = 0;
    while m != 0 {
        let bit = m.trailing_zeros() as usize;
        syn ^= col_syndromes[n - 1 - bit];
        m &= m - 1;
    }
    syn
}

/// Decodes `v` to the nearest codeword, building a one-shot syndrome table.
/// Callers that decode repeatedly should build a [`SyndromeTable`] (or a
/// [`NestedCodePair`]) once and reuse it.
pub fn decode_to_codeword(code: &LinearCode, v: &BitVector) -> Result<BitVector> {
    SyndromeTable::build(code)?.decode(v)
}

/// Whether `(c1, c2)` form a strictly nested pair {0} < C2 < C1 with every
/// generator row of C2 a codeword of C1.
pub fn check_nested(c1: &LinearCode, c2: &LinearCode) -> bool {
    if c1.block_len() != c2.block_len() {
        return false;
    }
    if c2.dimension() == 0 || c2.dimension() >= c1.dimension() {
        return false;
    }
    c2.generator()
        .row_iter()
        .all(|row| c1.contains(row).unwrap_or(false))
}

/// Nested code pair C2 < C1 with a precomputed decoder for C1 and a fixed
/// coset-labelling map for the quotient C1/C2.
///
/// The final key is the m = dim C1 - dim C2 bit label of the coset u + C2.
/// Labels come from a coset-representative basis: the generator rows of C2
/// are completed to a basis of C1 (scanning C1's generator rows in order),
/// and the label of u is its coordinate vector on the completion rows. The
/// coordinate extraction matrix is computed once by Gaussian elimination
/// with leftmost-pivot preference, so labels are reproducible across runs.
#[derive(Debug, Clone)]
pub struct NestedCodePair {
    c1: LinearCode,
    c2: LinearCode,
    key_length: usize,
    label_matrix: BinaryMatrix,
    table: SyndromeTable,
}

impl NestedCodePair {
    pub fn new(c1: LinearCode, c2: LinearCode) -> Result<Self> {
        if c1.block_len() != c2.block_len() {
            return Err(Error::DimensionMismatch {
                expected: c1.block_len(),
                got: c2.block_len(),
            });
        }
        if c2.dimension() == 0 {
            return Err(Error::NotNested("C2 must strictly contain {0}".into()));
        }
        if c2.dimension() >= c1.dimension() {
            return Err(Error::NotNested(
                "C2 must be a strict subcode of C1 (key length would be zero)".into(),
            ));
        }
        for row in c2.generator().row_iter() {
            if !c1.contains(row)? {
                return Err(Error::NotNested(format!(
                    "C2 generator row {row} is not a codeword of C1"
                )));
            }
        }
        let key_length = c1.dimension() - c2.dimension();
        let label_matrix = build_label_matrix(&c1, &c2)?;
        let table = SyndromeTable::build(&c1)?;
        Ok(Self {
            c1,
            c2,
            key_length,
            label_matrix,
            table,
        })
    }

    pub fn c1(&self) -> &LinearCode {
        &self.c1
    }

    pub fn c2(&self) -> &LinearCode {
        &self.c2
    }

    pub fn block_len(&self) -> usize {
        self.c1.block_len()
    }

    /// Key bits extracted per block: m = dim C1 - dim C2.
    pub fn key_length(&self) -> usize {
        self.key_length
    }

    /// Canonical m-bit label of the coset u + C2 in C1/C2. Linear in u;
    /// errors if u is not a codeword of C1.
    pub fn coset_label(&self, u: &BitVector) -> Result<BitVector> {
        if !self.c1.contains(u)? {
            return Err(Error::NotInCode);
        }
        self.label_matrix.mul_vec(u)
    }

    /// Minimum-distance decoding in C1 via the precomputed table.
    pub fn decode_to_c1(&self, v: &BitVector) -> Result<BitVector> {
        self.table.decode(v)
    }
}

/// Coordinate-extraction matrix L with label(u) = L u.
///
/// Stack B = [C2 generator rows; completion rows chosen from C1's
/// generator], row-reduce the augmented [B | I] to R = T B, and read
/// coordinates of u in the B basis as x = y T where y_j = u[pivot_j]. The
/// label is the last m coordinates, so L_{i, p_j} = T_{j, k2 + i}.
fn build_label_matrix(c1: &LinearCode, c2: &LinearCode) -> Result<BinaryMatrix> {
    let n = c1.block_len();
    let k1 = c1.dimension();
    let k2 = c2.dimension();
    let m = k1 - k2;

    let mut basis_rows: Vec<BitVector> = c2.generator().row_iter().cloned().collect();
    for candidate in c1.generator().row_iter() {
        if basis_rows.len() == k1 {
            break;
        }
        let mut trial = basis_rows.clone();
        trial.push(candidate.clone());
        let trial_matrix = BinaryMatrix::with_cols(trial, n)?;
        if trial_matrix.rank() == basis_rows.len() + 1 {
            basis_rows.push(candidate.clone());
        }
    }
    if basis_rows.len() != k1 {
        return Err(Error::NotNested(
            "could not complete a C2 basis to a basis of C1".into(),
        ));
    }

    // Augment each row with an identity block and reduce; the augmented
    // part accumulates the transformation T with R = T B.
    let augmented_rows: Vec<BitVector> = basis_rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut aug = row.clone();
            for j in 0..k1 {
                aug.push(j == i);
            }
            aug
        })
        .collect();
    let augmented = BinaryMatrix::with_cols(augmented_rows, n + k1)?;
    let (rref, pivots_all) = augmented.rref();
    let pivots: Vec<usize> = pivots_all.into_iter().filter(|&p| p < n).collect();
    if pivots.len() != k1 {
        return Err(Error::NotNested(
            "basis rows lost rank during reduction".into(),
        ));
    }

    let mut label_rows = vec![BitVector::zeros(n); m];
    for (j, &p) in pivots.iter().enumerate() {
        // T[j][c] lives in augmented column n + c of reduced row j.
        for (i, label_row) in label_rows.iter_mut().enumerate() {
            label_row.set(p, rref.row(j).get(n + k2 + i));
        }
    }
    BinaryMatrix::with_cols(label_rows, n)
}

/// The [7,4] Hamming code, parity-check columns counting 1 through 7.
pub fn hamming_7_4() -> LinearCode {
    let h = BinaryMatrix::new(vec![
        "0001111".parse().unwrap(),
        "0110011".parse().unwrap(),
        "1010101".parse().unwrap(),
    ])
    .expect("static rows are well formed");
    LinearCode::from_parity_check(h).expect("Hamming [7,4] is a valid code")
}

/// The [7,3] simplex code, the dual of the [7,4] Hamming code.
pub fn simplex_7_3() -> LinearCode {
    let g = BinaryMatrix::new(vec![
        "0001111".parse().unwrap(),
        "0110011".parse().unwrap(),
        "1010101".parse().unwrap(),
    ])
    .expect("static rows are well formed");
    LinearCode::from_generator(g).expect("simplex [7,3] is a valid code")
}

/// The Steane pair: C1 = [7,4] Hamming over C2 = its [7,3] dual, one key
/// bit per 7-bit block.
pub fn steane_pair() -> NestedCodePair {
    NestedCodePair::new(hamming_7_4(), simplex_7_3()).expect("the Steane pair is nested")
}

/// Trivial pair for even n >= 4: C1 = the [n, n-1] single-parity-check
/// code, C2 = the [n, 1] repetition code, giving n-2 key bits per block
/// with no error correction to speak of.
pub fn parity_over_repetition(n: usize) -> Result<NestedCodePair> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidCode(
            "parity-over-repetition needs even n >= 4".into(),
        ));
    }
    let all_ones = BitVector::from_bits(vec![true; n]);
    let c1 = LinearCode::from_parity_check(BinaryMatrix::new(vec![all_ones.clone()])?)?;
    let c2 = LinearCode::from_generator(BinaryMatrix::new(vec![all_ones])?)?;
    NestedCodePair::new(c1, c2)
}

/// Parses the code-pair file format:
///
/// ```text
/// n k1 k2
/// <k1 generator rows of C1 as 0/1 strings of length n>
/// <k2 generator rows of C2>
/// ```
///
/// Blank lines and lines starting with `#` are ignored. The pair is fully
/// validated (nesting included) before being returned.
pub fn parse_code_pair(text: &str) -> Result<NestedCodePair> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::CodePairFormat("missing header line".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::CodePairFormat(format!(
            "header must be \"n k1 k2\", got {header:?}"
        )));
    }
    let parse_num = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::CodePairFormat(format!("invalid {what}: {s:?}")))
    };
    let n = parse_num(fields[0], "block length")?;
    let k1 = parse_num(fields[1], "C1 dimension")?;
    let k2 = parse_num(fields[2], "C2 dimension")?;
    if n == 0 || n > MAX_TABLE_BLOCK_LEN {
        return Err(Error::CodePairFormat(format!(
            "block length must be in 1..={MAX_TABLE_BLOCK_LEN}, got {n}"
        )));
    }
    if k1 > n || k2 > n {
        return Err(Error::CodePairFormat(format!(
            "dimensions k1={k1}, k2={k2} exceed block length {n}"
        )));
    }
    let mut read_rows = |count: usize, which: &str| -> Result<Vec<BitVector>> {
        let mut rows = Vec::with_capacity(count);
        for i in 0..count {
            let line = lines.next().ok_or_else(|| {
                Error::CodePairFormat(format!("missing row {} of {which}", i + 1))
            })?;
            let row: BitVector = line.parse()?;
            if row.len() != n {
                return Err(Error::CodePairFormat(format!(
                    "row {} of {which} has length {}, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(rows)
    };
    let g1 = read_rows(k1, "C1")?;
    let g2 = read_rows(k2, "C2")?;
    if lines.next().is_some() {
        return Err(Error::CodePairFormat("trailing content after rows".into()));
    }
    let c1 = LinearCode::from_generator(BinaryMatrix::with_cols(g1, n)?)?;
    let c2 = LinearCode::from_generator(BinaryMatrix::with_cols(g2, n)?)?;
    NestedCodePair::new(c1, c2)
}

/// Renders a pair back into the file format (generator rows only).
pub fn code_pair_to_string(pair: &NestedCodePair) -> String {
    let mut out = format!(
        "{} {} {}\n",
        pair.block_len(),
        pair.c1().dimension(),
        pair.c2().dimension()
    );
    for row in pair.c1().generator().row_iter() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    for row in pair.c2().generator().row_iter() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}
