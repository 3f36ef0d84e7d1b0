//! Translation-summed Pauli coupling operators on an open 1-D spin chain.
//!
//! Site 1 is the most significant bit of a basis-state index, so the
//! computational state `e_0` is all spins up (σ^z = +1 on every site).

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Largest chain length for which state vectors are allocated.
pub const MAX_CHAIN_LENGTH: usize = 24;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const NON_IDENTITY: [PauliLabel; 3] = [PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    /// The 2×2 matrix, row-major.
    pub fn matrix(self) -> [C64; 4] {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            PauliLabel::I => [one, o, o, one],
            PauliLabel::X => [o, one, one, o],
            PauliLabel::Y => [o, -i, i, o],
            PauliLabel::Z => [one, o, o, -one],
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliLabel::I),
            'X' => Some(PauliLabel::X),
            'Y' => Some(PauliLabel::Y),
            'Z' => Some(PauliLabel::Z),
            _ => None,
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Tensor product of one Pauli label per site, stored as bit masks.
///
/// Acting on a basis state `|b⟩` gives `i^{n_y} (-1)^{popcount(b & z_mask)} |b ^ x_mask⟩`,
/// using `Y = i·X·Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    labels: Vec<PauliLabel>,
    x_mask: usize,
    z_mask: usize,
    y_phase: C64,
}

impl PauliString {
    pub fn new(labels: Vec<PauliLabel>) -> Self {
        let len = labels.len();
        let (mut x_mask, mut z_mask, mut n_y) = (0usize, 0usize, 0u32);
        for (site, &label) in labels.iter().enumerate() {
            let bit = 1usize << (len - 1 - site);
            match label {
                PauliLabel::I => {}
                PauliLabel::X => x_mask |= bit,
                PauliLabel::Z => z_mask |= bit,
                PauliLabel::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        let y_phase = match n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        Self { labels, x_mask, z_mask, y_phase }
    }

    pub fn labels(&self) -> &[PauliLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Column `b` of the string's matrix: the single non-zero entry's row and value.
    #[inline]
    pub fn action(&self, b: usize) -> (usize, C64) {
        let sign = if (b & self.z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        (b ^ self.x_mask, self.y_phase * sign)
    }

    /// `out += coeff · P · state`.
    pub fn apply_add(&self, coeff: C64, state: &[C64], out: &mut [C64]) {
        for (b, &amp) in state.iter().enumerate() {
            let (row, phase) = self.action(b);
            out[row] += coeff * phase * amp;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Normalised sum of one contiguous K-site Pauli pattern over all chain positions.
#[derive(Clone, Debug)]
pub struct BasisOperator {
    pattern: Vec<PauliLabel>,
    strings: Vec<PauliString>,
    norm_factor: f64,
    chain_length: usize,
}

impl BasisOperator {
    pub fn new(pattern: Vec<PauliLabel>, chain_length: usize) -> Result<Self> {
        let k = pattern.len();
        if k == 0 || k > chain_length {
            return Err(Error::Parameter(format!("pattern of arity {k} does not fit a chain of length {chain_length}")));
        }
        if pattern.contains(&PauliLabel::I) {
            return Err(Error::Parameter("coupling patterns contain only X, Y and Z".into()));
        }
        let positions = chain_length - k + 1;
        let strings = (0..positions)
            .map(|start| {
                let mut labels = vec![PauliLabel::I; chain_length];
                labels[start..start + k].copy_from_slice(&pattern);
                PauliString::new(labels)
            })
            .collect();
        let norm_factor = 1.0 / ((positions as f64) * (1u64 << chain_length) as f64).sqrt();
        Ok(Self { pattern, strings, norm_factor, chain_length })
    }

    pub fn pattern(&self) -> &[PauliLabel] {
        &self.pattern
    }

    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(|l| l.to_string()).collect()
    }

    pub fn arity(&self) -> usize {
        self.pattern.len()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn dim(&self) -> usize {
        1 << self.chain_length
    }

    /// `out += coeff · H · state` without forming the matrix.
    pub fn apply_add(&self, coeff: f64, state: &[C64], out: &mut [C64]) {
        let c = C64::new(coeff * self.norm_factor, 0.0);
        for s in &self.strings {
            s.apply_add(c, state, out);
        }
    }

    /// `H · state`.
    pub fn apply(&self, state: &[C64]) -> Result<Vec<C64>> {
        if state.len() != self.dim() {
            return Err(Error::Dimension(format!("state of length {} for a {}-site chain", state.len(), self.chain_length)));
        }
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        self.apply_add(1.0, state, &mut out);
        Ok(out)
    }

    /// `out += coeff · H` into a dense matrix.
    pub fn accumulate_dense(&self, coeff: f64, out: &mut ComplexMatrix) {
        let c = coeff * self.norm_factor;
        for s in &self.strings {
            for b in 0..self.dim() {
                let (row, phase) = s.action(b);
                out[(row, b)] += phase * c;
            }
        }
    }

    pub fn dense_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        self.accumulate_dense(1.0, &mut m);
        m
    }
}

/// Serializable description of a basis: enough to rebuild it exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub chain_length: usize,
    pub max_arity: usize,
    pub size: usize,
    pub patterns: Vec<String>,
}

impl BasisDescriptor {
    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("descriptor serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn to_basis(&self) -> Result<OperatorBasis> {
        let basis = OperatorBasis::new(self.chain_length, self.max_arity)?;
        if basis.descriptor() != *self {
            return Err(Error::Validation("descriptor does not match the canonical basis ordering".into()));
        }
        Ok(basis)
    }

    /// Parses a pattern such as `"XZ"`.
    pub fn parse_pattern(s: &str) -> Result<Vec<PauliLabel>> {
        s.chars()
            .map(|c| PauliLabel::from_char(c).ok_or_else(|| Error::Format(format!("bad Pauli label {c:?} in {s:?}"))))
            .collect()
    }
}

/// Ordered, Hilbert–Schmidt orthonormal target space of coupling operators.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    chain_length: usize,
    max_arity: usize,
    operators: Vec<BasisOperator>,
}

/// `Σ_{K=1}^{K_max} 3^K`.
pub fn basis_size(max_arity: usize) -> usize {
    (1..=max_arity).map(|k| 3usize.pow(k as u32)).sum()
}

impl OperatorBasis {
    /// Arity-major, then patterns in lexicographic X < Y < Z order.
    pub fn new(chain_length: usize, max_arity: usize) -> Result<Self> {
        if chain_length == 0 || chain_length > MAX_CHAIN_LENGTH {
            return Err(Error::Parameter(format!("chain length must be in 1..={MAX_CHAIN_LENGTH}, got {chain_length}")));
        }
        if max_arity == 0 || max_arity > chain_length {
            return Err(Error::Parameter(format!(
                "max arity must satisfy 1 <= K_max <= L, got K_max={max_arity}, L={chain_length}"
            )));
        }
        let mut operators = Vec::with_capacity(basis_size(max_arity));
        for k in 1..=max_arity {
            for code in 0..3usize.pow(k as u32) {
                // base-3 digits, most significant first
                let mut pattern = vec![PauliLabel::X; k];
                let mut rest = code;
                for slot in pattern.iter_mut().rev() {
                    *slot = PauliLabel::NON_IDENTITY[rest % 3];
                    rest /= 3;
                }
                operators.push(BasisOperator::new(pattern, chain_length)?);
            }
        }
        Ok(Self { chain_length, max_arity, operators })
    }

    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    /// Number of operators `T`.
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// State-space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1 << self.chain_length
    }

    pub fn operators(&self) -> &[BasisOperator] {
        &self.operators
    }

    pub fn get(&self, i: usize) -> Option<&BasisOperator> {
        self.operators.get(i)
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            chain_length: self.chain_length,
            max_arity: self.max_arity,
            size: self.len(),
            patterns: self.operators.iter().map(BasisOperator::pattern_string).collect(),
        }
    }

    /// Index of the operator with the given pattern.
    pub fn position(&self, pattern: &[PauliLabel]) -> Option<usize> {
        self.operators.iter().position(|op| op.pattern() == pattern)
    }
}

pub fn build_basis(chain_length: usize, max_arity: usize) -> Result<OperatorBasis> {
    OperatorBasis::new(chain_length, max_arity)
}

pub fn apply_operator(op: &BasisOperator, state: &[C64]) -> Result<Vec<C64>> {
    op.apply(state)
}

pub fn dense_matrix(op: &BasisOperator) -> ComplexMatrix {
    op.dense_matrix()
}
