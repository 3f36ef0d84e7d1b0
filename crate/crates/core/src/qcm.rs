//! Quantum correlation matrix of a target space with respect to a state,
//! its null space, and the choice of coefficient vector.
//!
//! The matrix is built through the Gram identity: with `u_i = H_i ψ` and
//! `m_i = ⟨H_i⟩_ψ`, the anticommutator term `½⟨{H_i, H_j}⟩_ψ` equals
//! `Re⟨u_i|u_j⟩` because every `H_i` is Hermitian, so
//! `M = Re(U†U) − m mᵀ`. This needs `T` matrix-free operator applications
//! instead of `T²` dense operator products.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::linalg::{self, inner, EigenDecomposition, RealMatrix, C64};
use crate::pauli::{BasisOperator, OperatorBasis};

/// Default relative cutoff `μ ≤ tol·μ_max` for null-space membership.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// `⟨ψ|H|ψ⟩`; the imaginary part is rounding noise for Hermitian `H` and is dropped.
pub fn expectation(op: &BasisOperator, state: &[C64]) -> Result<f64> {
    let u = op.apply(state)?;
    let value = inner(state, &u);
    let scale = state.iter().map(|z| z.norm_sqr()).sum::<f64>().max(1.0);
    if value.im.abs() > 1e-12 * scale {
        return Err(Error::Validation(format!("expectation has imaginary part {:.3e}", value.im)));
    }
    Ok(value.re)
}

#[derive(Clone, Debug)]
pub struct Qcm {
    matrix: RealMatrix,
    eigen: EigenDecomposition<f64>,
    expectations: Vec<f64>,
    imag_residue: f64,
    basis_size: usize,
    dim: usize,
}

impl Qcm {
    pub fn build(basis: &OperatorBasis, state: &[C64]) -> Result<Self> {
        let dim = basis.dim();
        if state.len() != dim {
            return Err(Error::Dimension(format!("state of length {} for basis of dimension {dim}", state.len())));
        }
        let t = basis.len();
        let applied: Vec<Vec<C64>> = basis
            .operators()
            .par_iter()
            .map(|op| {
                let mut out = vec![C64::new(0.0, 0.0); dim];
                op.apply_add(1.0, state, &mut out);
                out
            })
            .collect();
        let mut imag_residue = 0.0f64;
        let expectations: Vec<f64> = applied
            .iter()
            .map(|u| {
                let e = inner(state, u);
                imag_residue = imag_residue.max(e.im.abs());
                e.re
            })
            .collect();

        let rows: Vec<Vec<f64>> = (0..t)
            .into_par_iter()
            .map(|i| {
                (i..t)
                    .map(|j| inner(&applied[i], &applied[j]).re - expectations[i] * expectations[j])
                    .collect()
            })
            .collect();
        let mut matrix = RealMatrix::zeros(t, t);
        for (i, row) in rows.iter().enumerate() {
            for (offset, &v) in row.iter().enumerate() {
                matrix[(i, i + offset)] = v;
                matrix[(i + offset, i)] = v;
            }
        }
        let eigen = linalg::sym_eig(&matrix)?;
        Ok(Self { matrix, eigen, expectations, imag_residue, basis_size: t, dim })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// Ascending eigen-pairs `{w_n, μ_n}`.
    pub fn eigen(&self) -> &EigenDecomposition<f64> {
        &self.eigen
    }

    /// `m_i = ⟨H_i⟩_ψ`.
    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }

    /// Largest imaginary part discarded from the expectations.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn state_dim(&self) -> usize {
        self.dim
    }

    pub fn mu0(&self) -> f64 {
        self.eigen.values[0]
    }

    pub fn mu_max(&self) -> f64 {
        *self.eigen.values.last().expect("non-empty basis")
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.matrix.hermitian_defect()
    }
}

/// QCM of `basis` with respect to a KME.
pub fn build_qcm(basis: &OperatorBasis, kme: &crate::kme::KmeVector) -> Result<Qcm> {
    Qcm::build(basis, &kme.state())
}

#[derive(Clone, Debug)]
pub struct NullSpaceResult {
    pub vectors: Vec<Vec<f64>>,
    pub mu0: f64,
    pub mu_max: f64,
    pub rel_tol: f64,
}

impl NullSpaceResult {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }
}

/// Eigenvectors of the QCM whose eigenvalue is at most `rel_tol · μ_max`.
pub fn null_space(q: &Qcm, rel_tol: f64) -> NullSpaceResult {
    let mu_max = q.mu_max();
    let cutoff = rel_tol * mu_max.max(0.0);
    let vectors = q
        .eigen
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &mu)| mu <= cutoff)
        .map(|(n, _)| q.eigen.vector(n))
        .collect();
    NullSpaceResult { vectors, mu0: q.mu0(), mu_max, rel_tol }
}

/// Flip the sign so the largest-magnitude entry is positive.
pub fn fix_sign(w: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in w.iter().enumerate() {
        if v.abs() > w[best].abs() {
            best = i;
        }
    }
    if w.get(best).is_some_and(|&v| v < 0.0) {
        for v in w.iter_mut() {
            *v = -*v;
        }
    }
}

/// How a coefficient vector is picked from a multi-dimensional null space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Scan the null-space eigenvectors (each sign-fixed) and keep the one
    /// whose Hamiltonian has the state at the smallest eigen-index.
    #[default]
    LowestIndexBasis,
    /// Unit null-space vector minimising the state's energy `w·m`, i.e.
    /// `−P_N m / ‖P_N m‖`. Varies continuously with the state.
    MinEnergyProjection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Selection {
    pub w: Vec<f64>,
    /// Null space was empty; `w` is the eigenvector of `μ_0`.
    pub approximate: bool,
    /// `Var(H_w)_ψ = wᵀ M w`.
    pub variance: f64,
    /// Eigen-index of the state in `H_w` (number of levels strictly below it).
    pub state_index: usize,
    /// `⟨H_w⟩_ψ`.
    pub energy: f64,
    pub null_dimension: usize,
    /// More than one candidate reached the smallest index.
    pub tie: bool,
    pub rule: SelectionRule,
}

fn state_index(w: &[f64], q: &Qcm, basis: &OperatorBasis) -> Result<(usize, f64)> {
    let energy: f64 = w.iter().zip(q.expectations()).map(|(a, b)| a * b).sum();
    let h = SpinHamiltonian::dense_from(w, basis)?;
    let tri = linalg::hermitian_tridiagonal(&h)?;
    let scale = h.frobenius_norm().max(1.0);
    Ok((tri.count_below(energy - 1e-8 * scale), energy))
}

/// Picks the Hamiltonian coefficient vector for the state the QCM was built on.
pub fn select_hamiltonian(ns: &NullSpaceResult, q: &Qcm, basis: &OperatorBasis, rule: SelectionRule) -> Result<Selection> {
    if q.basis_size() != basis.len() {
        return Err(Error::Dimension(format!("QCM of size {} against a basis of {}", q.basis_size(), basis.len())));
    }
    if ns.dimension() == 0 {
        let mut w = q.eigen().vector(0);
        fix_sign(&mut w);
        let (idx, energy) = state_index(&w, q, basis)?;
        return Ok(Selection {
            variance: variance_of(&w, q)?,
            w,
            approximate: true,
            state_index: idx,
            energy,
            null_dimension: 0,
            tie: false,
            rule,
        });
    }

    if rule == SelectionRule::MinEnergyProjection {
        let m = q.expectations();
        let mut proj = vec![0.0; m.len()];
        for v in &ns.vectors {
            let c: f64 = v.iter().zip(m).map(|(a, b)| a * b).sum();
            for (p, &vi) in proj.iter_mut().zip(v) {
                *p -= c * vi;
            }
        }
        let norm = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m_norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * m_norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
            for p in proj.iter_mut() {
                *p /= norm;
            }
            let (idx, energy) = state_index(&proj, q, basis)?;
            return Ok(Selection {
                variance: variance_of(&proj, q)?,
                w: proj,
                approximate: false,
                state_index: idx,
                energy,
                null_dimension: ns.dimension(),
                tie: false,
                rule,
            });
        }
        // every null-space Hamiltonian gives the state zero energy: fall through
    }

    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    let mut tie = false;
    for v in &ns.vectors {
        let mut w = v.clone();
        fix_sign(&mut w);
        let (idx, energy) = state_index(&w, q, basis)?;
        match &best {
            Some((b, _, _)) if idx > *b => {}
            Some((b, _, _)) if idx == *b => tie = true,
            _ => {
                tie = false;
                best = Some((idx, w, energy));
            }
        }
    }
    let (idx, w, energy) = best.expect("null space is non-empty");
    Ok(Selection {
        variance: variance_of(&w, q)?,
        w,
        approximate: false,
        state_index: idx,
        energy,
        null_dimension: ns.dimension(),
        tie,
        rule: SelectionRule::LowestIndexBasis,
    })
}

/// `Var(H_w)_ψ = wᵀ M w`.
pub fn variance_of(w: &[f64], q: &Qcm) -> Result<f64> {
    let mw = q.matrix().mul_vec(w)?;
    Ok(w.iter().zip(&mw).map(|(a, b)| a * b).sum())
}

/// Rank-one deflation `M′ = M − μ_0 w_0 w_0ᵀ`.
#[derive(Clone, Debug)]
pub struct PerturbedQcm {
    pub matrix: RealMatrix,
    /// `{0, μ_1, …, μ_{T−1}}`.
    pub values: Vec<f64>,
    /// `M′` need not be the QCM of any orthonormal operator set.
    pub not_necessarily_valid: bool,
}

pub fn perturb_qcm(q: &Qcm) -> PerturbedQcm {
    let mu0 = q.mu0();
    let w0 = q.eigen().vector(0);
    let t = q.basis_size();
    let matrix = RealMatrix::from_fn(t, t, |i, j| q.matrix()[(i, j)] - mu0 * w0[i] * w0[j]);
    let mut values = q.eigen().values.clone();
    values[0] = 0.0;
    PerturbedQcm { matrix, values, not_necessarily_valid: true }
}

/// JSON export of a QCM fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QcmRecord {
    pub basis_hash: String,
    pub spectrum_head: Vec<f64>,
    pub mu_max: f64,
    pub null_dimension: usize,
    pub selection: Selection,
}

impl QcmRecord {
    pub fn new(basis: &OperatorBasis, q: &Qcm, selection: &Selection, head: usize) -> Self {
        Self {
            basis_hash: basis.descriptor().hash(),
            spectrum_head: q.eigen().values.iter().take(head).copied().collect(),
            mu_max: q.mu_max(),
            null_dimension: selection.null_dimension,
            selection: selection.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::build_basis;

    fn up(dim: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn single_spin_expectations() {
        let b = build_basis(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((expectation(&b.operators()[2], &up(2)).unwrap() - s).abs() < 1e-15);
        assert_eq!(expectation(&b.operators()[0], &up(2)).unwrap(), 0.0);
        assert!(matches!(expectation(&b.operators()[0], &up(4)), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_spin_qcm() {
        let b = build_basis(1, 1).unwrap();
        let q = Qcm::build(&b, &up(2)).unwrap();
        let expect = [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]];
        for (i, row) in expect.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert!((q.matrix()[(i, j)] - e).abs() <= 1e-12);
            }
        }
        let ns = null_space(&q, DEFAULT_NULL_TOL);
        assert_eq!(ns.dimension(), 1);
        assert!((ns.vectors[0][2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_spin_selection_keeps_canonical_sign() {
        let b = build_basis(1, 1).unwrap();
        let q = Qcm::build(&b, &up(2)).unwrap();
        let ns = null_space(&q, DEFAULT_NULL_TOL);
        let sel = select_hamiltonian(&ns, &q, &b, SelectionRule::LowestIndexBasis).unwrap();
        assert!((sel.w[2] - 1.0).abs() < 1e-12);
        // ψ = e0 is the upper level of σ^z/√2
        assert_eq!(sel.state_index, 1);
        assert!(!sel.approximate && !sel.tie);
        assert!(sel.variance.abs() < 1e-12);

        let sel = select_hamiltonian(&ns, &q, &b, SelectionRule::MinEnergyProjection).unwrap();
        assert!((sel.w[2] + 1.0).abs() < 1e-12);
        assert_eq!(sel.state_index, 0);
    }

    #[test]
    fn simultaneous_eigenstate_gives_full_null_space() {
        // no unit state is a common eigenvector of X, Y and Z; the zero state
        // is the only way to make every covariance vanish
        let b = build_basis(2, 1).unwrap();
        let zero = vec![C64::new(0.0, 0.0); 4];
        let q = Qcm::build(&b, &zero).unwrap();
        assert!(q.matrix().data().iter().all(|&v| v == 0.0));
        assert_eq!(null_space(&q, DEFAULT_NULL_TOL).dimension(), b.len());
    }

    #[test]
    fn deflation_zeroes_lowest_level() {
        let b = build_basis(2, 2).unwrap();
        let state: Vec<C64> = [0.3, 0.5, -0.2, 0.7].iter().map(|&x| C64::new(x, 0.1 * x)).collect();
        let norm = linalg::norm(&state);
        let state: Vec<C64> = state.iter().map(|z| z / norm).collect();
        let q = Qcm::build(&b, &state).unwrap();
        let p = perturb_qcm(&q);
        assert!(p.not_necessarily_valid);
        let w0 = q.eigen().vector(0);
        let mw = p.matrix.mul_vec(&w0).unwrap();
        assert!(mw.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-10);
        let eig = linalg::sym_eig(&p.matrix).unwrap();
        let mut expect = q.eigen().values.clone();
        expect[0] = 0.0;
        expect.sort_by(f64::total_cmp);
        for (a, e) in eig.values.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-10);
        }
    }

    #[test]
    fn extremal_variance_is_rayleigh_quotient() {
        let b = build_basis(2, 2).unwrap();
        let state: Vec<C64> = [0.1, 0.9, 0.3, 0.2].iter().map(|&x| C64::new(x, 0.0)).collect();
        let norm = linalg::norm(&state);
        let state: Vec<C64> = state.iter().map(|z| z / norm).collect();
        let q = Qcm::build(&b, &state).unwrap();
        let top = q.eigen().vector(q.basis_size() - 1);
        assert!((variance_of(&top, &q).unwrap() - q.mu_max()).abs() < 1e-12);
        assert!(variance_of(&[1.0], &q).is_err());
    }

    #[test]
    fn fix_sign_makes_largest_entry_positive() {
        let mut w = vec![0.1, -0.9, 0.3];
        fix_sign(&mut w);
        assert_eq!(w, vec![-0.1, 0.9, -0.3]);
        fix_sign(&mut w);
        assert_eq!(w, vec![-0.1, 0.9, -0.3]);
    }
}
