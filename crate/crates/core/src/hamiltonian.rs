//! Spin Hamiltonians `H = Σ w_i H_i` and their phase-fixed eigen-systems.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, inner, ComplexMatrix, C64};
use crate::pauli::OperatorBasis;

/// Energies closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpinHamiltonian {
    w: Vec<f64>,
    basis: Arc<OperatorBasis>,
    approximate: bool,
    variance: f64,
}

impl SpinHamiltonian {
    /// Normalises `w` if needed; a zero vector is rejected.
    pub fn assemble(w: &[f64], basis: Arc<OperatorBasis>) -> Result<Self> {
        if w.len() != basis.len() {
            return Err(Error::Dimension(format!("{} coefficients for a basis of {}", w.len(), basis.len())));
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Parameter("coefficient vector cannot be normalised".into()));
        }
        let w = if (norm - 1.0).abs() > 1e-12 { w.iter().map(|x| x / norm).collect() } else { w.to_vec() };
        Ok(Self { w, basis, approximate: false, variance: 0.0 })
    }

    /// Records how the coefficients were obtained.
    pub fn with_fit(mut self, approximate: bool, variance: f64) -> Self {
        self.approximate = approximate;
        self.variance = variance;
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.w
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn approximate(&self) -> bool {
        self.approximate
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `H · state`, matrix-free.
    pub fn apply(&self, state: &[C64]) -> Result<Vec<C64>> {
        if state.len() != self.dim() {
            return Err(Error::Dimension(format!("state of length {} for dimension {}", state.len(), self.dim())));
        }
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for (op, &c) in self.basis.operators().iter().zip(&self.w) {
            if c != 0.0 {
                op.apply_add(c, state, &mut out);
            }
        }
        Ok(out)
    }

    pub fn dense(&self) -> ComplexMatrix {
        Self::dense_from(&self.w, &self.basis).expect("length checked at assembly")
    }

    /// Dense `Σ w_i H_i` without normalising `w`.
    pub fn dense_from(w: &[f64], basis: &OperatorBasis) -> Result<ComplexMatrix> {
        if w.len() != basis.len() {
            return Err(Error::Dimension(format!("{} coefficients for a basis of {}", w.len(), basis.len())));
        }
        let mut m = ComplexMatrix::zeros(basis.dim(), basis.dim());
        for (op, &c) in basis.operators().iter().zip(w) {
            if c != 0.0 {
                op.accumulate_dense(c, &mut m);
            }
        }
        Ok(m)
    }

    /// `⟨H²⟩_ψ − ⟨H⟩_ψ²` for a unit state.
    pub fn variance_in(&self, state: &[C64]) -> Result<f64> {
        let hs = self.apply(state)?;
        let mean = inner(state, &hs).re;
        Ok(inner(&hs, &hs).re - mean * mean)
    }

    pub fn eig_modes(&self) -> Result<EigenSystem> {
        eig_modes(&self.dense())
    }
}

pub fn assemble(w: &[f64], basis: Arc<OperatorBasis>) -> Result<SpinHamiltonian> {
    SpinHamiltonian::assemble(w, basis)
}

/// Rotate `v` so its largest-magnitude component is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    let Some(&pivot) = v.get(best) else { return };
    let mag = pivot.norm();
    if mag == 0.0 {
        return;
    }
    let rot = pivot.conj() / mag;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = C64::new(v[best].norm(), 0.0);
}

/// Ascending energies with orthonormal, phase-fixed modes.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    /// Modes as columns.
    #[serde(skip)]
    pub modes: ComplexMatrix,
    /// Index ranges `[start, end)` of levels sharing an energy within [`DEGENERACY_TOL`].
    pub degenerate_blocks: Vec<(usize, usize)>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn mode(&self, n: usize) -> Vec<C64> {
        self.modes.column(n)
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_blocks.is_empty()
    }

    /// Whether level `n` shares its energy with another level.
    pub fn level_is_degenerate(&self, n: usize) -> bool {
        self.degenerate_blocks.iter().any(|&(s, e)| n >= s && n < e)
    }
}

/// Eigen-system of a dense Hermitian matrix with the phase convention applied.
pub fn eig_modes(h: &ComplexMatrix) -> Result<EigenSystem> {
    let eig = linalg::hermitian_eig(h)?;
    let n = eig.dim();
    let mut modes: Vec<Vec<C64>> = (0..n).map(|k| eig.vector(k)).collect();
    for m in modes.iter_mut() {
        fix_phase(m);
    }
    let mut energies = eig.values;

    let mut blocks = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] <= DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            blocks.push((start, end));
            let first_nonzero = |v: &Vec<C64>| v.iter().position(|z| z.norm() > 1e-12).unwrap_or(v.len());
            let mut block: Vec<(f64, Vec<C64>)> = energies[start..end].iter().copied().zip(modes[start..end].iter().cloned()).collect();
            block.sort_by_key(|(_, v)| first_nonzero(v));
            for (offset, (e, v)) in block.into_iter().enumerate() {
                energies[start + offset] = e;
                modes[start + offset] = v;
            }
        }
        start = end;
    }

    let mut matrix = ComplexMatrix::zeros(n, n);
    for (k, m) in modes.iter().enumerate() {
        matrix.set_column(k, m);
    }
    Ok(EigenSystem { energies, modes: matrix, degenerate_blocks: blocks })
}

/// `argmax_n |⟨ψ_n|ψ⟩|` and the overlap; first index wins ties.
pub fn locate_state(es: &EigenSystem, state: &[C64]) -> Result<(usize, f64)> {
    if state.len() != es.modes.rows() {
        return Err(Error::Dimension(format!("state of length {} for {} modes", state.len(), es.modes.rows())));
    }
    let mut best = (0usize, -1.0f64);
    for n in 0..es.len() {
        let ov = inner(&es.mode(n), state).norm();
        if ov > best.1 {
            best = (n, ov);
        }
    }
    Ok((best.0, best.1.min(1.0)))
}
