//! First-order perturbation corrections and the mode-uncertainty functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::EigenSystem;
use crate::kme::{DomainGrid, KmeVector};
use crate::linalg::{ComplexMatrix, C64};

/// Energy gaps at or below this are treated as degenerate.
pub const GAP_TOL: f64 = 1e-8;
pub const DEFAULT_STRENGTH: f64 = 0.01;
pub const DEFAULT_FLOOR: f64 = 1e-12;
pub const DEFAULT_MODES: usize = 8;

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PerturbationKind {
    /// `diag(ψ♯)`, a potential shaped like the data.
    #[default]
    DiagonalKme,
    SeededRandomHermitian { seed: u64 },
    #[serde(skip)]
    Explicit(ComplexMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationSpec {
    #[serde(flatten)]
    pub kind: PerturbationKind,
    /// `‖H′‖_F = strength · ‖H‖_F`.
    pub strength: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { kind: PerturbationKind::DiagonalKme, strength: DEFAULT_STRENGTH }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::Parameter(format!("perturbation strength must be finite and >= 0, got {}", self.strength)));
        }
        Ok(())
    }

    pub fn with_strength(&self, strength: f64) -> Self {
        Self { kind: self.kind.clone(), strength }
    }
}

/// Random Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Builds `H′` for the dense Hamiltonian `h` and state `psi`.
pub fn build_perturbation(spec: &PerturbationSpec, h: &ComplexMatrix, psi: &KmeVector) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = h.rows();
    if !h.is_square() {
        return Err(Error::Dimension(format!("Hamiltonian is {}x{}", h.rows(), h.cols())));
    }
    let raw = match &spec.kind {
        PerturbationKind::DiagonalKme => {
            if psi.len() != n {
                return Err(Error::Dimension(format!("state of length {} for dimension {n}", psi.len())));
            }
            let d: Vec<C64> = psi.values().iter().map(|&v| C64::new(v, 0.0)).collect();
            ComplexMatrix::from_diag(&d)
        }
        PerturbationKind::SeededRandomHermitian { seed } => random_hermitian(n, *seed),
        PerturbationKind::Explicit(m) => {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("explicit perturbation is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
            if m.hermitian_defect() > crate::linalg::HERMITIAN_TOL * m.max_abs().max(1.0) {
                return Err(Error::Validation("explicit perturbation is not Hermitian".into()));
            }
            m.clone()
        }
    };
    let raw_norm = raw.frobenius_norm();
    if spec.strength == 0.0 || raw_norm == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    Ok(raw.scaled(C64::new(spec.strength * h.frobenius_norm() / raw_norm, 0.0)))
}

/// What to do with a coupling between levels closer than [`GAP_TOL`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneratePolicy {
    #[default]
    Error,
    /// Drop the offending terms and count them.
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeCorrections {
    /// Unperturbed energies of the corrected levels.
    pub energies: Vec<f64>,
    /// `⟨ψ_n|H′|ψ_n⟩`.
    pub e1: Vec<f64>,
    /// `ψ_n + Σ_{m≠n} ⟨ψ_m|H′|ψ_n⟩/(E_n − E_m) ψ_m`.
    #[serde(skip)]
    pub corrected: Vec<Vec<C64>>,
    /// `|ψ_n^(1)(x_i)|`.
    pub psi1: Vec<Vec<f64>>,
    /// Degenerate couplings dropped under [`DegeneratePolicy::Skip`].
    pub skipped_couplings: usize,
}

impl ModeCorrections {
    pub fn len(&self) -> usize {
        self.e1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e1.is_empty()
    }
}

/// Corrections for every level; degenerate couplings are an error.
pub fn first_order(es: &EigenSystem, h_prime: &ComplexMatrix) -> Result<ModeCorrections> {
    first_order_lowest(es, h_prime, es.len(), DegeneratePolicy::Error)
}

/// Corrections for the `count` lowest levels.
pub fn first_order_lowest(es: &EigenSystem, h_prime: &ComplexMatrix, count: usize, policy: DegeneratePolicy) -> Result<ModeCorrections> {
    let dim = es.len();
    if h_prime.rows() != dim || h_prime.cols() != dim {
        return Err(Error::Dimension(format!("perturbation is {}x{}, expected {dim}x{dim}", h_prime.rows(), h_prime.cols())));
    }
    if count > dim {
        return Err(Error::Parameter(format!("asked for {count} levels of {dim}")));
    }
    let modes = &es.modes;
    // B[m][n] = ⟨ψ_m|H′|ψ_n⟩ for n < count
    let hp_modes: Vec<Vec<C64>> = (0..count).map(|n| h_prime.mul_vec(&modes.column(n))).collect::<Result<_>>()?;
    let columns: Vec<Vec<C64>> = (0..dim).map(|m| modes.column(m)).collect();
    let coupling_tol = 1e-12 * h_prime.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut e1 = Vec::with_capacity(count);
    let mut corrected = Vec::with_capacity(count);
    let mut skipped = 0;
    for n in 0..count {
        let en = es.energies[n];
        let mut v = columns[n].clone();
        let mut diag = 0.0;
        for (m, psi_m) in columns.iter().enumerate() {
            let b = crate::linalg::inner(psi_m, &hp_modes[n]);
            if m == n {
                diag = b.re;
                continue;
            }
            let gap = en - es.energies[m];
            if gap.abs() <= GAP_TOL {
                if b.norm() <= coupling_tol {
                    continue;
                }
                match policy {
                    DegeneratePolicy::Error => {
                        return Err(Error::Degeneracy { first: n.min(m), second: n.max(m), gap: gap.abs() });
                    }
                    DegeneratePolicy::Skip => {
                        skipped += 1;
                        continue;
                    }
                }
            }
            let c = b / gap;
            for (vi, &p) in v.iter_mut().zip(psi_m) {
                *vi += c * p;
            }
        }
        e1.push(diag);
        corrected.push(v);
    }
    let psi1 = corrected.iter().map(|v| v.iter().map(|z| z.norm()).collect()).collect();
    Ok(ModeCorrections { energies: es.energies[..count].to_vec(), e1, corrected, psi1, skipped_couplings: skipped })
}

/// Discrete second derivative with replicate-edge boundaries.
pub fn laplacian(f: &[f64], grid: &DomainGrid) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 3 {
        return Err(Error::Parameter(format!("laplacian needs at least 3 points, got {n}")));
    }
    if n != grid.len() {
        return Err(Error::Dimension(format!("{n} values on a grid of {}", grid.len())));
    }
    let h2 = grid.step() * grid.step();
    Ok((0..n)
        .map(|i| {
            let left = f[i.saturating_sub(1)];
            let right = f[(i + 1).min(n - 1)];
            (left - 2.0 * f[i] + right) / h2
        })
        .collect())
}

/// `V_n^(1)` curves with their biases.
#[derive(Clone, Debug, Serialize)]
pub struct ModeUncertainty {
    pub curves: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl ModeUncertainty {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

/// `V(x) = bias + (σ²/2)·∇²f(x)/max(f(x), floor)` with the bias making `min V = 0`.
pub fn uncertainty_curve(magnitude: &[f64], grid: &DomainGrid, sigma: f64, floor: f64) -> Result<(Vec<f64>, f64)> {
    let lap = laplacian(magnitude, grid)?;
    let half_s2 = 0.5 * sigma * sigma;
    let ratio: Vec<f64> = lap.iter().zip(magnitude).map(|(l, &f)| half_s2 * l / f.max(floor)).collect();
    let above = ratio.iter().zip(magnitude).filter(|(_, &f)| f > floor).map(|(&r, _)| r);
    let min = above.fold(f64::INFINITY, f64::min);
    let min = if min.is_finite() { min } else { ratio.iter().copied().fold(f64::INFINITY, f64::min) };
    let bias = -min;
    Ok((ratio.iter().map(|r| (bias + r).max(0.0)).collect(), bias))
}

pub fn mode_uncertainty(mc: &ModeCorrections, grid: &DomainGrid, sigma: f64, floor: f64) -> Result<ModeUncertainty> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("kernel width must be positive, got {sigma}")));
    }
    let mut curves = Vec::with_capacity(mc.len());
    let mut bias = Vec::with_capacity(mc.len());
    for f in &mc.psi1 {
        let (v, b) = uncertainty_curve(f, grid, sigma, floor)?;
        curves.push(v);
        bias.push(b);
    }
    Ok(ModeUncertainty { curves, bias })
}

/// `(1/M) Σ_{n<M} Σ_i ψ_i² V_n(x_i)`.
pub fn window_uq(v: &ModeUncertainty, psi: &KmeVector, modes: usize) -> Result<f64> {
    if modes == 0 || modes > v.len() {
        return Err(Error::Parameter(format!("asked for {modes} modes of {}", v.len())));
    }
    let mut total = 0.0;
    for curve in &v.curves[..modes] {
        if curve.len() != psi.len() {
            return Err(Error::Dimension(format!("curve of length {} against a state of {}", curve.len(), psi.len())));
        }
        total += curve.iter().zip(psi.values()).map(|(vi, p)| p * p * vi).sum::<f64>();
    }
    Ok(total / modes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::eig_modes;
    use crate::kme::{compute_kme, make_grid};

    fn diag2() -> EigenSystem {
        eig_modes(&ComplexMatrix::from_diag(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])).unwrap()
    }

    #[test]
    fn zero_perturbation_leaves_modes() {
        let es = diag2();
        let mc = first_order(&es, &ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(mc.e1, vec![0.0, 0.0]);
        assert_eq!(mc.corrected[0], es.mode(0));
        assert_eq!(mc.corrected[1], es.mode(1));
    }

    #[test]
    fn two_level_sigma_x() {
        let es = diag2();
        let eps = 1e-3;
        let hp = ComplexMatrix::from_fn(2, 2, |i, j| if i != j { C64::new(eps, 0.0) } else { C64::new(0.0, 0.0) });
        let mc = first_order(&es, &hp).unwrap();
        assert!(mc.e1.iter().all(|e| e.abs() < 1e-15));
        // ground mode picks up -eps of the excited level
        assert!((mc.corrected[0][0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((mc.corrected[0][1] - C64::new(-eps, 0.0)).norm() < 1e-15);
        // exact ground state of [[0, eps], [eps, 1]]
        let lam = 0.5 - (0.25 + eps * eps).sqrt();
        let exact = [1.0, lam / eps];
        let nrm = (exact[0] * exact[0] + exact[1] * exact[1]).sqrt();
        assert!((mc.corrected[0][1].re - exact[1] / nrm).abs() < 10.0 * eps * eps);
    }

    #[test]
    fn commuting_perturbation() {
        let h = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
        let es = eig_modes(&h).unwrap();
        let mc = first_order(&es, &h).unwrap();
        for n in 0..3 {
            assert!((mc.e1[n] - es.energies[n]).abs() < 1e-14);
            for (a, b) in mc.corrected[n].iter().zip(es.mode(n)) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_levels_error() {
        let h = ComplexMatrix::from_diag(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let es = eig_modes(&h).unwrap();
        let hp = random_hermitian(3, 5);
        match first_order(&es, &hp) {
            Err(Error::Degeneracy { first: 0, second: 1, .. }) => {}
            other => panic!("expected degeneracy error, got {other:?}"),
        }
        let mc = first_order_lowest(&es, &hp, 3, DegeneratePolicy::Skip).unwrap();
        assert_eq!(mc.skipped_couplings, 2);
    }

    #[test]
    fn perturbation_scaling() {
        let h = random_hermitian(8, 1);
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        let psi = compute_kme(&[0.5], &grid, 1.0).unwrap();
        let spec = PerturbationSpec::default();
        let hp = build_perturbation(&spec, &h, &psi).unwrap();
        assert!((hp.frobenius_norm() - 0.01 * h.frobenius_norm()).abs() < 1e-12);
        let zero = build_perturbation(&spec.with_strength(0.0), &h, &psi).unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let random = PerturbationSpec { kind: PerturbationKind::SeededRandomHermitian { seed: 9 }, strength: 0.1 };
        let a = build_perturbation(&random, &h, &psi).unwrap();
        let b = build_perturbation(&random, &h, &psi).unwrap();
        assert_eq!(a, b);
        assert!(a.hermitian_defect() == 0.0);
    }

    #[test]
    fn uniform_state_gives_identity_multiple() {
        let h = random_hermitian(4, 2);
        let grid = make_grid(0.0, 1.0, 4).unwrap();
        let psi = compute_kme(&[0.5], &grid, 1e6).unwrap();
        let hp = build_perturbation(&PerturbationSpec::default(), &h, &psi).unwrap();
        let d = hp[(0, 0)];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { d } else { C64::new(0.0, 0.0) };
                assert!((hp[(i, j)] - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn explicit_must_be_hermitian() {
        let h = random_hermitian(2, 3);
        let grid = make_grid(0.0, 1.0, 2).unwrap();
        let psi = compute_kme(&[0.5], &grid, 1.0).unwrap();
        let bad = ComplexMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        let spec = PerturbationSpec { kind: PerturbationKind::Explicit(bad), strength: 0.1 };
        assert!(matches!(build_perturbation(&spec, &h, &psi), Err(Error::Validation(_))));
    }

    #[test]
    fn laplacian_cases() {
        let grid = make_grid(-1.0, 1.0, 16).unwrap();
        let x = grid.points();
        let lin: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let l = laplacian(&lin, &grid).unwrap();
        assert!(l[1..15].iter().all(|v| v.abs() < 1e-9));
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let l = laplacian(&sq, &grid).unwrap();
        assert!(l[1..15].iter().all(|v| (v - 2.0).abs() < 1e-10));
        let c = vec![2.5; 16];
        assert!(laplacian(&c, &grid).unwrap().iter().all(|&v| v == 0.0));
        let short = make_grid(0.0, 1.0, 2).unwrap();
        assert!(laplacian(&[1.0, 2.0], &short).is_err());
    }

    #[test]
    fn gaussian_bump_peaks_in_tails() {
        let grid = make_grid(-4.0, 4.0, 64).unwrap();
        let s = 1.0;
        let g: Vec<f64> = grid.points().iter().map(|x| (-x * x / (2.0 * s * s)).exp()).collect();
        let (v, _) = uncertainty_curve(&g, &grid, 1.0, DEFAULT_FLOOR).unwrap();
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.0);
        // analytic ratio x²/s⁴ − 1/s²: minimum at the centre, growing outwards
        let centre = v[31].min(v[32]);
        assert!(centre < 1e-2);
        assert!(v[2] > v[16] && v[16] > v[28]);
        assert!(v[61] > v[47] && v[47] > v[35]);
        let ref_offset = v[31] - 0.5 * (grid.points()[31].powi(2) - 1.0);
        for i in 8..56 {
            let x = grid.points()[i];
            let offset = v[i] - 0.5 * (x * x - 1.0);
            assert!((offset - ref_offset).abs() < 0.05, "i = {i}");
        }
    }

    #[test]
    fn uq_trivial_cases() {
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        let psi = compute_kme(&[0.2, 0.7], &grid, 0.3).unwrap();
        let zero = ModeUncertainty { curves: vec![vec![0.0; 8]; 3], bias: vec![0.0; 3] };
        assert_eq!(window_uq(&zero, &psi, 3).unwrap(), 0.0);
        let c = ModeUncertainty { curves: vec![vec![1.5; 8]; 3], bias: vec![0.0; 3] };
        assert!((window_uq(&c, &psi, 2).unwrap() - 1.5).abs() < 1e-12);
        assert!(window_uq(&c, &psi, 4).is_err());
    }

    #[test]
    fn constant_magnitude_gives_zero_curve() {
        let grid = make_grid(0.0, 1.0, 8).unwrap();
        let (v, b) = uncertainty_curve(&[0.3; 8], &grid, 0.5, DEFAULT_FLOOR).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
        assert_eq!(b, 0.0);
    }
}
