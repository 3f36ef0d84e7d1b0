//! Dense kernels for small Hermitian and real symmetric matrices.
//!
//! Both eigensolvers share one path: Householder reduction to a real
//! symmetric tridiagonal matrix, then implicit QL with Wilkinson shifts.
//! Complex subdiagonals left by the reduction are rotated onto the real
//! axis with a diagonal unitary before the QL stage, so the QL rotations
//! are always real.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative tolerance used when validating Hermitian / symmetric input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 100;

/// Field operations needed by the kernels; implemented for `f64` and [`C64`].
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn norm_sqr(self) -> f64 {
        C64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ComplexMatrix = Matrix<C64>;
pub type RealMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|A[i][j] - conj(A[j][i])|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in i..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).abs());
            }
        }
        worst
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl RealMatrix {
    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Ascending eigenvalues with the matching eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub values: Vec<f64>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, n: usize) -> Vec<T> {
        self.vectors.column(n)
    }

    /// `‖A·V − V·diag(values)‖_F`.
    pub fn residual(&self, a: &Matrix<T>) -> f64 {
        let av = a.matmul(&self.vectors).expect("shape checked at construction");
        let mut sum = 0.0;
        for i in 0..av.rows() {
            for j in 0..av.cols() {
                let r = av[(i, j)] - self.vectors[(i, j)].scale(self.values[j]);
                sum += r.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// `‖V†V − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.adjoint().matmul(&self.vectors).expect("square");
        let mut worst = 0.0f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Real symmetric tridiagonal matrix: diagonal `d`, subdiagonal `e`.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let scale = self
            .diag
            .iter()
            .chain(&self.sub)
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..n {
            if i > 0 {
                q = self.diag[i] - x - self.sub[i - 1] * self.sub[i - 1] / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.sub.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }
}

fn validate_hermitian<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("eigensolver needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if a.data().iter().any(|x| !x.re().is_finite() || !x.im().is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let defect = a.hermitian_defect();
    let bound = HERMITIAN_TOL * a.max_abs();
    if defect > bound {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian: defect {defect:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(())
}

/// Householder reduction `A = Q·T·Q†` with `T` real tridiagonal.
/// `Q` is only accumulated when requested.
fn tridiagonalize<T: Scalar>(a: &Matrix<T>, want_q: bool) -> (Tridiagonal, Option<Matrix<T>>) {
    let n = a.rows();
    let mut m = a.clone();
    // symmetrise so rounding asymmetries within tolerance cannot leak through
    for i in 0..n {
        let d = m[(i, i)].re();
        m[(i, i)] = T::from_real(d);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()).scale(0.5);
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut q = if want_q { Some(Matrix::<T>::identity(n)) } else { None };
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let tail_sq: f64 = ((k + 2)..n).map(|i| m[(i, k)].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = m[(k + 1, k)];
        let x0_abs = x0.abs();
        let xnorm = (x0_abs * x0_abs + tail_sq).sqrt();
        let phase = if x0_abs > 0.0 { x0.scale(1.0 / x0_abs) } else { T::one() };
        let alpha = -phase.scale(xnorm);

        let v = &mut v[..len];
        v[0] = phase.scale(x0_abs + xnorm);
        for i in 1..len {
            v[i] = m[(k + 1 + i, k)];
        }
        let vnorm = (v[0].norm_sqr() + tail_sq).sqrt();
        for vi in v.iter_mut() {
            *vi = vi.scale(1.0 / vnorm);
        }

        // p = B v over the trailing block, kappa = v† p
        let p = &mut p[..len];
        for i in 0..len {
            let row = &m.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(v.iter()).fold(T::zero(), |acc, (&b, &vj)| acc + b * vj);
        }
        let kappa = v.iter().zip(p.iter()).fold(0.0, |acc, (&vi, &pi)| acc + (vi.conj() * pi).re());
        for i in 0..len {
            p[i] -= v[i].scale(kappa);
        }
        // B <- B - 2 (v w† + w v†), with w stored in p
        for i in 0..len {
            let vi2 = v[i].scale(2.0);
            let wi2 = p[i].scale(2.0);
            let row = &mut m.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for ((b, &vj), &wj) in row.iter_mut().zip(v.iter()).zip(p.iter()) {
                *b -= vi2 * wj.conj() + wi2 * vj.conj();
            }
        }
        m[(k + 1, k)] = alpha;
        m[(k, k + 1)] = alpha.conj();
        for i in (k + 2)..n {
            m[(i, k)] = T::zero();
            m[(k, i)] = T::zero();
        }

        if let Some(q) = q.as_mut() {
            for r in 0..n {
                let row = &mut q.data[r * n + k + 1..r * n + n];
                let s = row.iter().zip(v.iter()).fold(T::zero(), |acc, (&qv, &vj)| acc + qv * vj).scale(2.0);
                for (qv, &vj) in row.iter_mut().zip(v.iter()) {
                    *qv -= s * vj.conj();
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re()).collect();
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    let mut phase = T::one();
    let mut phases = vec![T::one(); n];
    for i in 0..n.saturating_sub(1) {
        let s = m[(i + 1, i)];
        let s_abs = s.abs();
        if s_abs > 0.0 {
            phase *= s.scale(1.0 / s_abs);
        }
        phases[i + 1] = phase;
        sub.push(s_abs);
    }
    if let Some(q) = q.as_mut() {
        for r in 0..n {
            for (c, &ph) in phases.iter().enumerate() {
                q[(r, c)] *= ph;
            }
        }
    }
    (Tridiagonal { diag, sub }, q)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `e[i]` couples `d[i]` and `d[i+1]`; `e` has length `n` with `e[n-1]` unused.
/// `zt`, if given, holds eigenvector rows (row `i` is the i-th eigenvector
/// in the tridiagonal basis) and is rotated in place.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // absolute floor so blocks of near-zero eigenvalues still deflate
    let floor = f64::EPSILON * d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::Convergence(format!(
                    "eigenvalue {l} not isolated after {MAX_QL_ITERATIONS} QL iterations"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (head, tail) = z.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zi1 = &mut tail[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn eigh<T: Scalar>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    validate_hermitian(a)?;
    let n = a.rows();
    let (tri, q) = tridiagonalize(a, true);
    let q = q.expect("requested");
    let mut d = tri.diag;
    let mut e = tri.sub;
    e.push(0.0);
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    implicit_ql(&mut d, &mut e, Some(&mut zt))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::<T>::zeros(n, n);
    for r in 0..n {
        let q_row = q.row(r);
        for (c, &src) in order.iter().enumerate() {
            let z_row = &zt[src * n..(src + 1) * n];
            vectors[(r, c)] = q_row.iter().zip(z_row).fold(T::zero(), |acc, (&qv, &zv)| acc + qv.scale(zv));
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition<C64>> {
    eigh(a)
}

/// Eigen-decomposition of a real symmetric matrix; eigenvectors are real.
pub fn sym_eig(a: &RealMatrix) -> Result<EigenDecomposition<f64>> {
    eigh(a)
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_tridiagonal(a)?.eigenvalues()
}

/// Unitary reduction of a Hermitian matrix to real tridiagonal form
/// (same spectrum).
pub fn hermitian_tridiagonal(a: &ComplexMatrix) -> Result<Tridiagonal> {
    validate_hermitian(a)?;
    Ok(tridiagonalize(a, false).0)
}

/// Hilbert–Schmidt inner product `Tr(A·B†) = Σ A[i][j]·conj(B[i][j])`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_same_shape(b)?;
    Ok(a.data().iter().zip(b.data()).map(|(&x, &y)| x * y.conj()).sum())
}

/// `Σ conj(a_i)·b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
