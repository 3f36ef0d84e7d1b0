//! Dense reference constructions that share no code with the library's
//! bit-mask operators.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<C>>;

pub fn pauli(label: char) -> Dense {
    let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    match label {
        'I' => vec![vec![l, o], vec![o, l]],
        'X' => vec![vec![o, l], vec![l, o]],
        'Y' => vec![vec![o, -i], vec![i, o]],
        'Z' => vec![vec![l, o], vec![o, -l]],
        _ => panic!("bad label {label}"),
    }
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn add_scaled(acc: &mut Dense, m: &Dense, s: f64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (x, y) in ra.iter_mut().zip(rm) {
            *x += y * s;
        }
    }
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn apply(a: &Dense, v: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn braket(u: &[C], a: &Dense, v: &[C]) -> C {
    u.iter().zip(apply(a, v)).map(|(x, y)| x.conj() * y).sum()
}

/// Normalised open-chain sum of `pattern` (site 1 = leftmost Kronecker factor).
pub fn dense_operator(pattern: &str, chain: usize) -> Dense {
    let labels: Vec<char> = pattern.chars().collect();
    let k = labels.len();
    let dim = 1 << chain;
    let positions = chain - k + 1;
    let mut acc = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for start in 0..positions {
        let mut m = vec![vec![C::new(1.0, 0.0)]];
        for site in 0..chain {
            let l = if site >= start && site < start + k { labels[site - start] } else { 'I' };
            m = kron(&m, &pauli(l));
        }
        add_scaled(&mut acc, &m, 1.0);
    }
    let s = 1.0 / ((positions * dim) as f64).sqrt();
    for row in acc.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    acc
}

/// All patterns of arity `1..=k_max`, arity-major, X < Y < Z.
pub fn patterns(k_max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        let mut level = vec![String::new()];
        for _ in 0..k {
            level = level.iter().flat_map(|p| ['X', 'Y', 'Z'].map(|c| format!("{p}{c}"))).collect();
        }
        out.extend(level);
    }
    out
}

/// `M_ij = ½⟨{H_i, H_j}⟩ − ⟨H_i⟩⟨H_j⟩`, evaluated with dense products.
pub fn dense_qcm(ops: &[Dense], psi: &[C]) -> Vec<Vec<C>> {
    let t = ops.len();
    let m: Vec<C> = ops.iter().map(|h| braket(psi, h, psi)).collect();
    let mut out = vec![vec![C::new(0.0, 0.0); t]; t];
    for i in 0..t {
        for j in 0..t {
            let anti = braket(psi, &matmul(&ops[i], &ops[j]), psi) + braket(psi, &matmul(&ops[j], &ops[i]), psi);
            out[i][j] = anti * 0.5 - m[i] * m[j];
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn random_state(dim: usize, r: &mut ChaCha8Rng) -> Vec<C> {
    let v: Vec<C> = (0..dim).map(|_| C::new(normal(r), normal(r))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_unit(len: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| normal(r)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> spinchain::linalg::ComplexMatrix {
    let mut a = spinchain::linalg::ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C::new(normal(r), 0.0);
        for j in 0..i {
            let z = C::new(normal(r), normal(r));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
