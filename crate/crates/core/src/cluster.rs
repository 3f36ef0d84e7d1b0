//! Dominance and wavelet features, average-linkage clustering, and the
//! CCC / silhouette / ARI trio.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::changepoint::{run_pipeline, PipelineConfig, PipelineOutput};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::pauli::OperatorBasis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMethod {
    SpinDominance,
    Dwt,
}

/// What "dominant mode at x" means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    /// `argmax_n V_n^(1)(x)`.
    #[default]
    Uncertainty,
    /// `argmax_n |ψ_n(x)|²`.
    Magnitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub method: FeatureMethod,
}

/// Histogram of the dominant mode over all grid points of all windows.
pub fn dominance_histogram(out: &PipelineOutput, modes: usize, source: Dominance) -> Result<FeatureVector> {
    if out.windows.is_empty() {
        return Err(Error::DegenerateData("every window was skipped".into()));
    }
    let mut counts = vec![0u64; modes];
    for w in &out.windows {
        if w.uncertainty.len() < modes || w.modes.len() < modes {
            return Err(Error::Validation(format!("window keeps fewer than {modes} modes")));
        }
        let points = w.uncertainty[0].len();
        for i in 0..points {
            let score = |n: usize| match source {
                Dominance::Uncertainty => w.uncertainty[n][i],
                Dominance::Magnitude => w.modes[n][i].norm_sqr(),
            };
            let mut best = 0;
            for n in 1..modes {
                if score(n) > score(best) {
                    best = n;
                }
            }
            counts[best] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    Ok(FeatureVector { values: counts.iter().map(|&c| c as f64 / total as f64).collect(), method: FeatureMethod::SpinDominance })
}

pub fn dominance_features(series: &[f64], cfg: &PipelineConfig, basis: &Arc<OperatorBasis>, source: Dominance) -> Result<FeatureVector> {
    let out = run_pipeline(series, cfg, basis)?;
    dominance_histogram(&out, cfg.modes, source)
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Daubechies-2 (four-tap) low-pass analysis filter.
pub fn db2_lowpass() -> [f64; 4] {
    let s = 4.0 * std::f64::consts::SQRT_2;
    [(1.0 + SQRT3) / s, (3.0 + SQRT3) / s, (3.0 - SQRT3) / s, (1.0 - SQRT3) / s]
}

/// Quadrature-mirror high-pass partner `g_j = (−1)^j h_{3−j}`.
pub fn db2_highpass() -> [f64; 4] {
    let h = db2_lowpass();
    [h[3], -h[2], h[1], -h[0]]
}

/// One periodic analysis step; odd inputs are padded by repeating the last sample.
pub fn dwt_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut x = x.to_vec();
    if x.len() % 2 == 1 {
        x.push(*x.last().expect("non-empty"));
    }
    let n = x.len();
    let (h, g) = (db2_lowpass(), db2_highpass());
    let mut a = vec![0.0; n / 2];
    let mut d = vec![0.0; n / 2];
    for k in 0..n / 2 {
        for j in 0..4 {
            let v = x[(2 * k + j) % n];
            a[k] += h[j] * v;
            d[k] += g[j] * v;
        }
    }
    (a, d)
}

/// Inverse of [`dwt_step`] for even-length signals.
pub fn idwt_step(a: &[f64], d: &[f64]) -> Vec<f64> {
    let n = 2 * a.len();
    let (h, g) = (db2_lowpass(), db2_highpass());
    let mut x = vec![0.0; n];
    for k in 0..a.len() {
        for j in 0..4 {
            x[(2 * k + j) % n] += h[j] * a[k] + g[j] * d[k];
        }
    }
    x
}

/// Full periodic db2 decomposition `[a_J, d_J, …, d_1]`, scaled to unit norm.
pub fn dwt_features(series: &[f64]) -> Result<FeatureVector> {
    if series.len() < 4 {
        return Err(Error::Parameter(format!("DWT needs at least 4 samples, got {}", series.len())));
    }
    let mut details = Vec::new();
    let mut approx = series.to_vec();
    while approx.len() >= 4 {
        let (a, d) = dwt_step(&approx);
        details.push(d);
        approx = a;
    }
    let mut values = approx;
    for d in details.iter().rev() {
        values.extend_from_slice(d);
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in values.iter_mut() {
            *v /= norm;
        }
    }
    Ok(FeatureVector { values, method: FeatureMethod::Dwt })
}

/// Euclidean distance matrix.
pub fn pairwise_distances(features: &[FeatureVector]) -> Result<RealMatrix> {
    let n = features.len();
    if let Some(first) = features.first() {
        for f in features {
            if f.method != first.method {
                return Err(Error::Validation("features mix extraction methods".into()));
            }
            if f.values.len() != first.values.len() {
                return Err(Error::Validation(format!(
                    "features have different lengths ({} and {})",
                    first.values.len(),
                    f.values.len()
                )));
            }
        }
    }
    let mut d = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = features[i].values.iter().zip(&features[j].values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Cluster ids: leaves are `0..n`, the cluster made by merge `k` is `n + k`.
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    pub n_leaves: usize,
    pub linkage: String,
}

fn validate_distances(d: &RealMatrix) -> Result<()> {
    if !d.is_square() {
        return Err(Error::Validation(format!("distance matrix is {}x{}", d.rows(), d.cols())));
    }
    let tol = 1e-12 * d.max_abs().max(1.0);
    for i in 0..d.rows() {
        if d[(i, i)].abs() > tol {
            return Err(Error::Validation(format!("distance matrix has non-zero diagonal at {i}")));
        }
        for j in 0..i {
            if (d[(i, j)] - d[(j, i)]).abs() > tol {
                return Err(Error::Validation(format!("distance matrix is not symmetric at ({i}, {j})")));
            }
            if d[(i, j)] < 0.0 || !d[(i, j)].is_finite() {
                return Err(Error::Validation(format!("invalid distance at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Average-linkage (UPGMA) agglomeration; ties go to the smallest id pair.
pub fn agglomerative(d: &RealMatrix) -> Result<Dendrogram> {
    validate_distances(d)?;
    let n = d.rows();
    if n < 2 {
        return Err(Error::Parameter(format!("clustering needs at least 2 points, got {n}")));
    }
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let (ma, mb) = (&active[i].1, &active[j].1);
                let total: f64 = ma.iter().flat_map(|&x| mb.iter().map(move |&y| d[(x, y)])).sum();
                let avg = total / (ma.len() * mb.len()) as f64;
                if avg < best.2 {
                    best = (i, j, avg);
                }
            }
        }
        let (i, j, height) = best;
        let (id_b, members_b) = active.remove(j);
        let (id_a, mut members_a) = active.remove(i);
        members_a.extend(members_b);
        members_a.sort_unstable();
        merges.push(Merge { a: id_a, b: id_b, height, size: members_a.len() });
        active.push((n + k, members_a));
    }
    Ok(Dendrogram { merges, n_leaves: n, linkage: "average".into() })
}

/// Leaves under every cluster id.
fn members(dg: &Dendrogram) -> Vec<Vec<usize>> {
    let mut m: Vec<Vec<usize>> = (0..dg.n_leaves).map(|i| vec![i]).collect();
    for merge in &dg.merges {
        let mut joined = m[merge.a].clone();
        joined.extend(&m[merge.b]);
        m.push(joined);
    }
    m
}

/// Merge height at which each pair of leaves first shares a cluster.
pub fn cophenetic_matrix(dg: &Dendrogram) -> RealMatrix {
    let m = members(dg);
    let mut c = RealMatrix::zeros(dg.n_leaves, dg.n_leaves);
    for merge in &dg.merges {
        for &x in &m[merge.a] {
            for &y in &m[merge.b] {
                c[(x, y)] = merge.height;
                c[(y, x)] = merge.height;
            }
        }
    }
    c
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Cophenetic correlation coefficient.
pub fn cophenetic_corr(dg: &Dendrogram, d: &RealMatrix) -> Result<f64> {
    validate_distances(d)?;
    if d.rows() != dg.n_leaves {
        return Err(Error::Dimension(format!("{} leaves against a {}x{} distance matrix", dg.n_leaves, d.rows(), d.cols())));
    }
    let c = cophenetic_matrix(dg);
    let n = dg.n_leaves;
    let mut orig = Vec::new();
    let mut coph = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            orig.push(d[(i, j)]);
            coph.push(c[(i, j)]);
        }
    }
    if orig.len() < 2 {
        return Err(Error::DegenerateData("cophenetic correlation needs at least three leaves".into()));
    }
    pearson(&orig, &coph).ok_or_else(|| Error::DegenerateData("distances or cophenetic heights have zero variance".into()))
}

/// Mean silhouette; singleton clusters contribute 0, as does `a = b = 0`.
pub fn silhouette(labels: &[usize], d: &RealMatrix) -> Result<f64> {
    validate_distances(d)?;
    let n = labels.len();
    if d.rows() != n {
        return Err(Error::Dimension(format!("{n} labels against a {}x{} distance matrix", d.rows(), d.cols())));
    }
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 {
        return Err(Error::Parameter("silhouette needs at least two clusters".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        let own_size = labels.iter().filter(|&&l| l == own).count();
        if own_size == 1 {
            continue;
        }
        let mean_to = |c: usize| {
            let (sum, count) = (0..n).filter(|&j| j != i && labels[j] == c).fold((0.0, 0usize), |(s, k), j| (s + d[(i, j)], k + 1));
            sum / count as f64
        };
        let a = mean_to(own);
        let b = clusters.iter().filter(|&&c| c != own).map(|&c| mean_to(c)).fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Pair-counting adjusted Rand index.
pub fn ari(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::Dimension(format!("{} labels against {} truth labels", labels.len(), truth.len())));
    }
    let n = labels.len() as u64;
    let mut table: std::collections::BTreeMap<(usize, usize), u64> = std::collections::BTreeMap::new();
    let mut rows: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
    let mut cols: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
    for (&a, &b) in labels.iter().zip(truth) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sa: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sb: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sa * sb / choose2(n).max(1.0);
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < 1e-12 {
        return Ok(if (index - expected).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Undo the last `k − 1` merges; labels follow the smallest leaf of each cluster.
pub fn cut_dendrogram(dg: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dg.n_leaves;
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("cluster count must be in 1..={n}, got {k}")));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for (i, m) in dg.merges.iter().take(n - k).enumerate() {
        parent[m.a] = n + i;
        parent[m.b] = n + i;
    }
    let roots: Vec<usize> = (0..n).map(|leaf| find(&mut parent, leaf)).collect();
    let mut label_of: Vec<(usize, usize)> = Vec::new();
    let mut labels = vec![0; n];
    for leaf in 0..n {
        let r = roots[leaf];
        let label = match label_of.iter().find(|(root, _)| *root == r) {
            Some(&(_, l)) => l,
            None => {
                label_of.push((r, label_of.len()));
                label_of.len() - 1
            }
        };
        labels[leaf] = label;
    }
    Ok(labels)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterMetrics {
    pub ccc: Option<f64>,
    pub ss: Option<f64>,
    pub ari: Option<f64>,
    pub labels: Vec<usize>,
    /// Why a metric is missing.
    pub notes: Vec<String>,
}

/// Distances, dendrogram, `k`-cut and metrics for one feature set.
pub fn evaluate(features: &[FeatureVector], truth: Option<&[usize]>, k: usize) -> Result<(RealMatrix, Dendrogram, ClusterMetrics)> {
    let d = pairwise_distances(features)?;
    let dg = agglomerative(&d)?;
    let labels = cut_dendrogram(&dg, k)?;
    let mut notes = Vec::new();
    let ccc = cophenetic_corr(&dg, &d).map_err(|e| notes.push(format!("ccc: {e}"))).ok();
    let ss = silhouette(&labels, &d).map_err(|e| notes.push(format!("ss: {e}"))).ok();
    let ari = match truth {
        Some(t) => Some(ari(&labels, t)?),
        None => None,
    };
    Ok((d, dg, ClusterMetrics { ccc, ss, ari, labels, notes }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(points: &[Vec<f64>]) -> RealMatrix {
        let f: Vec<FeatureVector> = points.iter().map(|p| FeatureVector { values: p.clone(), method: FeatureMethod::Dwt }).collect();
        pairwise_distances(&f).unwrap()
    }

    #[test]
    fn three_point_upgma() {
        let d = RealMatrix::from_vec(3, 3, vec![0.0, 1.0, 10.0, 1.0, 0.0, 10.0, 10.0, 10.0, 0.0]).unwrap();
        let dg = agglomerative(&d).unwrap();
        assert_eq!(dg.merges[0], Merge { a: 0, b: 1, height: 1.0, size: 2 });
        assert_eq!(dg.merges[1], Merge { a: 2, b: 3, height: 10.0, size: 3 });
        assert_eq!(cut_dendrogram(&dg, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(cut_dendrogram(&dg, 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(cut_dendrogram(&dg, 3).unwrap(), vec![0, 1, 2]);
        assert!(cut_dendrogram(&dg, 0).is_err());
        assert!(cut_dendrogram(&dg, 4).is_err());
    }

    #[test]
    fn two_points_and_ccc_degenerate() {
        let d = dist(&[vec![0.0], vec![3.0]]);
        let dg = agglomerative(&d).unwrap();
        assert_eq!(dg.merges.len(), 1);
        assert_eq!(dg.merges[0].height, 3.0);
        assert!(cophenetic_corr(&dg, &d).is_err());
    }

    #[test]
    fn unit_vectors_distance() {
        let d = dist(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((d[(0, 1)] - 2f64.sqrt()).abs() < 1e-15);
        let z = dist(&[vec![0.5, 0.5], vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn mixed_methods_rejected() {
        let a = FeatureVector { values: vec![1.0], method: FeatureMethod::Dwt };
        let b = FeatureVector { values: vec![1.0], method: FeatureMethod::SpinDominance };
        assert!(matches!(pairwise_distances(&[a.clone(), b]), Err(Error::Validation(_))));
        let c = FeatureVector { values: vec![1.0, 2.0], method: FeatureMethod::Dwt };
        assert!(matches!(pairwise_distances(&[a, c]), Err(Error::Validation(_))));
    }

    #[test]
    fn asymmetric_rejected() {
        let d = RealMatrix::from_vec(2, 2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert!(agglomerative(&d).is_err());
        let r = RealMatrix::zeros(2, 3);
        assert!(agglomerative(&r).is_err());
    }

    #[test]
    fn silhouette_cases() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![0.05], vec![100.0], vec![100.1], vec![100.05]];
        let d = dist(&pts);
        let s = silhouette(&[0, 0, 0, 1, 1, 1], &d).unwrap();
        assert!(s > 0.9);
        let same = dist(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]);
        assert_eq!(silhouette(&[0, 0, 1, 1], &same).unwrap(), 0.0);
        assert!(silhouette(&[0, 0, 0, 0], &same).is_err());
    }

    #[test]
    fn ari_cases() {
        assert_eq!(ari(&[0, 0, 1, 1, 2], &[0, 0, 1, 1, 2]).unwrap(), 1.0);
        assert!((ari(&[1, 1, 0, 0, 2], &[0, 0, 1, 1, 2]).unwrap() - 1.0).abs() < 1e-15);
        // sklearn: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714285715
        assert!((ari(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap() - 0.571_428_571_428_571_5).abs() < 1e-12);
        assert!(ari(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn db2_filter_bank() {
        let h = db2_lowpass();
        assert!((h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-15);
        let x: Vec<f64> = (0..64).map(|i| ((i * 7 % 13) as f64).sin()).collect();
        let (a, d) = dwt_step(&x);
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = a.iter().chain(&d).map(|v| v * v).sum();
        assert!((e_in - e_out).abs() < 1e-10 * e_in);
        let back = idwt_step(&a, &d);
        assert!(x.iter().zip(&back).all(|(p, q)| (p - q).abs() < 1e-10));
        let (_, d) = dwt_step(&[3.0; 16]);
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }
}
