//! Gaussian kernel mean embeddings on a fixed power-of-two grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Uniform evaluation grid with `2^L` points, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainGrid {
    points: Vec<f64>,
    lo: f64,
    hi: f64,
    step: f64,
}

impl DomainGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Parameter(format!("grid needs finite lo < hi, got ({lo}, {hi})")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!("grid size must be a power of two >= 2, got {n}")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect();
        Ok(Self { points, lo, hi, step })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Chain length `L` with `len = 2^L`.
    pub fn chain_length(&self) -> usize {
        self.points.len().trailing_zeros() as usize
    }

    pub fn shifted(&self, by: f64) -> Result<Self> {
        Self::new(self.lo + by, self.hi + by, self.len())
    }
}

pub fn make_grid(lo: f64, hi: f64, n: usize) -> Result<DomainGrid> {
    DomainGrid::new(lo, hi, n)
}

/// Unit-norm, strictly positive embedding of a sample window.
#[derive(Clone, Debug, PartialEq)]
pub struct KmeVector {
    values: Vec<f64>,
    bandwidth: f64,
}

impl KmeVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The embedding as a complex state vector.
    pub fn state(&self) -> Vec<C64> {
        self.values.iter().map(|&v| C64::new(v, 0.0)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GridPolicy {
    /// `[min − pad·std, max + pad·std]` of the whole series.
    GlobalRange,
    FixedRange { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmeConfig {
    /// Multiplier on Silverman's rule of thumb.
    pub bandwidth_multiplier: f64,
    pub grid_points: usize,
    pub grid_policy: GridPolicy,
    /// Padding of the global grid, in multiples of the series std.
    pub pad: f64,
}

impl Default for KmeConfig {
    fn default() -> Self {
        Self { bandwidth_multiplier: 5.0, grid_points: 64, grid_policy: GridPolicy::GlobalRange, pad: 0.5 }
    }
}

impl KmeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_multiplier > 0.0 && self.bandwidth_multiplier.is_finite()) {
            return Err(Error::Config(format!("bandwidth_multiplier must be positive, got {}", self.bandwidth_multiplier)));
        }
        if self.grid_points < 2 || !self.grid_points.is_power_of_two() {
            return Err(Error::Config(format!("grid_points must be a power of two, got {}", self.grid_points)));
        }
        if !(self.pad >= 0.0 && self.pad.is_finite()) {
            return Err(Error::Config(format!("pad must be non-negative, got {}", self.pad)));
        }
        Ok(())
    }

    /// Grid for a whole series under this policy.
    pub fn grid_for(&self, series: &[f64]) -> Result<DomainGrid> {
        match self.grid_policy {
            GridPolicy::FixedRange { lo, hi } => DomainGrid::new(lo, hi, self.grid_points),
            GridPolicy::GlobalRange => {
                if series.is_empty() {
                    return Err(Error::Parameter("empty series".into()));
                }
                let (min, max) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let pad = self.pad * std_dev(series);
                DomainGrid::new(min - pad, max + pad, self.grid_points)
            }
        }
    }

    /// `bandwidth_multiplier · SROT(series)`.
    pub fn bandwidth_for(&self, series: &[f64]) -> Result<f64> {
        Ok(self.bandwidth_multiplier * silverman_bandwidth(series)?)
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub(crate) fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, `0.9 · min(std, IQR/1.34) · n^(−1/5)`.
///
/// Falls back to the standard deviation alone when the IQR vanishes but the
/// data are not constant.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Parameter(format!("bandwidth needs at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("samples contain non-finite values".into()));
    }
    let std = std_dev(samples);
    if std == 0.0 {
        return Err(Error::DegenerateData("samples are constant; bandwidth would be zero".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

/// `ψ_i ∝ sqrt((1/N) Σ_j exp(−(g_i − x_j)² / 2σ²))` at every grid point `g_i`,
/// normalised to unit Euclidean norm.
pub fn compute_kme(centers: &[f64], grid: &DomainGrid, sigma: f64) -> Result<KmeVector> {
    if centers.is_empty() {
        return Err(Error::Parameter("KME needs at least one center".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("kernel width must be positive, got {sigma}")));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    // log-sum-exp per grid point keeps far-from-data entries positive
    let log_density: Vec<f64> = grid
        .points()
        .iter()
        .map(|&g| {
            let exps: Vec<f64> = centers.iter().map(|&x| -(g - x) * (g - x) * inv).collect();
            let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            top + exps.iter().map(|e| (e - top).exp()).sum::<f64>().ln() - (centers.len() as f64).ln()
        })
        .collect();
    let top = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut values: Vec<f64> = log_density.iter().map(|l| (0.5 * (l - top)).exp()).collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in values.iter_mut() {
        *v /= norm;
    }
    Ok(KmeVector { values, bandwidth: sigma })
}

/// Un-normalised embedding values, exactly as the formula reads.
pub fn raw_kme(centers: &[f64], points: &[f64], sigma: f64) -> Vec<f64> {
    let inv = 1.0 / (2.0 * sigma * sigma);
    points
        .iter()
        .map(|&g| (centers.iter().map(|&x| (-(g - x) * (g - x) * inv).exp()).sum::<f64>() / centers.len() as f64).sqrt())
        .collect()
}

/// Subtract the mean and divide by the sample standard deviation.
pub fn z_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let s = std_dev(x);
    if s == 0.0 || !s.is_finite() {
        return Err(Error::DegenerateData("cannot z-normalize a constant signal".into()));
    }
    let m = mean(x);
    Ok(x.iter().map(|v| (v - m) / s).collect())
}
