//! Sliding-window Hamiltonian pipeline, eigen-mode distances, peak picking,
//! the histogram KL baseline, and ROC evaluation.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{eig_modes, locate_state, SpinHamiltonian};
use crate::kme::{compute_kme, DomainGrid, KmeConfig, KmeVector};
use crate::linalg::{inner, C64};
use crate::pauli::OperatorBasis;
use crate::perturb::{self, DegeneratePolicy, PerturbationSpec};
use crate::qcm::{self, Qcm, SelectionRule};

pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_STRIDE: usize = 25;
pub const DEFAULT_KL_BINS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowPlan {
    pub window: usize,
    pub stride: usize,
}

impl Default for WindowPlan {
    fn default() -> Self {
        Self { window: DEFAULT_WINDOW, stride: DEFAULT_STRIDE }
    }
}

impl WindowPlan {
    pub fn new(window: usize, stride: usize) -> Result<Self> {
        let plan = Self { window, stride };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 || self.stride == 0 || self.stride > self.window {
            return Err(Error::Config(format!(
                "window plan needs window >= 2 and 1 <= stride <= window, got window {} stride {}",
                self.window, self.stride
            )));
        }
        Ok(())
    }

    /// Start sample of every full window.
    pub fn starts(&self, len: usize) -> Vec<usize> {
        if len < self.window {
            return Vec::new();
        }
        (0..=(len - self.window) / self.stride).map(|l| l * self.stride).collect()
    }

    /// Window whose start is nearest to sample `c` (earlier on ties), clipped to `count`.
    pub fn window_of(&self, c: usize, count: usize) -> usize {
        let below = c / self.stride;
        let idx = if 2 * (c % self.stride) > self.stride { below + 1 } else { below };
        idx.min(count.saturating_sub(1))
    }
}

/// Everything the per-window analysis needs besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub plan: WindowPlan,
    pub kme: KmeConfig,
    pub perturbation: PerturbationSpec,
    /// Lowest modes kept for distances, UQ and dominance.
    pub modes: usize,
    pub null_tol: f64,
    pub selection: SelectionRule,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            plan: WindowPlan::default(),
            kme: KmeConfig::default(),
            perturbation: PerturbationSpec::default(),
            modes: perturb::DEFAULT_MODES,
            null_tol: qcm::DEFAULT_NULL_TOL,
            selection: SelectionRule::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.kme.validate()?;
        self.perturbation.validate()?;
        if self.modes == 0 || self.modes > self.kme.grid_points {
            return Err(Error::Config(format!("modes must be in 1..={}, got {}", self.kme.grid_points, self.modes)));
        }
        if !(self.null_tol >= 0.0 && self.null_tol < 1.0) {
            return Err(Error::Config(format!("null_tol must be in [0, 1), got {}", self.null_tol)));
        }
        Ok(())
    }
}

/// Hamiltonian, eigen-modes and uncertainty of one data window.
#[derive(Clone, Debug, Serialize)]
pub struct WindowResult {
    pub index: usize,
    pub start: usize,
    pub w: Vec<f64>,
    pub energies: Vec<f64>,
    /// The lowest `modes` eigen-modes, phase fixed.
    pub modes: Vec<Vec<C64>>,
    pub variance: f64,
    pub approximate: bool,
    pub state_index: usize,
    pub overlap: f64,
    pub null_dimension: usize,
    pub tie: bool,
    pub mu0: f64,
    pub e1: Vec<f64>,
    /// `V_n^(1)` on the grid for the lowest `modes` levels.
    pub uncertainty: Vec<Vec<f64>>,
    pub uq: f64,
    pub skipped_couplings: usize,
}

/// Runs the whole chain on one set of samples.
pub fn analyze_window(
    samples: &[f64],
    grid: &DomainGrid,
    sigma: f64,
    basis: &Arc<OperatorBasis>,
    cfg: &PipelineConfig,
) -> Result<(WindowResult, KmeVector)> {
    let kme = compute_kme(samples, grid, sigma)?;
    let q = Qcm::build(basis, &kme.state())?;
    let ns = qcm::null_space(&q, cfg.null_tol);
    let sel = qcm::select_hamiltonian(&ns, &q, basis, cfg.selection)?;
    let h = SpinHamiltonian::assemble(&sel.w, basis.clone())?.with_fit(sel.approximate, sel.variance);
    let dense = h.dense();
    let es = eig_modes(&dense)?;
    let (_, overlap) = locate_state(&es, &kme.state())?;
    let hp = perturb::build_perturbation(&cfg.perturbation, &dense, &kme)?;
    let mc = perturb::first_order_lowest(&es, &hp, cfg.modes, DegeneratePolicy::Skip)?;
    let mu = perturb::mode_uncertainty(&mc, grid, sigma, perturb::DEFAULT_FLOOR)?;
    let uq = perturb::window_uq(&mu, &kme, cfg.modes)?;
    let result = WindowResult {
        index: 0,
        start: 0,
        w: h.coefficients().to_vec(),
        modes: (0..cfg.modes).map(|n| es.mode(n)).collect(),
        energies: es.energies,
        variance: sel.variance,
        approximate: sel.approximate,
        state_index: sel.state_index,
        overlap,
        null_dimension: sel.null_dimension,
        tie: sel.tie,
        mu0: q.mu0(),
        e1: mc.e1,
        uncertainty: mu.curves,
        uq,
        skipped_couplings: mc.skipped_couplings,
    };
    Ok((result, kme))
}

#[derive(Clone, Debug, Serialize)]
pub struct SkippedWindow {
    pub index: usize,
    pub start: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineOutput {
    pub windows: Vec<WindowResult>,
    pub skipped: Vec<SkippedWindow>,
    pub sigma: Option<f64>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub window_count: usize,
}

impl PipelineOutput {
    /// Result for window `index`, if it was not skipped.
    pub fn window(&self, index: usize) -> Option<&WindowResult> {
        self.windows.binary_search_by_key(&index, |w| w.index).ok().map(|i| &self.windows[i])
    }
}

/// Runs [`analyze_window`] on every full window of `series`.
pub fn run_pipeline(series: &[f64], cfg: &PipelineConfig, basis: &Arc<OperatorBasis>) -> Result<PipelineOutput> {
    cfg.validate()?;
    if basis.dim() != cfg.kme.grid_points {
        return Err(Error::Config(format!(
            "basis dimension {} does not match {} grid points",
            basis.dim(),
            cfg.kme.grid_points
        )));
    }
    if cfg.modes > basis.dim() {
        return Err(Error::Config(format!("{} modes requested of {}", cfg.modes, basis.dim())));
    }
    let starts = cfg.plan.starts(series.len());
    if starts.is_empty() {
        return Err(Error::Parameter(format!(
            "series too short: {} samples for a window of {}",
            series.len(),
            cfg.plan.window
        )));
    }
    let grid = match cfg.kme.grid_for(series) {
        Ok(g) => g,
        Err(Error::DegenerateData(reason)) | Err(Error::Parameter(reason)) => return Ok(all_skipped(&starts, reason, cfg)),
        Err(e) => return Err(e),
    };
    let sigma = match cfg.kme.bandwidth_for(series) {
        Ok(s) => s,
        Err(Error::DegenerateData(reason)) => {
            let mut out = all_skipped(&starts, reason, cfg);
            out.grid_lo = grid.lo();
            out.grid_hi = grid.hi();
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let outcomes: Vec<Result<WindowResult>> = starts
        .par_iter()
        .enumerate()
        .map(|(index, &start)| {
            let (mut r, _) = analyze_window(&series[start..start + cfg.plan.window], &grid, sigma, basis, cfg)?;
            r.index = index;
            r.start = start;
            Ok(r)
        })
        .collect();
    let mut windows = Vec::with_capacity(starts.len());
    let mut skipped = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => windows.push(r),
            Err(e @ (Error::DegenerateData(_) | Error::Convergence(_))) => {
                skipped.push(SkippedWindow { index, start: starts[index], reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PipelineOutput { windows, skipped, sigma: Some(sigma), grid_lo: grid.lo(), grid_hi: grid.hi(), window_count: starts.len() })
}

fn all_skipped(starts: &[usize], reason: String, cfg: &PipelineConfig) -> PipelineOutput {
    let (lo, hi) = match cfg.kme.grid_policy {
        crate::kme::GridPolicy::FixedRange { lo, hi } => (lo, hi),
        crate::kme::GridPolicy::GlobalRange => (f64::NAN, f64::NAN),
    };
    PipelineOutput {
        windows: Vec::new(),
        skipped: starts.iter().enumerate().map(|(index, &start)| SkippedWindow { index, start, reason: reason.clone() }).collect(),
        sigma: None,
        grid_lo: lo,
        grid_hi: hi,
        window_count: starts.len(),
    }
}

/// Domain of the sine demo.
pub const DEMO_RANGE: (f64, f64) = (-4.0, 4.0);
/// SROT multipliers of the two demo kernel widths.
pub const DEMO_MULTIPLIERS: [f64; 2] = [1.0, 5.0];

#[derive(Clone, Debug, Serialize)]
pub struct DemoCurves {
    pub multiplier: f64,
    pub sigma: f64,
    pub grid: Vec<f64>,
    /// Raw `V_n^(1)` per mode.
    pub curves: Vec<Vec<f64>>,
}

impl DemoCurves {
    /// Each curve divided by its maximum (curves that are identically 0 stay 0).
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.curves
            .iter()
            .map(|c| {
                let m = c.iter().cloned().fold(0.0, f64::max);
                c.iter().map(|v| if m > 0.0 { v / m } else { 0.0 }).collect()
            })
            .collect()
    }
}

/// Whole series as KME centres on a fixed grid, once per kernel width.
pub fn uq_demo(series: &[f64], range: (f64, f64), multipliers: &[f64], cfg: &PipelineConfig, basis: &Arc<OperatorBasis>) -> Result<Vec<DemoCurves>> {
    cfg.validate()?;
    let grid = crate::kme::make_grid(range.0, range.1, cfg.kme.grid_points)?;
    if basis.dim() != grid.len() {
        return Err(Error::Config(format!("basis dimension {} does not match {} grid points", basis.dim(), grid.len())));
    }
    let srot = crate::kme::silverman_bandwidth(series)?;
    multipliers
        .iter()
        .map(|&m| {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Config(format!("kernel width multiplier must be positive, got {m}")));
            }
            let (r, _) = analyze_window(series, &grid, m * srot, basis, cfg)?;
            Ok(DemoCurves { multiplier: m, sigma: m * srot, grid: grid.points().to_vec(), curves: r.uncertainty })
        })
        .collect()
}

/// Indices of the `ceil(n/10)` largest values (earlier index first on ties).
pub fn top_decile(values: &[f64]) -> Vec<usize> {
    let k = values.len().div_ceil(10);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Does every top-decile point of `curve` fall outside the interquartile range of `series`?
pub fn peaks_in_tails(curve: &[f64], grid: &[f64], series: &[f64]) -> Result<bool> {
    if curve.len() != grid.len() {
        return Err(Error::Dimension(format!("curve of {} points on a grid of {}", curve.len(), grid.len())));
    }
    if series.len() < 2 {
        return Err(Error::Parameter("series needs at least 2 samples".into()));
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = crate::kme::quantile_sorted(&sorted, 0.25);
    let q3 = crate::kme::quantile_sorted(&sorted, 0.75);
    Ok(top_decile(curve).into_iter().all(|i| grid[i] < q1 || grid[i] > q3))
}

/// `min_θ ‖a − e^{iθ} b‖₂`.
pub fn aligned_distance(a: &[C64], b: &[C64]) -> f64 {
    let z = inner(a, b);
    let rot = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - rot * y).norm_sqr()).sum::<f64>().sqrt()
}

/// Mean phase-aligned distance between the `k` lowest modes of two windows.
pub fn mode_distance(a: &WindowResult, b: &WindowResult, k: usize) -> Result<f64> {
    if k == 0 || k > a.modes.len() || k > b.modes.len() {
        return Err(Error::Validation(format!("{k} modes requested, windows keep {} and {}", a.modes.len(), b.modes.len())));
    }
    if a.modes[0].len() != b.modes[0].len() || a.w.len() != b.w.len() {
        return Err(Error::Validation("windows come from different configurations".into()));
    }
    Ok((0..k).map(|n| aligned_distance(&a.modes[n], &b.modes[n])).sum::<f64>() / k as f64)
}

/// Distance of every window to the previous one, indexed by window; the
/// first window and pairs touching a skipped window score 0.
pub fn distance_signal(out: &PipelineOutput, k: usize) -> Result<Vec<f64>> {
    let mut signal = vec![0.0; out.window_count];
    for l in 1..out.window_count {
        if let (Some(a), Some(b)) = (out.window(l - 1), out.window(l)) {
            signal[l] = mode_distance(a, b, k)?;
        }
    }
    Ok(signal)
}

/// Height of a peak above the higher of its two bounding valleys.
pub fn prominence(signal: &[f64], peak: usize) -> f64 {
    let h = signal[peak];
    let mut left_min = h;
    for &v in signal[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &signal[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Strict interior local maxima with prominence at least `min_prominence`.
pub fn find_peaks(signal: &[f64], min_prominence: f64) -> Vec<usize> {
    if signal.len() < 3 {
        return Vec::new();
    }
    (1..signal.len() - 1)
        .filter(|&i| signal[i] > signal[i - 1] && signal[i] > signal[i + 1])
        .filter(|&i| prominence(signal, i) >= min_prominence)
        .collect()
}

fn histogram(x: &[f64], lo: f64, width: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    for &v in x {
        let b = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
        counts[b] += 1.0;
    }
    counts
}

/// `½(KL(p‖q) + KL(q‖p))` of Laplace-smoothed histograms on shared edges.
pub fn symmetric_kl(a: &[f64], b: &[f64], bins: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() || bins == 0 {
        return Err(Error::Parameter("KL needs non-empty samples and at least one bin".into()));
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let smooth = |c: Vec<f64>, n: usize| -> Vec<f64> { c.into_iter().map(|v| (v + 1.0) / (n + bins) as f64).collect() };
    let p = smooth(histogram(a, lo, width, bins), a.len());
    let q = smooth(histogram(b, lo, width, bins), b.len());
    let kl = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(pi, qi)| pi * (pi / qi).ln()).sum::<f64>();
    Ok(0.5 * (kl(&p, &q) + kl(&q, &p)))
}

/// Symmetrised KL of every window against the previous one, indexed like
/// [`distance_signal`].
pub fn kl_baseline(series: &[f64], plan: &WindowPlan, bins: usize) -> Result<Vec<f64>> {
    plan.validate()?;
    if series.len() < 2 * plan.window {
        return Err(Error::Parameter(format!("KL baseline needs at least {} samples, got {}", 2 * plan.window, series.len())));
    }
    let starts = plan.starts(series.len());
    let mut signal = vec![0.0; starts.len()];
    for l in 1..starts.len() {
        let (a, b) = (starts[l - 1], starts[l]);
        signal[l] = symmetric_kl(&series[a..a + plan.window], &series[b..b + plan.window], bins)?;
    }
    Ok(signal)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RocOptions {
    /// Matching tolerance in windows.
    pub tolerance: usize,
    pub min_prominence: f64,
    /// Only truths and peaks whose window starts in `[lo, hi)` count.
    pub range: Option<(f64, f64)>,
}

impl Default for RocOptions {
    fn default() -> Self {
        Self { tolerance: 1, min_prominence: 0.0, range: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RocCurve {
    /// Starts at (0, 0) and ends at (1, 1); the endpoints carry infinite and
    /// negative-infinite thresholds.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub match_tolerance: usize,
    pub truths: usize,
    pub peaks: usize,
}

/// ROC of peak detection on a window-indexed score signal.
///
/// A change at sample `c` belongs to the window starting nearest to `c`.
/// Thresholds sweep the distinct peak heights from the top. Detected peaks
/// are matched greedily, highest first, to the nearest unmatched truth within
/// `tolerance` windows. TPR divides by the number of truths; FPR divides by the
/// number of unmatched peaks at the lowest threshold.
pub fn roc(scores: &[f64], truth: &[usize], plan: &WindowPlan, opts: &RocOptions) -> Result<RocCurve> {
    if truth.is_empty() {
        return Err(Error::Parameter("ROC needs at least one ground-truth change".into()));
    }
    if scores.is_empty() {
        return Err(Error::Parameter("ROC needs a non-empty score signal".into()));
    }
    let in_range = |x: f64| opts.range.is_none_or(|(lo, hi)| x >= lo && x < hi);
    let truths: Vec<usize> = truth
        .iter()
        .filter(|&&c| in_range(c as f64))
        .map(|&c| plan.window_of(c, scores.len()))
        .collect();
    if truths.is_empty() {
        return Err(Error::Parameter("no ground-truth change falls in the evaluation range".into()));
    }
    let mut peaks: Vec<usize> = find_peaks(scores, opts.min_prominence).into_iter().filter(|&p| in_range((p * plan.stride) as f64)).collect();
    peaks.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut matched = vec![false; truths.len()];
    let mut is_tp = Vec::with_capacity(peaks.len());
    for &p in &peaks {
        let candidate = truths
            .iter()
            .enumerate()
            .filter(|&(i, &t)| !matched[i] && p.abs_diff(t) <= opts.tolerance)
            .min_by_key(|&(i, &t)| (p.abs_diff(t), i))
            .map(|(i, _)| i);
        if let Some(i) = candidate {
            matched[i] = true;
        }
        is_tp.push(candidate.is_some());
    }
    let total_fp = is_tp.iter().filter(|&&t| !t).count();

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < peaks.len() {
        let threshold = scores[peaks[i]];
        while i < peaks.len() && scores[peaks[i]] == threshold {
            if is_tp[i] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fpr = if total_fp == 0 { 0.0 } else { fp as f64 / total_fp as f64 };
        points.push(RocPoint { threshold, fpr, tpr: tp as f64 / truths.len() as f64 });
    }
    points.push(RocPoint { threshold: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 });
    let auc = points.windows(2).map(|p| (p[1].fpr - p[0].fpr) * 0.5 * (p[1].tpr + p[0].tpr)).sum::<f64>();
    Ok(RocCurve { points, auc: auc.clamp(0.0, 1.0), match_tolerance: opts.tolerance, truths: truths.len(), peaks: peaks.len() })
}

/// Windows containing a change strictly inside them, and windows containing none.
pub fn split_jump_windows(starts: &[usize], window: usize, truth: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut jump = Vec::new();
    let mut calm = Vec::new();
    for (l, &s) in starts.iter().enumerate() {
        if truth.iter().any(|&c| c > s && c < s + window) {
            jump.push(l);
        } else {
            calm.push(l);
        }
    }
    (jump, calm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_starts() {
        let plan = WindowPlan::default();
        let s = plan.starts(5000);
        assert_eq!(s.len(), 197);
        assert_eq!(*s.last().unwrap(), 4900);
        assert!(plan.starts(99).is_empty());
        assert!(WindowPlan::new(100, 0).is_err());
        assert!(WindowPlan::new(100, 101).is_err());
        assert_eq!(plan.window_of(100, 197), 4);
        assert_eq!(plan.window_of(112, 197), 4);
        assert_eq!(plan.window_of(113, 197), 5);
        assert_eq!(plan.window_of(9999, 197), 196);
    }

    #[test]
    fn peak_cases() {
        assert_eq!(find_peaks(&[0.0, 1.0, 0.0], 0.5), vec![1]);
        assert!(find_peaks(&[0.0, 1.0, 2.0, 3.0], 0.0).is_empty());
        assert_eq!(find_peaks(&[0.0, 2.0, 1.0, 3.0, 0.0], 1.5), vec![3]);
        assert_eq!(prominence(&[0.0, 2.0, 1.0, 3.0, 0.0], 1), 1.0);
        assert_eq!(prominence(&[0.0, 2.0, 1.0, 3.0, 0.0], 3), 3.0);
        // plateaus are not strict maxima
        assert!(find_peaks(&[0.0, 1.0, 1.0, 0.0], 0.0).is_empty());
    }

    #[test]
    fn kl_cases() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(symmetric_kl(&a, &a, 32).unwrap().abs() < 1e-15);
        let far: Vec<f64> = a.iter().map(|v| v + 100.0).collect();
        let d = symmetric_kl(&a, &far, 32).unwrap();
        assert!(d.is_finite() && d > 1.0);
        let flat = vec![1.0; 10];
        assert_eq!(symmetric_kl(&flat, &flat, 8).unwrap(), 0.0);
    }

    #[test]
    fn perfect_roc() {
        let plan = WindowPlan::default();
        let truth = [500usize, 1000, 1500];
        let mut scores = vec![0.0; 100];
        for &c in &truth {
            scores[plan.window_of(c, 100)] = 1.0;
        }
        let r = roc(&scores, &truth, &plan, &RocOptions::default()).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
        assert_eq!(r.points.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
        assert!(roc(&scores, &[], &plan, &RocOptions::default()).is_err());
    }

    #[test]
    fn jump_window_split() {
        let plan = WindowPlan::default();
        let starts = plan.starts(400);
        let (jump, calm) = split_jump_windows(&starts, 100, &[100, 200, 300]);
        assert_eq!(calm, vec![0, 4, 8, 12]);
        assert_eq!(jump.len(), starts.len() - 4);
    }

    #[test]
    fn aligned_distance_is_gauge_free() {
        let a = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let b: Vec<C64> = a.iter().map(|z| -z).collect();
        assert!(aligned_distance(&a, &b) < 1e-15);
        assert_eq!(aligned_distance(&a, &a), 0.0);
        let rot: Vec<C64> = a.iter().map(|z| z * C64::from_polar(1.0, 0.3)).collect();
        assert!(aligned_distance(&a, &rot) < 1e-15);
        let c = vec![C64::new(0.0, 0.8), C64::new(0.6, 0.0)];
        assert!((aligned_distance(&a, &c) - aligned_distance(&c, &a)).abs() < 1e-15);
    }
}
