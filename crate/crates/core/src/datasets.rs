//! Seeded synthetic series, the sine demo, and WAV ingestion.
//!
//! Normal draws use Box–Muller on a `ChaCha8Rng` seeded with `seed_from_u64`.
//! Both outputs of each transform are used, cosine branch first. Uniform
//! draws are `f64` in `[0, 1)` from the same generator. Changing any of this
//! changes the golden snapshots in the tests.

use std::f64::consts::{E, PI};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kme::z_normalize;

pub const SEGMENT_LENGTH: usize = 100;
pub const SEGMENTS: usize = 50;
pub const JUMP_SERIES_LENGTH: usize = SEGMENT_LENGTH * SEGMENTS;
pub const MEAN_JUMP_SIGMA: f64 = 1.5;
pub const SINE_DEMO_LENGTH: usize = 3000;
pub const VOICE_DECIMATION: usize = 20;
pub const VOICE_LENGTH: usize = 2000;
pub const VOICE_CLASSES: usize = 5;
pub const VOICES_PER_CLASS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    #[serde(default)]
    pub sample_rate: Option<f64>,
    /// Ascending sample indices at which a new segment starts.
    #[serde(default)]
    pub truth: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub label: Option<usize>,
    pub provenance: String,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, provenance: impl Into<String>) -> Self {
        Self { samples, sample_rate: None, truth: None, seed: None, label: None, provenance: provenance.into() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = &self.truth {
            if t.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::Validation("truth indices must be strictly ascending".into()));
            }
            if t.last().is_some_and(|&i| i >= self.samples.len()) {
                return Err(Error::Validation("truth index beyond the end of the series".into()));
            }
        }
        if self.samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("series contains non-finite samples".into()));
        }
        Ok(())
    }
}

/// Box–Muller normals over a seeded ChaCha8 stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        self.spare = Some(r * (2.0 * PI * u2).sin());
        r * (2.0 * PI * u2).cos()
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard()
    }
}

/// `μ_1 = 0`, `μ_N = μ_{N−1} + N/16`, for `N = 1..=segments`.
pub fn mean_schedule(segments: usize) -> Vec<f64> {
    let mut mu = Vec::with_capacity(segments);
    let mut acc = 0.0;
    for n in 1..=segments {
        if n >= 2 {
            acc += n as f64 / 16.0;
        }
        mu.push(acc);
    }
    mu
}

/// `σ_N` uniform in `[0, 1)` for odd `N`, `ln(e + N/4)` for even `N`.
pub fn sigma_schedule(segments: usize, stream: &mut NormalStream) -> Vec<f64> {
    (1..=segments).map(|n| if n % 2 == 1 { stream.uniform() } else { (E + n as f64 / 4.0).ln() }).collect()
}

fn change_points() -> Vec<usize> {
    (1..SEGMENTS).map(|n| n * SEGMENT_LENGTH).collect()
}

/// `y(t) = 0.6 y(t−1) − 0.5 y(t−2) + ε_t` with `y(1) = y(2) = 0`; noise is
/// drawn only for `t ≥ 3`.
fn ar2(noise_params: &[(f64, f64)], stream: &mut NormalStream) -> Vec<f64> {
    let mut y = vec![0.0; JUMP_SERIES_LENGTH];
    for t in 2..JUMP_SERIES_LENGTH {
        let (mu, sd) = noise_params[t / SEGMENT_LENGTH];
        y[t] = 0.6 * y[t - 1] - 0.5 * y[t - 2] + stream.normal(mu, sd);
    }
    y
}

pub fn gen_mean_jumps(seed: u64) -> TimeSeries {
    let mut stream = NormalStream::new(seed);
    let params: Vec<(f64, f64)> = mean_schedule(SEGMENTS).into_iter().map(|m| (m, MEAN_JUMP_SIGMA)).collect();
    let samples = ar2(&params, &mut stream);
    TimeSeries {
        samples,
        sample_rate: None,
        truth: Some(change_points()),
        seed: Some(seed),
        label: None,
        provenance: "mean-jumps".into(),
    }
}

pub fn gen_variance_jumps(seed: u64) -> TimeSeries {
    let mut stream = NormalStream::new(seed);
    let params: Vec<(f64, f64)> = sigma_schedule(SEGMENTS, &mut stream).into_iter().map(|s| (0.0, s)).collect();
    let samples = ar2(&params, &mut stream);
    TimeSeries {
        samples,
        sample_rate: None,
        truth: Some(change_points()),
        seed: Some(seed),
        label: None,
        provenance: "variance-jumps".into(),
    }
}

/// 3000 samples of a 50 Hz sine sampled at 6 kHz, z-normalised.
pub fn gen_sine_demo() -> TimeSeries {
    let raw: Vec<f64> = (0..SINE_DEMO_LENGTH).map(|t| (2.0 * PI * 50.0 * t as f64 / 6000.0).sin()).collect();
    let samples = z_normalize(&raw).expect("sine is not constant");
    TimeSeries { samples, sample_rate: Some(6000.0), truth: None, seed: None, label: None, provenance: "sine-demo".into() }
}

/// 16-bit PCM WAV, stereo averaged to mono, scaled by `1/32768`.
pub fn load_wav(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let fmt_err = |e: hound::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut reader = hound::WavReader::open(path).map_err(fmt_err)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Format(format!(
            "{}: fmt chunk declares {:?} with {} bits per sample; only 16-bit PCM is supported",
            path.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format(format!("{}: fmt chunk declares zero channels", path.display())));
    }
    let raw: Vec<i16> = reader.samples::<i16>().collect::<std::result::Result<_, _>>().map_err(fmt_err)?;
    if !raw.len().is_multiple_of(channels) {
        return Err(Error::Format(format!("{}: data chunk ends mid-frame", path.display())));
    }
    let samples = raw.chunks(channels).map(|f| f.iter().map(|&s| s as f64 / 32768.0).sum::<f64>() / channels as f64).collect();
    Ok(TimeSeries {
        samples,
        sample_rate: Some(spec.sample_rate as f64),
        truth: None,
        seed: None,
        label: None,
        provenance: format!("wav:{}", path.display()),
    })
}

/// Keep every 20th sample, crop the middle 2000, z-normalise.
pub fn preprocess_voice(ts: &TimeSeries) -> Result<TimeSeries> {
    let decimated: Vec<f64> = ts.samples.iter().step_by(VOICE_DECIMATION).copied().collect();
    if decimated.len() < VOICE_LENGTH {
        return Err(Error::Parameter(format!(
            "{} samples after decimation, need at least {VOICE_LENGTH}",
            decimated.len()
        )));
    }
    let start = (decimated.len() - VOICE_LENGTH) / 2;
    let samples = z_normalize(&decimated[start..start + VOICE_LENGTH])?;
    Ok(TimeSeries {
        samples,
        sample_rate: ts.sample_rate.map(|r| r / VOICE_DECIMATION as f64),
        truth: None,
        seed: ts.seed,
        label: ts.label,
        provenance: format!("{}|decimate{VOICE_DECIMATION}|middle{VOICE_LENGTH}|z", ts.provenance),
    })
}

#[derive(Clone, Copy, Debug)]
enum Waveform {
    Sine,
    SoftSquare,
    Triangle,
    AmSine,
    Harmonic,
}

/// Base frequency in cycles per sample and waveform family of each class.
const VOICE_FAMILIES: [(f64, Waveform); VOICE_CLASSES] = [
    (0.010, Waveform::Sine),
    (0.013, Waveform::SoftSquare),
    (0.017, Waveform::Triangle),
    (0.021, Waveform::AmSine),
    (0.008, Waveform::Harmonic),
];

fn waveform(kind: Waveform, phase: f64, t: f64) -> f64 {
    match kind {
        Waveform::Sine => phase.sin(),
        Waveform::SoftSquare => (3.0 * phase.sin()).tanh(),
        Waveform::Triangle => (2.0 / PI) * phase.sin().asin(),
        Waveform::AmSine => (1.0 + 0.8 * (2.0 * PI * 0.002 * t).sin()) * phase.sin(),
        Waveform::Harmonic => phase.sin() + 0.6 * (2.0 * phase + 0.5 * PI).sin(),
    }
}

/// 25 labelled 2000-sample series: five waveform families, five draws each.
///
/// Each draw jitters the frequency by up to ±5%, randomises the phase, and
/// adds white noise at a tenth of unit amplitude.
pub fn gen_synthetic_voices(seed: u64) -> Vec<TimeSeries> {
    let mut stream = NormalStream::new(seed);
    let mut out = Vec::with_capacity(VOICE_CLASSES * VOICES_PER_CLASS);
    for _ in 0..VOICES_PER_CLASS {
        for (label, &(f0, kind)) in VOICE_FAMILIES.iter().enumerate() {
            let f = f0 * (1.0 + 0.1 * (stream.uniform() - 0.5));
            let phi = 2.0 * PI * stream.uniform();
            let raw: Vec<f64> = (0..VOICE_LENGTH)
                .map(|t| {
                    let t = t as f64;
                    waveform(kind, 2.0 * PI * f * t + phi, t) + 0.1 * stream.standard()
                })
                .collect();
            let samples = z_normalize(&raw).expect("synthetic voice is not constant");
            out.push(TimeSeries {
                samples,
                sample_rate: None,
                truth: None,
                seed: Some(seed),
                label: Some(label),
                provenance: format!("synthetic-voice:{kind:?}"),
            });
        }
    }
    out
}

/// Reads a `t,value` CSV (comment lines start with `#`); a JSON sidecar at
/// `<path>.json`, if present, supplies truth, seed and label.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if samples.is_empty() => continue,
            Err(_) => return Err(Error::Format(format!("{}:{}: cannot parse {field:?}", path.display(), lineno + 1))),
        }
    }
    let mut ts = TimeSeries::new(samples, format!("csv:{}", path.display()));
    let sidecar = sidecar_path(path);
    if sidecar.exists() {
        let meta: SeriesMeta = serde_json::from_str(&fs::read_to_string(&sidecar)?)?;
        ts.truth = meta.truth;
        ts.seed = meta.seed;
        ts.label = meta.label;
        ts.sample_rate = meta.sample_rate;
        if let Some(p) = meta.provenance {
            ts.provenance = p;
        }
    }
    ts.validate()?;
    Ok(ts)
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Everything in a [`TimeSeries`] except the samples.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SeriesMeta {
    #[serde(default)]
    pub truth: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub label: Option<usize>,
    #[serde(default)]
    pub sample_rate: Option<f64>,
    #[serde(default)]
    pub provenance: Option<String>,
}

impl From<&TimeSeries> for SeriesMeta {
    fn from(ts: &TimeSeries) -> Self {
        Self {
            truth: ts.truth.clone(),
            seed: ts.seed,
            label: ts.label,
            sample_rate: ts.sample_rate,
            provenance: Some(ts.provenance.clone()),
        }
    }
}
