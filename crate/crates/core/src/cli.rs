//! Command-line front end: configuration, dataset generation, and the CSV/JSON
//! emissions of every experiment.
//!
//! Exit codes: 0 success, 1 runtime or domain failure, 2 usage or
//! configuration failure (including unwritable output paths).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::changepoint::{self, PipelineConfig, PipelineOutput, RocCurve, RocOptions, DEFAULT_KL_BINS};
use crate::cluster::{self, Dominance, FeatureVector};
use crate::datasets::{self, SeriesMeta, TimeSeries};
use crate::error::{Error, Result};
use crate::pauli::{basis_size, build_basis, OperatorBasis};
use crate::qcm::SelectionRule;

/// Worker-count environment variable; `--threads` wins over it.
pub const THREADS_ENV: &str = "SPINCHAIN_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chain_length: usize,
    pub max_arity: usize,
    pub seed: u64,
    pub pipeline: PipelineConfig,
    pub roc: RocOptions,
    pub kl_bins: usize,
    /// Cut size for clustering; defaults to the number of labelled classes.
    pub cluster_k: Option<usize>,
    pub dominance: Dominance,
    /// SROT multipliers of the sine-demo kernel widths.
    pub demo_multipliers: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chain_length: 6,
            max_arity: 5,
            seed: 7,
            pipeline: PipelineConfig::default(),
            roc: RocOptions::default(),
            kl_bins: DEFAULT_KL_BINS,
            cluster_k: None,
            dominance: Dominance::default(),
            demo_multipliers: changepoint::DEMO_MULTIPLIERS.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_length == 0 || self.chain_length > 16 {
            return Err(Error::Config(format!("chain_length must be in 1..=16, got {}", self.chain_length)));
        }
        if self.max_arity == 0 || self.max_arity > self.chain_length {
            return Err(Error::Config(format!("max_arity must be in 1..={}, got {}", self.chain_length, self.max_arity)));
        }
        if self.pipeline.kme.grid_points != 1 << self.chain_length {
            return Err(Error::Config(format!(
                "grid_points {} does not match 2^chain_length = {}",
                self.pipeline.kme.grid_points,
                1usize << self.chain_length
            )));
        }
        if self.kl_bins == 0 {
            return Err(Error::Config("kl_bins must be positive".into()));
        }
        if self.cluster_k == Some(0) {
            return Err(Error::Config("cluster_k must be positive".into()));
        }
        if self.demo_multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Config("demo_multipliers must be positive".into()));
        }
        self.pipeline.validate()
    }

    pub fn operator_count(&self) -> usize {
        basis_size(self.max_arity)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }

    fn header(&self) -> String {
        format!("# config_sha256={} T={} L={} K_max={}\n", self.hash(), self.operator_count(), self.chain_length, self.max_arity)
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinchain", version, about = "Spin-chain Hamiltonian models of time-series kernel mean embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated dataset as CSV plus a JSON sidecar.
    GenData(GenDataArgs),
    /// Sliding-window change-point detection with ROC against the KL baseline.
    Changepoint(ChangepointArgs),
    /// Dominance-histogram and DWT clustering with CCC, silhouette and ARI.
    Cluster(ClusterArgs),
    /// Mode-uncertainty curves of the sine demo at two kernel widths.
    UqDemo(UqDemoArgs),
    /// Print the operator basis.
    Basis(BasisArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    MeanJumps,
    VarianceJumps,
    SineDemo,
    SyntheticVoices,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides SPINCHAIN_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub chain_length: Option<usize>,
    #[arg(long)]
    pub max_arity: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub bandwidth_multiplier: Option<f64>,
    #[arg(long)]
    pub strength: Option<f64>,
    #[arg(long, value_parser = parse_selection)]
    pub selection: Option<SelectionRule>,
}

fn parse_selection(s: &str) -> std::result::Result<SelectionRule, String> {
    match s {
        "lowest-index-basis" => Ok(SelectionRule::LowestIndexBasis),
        "min-energy-projection" => Ok(SelectionRule::MinEnergyProjection),
        _ => Err(format!("unknown selection rule {s:?} (lowest-index-basis, min-energy-projection)")),
    }
}

impl CommonArgs {
    /// Defaults, then the file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.chain_length {
            cfg.chain_length = v;
            cfg.pipeline.kme.grid_points = 1usize.checked_shl(v as u32).unwrap_or(0);
        }
        if let Some(v) = self.max_arity {
            cfg.max_arity = v;
        }
        if let Some(v) = self.window {
            cfg.pipeline.plan.window = v;
        }
        if let Some(v) = self.stride {
            cfg.pipeline.plan.stride = v;
        }
        if let Some(v) = self.modes {
            cfg.pipeline.modes = v;
        }
        if let Some(v) = self.bandwidth_multiplier {
            cfg.pipeline.kme.bandwidth_multiplier = v;
        }
        if let Some(v) = self.strength {
            cfg.pipeline.perturbation.strength = v;
        }
        if let Some(v) = self.selection {
            cfg.pipeline.selection = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn threads(&self) -> Result<Option<usize>> {
        if let Some(n) = self.threads {
            return if n == 0 { Err(Error::Config("--threads must be positive".into())) } else { Ok(Some(n)) };
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
            },
            Err(_) => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[arg(value_enum)]
    pub kind: DataKind,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output CSV (a directory for synthetic-voices).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ChangepointArgs {
    /// Series CSV; its JSON sidecar supplies the truth.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate mean-jumps or variance-jumps with the configured seed.
    #[arg(long, value_enum)]
    pub synthetic: Option<DataKind>,
    /// Also write every window's eigen-modes.
    #[arg(long)]
    pub emit_modes: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// CSV or WAV files, or directories of them (one class per directory).
    pub inputs: Vec<PathBuf>,
    /// Use the generated 5×5 synthetic voice corpus.
    #[arg(long, conflicts_with = "inputs")]
    pub synthetic: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct UqDemoArgs {
    /// Series CSV (default: the generated sine demo).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long, default_value_t = 6)]
    pub chain_length: usize,
    #[arg(long, default_value_t = 5)]
    pub max_arity: usize,
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => cmd_gen_data(a),
        Command::Changepoint(a) => with_threads(&a.common, || cmd_changepoint(a)),
        Command::Cluster(a) => with_threads(&a.common, || cmd_cluster(a)),
        Command::UqDemo(a) => with_threads(&a.common, || cmd_uq_demo(a)),
        Command::Basis(a) => cmd_basis(a),
    }
}

fn with_threads(common: &CommonArgs, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    match common.threads()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
        None => f(),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text)
}

/// `t,value` CSV of a series plus its sidecar.
pub fn write_series(path: &Path, ts: &TimeSeries, header: Option<&str>) -> Result<()> {
    let mut s = String::from(header.unwrap_or(""));
    s.push_str("t,value\n");
    for (t, v) in ts.samples.iter().enumerate() {
        writeln!(s, "{t},{v}").expect("string write");
    }
    write_file(path, s)?;
    write_json(&datasets::sidecar_path(path), &serde_json::to_value(SeriesMeta::from(ts))?)
}

fn generate(kind: DataKind, seed: u64) -> Vec<TimeSeries> {
    match kind {
        DataKind::MeanJumps => vec![datasets::gen_mean_jumps(seed)],
        DataKind::VarianceJumps => vec![datasets::gen_variance_jumps(seed)],
        DataKind::SineDemo => vec![datasets::gen_sine_demo()],
        DataKind::SyntheticVoices => datasets::gen_synthetic_voices(seed),
    }
}

fn kind_name(kind: DataKind) -> &'static str {
    match kind {
        DataKind::MeanJumps => "mean-jumps",
        DataKind::VarianceJumps => "variance-jumps",
        DataKind::SineDemo => "sine-demo",
        DataKind::SyntheticVoices => "synthetic-voices",
    }
}

pub fn cmd_gen_data(a: &GenDataArgs) -> Result<()> {
    let series = generate(a.kind, a.seed);
    let name = kind_name(a.kind);
    if a.kind == DataKind::SyntheticVoices {
        let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(name));
        for (i, ts) in series.iter().enumerate() {
            write_series(&dir.join(format!("voice_{i:02}.csv")), ts, None)?;
        }
        say(&format!("wrote {} series to {}", series.len(), dir.display()));
    } else {
        let path = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
        write_series(&path, &series[0], None)?;
        say(&format!("wrote {} samples to {}", series[0].len(), path.display()));
    }
    Ok(())
}

fn basis_for(cfg: &RunConfig) -> Result<Arc<OperatorBasis>> {
    Ok(Arc::new(build_basis(cfg.chain_length, cfg.max_arity)?))
}

fn roc_csv(header: &str, curve: &RocCurve) -> String {
    let mut s = String::from(header);
    s.push_str("threshold,fpr,tpr\n");
    for p in &curve.points {
        writeln!(s, "{},{},{}", p.threshold, p.fpr, p.tpr).expect("string write");
    }
    s
}

fn peak_list(signal: &[f64], cfg: &RunConfig) -> serde_json::Value {
    let peaks: Vec<_> = changepoint::find_peaks(signal, cfg.roc.min_prominence)
        .into_iter()
        .map(|l| json!({"window": l, "start": l * cfg.pipeline.plan.stride, "height": signal[l], "prominence": changepoint::prominence(signal, l)}))
        .collect();
    serde_json::Value::Array(peaks)
}

/// Everything `changepoint` emits, kept in memory for tests.
#[derive(Clone, Debug)]
pub struct ChangepointReport {
    pub output: PipelineOutput,
    pub signal: Vec<f64>,
    pub kl: Option<Vec<f64>>,
    pub roc_spin: Option<RocCurve>,
    pub roc_kl: Option<RocCurve>,
    pub uq_jump_mean: Option<f64>,
    pub uq_mid_mean: Option<f64>,
}

pub fn analyze_series(ts: &TimeSeries, cfg: &RunConfig, basis: &Arc<OperatorBasis>) -> Result<ChangepointReport> {
    let output = changepoint::run_pipeline(&ts.samples, &cfg.pipeline, basis)?;
    let signal = changepoint::distance_signal(&output, cfg.pipeline.modes)?;
    let plan = cfg.pipeline.plan;
    let kl = if ts.len() >= 2 * plan.window { Some(changepoint::kl_baseline(&ts.samples, &plan, cfg.kl_bins)?) } else { None };
    let (mut roc_spin, mut roc_kl, mut uq_jump_mean, mut uq_mid_mean) = (None, None, None, None);
    if let Some(truth) = ts.truth.as_ref().filter(|t| !t.is_empty()) {
        roc_spin = Some(changepoint::roc(&signal, truth, &plan, &cfg.roc)?);
        if let Some(k) = &kl {
            roc_kl = Some(changepoint::roc(k, truth, &plan, &cfg.roc)?);
        }
        let (jump, mid) = changepoint::split_jump_windows(&plan.starts(ts.len()), plan.window, truth);
        let mean = |ix: &[usize]| {
            let v: Vec<f64> = ix.iter().filter_map(|&l| output.window(l)).map(|w| w.uq).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        uq_jump_mean = mean(&jump);
        uq_mid_mean = mean(&mid);
    }
    Ok(ChangepointReport { output, signal, kl, roc_spin, roc_kl, uq_jump_mean, uq_mid_mean })
}

fn load_input(path: &Path) -> Result<TimeSeries> {
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        datasets::preprocess_voice(&datasets::load_wav(path)?)
    } else {
        datasets::load_csv(path)
    }
}

pub fn cmd_changepoint(a: &ChangepointArgs) -> Result<()> {
    let cfg = a.common.resolve()?;
    let ts = match (&a.input, a.synthetic) {
        (Some(p), _) => load_input(p)?,
        (None, Some(k @ (DataKind::MeanJumps | DataKind::VarianceJumps))) => generate(k, cfg.seed).remove(0),
        (None, Some(k)) => return Err(Error::Config(format!("--synthetic {} has no change points", kind_name(k)))),
        (None, None) => return Err(Error::Config("either --input or --synthetic is required".into())),
    };
    let basis = basis_for(&cfg)?;
    let report = analyze_series(&ts, &cfg, &basis)?;
    let out = &a.common.out;
    let header = cfg.header();

    let mut windows = format!("{header}l,start,variance,approximate,uq,dist_prev\n");
    let mut uq = format!("{header}l,start,uq\n");
    for (l, start) in cfg.pipeline.plan.starts(ts.len()).into_iter().enumerate() {
        match report.output.window(l) {
            Some(w) => {
                writeln!(windows, "{l},{start},{},{},{},{}", w.variance, u8::from(w.approximate), w.uq, report.signal[l]).expect("string write");
                writeln!(uq, "{l},{start},{}", w.uq).expect("string write");
            }
            None => {
                writeln!(windows, "{l},{start},,,,").expect("string write");
                writeln!(uq, "{l},{start},").expect("string write");
            }
        }
    }
    write_file(&out.join("windows.csv"), windows)?;
    write_file(&out.join("uq.csv"), uq)?;

    if a.emit_modes {
        let mut modes = format!("{header}l,n,grid_index,re,im\n");
        for w in &report.output.windows {
            for (n, mode) in w.modes.iter().enumerate() {
                for (i, z) in mode.iter().enumerate() {
                    writeln!(modes, "{},{n},{i},{},{}", w.index, z.re, z.im).expect("string write");
                }
            }
        }
        write_file(&out.join("modes.csv"), modes)?;
    }
    if let Some(r) = &report.roc_spin {
        write_file(&out.join("roc_spin.csv"), roc_csv(&header, r))?;
    }
    if let Some(r) = &report.roc_kl {
        write_file(&out.join("roc_kl.csv"), roc_csv(&header, r))?;
    }
    write_json(
        &out.join("peaks.json"),
        &json!({
            "config_sha256": cfg.hash(),
            "spin": peak_list(&report.signal, &cfg),
            "kl": report.kl.as_ref().map(|k| peak_list(k, &cfg)),
        }),
    )?;
    let summary = json!({
        "config_sha256": cfg.hash(),
        "config": cfg,
        "T": cfg.operator_count(),
        "L": cfg.chain_length,
        "K_max": cfg.max_arity,
        "provenance": ts.provenance,
        "samples": ts.len(),
        "windows": report.output.window_count,
        "skipped": report.output.skipped,
        "sigma": report.output.sigma,
        "grid": [report.output.grid_lo, report.output.grid_hi],
        "approximate_windows": report.output.windows.iter().filter(|w| w.approximate).count(),
        "tied_selections": report.output.windows.iter().filter(|w| w.tie).count(),
        "auc_spin": report.roc_spin.as_ref().map(|r| r.auc),
        "auc_kl": report.roc_kl.as_ref().map(|r| r.auc),
        "uq_jump_mean": report.uq_jump_mean,
        "uq_mid_mean": report.uq_mid_mean,
    });
    write_json(&out.join("summary.json"), &summary)?;
    say(&format!(
        "{} windows ({} skipped); auc_spin {} auc_kl {}; outputs in {}",
        report.output.window_count,
        report.output.skipped.len(),
        fmt_opt(report.roc_spin.as_ref().map(|r| r.auc)),
        fmt_opt(report.roc_kl.as_ref().map(|r| r.auc)),
        out.display()
    ));
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

/// Series for `cluster`: files as given, directories expanded in name order;
/// directory inputs without sidecar labels are labelled by directory.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<TimeSeries>> {
    let mut out = Vec::new();
    let mut dir_index = 0;
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("wav")))
                .collect();
            files.sort();
            for f in files {
                let mut ts = load_input(&f)?;
                ts.label.get_or_insert(dir_index);
                out.push(ts);
            }
            dir_index += 1;
        } else {
            out.push(load_input(p)?);
        }
    }
    Ok(out)
}

/// Features, dendrograms and metrics for both methods.
#[derive(Clone, Debug)]
pub struct ClusterReport {
    pub spin: MethodReport,
    pub dwt: MethodReport,
    pub k: usize,
}

#[derive(Clone, Debug)]
pub struct MethodReport {
    pub features: Vec<FeatureVector>,
    pub distances: crate::linalg::RealMatrix,
    pub dendrogram: cluster::Dendrogram,
    pub metrics: cluster::ClusterMetrics,
}

pub fn cluster_series(series: &[TimeSeries], cfg: &RunConfig, basis: &Arc<OperatorBasis>) -> Result<ClusterReport> {
    if series.len() < 4 {
        return Err(Error::Config(format!("clustering needs at least 4 series, got {}", series.len())));
    }
    let labels: Option<Vec<usize>> = series.iter().map(|s| s.label).collect();
    let classes = labels.as_ref().map(|l| {
        let mut c = l.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    });
    let k = cfg.cluster_k.or(classes).unwrap_or(datasets::VOICE_CLASSES).min(series.len());
    let spin: Vec<FeatureVector> = series
        .iter()
        .map(|s| cluster::dominance_features(&s.samples, &cfg.pipeline, basis, cfg.dominance))
        .collect::<Result<_>>()?;
    let dwt: Vec<FeatureVector> = series.iter().map(|s| cluster::dwt_features(&s.samples)).collect::<Result<_>>()?;
    let method = |features: Vec<FeatureVector>| -> Result<MethodReport> {
        let (distances, dendrogram, metrics) = cluster::evaluate(&features, labels.as_deref(), k)?;
        Ok(MethodReport { features, distances, dendrogram, metrics })
    };
    Ok(ClusterReport { spin: method(spin)?, dwt: method(dwt)?, k })
}

fn heatmap_csv(header: &str, d: &crate::linalg::RealMatrix) -> String {
    let mut s = String::from(header);
    s.push_str("i,j,distance\n");
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            writeln!(s, "{i},{j},{}", d[(i, j)]).expect("string write");
        }
    }
    s
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let cfg = a.common.resolve()?;
    let series = if a.synthetic {
        datasets::gen_synthetic_voices(cfg.seed)
    } else if a.inputs.is_empty() {
        return Err(Error::Config("give input files or --synthetic".into()));
    } else {
        collect_inputs(&a.inputs)?
    };
    let basis = basis_for(&cfg)?;
    let report = cluster_series(&series, &cfg, &basis)?;
    let out = &a.common.out;
    let header = cfg.header();
    let mut metrics = serde_json::Map::new();
    for (name, m) in [("spin", &report.spin), ("dwt", &report.dwt)] {
        write_file(&out.join(format!("heatmap_{name}.csv")), heatmap_csv(&header, &m.distances))?;
        write_json(
            &out.join(format!("dendrogram_{name}.json")),
            &json!({"config_sha256": cfg.hash(), "dendrogram": m.dendrogram, "labels": m.metrics.labels}),
        )?;
        for note in &m.metrics.notes {
            eprintln!("warning: {name} {note}");
        }
        metrics.insert(name.into(), json!({"ccc": m.metrics.ccc, "ss": m.metrics.ss, "ari": m.metrics.ari, "notes": m.metrics.notes}));
    }
    metrics.insert(
        "meta".into(),
        json!({
            "config_sha256": cfg.hash(),
            "T": cfg.operator_count(),
            "L": cfg.chain_length,
            "K_max": cfg.max_arity,
            "linkage": report.spin.dendrogram.linkage,
            "k": report.k,
            "series": series.len(),
            "truth": series.iter().map(|s| s.label).collect::<Vec<_>>(),
        }),
    );
    write_json(&out.join("metrics.json"), &serde_json::Value::Object(metrics))?;
    say(&format!(
        "spin: ccc {} ss {} ari {}; dwt: ccc {} ss {} ari {}",
        fmt_opt(report.spin.metrics.ccc),
        fmt_opt(report.spin.metrics.ss),
        fmt_opt(report.spin.metrics.ari),
        fmt_opt(report.dwt.metrics.ccc),
        fmt_opt(report.dwt.metrics.ss),
        fmt_opt(report.dwt.metrics.ari)
    ));
    Ok(())
}

pub fn cmd_uq_demo(a: &UqDemoArgs) -> Result<()> {
    let cfg = a.common.resolve()?;
    let ts = match &a.input {
        Some(p) => load_input(p)?,
        None => datasets::gen_sine_demo(),
    };
    let basis = basis_for(&cfg)?;
    let demo = changepoint::uq_demo(&ts.samples, changepoint::DEMO_RANGE, &cfg.demo_multipliers, &cfg.pipeline, &basis)?;
    let header = cfg.header();
    let mut csv = format!("{header}multiplier,sigma,n,grid_index,x,v,v_normalized\n");
    let mut tails = Vec::new();
    for d in &demo {
        let norm = d.normalized();
        let mut in_tails = Vec::new();
        for (n, curve) in d.curves.iter().enumerate() {
            for (i, v) in curve.iter().enumerate() {
                writeln!(csv, "{},{},{n},{i},{},{v},{}", d.multiplier, d.sigma, d.grid[i], norm[n][i]).expect("string write");
            }
            in_tails.push(changepoint::peaks_in_tails(curve, &d.grid, &ts.samples)?);
        }
        tails.push(json!({"multiplier": d.multiplier, "sigma": d.sigma, "peaks_in_tails": in_tails}));
    }
    let out = &a.common.out;
    write_file(&out.join("uq_demo.csv"), csv)?;
    write_json(&out.join("uq_demo.json"), &json!({"config_sha256": cfg.hash(), "widths": tails}))?;
    say(&format!("{} widths x {} modes x {} points written to {}", demo.len(), cfg.pipeline.modes, cfg.pipeline.kme.grid_points, out.display()));
    Ok(())
}

pub fn cmd_basis(a: &BasisArgs) -> Result<()> {
    let basis = build_basis(a.chain_length, a.max_arity).map_err(|e| Error::Config(e.to_string()))?;
    let d = basis.descriptor();
    say(&serde_json::to_string_pretty(&json!({"hash": d.hash(), "descriptor": d}))?);
    Ok(())
}

fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}
