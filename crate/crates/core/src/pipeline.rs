//! End-to-end experiments: cross-asset influence, per-lag feedback profile,
//! and the PCA component sweep. Each `run_*` loads the configured files,
//! computes, and writes its artifacts plus a `run_manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::lagfeatures::{build_lag_matrix, feedback_profile, node_count, FeedbackProfile, LagMatrix, LagSpec, SignSummary};
use crate::lasso::{influence_weights, LassoConfig, LassoFit};
use crate::pca::{explained_variance_ratio, fit_pca_with, project, PcaScaling};
use crate::regress::{fit_ols, metrics, MetricsReport};
use crate::report::{fmt6, to_json};
use crate::stats::{correlation_matrix, CorrMatrix};
use crate::synth::{generate, Generated, GeneratorSpec};
use crate::timeseries::{align_inner, parse_ohlcv_csv, split_point, AlignedPanel, Channel, RowSlice, SeriesFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub label: String,
}

impl InputFile {
    /// Labels a path by its file stem.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self { path, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRange {
    pub k_min: usize,
    pub k_max: usize,
    pub step: usize,
}

impl Default for SweepRange {
    fn default() -> Self {
        Self {
            k_min: 5,
            k_max: 105,
            step: 5,
        }
    }
}

impl SweepRange {
    pub fn ks(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).step_by(self.step.max(1)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 || self.k_min > self.k_max || self.step < 1 {
            return Err(Error::Config(format!(
                "sweep range needs 1 <= k_min <= k_max and step >= 1, got {}..{} step {}",
                self.k_min, self.k_max, self.step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub inputs: Vec<InputFile>,
    /// Label of the instrument being modeled; defaults to the first input.
    pub target: Option<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// Price field used for the cross-asset panel.
    pub channel: Channel,
    /// Use day-over-day log returns instead of price levels for the panel.
    pub returns: bool,
    pub lag: LagSpec,
    pub lasso: LassoConfig,
    pub sweep: SweepRange,
    pub train_fraction: f64,
    pub pca_scaling: PcaScaling,
    pub output_dir: PathBuf,
    /// Seed for the synthetic generators; the pipeline itself draws no randomness.
    pub seed: u64,
    pub preset: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            target: None,
            start: None,
            end: None,
            channel: Channel::Close,
            returns: false,
            lag: LagSpec::price_history(),
            lasso: LassoConfig::default(),
            sweep: SweepRange::default(),
            train_fraction: 0.8,
            pca_scaling: PcaScaling::Covariance,
            output_dir: PathBuf::from("out"),
            seed: 0,
            preset: None,
        }
    }
}

pub const PRESETS: [&str; 3] = ["price-history", "deep-history", "feedback"];

impl ExperimentConfig {
    /// Defaults for a named preset:
    /// `price-history` (4 price channels x 100 lags, k = 5..=105 step 5),
    /// `deep-history` (405 nodes, k = 5..=405 step 5) and
    /// `feedback` (close lags 1..=100 with same-day open/high/low).
    pub fn preset(name: &str) -> Result<Self> {
        let mut cfg = Self {
            preset: Some(name.to_string()),
            ..Self::default()
        };
        match name {
            "price-history" => {}
            "deep-history" => {
                cfg.lag = LagSpec::deep_history();
                cfg.sweep = SweepRange {
                    k_min: 5,
                    k_max: 405,
                    step: 5,
                };
            }
            "feedback" => cfg.lag = LagSpec::feedback(100),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(cfg)
    }

    /// Parses a JSON config. Keys absent from the file take the values of the
    /// named `preset`, or the plain defaults when no preset is given.
    pub fn from_json(text: &str) -> Result<Self> {
        let user: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        let obj = user
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let base = match obj.get("preset").and_then(|p| p.as_str()) {
            Some(name) => Self::preset(name)?,
            None => Self::default(),
        };
        let mut merged = serde_json::to_value(&base).expect("config serializes");
        let slot = merged.as_object_mut().expect("config is an object");
        for (k, v) in obj {
            slot.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(merged).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.lag.validate()?;
        self.lasso.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return Err(Error::Config(format!("start {s} is after end {e}")));
            }
        }
        Ok(())
    }

    pub fn target_label(&self) -> Result<String> {
        match &self.target {
            Some(t) => Ok(t.clone()),
            None => self
                .inputs
                .first()
                .map(|i| i.label.clone())
                .ok_or_else(|| Error::Config("no input files configured".into())),
        }
    }

    /// Reads and date-filters every input file.
    pub fn load_frames(&self) -> Result<Vec<SeriesFrame>> {
        if self.inputs.is_empty() {
            return Err(Error::Config("no input files configured".into()));
        }
        self.inputs
            .iter()
            .map(|input| {
                let text = fs::read_to_string(&input.path).map_err(|e| Error::io(&input.path, e))?;
                let frame = parse_ohlcv_csv(&text, &input.label).map_err(|e| match e {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("{}: {message}", input.path.display()),
                    },
                    Error::Validation { line, date, message } => Error::Validation {
                        line,
                        date,
                        message: format!("{}: {message}", input.path.display()),
                    },
                    other => other,
                })?;
                Ok(frame.between(self.start, self.end))
            })
            .collect()
    }

    fn target_frame(&self) -> Result<SeriesFrame> {
        let target = self.target_label()?;
        self.load_frames()?
            .into_iter()
            .find(|f| f.instrument() == target)
            .ok_or_else(|| Error::Config(format!("target '{target}' is not among the inputs")))
    }
}

/// Echo of what produced an output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub rows: BTreeMap<&'a str, usize>,
    pub details: serde_json::Value,
    pub notes: Vec<String>,
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn write_manifest(dir: &Path, manifest: &RunManifest<'_>) -> Result<PathBuf> {
    write_artifact(dir, "run_manifest.json", &to_json(manifest))
}

fn lag_layout_note(spec: &LagSpec) -> String {
    format!(
        "lag layout: {} channel(s) x {} history points + {} same-day column(s) = {} nodes; \
         reading a 400/405-node design as 4 price channels x 100 lags is an interpretation",
        spec.channels.len(),
        spec.history_points,
        spec.covariates.len(),
        node_count(spec)
    )
}

// ---------------------------------------------------------------------------
// influence

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceReport {
    pub target: String,
    pub correlations: CorrMatrix,
    pub fit: LassoFit,
    pub rows: usize,
    pub date_range: (NaiveDate, NaiveDate),
}

/// Correlation matrix of the whole panel and LASSO weights of every other column on `target`.
pub fn influence_study(panel: &AlignedPanel, target: &str, cfg: &LassoConfig) -> Result<InfluenceReport> {
    let correlations = correlation_matrix(panel)?;
    let fit = influence_weights(panel, target, cfg)?;
    let dates = panel.dates();
    Ok(InfluenceReport {
        target: target.to_string(),
        correlations,
        fit,
        rows: panel.len(),
        date_range: (dates[0], dates[dates.len() - 1]),
    })
}

pub fn build_panel(frames: &[SeriesFrame], config: &ExperimentConfig) -> Result<AlignedPanel> {
    let panel = align_inner(frames, config.channel)?;
    if config.returns {
        panel.log_returns()
    } else {
        Ok(panel)
    }
}

/// Writes `corr_matrix.csv` and `corr_heatmap.svg`.
pub fn write_correlations(dir: &Path, corr: &CorrMatrix) -> Result<()> {
    write_artifact(dir, "corr_matrix.csv", &corr.to_csv())?;
    write_artifact(dir, "corr_heatmap.svg", &corr.to_svg())?;
    Ok(())
}

/// Correlation-only run over the configured inputs.
pub fn run_correlate(config: &ExperimentConfig) -> Result<CorrMatrix> {
    config.validate()?;
    let panel = build_panel(&config.load_frames()?, config)?;
    let corr = correlation_matrix(&panel)?;
    let dir = &config.output_dir;
    write_correlations(dir, &corr)?;
    let dates = panel.dates();
    write_manifest(
        dir,
        &RunManifest {
            command: "correlate",
            version: env!("CARGO_PKG_VERSION"),
            config,
            rows: BTreeMap::from([("panel", panel.len())]),
            details: serde_json::json!({
                "date_range": [dates[0].to_string(), dates[dates.len() - 1].to_string()],
                "series": if config.returns { "log_returns" } else { "levels" },
            }),
            notes: Vec::new(),
        },
    )?;
    Ok(corr)
}

pub fn run_influence(config: &ExperimentConfig) -> Result<InfluenceReport> {
    config.validate()?;
    let frames = config.load_frames()?;
    if frames.len() < 2 {
        return Err(Error::Config("influence needs at least 2 instruments".into()));
    }
    let target = config.target_label()?;
    let panel = build_panel(&frames, config)?;
    let report = influence_study(&panel, &target, &config.lasso)?;

    let dir = &config.output_dir;
    write_correlations(dir, &report.correlations)?;
    write_artifact(dir, "influence_weights.csv", &report.fit.weights_csv())?;
    write_artifact(dir, "influence_weights.json", &report.fit.to_json())?;
    let correlations_with_target: BTreeMap<&str, f64> = report
        .fit
        .labels
        .iter()
        .filter_map(|l| Some((l.as_str(), report.correlations.get(&target, l)?)))
        .collect();
    write_manifest(
        dir,
        &RunManifest {
            command: "influence",
            version: env!("CARGO_PKG_VERSION"),
            config,
            rows: BTreeMap::from([("panel", report.rows)]),
            details: serde_json::json!({
                "target": target,
                "lambda": report.fit.lambda,
                "lambda_selected_by_validation": report.fit.selection.is_some(),
                "standardized": config.lasso.standardize_features,
                "date_range": [report.date_range.0.to_string(), report.date_range.1.to_string()],
                "series": if config.returns { "log_returns" } else { "levels" },
                "correlation_with_target": correlations_with_target,
            }),
            notes: Vec::new(),
        },
    )?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// lag matrix and synthetic data

/// Writes `lag_matrix.csv` for the target instrument.
pub fn run_lags(config: &ExperimentConfig) -> Result<LagMatrix> {
    config.validate()?;
    let frame = config.target_frame()?;
    let lm = build_lag_matrix(&frame, &config.lag)?;
    let dir = &config.output_dir;
    write_artifact(dir, "lag_matrix.csv", &lm.to_csv())?;
    write_manifest(
        dir,
        &RunManifest {
            command: "lags",
            version: env!("CARGO_PKG_VERSION"),
            config,
            rows: BTreeMap::from([("series", frame.len()), ("lag_matrix", lm.rows())]),
            details: serde_json::json!({ "node_count": node_count(&config.lag) }),
            notes: vec![lag_layout_note(&config.lag)],
        },
    )?;
    Ok(lm)
}

#[derive(Debug, Clone, Serialize)]
struct GenerateManifest<'a> {
    command: &'a str,
    version: &'a str,
    generator: &'a GeneratorSpec,
    rows: usize,
}

/// Writes `generated.csv` (OHLCV for series kinds, Date + columns for panels).
pub fn run_generate(spec: &GeneratorSpec, dir: &Path) -> Result<Generated> {
    let data = generate(spec)?;
    write_artifact(dir, "generated.csv", &data.to_csv())?;
    write_artifact(
        dir,
        "run_manifest.json",
        &to_json(&GenerateManifest {
            command: "generate",
            version: env!("CARGO_PKG_VERSION"),
            generator: spec,
            rows: spec.length,
        }),
    )?;
    Ok(data)
}

// ---------------------------------------------------------------------------
// feedback profile

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackReport {
    pub profile: FeedbackProfile,
    pub signs: SignSummary,
    pub rows: usize,
}

/// Rows beyond the lag window required before a profile is attempted.
pub const PROFILE_MIN_EXTRA_ROWS: usize = 10;

pub fn feedback_study(frame: &SeriesFrame, spec: &LagSpec, cfg: &LassoConfig) -> Result<FeedbackReport> {
    let needed = spec.history_points + PROFILE_MIN_EXTRA_ROWS + 1;
    if frame.len() < needed {
        return Err(Error::Input(format!(
            "series '{}' has {} rows; a profile with {} history points needs at least {needed}",
            frame.instrument(),
            frame.len(),
            spec.history_points
        )));
    }
    let profile = feedback_profile(frame, spec, cfg)?;
    Ok(FeedbackReport {
        signs: profile.sign_summary(),
        rows: frame.len() - spec.history_points,
        profile,
    })
}

pub fn run_feedback_profile(config: &ExperimentConfig) -> Result<FeedbackReport> {
    config.validate()?;
    let frame = config.target_frame()?;
    let report = feedback_study(&frame, &config.lag, &config.lasso)?;
    let dir = &config.output_dir;
    write_artifact(dir, "feedback_profile.csv", &report.profile.to_csv())?;
    let title = format!("{}: LASSO weight per lag", frame.instrument());
    write_artifact(dir, "feedback_profile.svg", &report.profile.to_svg(&title))?;
    write_manifest(
        dir,
        &RunManifest {
            command: "profile",
            version: env!("CARGO_PKG_VERSION"),
            config,
            rows: BTreeMap::from([("series", frame.len()), ("lag_matrix", report.rows)]),
            details: serde_json::json!({
                "lambda": report.profile.fit.lambda,
                "lambda_selected_by_validation": report.profile.fit.selection.is_some(),
                "converged": report.profile.fit.converged,
                "sign_summary": report.signs,
            }),
            notes: vec![lag_layout_note(&config.lag)],
        },
    )?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// PCA sweep

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub train: MetricsReport,
    pub test: MetricsReport,
    pub evr_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub date: NaiveDate,
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    /// Smallest k attaining the lowest test mse.
    pub chosen_k: usize,
    pub scaling: PcaScaling,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Fingerprint of the basis fitted on the training rows (all swept k are its prefixes).
    pub basis_fingerprint: String,
    /// Train then test rows for the chosen k.
    pub predictions: Vec<Prediction>,
}

impl SweepResult {
    pub fn record(&self, k: usize) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,train_mse,test_mse,train_r2,test_r2,evr_sum\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k,
                fmt6(r.train.mse),
                fmt6(r.test.mse),
                fmt6(r.train.r2),
                fmt6(r.test.r2),
                fmt6(r.evr_sum)
            ));
        }
        out
    }

    pub fn predictions_csv(&self) -> String {
        let mut out = String::from("date,actual,predicted\n");
        for p in &self.predictions {
            out.push_str(&format!("{},{},{}\n", p.date, fmt6(p.actual), fmt6(p.predicted)));
        }
        out
    }
}

/// For each k: PCA on the training rows only, project both partitions with
/// that basis, OLS on the training scores, and score both partitions.
pub fn pca_sweep(
    x: &DesignMatrix,
    y: &[f64],
    dates: &[NaiveDate],
    range: &SweepRange,
    train_fraction: f64,
    scaling: PcaScaling,
) -> Result<SweepResult> {
    range.validate()?;
    let n = x.rows();
    if y.len() != n || dates.len() != n {
        return Err(Error::Input(format!(
            "{n} design rows, {} targets and {} dates",
            y.len(),
            dates.len()
        )));
    }
    if range.k_max > x.cols() {
        return Err(Error::Config(format!(
            "k_max {} exceeds the {} available feature columns",
            range.k_max,
            x.cols()
        )));
    }
    let head = split_point(n, train_fraction)?;
    if head < range.k_max + 2 {
        return Err(Error::Config(format!(
            "{head} training rows cannot support regressions on up to {} components",
            range.k_max
        )));
    }
    if n - head < 2 {
        return Err(Error::Split(format!("test partition has only {} row(s)", n - head)));
    }
    let (train_x, test_x) = (x.slice_rows(0, head), x.slice_rows(head, n));
    let (train_y, test_y) = (&y[..head], &y[head..]);

    let full = fit_pca_with(&train_x, range.k_max, scaling)?;
    let ks = range.ks();
    let runs: Vec<(SweepRecord, Vec<f64>, Vec<f64>)> = ks
        .par_iter()
        .map(|&k| {
            let basis = full.truncate(k)?;
            let train_scores = project(&train_x, &basis)?;
            let test_scores = project(&test_x, &basis)?;
            let ols = fit_ols(&train_scores, train_y)?;
            let train_pred = ols.predict(&train_scores)?;
            let test_pred = ols.predict(&test_scores)?;
            let record = SweepRecord {
                k,
                train: metrics(train_y, &train_pred)?,
                test: metrics(test_y, &test_pred)?,
                evr_sum: explained_variance_ratio(&basis)?.iter().sum(),
            };
            Ok((record, train_pred, test_pred))
        })
        .collect::<Result<_>>()?;

    let best = runs
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.0.test.mse < runs[best].0.test.mse { i } else { best });
    let (_, train_pred, test_pred) = &runs[best];
    let predictions = dates
        .iter()
        .zip(y)
        .zip(train_pred.iter().chain(test_pred))
        .map(|((&date, &actual), &predicted)| Prediction { date, actual, predicted })
        .collect();
    let records: Vec<SweepRecord> = runs.iter().map(|r| r.0).collect();
    if records.windows(2).any(|w| w[1].evr_sum < w[0].evr_sum - 1e-12) {
        return Err(Error::Invariant("explained variance decreased with k".into()));
    }
    Ok(SweepResult {
        chosen_k: records[best].k,
        records,
        scaling,
        train_rows: head,
        test_rows: n - head,
        basis_fingerprint: full.fingerprint(),
        predictions,
    })
}

pub fn run_pca_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let nodes = node_count(&config.lag);
    if config.sweep.k_max > nodes {
        return Err(Error::Config(format!(
            "k_max {} exceeds the node count {nodes} of the lag layout",
            config.sweep.k_max
        )));
    }
    let frame = config.target_frame()?;
    let lm = build_lag_matrix(&frame, &config.lag)?;
    let result = pca_sweep(&lm.x, &lm.y, &lm.dates, &config.sweep, config.train_fraction, config.pca_scaling)?;

    let dir = &config.output_dir;
    write_artifact(dir, "sweep.csv", &result.to_csv())?;
    write_artifact(dir, &format!("predictions_k{}.csv", result.chosen_k), &result.predictions_csv())?;
    let split_date = lm.dates[result.train_rows];
    write_manifest(
        dir,
        &RunManifest {
            command: "sweep",
            version: env!("CARGO_PKG_VERSION"),
            config,
            rows: BTreeMap::from([
                ("series", frame.len()),
                ("lag_matrix", lm.rows()),
                ("train", result.train_rows),
                ("test", result.test_rows),
            ]),
            details: serde_json::json!({
                "node_count": nodes,
                "chosen_k": result.chosen_k,
                "selection_metric": "test_mse",
                "pca_scaling": result.scaling,
                "first_test_date": split_date.to_string(),
                "basis_fingerprint": result.basis_fingerprint,
                "records": result.records,
            }),
            notes: vec![lag_layout_note(&config.lag)],
        },
    )?;
    Ok(result)
}
