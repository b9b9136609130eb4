//! Lagged-price design matrices ("history points") and per-lag LASSO weights.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::lasso::{fit_lasso, LassoConfig, LassoFit};
use crate::matrix::Matrix;
use crate::report::fmt6;
use crate::timeseries::{Channel, RowSlice, SeriesFrame};

/// A same-day column added next to the lags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Open,
    High,
    Low,
    Close,
    Volume,
    /// Row position in the source series (trading-day ordinal).
    TimeIndex,
}

impl Covariate {
    pub fn channel(self) -> Option<Channel> {
        match self {
            Covariate::Open => Some(Channel::Open),
            Covariate::High => Some(Channel::High),
            Covariate::Low => Some(Channel::Low),
            Covariate::Close => Some(Channel::Close),
            Covariate::Volume => Some(Channel::Volume),
            Covariate::TimeIndex => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self.channel() {
            Some(c) => c.name(),
            None => "time_index",
        }
    }

    pub fn label(self) -> String {
        match self.channel() {
            Some(c) => format!("{c}_lag0"),
            None => "time_index".to_string(),
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Covariate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "time_index" | "time" => Ok(Covariate::TimeIndex),
            other => match other.parse::<Channel>()? {
                Channel::Open => Ok(Covariate::Open),
                Channel::High => Ok(Covariate::High),
                Channel::Low => Ok(Covariate::Low),
                Channel::Close => Ok(Covariate::Close),
                Channel::Volume => Ok(Covariate::Volume),
            },
        }
    }
}

/// Which lags and same-day columns feed the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSpec {
    pub channels: Vec<Channel>,
    pub history_points: usize,
    /// Same-day columns; empty disables them.
    #[serde(default)]
    pub covariates: Vec<Covariate>,
    #[serde(default = "default_target")]
    pub target: Channel,
}

fn default_target() -> Channel {
    Channel::Close
}

impl LagSpec {
    pub fn close_only(history_points: usize) -> Self {
        Self {
            channels: vec![Channel::Close],
            history_points,
            covariates: Vec::new(),
            target: Channel::Close,
        }
    }

    /// Four price channels, 100 lags each: 400 lag columns.
    pub fn price_history() -> Self {
        Self {
            channels: vec![Channel::Open, Channel::High, Channel::Low, Channel::Close],
            history_points: 100,
            covariates: Vec::new(),
            target: Channel::Close,
        }
    }

    /// [`LagSpec::price_history`] plus five same-day columns: 405 nodes.
    pub fn deep_history() -> Self {
        Self {
            covariates: vec![
                Covariate::Open,
                Covariate::High,
                Covariate::Low,
                Covariate::Volume,
                Covariate::TimeIndex,
            ],
            ..Self::price_history()
        }
    }

    /// Close lags with same-day open, high and low.
    pub fn feedback(history_points: usize) -> Self {
        Self {
            covariates: vec![Covariate::Open, Covariate::High, Covariate::Low],
            ..Self::close_only(history_points)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.history_points == 0 {
            return Err(Error::Config("history_points must be >= 1".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::Config("at least one lag channel is required".into()));
        }
        for (i, c) in self.channels.iter().enumerate() {
            if self.channels[..i].contains(c) {
                return Err(Error::Config(format!("channel '{c}' listed twice")));
            }
        }
        for (i, c) in self.covariates.iter().enumerate() {
            if self.covariates[..i].contains(c) {
                return Err(Error::Config(format!("covariate '{c}' listed twice")));
            }
            if c.channel() == Some(self.target) {
                return Err(Error::Config(format!(
                    "same-day '{c}' is the target and would leak into the features"
                )));
            }
        }
        Ok(())
    }

    pub fn uses_volume(&self) -> bool {
        self.channels.contains(&Channel::Volume) || self.covariates.contains(&Covariate::Volume)
    }
}

/// `|channels| * H + |covariates|`.
pub fn node_count(spec: &LagSpec) -> usize {
    spec.channels.len() * spec.history_points + spec.covariates.len()
}

/// Lagged design matrix with its same-day target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagMatrix {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub dates: Vec<NaiveDate>,
    pub target: Channel,
}

impl LagMatrix {
    pub fn rows(&self) -> usize {
        self.y.len()
    }

    /// `date,<features...>,<target>` with full-precision values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for l in self.x.labels() {
            out.push(',');
            out.push_str(l);
        }
        out.push_str(&format!(",{}\n", self.target));
        for i in 0..self.rows() {
            out.push_str(&self.dates[i].to_string());
            for v in self.x.values().row(i) {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.y[i]));
        }
        out
    }
}

impl RowSlice for LagMatrix {
    fn row_count(&self) -> usize {
        self.rows()
    }

    fn slice_rows(&self, start: usize, end: usize) -> Self {
        LagMatrix {
            x: self.x.slice_rows(start, end),
            y: self.y[start..end].to_vec(),
            dates: self.dates[start..end].to_vec(),
            target: self.target,
        }
    }
}

/// Builds one row per day that has a full lag window: row `t` holds
/// `channel[t - k]` for `k = 1..=H` (lag-major, channels in spec order),
/// then the same-day covariates, and targets `target[t]`.
pub fn build_lag_matrix(frame: &SeriesFrame, spec: &LagSpec) -> Result<LagMatrix> {
    spec.validate()?;
    let h = spec.history_points;
    if frame.len() <= h {
        return Err(Error::Input(format!(
            "series '{}' has {} rows; {} lags need at least {}",
            frame.instrument(),
            frame.len(),
            h,
            h + 1
        )));
    }
    if spec.uses_volume() && frame.volume_missing() {
        return Err(Error::Input(format!(
            "volume requested but '{}' has no volume column",
            frame.instrument()
        )));
    }
    let series: Vec<Vec<f64>> = spec.channels.iter().map(|&c| frame.channel(c)).collect();
    let same_day: Vec<Vec<f64>> = spec
        .covariates
        .iter()
        .map(|c| match c.channel() {
            Some(ch) => frame.channel(ch),
            None => (0..frame.len()).map(|t| t as f64).collect(),
        })
        .collect();
    let target = frame.channel(spec.target);

    let mut labels = Vec::with_capacity(node_count(spec));
    for k in 1..=h {
        for c in &spec.channels {
            labels.push(format!("{c}_lag{k}"));
        }
    }
    labels.extend(spec.covariates.iter().map(|c| c.label()));

    let rows = frame.len() - h;
    let mut values = Matrix::zeros(rows, labels.len());
    for (i, t) in (h..frame.len()).enumerate() {
        let row = values.row_mut(i);
        let mut j = 0;
        for k in 1..=h {
            for s in &series {
                row[j] = s[t - k];
                j += 1;
            }
        }
        for s in &same_day {
            row[j] = s[t];
            j += 1;
        }
    }
    let dates = frame.dates();
    Ok(LagMatrix {
        x: DesignMatrix::new(values, labels)?,
        y: target[h..].to_vec(),
        dates: dates[h..].to_vec(),
        target: spec.target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub channel: String,
    /// 0 for same-day covariates.
    pub lag: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSummary {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackProfile {
    /// Sorted by lag, then by channel order within a lag.
    pub entries: Vec<ProfileEntry>,
    pub fit: LassoFit,
}

impl FeedbackProfile {
    pub fn weight(&self, channel: &str, lag: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.channel == channel && e.lag == lag)
            .map(|e| e.weight)
    }

    /// Signs of the lagged weights (same-day covariates excluded).
    pub fn sign_summary(&self) -> SignSummary {
        let mut s = SignSummary {
            positive: 0,
            negative: 0,
            zero: 0,
        };
        for e in self.entries.iter().filter(|e| e.lag > 0) {
            match e.weight.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => s.positive += 1,
                Some(std::cmp::Ordering::Less) => s.negative += 1,
                _ => s.zero += 1,
            }
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,lag,weight\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.channel, e.lag, fmt6(e.weight)));
        }
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for e in self.entries.iter().filter(|e| e.lag > 0) {
            match series.iter_mut().find(|(name, _)| *name == e.channel) {
                Some((_, pts)) => pts.push((e.lag as f64, e.weight)),
                None => series.push((e.channel.clone(), vec![(e.lag as f64, e.weight)])),
            }
        }
        crate::svg::line_chart(title, "lag (trading days)", &series)
    }
}

/// LASSO of the target on its lag matrix, reported per (channel, lag).
pub fn feedback_profile(frame: &SeriesFrame, spec: &LagSpec, cfg: &LassoConfig) -> Result<FeedbackProfile> {
    let lm = build_lag_matrix(frame, spec)?;
    let fit = fit_lasso(&lm.x, &lm.y, cfg)?;
    let mut entries = Vec::with_capacity(fit.coefficients.len());
    let lagged = spec.channels.len() * spec.history_points;
    for (c, &w) in spec.covariates.iter().zip(&fit.coefficients[lagged..]) {
        entries.push(ProfileEntry {
            channel: c.name().to_string(),
            lag: 0,
            weight: w,
        });
    }
    let mut j = 0;
    for k in 1..=spec.history_points {
        for c in &spec.channels {
            entries.push(ProfileEntry {
                channel: c.name().to_string(),
                lag: k,
                weight: fit.coefficients[j],
            });
            j += 1;
        }
    }
    Ok(FeedbackProfile { entries, fit })
}
