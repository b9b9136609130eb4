//! Daily OHLCV series: parsing, validation, calendar alignment and
//! chronological splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ISO_FORMAT: &str = "%Y-%m-%d";
const US_FORMAT: &str = "%m/%d/%Y";

/// One of the five per-day price record fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Open,
    High,
    Low,
    Close,
    Volume,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Open,
        Channel::High,
        Channel::Low,
        Channel::Close,
        Channel::Volume,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Open => "open",
            Channel::High => "high",
            Channel::Low => "low",
            Channel::Close => "close",
            Channel::Volume => "volume",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Input(format!("unknown channel '{s}'")))
    }
}

/// A single trading day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    pub fn get(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Open => self.open,
            Channel::High => self.high,
            Channel::Low => self.low,
            Channel::Close => self.close,
            Channel::Volume => self.volume,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} price {v} must be finite and > 0"));
            }
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return Err(format!("volume {} must be finite and >= 0", self.volume));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} exceeds min(open {}, close {})",
                self.low, self.open, self.close
            ));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} is below max(open {}, close {})",
                self.high, self.open, self.close
            ));
        }
        Ok(())
    }
}

/// One instrument's dated OHLCV table, strictly increasing in date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFrame {
    instrument: String,
    bars: Vec<Bar>,
    volume_missing: bool,
}

impl SeriesFrame {
    /// Sorts `bars` by date and validates every row.
    pub fn new(instrument: impl Into<String>, bars: Vec<Bar>, volume_missing: bool) -> Result<Self> {
        let numbered: Vec<(usize, Bar)> = bars.into_iter().enumerate().map(|(i, b)| (i + 1, b)).collect();
        Self::from_numbered(instrument.into(), numbered, volume_missing)
    }

    fn from_numbered(instrument: String, mut rows: Vec<(usize, Bar)>, volume_missing: bool) -> Result<Self> {
        for (line, bar) in &rows {
            bar.check().map_err(|message| Error::Validation {
                line: *line,
                date: bar.date.to_string(),
                message,
            })?;
        }
        rows.sort_by_key(|(_, b)| b.date);
        for pair in rows.windows(2) {
            if pair[0].1.date == pair[1].1.date {
                return Err(Error::Validation {
                    line: pair[0].0.max(pair[1].0),
                    date: pair[1].1.date.to_string(),
                    message: format!("duplicate date (also on line {})", pair[0].0.min(pair[1].0)),
                });
            }
        }
        Ok(Self {
            instrument,
            bars: rows.into_iter().map(|(_, b)| b).collect(),
            volume_missing,
        })
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// True when the source file had no volume column; volumes are then zero.
    pub fn volume_missing(&self) -> bool {
        self.volume_missing
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn channel(&self, channel: Channel) -> Vec<f64> {
        self.bars.iter().map(|b| b.get(channel)).collect()
    }

    pub fn date_range(&self) -> Option<(NaiveDate, NaiveDate)> {
        Some((self.bars.first()?.date, self.bars.last()?.date))
    }

    pub fn with_instrument(mut self, instrument: impl Into<String>) -> Self {
        self.instrument = instrument.into();
        self
    }

    /// Rows with `start <= date <= end`; either bound may be open.
    pub fn between(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> SeriesFrame {
        let bars = self
            .bars
            .iter()
            .filter(|b| start.is_none_or(|s| b.date >= s) && end.is_none_or(|e| b.date <= e))
            .copied()
            .collect();
        SeriesFrame {
            instrument: self.instrument.clone(),
            bars,
            volume_missing: self.volume_missing,
        }
    }

    /// Writes the frame in the same CSV layout [`parse_ohlcv_csv`] reads.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.volume_missing {
            "Date,Open,High,Low,Close\n"
        } else {
            "Date,Open,High,Low,Close,Volume\n"
        });
        for b in &self.bars {
            out.push_str(&format!(
                "{},{},{},{},{}",
                b.date.format(ISO_FORMAT),
                b.open,
                b.high,
                b.low,
                b.close
            ));
            if !self.volume_missing {
                out.push_str(&format!(",{}", b.volume));
            }
            out.push('\n');
        }
        out
    }
}

fn detect_date_format(field: &str, line: usize) -> Result<&'static str> {
    if field.contains('-') {
        Ok(ISO_FORMAT)
    } else if field.contains('/') {
        Ok(US_FORMAT)
    } else {
        Err(Error::Parse {
            line,
            message: format!("unrecognized date '{field}' (expected YYYY-MM-DD or MM/DD/YYYY)"),
        })
    }
}

/// Parses a headered OHLCV CSV. Header names are matched case-insensitively;
/// extra columns (including adjusted close) are ignored. Volume may be absent.
pub fn parse_ohlcv_csv(text: &str, instrument: &str) -> Result<SeriesFrame> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.trim_start_matches('\u{feff}').as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(["date", "open", "high", "low", "close"]) {
        *slot = find(name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("header is missing a '{name}' column"),
        })?;
    }
    let volume_idx = find("volume");
    let [date_idx, open_idx, high_idx, low_idx, close_idx] = index;

    let mut date_format = None;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let raw_date = field(date_idx);
        let format = match date_format {
            Some(f) => f,
            None => *date_format.insert(detect_date_format(raw_date, line)?),
        };
        let date = NaiveDate::parse_from_str(raw_date, format).map_err(|e| Error::Parse {
            line,
            message: format!("malformed date '{raw_date}': {e}"),
        })?;
        let number = |idx: usize, name: &str| -> Result<f64> {
            let raw = field(idx);
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric {name} '{raw}'"),
            })
        };
        let bar = Bar {
            date,
            open: number(open_idx, "open")?,
            high: number(high_idx, "high")?,
            low: number(low_idx, "low")?,
            close: number(close_idx, "close")?,
            volume: match volume_idx {
                Some(idx) => number(idx, "volume")?,
                None => 0.0,
            },
        };
        rows.push((line, bar));
    }
    SeriesFrame::from_numbered(instrument.to_string(), rows, volume_idx.is_none())
}

/// Several instruments on a shared trading-date axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl AlignedPanel {
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Input(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().position(|c| c.len() != dates.len()) {
            return Err(Error::Input(format!(
                "column '{}' has {} values for {} dates",
                labels[c],
                columns[c].len(),
                dates.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("panel dates must be strictly increasing".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Input(format!("duplicate column label '{dup}'")));
        }
        Ok(Self {
            dates,
            labels,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.columns[i].as_slice())
    }

    /// Day-over-day log returns; the first date is dropped.
    pub fn log_returns(&self) -> Result<AlignedPanel> {
        if self.len() < 2 {
            return Err(Error::Input("log returns need at least 2 dates".into()));
        }
        let mut columns = Vec::with_capacity(self.columns.len());
        for (label, col) in self.labels.iter().zip(&self.columns) {
            if col.iter().any(|&v| v <= 0.0) {
                return Err(Error::Input(format!(
                    "column '{label}' has nonpositive values; log returns undefined"
                )));
            }
            columns.push(col.windows(2).map(|w| (w[1] / w[0]).ln()).collect());
        }
        AlignedPanel::new(self.dates[1..].to_vec(), self.labels.clone(), columns)
    }

    /// `Date` column followed by one column per instrument.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Date");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, d) in self.dates.iter().enumerate() {
            out.push_str(&d.format(ISO_FORMAT).to_string());
            for c in &self.columns {
                out.push_str(&format!(",{}", c[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Inner-joins `frames` on date, taking `channel` from each.
pub fn align_inner(frames: &[SeriesFrame], channel: Channel) -> Result<AlignedPanel> {
    if frames.len() < 2 {
        return Err(Error::Input(format!(
            "alignment needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    if channel == Channel::Volume {
        if let Some(f) = frames.iter().find(|f| f.volume_missing()) {
            return Err(Error::Input(format!(
                "volume channel requested but '{}' has no volume column",
                f.instrument()
            )));
        }
    }
    let mut common: BTreeSet<NaiveDate> = frames[0].dates().into_iter().collect();
    for f in &frames[1..] {
        let dates: BTreeSet<NaiveDate> = f.dates().into_iter().collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        let ranges = frames
            .iter()
            .map(|f| match f.date_range() {
                Some((a, b)) => format!("{}: {a}..{b}", f.instrument()),
                None => format!("{}: empty", f.instrument()),
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Alignment { ranges });
    }
    let columns = frames
        .iter()
        .map(|f| {
            f.bars()
                .iter()
                .filter(|b| common.contains(&b.date))
                .map(|b| b.get(channel))
                .collect()
        })
        .collect();
    AlignedPanel::new(
        common.into_iter().collect(),
        frames.iter().map(|f| f.instrument().to_string()).collect(),
        columns,
    )
}

/// Row-ordered data that can be cut into contiguous blocks.
pub trait RowSlice: Sized {
    fn row_count(&self) -> usize;
    fn slice_rows(&self, start: usize, end: usize) -> Self;
}

impl RowSlice for AlignedPanel {
    fn row_count(&self) -> usize {
        self.len()
    }

    fn slice_rows(&self, start: usize, end: usize) -> Self {
        AlignedPanel {
            dates: self.dates[start..end].to_vec(),
            labels: self.labels.clone(),
            columns: self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }
}

impl RowSlice for SeriesFrame {
    fn row_count(&self) -> usize {
        self.len()
    }

    fn slice_rows(&self, start: usize, end: usize) -> Self {
        SeriesFrame {
            instrument: self.instrument.clone(),
            bars: self.bars[start..end].to_vec(),
            volume_missing: self.volume_missing,
        }
    }
}

impl<T: Clone> RowSlice for Vec<T> {
    fn row_count(&self) -> usize {
        self.len()
    }

    fn slice_rows(&self, start: usize, end: usize) -> Self {
        self[start..end].to_vec()
    }
}

/// Number of head rows for a chronological split, `floor(n * fraction)`.
pub fn split_point(rows: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    if rows < 2 {
        return Err(Error::Split(format!("need at least 2 rows, got {rows}")));
    }
    let head = (rows as f64 * train_fraction).floor() as usize;
    if head == 0 || head == rows {
        return Err(Error::Split(format!(
            "fraction {train_fraction} of {rows} rows leaves an empty {} part",
            if head == 0 { "head" } else { "tail" }
        )));
    }
    Ok(head)
}

/// Splits into the first `floor(n * train_fraction)` rows and the remainder, preserving order.
pub fn chronological_split<T: RowSlice>(data: &T, train_fraction: f64) -> Result<(T, T)> {
    let n = data.row_count();
    let head = split_point(n, train_fraction)?;
    Ok((data.slice_rows(0, head), data.slice_rows(head, n)))
}
