//! Seeded synthetic series with known structure.
//!
//! All randomness comes from [`Xorshift64Star`], a fully specified 64-bit
//! generator, so any implementation can reproduce the same streams:
//!
//! * seeding: `state = splitmix64(seed)`, replaced by `0x9E3779B97F4A7C15` if zero
//! * step: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 0x2545F4914F6CDD1D`
//! * uniform: `((out >> 11) + 0.5) / 2^53`, in the open interval (0, 1)
//! * normal: Box–Muller on two uniforms `u1, u2`, returning
//!   `sqrt(-2 ln u1) cos(2 pi u2)` and caching `sqrt(-2 ln u1) sin(2 pi u2)`
//!   for the next call.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{AlignedPanel, Bar, SeriesFrame};

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Xorshift64Star {
    state: u64,
    spare_normal: Option<f64>,
}

impl Xorshift64Star {
    pub fn new(seed: u64) -> Self {
        let s = splitmix64(seed);
        Self {
            state: if s == 0 { 0x9E37_79B9_7F4A_7C15 } else { s },
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in (0, 1), never exactly 0 or 1.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Close = level + scale * iid N(0, 1).
    WhiteNoise { scale: f64, level: f64 },
    /// Close = level + x_t with x_t = sum_i phi_i x_{t-i} + noise_scale * e_t.
    ArProcess { phi: Vec<f64>, noise_scale: f64, level: f64 },
    /// Columns `x1..xp` = loadings * factors + noise, plus a `target` driven by the same factors.
    LatentFactor {
        factors: usize,
        columns: usize,
        noise_scale: f64,
        target_noise: f64,
    },
    /// Gaussian columns whose population correlation is `correlation`.
    CorrelatedPanel {
        correlation: Vec<Vec<f64>>,
        labels: Vec<String>,
        level: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub length: usize,
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: NaiveDate,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 12, 12).expect("valid date")
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, length: usize, seed: u64) -> Self {
        Self {
            kind,
            length,
            seed,
            start: default_start(),
        }
    }

    pub fn ar(phi: Vec<f64>, length: usize, seed: u64) -> Self {
        Self::new(
            GeneratorKind::ArProcess {
                phi,
                noise_scale: 1.0,
                level: 100.0,
            },
            length,
            seed,
        )
    }

    pub fn white_noise(length: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::WhiteNoise { scale: 1.0, level: 100.0 }, length, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Series(SeriesFrame),
    Panel(AlignedPanel),
}

impl Generated {
    pub fn into_series(self) -> Result<SeriesFrame> {
        match self {
            Generated::Series(s) => Ok(s),
            Generated::Panel(_) => Err(Error::Spec("generator produced a panel, not a series".into())),
        }
    }

    pub fn into_panel(self) -> Result<AlignedPanel> {
        match self {
            Generated::Panel(p) => Ok(p),
            Generated::Series(_) => Err(Error::Spec("generator produced a series, not a panel".into())),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Generated::Series(s) => s.to_csv(),
            Generated::Panel(p) => p.to_csv(),
        }
    }
}

/// Weekdays from `start` onward (holidays are not modeled).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Stationarity of `x_t = sum phi_i x_{t-i} + e_t` by the Schur–Cohn step-down
/// recursion: every reflection coefficient must satisfy |k| < 1, which holds
/// exactly when the companion matrix has spectral radius below 1.
pub fn is_stationary(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let m = a.len();
        let denom = 1.0 - k * k;
        a = (0..m - 1).map(|j| (a[j] + k * a[m - 2 - j]) / denom).collect();
    }
    true
}

/// Lower-triangular `l` with `l l^T = c` for positive semidefinite `c`.
fn psd_cholesky(c: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = c.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = c[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d < -1e-10 {
            return Err(Error::Spec("target correlation matrix is not positive semidefinite".into()));
        }
        let d = d.max(0.0).sqrt();
        l[j][j] = d;
        for i in (j + 1)..n {
            let s = c[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if d > 1e-12 {
                l[i][j] = s / d;
            } else if s.abs() > 1e-8 {
                return Err(Error::Spec("target correlation matrix is not positive semidefinite".into()));
            }
        }
    }
    Ok(l)
}

/// OHLCV bars around a close path: open is the prior close plus a small gap,
/// wicks extend beyond the body, volume is log-normal.
fn synthesize_bars(close: &[f64], dates: &[NaiveDate], wiggle: f64, rng: &mut Xorshift64Star) -> Result<Vec<Bar>> {
    let mut bars = Vec::with_capacity(close.len());
    for (t, (&c, &date)) in close.iter().zip(dates).enumerate() {
        let prev = if t == 0 { c } else { close[t - 1] };
        let open = prev + 0.1 * wiggle * rng.next_normal();
        if !(c > 0.0 && open > 0.0) {
            return Err(Error::Spec(format!(
                "price path reaches {} on day {t}; raise the level",
                c.min(open)
            )));
        }
        let body_hi = open.max(c);
        let body_lo = open.min(c);
        let high = body_hi + 0.25 * wiggle * rng.next_normal().abs();
        let mut low = body_lo - 0.25 * wiggle * rng.next_normal().abs();
        if low <= 0.0 {
            low = 0.5 * body_lo;
        }
        let volume = (1e6 * (0.25 * rng.next_normal()).exp()).round();
        bars.push(Bar {
            date,
            open,
            high,
            low,
            close: c,
            volume,
        });
    }
    Ok(bars)
}

const AR_BURN_IN: usize = 500;

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    if spec.length < 2 {
        return Err(Error::Spec(format!("length must be >= 2, got {}", spec.length)));
    }
    let mut rng = Xorshift64Star::new(spec.seed);
    let dates = business_days(spec.start, spec.length);
    match &spec.kind {
        GeneratorKind::WhiteNoise { scale, level } => {
            if !(*scale > 0.0) {
                return Err(Error::Spec("noise scale must be > 0".into()));
            }
            let close: Vec<f64> = (0..spec.length).map(|_| level + scale * rng.next_normal()).collect();
            let bars = synthesize_bars(&close, &dates, *scale, &mut rng)?;
            Ok(Generated::Series(SeriesFrame::new("white_noise", bars, false)?))
        }
        GeneratorKind::ArProcess { phi, noise_scale, level } => {
            if phi.is_empty() {
                return Err(Error::Spec("AR process needs at least one coefficient".into()));
            }
            if !is_stationary(phi) {
                return Err(Error::Spec(format!("AR coefficients {phi:?} are not stationary")));
            }
            if !(*noise_scale > 0.0) {
                return Err(Error::Spec("noise scale must be > 0".into()));
            }
            let total = spec.length + AR_BURN_IN;
            let mut x = vec![0.0; total];
            for t in 0..total {
                let ar: f64 = phi.iter().enumerate().filter(|(i, _)| t > *i).map(|(i, p)| p * x[t - 1 - i]).sum();
                x[t] = ar + noise_scale * rng.next_normal();
            }
            let close: Vec<f64> = x[AR_BURN_IN..].iter().map(|v| level + v).collect();
            let bars = synthesize_bars(&close, &dates, *noise_scale, &mut rng)?;
            Ok(Generated::Series(SeriesFrame::new("ar_process", bars, false)?))
        }
        GeneratorKind::LatentFactor {
            factors,
            columns,
            noise_scale,
            target_noise,
        } => {
            if *factors == 0 || *columns < *factors {
                return Err(Error::Spec(format!(
                    "need 1 <= factors <= columns, got {factors} factors and {columns} columns"
                )));
            }
            if *noise_scale < 0.0 || *target_noise < 0.0 {
                return Err(Error::Spec("noise scales must be >= 0".into()));
            }
            let loadings: Vec<Vec<f64>> = (0..*columns).map(|_| (0..*factors).map(|_| rng.next_normal()).collect()).collect();
            let beta: Vec<f64> = (0..*factors).map(|_| rng.next_normal()).collect();
            let mut cols = vec![Vec::with_capacity(spec.length); columns + 1];
            for _ in 0..spec.length {
                let f: Vec<f64> = (0..*factors).map(|_| rng.next_normal()).collect();
                for (j, l) in loadings.iter().enumerate() {
                    let signal: f64 = l.iter().zip(&f).map(|(a, b)| a * b).sum();
                    cols[j].push(signal + noise_scale * rng.next_normal());
                }
                let y: f64 = beta.iter().zip(&f).map(|(a, b)| a * b).sum();
                cols[*columns].push(y + target_noise * rng.next_normal());
            }
            let mut labels: Vec<String> = (1..=*columns).map(|j| format!("x{j}")).collect();
            labels.push("target".into());
            Ok(Generated::Panel(AlignedPanel::new(dates, labels, cols)?))
        }
        GeneratorKind::CorrelatedPanel {
            correlation,
            labels,
            level,
            scale,
        } => {
            let n = correlation.len();
            if n < 2 || correlation.iter().any(|r| r.len() != n) {
                return Err(Error::Spec("correlation target must be a square matrix of size >= 2".into()));
            }
            if labels.len() != n {
                return Err(Error::Spec(format!("{} labels for a {n}x{n} correlation target", labels.len())));
            }
            for i in 0..n {
                if (correlation[i][i] - 1.0).abs() > 1e-12 {
                    return Err(Error::Spec("correlation target needs a unit diagonal".into()));
                }
                for j in 0..n {
                    if (correlation[i][j] - correlation[j][i]).abs() > 1e-12 || correlation[i][j].abs() > 1.0 {
                        return Err(Error::Spec("correlation target must be symmetric with entries in [-1, 1]".into()));
                    }
                }
            }
            let l = psd_cholesky(correlation)?;
            let mut cols = vec![Vec::with_capacity(spec.length); n];
            for _ in 0..spec.length {
                let e: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
                for (i, row) in l.iter().enumerate() {
                    let z: f64 = row.iter().zip(&e).map(|(a, b)| a * b).sum();
                    cols[i].push(level + scale * z);
                }
            }
            Ok(Generated::Panel(AlignedPanel::new(dates, labels.clone(), cols)?))
        }
    }
}
