//! Excess-return generators, wealth dynamics and historical data ingestion.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::analytic::MarketModel;
use crate::error::{Error, Result};

/// Name of the generator behind [`RngStream`], recorded in every report.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9, 64-bit seed via seed_from_u64, 64-bit stream id)";

/// Seeded, stream-addressable random source.
///
/// Equal `(seed, stream)` pairs replay identical draw sequences, and distinct
/// stream ids give independent sequences for parallel jobs.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Position in the keystream, for checkpointing.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn restore(seed: u64, stream: u64, word_pos: u128) -> Self {
        let mut rng = Self::new(seed, stream);
        rng.inner.set_word_pos(word_pos);
        rng
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `x_{t+1} = r_f x_t + r_t u_t`.
#[inline]
pub fn step_wealth(x: f64, u: f64, r: f64, r_f: f64) -> f64 {
    r_f * x + r * u
}

/// Arithmetic conversion of annualized figures to a per-period market.
pub fn annualize_market(
    a_annual: f64,
    sigma_annual: f64,
    r_annual: f64,
    periods_per_year: u32,
) -> Result<MarketModel> {
    if periods_per_year < 1 {
        return Err(Error::invalid("periods_per_year", "must be at least 1"));
    }
    if !(sigma_annual > 0.0) {
        return Err(Error::invalid(
            "sigma_annual",
            format!("must be > 0, got {sigma_annual}"),
        ));
    }
    let p = periods_per_year as f64;
    MarketModel::new(a_annual / p, sigma_annual / p.sqrt(), 1.0 + r_annual / p)
}

/// Inverse of [`annualize_market`]: `(a_annual, sigma_annual, r_annual)`.
pub fn deannualize(m: &MarketModel, periods_per_year: u32) -> (f64, f64, f64) {
    let p = periods_per_year as f64;
    (m.a() * p, m.sigma() * p.sqrt(), (m.r_f() - 1.0) * p)
}

/// Analytic mean and std of the unstandardized skew-t with `dof` degrees of
/// freedom and slant `slant`.
pub fn skewt_moments(dof: f64, slant: f64) -> Result<(f64, f64)> {
    if !(dof > 2.0) {
        return Err(Error::invalid(
            "dof",
            format!("skew-t needs more than 2 degrees of freedom, got {dof}"),
        ));
    }
    let delta = slant / (1.0 + slant * slant).sqrt();
    let mean = delta
        * (dof / std::f64::consts::PI).sqrt()
        * (ln_gamma((dof - 1.0) / 2.0) - ln_gamma(dof / 2.0)).exp();
    let var = dof / (dof - 2.0) - mean * mean;
    Ok((mean, var.sqrt()))
}

/// Standardized skew-t sampler: a skew-normal numerator over an independent
/// chi-square scale, shifted and scaled to zero mean and unit variance.
#[derive(Debug, Clone, Copy)]
pub struct SkewT {
    dof: f64,
    delta: f64,
    mean: f64,
    std: f64,
    chi: ChiSquared<f64>,
}

impl SkewT {
    pub fn new(dof: f64, slant: f64) -> Result<Self> {
        let (mean, std) = skewt_moments(dof, slant)?;
        let chi = ChiSquared::new(dof).map_err(|e| Error::invalid("dof", e.to_string()))?;
        Ok(Self {
            dof,
            delta: slant / (1.0 + slant * slant).sqrt(),
            mean,
            std,
            chi,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u0: f64 = StandardNormal.sample(rng);
        let u1: f64 = StandardNormal.sample(rng);
        let skew_normal = self.delta * u0.abs() + (1.0 - self.delta * self.delta).sqrt() * u1;
        let v = self.chi.sample(rng);
        let z = skew_normal / (v / self.dof).sqrt();
        (z - self.mean) / self.std
    }
}

pub fn sample_skewt_core<R: Rng + ?Sized>(dof: f64, slant: f64, rng: &mut R) -> Result<f64> {
    Ok(SkewT::new(dof, slant)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Contiguous windows advancing by the path length.
    Sequential,
    /// Uniformly random contiguous window.
    RandomWindow,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Self::Sequential),
            "random-window" => Ok(Self::RandomWindow),
            other => Err(Error::invalid(
                "sampling",
                format!("expected `sequential` or `random-window`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HistoricalSampler {
    returns: Arc<[f64]>,
    mode: SamplingMode,
    cursor: usize,
}

impl HistoricalSampler {
    pub fn new(returns: impl Into<Arc<[f64]>>, mode: SamplingMode) -> Self {
        Self {
            returns: returns.into(),
            mode,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    fn window<R: Rng + ?Sized>(&mut self, len: usize, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.returns.len();
        if len > n {
            return Err(Error::InsufficientData(format!(
                "window of {len} periods requested from {n} historical returns"
            )));
        }
        let start = match self.mode {
            SamplingMode::RandomWindow => rng.random_range(0..=n - len),
            SamplingMode::Sequential => {
                if self.cursor + len > n {
                    return Err(Error::InsufficientData(format!(
                        "sequential window starting at {} needs {len} periods, only {} remain",
                        self.cursor,
                        n - self.cursor
                    )));
                }
                let s = self.cursor;
                self.cursor += len;
                s
            }
        };
        Ok(self.returns[start..start + len].to_vec())
    }
}

/// Source of per-period excess returns.
#[derive(Debug, Clone)]
pub enum ReturnModel {
    NormalIid { a: f64, sigma: f64 },
    SkewTIid { a: f64, sigma: f64, skewt: SkewT },
    Historical(HistoricalSampler),
}

impl ReturnModel {
    pub fn normal(a: f64, sigma: f64) -> Result<Self> {
        check_spread(sigma)?;
        Ok(Self::NormalIid { a, sigma })
    }

    pub fn skew_t(a: f64, sigma: f64, dof: f64, slant: f64) -> Result<Self> {
        check_spread(sigma)?;
        Ok(Self::SkewTIid {
            a,
            sigma,
            skewt: SkewT::new(dof, slant)?,
        })
    }

    pub fn historical(returns: impl Into<Arc<[f64]>>, mode: SamplingMode) -> Self {
        Self::Historical(HistoricalSampler::new(returns, mode))
    }

    /// Draw `periods` consecutive excess returns.
    pub fn sample_path<R: Rng + ?Sized>(
        &mut self,
        periods: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if periods < 1 {
            return Err(Error::invalid("periods", "path length must be at least 1"));
        }
        match self {
            Self::NormalIid { a, sigma } => Ok((0..periods)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    *a + *sigma * z
                })
                .collect()),
            Self::SkewTIid { a, sigma, skewt } => Ok((0..periods)
                .map(|_| *a + *sigma * skewt.sample(rng))
                .collect()),
            Self::Historical(h) => h.window(periods, rng),
        }
    }
}

fn check_spread(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
    }
    Ok(())
}

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::invalid(
                "month",
                format!("must be 1..=12, got {month}"),
            ));
        }
        Ok(Self { year, month })
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Months elapsed since year 0.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (y, m) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| format!("date `{s}` is not YYYY-MM"))?;
        if y.len() != 4 || m.len() != 2 {
            return Err(format!("date `{s}` is not YYYY-MM"));
        }
        let year = y.parse().map_err(|_| format!("bad year in `{s}`"))?;
        let month: u8 = m.parse().map_err(|_| format!("bad month in `{s}`"))?;
        YearMonth::new(year, month).map_err(|e| e.to_string())
    }
}

/// Monthly excess returns; each point is labeled with the month over which
/// the return was earned (the month of the later close).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    points: Vec<(YearMonth, f64)>,
}

impl ReturnSeries {
    pub fn new(points: Vec<(YearMonth, f64)>) -> Result<Self> {
        validate_monthly(points.iter().map(|p| p.0))?;
        if let Some((d, r)) = points.iter().find(|(_, r)| !(*r > -1.0) || !r.is_finite()) {
            return Err(Error::Validation(format!(
                "excess return {r} at {d} must be finite and > -1"
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(YearMonth, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Index of the point labeled `date`.
    pub fn position(&self, date: YearMonth) -> Option<usize> {
        let first = self.points.first()?.0;
        let idx = date.ordinal() - first.ordinal();
        (idx >= 0 && (idx as usize) < self.points.len()).then_some(idx as usize)
    }

    /// Writes `date,excess_return` rows in shortest round-trip float form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "excess_return"]).map_err(csv_io)?;
        for (d, r) in &self.points {
            w.write_record([d.to_string(), r.to_string()])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_rows(path, "excess_return")?;
        Self::new(rows)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn validate_monthly(dates: impl Iterator<Item = YearMonth>) -> Result<()> {
    let dates: Vec<YearMonth> = dates.collect();
    let disorder: Vec<String> = dates
        .windows(2)
        .filter(|w| w[1] <= w[0])
        .map(|w| format!("{} then {}", w[0], w[1]))
        .collect();
    if !disorder.is_empty() {
        return Err(Error::Validation(format!(
            "dates not strictly increasing: {}",
            disorder.join(", ")
        )));
    }
    let mut missing = Vec::new();
    for w in dates.windows(2) {
        let mut d = w[0].succ();
        while d < w[1] {
            missing.push(d.to_string());
            d = d.succ();
        }
    }
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "missing months: {}",
            missing.join(", ")
        )));
    }
    Ok(())
}

fn read_rows(path: &Path, value_column: &str) -> Result<Vec<(YearMonth, f64)>> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{display}: {e}"))))?;
    read_rows_from(file, &display, value_column)
}

fn read_rows_from<R: Read>(
    source: R,
    display: &str,
    value_column: &str,
) -> Result<Vec<(YearMonth, f64)>> {
    let display = display.to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers().map_err(|e| Error::Parse {
        path: display.clone(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.len() != 2 || &header[0] != "date" || &header[1] != value_column {
        return Err(Error::Parse {
            path: display,
            line: 1,
            message: format!("expected header `date,{value_column}`"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let err = |message: String| Error::Parse {
            path: display.clone(),
            line,
            message,
        };
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, got {}", record.len())));
        }
        let date: YearMonth = record[0].parse().map_err(err)?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| err(format!("bad number `{}`", &record[1])))?;
        rows.push((date, value));
    }
    Ok(rows)
}

/// Reads `date,close` monthly closes and converts them to excess returns
/// `close_{t+1}/close_t - 1 - r_annual/12`.
pub fn load_monthly_csv(path: &Path, r_annual: f64) -> Result<ReturnSeries> {
    closes_to_returns(read_rows(path, "close")?, r_annual)
}

/// Like [`load_monthly_csv`], reading from memory; `name` is used in errors.
pub fn parse_monthly_csv<R: Read>(source: R, name: &str, r_annual: f64) -> Result<ReturnSeries> {
    closes_to_returns(read_rows_from(source, name, "close")?, r_annual)
}

/// Synthetic 1990-01..2022-12 monthly closes shipped with the crate.
pub const BUNDLED_SAMPLE_CSV: &str = include_str!("../data/synthetic_monthly.csv");

pub fn bundled_sample(r_annual: f64) -> Result<ReturnSeries> {
    parse_monthly_csv(BUNDLED_SAMPLE_CSV.as_bytes(), "<bundled sample>", r_annual)
}

fn closes_to_returns(rows: Vec<(YearMonth, f64)>, r_annual: f64) -> Result<ReturnSeries> {
    validate_monthly(rows.iter().map(|r| r.0))?;
    if let Some((d, c)) = rows.iter().find(|(_, c)| !(*c > 0.0) || !c.is_finite()) {
        return Err(Error::Validation(format!(
            "close {c} at {d} must be positive"
        )));
    }
    let drag = r_annual / 12.0;
    let points = rows
        .windows(2)
        .map(|w| (w[1].0, w[1].1 / w[0].1 - 1.0 - drag))
        .collect();
    ReturnSeries::new(points)
}

/// Writes `date,close` rows.
pub fn write_closes_csv<W: Write>(closes: &[(YearMonth, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "close"]).map_err(csv_io)?;
    for (d, c) in closes {
        w.write_record([d.to_string(), c.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Equal-width histogram over `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "count"])
            .map_err(csv_io)?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([
                self.edges[i].to_string(),
                self.edges[i + 1].to_string(),
                c.to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn histogram(data: &[f64], bins: usize) -> Result<Histogram> {
    if data.is_empty() {
        return Err(Error::invalid("data", "histogram of empty data"));
    }
    if bins < 1 {
        return Err(Error::invalid("bins", "need at least one bin"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data", "non-finite value"));
    }
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for &v in data {
        let idx = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Deterministic synthetic monthly index closes, used as the bundled sample
/// series and in tests.
pub fn synthetic_closes(start: YearMonth, months: usize, seed: u64) -> Vec<(YearMonth, f64)> {
    let mut rng = RngStream::new(seed, 0);
    let skewt = SkewT::new(5.0, -1.0).expect("valid skew-t");
    let (drift, vol) = (0.08 / 12.0, 0.15 / 12f64.sqrt());
    let mut date = start;
    let mut close = 350.0;
    let mut out = Vec::with_capacity(months);
    for i in 0..months {
        if i > 0 {
            let r = (drift + vol * skewt.sample(&mut rng)).max(-0.5);
            close *= 1.0 + r;
            date = date.succ();
        }
        // two decimals, like published index closes
        out.push((date, (close * 100.0).round() / 100.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wealth_step_cases() {
        assert_eq!(step_wealth(1.0, 0.0, 0.37, 1.0017), 1.0017);
        assert_eq!(step_wealth(2.5, 4.0, 0.0, 1.0), 2.5);
        assert!((step_wealth(1.0, 2.0, 0.03, 1.001667) - 1.061667).abs() < 1e-15);
    }

    #[test]
    fn annualization() {
        let m = annualize_market(0.30, 0.20, 0.02, 12).unwrap();
        assert!((m.a() - 0.025).abs() < 1e-15);
        assert!((m.sigma() - 0.057735).abs() < 1e-6);
        assert!((m.r_f() - 1.001667).abs() < 1e-6);

        let m = annualize_market(0.0, 0.2, 0.0, 12).unwrap();
        assert_eq!(m.a(), 0.0);
        assert_eq!(m.r_f(), 1.0);

        assert!(annualize_market(0.3, 0.0, 0.02, 12).is_err());
        assert!(annualize_market(0.3, 0.1, 0.02, 0).is_err());

        let m = annualize_market(0.3, 0.2, 0.02, 12).unwrap();
        let (a, s, r) = deannualize(&m, 12);
        assert!((a - 0.3).abs() < 1e-12 && (s - 0.2).abs() < 1e-12 && (r - 0.02).abs() < 1e-12);
    }

    #[test]
    fn symmetric_skewt_is_student_t() {
        let (mu, s) = skewt_moments(10.0, 0.0).unwrap();
        assert_eq!(mu, 0.0);
        assert!((s * s - 10.0 / 8.0).abs() < 1e-14);
        assert!(skewt_moments(2.0, 0.5).is_err());
        let mut rng = RngStream::new(1, 0);
        assert!(sample_skewt_core(1.5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn tiny_spread_pins_draws_to_mean() {
        let mut rng = RngStream::new(3, 0);
        let mut m = ReturnModel::normal(0.025, 1e-12).unwrap();
        let path = m.sample_path(50, &mut rng).unwrap();
        assert!(path.iter().all(|r| (r - 0.025).abs() < 1e-10));
    }

    #[test]
    fn seeded_paths_replay() {
        let mut m = ReturnModel::skew_t(0.02, 0.05, 10.0, -1.5).unwrap();
        let a = m.sample_path(100, &mut RngStream::new(9, 4)).unwrap();
        let b = m.sample_path(100, &mut RngStream::new(9, 4)).unwrap();
        let c = m.sample_path(100, &mut RngStream::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rng_restore_resumes_sequence() {
        let mut rng = RngStream::new(11, 2);
        for _ in 0..17 {
            rng.next_u64();
        }
        let mut resumed = RngStream::restore(11, 2, rng.word_pos());
        for _ in 0..10 {
            assert_eq!(rng.next_u64(), resumed.next_u64());
        }
    }

    #[test]
    fn historical_windows() {
        let mut rng = RngStream::new(0, 0);
        let mut h =
            ReturnModel::historical(vec![0.1, 0.2, 0.3, 0.4, 0.5], SamplingMode::Sequential);
        assert_eq!(h.sample_path(2, &mut rng).unwrap(), vec![0.1, 0.2]);
        assert_eq!(h.sample_path(2, &mut rng).unwrap(), vec![0.3, 0.4]);
        assert!(matches!(
            h.sample_path(2, &mut rng),
            Err(Error::InsufficientData(_))
        ));

        let mut r = ReturnModel::historical(vec![0.1, 0.2], SamplingMode::RandomWindow);
        assert!(r.sample_path(3, &mut rng).is_err());
        let mut r = ReturnModel::historical(vec![0.1, 0.2, 0.3, 0.4], SamplingMode::RandomWindow);
        for _ in 0..20 {
            let p = r.sample_path(3, &mut rng).unwrap();
            assert!(p == vec![0.1, 0.2, 0.3] || p == vec![0.2, 0.3, 0.4]);
        }
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&[4.2], 1).unwrap();
        assert_eq!(h.counts, vec![1]);
        let h = histogram(&[1.0, 1.0, 1.0], 4).unwrap();
        assert_eq!(h.total(), 3);
        let h = histogram(&[0.0, 0.5, 1.0, 0.25], 2).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn year_month_parsing() {
        let d: YearMonth = "2020-02".parse().unwrap();
        assert_eq!(d, YearMonth::new(2020, 2).unwrap());
        assert_eq!(d.to_string(), "2020-02");
        assert_eq!(
            YearMonth::new(2020, 12).unwrap().succ(),
            YearMonth::new(2021, 1).unwrap()
        );
        assert!("2020-13".parse::<YearMonth>().is_err());
        assert!("2020/01".parse::<YearMonth>().is_err());
    }
}
