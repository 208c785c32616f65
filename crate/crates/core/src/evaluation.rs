//! Performance statistics, the simulation study and the rolling backtest.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{optimal_policy, MarketModel, ProblemSpec};
use crate::baseline::ContinuousEmv;
use crate::error::{Error, Result};
use crate::learner::{
    update_w, DiscreteEmv, EpisodeRecord, HyperParams, InitParams, LagrangeState, Method,
    TrainOutcome, Trainer,
};
use crate::market::{step_wealth, ReturnModel, ReturnSeries, RngStream, SamplingMode, YearMonth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Discrete,
    EmvContinuous,
}

impl Algorithm {
    pub const BOTH: [Algorithm; 2] = [Algorithm::Discrete, Algorithm::EmvContinuous];

    pub fn method(&self) -> &'static dyn Method {
        static DISCRETE: DiscreteEmv = DiscreteEmv;
        static CONTINUOUS: ContinuousEmv = ContinuousEmv { dt: 1.0 };
        match self {
            Algorithm::Discrete => &DISCRETE,
            Algorithm::EmvContinuous => &CONTINUOUS,
        }
    }

    pub fn id(&self) -> &'static str {
        self.method().id()
    }
}

/// Horizon-return statistics of a set of terminal wealths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub mean_return: f64,
    pub std_return: f64,
    pub sharpe: f64,
    pub n: usize,
}

/// Simple returns `x_T / x0 - 1`: mean, population std, and `mean / std`
/// (no risk-free subtraction).
pub fn terminal_stats(terminal: &[f64], x0: f64) -> Result<ReturnStats> {
    let n = terminal.len();
    if n < 2 {
        return Err(Error::Undefined(format!(
            "need at least 2 terminal wealths, got {n}"
        )));
    }
    let returns: Vec<f64> = terminal.iter().map(|x| x / x0 - 1.0).collect();
    let (mean, var) = mean_var(&returns);
    let std = var.sqrt();
    if !(std > 0.0) {
        return Err(Error::Undefined(
            "Sharpe ratio undefined: terminal wealths have zero spread".into(),
        ));
    }
    Ok(ReturnStats {
        mean_return: mean,
        std_return: std,
        sharpe: mean / std,
        n,
    })
}

/// Mean and population variance.
fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockStat {
    pub block: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of terminal wealth over nonoverlapping blocks; a
/// trailing partial block is dropped.
pub fn learning_curves(terminal: &[f64], block: usize) -> Vec<BlockStat> {
    if block == 0 {
        return Vec::new();
    }
    terminal
        .chunks_exact(block)
        .enumerate()
        .map(|(i, c)| {
            let (mean, variance) = mean_var(c);
            BlockStat {
                block: i,
                mean,
                variance,
            }
        })
        .collect()
}

/// First block index from which every later block mean stays within
/// `tolerance` of `target`.
pub fn settling_block(curve: &[BlockStat], target: f64, tolerance: f64) -> Option<usize> {
    let mut first = None;
    for s in curve {
        if (s.mean - target).abs() <= tolerance {
            first.get_or_insert(s.block);
        } else {
            first = None;
        }
    }
    first
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvObjective {
    pub mean: f64,
    pub variance: f64,
    /// `E[(x_T - w)^2] - (w - b)^2`.
    pub lagrangian: f64,
}

pub fn mv_objective(terminal: &[f64], w: f64, b: f64) -> Result<MvObjective> {
    if terminal.len() < 2 {
        return Err(Error::Undefined("need at least 2 terminal wealths".into()));
    }
    let (mean, variance) = mean_var(terminal);
    let second = terminal.iter().map(|x| (x - w).powi(2)).sum::<f64>() / terminal.len() as f64;
    Ok(MvObjective {
        mean,
        variance,
        lagrangian: second - (w - b).powi(2),
    })
}

/// One row of a study or backtest report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub setting: String,
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub mean_return: f64,
    pub std_return: f64,
    pub sharpe: f64,
    pub n: usize,
}

impl PerformanceReport {
    fn new(setting: &str, algorithm: Algorithm, seed: u64, stats: ReturnStats) -> Self {
        Self {
            setting: setting.to_string(),
            algorithm: algorithm.id().to_string(),
            seeds: vec![seed],
            mean_return: stats.mean_return,
            std_return: stats.std_return,
            sharpe: stats.sharpe,
            n: stats.n,
        }
    }
}

pub const REPORT_HEADER: [&str; 7] = [
    "setting",
    "algorithm",
    "seed",
    "mean_return",
    "std_return",
    "sharpe",
    "n",
];

pub fn write_report_csv<W: Write>(rows: &[PerformanceReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(REPORT_HEADER).map_err(io)?;
    for r in rows {
        let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
        w.write_record([
            r.setting.clone(),
            r.algorithm.clone(),
            seeds.join(";"),
            r.mean_return.to_string(),
            r.std_return.to_string(),
            r.sharpe.to_string(),
            r.n.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_episodes: usize,
    pub test_episodes: usize,
}

impl SplitSpec {
    pub fn new(episodes: usize, test_episodes: usize) -> Result<Self> {
        if test_episodes < 2 || test_episodes > episodes {
            return Err(Error::invalid(
                "test_episodes",
                format!("need 2 <= test <= M = {episodes}, got {test_episodes}"),
            ));
        }
        Ok(Self {
            train_episodes: episodes - test_episodes,
            test_episodes,
        })
    }

    pub fn total(&self) -> usize {
        self.train_episodes + self.test_episodes
    }
}

/// A labeled market for the simulation study.
#[derive(Debug, Clone)]
pub struct MarketSetting {
    pub label: String,
    pub r_f: f64,
    pub model: ReturnModel,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub setting: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub report: PerformanceReport,
    pub objective: MvObjective,
    pub curve: Vec<BlockStat>,
    pub outcome: TrainOutcome,
}

/// Column-wise median over seeds of one (setting, algorithm) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub setting: String,
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub mean_return: f64,
    pub std_return: f64,
    pub sharpe: f64,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub split: SplitSpec,
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

impl StudyReport {
    pub fn rows(&self) -> Vec<PerformanceReport> {
        self.cells.iter().map(|c| c.report.clone()).collect()
    }

    pub fn summary_for(&self, setting: &str, algorithm: Algorithm) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.setting == setting && s.algorithm == algorithm.id())
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn summarize<'a>(
    setting: &str,
    algorithm: Algorithm,
    reports: impl Iterator<Item = &'a PerformanceReport>,
) -> SummaryRow {
    let reports: Vec<&PerformanceReport> = reports.collect();
    let column = |f: fn(&PerformanceReport) -> f64| {
        let mut v: Vec<f64> = reports.iter().map(|r| f(r)).collect();
        median(&mut v)
    };
    SummaryRow {
        setting: setting.to_string(),
        algorithm: algorithm.id().to_string(),
        seeds: reports.iter().flat_map(|r| r.seeds.clone()).collect(),
        mean_return: column(|r| r.mean_return),
        std_return: column(|r| r.std_return),
        sharpe: column(|r| r.sharpe),
    }
}

/// Episodes per learning-curve block.
pub const CURVE_BLOCK: usize = 50;

/// Train both algorithms on every market for every seed; statistics come
/// from the last `split.test_episodes` terminal wealths of each run.
pub fn run_simulation_study(
    settings: &[MarketSetting],
    hyper: &HyperParams,
    split: SplitSpec,
    seeds: &[u64],
    init: InitParams,
) -> Result<StudyReport> {
    hyper.validate()?;
    if split.total() != hyper.episodes {
        return Err(Error::invalid(
            "split",
            format!(
                "train {} + test {} must equal M = {}",
                split.train_episodes, split.test_episodes, hyper.episodes
            ),
        ));
    }
    let jobs: Vec<(usize, Algorithm, u64)> = settings
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            Algorithm::BOTH
                .into_iter()
                .flat_map(move |alg| seeds.iter().map(move |&s| (i, alg, s)))
        })
        .collect();
    let cells: Vec<CellResult> = jobs
        .par_iter()
        .map(|&(i, alg, seed)| {
            let setting = &settings[i];
            let stream = (i * Algorithm::BOTH.len()
                + Algorithm::BOTH.iter().position(|a| *a == alg).unwrap_or(0))
                as u64;
            run_cell(setting, alg, seed, stream, hyper, split, init).map_err(|e| Error::InCell {
                cell: format!("{} / {} / seed {seed}", setting.label, alg.id()),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut summary = Vec::new();
    for s in settings {
        for alg in Algorithm::BOTH {
            summary.push(summarize(
                &s.label,
                alg,
                cells
                    .iter()
                    .filter(|c| c.setting == s.label && c.algorithm == alg)
                    .map(|c| &c.report),
            ));
        }
    }
    Ok(StudyReport {
        split,
        cells,
        summary,
    })
}

fn run_cell(
    setting: &MarketSetting,
    alg: Algorithm,
    seed: u64,
    stream: u64,
    hyper: &HyperParams,
    split: SplitSpec,
    init: InitParams,
) -> Result<CellResult> {
    let mut model = setting.model.clone();
    let mut trainer = Trainer::new(
        alg.method(),
        *hyper,
        setting.r_f,
        init,
        RngStream::new(seed, stream),
    )?;
    let log: Vec<EpisodeRecord> = trainer.run(&mut model, hyper.episodes)?;
    let terminal: Vec<f64> = log.iter().map(|r| r.x_terminal).collect();
    let test = &terminal[split.train_episodes..];
    let stats = terminal_stats(test, hyper.spec.x0)?;
    let objective = mv_objective(test, trainer.w(), hyper.spec.b)?;
    let curve = learning_curves(&terminal, CURVE_BLOCK);
    let outcome = TrainOutcome {
        params: *trainer.params(),
        w: trainer.w(),
        projections: trainer.projections(),
        checkpoint: trainer.checkpoint(),
        log,
    };
    Ok(CellResult {
        setting: setting.label.clone(),
        algorithm: alg,
        seed,
        report: PerformanceReport::new(&setting.label, alg, seed, stats),
        objective,
        curve,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingSpec {
    /// Training months immediately preceding each test period.
    pub window_months: usize,
    /// Episode length.
    pub horizon_months: usize,
    /// Length of each test period.
    pub test_months: usize,
    /// First calendar year of each test period.
    pub test_years: Vec<i32>,
    pub targets: Vec<f64>,
    /// Continue learning during the test windows instead of freezing.
    pub online_test: bool,
}

impl Default for RollingSpec {
    fn default() -> Self {
        Self {
            window_months: 120,
            horizon_months: 3,
            test_months: 120,
            test_years: (2004..=2013).collect(),
            targets: vec![1.03, 1.05, 1.07],
            online_test: false,
        }
    }
}

impl RollingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_months < 1 || self.window_months < self.horizon_months {
            return Err(Error::invalid(
                "window_months",
                "window must cover at least one horizon",
            ));
        }
        if self.test_months < 2 * self.horizon_months {
            return Err(Error::invalid(
                "test_months",
                "need at least two test windows",
            ));
        }
        if self.test_years.is_empty() || self.targets.is_empty() {
            return Err(Error::invalid("test_years", "need test years and targets"));
        }
        Ok(())
    }

    pub fn period_label(&self, year: i32) -> String {
        let last = YearMonth { year, month: 1 }.ordinal() + self.test_months as i64 - 1;
        format!("{year}-{}", last.div_euclid(12))
    }
}

/// Train on the months before each test period, then run the policy on
/// sequential nonoverlapping windows of the test period.
pub fn rolling_backtest(
    series: &ReturnSeries,
    r_f: f64,
    spec: &RollingSpec,
    hyper: &HyperParams,
    seeds: &[u64],
    init: InitParams,
) -> Result<Vec<PerformanceReport>> {
    spec.validate()?;
    let mut hyper = *hyper;
    hyper.spec.horizon = spec.horizon_months;
    hyper.validate()?;
    let returns = series.returns();

    // resolve every period up front so data gaps fail before any training
    let mut periods = Vec::new();
    for &year in &spec.test_years {
        let start = YearMonth { year, month: 1 };
        let idx = series.position(start).ok_or_else(|| {
            Error::InsufficientData(format!("series has no return for test start {start}"))
        })?;
        if idx < spec.window_months {
            return Err(Error::InsufficientData(format!(
                "test period starting {start} needs {} preceding months, series has {idx}",
                spec.window_months
            )));
        }
        let windows = spec.test_months / spec.horizon_months;
        for k in 0..windows {
            let end = idx + (k + 1) * spec.horizon_months;
            if end > returns.len() {
                let first =
                    series.points()[(idx + k * spec.horizon_months).min(returns.len() - 1)].0;
                return Err(Error::InsufficientData(format!(
                    "test window {} of period {} (from {first}) runs past the end of the series",
                    k + 1,
                    spec.period_label(year)
                )));
            }
        }
        periods.push((year, idx));
    }

    let mut jobs = Vec::new();
    for &(year, idx) in &periods {
        for &b in &spec.targets {
            for alg in Algorithm::BOTH {
                for &seed in seeds {
                    jobs.push((year, idx, b, alg, seed));
                }
            }
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(j, &(year, idx, b, alg, seed))| {
            let label = format!("{} b={b}", spec.period_label(year));
            backtest_cell(
                &returns, idx, spec, &hyper, r_f, b, alg, seed, j as u64, init,
            )
            .map_err(|e| Error::InCell {
                cell: format!("{label} / {}", alg.id()),
                source: Box::new(e),
            })
            .map(|stats| PerformanceReport::new(&label, alg, seed, stats))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn backtest_cell(
    returns: &[f64],
    test_start: usize,
    spec: &RollingSpec,
    hyper: &HyperParams,
    r_f: f64,
    b: f64,
    alg: Algorithm,
    seed: u64,
    stream: u64,
    init: InitParams,
) -> Result<ReturnStats> {
    let mut hyper = *hyper;
    hyper.spec.b = b;
    let train = &returns[test_start - spec.window_months..test_start];
    let test = &returns[test_start..test_start + spec.test_months];
    let mut train_model = ReturnModel::historical(train.to_vec(), SamplingMode::RandomWindow);
    let mut trainer = Trainer::new(alg.method(), hyper, r_f, init, RngStream::new(seed, stream))?;
    trainer.run(&mut train_model, hyper.episodes)?;

    let mut test_model = ReturnModel::historical(test.to_vec(), SamplingMode::Sequential);
    let windows = spec.test_months / spec.horizon_months;
    let mut terminal = Vec::with_capacity(windows);
    for _ in 0..windows {
        if spec.online_test {
            terminal.push(trainer.step(&mut test_model)?.x_terminal);
        } else {
            terminal.push(trainer.rollout(&mut test_model)?.terminal());
        }
    }
    terminal_stats(&terminal, hyper.spec.x0)
}

/// Plain-text rendering of summary rows, one line per setting with both
/// algorithms side by side.
pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let mut settings: Vec<&str> = Vec::new();
    for r in rows {
        if !settings.contains(&r.setting.as_str()) {
            settings.push(&r.setting);
        }
    }
    let _ = writeln!(
        out,
        "{:<28} {:<30} {:<30}",
        "setting", "discrete", "emv-continuous"
    );
    for s in settings {
        let cell = |alg: &str| {
            rows.iter()
                .find(|r| r.setting == s && r.algorithm == alg)
                .map(|r| {
                    format!(
                        "{:.2}%; {:.2}%; {:.2}",
                        100.0 * r.mean_return,
                        100.0 * r.std_return,
                        r.sharpe
                    )
                })
                .unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{:<28} {:<30} {:<30}",
            s,
            cell("discrete"),
            cell("emv-continuous")
        );
    }
    out
}

/// Outcome of running the multiplier recursion under a fixed policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSearch {
    /// Average of the iterates over the second half of the run.
    pub w_star: f64,
    pub w_last: f64,
    pub updates: usize,
}

fn optimal_terminal(
    m: &MarketModel,
    spec: &ProblemSpec,
    w: f64,
    model: &mut ReturnModel,
    rng: &mut RngStream,
) -> Result<f64> {
    let returns = model.sample_path(spec.horizon, rng)?;
    let mut x = spec.x0;
    for (t, &r) in returns.iter().enumerate() {
        let pol = optimal_policy(t, x, w, m, spec)?;
        let u = pol.mean + pol.std_dev() * rng.standard_normal();
        x = step_wealth(x, u, r, m.r_f());
    }
    Ok(x)
}

/// Drive `w` with the sample-average update while holding the policy at the
/// closed-form optimum for the current `w`.
pub fn frozen_multiplier_search(
    m: &MarketModel,
    spec: &ProblemSpec,
    model: &mut ReturnModel,
    sample_size: usize,
    alpha: f64,
    episodes: usize,
    rng: &mut RngStream,
) -> Result<MultiplierSearch> {
    spec.validate()?;
    if sample_size == 0 || episodes < 2 * sample_size {
        return Err(Error::invalid(
            "episodes",
            format!("need at least two batches of {sample_size}, got {episodes}"),
        ));
    }
    let mut state = LagrangeState::new(spec.b, sample_size, alpha);
    let mut iterates = Vec::with_capacity(episodes / sample_size);
    for e in 1..=episodes {
        let x_t = optimal_terminal(m, spec, state.w, model, rng)?;
        state.record(x_t);
        if e % sample_size == 0 {
            state = update_w(&state, spec.b, sample_size)?;
            iterates.push(state.w);
        }
    }
    let tail = &iterates[iterates.len() / 2..];
    Ok(MultiplierSearch {
        w_star: tail.iter().sum::<f64>() / tail.len() as f64,
        w_last: state.w,
        updates: iterates.len(),
    })
}

/// Monte Carlo mean of `x_T` under the optimal policy at multiplier `w`,
/// with its standard error.
pub fn optimal_terminal_mean(
    m: &MarketModel,
    spec: &ProblemSpec,
    w: f64,
    model: &mut ReturnModel,
    paths: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let xs = (0..paths)
        .map(|_| optimal_terminal(m, spec, w, model, rng))
        .collect::<Result<Vec<_>>>()?;
    if xs.len() < 2 {
        return Err(Error::Undefined("need at least 2 paths".into()));
    }
    let (mean, var) = mean_var(&xs);
    Ok((mean, (var / xs.len() as f64).sqrt()))
}
