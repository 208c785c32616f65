//! Sectioned TOML run configuration. Every field has a default, so an empty
//! file (or no file) is a valid configuration for the simulation study.

use std::fmt;
use std::path::{Path, PathBuf};

use exploratory_mv::analytic::{MarketModel, ProblemSpec};
use exploratory_mv::evaluation::{Algorithm, MarketSetting, RollingSpec, SplitSpec};
use exploratory_mv::learner::{HyperParams, InitParams, PrefixMode};
use exploratory_mv::market::{annualize_market, RNG_ALGORITHM};
use exploratory_mv::{Error as CoreError, ReturnModel};
use serde::{Deserialize, Serialize};

/// A configuration value that failed validation, with its dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for FieldError {}

fn field_err(field: &str, reason: impl Into<String>) -> FieldError {
    FieldError {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Attach a section prefix to a core validation error.
fn in_section(section: &str, e: CoreError) -> FieldError {
    match e {
        CoreError::InvalidParameter { name, reason } => {
            field_err(&format!("{section}.{name}"), reason)
        }
        other => field_err(section, other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarketKind {
    Normal,
    SkewT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    /// Algorithm used by `train`.
    pub algorithm: Algorithm,
    /// Recorded for provenance; a snapshot from a different generator is rejected.
    pub rng_algorithm: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3],
            algorithm: Algorithm::Discrete,
            rng_algorithm: RNG_ALGORITHM.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketSection {
    pub model: MarketKind,
    pub a_annual: f64,
    pub sigma_annual: f64,
    pub r_annual: f64,
    pub periods_per_year: u32,
    pub skew_dof: f64,
    pub skew_slant: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self {
            model: MarketKind::SkewT,
            a_annual: 0.30,
            sigma_annual: 0.10,
            r_annual: 0.02,
            periods_per_year: 12,
            skew_dof: 10.0,
            skew_slant: -1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub horizon_periods: usize,
    pub x0: f64,
    pub b: f64,
    pub lambda: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            horizon_periods: 3,
            x0: 1.0,
            b: 1.1,
            lambda: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningSection {
    pub episodes: usize,
    pub sample_size: usize,
    pub alpha: f64,
    pub eta_theta: f64,
    pub eta_phi: f64,
    pub prefix: PrefixMode,
    pub init_theta2: f64,
    pub init_theta3: f64,
    pub init_phi1: f64,
    pub init_phi2: f64,
    /// Initial multiplier; defaults to `problem.b`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_w: Option<f64>,
}

impl Default for LearningSection {
    fn default() -> Self {
        let h = HyperParams::study_defaults();
        let i = InitParams::default();
        Self {
            episodes: h.episodes,
            sample_size: h.sample_size,
            alpha: h.alpha,
            eta_theta: h.eta_theta,
            eta_phi: h.eta_phi,
            prefix: h.prefix,
            init_theta2: i.theta2,
            init_theta3: i.theta3,
            init_phi1: i.phi1,
            init_phi2: i.phi2,
            init_w: i.w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// One market per entry; the other market fields come from `[market]`.
    pub sigmas_annual: Vec<f64>,
    /// Trailing episodes of each run used for the statistics.
    pub test_episodes: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            sigmas_annual: vec![0.10, 0.20, 0.30],
            test_episodes: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    /// `date,close` monthly file; the bundled synthetic series when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_path: Option<PathBuf>,
    pub window_months: usize,
    pub test_months: usize,
    pub first_test_year: i32,
    pub last_test_year: i32,
    pub targets: Vec<f64>,
    pub online_test: bool,
}

impl Default for BacktestSection {
    fn default() -> Self {
        let r = RollingSpec::default();
        Self {
            data_path: None,
            window_months: r.window_months,
            test_months: r.test_months,
            first_test_year: 2004,
            last_test_year: 2013,
            targets: r.targets,
            online_test: r.online_test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSection {
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    pub lambdas: Vec<f64>,
    /// Multiplier; the closed-form `E[x_T] = b` value when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 2.0,
            x_points: 21,
            lambdas: vec![0.5, 2.0],
            w: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterateSection {
    pub slope: f64,
    pub variance_base: f64,
    pub variance_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl Default for IterateSection {
    fn default() -> Self {
        Self {
            slope: -4.0,
            variance_base: 60.0,
            variance_ratio: 1.3,
            w: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramSource {
    /// Per-period excess returns drawn from `[market]`.
    Model,
    /// Excess returns of the backtest series.
    Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramSection {
    pub source: HistogramSource,
    pub draws: usize,
    pub bins: usize,
}

impl Default for HistogramSection {
    fn default() -> Self {
        Self {
            source: HistogramSource::Model,
            draws: 100_000,
            bins: 50,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub market: MarketSection,
    pub problem: ProblemSection,
    pub learning: LearningSection,
    pub simulate: SimulateSection,
    pub backtest: BacktestSection,
    pub analytic: AnalyticSection,
    pub iterate: IterateSection,
    pub histogram: HistogramSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        use anyhow::Context as _;
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.run.seeds.is_empty() {
            return Err(field_err("run.seeds", "need at least one seed"));
        }
        if self.run.rng_algorithm != RNG_ALGORITHM {
            return Err(field_err(
                "run.rng_algorithm",
                format!(
                    "this build uses `{RNG_ALGORITHM}`, config names `{}`",
                    self.run.rng_algorithm
                ),
            ));
        }
        self.market_model(self.market.sigma_annual)?;
        for (i, &s) in self.simulate.sigmas_annual.iter().enumerate() {
            self.market_model(s)
                .map_err(|e| field_err(&format!("simulate.sigmas_annual[{i}]"), e.reason))?;
        }
        if self.simulate.sigmas_annual.is_empty() {
            return Err(field_err(
                "simulate.sigmas_annual",
                "need at least one market",
            ));
        }
        self.hyper()
            .validate()
            .map_err(|e| in_section("learning", e))?;
        if self.learning.episodes > 0 {
            self.split()?;
        }
        self.rolling()
            .validate()
            .map_err(|e| in_section("backtest", e))?;
        if self.backtest.first_test_year > self.backtest.last_test_year {
            return Err(field_err(
                "backtest.last_test_year",
                "must not precede first_test_year",
            ));
        }
        if let Some(i) = self.backtest.targets.iter().position(|b| !b.is_finite()) {
            return Err(field_err(
                &format!("backtest.targets[{i}]"),
                "must be finite",
            ));
        }
        let a = &self.analytic;
        if !(a.x_max > a.x_min) || a.x_points < 2 {
            return Err(field_err(
                "analytic.x_points",
                "need x_max > x_min and at least 2 points",
            ));
        }
        for (i, &l) in a.lambdas.iter().enumerate() {
            ProblemSpec::new(
                self.problem.horizon_periods,
                self.problem.x0,
                self.problem.b,
                l,
            )
            .map_err(|e| field_err(&format!("analytic.lambdas[{i}]"), e.to_string()))?;
        }
        if a.lambdas.is_empty() {
            return Err(field_err(
                "analytic.lambdas",
                "need at least one temperature",
            ));
        }
        if self.histogram.bins < 1 {
            return Err(field_err("histogram.bins", "need at least one bin"));
        }
        if self.histogram.draws < 1 {
            return Err(field_err("histogram.draws", "need at least one draw"));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ProblemSpec, FieldError> {
        let p = &self.problem;
        ProblemSpec::new(p.horizon_periods, p.x0, p.b, p.lambda)
            .map_err(|e| in_section("problem", e))
    }

    pub fn hyper(&self) -> HyperParams {
        let l = &self.learning;
        let p = &self.problem;
        HyperParams {
            spec: ProblemSpec {
                horizon: p.horizon_periods,
                x0: p.x0,
                b: p.b,
                lambda: p.lambda,
            },
            eta_theta: l.eta_theta,
            eta_phi: l.eta_phi,
            alpha: l.alpha,
            episodes: l.episodes,
            sample_size: l.sample_size,
            prefix: l.prefix,
        }
    }

    pub fn init(&self) -> InitParams {
        let l = &self.learning;
        InitParams {
            theta2: l.init_theta2,
            theta3: l.init_theta3,
            phi1: l.init_phi1,
            phi2: l.init_phi2,
            w: l.init_w,
        }
    }

    pub fn split(&self) -> Result<SplitSpec, FieldError> {
        SplitSpec::new(self.learning.episodes, self.simulate.test_episodes)
            .map_err(|e| in_section("simulate", e))
    }

    /// Per-period market with the configured mean, rate and the given spread.
    pub fn market_model(&self, sigma_annual: f64) -> Result<MarketModel, FieldError> {
        let m = &self.market;
        annualize_market(m.a_annual, sigma_annual, m.r_annual, m.periods_per_year)
            .map_err(|e| in_section("market", e))
    }

    pub fn return_model(&self, sigma_annual: f64) -> Result<ReturnModel, FieldError> {
        let mm = self.market_model(sigma_annual)?;
        let m = &self.market;
        match m.model {
            MarketKind::Normal => ReturnModel::normal(mm.a(), mm.sigma()),
            MarketKind::SkewT => ReturnModel::skew_t(mm.a(), mm.sigma(), m.skew_dof, m.skew_slant),
        }
        .map_err(|e| in_section("market", e))
    }

    pub fn setting(&self, sigma_annual: f64) -> Result<MarketSetting, FieldError> {
        let mm = self.market_model(sigma_annual)?;
        Ok(MarketSetting {
            label: format!(
                "{} a={} sigma={}",
                kind_label(self.market.model),
                self.market.a_annual,
                sigma_annual
            ),
            r_f: mm.r_f(),
            model: self.return_model(sigma_annual)?,
        })
    }

    pub fn rolling(&self) -> RollingSpec {
        let b = &self.backtest;
        RollingSpec {
            window_months: b.window_months,
            horizon_months: self.problem.horizon_periods,
            test_months: b.test_months,
            test_years: (b.first_test_year..=b.last_test_year).collect(),
            targets: b.targets.clone(),
            online_test: b.online_test,
        }
    }

    /// Per-period gross risk-free return.
    pub fn r_f(&self) -> f64 {
        1.0 + self.market.r_annual / self.market.periods_per_year as f64
    }
}

fn kind_label(k: MarketKind) -> &'static str {
    match k {
        MarketKind::Normal => "normal",
        MarketKind::SkewT => "skew-t",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_study_settings() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let h = c.hyper();
        assert_eq!(h, HyperParams::study_defaults());
        assert_eq!(c.split().unwrap().train_episodes, 13000);
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn effective_config_round_trips() {
        let mut c = RunConfig::default();
        c.learning.init_w = Some(1.3);
        c.backtest.data_path = Some("closes.csv".into());
        c.market.model = MarketKind::Normal;
        c.run.seeds = vec![4, 9];
        let text = c.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn errors_name_the_field() {
        let mut c = RunConfig::default();
        c.learning.alpha = 0.0;
        assert_eq!(c.validate().unwrap_err().field, "learning.alpha");

        let mut c = RunConfig::default();
        c.simulate.sigmas_annual = vec![0.1, -0.2];
        assert_eq!(c.validate().unwrap_err().field, "simulate.sigmas_annual[1]");

        let mut c = RunConfig::default();
        c.simulate.test_episodes = 20000;
        assert_eq!(c.validate().unwrap_err().field, "simulate.test_episodes");

        assert!(RunConfig::from_toml("[learning]\nalpah = 0.1\n").is_err());
    }
}
