use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use exploratory_mv::analytic::{
    iterate, optimal_multiplier, optimal_policy, optimal_value, IterationFamily, ProblemSpec,
};
use exploratory_mv::evaluation::{
    median, render_summary, rolling_backtest, run_simulation_study, settling_block, terminal_stats,
    write_report_csv, Algorithm, CellResult, PerformanceReport, StudyReport, SummaryRow,
};
use exploratory_mv::learner::{Checkpoint, Trainer};
use exploratory_mv::market::{bundled_sample, histogram, load_monthly_csv, ReturnSeries};
use exploratory_mv::oracle::{dp_oracle, OracleConfig};
use exploratory_mv::RngStream;

use crate::config::{HistogramSource, RunConfig};

/// Fraction of `b` used as the learning-curve settling band in summaries.
const SETTLING_BAND: f64 = 0.02;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        // A record left by an earlier failed run would contradict this run's exit status.
        match std::fs::remove_file(dir.join("error.json")) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn file(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let mut f = self.file(name)?;
        f.write_all(body.as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn csv(
        &self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.file(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn analytic(cfg: &RunConfig, out: &Output) -> Result<()> {
    let m = cfg.market_model(cfg.market.sigma_annual)?;
    let a = &cfg.analytic;
    let oracle_cfg = OracleConfig::with_range(a.x_min, a.x_max, a.x_points);
    let mut rows = Vec::new();
    let mut summary = String::new();
    let mut worst_all = 0.0f64;
    for &lambda in &a.lambdas {
        let spec = ProblemSpec::new(
            cfg.problem.horizon_periods,
            cfg.problem.x0,
            cfg.problem.b,
            lambda,
        )?;
        let w = a.w.unwrap_or_else(|| optimal_multiplier(&m, &spec));
        let layers = dp_oracle(&m, &spec, w, &oracle_cfg)?;
        let mut worst = 0.0f64;
        for layer in layers.iter().rev() {
            for (&x, &oracle) in layer.x_values.iter().zip(&layer.j_values) {
                let value = optimal_value(layer.t, x, w, &m, &spec)?;
                let rel = (oracle - value).abs() / value.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                let (mean, variance) = if layer.t < spec.horizon {
                    let p = optimal_policy(layer.t, x, w, &m, &spec)?;
                    (num(p.mean), num(p.variance))
                } else {
                    (String::new(), String::new())
                };
                rows.push(vec![
                    num(lambda),
                    layer.t.to_string(),
                    num(x),
                    mean,
                    variance,
                    num(value),
                    num(oracle),
                    num(rel),
                ]);
            }
        }
        worst_all = worst_all.max(worst);
        let _ = writeln!(summary, "lambda={lambda} w={w} max_rel_error={worst:e}");
    }
    let _ = writeln!(summary, "max_rel_error={worst_all:e}");
    out.csv(
        "analytic.csv",
        &[
            "lambda",
            "t",
            "x",
            "policy_mean",
            "policy_variance",
            "value",
            "oracle_value",
            "rel_error",
        ],
        rows,
    )?;
    out.text("summary.txt", &summary)
}

pub fn iterate_cmd(cfg: &RunConfig, out: &Output) -> Result<()> {
    let m = cfg.market_model(cfg.market.sigma_annual)?;
    let spec = cfg.spec()?;
    let it = &cfg.iterate;
    let fam = IterationFamily::new(it.slope, it.variance_base, it.variance_ratio)?;
    let w = it.w.unwrap_or_else(|| optimal_multiplier(&m, &spec));
    let a = &cfg.analytic;
    let grid = OracleConfig::with_range(a.x_min, a.x_max, a.x_points).x_grid();
    let mut rows = Vec::new();
    let (mut residual, mut monotone) = (0.0f64, true);
    for t in 0..spec.horizon {
        for &x in &grid {
            let mut previous = f64::INFINITY;
            for k in 0..=spec.horizon - t {
                let (pol, value) = iterate(&fam, k, t, x, w, &m, &spec)?;
                monotone &= value <= previous + 1e-12 * previous.abs().max(1.0);
                previous = value;
                if k == spec.horizon - t {
                    let best = optimal_value(t, x, w, &m, &spec)?;
                    residual = residual.max((value - best).abs());
                }
                rows.push(vec![
                    t.to_string(),
                    num(x),
                    k.to_string(),
                    num(pol.mean),
                    num(pol.variance),
                    num(value),
                ]);
            }
        }
    }
    out.csv(
        "iterate.csv",
        &["t", "x", "k", "policy_mean", "policy_variance", "value"],
        rows,
    )?;
    out.text(
        "summary.txt",
        &format!("w={w}\nconvergence_residual={residual:e}\nnonincreasing_in_k={monotone}\n"),
    )
}

fn write_log(out: &Output, records: &[exploratory_mv::learner::EpisodeRecord]) -> Result<()> {
    let mut f = out.file("log.ndjson")?;
    for r in records {
        writeln!(f, "{}", r.to_json_line())?;
    }
    f.flush()?;
    Ok(())
}

pub fn train(cfg: &RunConfig, out: &Output, resume: Option<&Path>) -> Result<()> {
    let hyper = cfg.hyper();
    let m = cfg.market_model(cfg.market.sigma_annual)?;
    let mut model = cfg.return_model(cfg.market.sigma_annual)?;
    let method = cfg.run.algorithm.method();
    let seed = cfg.run.seeds[0];
    let mut trainer = match resume {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Trainer::from_checkpoint(method, hyper, m.r_f(), &Checkpoint::from_text(&text)?)?
        }
        None => Trainer::new(method, hyper, m.r_f(), cfg.init(), RngStream::new(seed, 0))?,
    };
    let remaining = hyper.episodes.saturating_sub(trainer.episode());
    let log = trainer.run(&mut model, remaining)?;
    write_log(out, &log)?;
    out.text("checkpoint", &trainer.checkpoint().to_text())?;

    let test = cfg.simulate.test_episodes.min(log.len());
    let terminal: Vec<f64> = log[log.len() - test..]
        .iter()
        .map(|r| r.x_terminal)
        .collect();
    let mut rows = Vec::new();
    if let Ok(stats) = terminal_stats(&terminal, hyper.spec.x0) {
        rows.push(PerformanceReport {
            setting: cfg.setting(cfg.market.sigma_annual)?.label,
            algorithm: method.id().to_string(),
            seeds: vec![seed],
            mean_return: stats.mean_return,
            std_return: stats.std_return,
            sharpe: stats.sharpe,
            n: stats.n,
        });
    }
    write_report_csv(&rows, out.file("report.csv")?)?;

    let p = trainer.params();
    let mut s = String::new();
    let _ = writeln!(s, "algorithm={}", method.id());
    let _ = writeln!(s, "episodes={}", trainer.episode());
    let _ = writeln!(
        s,
        "theta1={} theta2={} theta3={} theta4={}",
        p.value.theta1, p.value.theta2, p.value.theta3, p.value.theta4
    );
    let _ = writeln!(s, "phi1={} phi2={}", p.policy.phi1, p.policy.phi2);
    let _ = writeln!(s, "w={}", trainer.w());
    let _ = writeln!(s, "analytic_theta1={}", m.contraction());
    let _ = writeln!(s, "projections={}", trainer.projections());
    out.text("summary.txt", &s)
}

fn curve_rows(cells: &[CellResult]) -> Vec<Vec<String>> {
    cells
        .iter()
        .flat_map(|c| {
            c.curve.iter().map(move |b| {
                vec![
                    c.setting.clone(),
                    c.algorithm.id().to_string(),
                    c.seed.to_string(),
                    b.block.to_string(),
                    num(b.mean),
                    num(b.variance),
                ]
            })
        })
        .collect()
}

const CURVE_HEADER: [&str; 6] = ["setting", "algorithm", "seed", "block", "mean", "variance"];

fn summary_rows(rows: &[SummaryRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
            vec![
                r.setting.clone(),
                r.algorithm.clone(),
                seeds.join(";"),
                num(r.mean_return),
                num(r.std_return),
                num(r.sharpe),
            ]
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 6] = [
    "setting",
    "algorithm",
    "seeds",
    "mean_return",
    "std_return",
    "sharpe",
];

fn study(cfg: &RunConfig, sigmas: &[f64]) -> Result<StudyReport> {
    let settings = sigmas
        .iter()
        .map(|&s| cfg.setting(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(run_simulation_study(
        &settings,
        &cfg.hyper(),
        cfg.split()?,
        &cfg.run.seeds,
        cfg.init(),
    )?)
}

pub fn simulate(cfg: &RunConfig, out: &Output) -> Result<()> {
    let report = study(cfg, &cfg.simulate.sigmas_annual)?;
    write_report_csv(&report.rows(), out.file("report.csv")?)?;
    out.csv(
        "summary.csv",
        &SUMMARY_HEADER,
        summary_rows(&report.summary),
    )?;
    out.csv("curves.csv", &CURVE_HEADER, curve_rows(&report.cells))?;
    out.text("summary.txt", &render_summary(&report.summary))
}

pub fn compare(cfg: &RunConfig, out: &Output) -> Result<()> {
    let report = study(cfg, &[cfg.market.sigma_annual])?;
    let b = cfg.problem.b;
    let mut rows = Vec::new();
    let mut text = render_summary(&report.summary);
    let _ = writeln!(
        text,
        "settling block (first block after which every 50-episode mean stays within {}% of b):",
        100.0 * SETTLING_BAND
    );
    for &seed in &cfg.run.seeds {
        let cell = |alg: Algorithm| {
            report
                .cells
                .iter()
                .find(|c| c.seed == seed && c.algorithm == alg)
                .expect("study covers every seed and algorithm")
        };
        let (d, e) = (cell(Algorithm::Discrete), cell(Algorithm::EmvContinuous));
        let settle = |c: &CellResult| settling_block(&c.curve, b, SETTLING_BAND * b);
        let show = |s: Option<usize>| s.map_or("none".to_string(), |v| v.to_string());
        let _ = writeln!(
            text,
            "  seed {seed}: discrete {} emv-continuous {}",
            show(settle(d)),
            show(settle(e))
        );
        rows.push(vec![
            d.setting.clone(),
            seed.to_string(),
            num(d.report.mean_return),
            num(d.report.std_return),
            num(d.report.sharpe),
            num(e.report.mean_return),
            num(e.report.std_return),
            num(e.report.sharpe),
            show(settle(d)),
            show(settle(e)),
        ]);
    }
    out.csv(
        "compare.csv",
        &[
            "setting",
            "seed",
            "discrete_mean_return",
            "discrete_std_return",
            "discrete_sharpe",
            "emv_continuous_mean_return",
            "emv_continuous_std_return",
            "emv_continuous_sharpe",
            "discrete_settling_block",
            "emv_continuous_settling_block",
        ],
        rows,
    )?;
    out.csv("curves.csv", &CURVE_HEADER, curve_rows(&report.cells))?;
    out.text("summary.txt", &text)
}

fn backtest_series(cfg: &RunConfig) -> Result<ReturnSeries> {
    Ok(match &cfg.backtest.data_path {
        Some(p) => load_monthly_csv(p, cfg.market.r_annual)?,
        None => bundled_sample(cfg.market.r_annual)?,
    })
}

pub fn backtest(cfg: &RunConfig, out: &Output) -> Result<()> {
    let series = backtest_series(cfg)?;
    let rows = rolling_backtest(
        &series,
        cfg.r_f(),
        &cfg.rolling(),
        &cfg.hyper(),
        &cfg.run.seeds,
        cfg.init(),
    )?;
    write_report_csv(&rows, out.file("report.csv")?)?;

    let mut summary = Vec::new();
    for r in &rows {
        if summary
            .iter()
            .any(|s: &SummaryRow| s.setting == r.setting && s.algorithm == r.algorithm)
        {
            continue;
        }
        let same: Vec<&PerformanceReport> = rows
            .iter()
            .filter(|o| o.setting == r.setting && o.algorithm == r.algorithm)
            .collect();
        let col = |f: fn(&PerformanceReport) -> f64| {
            median(&mut same.iter().map(|o| f(o)).collect::<Vec<_>>())
        };
        summary.push(SummaryRow {
            setting: r.setting.clone(),
            algorithm: r.algorithm.clone(),
            seeds: same.iter().flat_map(|o| o.seeds.clone()).collect(),
            mean_return: col(|o| o.mean_return),
            std_return: col(|o| o.std_return),
            sharpe: col(|o| o.sharpe),
        });
    }
    out.csv("summary.csv", &SUMMARY_HEADER, summary_rows(&summary))?;
    out.text("summary.txt", &render_summary(&summary))
}

pub fn histogram_cmd(cfg: &RunConfig, out: &Output) -> Result<()> {
    let data = match cfg.histogram.source {
        HistogramSource::Model => {
            let mut model = cfg.return_model(cfg.market.sigma_annual)?;
            let mut rng = RngStream::new(cfg.run.seeds[0], 0);
            model.sample_path(cfg.histogram.draws, &mut rng)?
        }
        HistogramSource::Data => backtest_series(cfg)?.returns(),
    };
    let h = histogram(&data, cfg.histogram.bins)?;
    h.write_csv(out.file("histogram.csv")?)?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let left = data.iter().filter(|&&x| x < mean - 2.0 * sd).count();
    let right = data.iter().filter(|&&x| x > mean + 2.0 * sd).count();
    out.text(
        "summary.txt",
        &format!(
            "n={}\nmean={mean}\nstd={sd}\nbelow_mean_minus_2sd={left}\nabove_mean_plus_2sd={right}\n",
            h.total()
        ),
    )
}
