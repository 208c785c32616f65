//! Closed-form solution of the discrete-time exploratory mean-variance problem.
//!
//! With wealth dynamics `x_{t+1} = r_f x_t + r_t u_t` and an entropy bonus of
//! weight `lambda`, every value function met here is a quadratic in the
//! centered state `x - rho_t w` plus a constant, and every optimal or improved
//! policy is Gaussian. This module evaluates those forms directly.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-period market: excess-return mean `a`, excess-return std `sigma` and
/// gross risk-free return `r_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketModel {
    a: f64,
    sigma: f64,
    r_f: f64,
}

impl MarketModel {
    pub fn new(a: f64, sigma: f64, r_f: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::invalid("a", "must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(r_f > 0.0 && r_f.is_finite()) {
            return Err(Error::invalid("r_f", format!("must be > 0, got {r_f}")));
        }
        Ok(Self { a, sigma, r_f })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r_f(&self) -> f64 {
        self.r_f
    }

    /// `E[r^2] = a^2 + sigma^2`.
    pub fn second_moment(&self) -> f64 {
        self.a * self.a + self.sigma * self.sigma
    }

    /// Per-period contraction of the optimal value's quadratic coefficient,
    /// `sigma^2 r_f^2 / (a^2 + sigma^2)`.
    pub fn contraction(&self) -> f64 {
        self.sigma * self.sigma * self.r_f * self.r_f / self.second_moment()
    }

    /// Slope of the optimal policy mean in the centered state.
    pub fn optimal_slope(&self) -> f64 {
        -self.a * self.r_f / self.second_moment()
    }
}

/// Horizon, initial wealth, target terminal wealth and exploration temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub horizon: usize,
    pub x0: f64,
    pub b: f64,
    pub lambda: f64,
}

impl ProblemSpec {
    pub fn new(horizon: usize, x0: f64, b: f64, lambda: f64) -> Result<Self> {
        let spec = Self {
            horizon,
            x0,
            b,
            lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be > 0, got {}", self.lambda),
            ));
        }
        if !self.x0.is_finite() || !self.b.is_finite() {
            return Err(Error::invalid("x0/b", "must be finite"));
        }
        Ok(())
    }

    fn check_control_period(&self, t: usize) -> Result<()> {
        if t >= self.horizon {
            return Err(Error::PeriodOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn check_period(&self, t: usize) -> Result<()> {
        if t > self.horizon {
            return Err(Error::PeriodOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }
}

/// Gaussian control density `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianPolicy {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::invalid(
                "variance",
                format!("policy needs finite mean and variance > 0, got ({mean}, {variance})"),
            ));
        }
        Ok(Self { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn density(&self, u: f64) -> f64 {
        let d = u - self.mean;
        (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * PI * E * self.variance).ln()
    }
}

/// `rho_t = r_f^{-(T - t)}`.
pub fn rho(t: usize, horizon: usize, r_f: f64) -> f64 {
    debug_assert!(t <= horizon);
    r_f.powi(-((horizon - t) as i32))
}

/// Differential entropy `1/2 ln(2 pi e v)` of a Gaussian with variance `v`.
pub fn gaussian_entropy(variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::invalid(
            "variance",
            format!("entropy needs variance > 0, got {variance}"),
        ));
    }
    Ok(0.5 * (2.0 * PI * E * variance).ln())
}

fn centered(t: usize, x: f64, w: f64, m: &MarketModel, spec: &ProblemSpec) -> f64 {
    x - rho(t, spec.horizon, m.r_f) * w
}

/// Optimal feedback control at `(t, x)` for multiplier `w`.
pub fn optimal_policy(
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<GaussianPolicy> {
    spec.check_control_period(t)?;
    let mean = m.optimal_slope() * centered(t, x, w, m, spec);
    let remaining = (spec.horizon - t - 1) as i32;
    let variance =
        spec.lambda / (2.0 * m.second_moment()) * (1.0 / m.contraction()).powi(remaining);
    GaussianPolicy::new(mean, variance)
}

/// Optimal value `J*(t, x; w)`.
pub fn optimal_value(t: usize, x: f64, w: f64, m: &MarketModel, spec: &ProblemSpec) -> Result<f64> {
    spec.check_period(t)?;
    let n = spec.horizon - t;
    let y = centered(t, x, w, m, spec);
    let lambda = spec.lambda;
    let quad = m.contraction().powi(n as i32) * y * y;
    let entropy_level = 0.5 * lambda * n as f64 * (m.second_moment() / (PI * lambda)).ln();
    // sum_{i=t+1}^{T} (T - i) = n (n - 1) / 2
    let decay = 0.5 * lambda * triangular(n) * m.contraction().ln();
    Ok(quad + entropy_level + decay - (w - spec.b).powi(2))
}

/// `0 + 1 + ... + (n - 1)`.
fn triangular(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n * (n - 1)) as f64 / 2.0
    }
}

/// Seed family `pi^0_t = N(K (x - rho_t w), lambda B C^{T-t-1})` for policy
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationFamily {
    /// Mean slope `K` in the centered state.
    pub slope: f64,
    /// Variance base `B`.
    pub variance_base: f64,
    /// Variance ratio `C` between consecutive periods.
    pub variance_ratio: f64,
}

impl IterationFamily {
    pub fn new(slope: f64, variance_base: f64, variance_ratio: f64) -> Result<Self> {
        let fam = Self {
            slope,
            variance_base,
            variance_ratio,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.slope.is_finite() {
            return Err(Error::invalid("K", "must be finite"));
        }
        if !(self.variance_base > 0.0 && self.variance_base.is_finite()) {
            return Err(Error::invalid(
                "B",
                format!("must be > 0, got {}", self.variance_base),
            ));
        }
        if !(self.variance_ratio > 0.0 && self.variance_ratio.is_finite()) {
            return Err(Error::invalid(
                "C",
                format!("must be > 0, got {}", self.variance_ratio),
            ));
        }
        Ok(())
    }

    /// The family whose seed policy is already the optimal one.
    pub fn optimal(m: &MarketModel) -> Self {
        Self {
            slope: m.optimal_slope(),
            variance_base: 1.0 / (2.0 * m.second_moment()),
            variance_ratio: 1.0 / m.contraction(),
        }
    }

    /// `A = E[(r_f + K r)^2] = r_f^2 + (a^2 + sigma^2) K^2 + 2 r_f a K`.
    pub fn growth(&self, m: &MarketModel) -> f64 {
        let k = self.slope;
        m.r_f * m.r_f + m.second_moment() * k * k + 2.0 * m.r_f * m.a * k
    }

    fn check_nondegenerate(&self, m: &MarketModel) -> Result<f64> {
        let ca = self.variance_ratio * self.growth(m);
        if (1.0 - ca).abs() <= 1e-12 {
            return Err(Error::DegenerateFamily { ca });
        }
        Ok(ca)
    }

    /// The state-independent part `f(t)` of the seed policy's value.
    pub fn constant(&self, t: usize, w: f64, m: &MarketModel, spec: &ProblemSpec) -> Result<f64> {
        self.validate()?;
        spec.check_period(t)?;
        let ca = self.check_nondegenerate(m)?;
        let n = spec.horizon - t;
        let lambda = spec.lambda;
        let lb = lambda * self.variance_base;
        let geometric = (1.0 - ca.powi(n as i32)) / (1.0 - ca);
        Ok(lb * m.second_moment() * geometric
            - 0.5 * lambda * (2.0 * PI * lb).ln() * n as f64
            - 0.5 * lambda * n as f64
            - 0.5 * lambda * self.variance_ratio.ln() * triangular(n)
            - (w - spec.b).powi(2))
    }
}

pub fn seed_policy(
    fam: &IterationFamily,
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<GaussianPolicy> {
    fam.validate()?;
    spec.check_control_period(t)?;
    let remaining = (spec.horizon - t - 1) as i32;
    GaussianPolicy::new(
        fam.slope * centered(t, x, w, m, spec),
        spec.lambda * fam.variance_base * fam.variance_ratio.powi(remaining),
    )
}

/// Value `J^{pi^0}(t, x; w)` of the seed policy.
pub fn seed_value(
    fam: &IterationFamily,
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<f64> {
    let f = fam.constant(t, w, m, spec)?;
    let y = centered(t, x, w, m, spec);
    Ok(fam.growth(m).powi((spec.horizon - t) as i32) * y * y + f)
}

fn check_steps(k: usize, t: usize, spec: &ProblemSpec) -> Result<()> {
    spec.check_period(t)?;
    if k > spec.horizon - t {
        return Err(Error::invalid(
            "k",
            format!(
                "at most T - t = {} improvement steps, got {k}",
                spec.horizon - t
            ),
        ));
    }
    Ok(())
}

/// Policy `pi^k_t` after `k` improvement steps from the seed family.
pub fn iterated_policy(
    fam: &IterationFamily,
    k: usize,
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<GaussianPolicy> {
    check_steps(k, t, spec)?;
    if k == 0 {
        return seed_policy(fam, t, x, w, m, spec);
    }
    spec.check_control_period(t)?;
    fam.check_nondegenerate(m)?;
    let a_growth = fam.growth(m);
    let mean = m.optimal_slope() * centered(t, x, w, m, spec);
    let variance = spec.lambda
        / (2.0 * m.second_moment() * a_growth.powi((spec.horizon - t - k) as i32))
        * (1.0 / m.contraction()).powi(k as i32 - 1);
    GaussianPolicy::new(mean, variance)
}

/// Value `J^{pi^k}(t, x; w)` after `k` improvement steps from the seed family.
pub fn iterated_value(
    fam: &IterationFamily,
    k: usize,
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<f64> {
    check_steps(k, t, spec)?;
    if k == 0 {
        return seed_value(fam, t, x, w, m, spec);
    }
    let lambda = spec.lambda;
    let a_growth = fam.growth(m);
    let rest = spec.horizon - t - k;
    let y = centered(t, x, w, m, spec);
    let theta = m.contraction();
    Ok(a_growth.powi(rest as i32) * theta.powi(k as i32) * y * y
        + 0.5 * lambda * k as f64 * (m.second_moment() / (PI * lambda)).ln()
        + 0.5 * lambda * triangular(k) * theta.ln()
        + 0.5 * lambda * a_growth.ln() * (k * rest) as f64
        + fam.constant(t + k, w, m, spec)?)
}

/// Both halves of the `k`-th iterate at a control period `t < T`.
pub fn iterate(
    fam: &IterationFamily,
    k: usize,
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<(GaussianPolicy, f64)> {
    Ok((
        iterated_policy(fam, k, t, x, w, m, spec)?,
        iterated_value(fam, k, t, x, w, m, spec)?,
    ))
}

/// Closed-form `E[x_T]` under the optimal policy started from `(t, x)`.
///
/// The exploration noise has zero mean, so only the policy mean enters:
/// the centered state contracts by `r_f sigma^2 / (a^2 + sigma^2)` per period.
pub fn optimal_expected_terminal(
    t: usize,
    x: f64,
    w: f64,
    m: &MarketModel,
    spec: &ProblemSpec,
) -> Result<f64> {
    spec.check_period(t)?;
    let per_period = m.r_f * m.sigma * m.sigma / m.second_moment();
    Ok(w + per_period.powi((spec.horizon - t) as i32) * centered(t, x, w, m, spec))
}

/// Multiplier `w` for which the optimal policy hits `E[x_T] = b` from `(0, x0)`.
pub fn optimal_multiplier(m: &MarketModel, spec: &ProblemSpec) -> f64 {
    let n = spec.horizon as i32;
    let g = (m.r_f * m.sigma * m.sigma / m.second_moment()).powi(n);
    let rho0 = rho(0, spec.horizon, m.r_f);
    // b = w + g (x0 - rho0 w)
    (spec.b - g * spec.x0) / (1.0 - g * rho0)
}
