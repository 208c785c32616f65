//! Parametric reinforcement learning for the exploratory problem.
//!
//! The value function is `J(t,x) = theta1^{T-t} (x - rho_t w)^2 + theta2 t^2 +
//! theta3 t + theta4` and the policy is pinned down by an entropy line
//! `H_t = phi1 + phi2 (T - t - 1)`, with `theta1 = exp(-2 phi2)` tying the two
//! together. Parameters move by gradient descent on the squared Bellman error
//! over sampled transitions; the Lagrange multiplier `w` is driven toward the
//! value that puts mean terminal wealth on target.
//!
//! The training loop is shared with the continuous-time comparator in
//! [`crate::baseline`] through the [`Method`] trait.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{rho, GaussianPolicy, ProblemSpec};
use crate::error::{Error, Result};
use crate::market::{step_wealth, ReturnModel, RngStream};

/// Cost magnitude beyond which training is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Margin kept above the feasibility boundary when projecting `phi2`.
pub const FEASIBILITY_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueParams {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub value: ValueParams,
    pub policy: PolicyParams,
}

impl Params {
    fn is_finite(&self) -> bool {
        let v = &self.value;
        let p = &self.policy;
        [v.theta1, v.theta2, v.theta3, v.theta4, p.phi1, p.phi2]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Everything besides the parameters that a residual depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    pub horizon: usize,
    pub r_f: f64,
    pub lambda: f64,
    pub w: f64,
    pub b: f64,
}

impl Context {
    pub fn new(spec: &ProblemSpec, r_f: f64, w: f64) -> Self {
        Self {
            horizon: spec.horizon,
            r_f,
            lambda: spec.lambda,
            w,
            b: spec.b,
        }
    }

    fn centered(&self, t: usize, x: f64) -> f64 {
        x - rho(t, self.horizon, self.r_f) * self.w
    }
}

/// One observed wealth transition `x_t -> x_{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub t: usize,
    pub x: f64,
    pub x_next: f64,
}

/// Sampled trajectory: `wealth` has `T + 1` entries, `allocations` and
/// `returns` have `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub wealth: Vec<f64>,
    pub allocations: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Episode {
    pub fn terminal(&self) -> f64 {
        *self.wealth.last().expect("episode has a terminal wealth")
    }

    pub fn transitions(&self) -> Vec<Transition> {
        self.wealth
            .windows(2)
            .enumerate()
            .map(|(t, w)| Transition {
                t,
                x: w[0],
                x_next: w[1],
            })
            .collect()
    }
}

/// Gradient of the Bellman-error cost in the trainable coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub theta2: f64,
    pub theta3: f64,
    pub phi1: f64,
    pub phi2: f64,
}

/// A parametric exploratory MV learner: policy form, Bellman residual, its
/// analytic gradients and the feasibility constraint on `phi2`.
pub trait Method: Sync {
    /// Algorithm id written into logs and reports.
    fn id(&self) -> &'static str;

    fn policy(&self, phi: &PolicyParams, t: usize, x: f64, ctx: &Context)
        -> Result<GaussianPolicy>;

    fn residual(&self, tr: &Transition, p: &Params, ctx: &Context) -> f64;

    /// `(d residual / d phi2)` for one transition.
    fn residual_phi2(&self, tr: &Transition, p: &Params, ctx: &Context) -> f64;

    /// Pull `phi2` back into the feasible region; returns whether it moved.
    fn project(&self, phi: &mut PolicyParams, ctx: &Context) -> bool;

    fn cost(&self, d: &[Transition], p: &Params, ctx: &Context) -> f64 {
        0.5 * d
            .iter()
            .map(|tr| self.residual(tr, p, ctx).powi(2))
            .sum::<f64>()
    }

    fn grad_theta(&self, d: &[Transition], p: &Params, ctx: &Context) -> (f64, f64) {
        d.iter().fold((0.0, 0.0), |(g2, g3), tr| {
            let res = self.residual(tr, p, ctx);
            let t = tr.t as f64;
            (g2 + res * ((t + 1.0).powi(2) - t * t), g3 + res)
        })
    }

    fn grad_phi(&self, d: &[Transition], p: &Params, ctx: &Context) -> (f64, f64) {
        d.iter().fold((0.0, 0.0), |(g1, g2), tr| {
            let res = self.residual(tr, p, ctx);
            (
                g1 - ctx.lambda * res,
                g2 + res * self.residual_phi2(tr, p, ctx),
            )
        })
    }

    /// Gradient step on `(theta2, theta3, phi1, phi2)`, projection of `phi2`,
    /// then `theta1 = exp(-2 phi2)` and the terminal-condition `theta4`.
    fn apply_updates(
        &self,
        p: &Params,
        grads: &Gradients,
        eta_theta: f64,
        eta_phi: f64,
        ctx: &Context,
    ) -> (Params, bool) {
        let mut next = *p;
        next.value.theta2 -= eta_theta * grads.theta2;
        next.value.theta3 -= eta_theta * grads.theta3;
        next.policy.phi1 -= eta_phi * grads.phi1;
        next.policy.phi2 -= eta_phi * grads.phi2;
        let projected = self.project(&mut next.policy, ctx);
        sync_dependent(&mut next, ctx);
        (next, projected)
    }
}

/// Recompute `theta1` from `phi2` and `theta4` from the terminal condition
/// `J(T, x) = (x - w)^2 - (w - b)^2`.
pub fn sync_dependent(p: &mut Params, ctx: &Context) {
    let big_t = ctx.horizon as f64;
    p.value.theta1 = (-2.0 * p.policy.phi2).exp();
    p.value.theta4 =
        -p.value.theta2 * big_t * big_t - p.value.theta3 * big_t - (ctx.w - ctx.b).powi(2);
}

/// The discrete-time algorithm.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscreteEmv;

impl Method for DiscreteEmv {
    fn id(&self) -> &'static str {
        "discrete"
    }

    fn policy(
        &self,
        phi: &PolicyParams,
        t: usize,
        x: f64,
        ctx: &Context,
    ) -> Result<GaussianPolicy> {
        policy_from_params(phi, t, x, ctx.w, ctx.lambda, ctx.r_f, ctx.horizon)
    }

    fn residual(&self, tr: &Transition, p: &Params, ctx: &Context) -> f64 {
        let big_t = ctx.horizon;
        let phi = &p.policy;
        let t = tr.t;
        let remaining = (big_t - t) as f64;
        let y = ctx.centered(t, tr.x);
        let y_next = ctx.centered(t + 1, tr.x_next);
        let tf = t as f64;
        (-2.0 * phi.phi2 * (remaining - 1.0)).exp() * y_next * y_next
            - (-2.0 * phi.phi2 * remaining).exp() * y * y
            + p.value.theta2 * ((tf + 1.0).powi(2) - tf * tf)
            + p.value.theta3
            - ctx.lambda * (phi.phi1 + phi.phi2 * (remaining - 1.0))
    }

    fn residual_phi2(&self, tr: &Transition, p: &Params, ctx: &Context) -> f64 {
        let phi2 = p.policy.phi2;
        let remaining = (ctx.horizon - tr.t) as f64;
        let y = ctx.centered(tr.t, tr.x);
        let y_next = ctx.centered(tr.t + 1, tr.x_next);
        2.0 * remaining * (-2.0 * phi2 * remaining).exp() * y * y
            - 2.0 * (remaining - 1.0) * (-2.0 * phi2 * (remaining - 1.0)).exp() * y_next * y_next
            - ctx.lambda * (remaining - 1.0)
    }

    fn project(&self, phi: &mut PolicyParams, ctx: &Context) -> bool {
        let boundary = -ctx.r_f.ln();
        if ctx.r_f * ctx.r_f - (-2.0 * phi.phi2).exp() < 0.0 {
            phi.phi2 = boundary + FEASIBILITY_MARGIN;
            true
        } else {
            false
        }
    }
}

/// Gaussian policy implied by the entropy line `(phi1, phi2)`.
pub fn policy_from_params(
    phi: &PolicyParams,
    t: usize,
    x: f64,
    w: f64,
    lambda: f64,
    r_f: f64,
    horizon: usize,
) -> Result<GaussianPolicy> {
    if t >= horizon {
        return Err(Error::PeriodOutOfRange { t, horizon });
    }
    let gap = r_f * r_f - (-2.0 * phi.phi2).exp();
    if gap < 0.0 {
        return Err(Error::InfeasiblePolicy(format!(
            "r_f^2 - exp(-2 phi2) = {gap} < 0 (phi2 = {})",
            phi.phi2
        )));
    }
    let slope = -(gap / (lambda * PI)).sqrt() * ((2.0 * phi.phi1 - 1.0) / 2.0).exp();
    let remaining = (horizon - t - 1) as f64;
    let variance = (2.0 * phi.phi2 * remaining + 2.0 * phi.phi1 - 1.0).exp() / (2.0 * PI);
    GaussianPolicy::new(slope * (x - rho(t, horizon, r_f) * w), variance)
}

/// `theta1^{T-t} (x - rho_t w)^2 + theta2 t^2 + theta3 t + theta4`.
pub fn value_from_params(
    theta: &ValueParams,
    t: usize,
    x: f64,
    w: f64,
    horizon: usize,
    r_f: f64,
) -> f64 {
    let y = x - rho(t, horizon, r_f) * w;
    let tf = t as f64;
    theta.theta1.powi((horizon - t) as i32) * y * y
        + theta.theta2 * tf * tf
        + theta.theta3 * tf
        + theta.theta4
}

pub fn cost(d: &[Transition], p: &Params, ctx: &Context) -> f64 {
    DiscreteEmv.cost(d, p, ctx)
}

pub fn grad_theta(d: &[Transition], p: &Params, ctx: &Context) -> (f64, f64) {
    DiscreteEmv.grad_theta(d, p, ctx)
}

pub fn grad_phi(d: &[Transition], p: &Params, ctx: &Context) -> (f64, f64) {
    DiscreteEmv.grad_phi(d, p, ctx)
}

pub fn apply_updates(
    p: &Params,
    grads: &Gradients,
    eta_theta: f64,
    eta_phi: f64,
    ctx: &Context,
) -> (Params, bool) {
    DiscreteEmv.apply_updates(p, grads, eta_theta, eta_phi, ctx)
}

/// Roll out one episode from `spec.x0` under the method's policy.
pub fn sample_episode<M: Method + ?Sized>(
    method: &M,
    p: &Params,
    ctx: &Context,
    model: &mut ReturnModel,
    x0: f64,
    rng: &mut RngStream,
) -> Result<Episode> {
    let horizon = ctx.horizon;
    let returns = model.sample_path(horizon, rng)?;
    let mut wealth = Vec::with_capacity(horizon + 1);
    let mut allocations = Vec::with_capacity(horizon);
    wealth.push(x0);
    let mut x = x0;
    for (t, &r) in returns.iter().enumerate() {
        let pol = method.policy(&p.policy, t, x, ctx)?;
        let u = pol.mean + pol.std_dev() * rng.standard_normal();
        x = step_wealth(x, u, r, ctx.r_f);
        allocations.push(u);
        wealth.push(x);
    }
    Ok(Episode {
        wealth,
        allocations,
        returns,
    })
}

/// Multiplier with a ring of the most recent terminal wealths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangeState {
    pub w: f64,
    pub buffer: VecDeque<f64>,
    pub capacity: usize,
    pub alpha: f64,
}

impl LagrangeState {
    pub fn new(w: f64, capacity: usize, alpha: f64) -> Self {
        Self {
            w,
            buffer: VecDeque::with_capacity(capacity),
            capacity,
            alpha,
        }
    }

    pub fn record(&mut self, x_terminal: f64) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(x_terminal);
    }
}

/// `w <- w - alpha (mean of last N terminal wealths - b)`.
pub fn update_w(state: &LagrangeState, b: f64, n: usize) -> Result<LagrangeState> {
    if n == 0 || state.buffer.len() < n {
        return Err(Error::Contract(format!(
            "multiplier update needs {n} buffered terminal wealths, have {}",
            state.buffer.len()
        )));
    }
    let recent = state.buffer.iter().rev().take(n).sum::<f64>() / n as f64;
    let mut next = state.clone();
    next.w = state.w - state.alpha * (recent - b);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefixMode {
    /// One update per growing prefix `D_i = {0..i}`, `i = 1..T`.
    #[default]
    Growing,
    /// One update per episode on the full trajectory.
    FullEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub spec: ProblemSpec,
    pub eta_theta: f64,
    pub eta_phi: f64,
    pub alpha: f64,
    pub episodes: usize,
    pub sample_size: usize,
    pub prefix: PrefixMode,
}

impl HyperParams {
    /// Defaults of the simulation study: `T = 3`, `x0 = 1`, `b = 1.1`,
    /// `lambda = 2`, `M = 15000`, `N = 10`, `alpha = 0.05`, `eta = 0.0005`.
    pub fn study_defaults() -> Self {
        Self {
            spec: ProblemSpec {
                horizon: 3,
                x0: 1.0,
                b: 1.1,
                lambda: 2.0,
            },
            eta_theta: 0.0005,
            eta_phi: 0.0005,
            alpha: 0.05,
            episodes: 15000,
            sample_size: 10,
            prefix: PrefixMode::Growing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        for (name, v) in [
            ("eta_theta", self.eta_theta),
            ("eta_phi", self.eta_phi),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("learning rate must be > 0, got {v}"),
                ));
            }
        }
        if self.sample_size < 1 {
            return Err(Error::invalid("sample_size", "N must be at least 1"));
        }
        if self.episodes != 0 && self.episodes < self.sample_size {
            return Err(Error::invalid(
                "episodes",
                format!(
                    "M = {} is smaller than N = {}",
                    self.episodes, self.sample_size
                ),
            ));
        }
        Ok(())
    }
}

/// Initial values for the free parameters; `theta1` and `theta4` follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitParams {
    pub theta2: f64,
    pub theta3: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Defaults to the target `b`.
    pub w: Option<f64>,
}

impl Default for InitParams {
    fn default() -> Self {
        Self {
            theta2: 0.0,
            theta3: 0.0,
            phi1: 1.0,
            phi2: 0.01,
            w: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    #[serde(rename = "x_T")]
    pub x_terminal: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub w: f64,
}

impl EpisodeRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Resumable training state.
#[derive(Debug, Clone)]
pub struct Trainer<'m, M: Method + ?Sized> {
    method: &'m M,
    hyper: HyperParams,
    r_f: f64,
    params: Params,
    lagrange: LagrangeState,
    episode: usize,
    projections: usize,
    rng: RngStream,
}

impl<'m, M: Method + ?Sized> Trainer<'m, M> {
    pub fn new(
        method: &'m M,
        hyper: HyperParams,
        r_f: f64,
        init: InitParams,
        rng: RngStream,
    ) -> Result<Self> {
        hyper.validate()?;
        let w = init.w.unwrap_or(hyper.spec.b);
        let ctx = Context::new(&hyper.spec, r_f, w);
        let policy = PolicyParams {
            phi1: init.phi1,
            phi2: init.phi2,
        };
        let mut probe = policy;
        if method.project(&mut probe, &ctx) {
            return Err(Error::InfeasiblePolicy(format!(
                "initial phi2 = {} violates the {} feasibility constraint",
                init.phi2,
                method.id()
            )));
        }
        let mut params = Params {
            value: ValueParams {
                theta1: 0.0,
                theta2: init.theta2,
                theta3: init.theta3,
                theta4: 0.0,
            },
            policy,
        };
        sync_dependent(&mut params, &ctx);
        Ok(Self {
            method,
            hyper,
            r_f,
            params,
            lagrange: LagrangeState::new(w, hyper.sample_size, hyper.alpha),
            episode: 0,
            projections: 0,
            rng,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn w(&self) -> f64 {
        self.lagrange.w
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    pub fn projections(&self) -> usize {
        self.projections
    }

    pub fn context(&self) -> Context {
        Context::new(&self.hyper.spec, self.r_f, self.lagrange.w)
    }

    pub fn rng_mut(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    fn record(&self, x_terminal: f64) -> EpisodeRecord {
        let v = &self.params.value;
        let p = &self.params.policy;
        EpisodeRecord {
            episode: self.episode,
            x_terminal,
            theta1: v.theta1,
            theta2: v.theta2,
            theta3: v.theta3,
            theta4: v.theta4,
            phi1: p.phi1,
            phi2: p.phi2,
            w: self.lagrange.w,
        }
    }

    /// One theta step followed by one phi step on the transitions `d`.
    fn update_on(&mut self, d: &[Transition]) -> Result<()> {
        let ctx = self.context();
        let c = self.method.cost(d, &self.params, &ctx);
        if !c.is_finite() || c.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged {
                episode: self.episode,
                detail: format!("Bellman-error cost {c}"),
            });
        }
        let (g2, g3) = self.method.grad_theta(d, &self.params, &ctx);
        let theta_step = Gradients {
            theta2: g2,
            theta3: g3,
            ..Gradients::default()
        };
        let (p, moved) = self.method.apply_updates(
            &self.params,
            &theta_step,
            self.hyper.eta_theta,
            self.hyper.eta_phi,
            &ctx,
        );
        let (g1, g2) = self.method.grad_phi(d, &p, &ctx);
        let phi_step = Gradients {
            phi1: g1,
            phi2: g2,
            ..Gradients::default()
        };
        let (p, moved_phi) = self.method.apply_updates(
            &p,
            &phi_step,
            self.hyper.eta_theta,
            self.hyper.eta_phi,
            &ctx,
        );
        if !p.is_finite() {
            return Err(Error::Diverged {
                episode: self.episode,
                detail: format!("non-finite parameters {p:?}"),
            });
        }
        self.projections += usize::from(moved) + usize::from(moved_phi);
        self.params = p;
        Ok(())
    }

    /// Sample an episode under the current parameters without learning.
    pub fn rollout(&mut self, model: &mut ReturnModel) -> Result<Episode> {
        let ctx = self.context();
        sample_episode(
            self.method,
            &self.params,
            &ctx,
            model,
            self.hyper.spec.x0,
            &mut self.rng,
        )
    }

    /// Sample one episode, learn from it, and advance the multiplier schedule.
    pub fn step(&mut self, model: &mut ReturnModel) -> Result<EpisodeRecord> {
        let ep = self.rollout(model)?;
        self.learn(&ep)?;
        self.episode += 1;
        let x_terminal = ep.terminal();
        self.lagrange.record(x_terminal);
        if self.episode.is_multiple_of(self.hyper.sample_size) {
            self.lagrange = update_w(&self.lagrange, self.hyper.spec.b, self.hyper.sample_size)?;
        }
        Ok(self.record(x_terminal))
    }

    /// Parameter updates from an already sampled episode.
    pub fn learn(&mut self, ep: &Episode) -> Result<()> {
        let transitions = ep.transitions();
        match self.hyper.prefix {
            PrefixMode::Growing => {
                for i in 1..=transitions.len() {
                    self.update_on(&transitions[..i])?;
                }
            }
            PrefixMode::FullEpisode => self.update_on(&transitions)?,
        }
        Ok(())
    }

    pub fn run(&mut self, model: &mut ReturnModel, episodes: usize) -> Result<Vec<EpisodeRecord>> {
        (0..episodes).map(|_| self.step(model)).collect()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let v = &self.params.value;
        let p = &self.params.policy;
        Checkpoint {
            algorithm: self.method.id().to_string(),
            episode: self.episode as u64,
            theta1: v.theta1,
            theta2: v.theta2,
            theta3: v.theta3,
            theta4: v.theta4,
            phi1: p.phi1,
            phi2: p.phi2,
            w: self.lagrange.w,
            w_buffer: self.lagrange.buffer.iter().copied().collect(),
            projections: self.projections as u64,
            rng_seed: self.rng.seed(),
            rng_stream: self.rng.stream(),
            rng_word_pos: self.rng.word_pos().to_string(),
        }
    }

    pub fn from_checkpoint(
        method: &'m M,
        hyper: HyperParams,
        r_f: f64,
        ck: &Checkpoint,
    ) -> Result<Self> {
        hyper.validate()?;
        if ck.algorithm != method.id() {
            return Err(Error::Contract(format!(
                "checkpoint is for `{}`, not `{}`",
                ck.algorithm,
                method.id()
            )));
        }
        let word_pos: u128 = ck
            .rng_word_pos
            .parse()
            .map_err(|_| Error::invalid("rng_word_pos", "not an unsigned integer"))?;
        let mut lagrange = LagrangeState::new(ck.w, hyper.sample_size, hyper.alpha);
        for &x in &ck.w_buffer {
            lagrange.record(x);
        }
        Ok(Self {
            method,
            hyper,
            r_f,
            params: Params {
                value: ValueParams {
                    theta1: ck.theta1,
                    theta2: ck.theta2,
                    theta3: ck.theta3,
                    theta4: ck.theta4,
                },
                policy: PolicyParams {
                    phi1: ck.phi1,
                    phi2: ck.phi2,
                },
            },
            lagrange,
            episode: ck.episode as usize,
            projections: ck.projections as usize,
            rng: RngStream::restore(ck.rng_seed, ck.rng_stream, word_pos),
        })
    }
}

/// Flat key-value snapshot of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub algorithm: String,
    pub episode: u64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub w: f64,
    pub w_buffer: Vec<f64>,
    pub projections: u64,
    pub rng_seed: u64,
    pub rng_stream: u64,
    /// Decimal string; the keystream position does not fit a TOML integer.
    pub rng_word_pos: String,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: "checkpoint".into(),
            line: e
                .span()
                .map(|s| text[..s.start].lines().count() as u64)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }
}

/// Result of a full training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: Params,
    pub w: f64,
    pub log: Vec<EpisodeRecord>,
    pub projections: usize,
    pub checkpoint: Checkpoint,
}

/// Run `hyper.episodes` episodes of `method` from `init`.
pub fn train_with<M: Method + ?Sized>(
    method: &M,
    hyper: &HyperParams,
    r_f: f64,
    model: &mut ReturnModel,
    init: InitParams,
    rng: RngStream,
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(method, *hyper, r_f, init, rng)?;
    let log = trainer.run(model, hyper.episodes)?;
    Ok(TrainOutcome {
        params: *trainer.params(),
        w: trainer.w(),
        log,
        projections: trainer.projections(),
        checkpoint: trainer.checkpoint(),
    })
}

/// Train the discrete-time algorithm.
pub fn train(
    hyper: &HyperParams,
    r_f: f64,
    model: &mut ReturnModel,
    init: InitParams,
    rng: RngStream,
) -> Result<TrainOutcome> {
    train_with(&DiscreteEmv, hyper, r_f, model, init, rng)
}
