//! Continuous-time EMV comparator, run on the same monthly grid.
//!
//! Value form `V(t,x) = (x - w)^2 exp(-2 phi2 (T - t)) + theta2 t^2 +
//! theta3 t + theta4`, policy `N(-sqrt(2 phi2 / (lambda pi)) e^{(2 phi1 - 1)/2} (x - w),
//! e^{2 phi2 (T - t) + 2 phi1 - 1} / (2 pi))`, and TD residual
//! `V(t+1) - V(t) - lambda (phi1 + phi2 (T - t)) dt`. No discounting of `w`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::GaussianPolicy;
use crate::error::{Error, Result};
use crate::learner::{
    train_with, Context, HyperParams, InitParams, Method, PolicyParams, TrainOutcome, Transition,
    FEASIBILITY_MARGIN,
};
use crate::market::{ReturnModel, RngStream};

pub const ALGORITHM_ID: &str = "emv-continuous";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEmv {
    /// Time step, in periods.
    pub dt: f64,
}

impl Default for ContinuousEmv {
    fn default() -> Self {
        Self { dt: 1.0 }
    }
}

pub fn baseline_policy(
    phi: &PolicyParams,
    t: usize,
    x: f64,
    w: f64,
    lambda: f64,
    horizon: usize,
) -> Result<GaussianPolicy> {
    if t >= horizon {
        return Err(Error::PeriodOutOfRange { t, horizon });
    }
    if !(phi.phi2 > 0.0) {
        return Err(Error::InfeasiblePolicy(format!(
            "continuous-time policy needs phi2 > 0, got {}",
            phi.phi2
        )));
    }
    let slope = -(2.0 * phi.phi2 / (lambda * PI)).sqrt() * ((2.0 * phi.phi1 - 1.0) / 2.0).exp();
    let remaining = (horizon - t) as f64;
    let variance = (2.0 * phi.phi2 * remaining + 2.0 * phi.phi1 - 1.0).exp() / (2.0 * PI);
    GaussianPolicy::new(slope * (x - w), variance)
}

impl Method for ContinuousEmv {
    fn id(&self) -> &'static str {
        ALGORITHM_ID
    }

    fn policy(
        &self,
        phi: &PolicyParams,
        t: usize,
        x: f64,
        ctx: &Context,
    ) -> Result<GaussianPolicy> {
        baseline_policy(phi, t, x, ctx.w, ctx.lambda, ctx.horizon)
    }

    fn residual(&self, tr: &Transition, p: &crate::learner::Params, ctx: &Context) -> f64 {
        let phi = &p.policy;
        let remaining = (ctx.horizon - tr.t) as f64;
        let y = tr.x - ctx.w;
        let y_next = tr.x_next - ctx.w;
        let tf = tr.t as f64;
        (-2.0 * phi.phi2 * (remaining - 1.0)).exp() * y_next * y_next
            - (-2.0 * phi.phi2 * remaining).exp() * y * y
            + p.value.theta2 * ((tf + 1.0).powi(2) - tf * tf)
            + p.value.theta3
            - ctx.lambda * (phi.phi1 + phi.phi2 * remaining) * self.dt
    }

    fn residual_phi2(&self, tr: &Transition, p: &crate::learner::Params, ctx: &Context) -> f64 {
        let phi2 = p.policy.phi2;
        let remaining = (ctx.horizon - tr.t) as f64;
        let y = tr.x - ctx.w;
        let y_next = tr.x_next - ctx.w;
        2.0 * remaining * (-2.0 * phi2 * remaining).exp() * y * y
            - 2.0 * (remaining - 1.0) * (-2.0 * phi2 * (remaining - 1.0)).exp() * y_next * y_next
            - ctx.lambda * remaining * self.dt
    }

    fn grad_phi(&self, d: &[Transition], p: &crate::learner::Params, ctx: &Context) -> (f64, f64) {
        d.iter().fold((0.0, 0.0), |(g1, g2), tr| {
            let res = self.residual(tr, p, ctx);
            (
                g1 - ctx.lambda * self.dt * res,
                g2 + res * self.residual_phi2(tr, p, ctx),
            )
        })
    }

    fn project(&self, phi: &mut PolicyParams, _ctx: &Context) -> bool {
        if phi.phi2 <= 0.0 {
            phi.phi2 = FEASIBILITY_MARGIN;
            true
        } else {
            false
        }
    }
}

pub fn baseline_train(
    hyper: &HyperParams,
    r_f: f64,
    model: &mut ReturnModel,
    init: InitParams,
    rng: RngStream,
) -> Result<TrainOutcome> {
    train_with(&ContinuousEmv::default(), hyper, r_f, model, init, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::gaussian_entropy;
    use crate::learner::{sync_dependent, Gradients, Params, ValueParams};

    fn ctx(r_f: f64) -> Context {
        Context {
            horizon: 3,
            r_f,
            lambda: 2.0,
            w: 1.4,
            b: 1.1,
        }
    }

    #[test]
    fn centered_mean_and_entropy_line() {
        let phi = PolicyParams {
            phi1: 0.4,
            phi2: 0.3,
        };
        assert_eq!(
            baseline_policy(&phi, 0, 1.4, 1.4, 2.0, 3).unwrap().mean,
            0.0
        );
        let mut last = f64::INFINITY;
        for t in 0..3 {
            let p = baseline_policy(&phi, t, 1.0, 1.4, 2.0, 3).unwrap();
            let h = gaussian_entropy(p.variance).unwrap();
            assert!((h - (phi.phi1 + phi.phi2 * (3 - t) as f64)).abs() < 1e-12);
            assert!(p.variance < last);
            last = p.variance;
        }
        let bad = PolicyParams {
            phi1: 0.4,
            phi2: 0.0,
        };
        assert!(baseline_policy(&bad, 0, 1.0, 1.4, 2.0, 3).is_err());
    }

    #[test]
    fn policy_ignores_risk_free_rate() {
        let phi = PolicyParams {
            phi1: 0.4,
            phi2: 0.3,
        };
        let method = ContinuousEmv::default();
        let a = method.policy(&phi, 1, 0.8, &ctx(1.0)).unwrap();
        let b = method.policy(&phi, 1, 0.8, &ctx(1.01)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_gradients_are_a_fixed_point() {
        let method = ContinuousEmv::default();
        let c = ctx(1.001);
        let mut p = Params {
            value: ValueParams {
                theta1: 0.0,
                theta2: 0.1,
                theta3: 0.2,
                theta4: 0.0,
            },
            policy: PolicyParams {
                phi1: 1.0,
                phi2: 0.05,
            },
        };
        sync_dependent(&mut p, &c);
        let (q, moved) = method.apply_updates(&p, &Gradients::default(), 0.01, 0.01, &c);
        assert!(!moved);
        assert_eq!(p, q);
    }

    #[test]
    fn projection_keeps_phi2_positive() {
        let method = ContinuousEmv::default();
        let c = ctx(1.001);
        let mut phi = PolicyParams {
            phi1: 1.0,
            phi2: -0.2,
        };
        assert!(method.project(&mut phi, &c));
        assert!(phi.phi2 > 0.0);
    }

    #[test]
    fn terminal_condition_holds_after_update() {
        let method = ContinuousEmv::default();
        let c = ctx(1.001);
        let mut p = Params {
            value: ValueParams {
                theta1: 0.0,
                theta2: 0.1,
                theta3: 0.2,
                theta4: 0.0,
            },
            policy: PolicyParams {
                phi1: 1.0,
                phi2: 0.05,
            },
        };
        sync_dependent(&mut p, &c);
        let g = Gradients {
            theta2: 0.3,
            theta3: -1.0,
            phi1: 0.2,
            phi2: 0.1,
        };
        let (q, _) = method.apply_updates(&p, &g, 0.01, 0.01, &c);
        let t = 3.0;
        for x in [0.0, 1.0, 2.5] {
            let v =
                (x - c.w).powi(2) + q.value.theta2 * t * t + q.value.theta3 * t + q.value.theta4;
            assert!((v - ((x - c.w).powi(2) - (c.w - c.b).powi(2))).abs() < 1e-12);
        }
    }
}
