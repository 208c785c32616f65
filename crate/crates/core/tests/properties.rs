use exploratory_mv::analytic::{gaussian_entropy, optimal_policy, MarketModel, ProblemSpec};
use exploratory_mv::baseline::{baseline_policy, ContinuousEmv};
use exploratory_mv::evaluation::{mv_objective, terminal_stats};
use exploratory_mv::learner::{
    policy_from_params, sync_dependent, update_w, value_from_params, Context, DiscreteEmv,
    Gradients, LagrangeState, Method, Params, PolicyParams, ValueParams,
};
use exploratory_mv::market::{histogram, step_wealth, ReturnSeries, YearMonth};
use proptest::prelude::*;

fn context() -> impl Strategy<Value = Context> {
    (
        1usize..8,
        1.0f64..1.01,
        0.1f64..4.0,
        0.5f64..3.0,
        0.9f64..1.3,
    )
        .prop_map(|(horizon, r_f, lambda, w, b)| Context {
            horizon,
            r_f,
            lambda,
            w,
            b,
        })
}

fn params() -> impl Strategy<Value = Params> {
    (-2.0f64..2.0, -2.0f64..2.0, -1.0f64..2.0, 0.0f64..1.0).prop_map(|(t2, t3, p1, p2)| Params {
        value: ValueParams {
            theta1: 0.0,
            theta2: t2,
            theta3: t3,
            theta4: 0.0,
        },
        policy: PolicyParams { phi1: p1, phi2: p2 },
    })
}

fn grads() -> impl Strategy<Value = Gradients> {
    (
        -50.0f64..50.0,
        -50.0f64..50.0,
        -50.0f64..50.0,
        -500.0f64..500.0,
    )
        .prop_map(|(theta2, theta3, phi1, phi2)| Gradients {
            theta2,
            theta3,
            phi1,
            phi2,
        })
}

proptest! {
    #[test]
    fn wealth_step_is_linear(x in -5.0f64..5.0, u in -50.0f64..50.0, v in -50.0f64..50.0,
                             r in -0.5f64..0.5, r_f in 1.0f64..1.05) {
        let joint = step_wealth(x, u + v, r, r_f);
        let split = step_wealth(x, u, r, r_f) + r * v;
        prop_assert!((joint - split).abs() <= 1e-12 * (1.0 + joint.abs()));
    }

    #[test]
    fn updates_keep_terminal_condition_and_feasibility(
        ctx in context(), p in params(), g in grads(), eta in 0.0001f64..0.01, x in -3.0f64..3.0
    ) {
        let methods: [&dyn Method; 2] = [&DiscreteEmv, &ContinuousEmv::default()];
        for method in methods {
            let mut start = p;
            method.project(&mut start.policy, &ctx);
            sync_dependent(&mut start, &ctx);
            let (next, _) = method.apply_updates(&start, &g, eta, eta, &ctx);
            let big_t = ctx.horizon as f64;
            let terminal = (x - ctx.w).powi(2)
                + next.value.theta2 * big_t * big_t + next.value.theta3 * big_t + next.value.theta4;
            prop_assert!((terminal - ((x - ctx.w).powi(2) - (ctx.w - ctx.b).powi(2))).abs() <= 1e-12 * (1.0 + terminal.abs()));
            let v = value_from_params(&next.value, ctx.horizon, x, ctx.w, ctx.horizon, ctx.r_f);
            prop_assert!((v - terminal).abs() <= 1e-12 * (1.0 + v.abs()));
            prop_assert!(next.value.theta1 > 0.0);
            prop_assert_eq!(next.value.theta1, (-2.0 * next.policy.phi2).exp());
            prop_assert!(method.policy(&next.policy, 0, x, &ctx).is_ok());
        }
        let (next, _) = DiscreteEmv.apply_updates(&p, &g, eta, eta, &ctx);
        prop_assert!(ctx.r_f * ctx.r_f - (-2.0 * next.policy.phi2).exp() >= 0.0);
    }

    #[test]
    fn policy_entropy_is_on_the_line(ctx in context(), p in params(), x in -3.0f64..3.0, frac in 0.0f64..1.0) {
        let t = ((ctx.horizon as f64) * frac) as usize % ctx.horizon;
        let mut phi = p.policy;
        DiscreteEmv.project(&mut phi, &ctx);
        let pol = policy_from_params(&phi, t, x, ctx.w, ctx.lambda, ctx.r_f, ctx.horizon).unwrap();
        let h = gaussian_entropy(pol.variance).unwrap();
        prop_assert!((h - (phi.phi1 + phi.phi2 * (ctx.horizon - t - 1) as f64)).abs() <= 1e-12);
        if phi.phi2 > 0.0 {
            let base = baseline_policy(&phi, t, x, ctx.w, ctx.lambda, ctx.horizon).unwrap();
            let hb = gaussian_entropy(base.variance).unwrap();
            prop_assert!((hb - (phi.phi1 + phi.phi2 * (ctx.horizon - t) as f64)).abs() <= 1e-12);
        }
    }

    #[test]
    fn optimal_policy_separates(a in -0.05f64..0.05, sigma in 0.01f64..0.2, r_f in 1.0f64..1.01,
                                x in -3.0f64..3.0, x2 in -3.0f64..3.0, l1 in 0.05f64..5.0, l2 in 0.05f64..5.0) {
        let m = MarketModel::new(a, sigma, r_f).unwrap();
        let s1 = ProblemSpec::new(4, 1.0, 1.1, l1).unwrap();
        let s2 = ProblemSpec::new(4, 1.0, 1.1, l2).unwrap();
        for t in 0..4 {
            let p1 = optimal_policy(t, x, 1.3, &m, &s1).unwrap();
            let p2 = optimal_policy(t, x, 1.3, &m, &s2).unwrap();
            prop_assert_eq!(p1.mean, p2.mean);
            let q = optimal_policy(t, x2, 1.3, &m, &s1).unwrap();
            prop_assert_eq!(p1.variance.to_bits(), q.variance.to_bits());
        }
    }

    #[test]
    fn series_csv_round_trips(start in 1900i32..2100, month in 1u8..=12,
                              values in prop::collection::vec(-0.5f64..0.5, 1..60)) {
        let mut date = YearMonth::new(start, month).unwrap();
        let points: Vec<(YearMonth, f64)> = values.iter().map(|&v| {
            let p = (date, v);
            date = date.succ();
            p
        }).collect();
        let series = ReturnSeries::new(points).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        series.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let back = ReturnSeries::read_csv(&path).unwrap();
        prop_assert_eq!(back.points(), series.points());
    }

    #[test]
    fn histogram_counts_cover_the_data(data in prop::collection::vec(-1e6f64..1e6, 1..500), bins in 1usize..64) {
        let h = histogram(&data, bins).unwrap();
        prop_assert_eq!(h.total(), data.len());
        prop_assert_eq!(h.edges.len(), bins + 1);
        prop_assert!(h.edges.windows(2).all(|e| e[0] <= e[1]));
    }

    #[test]
    fn lagrangian_decomposes(xs in prop::collection::vec(0.0f64..3.0, 2..200), w in 0.5f64..2.5, b in 0.9f64..1.3) {
        let o = mv_objective(&xs, w, b).unwrap();
        let rhs = o.variance + (o.mean - w).powi(2) - (w - b).powi(2);
        prop_assert!((o.lagrangian - rhs).abs() <= 1e-10);
    }

    #[test]
    fn sharpe_times_std_is_mean(xs in prop::collection::vec(0.5f64..1.5, 2..200)) {
        if let Ok(s) = terminal_stats(&xs, 1.0) {
            prop_assert!((s.sharpe * s.std_return - s.mean_return).abs() <= 1e-12);
        }
    }

    #[test]
    fn multiplier_rests_only_on_target(xs in prop::collection::vec(0.5f64..1.5, 10), w in 0.5f64..2.0) {
        let mut state = LagrangeState::new(w, 10, 0.05);
        for &x in &xs {
            state.record(x);
        }
        let mean = xs.iter().sum::<f64>() / 10.0;
        let next = update_w(&state, mean, 10).unwrap();
        prop_assert!((next.w - w).abs() <= 1e-15);
        let off = update_w(&state, mean + 0.1, 10).unwrap();
        prop_assert!(off.w > w);
    }
}
