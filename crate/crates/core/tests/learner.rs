use exploratory_mv::analytic::{optimal_value, rho, MarketModel, ProblemSpec};
use exploratory_mv::baseline::ContinuousEmv;
use exploratory_mv::learner::{
    cost, policy_from_params, sample_episode, sync_dependent, train, train_with, update_w,
    value_from_params, Checkpoint, Context, DiscreteEmv, HyperParams, InitParams, LagrangeState,
    Params, PolicyParams, PrefixMode, Trainer, Transition, ValueParams,
};
use exploratory_mv::market::{ReturnModel, RngStream};
use rand::Rng;

const R_F: f64 = 1.0 + 0.02 / 12.0;

fn normal_market(sigma: f64) -> (MarketModel, ReturnModel) {
    let m = MarketModel::new(0.3 / 12.0, sigma / 12f64.sqrt(), R_F).unwrap();
    let model = ReturnModel::normal(m.a(), m.sigma()).unwrap();
    (m, model)
}

fn hyper(episodes: usize) -> HyperParams {
    HyperParams {
        episodes,
        ..HyperParams::study_defaults()
    }
}

#[test]
fn episodes_replay_through_the_wealth_equation() {
    let (_, mut model) = normal_market(0.2);
    let spec = hyper(1).spec;
    let ctx = Context::new(&spec, R_F, 1.3);
    let mut p = Params {
        value: ValueParams {
            theta1: 0.0,
            theta2: 0.0,
            theta3: 0.0,
            theta4: 0.0,
        },
        policy: PolicyParams {
            phi1: 1.0,
            phi2: 0.01,
        },
    };
    sync_dependent(&mut p, &ctx);
    let mut rng = RngStream::new(4, 0);
    for _ in 0..200 {
        let ep = sample_episode(&DiscreteEmv, &p, &ctx, &mut model, spec.x0, &mut rng).unwrap();
        assert_eq!(ep.wealth[0], spec.x0);
        for t in 0..spec.horizon {
            let expect = R_F * ep.wealth[t] + ep.returns[t] * ep.allocations[t];
            assert!((ep.wealth[t + 1] - expect).abs() <= 1e-12);
        }
    }
}

#[test]
fn riskless_limit_grows_at_the_risk_free_rate() {
    let (_, mut model) = normal_market(0.2);
    let spec = hyper(1).spec;
    let ctx = Context::new(&spec, R_F, 1.3);
    let phi = PolicyParams {
        phi1: -20.0,
        phi2: -R_F.ln(),
    };
    let pol = policy_from_params(&phi, 0, 0.7, 1.3, 2.0, R_F, 3).unwrap();
    assert_eq!(pol.mean, 0.0);
    let p = Params {
        value: ValueParams {
            theta1: R_F * R_F,
            theta2: 0.0,
            theta3: 0.0,
            theta4: 0.0,
        },
        policy: phi,
    };
    let ep = sample_episode(
        &DiscreteEmv,
        &p,
        &ctx,
        &mut model,
        1.0,
        &mut RngStream::new(1, 0),
    )
    .unwrap();
    assert!((ep.terminal() - R_F.powi(3)).abs() < 1e-9);
}

#[test]
fn matching_coefficients_reproduce_the_optimal_quadratic() {
    let (m, _) = normal_market(0.2);
    let spec = ProblemSpec::new(3, 1.0, 1.1, 2.0).unwrap();
    let w = 1.3;
    let theta = ValueParams {
        theta1: m.contraction(),
        theta2: 0.0,
        theta3: 0.0,
        theta4: 0.0,
    };
    for t in 0..=3 {
        let y = 0.8 - rho(t, 3, R_F) * w;
        let quad = value_from_params(&theta, t, 0.8, w, 3, R_F);
        let at_center = optimal_value(t, rho(t, 3, R_F) * w, w, &m, &spec).unwrap();
        let full = optimal_value(t, 0.8, w, &m, &spec).unwrap();
        assert!((full - at_center - quad).abs() < 1e-12);
        assert!((quad - m.contraction().powi(3 - t as i32) * y * y).abs() < 1e-15);
    }
}

#[test]
fn cost_matches_a_direct_sum() {
    let mut rng = RngStream::new(77, 0);
    for _ in 0..50 {
        let ctx = Context {
            horizon: 4,
            r_f: R_F,
            lambda: rng.random_range(0.5..3.0),
            w: 1.4,
            b: 1.1,
        };
        let mut p = Params {
            value: ValueParams {
                theta1: 0.0,
                theta2: rng.random_range(-1.0..1.0),
                theta3: rng.random_range(-1.0..1.0),
                theta4: 0.0,
            },
            policy: PolicyParams {
                phi1: rng.random_range(0.0..2.0),
                phi2: rng.random_range(0.01..0.4),
            },
        };
        sync_dependent(&mut p, &ctx);
        let xs: Vec<f64> = (0..=4).map(|_| rng.random_range(0.5..1.5)).collect();
        let d: Vec<Transition> = (0..4)
            .map(|t| Transition {
                t,
                x: xs[t],
                x_next: xs[t + 1],
            })
            .collect();
        let direct: f64 = d
            .iter()
            .map(|tr| {
                let j = |t: usize, x: f64| value_from_params(&p.value, t, x, ctx.w, 4, R_F);
                let entropy = p.policy.phi1 + p.policy.phi2 * (4 - tr.t - 1) as f64;
                (j(tr.t + 1, tr.x_next) - j(tr.t, tr.x) - ctx.lambda * entropy).powi(2)
            })
            .sum::<f64>()
            / 2.0;
        let c = cost(&d, &p, &ctx);
        assert!((c - direct).abs() <= 1e-10 * direct.max(1.0));
    }
    let ctx = Context {
        horizon: 3,
        r_f: R_F,
        lambda: 2.0,
        w: 1.1,
        b: 1.1,
    };
    let p = Params {
        value: ValueParams {
            theta1: 1.0,
            theta2: 0.0,
            theta3: 0.0,
            theta4: 0.0,
        },
        policy: PolicyParams {
            phi1: 1.0,
            phi2: 0.01,
        },
    };
    assert_eq!(cost(&[], &p, &ctx), 0.0);
}

#[test]
fn multiplier_update_arithmetic() {
    let mut s = LagrangeState::new(1.5, 10, 0.05);
    for _ in 0..10 {
        s.record(2.1);
    }
    let next = update_w(&s, 1.1, 10).unwrap();
    assert!((next.w - 1.45).abs() < 1e-15);

    let mut fixed = LagrangeState::new(1.5, 4, 0.05);
    for x in [1.0, 1.2, 1.05, 1.15] {
        fixed.record(x);
    }
    assert!((update_w(&fixed, 1.1, 4).unwrap().w - 1.5).abs() < 1e-15);

    let short = LagrangeState::new(1.5, 10, 0.05);
    assert_eq!(update_w(&short, 1.1, 10).unwrap_err().kind(), "contract");
}

#[test]
fn zero_episodes_return_the_initialization() {
    let (_, mut model) = normal_market(0.2);
    let out = train(
        &hyper(0),
        R_F,
        &mut model,
        InitParams::default(),
        RngStream::new(1, 0),
    )
    .unwrap();
    assert!(out.log.is_empty());
    assert_eq!(out.w, 1.1);
    assert_eq!(
        out.params.policy,
        PolicyParams {
            phi1: 1.0,
            phi2: 0.01
        }
    );
    assert_eq!(out.params.value.theta2, 0.0);
    assert_eq!(out.params.value.theta4, 0.0);
    assert!((out.params.value.theta1 - (-0.02f64).exp()).abs() < 1e-15);
}

#[test]
fn infeasible_start_is_rejected() {
    let (_, mut model) = normal_market(0.2);
    let init = InitParams {
        phi2: -0.5,
        ..InitParams::default()
    };
    let err = train(&hyper(10), R_F, &mut model, init, RngStream::new(1, 0)).unwrap_err();
    assert_eq!(err.kind(), "infeasible_policy");
}

#[test]
fn training_is_deterministic() {
    let run = |seed| {
        let (_, mut model) = normal_market(0.2);
        train(
            &hyper(300),
            R_F,
            &mut model,
            InitParams::default(),
            RngStream::new(seed, 0),
        )
        .unwrap()
        .log
        .iter()
        .map(|r| r.to_json_line())
        .collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn resuming_from_a_checkpoint_continues_the_same_run() {
    let h = hyper(200);
    let (_, mut model) = normal_market(0.2);
    let whole = train(
        &h,
        R_F,
        &mut model,
        InitParams::default(),
        RngStream::new(9, 1),
    )
    .unwrap();

    let (_, mut model) = normal_market(0.2);
    let mut first = Trainer::new(
        &DiscreteEmv,
        h,
        R_F,
        InitParams::default(),
        RngStream::new(9, 1),
    )
    .unwrap();
    let mut log = first.run(&mut model, 105).unwrap();
    let text = first.checkpoint().to_text();
    let ck = Checkpoint::from_text(&text).unwrap();
    assert_eq!(ck, first.checkpoint());
    let mut second = Trainer::from_checkpoint(&DiscreteEmv, h, R_F, &ck).unwrap();
    log.extend(second.run(&mut model, 95).unwrap());

    assert_eq!(log, whole.log);
    assert_eq!(second.checkpoint(), whole.checkpoint);
    assert!(Trainer::from_checkpoint(&ContinuousEmv::default(), h, R_F, &ck).is_err());
}

#[test]
fn every_update_keeps_feasibility_and_the_terminal_condition() {
    for prefix in [PrefixMode::Growing, PrefixMode::FullEpisode] {
        let (_, mut model) = normal_market(0.3);
        let h = HyperParams {
            prefix,
            ..hyper(2000)
        };
        let mut tr = Trainer::new(
            &DiscreteEmv,
            h,
            R_F,
            InitParams::default(),
            RngStream::new(3, 0),
        )
        .unwrap();
        for _ in 0..2000 {
            let ep = tr.rollout(&mut model).unwrap();
            tr.learn(&ep).unwrap();
            let p = tr.params();
            let w = tr.w();
            assert!(R_F * R_F - (-2.0 * p.policy.phi2).exp() >= 0.0);
            for x in [0.2, 1.0, 1.7] {
                let v = value_from_params(&p.value, 3, x, w, 3, R_F);
                assert!((v - ((x - w).powi(2) - (w - 1.1).powi(2))).abs() < 1e-12);
            }
        }
        assert!(tr.projections() > 0);
    }
}

#[test]
fn discrete_learner_approaches_the_analytic_contraction() {
    let (m, _) = normal_market(0.2);
    let target = m.contraction();
    let mut theta1 = Vec::new();
    let mut tails = Vec::new();
    for seed in 1..=3 {
        let (_, mut model) = normal_market(0.2);
        let out = train(
            &hyper(15000),
            R_F,
            &mut model,
            InitParams::default(),
            RngStream::new(seed, 0),
        )
        .unwrap();
        theta1.push(out.params.value.theta1);
        let tail = &out.log[out.log.len() - 2000..];
        tails.push(tail.iter().map(|r| r.x_terminal).sum::<f64>() / 2000.0);
    }
    theta1.sort_by(f64::total_cmp);
    tails.sort_by(f64::total_cmp);
    assert!(
        (theta1[1] / target - 1.0).abs() <= 0.25,
        "theta1 {theta1:?} target {target}"
    );
    assert!((tails[1] - 1.1).abs() <= 0.02, "tail means {tails:?}");
}

#[test]
fn baseline_trains_on_the_same_loop() {
    let (_, mut model) = normal_market(0.1);
    let out = train_with(
        &ContinuousEmv::default(),
        &hyper(500),
        R_F,
        &mut model,
        InitParams::default(),
        RngStream::new(2, 0),
    )
    .unwrap();
    assert_eq!(out.checkpoint.algorithm, "emv-continuous");
    assert_eq!(out.log.len(), 500);
    assert!(out.params.policy.phi2 > 0.0);
}

#[test]
fn large_steps_are_reported_as_divergence() {
    let (_, mut model) = normal_market(0.3);
    let h = HyperParams {
        eta_theta: 50.0,
        eta_phi: 50.0,
        ..hyper(2000)
    };
    let err = train(
        &h,
        R_F,
        &mut model,
        InitParams::default(),
        RngStream::new(1, 0),
    )
    .unwrap_err();
    assert_eq!(err.kind(), "diverged");
}
