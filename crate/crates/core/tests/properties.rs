use proptest::prelude::*;

use sgdlab::diagnostics::{
    check_c1_continuity, estimate_expectation, finite_difference_gradient, verify_smoothness, Metric, TimeIndex,
};
use sgdlab::instances::{
    build_sgd_hard_instance, hard_instance_t0, make_amsgrad_oscillator, make_amsgrad_slow_instance,
    make_momentum_lb_quadratic, make_nsgd_noncvg_instance, make_quadratic, slow_amsgrad_constants,
};
use sgdlab::noise::{frechet_symmetric_sample, gamma_function, oracle_moment_check, NoiseOracle, NoiseSpec};
use sgdlab::optimizers::{
    adagrad_norm_step, amsgrad_norm_step, momentum_sgd_step, nsgd_step, nsgdm_next_point, nsgdm_step, run,
    sgd_step, AdagradConfig, AmsgradConfig, MomentumSgdConfig, NsgdConfig, NsgdmConfig, SgdConfig,
};
use sgdlab::theory::{
    adagrad_rate_template, amsgrad_det_lower, amsgrad_det_upper_bound, amsgrad_stoch_lower, nsgd_upper_bound,
    nsgdm_rate_template, sgd_bounded_grad_bound, sgd_regime, sgd_upper_bound, tau_sgd, BoundMetric, BoundRequest,
    Regime, SgdBoundForm,
};
use sgdlab::{vecops, OptimizerState, ProblemInstance, RngStream, Trajectory, TrajectoryRecord};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn certify(inst: &ProblemInstance, seed: u64) {
    let mut rng = RngStream::new(seed, 7);
    let ratio = verify_smoothness(inst, 10_000, &mut rng).unwrap();
    assert!(ratio <= 1.0 + 1e-6, "{}: smoothness ratio {ratio}", inst.id());
    if inst.piecewise().is_some() {
        let c1 = check_c1_continuity(inst, 1e-9).unwrap();
        assert!(c1.pass, "{}: {:?}", inst.id(), c1.jumps);
    }
}

fn fd_matches(inst: &ProblemInstance, seed: u64) {
    let dom = inst.evaluation_domain().unwrap().clone();
    let scale = dom.hi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut rng = RngStream::new(seed, 11);
    for _ in 0..100 {
        let x: Vec<f64> = (0..inst.dimension()).map(|k| dom.lo[k] + (dom.hi[k] - dom.lo[k]) * rng.uniform_open()).collect();
        let g = inst.gradient(&x).unwrap();
        let fd = finite_difference_gradient(inst, &x, 1e-6 * scale).unwrap();
        // relative to the gradient, floored at the gradient scale of the domain
        let denom = vecops::norm(&g).max(1e-3 * inst.smoothness_l() * scale);
        let err = vecops::distance(&g, &fd);
        assert!(err <= 1e-4 * denom, "{} at {x:?}: grad {g:?} vs fd {fd:?}", inst.id());
    }
}

fn check_instance(inst: &ProblemInstance, seed: u64) {
    certify(inst, seed);
    fd_matches(inst, seed);
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn quadratic_is_certified(l in 0.05f64..50.0, delta in 0.01f64..100.0, d in 1usize..5, seed in any::<u64>()) {
        check_instance(&make_quadratic(l, delta, d).unwrap(), seed);
    }

    #[test]
    fn momentum_lb_is_certified(
        l in 0.1f64..10.0, delta in 0.01f64..10.0, eta in 0.01f64..5.0, alpha in 0.0f64..1.0,
        horizon in 1u64..300, seed in any::<u64>(),
    ) {
        let inst = make_momentum_lb_quadratic(l, delta, |t| eta / ((t + 1) as f64).powf(alpha), horizon).unwrap();
        check_instance(&inst, seed);
    }

    #[test]
    fn oscillator_is_certified(l in 0.2f64..5.0, gamma in 0.2f64..5.0, frac in 0.01f64..1.0, seed in any::<u64>()) {
        let v0 = frac * l * gamma / 2.0;
        let delta = gamma * v0 / 4.0 * 1.5;
        check_instance(&make_amsgrad_oscillator(v0, gamma, l, delta).unwrap(), seed);
    }

    #[test]
    fn noncvg_is_certified(
        l in 0.5f64..3.0, sigma in 0.5f64..3.0, eps_frac in 0.05f64..0.6, delta in 0.5f64..3.0,
        gamma_max in 0.1f64..1.0, seed in any::<u64>(),
    ) {
        let built = make_nsgd_noncvg_instance(l, sigma, eps_frac * sigma, delta, gamma_max);
        prop_assume!(built.is_ok());
        check_instance(&built.unwrap().0, seed);
    }

    #[test]
    fn amsgrad_slow_is_certified(
        l in 0.2f64..5.0, delta in 0.1f64..5.0, sigma in 0.2f64..3.0, zeta in 0.55f64..0.95,
        gamma in 0.1f64..3.0, beta2 in 0.0f64..0.9, horizon in 10u64..2000, seed in any::<u64>(),
    ) {
        let (inst, _) = make_amsgrad_slow_instance(l, delta, sigma, zeta, gamma, beta2, horizon).unwrap();
        check_instance(&inst, seed);
    }

    #[test]
    fn hard_instance_is_certified(
        eta in 5.0f64..12.0, l in 0.8f64..1.0, delta in 0.1f64..2.0, extra in 1u64..200, seed in any::<u64>(),
    ) {
        prop_assume!(eta * l >= 5.0);
        let t0 = hard_instance_t0(eta, l);
        let (inst, _) = build_sgd_hard_instance(l, delta, eta, t0 + 1 + extra).unwrap();
        check_instance(&inst, seed);
    }

    #[test]
    fn hard_instance_reproduces_phase_one(
        eta in 5.0f64..12.0, delta in 0.1f64..2.0, extra in 1u64..100,
    ) {
        let l = 1.0;
        let t0 = hard_instance_t0(eta, l);
        let horizon = t0 + 1 + extra;
        let (inst, report) = build_sgd_hard_instance(l, delta, eta, horizon).unwrap();
        let cfg = SgdConfig::new(eta, 0.5).unwrap();
        // phase one simulated directly on the segment-one quadratic
        let mut state = OptimizerState::new(inst.initial_point().to_vec());
        let mut phase_one = vec![state.x[0]];
        for _ in 0..=t0 {
            let g = [l * state.x[0]];
            state = sgd_step(&state, &g, &cfg).unwrap();
            phase_one.push(state.x[0]);
        }
        let traj = run(&inst, &cfg.into(), &NoiseOracle::exact(), t0 + 2, 0).unwrap();
        for (t, want) in phase_one.iter().enumerate() {
            prop_assert_eq!(traj.records[t].x1().to_bits(), want.to_bits(), "t = {}", t);
        }
        prop_assert_eq!(report.x_t0.to_bits(), phase_one[t0 as usize].to_bits());
        prop_assert_eq!(report.x_t0_plus1.to_bits(), phase_one[t0 as usize + 1].to_bits());
        prop_assert!(report.x_t0 > 0.0);
        prop_assert!((report.delta_tilde - l * report.x_t0 * report.x_t0 / 2.0).abs() <= 1e-12 * report.delta_tilde);

        // outermost valley coefficient 1/(4 max{1/l, tail}) <= l/4
        let tail: f64 = (t0 + 1..horizon).map(|t| cfg.stepsize(t)).sum();
        let expected = 1.0 / (4.0 * (1.0 / l).max(tail));
        let (a4, _, _) = inst.piecewise().unwrap().pieces()[0].coefficients();
        prop_assert!((a4 - expected).abs() <= 1e-12 * expected);
        prop_assert!(a4 <= l / 4.0);
    }

    #[test]
    fn amsgrad_v_hat_nondecreasing(
        beta1 in 0.0f64..0.99, beta2 in 0.0f64..=1.0, v0 in 0.01f64..10.0, gamma in 0.01f64..10.0,
        gs in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2), 1..60),
    ) {
        let cfg = AmsgradConfig::new(gamma, 0.5, beta1, beta2, v0).unwrap();
        let mut s = OptimizerState::for_amsgrad(vec![0.3, -0.2], &cfg);
        for g in &gs {
            let next = amsgrad_norm_step(&s, g, &cfg).unwrap();
            prop_assert!(next.v_hat_sq.unwrap() >= s.v_hat_sq.unwrap());
            prop_assert!(next.v_hat_sq.unwrap() >= next.v_sq.unwrap());
            prop_assert_eq!(next.t, s.t + 1);
            s = next;
        }
    }

    #[test]
    fn adagrad_accumulator_monotone(
        eta in 0.01f64..10.0, v0 in 0.01f64..10.0,
        gs in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..60),
    ) {
        let cfg = AdagradConfig::new(eta, v0).unwrap();
        let mut s = OptimizerState::for_adagrad(vec![1.0, 2.0, 3.0], &cfg);
        let mut last_step = f64::INFINITY;
        for g in &gs {
            let next = adagrad_norm_step(&s, g, &cfg).unwrap();
            prop_assert!(next.v_accum_sq.unwrap() >= s.v_accum_sq.unwrap());
            prop_assert!(next.effective_stepsize <= last_step);
            prop_assert_eq!(next.t, s.t + 1);
            last_step = next.effective_stepsize;
            s = next;
        }
    }

    #[test]
    fn nsgd_step_length_is_gamma(
        gamma in 1e-3f64..10.0, alpha in 0.0f64..=1.0,
        x in prop::collection::vec(-10.0f64..10.0, 3),
        gs in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..40),
    ) {
        let cfg = NsgdConfig::new(gamma, alpha).unwrap();
        let mut s = OptimizerState::new(x);
        for g in &gs {
            prop_assume!(vecops::norm(g) > 1e-6);
            let next = nsgd_step(&s, g, &cfg).unwrap();
            let len = vecops::distance(&next.x, &s.x);
            let want = cfg.stepsize(s.t);
            prop_assert!((len - want).abs() <= 1e-12 * want * 4.0, "len {} want {}", len, want);
            s = next;
        }
    }

    #[test]
    fn nsgdm_momentum_stays_in_hull(
        gamma in 0.01f64..2.0, g0 in -10.0f64..10.0,
        samples in prop::collection::vec(-10.0f64..10.0, 1..60),
    ) {
        prop_assume!(g0.abs() > 1e-3);
        let cfg = NsgdmConfig::new(gamma).unwrap();
        let mut s = OptimizerState::for_nsgdm(vec![0.5], vec![g0]);
        let (mut lo, mut hi) = (g0, g0);
        for &c in &samples {
            let (x_next, _) = nsgdm_next_point(&s, &cfg).unwrap();
            s = nsgdm_step(&s, &[c], &x_next, &cfg).unwrap();
            lo = lo.min(c);
            hi = hi.max(c);
            let m = s.m.as_ref().unwrap()[0];
            let slack = 1e-12 * lo.abs().max(hi.abs());
            prop_assert!(m >= lo - slack && m <= hi + slack, "m {} outside [{}, {}]", m, lo, hi);
        }
    }

    #[test]
    fn nsgdm_initial_direction_forgotten(
        gamma in 0.01f64..2.0,
        g0a in prop::collection::vec(-10.0f64..10.0, 2),
        scale in 0.01f64..100.0,
        g0b in prop::collection::vec(-10.0f64..10.0, 2),
        samples in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 1..40),
    ) {
        prop_assume!(vecops::norm(&g0a) > 1e-3 && vecops::norm(&g0b) > 1e-3);
        let cfg = NsgdmConfig::new(gamma).unwrap();
        let drive = |g0: Vec<f64>| {
            let mut s = OptimizerState::for_nsgdm(vec![0.5, -0.5], g0);
            let mut xs = Vec::new();
            let mut ms = Vec::new();
            for c in &samples {
                let (x_next, _) = nsgdm_next_point(&s, &cfg).unwrap();
                s = nsgdm_step(&s, c, &x_next, &cfg).unwrap();
                xs.push(s.x.clone());
                ms.push(s.m.clone().unwrap());
            }
            (xs, ms)
        };
        // same direction, different magnitude: identical iterates from x1 on
        let (xa, ma) = drive(g0a.clone());
        let (xs, ms) = drive(g0a.iter().map(|v| v * scale).collect());
        prop_assert_eq!(&ma, &ms);
        for (a, b) in xa.iter().zip(&xs) {
            prop_assert!(vecops::distance(a, b) <= 1e-12 * (1.0 + vecops::norm(a)));
        }
        // any direction: the momentum after the first sample no longer carries g0
        let (_, mb) = drive(g0b);
        prop_assert_eq!(&ma, &mb);
    }

    #[test]
    fn sgd_matches_closed_form(eta in 0.05f64..10.0, l in 0.05f64..5.0, alpha in 0.0f64..0.9, x0 in 0.1f64..10.0) {
        let cfg = SgdConfig::new(eta, alpha).unwrap();
        let factors: Vec<f64> = (1..=40).map(|k| (eta * l / (k as f64).powf(alpha) - 1.0).abs()).collect();
        prop_assume!(factors.iter().all(|f| *f > 1e-3));
        let mut s = OptimizerState::new(vec![x0]);
        let mut prod = x0;
        for f in &factors {
            s = sgd_step(&s, &[l * s.x[0]], &cfg).unwrap();
            prod *= f;
            prop_assume!(prod < 1e250);
            prop_assert!((s.x[0].abs() - prod).abs() <= 1e-10 * prod, "t {} got {} want {}", s.t, s.x[0], prod);
        }
    }

    #[test]
    fn momentum_without_beta_is_sgd(
        eta in 0.01f64..10.0, alpha in 0.0f64..0.99,
        gs in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2), 1..60),
    ) {
        let sgd = SgdConfig::new(eta, alpha).unwrap();
        let mom = MomentumSgdConfig::new(0.0, eta, alpha).unwrap();
        let mut a = OptimizerState::new(vec![1.0, -1.0]);
        let mut b = OptimizerState::for_momentum_sgd(vec![1.0, -1.0], &mom);
        for g in &gs {
            a = sgd_step(&a, g, &sgd).unwrap();
            b = momentum_sgd_step(&b, g, &mom).unwrap();
            prop_assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn gamma_recurrence(x in 0.5f64..4.0) {
        let lhs = gamma_function(x + 1.0).unwrap();
        let rhs = x * gamma_function(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn sgd_regime_matches_tau(eta in 0.01f64..10.0, l in 0.01f64..10.0, alpha in 0.05f64..0.95) {
        let req = BoundRequest::new(100.0).eta(eta).l(l).alpha(alpha).sigma(1.0).delta(1.0);
        let tau = tau_sgd(eta, l, alpha).unwrap();
        let regime = sgd_regime(&req).unwrap();
        prop_assert_eq!(regime.tau, tau);
        prop_assert_eq!(regime.regime == Regime::SmallStepsize, tau == 0);
        prop_assert_eq!(tau == 0, eta * l <= 1.0);
        // the small-stepsize branch does not grow with τ: both forms agree there
        if tau == 0 && alpha == 0.5 {
            let main = sgd_upper_bound(&req, SgdBoundForm::MainText).unwrap();
            let app = sgd_upper_bound(&req, SgdBoundForm::AppendixGeneral).unwrap();
            prop_assert_eq!(main, app);
        }
    }

    #[test]
    fn appendix_form_is_sharper(el in 5.0f64..=8.0, l in 0.2f64..5.0, delta in 0.01f64..10.0) {
        for horizon in [1e2, 1e4] {
            let req = BoundRequest::new(horizon).eta(el / l).l(l).sigma(0.0).delta(delta).alpha(0.5);
            let main = sgd_upper_bound(&req, SgdBoundForm::MainText).unwrap();
            let app = sgd_upper_bound(&req, SgdBoundForm::AppendixGeneral).unwrap();
            prop_assert!(app <= main, "appendix {} > main {} at T={}", app, main, horizon);
        }
    }

    #[test]
    fn bounds_nonincreasing_in_horizon(
        eta in 0.05f64..3.0, l in 0.1f64..3.0, sigma in 0.0f64..2.0, delta in 0.1f64..5.0, v0 in 0.05f64..2.0,
    ) {
        let horizons = [1e2, 1e3, 1e4, 1e5, 1e6];
        let base = |t: f64| BoundRequest::new(t).eta(eta).gamma(eta).l(l).sigma(sigma).delta(delta).v0(v0).g(1.0);
        type Eval = Box<dyn Fn(&BoundRequest) -> Option<f64>>;
        let evals: Vec<(&str, Eval)> = vec![
            ("sgd_main", Box::new(|r| sgd_upper_bound(&r.alpha(0.5), SgdBoundForm::MainText).ok())),
            ("sgd_appendix", Box::new(|r| sgd_upper_bound(&r.alpha(0.5), SgdBoundForm::AppendixGeneral).ok())),
            ("sgd_appendix_a03", Box::new(|r| sgd_upper_bound(&r.alpha(0.3), SgdBoundForm::AppendixGeneral).ok())),
            ("sgd_appendix_a07", Box::new(|r| sgd_upper_bound(&r.alpha(0.7), SgdBoundForm::AppendixGeneral).ok())),
            ("bounded_grad", Box::new(|r| sgd_bounded_grad_bound(r).ok())),
            ("nsgd_upper", Box::new(|r| nsgd_upper_bound(r).ok())),
            ("nsgdm_template", Box::new(|r| nsgdm_rate_template(r).ok())),
            ("adagrad_template", Box::new(|r| adagrad_rate_template(r).ok())),
            ("amsgrad_upper", Box::new(|r| amsgrad_det_upper_bound(&r.alpha(0.5)).ok().map(|b| b.value))),
            ("amsgrad_upper_a07", Box::new(|r| amsgrad_det_upper_bound(&r.alpha(0.7)).ok().map(|b| b.value))),
            ("amsgrad_det_lower", Box::new(|r| amsgrad_det_lower(&r.alpha(0.5)).ok())),
            ("amsgrad_stoch_lower", Box::new(|r| amsgrad_stoch_lower(&r.zeta(0.75).beta2(0.0).sigma(1.0)).ok())),
        ];
        for (name, f) in &evals {
            let vals: Vec<Option<f64>> = horizons.iter().map(|&t| f(&base(t))).collect();
            if vals.iter().any(|v| v.is_none()) {
                continue;
            }
            let vals: Vec<f64> = vals.into_iter().flatten().collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} increases: {:?}", name, vals);
            }
        }
    }

    #[test]
    fn expectation_ignores_order(
        values in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 5), 2..20),
        shuffle_seed in any::<u64>(),
    ) {
        let trajs: Vec<Trajectory> = values
            .iter()
            .enumerate()
            .map(|(i, vs)| Trajectory {
                instance_id: "x".into(),
                optimizer_id: "y".into(),
                seed: i as u64 * 7 + 3,
                records: vs
                    .iter()
                    .enumerate()
                    .map(|(t, v)| TrajectoryRecord {
                        t: t as u64,
                        f_value: v * v,
                        grad_norm: v.abs(),
                        stoch_grad_norm: v.abs(),
                        effective_stepsize: 1.0,
                        iterate: [*v, 0.0, 0.0, 0.0],
                    })
                    .collect(),
            })
            .collect();
        let mut shuffled = trajs.clone();
        let mut rng = RngStream::new(shuffle_seed, 0);
        for i in (1..shuffled.len()).rev() {
            let j = (rng.uniform_open() * (i + 1) as f64) as usize;
            shuffled.swap(i, j.min(i));
        }
        for at in [TimeIndex::At(0), TimeIndex::At(4), TimeIndex::AverageOverT] {
            for metric in [Metric::GradNorm, Metric::GradNormSq, Metric::FValue] {
                let a = estimate_expectation(&trajs, metric, at).unwrap();
                let b = estimate_expectation(&shuffled, metric, at).unwrap();
                prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
                prop_assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            }
        }
    }
}

#[test]
fn amsgrad_lower_below_upper() {
    let (l, delta, horizon) = (1.0, 1.0, 1e6);
    for gamma in [1.0, 2.0, 4.0] {
        for v0 in [0.05, 0.1, 0.25] {
            for alpha in [0.25, 0.5, 0.75] {
                let req = BoundRequest::new(horizon).gamma(gamma).l(l).delta(delta).v0(v0).alpha(alpha);
                let lower = amsgrad_det_lower(&req).unwrap();
                let upper = amsgrad_det_upper_bound(&req).unwrap();
                // min ≤ mean, and min² ≤ mean of squares
                let scale = match upper.metric {
                    BoundMetric::MeanGradNorm => lower,
                    BoundMetric::MeanSquaredGradNorm => lower * lower,
                    m => panic!("unexpected metric {m:?}"),
                };
                assert!(scale <= upper.value, "gamma={gamma} v0={v0} alpha={alpha}: {scale} > {}", upper.value);
            }
        }
    }
}

#[test]
fn oracles_are_unbiased() {
    let n = 100_000;
    let quad = make_quadratic(2.0, 1.0, 3).unwrap();
    let x = [0.4, -0.3, 1.2];
    let (noncvg, noncvg_oracle) = make_nsgd_noncvg_instance(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
    let w = noncvg_oracle.spec.region_halfwidth.unwrap();
    let (slow, slow_oracle) = make_amsgrad_slow_instance(1.0, 1.0, 1.0, 0.75, 1.0, 0.0, 1000).unwrap();
    let cases: Vec<(&str, NoiseSpec, &ProblemInstance, Vec<f64>)> = vec![
        ("zero", NoiseSpec::zero(), &quad, x.to_vec()),
        ("gaussian", NoiseSpec::gaussian(1.5), &quad, x.to_vec()),
        ("multiplicative_inside", noncvg_oracle.spec.clone(), &noncvg, vec![0.5 * w]),
        ("multiplicative_outside", noncvg_oracle.spec.clone(), &noncvg, vec![1.5 * w]),
        ("frechet", slow_oracle.spec.clone(), &slow, vec![0.7, 0.0]),
    ];
    for (i, (name, spec, inst, x)) in cases.into_iter().enumerate() {
        let mut rng = RngStream::new(2024, i as u64);
        let m = oracle_moment_check(&spec, inst, &x, n, &mut rng).unwrap();
        assert!(m.bias_norm <= 5.0 * m.bias_stderr, "{name}: bias {} vs stderr {}", m.bias_norm, m.bias_stderr);
    }
}

#[test]
fn noncvg_oracle_moments_inside_region() {
    let sigma = 1.0;
    let (inst, oracle) = make_nsgd_noncvg_instance(1.0, sigma, 0.5, 1.0, 1.0).unwrap();
    let w = oracle.spec.region_halfwidth.unwrap();
    for (i, frac) in [0.1, 0.5, 0.9, -0.7].into_iter().enumerate() {
        let x = [frac * w];
        let mut rng = RngStream::new(99, i as u64);
        let m = oracle_moment_check(&oracle.spec, &inst, &x, 100_000, &mut rng).unwrap();
        assert!(m.bias_norm <= 4.0 * m.bias_stderr, "x = {x:?}: bias {} vs stderr {}", m.bias_norm, m.bias_stderr);
        assert!(m.variance_estimate <= sigma * sigma, "x = {x:?}: variance {}", m.variance_estimate);
    }
}

#[test]
fn frechet_running_max_frequency() {
    let (zeta, sigma, horizon, streams) = (0.75, 1.0, 10_000u64, 200u64);
    let k = slow_amsgrad_constants(sigma, zeta).unwrap();
    let mut hits = 0;
    for s in 0..streams {
        let mut rng = RngStream::new(s, 0);
        let mut running = 0.0_f64;
        let mut ok = true;
        for t in 0..horizon {
            running = running.max(frechet_symmetric_sample(zeta, k.scale_s, &mut rng).unwrap().abs());
            if running <= k.c * ((t + 1) as f64).powf(zeta - 0.5) {
                ok = false;
                break;
            }
        }
        hits += ok as u64;
    }
    let frac = hits as f64 / streams as f64;
    assert!(frac >= 0.45, "fraction {frac}");
}

#[test]
fn quadratic_gd_descends_in_small_regime() {
    let inst = make_quadratic(2.0, 3.0, 2).unwrap();
    let traj = run(&inst, &SgdConfig::new(0.5, 0.0).unwrap().into(), &NoiseOracle::exact(), 200, 0).unwrap();
    for w in traj.records.windows(2) {
        assert!(w[1].f_value <= w[0].f_value);
    }
}
