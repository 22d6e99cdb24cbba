use parisian_dividends::dividend_payment_delay::{value_payment_delay, PaymentDelaySpec};
use parisian_dividends::dividend_ruin_delay::{value_ruin_delay, BarrierPolicy};
use parisian_dividends::parisian_ruin::{parisian_ruin_probability, ParisianSpec};
use parisian_dividends::scale::ScaleEval;
use parisian_dividends::simulate::{
    simulate_parisian_ruin_prob, simulate_payment_delay, simulate_ruin_delay, SimConfig,
    SimEstimate,
};
use parisian_dividends::RiskModel;

fn cl() -> RiskModel {
    RiskModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap()
}

fn bm() -> RiskModel {
    RiskModel::brownian(1.0, 1.0).unwrap()
}

fn cfg(n: u64, seed: u64) -> SimConfig {
    SimConfig {
        n_paths: n,
        seed,
        ..SimConfig::default()
    }
}

fn policy(a: f64) -> BarrierPolicy {
    BarrierPolicy::new(a).unwrap()
}

fn close(est: &SimEstimate, exact: f64, k: f64, rel_margin: f64) -> bool {
    (est.mean - exact).abs()
        <= k * est.std_error + est.censoring_bias_bound + rel_margin * exact.abs()
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let c = SimConfig {
                batch_size: 700,
                ..cfg(5_000, 9)
            };
            let a = simulate_ruin_delay(
                &cl(),
                0.1,
                ParisianSpec::new(1.0).unwrap(),
                policy(2.0),
                1.0,
                &c,
            )
            .unwrap();
            let b = simulate_payment_delay(
                &cl(),
                0.1,
                PaymentDelaySpec::new(1.0).unwrap(),
                policy(2.0),
                1.0,
                &c,
            )
            .unwrap();
            let c2 = SimConfig { n_paths: 500, ..c };
            let d = simulate_ruin_delay(
                &bm(),
                0.1,
                ParisianSpec::new(0.5).unwrap(),
                policy(1.0),
                0.5,
                &c2,
            )
            .unwrap();
            (a, b, d)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn seeds_change_the_estimate() {
    let s = ParisianSpec::new(1.0).unwrap();
    let a = simulate_ruin_delay(&cl(), 0.1, s, policy(2.0), 1.0, &cfg(2_000, 1)).unwrap();
    let b = simulate_ruin_delay(&cl(), 0.1, s, policy(2.0), 1.0, &cfg(2_000, 2)).unwrap();
    assert_ne!(a.mean, b.mean);
}

#[test]
fn distant_barrier_pays_almost_nothing() {
    let (q, x) = (0.5, 1.0);
    let s = ParisianSpec::new(1.0).unwrap();
    let exact = value_ruin_delay(&cl(), q, s, policy(x + 25.0), x).unwrap();
    assert!(exact < 1e-3, "{exact}");
    let est = simulate_ruin_delay(&cl(), q, s, policy(x + 25.0), x, &cfg(50_000, 3)).unwrap();
    assert!(est.mean < 1e-3);
    assert!(close(&est, exact, 4.0, 0.0), "{exact} vs {est:?}");
}

#[test]
fn very_long_payment_delay_pays_nothing() {
    let spec = PaymentDelaySpec::new(1e6).unwrap();
    let est = simulate_payment_delay(&cl(), 0.1, spec, policy(2.0), 1.0, &cfg(10_000, 4)).unwrap();
    assert!(est.mean.abs() < 1e-9, "{est:?}");
}

#[test]
fn no_delay_is_the_classical_barrier_value() {
    // v(x) = W(x)/W′(a) for reflection with classical ruin.
    let (q, a, x) = (0.1, 2.0, 1.0);
    let w = ScaleEval::new(cl(), q).unwrap();
    let exact = w.W(x) / w.w_prime(a);
    let pd = simulate_payment_delay(
        &cl(),
        q,
        PaymentDelaySpec::new(0.0).unwrap(),
        policy(a),
        x,
        &cfg(100_000, 5),
    )
    .unwrap();
    let rd = simulate_ruin_delay(
        &cl(),
        q,
        ParisianSpec::new(0.0).unwrap(),
        policy(a),
        x,
        &cfg(100_000, 6),
    )
    .unwrap();
    assert!(close(&pd, exact, 4.0, 0.0), "{exact} vs {pd:?}");
    assert!(close(&rd, exact, 4.0, 0.0), "{exact} vs {rd:?}");
}

#[test]
fn cl_ruin_from_far_above_is_rare() {
    let est = simulate_parisian_ruin_prob(
        &cl(),
        ParisianSpec::new(1.0).unwrap(),
        30.0,
        &cfg(20_000, 7),
        200.0,
    )
    .unwrap();
    assert!(est.mean < 1e-3, "{est:?}");
}

#[test]
fn euler_bias_shrinks_with_the_step() {
    let s = ParisianSpec::new(1.0).unwrap();
    let exact = parisian_ruin_probability(&bm(), s, 0.5).unwrap();
    for h in [4e-3, 1e-3] {
        let c = SimConfig {
            euler_step: h,
            ..cfg(40_000, 8)
        };
        let est = simulate_parisian_ruin_prob(&bm(), s, 0.5, &c, 200.0).unwrap();
        // Discrete monitoring bias grows like √h.
        let margin = 0.06 * h.sqrt();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_error + est.censoring_bias_bound + margin,
            "h={h}: {exact} vs {est:?}"
        );
    }
}

#[test]
fn bm_payment_delay_matches_closed_form() {
    let (q, a, x) = (0.05, 1.5, 2.0);
    let spec = PaymentDelaySpec::new(1.0).unwrap();
    let exact = value_payment_delay(&bm(), q, spec, a, x).unwrap();
    let est = simulate_payment_delay(&bm(), q, spec, policy(a), x, &cfg(20_000, 10)).unwrap();
    assert!(close(&est, exact, 3.0, 0.02), "{exact} vs {est:?}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = ParisianSpec { zeta: 1.0 };
    assert!(simulate_ruin_delay(&cl(), 0.1, s, policy(1.0), 1.0, &cfg(0, 0)).is_err());
    assert!(simulate_ruin_delay(&cl(), 0.0, s, policy(1.0), 1.0, &cfg(10, 0)).is_err());
    let bad_h = SimConfig {
        euler_step: 0.0,
        ..cfg(10, 0)
    };
    assert!(simulate_ruin_delay(&bm(), 0.1, s, policy(1.0), 1.0, &bad_h).is_err());
    assert!(simulate_parisian_ruin_prob(&cl(), s, 1.0, &cfg(10, 0), 0.0).is_err());
}

#[test]
fn payment_delay_can_raise_a_low_barrier_value() {
    // Below the optimal level the delay works as a buffer against ruin, so
    // v(x; d) need not decrease in d.
    let m = RiskModel::cramer_lundberg(1.0, 0.2, 0.9).unwrap();
    let (q, a, x) = (0.1, 0.5, 0.0);
    let v0 = value_payment_delay(&m, q, PaymentDelaySpec::new(0.0).unwrap(), a, x).unwrap();
    let v1 = value_payment_delay(&m, q, PaymentDelaySpec::new(1.0).unwrap(), a, x).unwrap();
    assert!(v1 > v0 + 0.2, "{v0} {v1}");
    let e0 = simulate_payment_delay(
        &m,
        q,
        PaymentDelaySpec::new(0.0).unwrap(),
        policy(a),
        x,
        &cfg(100_000, 12),
    )
    .unwrap();
    let e1 = simulate_payment_delay(
        &m,
        q,
        PaymentDelaySpec::new(1.0).unwrap(),
        policy(a),
        x,
        &cfg(100_000, 13),
    )
    .unwrap();
    assert!(close(&e0, v0, 4.0, 0.0), "{v0} vs {e0:?}");
    assert!(close(&e1, v1, 4.0, 0.0), "{v1} vs {e1:?}");
}
