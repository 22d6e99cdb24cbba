mod common;

use parisian_dividends::scale::{expected_position_transform, one_sided_down_transform, ScaleEval};
use parisian_dividends::RiskModel;

fn cl() -> RiskModel {
    RiskModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap()
}

#[test]
fn cl_zero_rate_scale_function_closed_form() {
    // W(x) = (1 − (λ/(cξ)) e^{−(ξ−λ/c)x}) / (c − λ/ξ)
    let (c, lam, xi) = (2.0, 1.0, 1.0);
    let w = ScaleEval::new(cl(), 0.0).unwrap();
    for i in 0..=40 {
        let x = 0.25 * i as f64;
        let exact = (1.0 - lam / (c * xi) * (-(xi - lam / c) * x).exp()) / (c - lam / xi);
        assert!((w.W(x) - exact).abs() < 1e-13, "x={x}");
    }
}

#[test]
fn bm_scale_function_closed_form() {
    let (c, s, q) = (1.0f64, 1.3f64, 0.05f64);
    let w = ScaleEval::new(RiskModel::brownian(c, s).unwrap(), q).unwrap();
    let omega = c / (s * s);
    let delta = (omega * omega + 2.0 * q / (s * s)).sqrt();
    for i in 0..=40 {
        let x = 0.25 * i as f64;
        let exact = (((delta - omega) * x).exp() - (-(delta + omega) * x).exp()) / (s * s * delta);
        assert!((w.W(x) / exact - 1.0).abs() < 1e-12 || x == 0.0, "x={x}");
    }
    assert_eq!(w.W(0.0), 0.0);
}

#[test]
fn two_sided_exit_matches_simulation() {
    for (q, seed) in [(0.0, 11), (0.1, 12)] {
        let w = ScaleEval::new(cl(), q).unwrap();
        let (up, down) = common::cl_two_sided_exit(2.0, 1.0, 1.0, q, 1.0, 2.0, 200_000, seed);
        let eu = w.exit_up(1.0, 2.0).unwrap();
        let ed = w.exit_down(1.0, 2.0).unwrap();
        assert!(
            up.within(eu, 4.0, 0.0),
            "q={q}: up {eu} vs {}±{}",
            up.mean,
            up.se
        );
        assert!(
            down.within(ed, 4.0, 0.0),
            "q={q}: down {ed} vs {}±{}",
            down.mean,
            down.se
        );
    }
}

#[test]
fn position_transform_matches_simulation() {
    let v = expected_position_transform(&cl(), 1.0, 1.0).unwrap();
    let mc = common::cl_position_transform(2.0, 1.0, 1.0, 1.0, 1.0, 200_000, 5);
    assert!(mc.within(v, 4.0, 0.0), "{v} vs {}±{}", mc.mean, mc.se);
}

#[test]
fn bm_down_transform_has_no_undershoot() {
    // Continuous paths hit 0 exactly: H = E_z[e^{−(α+q)τ}]/α regardless of β.
    let (c, s) = (1.0f64, 0.8f64);
    let m = RiskModel::brownian(c, s).unwrap();
    for (q, alpha, z) in [(0.0, 1.0, 0.5), (0.1, 0.3, 2.0), (0.05, 2.0, 1.0)] {
        let p: f64 = alpha + q;
        let omega = c / (s * s);
        let rate = omega + (omega * omega + 2.0 * p / (s * s)).sqrt();
        let exact = (-rate * z).exp() / alpha;
        for beta in [0.0, 0.7, 3.0] {
            let h = one_sided_down_transform(&m, q, alpha, beta, z).unwrap();
            assert!(
                (h - exact).abs() <= 1e-10 * exact.max(1e-300),
                "q={q} α={alpha} β={beta}"
            );
        }
    }
}

#[test]
fn cl_down_transform_at_zero_rate() {
    // With α → small and β = 0 the transform times α approaches ψ(z), the
    // classical ruin probability β e^{−(ξ−λ/c)z}.
    let alpha = 1e-9;
    let z = 1.5;
    let h = one_sided_down_transform(&cl(), 0.0, alpha, 0.0, z).unwrap() * alpha;
    let exact = 0.5 * (-0.5f64 * z).exp();
    assert!((h - exact).abs() < 1e-7, "{h} vs {exact}");
}

#[test]
fn bm_position_transform_matches_resolvent_quadrature() {
    // Killed resolvent density e^{−Φ(α)y} W(z) − W(z − y) on y ≥ 0.
    use parisian_dividends::numerics::{integrate_pieces, Tolerance};
    let (c, s, alpha) = (1.0f64, 1.0f64, 0.5f64);
    let omega = c / (s * s);
    let delta = (omega * omega + 2.0 * alpha / (s * s)).sqrt();
    let w = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (((delta - omega) * x).exp() - (-(delta + omega) * x).exp()) / (s * s * delta)
        }
    };
    let phi = delta - omega;
    let m = RiskModel::brownian(c, s).unwrap();
    for z in [0.0, 0.5, 2.0] {
        let f = |y: f64| y * ((-phi * y).exp() * w(z) - w(z - y));
        let tol = Tolerance::new(1e-12, 1e-12, 100_000).unwrap();
        let exact = integrate_pieces(f, &[0.0, z, z + 80.0], tol).unwrap();
        let v = expected_position_transform(&m, alpha, z).unwrap();
        assert!(
            (v - exact).abs() < 1e-6 * exact.max(1.0),
            "z={z}: {v} vs {exact}"
        );
    }
}
