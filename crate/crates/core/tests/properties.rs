use std::f64::consts::{PI, TAU};

use kicked_holonomy::holonomy::{dtheta_finite_difference, eta, holonomy, ParamPath};
use kicked_holonomy::linalg::{eig2, expm2, frob_dist, projector, projector_phase_exp};
use kicked_holonomy::model::{
    alpha_beta, analytic_eigenvalues, ep_locations, floquet, theta_mix_derivative,
};
use kicked_holonomy::riemann::refine_ep;
use kicked_holonomy::{CMat2, ComplexParam, ModelParams, C64};
use proptest::prelude::*;

/// `exp(X)` by scaling and squaring of a 30-term Taylor series.
fn taylor_expm(x: &CMat2) -> CMat2 {
    let norm = x.frob_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let y = x.scale(C64::from(0.5f64.powi(squarings as i32)));
    let mut term = CMat2::identity();
    let mut sum = CMat2::identity();
    for k in 1..30 {
        term = (term * y).scale(C64::from(1.0 / k as f64));
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    (0.0..PI, 0.0..TAU).prop_map(|(t, f)| [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()])
}

fn params() -> impl Strategy<Value = ModelParams> {
    (-6.0..6.0f64, 0.0..PI, 0.0..TAU).prop_map(|(m, t, f)| ModelParams::new(m, t, f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projector_exponential_matches_series(v in unit_vector(), re in -8.0..8.0f64, im in -3.0..3.0f64) {
        let p = projector(v).unwrap();
        let c = C64::new(re, im);
        let closed = projector_phase_exp(c, &p).unwrap();
        let series = taylor_expm(&p.scale(C64::new(0.0, -1.0) * c));
        prop_assert!(frob_dist(&closed, &series) < 1e-12 * closed.frob_norm().max(1.0));
    }

    #[test]
    fn general_exponential_matches_series(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64,
        e in -2.0..2.0f64, f in -2.0..2.0f64, g in -2.0..2.0f64, h in -2.0..2.0f64,
    ) {
        let x = CMat2::new(C64::new(a, b), C64::new(c, d), C64::new(e, f), C64::new(g, h));
        let exact = expm2(&x);
        prop_assert!(frob_dist(&exact, &taylor_expm(&x)) < 1e-11 * exact.frob_norm().max(1.0));
    }

    #[test]
    fn floquet_is_unitary_on_real_axis(p in params(), lam in -20.0..20.0f64) {
        let u = floquet(&p, ComplexParam::real(lam));
        prop_assert!(frob_dist(&(u.adjoint() * u), &CMat2::identity()) < 1e-12);
    }

    #[test]
    fn floquet_is_two_pi_periodic(p in params(), re in -10.0..10.0f64, im in -2.0..2.0f64) {
        let a = floquet(&p, ComplexParam::new(re, im));
        let b = floquet(&p, ComplexParam::new(re + TAU, im));
        prop_assert!(frob_dist(&a, &b) < 1e-12 * a.frob_norm().max(1.0));
    }

    #[test]
    fn determinant_is_a_pure_phase(p in params(), re in -10.0..10.0f64, im in -2.0..2.0f64) {
        // det U = e^{−iμ} e^{−iλ}.
        let lam = C64::new(re, im);
        let det = floquet(&p, ComplexParam(lam)).det();
        let expected = (C64::new(0.0, -1.0) * (lam + p.mu())).exp();
        prop_assert!((det - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn eigenpairs_have_small_residuals(p in params(), re in -10.0..10.0f64, im in -1.5..1.5f64) {
        let u = floquet(&p, ComplexParam::new(re, im));
        let e = eig2(&u);
        if !e.defective {
            for k in 0..2 {
                let r = u.apply(&e.vectors[k]) - e.vectors[k].scale(e.values[k]);
                prop_assert!(r.norm() < 1e-11 * u.frob_norm());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_spectrum_matches_numeric(p in params(), re in -10.0..10.0f64, im in -1.5..1.5f64) {
        let lam = ComplexParam::new(re, im);
        if let Ok(eps) = ep_locations(&p) {
            prop_assume!(eps.distance(lam.0) > 1e-3);
        }
        let a = analytic_eigenvalues(&p, lam, None).unwrap();
        let n = eig2(&floquet(&p, lam)).values;
        let direct = (a.z_plus - n[0]).norm().max((a.z_minus - n[1]).norm());
        let crossed = (a.z_plus - n[1]).norm().max((a.z_minus - n[0]).norm());
        prop_assert!(direct.min(crossed) < 1e-10, "{} {}", direct, crossed);
    }

    #[test]
    fn mixing_angle_derivative_matches_differences(p in params(), lam in 0.1..6.2f64) {
        prop_assume!(p.theta() > 0.05 && p.theta() < PI - 0.05);
        let (_, beta) = alpha_beta(&p).unwrap();
        prop_assume!(beta.abs() > 0.3);
        let at = ComplexParam::real(lam);
        let exact = theta_mix_derivative(&p, at);
        let fd = dtheta_finite_difference(&p, at, 1e-5).unwrap();
        prop_assert!((exact - fd).norm() < 1e-8 * exact.norm().max(1.0), "{} {}", exact, fd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn refined_eps_land_on_closed_form(p in params(), dr in -0.05..0.05f64, di in -0.05..0.05f64) {
        let Ok(eps) = ep_locations(&p) else { return Ok(()); };
        prop_assume!(eps.beta.abs() > 0.1);
        let found = refine_ep(&p, eps.lambda_plus + C64::new(dr, di)).unwrap();
        prop_assert!(eps.distance(found) < 1e-8, "{} vs {}", found, eps.lambda_plus);
    }

    #[test]
    fn winding_integral_is_a_quarter_turn_per_loop(p in params(), loops in 1u32..4) {
        let (_, beta) = alpha_beta(&p).unwrap();
        prop_assume!(beta.abs() > 0.05);
        let e = eta(&ParamPath::real_loop(4_000, loops), &p).unwrap();
        let expected = beta.signum() * PI / 2.0 * loops as f64;
        prop_assert!((e - expected).abs() < 1e-6, "{} vs {}", e, expected);
    }

    #[test]
    fn holonomy_of_double_loop_is_square(p in params()) {
        let (_, beta) = alpha_beta(&p).unwrap();
        prop_assume!(beta.abs() > 0.05);
        let once = holonomy(&ParamPath::real_loop(2_000, 1), &p).unwrap().m;
        let twice = holonomy(&ParamPath::real_loop(2_000, 2), &p).unwrap().m;
        prop_assert!(frob_dist(&twice, &(once * once)) < 1e-9);
    }
}

#[test]
fn winding_integral_converges_with_samples() {
    let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
    let (_, beta) = alpha_beta(&p).unwrap();
    let target = beta.signum() * PI / 2.0;
    let errs: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| (eta(&ParamPath::real_loop(n, 1), &p).unwrap() - target).abs())
        .collect();
    assert!(errs[3] < 1e-6, "{errs:?}");
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] || w[1] < 1e-13, "{errs:?}");
    }
}
