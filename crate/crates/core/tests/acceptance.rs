//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kicked_holonomy::adiabatic::{stroboscopic_evolve, SweepSchedule};
use kicked_holonomy::holonomy::{connection, dtheta_finite_difference, eta, holonomy, ParamPath};
use kicked_holonomy::linalg::{eig2, frob_dist};
use kicked_holonomy::model::{
    analytic_eigenvalues, ep_locations, floquet, gap, theta_mix_derivative, Band,
};
use kicked_holonomy::riemann::{continue_eigenvalues, locate_ep, sample_sheet, GridSpec, Pairing};
use kicked_holonomy::{CMat2, CVec2, ComplexParam, ModelParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 10_000;

fn default_params() -> ModelParams {
    ModelParams::new(FRAC_PI_2, FRAC_PI_2, 0.0).unwrap()
}

fn exchange() -> CMat2 {
    CMat2::from_real(0.0, -1.0, 1.0, 0.0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn timed<F: FnOnce() -> Outcome>(limit: Option<Duration>, f: F) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{}; {:.3} s", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took >= limit {
            out.pass = false;
            out.detail = format!("{} (limit {} s)", out.detail, limit.as_secs_f64());
        }
    }
    out
}

fn exchange_holonomy() -> Outcome {
    let p = default_params();
    let path = ParamPath::real_loop(SAMPLES, 1);
    let plus = frob_dist(&holonomy(&path, &p).unwrap().m, &exchange());
    let minus = frob_dist(&holonomy(&path, &p.with_mu(-p.mu())).unwrap().m, &(-exchange()));
    Outcome::new(plus < 1e-6 && minus < 1e-6, format!("|M - R| = {plus:.2e}, |M(-mu) + R| = {minus:.2e}"))
}

fn repeated_loops() -> Outcome {
    let p = default_params();
    let m2 = holonomy(&ParamPath::real_loop(SAMPLES, 2), &p).unwrap().m;
    let m4 = holonomy(&ParamPath::real_loop(SAMPLES, 4), &p).unwrap().m;
    let d2 = frob_dist(&m2, &(-CMat2::identity()));
    let d4 = frob_dist(&m4, &CMat2::identity());
    Outcome::new(d2 < 1e-6 && d4 < 1e-6, format!("|M(C^2) + I| = {d2:.2e}, |M(C^4) - I| = {d4:.2e}"))
}

fn winding_integral() -> Outcome {
    let p = default_params();
    let beta = ep_locations(&p).unwrap().beta;
    let e1 = eta(&ParamPath::real_loop(SAMPLES, 1), &p).unwrap();
    let e2 = eta(&ParamPath::real_loop(SAMPLES, 2), &p).unwrap();
    let d1 = (e1 - beta.signum() * FRAC_PI_2).abs();
    let d2 = (e2 - 2.0 * e1).abs();
    Outcome::new(d1 < 1e-6 && d2 < 1e-6, format!("eta(C) = {e1:.12}, |eta(C^2) - 2 eta(C)| = {d2:.2e}"))
}

fn ep_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let p = ModelParams::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)).unwrap();
        let Ok(eps) = ep_locations(&p) else { continue };
        if eps.beta.abs() <= 0.1 || eps.beta.abs() > 5.0 {
            continue;
        }
        for upper in [true, false] {
            let found = match locate_ep(&p, upper) {
                Ok(z) => z,
                Err(_) => return Outcome::new(false, format!("Newton failed at {p:?}")),
            };
            let d = eps.distance(found);
            worst = worst.max(d);
        }
        checked += 1;
    }
    Outcome::new(worst < 1e-8, format!("50 parameter sets, worst distance {worst:.2e}"))
}

fn square_root_branch_point() -> Outcome {
    let p = default_params();
    let ep = ep_locations(&p).unwrap().lambda_plus;
    let n = 31;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..n {
        let eps = 10f64.powf(-5.0 + 3.0 * k as f64 / (n - 1) as f64);
        let d = gap(&p, ComplexParam(ep + eps), None).unwrap();
        xs.push(eps.ln());
        ys.push(d.norm().ln());
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Outcome::new((slope - 0.5).abs() <= 0.005, format!("slope {slope:.6}"))
}

fn eigenvalue_holonomy() -> Outcome {
    let p = default_params();
    let once = continue_eigenvalues(&p, &ParamPath::real_loop(SAMPLES, 1)).unwrap();
    let twice = continue_eigenvalues(&p, &ParamPath::real_loop(SAMPLES, 2)).unwrap();
    let crossed = once.crossed_mismatch();
    let direct = twice.direct_mismatch();
    let pass = once.pairing == Pairing::Swap && crossed < 1e-9 && twice.pairing == Pairing::Identity && direct < 1e-9;
    Outcome::new(
        pass,
        format!("C: {:?} ({crossed:.2e}), C^2: {:?} ({direct:.2e})", once.pairing, twice.pairing),
    )
}

fn set_mismatch(a: [C64; 2], b: [C64; 2]) -> f64 {
    let direct = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    direct.min(crossed)
}

fn spectrum_agreement() -> Outcome {
    let p = default_params();
    let eps = ep_locations(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let (mut worst_real, mut worst_complex, mut worst_unitary): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let lam = ComplexParam::real(rng.gen_range(-TAU..TAU));
        let u = floquet(&p, lam);
        let a = analytic_eigenvalues(&p, lam, None).unwrap();
        worst_real = worst_real.max(set_mismatch([a.z_plus, a.z_minus], eig2(&u).values));
        worst_unitary = worst_unitary.max(frob_dist(&(u.adjoint() * u), &CMat2::identity()));
    }
    let mut taken = 0;
    while taken < 100 {
        let lam = ComplexParam::new(rng.gen_range(-TAU..TAU), rng.gen_range(-3.0..3.0));
        if eps.distance(lam.0) < 0.1 {
            continue;
        }
        let a = analytic_eigenvalues(&p, lam, None).unwrap();
        let n = eig2(&floquet(&p, lam)).values;
        worst_complex = worst_complex.max(set_mismatch([a.z_plus, a.z_minus], n));
        taken += 1;
    }
    let pass = worst_real < 1e-11 && worst_complex < 1e-11 && worst_unitary < 1e-12;
    Outcome::new(
        pass,
        format!("real {worst_real:.2e}, complex {worst_complex:.2e}, unitarity {worst_unitary:.2e}"),
    )
}

fn adiabatic_dynamics() -> Outcome {
    let p = default_params();
    let up = CVec2::up();
    let r1 = stroboscopic_evolve(&p, &SweepSchedule::new(10_000, 1), up).unwrap();
    let r1d = stroboscopic_evolve(&p, &SweepSchedule::new(20_000, 1), up).unwrap();
    let r2 = stroboscopic_evolve(&p, &SweepSchedule::new(20_000, 2), up).unwrap();
    let start = Instant::now();
    let big = stroboscopic_evolve(&p, &SweepSchedule::new(100_000, 1), up).unwrap();
    let big_time = start.elapsed().as_secs_f64();

    let exchanged = r1.final_band == Band::Minus && r1.reference_populations[1] > 0.99;
    let reduced = r1d.max_excursion < r1.max_excursion;
    let phase_off = (r2.geometric_phase.abs() - PI).abs();
    let returned = r2.final_band == Band::Plus && r2.reference_populations[0] > 0.99 && phase_off < 0.05;
    let converged = big.reference_populations[1] > 0.999;
    let pass = exchanged && reduced && returned && converged && big_time < 10.0;
    Outcome::new(
        pass,
        format!(
            "P(-) = {:.12} (T=1e5: {:.12}), excursion {:.2e} -> {:.2e} on doubling (final defect {:.1e} -> {:.1e}), \
             C^2 phase {:.6}, T=1e5 sweep {big_time:.2} s",
            r1.reference_populations[1],
            big.reference_populations[1],
            r1.max_excursion,
            r1d.max_excursion,
            r1.transition_probability,
            r1d.transition_probability,
            r2.geometric_phase,
        ),
    )
}

fn sheet_structure() -> Outcome {
    let p = default_params();
    let eps = ep_locations(&p).unwrap();
    let g = sample_sheet(&p, GridSpec::for_model(&p, 128)).unwrap();
    let curves = g.cut_curves();
    if curves.len() != 2 {
        return Outcome::new(false, format!("{} cut curves", curves.len()));
    }
    let near = |lam: C64| {
        curves
            .iter()
            .position(|c| c.endpoint_cells.iter().any(|cell| g.cells_between(*cell, lam) <= 2.0))
    };
    let (Some(ip), Some(im)) = (near(eps.lambda_plus), near(eps.lambda_minus)) else {
        return Outcome::new(false, "a cut does not end near an EP");
    };
    let crossings = g.unit_circle_crossings(&curves[ip]);
    let pass = ip != im && crossings % 2 == 1;
    Outcome::new(pass, format!("2 curves, unit circle crosses the lambda+ cut {crossings} time(s)"))
}

fn transport_gauge() -> Outcome {
    let p = default_params();
    let path = ParamPath::real_loop(SAMPLES, 1);
    let (mut worst_diag, mut worst_fd): (f64, f64) = (0.0, 0.0);
    let mut hint = None;
    for s in path.samples() {
        let c = connection(&p, *s, hint).unwrap();
        hint = Some(c.theta);
        worst_diag = worst_diag.max(c.a_diag.frob_norm());
    }
    for s in path.samples().iter().step_by(10) {
        let exact = theta_mix_derivative(&p, *s);
        let fd = dtheta_finite_difference(&p, *s, 1e-5).unwrap();
        worst_fd = worst_fd.max((exact - fd).norm());
    }
    Outcome::new(
        worst_diag < 1e-10 && worst_fd < 1e-8,
        format!("max |A^D| = {worst_diag:.2e}, max |dTheta - FD| = {worst_fd:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 10] = [
        ("exchange holonomy M(C)", Some(Duration::from_secs(1)), exchange_holonomy),
        ("repeated loops M(C^2), M(C^4)", None, repeated_loops),
        ("winding integral eta", None, winding_integral),
        ("EP cross-validation", Some(Duration::from_secs(5)), ep_cross_validation),
        ("square-root branch point", None, square_root_branch_point),
        ("eigenvalue holonomy", None, eigenvalue_holonomy),
        ("analytic vs numeric spectrum", None, spectrum_agreement),
        ("adiabatic dynamics", None, adiabatic_dynamics),
        ("sheet structure", None, sheet_structure),
        ("parallel-transport gauge", None, transport_gauge),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let out = timed(*limit, check);
        if !out.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {}", if out.pass { "PASS" } else { "FAIL" }, k + 1, out.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
