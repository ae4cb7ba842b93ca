//! One function per subcommand. Each writes its primary artifact to the
//! configured output (stdout by default) and a short summary to stdout when
//! the artifact goes to a file, or to stderr otherwise.

use std::f64::consts::TAU;
use std::io::{self, Write};

use kicked_holonomy::adiabatic::{
    adiabatic_convergence_scan, holonomy_fidelity, predicted_final_state, stroboscopic_evolve, SweepSchedule,
};
use kicked_holonomy::holonomy::{eta, holonomy, transported_overlap, ParamPath};
use kicked_holonomy::linalg::frob_dist;
use kicked_holonomy::model::{analytic_eigenvalues, ep_locations, EpPair};
use kicked_holonomy::riemann::{locate_ep, sample_sheet, GridSpec};
use kicked_holonomy::{CMat2, ComplexParam, ModelParams, SpectralData};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{self, num, CsvTable};
use crate::CliError;

fn summary_sink(cfg: &RunConfig) -> Box<dyn Write> {
    if cfg.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "mu": p.mu(), "theta": p.theta(), "phi": p.phi() })
}

fn eps_json(eps: &EpPair) -> Value {
    json!({
        "alpha": eps.alpha,
        "beta": eps.beta,
        "lambda_plus": output::complex(eps.lambda_plus),
        "lambda_minus": output::complex(eps.lambda_minus),
    })
}

fn write_ep_summary(out: &mut dyn Write, eps: &EpPair) -> io::Result<()> {
    writeln!(out, "alpha = {}", num(eps.alpha))?;
    writeln!(out, "beta = {}", num(eps.beta))?;
    writeln!(out, "lambda_plus = {} {}", num(eps.lambda_plus.re), num(eps.lambda_plus.im))?;
    writeln!(out, "lambda_minus = {} {}", num(eps.lambda_minus.re), num(eps.lambda_minus.im))
}

fn loops_or(cfg: &RunConfig, default: u32) -> u32 {
    cfg.loops.unwrap_or(default)
}

/// Real-axis table of `z±`, `γ±` and `Δ`, followed by the EP summary.
pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let eps = ep_locations(p)?;
    let mut rows: Vec<SpectralData> = Vec::with_capacity(cfg.points);
    for k in 0..cfg.points {
        let lam = ComplexParam::real(TAU * k as f64 / (cfg.points - 1) as f64);
        let data = analytic_eigenvalues(p, lam, rows.last())?;
        rows.push(data);
    }
    let mut table = CsvTable::new(
        output::open(cfg.out.as_deref())?,
        &[
            "lambda",
            "re_z_plus",
            "im_z_plus",
            "re_z_minus",
            "im_z_minus",
            "gamma_plus",
            "gamma_minus",
            "delta",
        ],
    )?;
    for d in &rows {
        table.row(&[
            num(d.lambda.lambda_r()),
            num(d.z_plus.re),
            num(d.z_plus.im),
            num(d.z_minus.re),
            num(d.z_minus.im),
            num(d.gamma_plus.re),
            num(d.gamma_minus.re),
            num(d.delta.re),
        ])?;
    }
    table.finish()?;
    write_ep_summary(&mut *summary_sink(cfg), &eps)?;
    Ok(())
}

/// Closed-form EPs against a search on the numerical discriminant.
pub fn eps(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let eps = ep_locations(p)?;
    let upper = locate_ep(p, true)?;
    let lower = locate_ep(p, false)?;
    let distance = eps.distance(upper).max(eps.distance(lower));
    let report = json!({
        "params": params_json(p),
        "closed_form": eps_json(&eps),
        "located_upper": output::complex(upper),
        "located_lower": output::complex(lower),
        "max_distance": distance,
        "tol": cfg.tol,
    });
    output::write_json(output::open(cfg.out.as_deref())?, &report)?;
    if distance > cfg.tol {
        return Err(CliError::Check(format!("located EPs differ from the closed form by {distance:e}")));
    }
    Ok(())
}

/// Holonomy matrix, winding integral and their cross-checks for `C^loops`.
pub fn holonomy_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let loops = loops_or(cfg, 1);
    if loops == 0 {
        return Err(CliError::Config("holonomy needs loops >= 1".into()));
    }
    let path = ParamPath::real_loop(cfg.samples, loops);
    let h = holonomy(&path, p)?;
    let eta_value = eta(&path, p)?;
    let transported = transported_overlap(&path, p)?;
    let transported_residual = frob_dist(&transported, &h.m);
    let gauge_residual = frob_dist(&h.gauge_factor, &CMat2::identity());
    let report = json!({
        "params": params_json(p),
        "loops": loops,
        "samples": cfg.samples,
        "m": output::matrix(&h.m),
        "eta": eta_value,
        "rotation_angle": h.eta,
        "permutation": h.factorization.permutation,
        "phases": [output::complex(h.factorization.phases[0]), output::complex(h.factorization.phases[1])],
        "is_swap": h.factorization.is_swap(),
        "factorized": h.factorization.factorized,
        "ordered_product_residual": h.ordered_product_residual,
        "transported_overlap_residual": transported_residual,
        "gauge_factor_residual": gauge_residual,
        "tol": cfg.tol,
    });
    output::write_json(output::open(cfg.out.as_deref())?, &report)?;
    let worst = h.ordered_product_residual.max(transported_residual).max(gauge_residual);
    if worst > cfg.tol || !h.factorization.factorized {
        return Err(CliError::Check(format!("holonomy cross-checks disagree by {worst:e}")));
    }
    Ok(())
}

/// Polar sheet samples with cut flags, followed by the cut summary.
pub fn riemann(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let mut spec = GridSpec::for_model(p, cfg.grid);
    spec.allow_degenerate = spec.allow_degenerate && cfg.allow_degenerate;
    let grid = sample_sheet(p, spec)?;
    let mut table = CsvTable::new(
        output::open(cfg.out.as_deref())?,
        &["lambda_r", "lambda_i", "radius", "re_delta", "im_delta", "cut_flag"],
    )?;
    for j in 0..spec.n_radius {
        for i in 0..spec.n_angle {
            let node = grid.node(i, j);
            table.row(&[
                num(node.lambda.lambda_r()),
                num(node.lambda.lambda_i()),
                num(node.radius),
                num(node.delta.re),
                num(node.delta.im),
                u8::from(grid.node_flag(i, j)).to_string(),
            ])?;
        }
    }
    table.finish()?;

    let mut out = summary_sink(cfg);
    let curves = grid.cut_curves();
    writeln!(out, "grid = {} x {}", spec.n_angle, spec.n_radius)?;
    writeln!(out, "cut_curves = {}", curves.len())?;
    if let Ok(eps) = ep_locations(p) {
        write_ep_summary(&mut *out, &eps)?;
        for (k, c) in curves.iter().enumerate() {
            let ends: Vec<String> = c
                .endpoint_cells
                .iter()
                .map(|cell| {
                    let d = grid.cells_between(*cell, eps.lambda_plus).min(grid.cells_between(*cell, eps.lambda_minus));
                    format!("({},{}) {:.3} cells from an EP", cell.0, cell.1, d)
                })
                .collect();
            writeln!(
                out,
                "curve {k}: {} edges, unit circle crossings {}, endpoints [{}]",
                c.edges.len(),
                grid.unit_circle_crossings(c),
                ends.join("; ")
            )?;
        }
    }
    Ok(())
}

/// Per-period band populations of a slow sweep plus a JSON report.
pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let loops = loops_or(cfg, 1);
    let mut schedule = SweepSchedule::new(cfg.kicks, loops).with_ramp(cfg.ramp);
    if cfg.allow_degenerate {
        schedule = schedule.allowing_degenerate();
    }
    let initial = predicted_final_state(p, 0, cfg.band)?;
    let r = stroboscopic_evolve(p, &schedule, initial)?;

    let mut table = CsvTable::new(output::open(cfg.out.as_deref())?, &["m", "lambda", "p_plus", "p_minus"])?;
    for s in &r.trace {
        table.row(&[s.m.to_string(), num(s.lambda), num(s.p_plus), num(s.p_minus)])?;
    }
    table.finish()?;

    let predicted = if ep_locations(p).is_ok() { Some(predicted_final_state(p, loops, cfg.band)?) } else { None };
    let shares = predicted.map(|v| holonomy_fidelity(&v, &r.final_state));
    let report = json!({
        "params": params_json(p),
        "kicks": cfg.kicks,
        "loops": loops,
        "ramp": cfg.ramp,
        "initial_band": r.initial_band,
        "final_band": r.final_band,
        "final_state": output::vector(&r.final_state),
        "reference_populations": r.reference_populations,
        "transition_probability": r.transition_probability,
        "geometric_phase": r.geometric_phase,
        "dynamical_phase": r.dynamical_phase,
        "max_excursion": r.max_excursion,
        "max_population_defect": r.max_population_defect,
        "predicted_final_state": predicted.as_ref().map(output::vector),
        "fidelity": shares.map(|s| s.0),
        "defect": shares.map(|s| s.1),
    });
    match &cfg.report {
        Some(path) => output::write_json(output::open(Some(path))?, &report)?,
        None => output::write_json(summary_sink(cfg), &report)?,
    }
    Ok(())
}

/// Holonomy fidelity of the sweep for a list of kick counts.
pub fn scan(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let loops = loops_or(cfg, 1);
    let points = adiabatic_convergence_scan(p, loops, &cfg.kicks_list, cfg.ramp)?;
    let report = json!({
        "params": params_json(p),
        "loops": loops,
        "ramp": cfg.ramp,
        "points": points,
    });
    output::write_json(output::open(cfg.out.as_deref())?, &report)?;
    Ok(())
}
