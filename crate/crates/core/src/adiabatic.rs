//! Slow stroboscopic sweeps of the kick strength.
//!
//! One Floquet step is applied per period with `λ` held fixed during the
//! period and updated in between, `ψ_{m+1} = U(λ_m) ψ_m`. In the adiabatic
//! limit the state follows the continuously tracked eigenvector, so after
//! one loop it ends on the other band of the reference frame and after two
//! loops it is back on its own band with an extra sign.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::{holonomy, ParamPath, DEFAULT_SAMPLES};
use crate::linalg::{CVec2, C64};
use crate::model::{
    alpha_beta, band_eigenvalues, floquet, theta_mix, Band, ComplexParam, Eigenframe, ModelParams,
    BETA_DEGENERATE,
};

/// Shape of the ramp `λ(s)`, `s = m/T ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ramp {
    #[default]
    Linear,
    /// `sin²(πs/2)`: zero slope at both ends.
    SineSquared,
}

impl Ramp {
    /// Fraction of the sweep completed at `s`.
    pub fn fraction(self, s: f64) -> f64 {
        match self {
            Ramp::Linear => s,
            Ramp::SineSquared => {
                let x = (FRAC_PI_2 * s).sin();
                x * x
            }
        }
    }
}

/// `T` kicks taking `λ` from 0 to `2π·loops`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub kicks: usize,
    pub loops: u32,
    pub ramp: Ramp,
    /// Allow models without complex EPs (e.g. `θ = 0`), where no band
    /// exchange is expected.
    pub allow_degenerate: bool,
}

impl SweepSchedule {
    pub fn new(kicks: usize, loops: u32) -> Self {
        SweepSchedule { kicks, loops, ramp: Ramp::Linear, allow_degenerate: false }
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }

    pub fn allowing_degenerate(mut self) -> Self {
        self.allow_degenerate = true;
        self
    }

    /// Kick strength used during period `m`; `lambda(T) = 2π·loops`.
    pub fn lambda(&self, m: usize) -> f64 {
        if m >= self.kicks {
            return TAU * self.loops as f64;
        }
        TAU * self.loops as f64 * self.ramp.fraction(m as f64 / self.kicks as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.kicks == 0 {
            return Err(Error::InvalidArgument("a sweep needs at least one kick".into()));
        }
        Ok(())
    }
}

/// Band populations of `ψ_m` against the eigenframe at `λ_m`, labelled
/// periodically in `λ`: within each loop the frame follows `λ`
/// continuously, and at every multiple of 2π it is the frame at `λ = 0`.
/// A state that follows its band adiabatically therefore shows up in the
/// other band's column after each completed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub m: usize,
    pub lambda: f64,
    pub p_plus: f64,
    pub p_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub final_state: CVec2,
    /// Band the initial state was prepared in.
    pub initial_band: Band,
    /// Rows `m = 0..=T`; row `m` is the state before kick `m`.
    pub trace: Vec<SweepSample>,
    /// Band of the reference frame at `λ = 0` that the state ends closest to.
    pub final_band: Band,
    /// `|⟨ξ_m(0)|ψ_T⟩|²` for both reference bands.
    pub reference_populations: [f64; 2],
    /// Population left in the band opposite to the tracked one.
    pub transition_probability: f64,
    /// `arg ⟨ξ_final(0)|ψ_T⟩` with the dynamical phase removed, in `(−π, π]`.
    pub geometric_phase: f64,
    /// Accumulated dynamical phase `Σ arg z_m` along the tracked band.
    pub dynamical_phase: f64,
    /// Largest deviation of `p₊ + p₋` from 1 over the trace.
    pub max_population_defect: f64,
    /// Largest population outside the tracked band over the trace: the
    /// nonadiabatic excursion during the sweep.
    pub max_excursion: f64,
}

/// Continuously tracked mixing angle along a real sweep.
///
/// A single unwrap step cannot tell `Θ` from `Θ ± π/2`, so steps in `λ` are
/// kept short compared with the distance `|β|` of the EPs from the real axis,
/// where `∂Θ/∂λ` peaks, and subdivided further if a step is still rejected.
struct ThetaTracker {
    p: ModelParams,
    lambda: f64,
    theta: C64,
    max_step: f64,
}

impl ThetaTracker {
    fn new(p: &ModelParams, lambda: f64) -> Result<Self> {
        let theta = theta_mix(p, ComplexParam::real(lambda), None)?;
        let (_, beta) = alpha_beta(p)?;
        let max_step = (0.5 * beta.abs()).clamp(1e-6, 0.05);
        Ok(ThetaTracker { p: *p, lambda, theta, max_step })
    }

    fn advance(&mut self, lambda: f64) -> Result<C64> {
        let mut pieces = ((lambda - self.lambda).abs() / self.max_step).ceil().max(1.0) as usize;
        let limit = pieces.saturating_mul(1 << 12);
        loop {
            match self.walk(lambda, pieces) {
                Ok(theta) => {
                    self.lambda = lambda;
                    self.theta = theta;
                    return Ok(theta);
                }
                Err(Error::UnwrapAmbiguity { .. }) if pieces < limit => pieces *= 4,
                Err(e) => return Err(e),
            }
        }
    }

    fn walk(&self, lambda: f64, pieces: usize) -> Result<C64> {
        let mut theta = self.theta;
        for k in 1..=pieces {
            let l = self.lambda + (lambda - self.lambda) * k as f64 / pieces as f64;
            theta = theta_mix(&self.p, ComplexParam::real(l), Some(theta))?;
        }
        Ok(theta)
    }
}

/// Frame multiplied by per-band phases `e^{iχ±}`.
fn regauged(frame: &Eigenframe, phases: [f64; 2]) -> Eigenframe {
    let (a, b) = (C64::from_polar(1.0, phases[0]), C64::from_polar(1.0, phases[1]));
    Eigenframe {
        theta: frame.theta,
        plus: frame.plus.scale(a),
        minus: frame.minus.scale(b),
        plus_b: frame.plus_b.scale(a),
        minus_b: frame.minus_b.scale(b),
    }
}

fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Evolve `initial` through the sweep and compare with the tracked frame.
///
/// `initial` must be normalized and is assigned to whichever band of the
/// frame at `λ = 0` it overlaps most.
pub fn stroboscopic_evolve(p: &ModelParams, schedule: &SweepSchedule, initial: CVec2) -> Result<SweepResult> {
    stroboscopic_evolve_in_gauge(p, schedule, initial, |_, _| [0.0, 0.0])
}

/// As [`stroboscopic_evolve`], with the frame at period `m` (kick strength
/// `λ`) multiplied by the band phases `gauge(m, λ)`. Populations and the
/// transition probability do not depend on this choice.
pub fn stroboscopic_evolve_in_gauge<G>(
    p: &ModelParams,
    schedule: &SweepSchedule,
    initial: CVec2,
    gauge: G,
) -> Result<SweepResult>
where
    G: Fn(usize, f64) -> [f64; 2],
{
    schedule.validate()?;
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("initial state must be normalized, |ψ| = {norm}")));
    }
    let (_, beta) = alpha_beta(p)?;
    if beta.abs() <= BETA_DEGENERATE && !schedule.allow_degenerate {
        return Err(Error::DegenerateModel { beta });
    }

    let mut tracker = ThetaTracker::new(p, 0.0)?;
    let reference = Eigenframe::from_theta(p.phi(), tracker.theta);
    // Change of the tracked Θ over one loop; subtracting it once per
    // completed loop gives the periodically labelled frame.
    let loop_shift = {
        let mut once = ThetaTracker::new(p, 0.0)?;
        once.advance(TAU)? - tracker.theta
    };
    let overlaps0 = [reference.plus.inner(&initial), reference.minus.inner(&initial)];
    let initial_band = if overlaps0[0].norm_sqr() >= overlaps0[1].norm_sqr() { Band::Plus } else { Band::Minus };

    let mut psi = initial;
    let mut trace = Vec::with_capacity(schedule.kicks + 1);
    let mut dynamical_phase = 0.0;
    let mut max_defect: f64 = 0.0;
    let mut max_excursion: f64 = 0.0;
    let mut frame = reference;
    for m in 0..=schedule.kicks {
        let lambda = schedule.lambda(m);
        let theta = tracker.advance(lambda)?;
        frame = Eigenframe::from_theta(p.phi(), theta);
        let away = frame.vector(initial_band.other()).inner(&psi).norm_sqr();
        max_excursion = max_excursion.max(away / psi.norm_sqr());
        let completed = (lambda / TAU).floor();
        let periodic = Eigenframe::from_theta(p.phi(), theta - loop_shift * completed);
        let shown = regauged(&periodic, gauge(m, lambda));
        let p_plus = shown.plus.inner(&psi).norm_sqr();
        let p_minus = shown.minus.inner(&psi).norm_sqr();
        max_defect = max_defect.max((p_plus + p_minus - 1.0).abs());
        trace.push(SweepSample { m, lambda, p_plus, p_minus });
        if m == schedule.kicks {
            break;
        }
        let lam = ComplexParam::real(lambda);
        dynamical_phase += band_eigenvalues(p, lam, &frame)[initial_band.index()].arg();
        psi = floquet(p, lam).apply(&psi);
    }

    let tracked_other = frame.vector(initial_band.other());
    let transition_probability = tracked_other.inner(&psi).norm_sqr();
    let ends = [reference.plus.inner(&psi), reference.minus.inner(&psi)];
    let reference_populations = [ends[0].norm_sqr(), ends[1].norm_sqr()];
    let final_band = if reference_populations[0] >= reference_populations[1] { Band::Plus } else { Band::Minus };
    let geometric_phase = wrap_phase(ends[final_band.index()].arg() - dynamical_phase);

    Ok(SweepResult {
        final_state: psi,
        initial_band,
        trace,
        final_band,
        reference_populations,
        transition_probability,
        geometric_phase,
        dynamical_phase,
        max_population_defect: max_defect,
        max_excursion,
    })
}

/// One row of a convergence scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub kicks: usize,
    /// See [`holonomy_fidelity`].
    pub fidelity: f64,
    /// `1 − fidelity`, evaluated independently.
    pub defect: f64,
    /// [`SweepResult::max_excursion`] of the run.
    pub max_excursion: f64,
}

/// Final state predicted by the holonomy `M(C^loops)` for a state starting
/// on `band` of the reference frame.
pub fn predicted_final_state(p: &ModelParams, loops: u32, band: Band) -> Result<CVec2> {
    let reference = Eigenframe::from_theta(p.phi(), theta_mix(p, ComplexParam::real(0.0), None)?);
    if loops == 0 {
        return Ok(reference.vector(band));
    }
    let m = holonomy(&ParamPath::real_loop(DEFAULT_SAMPLES, loops), p)?.m;
    let j = band.index();
    Ok(reference.plus.scale(m[(0, j)]) + reference.minus.scale(m[(1, j)]))
}

/// Shares of `state` parallel and orthogonal to `predicted`,
/// `(|⟨p|ψ⟩|², |⟨p⊥|ψ⟩|²) / (|⟨p|ψ⟩|² + |⟨p⊥|ψ⟩|²)`. Both shares are
/// evaluated directly, so the fidelity never exceeds 1 and the defect stays
/// accurate far below `1e−16`.
pub fn holonomy_fidelity(predicted: &CVec2, state: &CVec2) -> (f64, f64) {
    let along = predicted.inner(state).norm_sqr();
    let across = predicted.orthogonal().inner(state).norm_sqr();
    let total = along + across;
    (along / total, across / total)
}

/// Holonomy fidelity for each kick count, starting from `ξ₊(0)`.
pub fn adiabatic_convergence_scan(
    p: &ModelParams,
    loops: u32,
    kicks: &[usize],
    ramp: Ramp,
) -> Result<Vec<ScanPoint>> {
    if kicks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("kick counts must be strictly ascending".into()));
    }
    let predicted = predicted_final_state(p, loops, Band::Plus)?;
    let initial = Eigenframe::from_theta(p.phi(), theta_mix(p, ComplexParam::real(0.0), None)?).plus;
    kicks
        .par_iter()
        .map(|&t| {
            let schedule = SweepSchedule::new(t, loops).with_ramp(ramp);
            let r = stroboscopic_evolve(p, &schedule, initial)?;
            let (fidelity, defect) = holonomy_fidelity(&predicted, &r.final_state);
            Ok(ScanPoint {
                kicks: t,
                fidelity,
                defect,
                max_excursion: r.max_excursion,
            })
        })
        .collect()
}
