//! Closed-form physics of the kicked spin-1/2.
//!
//! `U(λ) = e^{−iμP(e_z)/2} e^{−iλP(n)} e^{−iμP(e_z)/2}` with `P(v) = (1 + σ·v)/2`.
//! Its eigenvalues are `z± = exp{−i[μ + λ ± Δ(λ)]/2}` where the quasienergy
//! gap `Δ` vanishes at the exceptional points `λ± = α ± iβ`.
//!
//! Every multivalued quantity here (`Δ` through cos⁻¹, `Θ` through tan⁻¹) is
//! returned as a principal value unless the caller threads a hint from the
//! previous sample of a path, in which case the branch closest to the hint
//! is chosen.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{projector, projector_phase_exp, CMat2, CVec2, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Distance to an exceptional point below which eigenframes are refused.
pub const EP_PROXIMITY: f64 = 1e-8;

/// Largest accepted change of the mixing angle between consecutive hinted
/// evaluations. Branches of `Θ` are spaced by π/2, so anything approaching
/// π/4 cannot be attributed to a unique branch.
pub const THETA_STEP_LIMIT: f64 = 3.0 * PI / 16.0;

/// Below this `|β|` the model has no complex exceptional points.
pub const BETA_DEGENERATE: f64 = 1e-10;

/// Physical constants of the kicked spin: static field `mu` and the polar
/// and azimuthal angles of the kick axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    mu: f64,
    theta: f64,
    phi: f64,
}

impl ModelParams {
    /// `theta` must lie in `[0, π]`; `phi` is reduced into `[0, 2π)`.
    pub fn new(mu: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(mu.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta = {theta} is outside [0, pi]")));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(ModelParams { mu, theta, phi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Same model with the static field reversed.
    pub fn with_mu(&self, mu: f64) -> Self {
        ModelParams { mu, ..*self }
    }

    /// Kick axis n = (cosφ sinθ, sinφ sinθ, cosθ).
    pub fn kick_axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cp * st, sp * st, ct]
    }

    /// sinθ·sin(μ/2); its sign is the sign of β.
    pub fn coupling(&self) -> f64 {
        self.theta.sin() * (self.mu / 2.0).sin()
    }

    pub fn is_degenerate(&self) -> bool {
        self.theta.sin() * (self.mu / 2.0).sin() == 0.0
    }
}

/// A point of the complexified kick strength.
///
/// The stored value is never reduced, so unwrapped paths such as
/// `λ: 0 → 4π` keep their history. The polar view maps `λ` to
/// `e^{iλ} = e^{−λ_i} e^{iλ_r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexParam(pub C64);

impl ComplexParam {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexParam(C64::new(re, im))
    }

    pub fn real(re: f64) -> Self {
        Self::new(re, 0.0)
    }

    /// Point with polar radius `e^{−λ_i}` and angle `λ_r`.
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(angle, -radius.ln())
    }

    pub fn lambda(&self) -> C64 {
        self.0
    }

    pub fn lambda_r(&self) -> f64 {
        self.0.re
    }

    pub fn lambda_i(&self) -> f64 {
        self.0.im
    }

    pub fn radius(&self) -> f64 {
        (-self.0.im).exp()
    }

    /// `λ_r` reduced into `[0, 2π)` for display.
    pub fn angle(&self) -> f64 {
        let a = self.0.re.rem_euclid(TAU);
        if a >= TAU {
            0.0
        } else {
            a
        }
    }

    /// `e^{iλ}` as a point of the polar plane.
    pub fn polar_point(&self) -> C64 {
        (I * self.0).exp()
    }
}

impl From<f64> for ComplexParam {
    fn from(re: f64) -> Self {
        Self::real(re)
    }
}

impl From<C64> for ComplexParam {
    fn from(z: C64) -> Self {
        ComplexParam(z)
    }
}

/// Spectrum of `U(λ)` at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda: ComplexParam,
    pub z_plus: C64,
    pub z_minus: C64,
    /// Quasienergies with `z = e^{−iγ}`, i.e. `γ± = (μ + λ ± Δ)/2`.
    pub gamma_plus: C64,
    pub gamma_minus: C64,
    pub delta: C64,
    /// Mixing angle `Θ`; NaN exactly at an exceptional point.
    pub theta_mix: C64,
    /// Branch of `Δ`: `Δ = σ·Δ_principal + 4πk` is encoded as `2k` for
    /// `σ = +1` and `2k + 1` for `σ = −1`. Zero is the principal sheet.
    pub sheet: i32,
}

/// The two exceptional points `λ± = α ± iβ` of the fundamental cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpPair {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub alpha: f64,
    pub beta: f64,
}

impl EpPair {
    /// Distance from `lam` to the nearest point of the lattice `λ± + 2πk`.
    pub fn distance(&self, lam: C64) -> f64 {
        let k = ((lam.re - self.alpha) / TAU).round();
        let shift = C64::from(TAU * k);
        (lam - self.lambda_plus - shift)
            .norm()
            .min((lam - self.lambda_minus - shift).norm())
    }
}

/// `α` and `β`, plus the sign `κ` that fixes the trace relation
/// `cos(Δ/2) = κ·cos((λ − α)/2)/cosh(β/2)` for every `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SpectralConstants {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub cosh_half_beta: f64,
}

pub(crate) fn spectral_constants(p: &ModelParams) -> Result<SpectralConstants> {
    let (alpha, beta) = alpha_beta(p)?;
    let cosh_half_beta = (beta / 2.0).cosh();
    // Half-trace of e^{i(μ+λ)/2} U at λ = α equals κ / cosh(β/2).
    let ct = p.theta.cos();
    let (s, c) = (p.mu / 2.0).sin_cos();
    let half_trace = c * (alpha / 2.0).cos() - ct * s * (alpha / 2.0).sin();
    let kappa = if half_trace < 0.0 { -1.0 } else { 1.0 };
    Ok(SpectralConstants { alpha, beta, kappa, cosh_half_beta })
}

/// Floquet operator `U(λ)`; unitary for real `λ`.
pub fn floquet(p: &ModelParams, lam: ComplexParam) -> CMat2 {
    let (ez, en) = half_field_and_kick(p, lam.0);
    ez * en * ez
}

/// `dU/dλ`.
pub fn floquet_derivative(p: &ModelParams, lam: ComplexParam) -> CMat2 {
    let pn = projector(p.kick_axis()).expect("kick axis is a unit vector");
    let (ez, en) = half_field_and_kick(p, lam.0);
    ez * (pn * en).scale(-I) * ez
}

fn half_field_and_kick(p: &ModelParams, lam: C64) -> (CMat2, CMat2) {
    let pz = projector([0.0, 0.0, 1.0]).expect("e_z is a unit vector");
    let pn = projector(p.kick_axis()).expect("kick axis is a unit vector");
    let ez = projector_phase_exp(C64::from(p.mu / 2.0), &pz).expect("P(e_z) is idempotent");
    let en = projector_phase_exp(lam, &pn).expect("P(n) is idempotent");
    (ez, en)
}

/// `α = 2 tan⁻¹[−cosθ tan(μ/2)]` in `(−π, π]` and `β = 2 tanh⁻¹[sinθ sin(μ/2)]`.
pub fn alpha_beta(p: &ModelParams) -> Result<(f64, f64)> {
    let (s, c) = (p.mu / 2.0).sin_cos();
    let x = p.theta.sin() * s;
    if x.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "|sin(theta) sin(mu/2)| = {} >= 1, tanh^-1 diverges",
            x.abs()
        )));
    }
    let ct = p.theta.cos();
    // tan⁻¹(−cosθ·s/c) through atan2 keeps the μ = π limit finite.
    let alpha = if ct == 0.0 {
        0.0
    } else {
        let mut a = 2.0 * (-ct * s * c.signum()).atan2(c.abs());
        if c == 0.0 {
            a = 2.0 * (-ct * s).signum() * FRAC_PI_2;
        }
        if a <= -PI {
            a += TAU;
        }
        a
    };
    Ok((alpha, 2.0 * x.atanh()))
}

/// Exceptional points `α ± iβ`. Fails for `|β| ≤ 1e−10`.
pub fn ep_locations(p: &ModelParams) -> Result<EpPair> {
    let (alpha, beta) = alpha_beta(p)?;
    if beta.abs() <= BETA_DEGENERATE {
        return Err(Error::DegenerateModel { beta });
    }
    let pair = EpPair {
        lambda_plus: C64::new(alpha, beta),
        lambda_minus: C64::new(alpha, -beta),
        alpha,
        beta,
    };
    for lam in [pair.lambda_plus, pair.lambda_minus] {
        // The eigenvalues meet when e^{−iΔ} = 1; for cos(μ/2) < 0 that is
        // the principal value Δ = 2π rather than 0. Δ behaves like a square
        // root here, so rounding in its argument shows up at the √ε level.
        let d = gap(p, lam.into(), None)?;
        if ((C64::new(0.0, -1.0) * d).exp() - 1.0).norm() >= 1e-6 {
            return Err(Error::Domain(format!("gap does not close at {lam}: |delta| = {:e}", d.norm())));
        }
    }
    Ok(pair)
}

fn principal_gap(k: &SpectralConstants, lam: C64) -> C64 {
    let w = ((lam - k.alpha) * 0.5).cos() * (k.kappa / k.cosh_half_beta);
    w.acos() * 2.0
}

fn decode_sheet(sheet: i32) -> (f64, i32) {
    let k = sheet.div_euclid(2);
    let sign = if sheet.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (sign, k)
}

fn encode_sheet(sign: f64, k: i32) -> i32 {
    2 * k + if sign < 0.0 { 1 } else { 0 }
}

fn gap_on_branch(k: &SpectralConstants, lam: C64, hint: Option<C64>) -> (C64, i32) {
    let dp = principal_gap(k, lam);
    let Some(h) = hint else {
        return (dp, 0);
    };
    let k0 = (h.re / (2.0 * TAU)).round() as i32;
    let mut best = (dp, 0, f64::INFINITY);
    for kk in (k0 - 1)..=(k0 + 1) {
        for sign in [1.0, -1.0] {
            let cand = dp * sign + C64::from(2.0 * TAU * kk as f64);
            let d = (cand - h).norm();
            if d < best.2 {
                best = (cand, encode_sheet(sign, kk), d);
            }
        }
    }
    (best.0, best.1)
}

/// Quasienergy gap `Δ(λ) = 2 cos⁻¹[cos((λ−α)/2)/cosh(β/2)]`.
///
/// Without a hint the principal branch is returned. With a hint (the gap at
/// the previous point of a path) the branch `±Δ + 4πk` nearest to it is
/// chosen.
pub fn gap(p: &ModelParams, lam: ComplexParam, hint: Option<C64>) -> Result<C64> {
    let k = spectral_constants(p)?;
    Ok(gap_on_branch(&k, lam.0, hint).0)
}

/// Gap on an explicitly named sheet (see [`SpectralData::sheet`]).
pub fn gap_on_sheet(p: &ModelParams, lam: ComplexParam, sheet: i32) -> Result<C64> {
    let k = spectral_constants(p)?;
    let (sign, kk) = decode_sheet(sheet);
    Ok(principal_gap(&k, lam.0) * sign + C64::from(2.0 * TAU * kk as f64))
}

/// Analytic spectrum from `Δ` and `Θ`, branch-tracked against `hint`.
pub fn analytic_eigenvalues(
    p: &ModelParams,
    lam: ComplexParam,
    hint: Option<&SpectralData>,
) -> Result<SpectralData> {
    let k = spectral_constants(p)?;
    let (delta, sheet) = gap_on_branch(&k, lam.0, hint.map(|h| h.delta));
    let theta_mix = match theta_mix(p, lam, hint.map(|h| h.theta_mix).filter(|t| t.is_finite())) {
        Ok(t) => t,
        Err(Error::UnwrapAmbiguity { .. }) if hint.is_none() => C64::new(f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    let base = C64::from(p.mu) + lam.0;
    let gamma_plus = (base + delta) * 0.5;
    let gamma_minus = (base - delta) * 0.5;
    Ok(SpectralData {
        lambda: lam,
        z_plus: (-I * gamma_plus).exp(),
        z_minus: (-I * gamma_minus).exp(),
        gamma_plus,
        gamma_minus,
        delta,
        theta_mix,
        sheet,
    })
}

/// Numerator and denominator of `tan 2Θ` after clearing the cotangent:
/// `tan 2Θ = sinθ sin(λ/2) / [sin(μ/2) cos(λ/2) + cosθ cos(μ/2) sin(λ/2)]`.
fn mixing_ratio(p: &ModelParams, lam: C64) -> (C64, C64) {
    let (s, c) = (p.mu / 2.0).sin_cos();
    let (sl, cl) = ((lam * 0.5).sin(), (lam * 0.5).cos());
    (sl * p.theta.sin(), cl * s + sl * (p.theta.cos() * c))
}

/// `∂Θ/∂λ = sinθ sin(μ/2) / (4 (N² + D²))`, with `N/D = tan 2Θ` as above.
///
/// The denominator vanishes exactly at the exceptional points, which are the
/// poles of the integrand of the winding integral.
pub fn theta_mix_derivative(p: &ModelParams, lam: ComplexParam) -> C64 {
    let (n, d) = mixing_ratio(p, lam.0);
    C64::from(p.coupling()) / ((n * n + d * d) * 4.0)
}

/// Some value of `2Θ` modulo π.
fn double_theta_mod_pi(n: C64, d: C64) -> C64 {
    if n.norm() == 0.0 {
        C64::from(0.0)
    } else if d.norm() >= n.norm() {
        (n / d).atan()
    } else {
        C64::from(FRAC_PI_2) - (d / n).atan()
    }
}

/// Mixing angle `Θ(λ) = ½ tan⁻¹[sinθ / (sin(μ/2) cot(λ/2) + cosθ cos(μ/2))]`.
///
/// Without a hint, returns the principal value with `Re 2Θ ∈ (−π/2, π/2]`;
/// the exact zeros `λ = 0 mod 2π` return the one-sided limit 0. With a hint
/// the branch `Θ + mπ/2` closest to it is chosen, and a change larger than
/// [`THETA_STEP_LIMIT`] is reported as an unwrap ambiguity.
pub fn theta_mix(p: &ModelParams, lam: ComplexParam, hint: Option<C64>) -> Result<C64> {
    let (n, d) = mixing_ratio(p, lam.0);
    let mut two_theta = double_theta_mod_pi(n, d);
    // Reduce into the principal strip.
    let shift = (two_theta.re / PI).round();
    two_theta -= C64::from(PI * shift);
    if two_theta.re <= -FRAC_PI_2 {
        two_theta += C64::from(PI);
    }
    let principal = two_theta * 0.5;
    if !principal.is_finite() {
        return Err(Error::DefectivePoint {
            lambda: format!("{}", lam.0),
            distance: 0.0,
        });
    }
    let Some(h) = hint else {
        return Ok(principal);
    };
    let m = ((h.re - principal.re) / FRAC_PI_2).round();
    let chosen = principal + C64::from(FRAC_PI_2 * m);
    let step = (chosen - h).norm();
    if step > THETA_STEP_LIMIT {
        return Err(Error::UnwrapAmbiguity { step, limit: THETA_STEP_LIMIT });
    }
    Ok(chosen)
}

/// Right eigenvectors in the reference gauge and their biorthonormal
/// partners (eigenvectors of `U†`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenframe {
    pub theta: C64,
    pub plus: CVec2,
    pub minus: CVec2,
    pub plus_b: CVec2,
    pub minus_b: CVec2,
}

impl Eigenframe {
    /// Frame built from a given (already unwrapped) mixing angle:
    /// `ξ₊ = cosΘ|↑⟩ + e^{iφ} sinΘ|↓⟩`, `ξ₋ = −sinΘ|↑⟩ + e^{iφ} cosΘ|↓⟩`.
    pub fn from_theta(phi: f64, theta: C64) -> Self {
        let e = C64::from_polar(1.0, phi);
        let (s, c) = (theta.sin(), theta.cos());
        Eigenframe {
            theta,
            plus: CVec2::new(c, e * s),
            minus: CVec2::new(-s, e * c),
            plus_b: CVec2::new(c.conj(), e * s.conj()),
            minus_b: CVec2::new(-s.conj(), e * c.conj()),
        }
    }

    pub fn vector(&self, band: Band) -> CVec2 {
        match band {
            Band::Plus => self.plus,
            Band::Minus => self.minus,
        }
    }

    pub fn dual(&self, band: Band) -> CVec2 {
        match band {
            Band::Plus => self.plus_b,
            Band::Minus => self.minus_b,
        }
    }

    /// Matrix with columns `ξ₊`, `ξ₋`.
    pub fn matrix(&self) -> CMat2 {
        CMat2::from_columns(self.plus, self.minus)
    }

    /// `⟨ξ^B_m|ξ_n⟩`, the identity for a valid frame.
    pub fn biorthonormality(&self) -> CMat2 {
        let b = [self.plus_b, self.minus_b];
        let r = [self.plus, self.minus];
        CMat2::new(b[0].inner(&r[0]), b[0].inner(&r[1]), b[1].inner(&r[0]), b[1].inner(&r[1]))
    }
}

/// Floquet band label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    pub fn index(self) -> usize {
        match self {
            Band::Plus => 0,
            Band::Minus => 1,
        }
    }

    pub fn other(self) -> Band {
        match self {
            Band::Plus => Band::Minus,
            Band::Minus => Band::Plus,
        }
    }
}

pub(crate) fn check_ep_distance(p: &ModelParams, lam: C64) -> Result<()> {
    if let Ok(eps) = ep_locations(p) {
        let d = eps.distance(lam);
        if d < EP_PROXIMITY {
            return Err(Error::DefectivePoint { lambda: format!("{lam}"), distance: d });
        }
    }
    Ok(())
}

/// Eigenframe at `lam` with `Θ` unwrapped against `hint`.
pub fn eigenframe(p: &ModelParams, lam: ComplexParam, hint: Option<C64>) -> Result<Eigenframe> {
    check_ep_distance(p, lam.0)?;
    let theta = theta_mix(p, lam, hint)?;
    Ok(Eigenframe::from_theta(p.phi, theta))
}

/// Eigenvalues `⟨ξ^B_±|U|ξ_±⟩` paired with the reference frame, so that
/// `U ξ± = z± ξ±` holds with the labels of the frame rather than of the
/// principal sheet of `Δ`.
pub fn band_eigenvalues(p: &ModelParams, lam: ComplexParam, frame: &Eigenframe) -> [C64; 2] {
    let u = floquet(p, lam);
    [
        frame.plus_b.inner(&u.apply(&frame.plus)),
        frame.minus_b.inner(&u.apply(&frame.minus)),
    ]
}

/// Normal-form axis `l(λ) = (cosφ e_x + sinφ e_y) sin 2Θ + cos 2Θ e_z`.
pub fn normal_form_axis(p: &ModelParams, lam: ComplexParam) -> Result<[C64; 3]> {
    let theta = theta_mix(p, lam, None)?;
    Ok(axis_from_theta(p.phi, theta))
}

pub(crate) fn axis_from_theta(phi: f64, theta: C64) -> [C64; 3] {
    let (s2, c2) = ((theta * 2.0).sin(), (theta * 2.0).cos());
    [s2 * phi.cos(), s2 * phi.sin(), c2]
}

/// Rebuilds `U(λ) = exp{−i[μ + λ + Δ σ·l]/2}` from the normal form, with
/// `Δ` on the branch paired with `l` (the frame-consistent gap).
pub fn normal_form_reconstruction(p: &ModelParams, lam: ComplexParam) -> Result<CMat2> {
    let theta = theta_mix(p, lam, None)?;
    let frame = Eigenframe::from_theta(p.phi, theta);
    let delta = frame_gap(p, lam, &frame);
    let l = axis_from_theta(p.phi, theta);
    let gen = CMat2::identity().scale(C64::from(p.mu) + lam.0) + CMat2::sigma_dot(l).scale(delta);
    Ok(crate::linalg::expm2(&gen.scale(-I * 0.5)))
}

/// Gap `Δ` such that `U ξ₊ = exp{−i(μ + λ + Δ)/2} ξ₊` for the given frame.
pub fn frame_gap(p: &ModelParams, lam: ComplexParam, frame: &Eigenframe) -> C64 {
    let [zp, _] = band_eigenvalues(p, lam, frame);
    let rho = zp * (I * (C64::from(p.mu) + lam.0) * 0.5).exp();
    I * rho.ln() * 2.0
}
