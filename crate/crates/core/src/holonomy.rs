//! Gauge connection, winding integral and holonomy matrix.
//!
//! With the reference frame `ξ₊ = (cosΘ, e^{iφ} sinΘ)`, `ξ₋ = (−sinΘ, e^{iφ} cosΘ)`
//! the connection `A_mn = i⟨ξ^B_m|∂_λ ξ_n⟩` is off-diagonal,
//! `A = [[0, −i], [i, 0]]·∂Θ/∂λ`, so the frame is already parallel
//! transported and the holonomy matrix is a rotation by
//! `η(C) = ∮ ∂Θ/∂λ dλ`.
//!
//! Two independent constructions of `M(C)` live here: the ordered
//! exponential of the connection ([`holonomy`]) and explicit stepwise
//! transport of numerically computed eigenvectors ([`transported_overlap`]).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig2, expm2, frob_dist, CMat2, CVec2, C64};
use crate::model::{
    check_ep_distance, ep_locations, floquet, theta_mix, theta_mix_derivative, ComplexParam,
    Eigenframe, ModelParams,
};

const I: C64 = C64::new(0.0, 1.0);

/// Default number of samples per 2π of real-axis path.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Entries of `M` further than this from a permutation-times-phase
/// pattern leave the matrix unfactorized.
pub const FACTORIZATION_TOL: f64 = 1e-6;

/// A discretized path in the complex kick strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPath {
    samples: Vec<ComplexParam>,
    closed: bool,
    traversals: u32,
}

impl ParamPath {
    /// Builds a path from explicit samples. A closed path must end where it
    /// started, up to a multiple of 2π in `λ_r`.
    pub fn from_samples(samples: Vec<ComplexParam>, closed: bool, traversals: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidPath("a path needs at least one sample".into()));
        }
        if samples.iter().any(|s| !s.0.is_finite()) {
            return Err(Error::InvalidPath("path samples must be finite".into()));
        }
        if closed {
            let (a, b) = (samples[0].0, samples[samples.len() - 1].0);
            let turns = (b.re - a.re) / TAU;
            if (turns - turns.round()).abs() > 1e-12 || a.im != b.im {
                return Err(Error::InvalidPath(format!("path is not closed: starts at {a}, ends at {b}")));
            }
        }
        Ok(ParamPath { samples, closed, traversals })
    }

    /// The physical loop `λ: 0 → 2π` on the real axis, traversed
    /// `traversals` times with `samples_per_loop` steps per traversal.
    pub fn real_loop(samples_per_loop: usize, traversals: u32) -> Self {
        let n = samples_per_loop.max(1) * traversals as usize;
        let step = TAU / samples_per_loop.max(1) as f64;
        let samples = (0..=n).map(|k| ComplexParam::real(step * k as f64)).collect();
        ParamPath { samples, closed: true, traversals }
    }

    /// Counter-clockwise circle in the `λ` plane.
    pub fn circle(center: C64, radius: f64, samples_per_loop: usize, traversals: u32) -> Self {
        let n = samples_per_loop.max(3) * traversals as usize;
        let step = TAU / samples_per_loop.max(3) as f64;
        let mut samples: Vec<ComplexParam> = (0..n)
            .map(|k| (center + C64::from_polar(radius, step * k as f64)).into())
            .collect();
        samples.push(samples[0]);
        ParamPath { samples, closed: true, traversals }
    }

    /// Goes from `start` to `end` in `steps` steps and comes straight back.
    pub fn retraced(start: C64, end: C64, steps: usize) -> Self {
        let steps = steps.max(1);
        let out = (0..=steps).map(|k| start + (end - start) * (k as f64 / steps as f64));
        let back = (0..steps).rev().map(|k| start + (end - start) * (k as f64 / steps as f64));
        let samples = out.chain(back).map(ComplexParam::from).collect();
        ParamPath { samples, closed: true, traversals: 1 }
    }

    pub fn samples(&self) -> &[ComplexParam] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn traversals(&self) -> u32 {
        self.traversals
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.samples.windows(2).map(|w| (w[1].0 - w[0].0).norm()).collect()
    }

    pub fn arc_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Net number of 2π turns in `λ_r` between the first and last sample.
    pub fn real_windings(&self) -> i64 {
        let (a, b) = (self.samples[0].0, self.samples[self.samples.len() - 1].0);
        ((b.re - a.re) / TAU).round() as i64
    }

    pub(crate) fn require_closed(&self) -> Result<()> {
        if self.closed {
            Ok(())
        } else {
            Err(Error::InvalidPath("operation needs a closed path".into()))
        }
    }
}

/// Connection matrix at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSample {
    pub lambda: ComplexParam,
    /// `A_mn = i⟨ξ^B_m|∂ξ_n⟩`.
    pub a: CMat2,
    /// Diagonal part `A^D`.
    pub a_diag: CMat2,
    pub dtheta: C64,
    /// Unwrapped mixing angle at the sample, for use as the next hint.
    pub theta: C64,
}

/// Frame derivative in the reference gauge: `∂ξ₊ = Θ' ξ₋`, `∂ξ₋ = −Θ' ξ₊`.
fn frame_derivative(frame: &Eigenframe, dtheta: C64) -> [CVec2; 2] {
    [frame.minus.scale(dtheta), frame.plus.scale(-dtheta)]
}

/// Gauge connection at `lam`, with `Θ` unwrapped against `hint`.
pub fn connection(p: &ModelParams, lam: ComplexParam, hint: Option<C64>) -> Result<ConnectionSample> {
    check_ep_distance(p, lam.0)?;
    let theta = theta_mix(p, lam, hint)?;
    let frame = Eigenframe::from_theta(p.phi(), theta);
    let dtheta = theta_mix_derivative(p, lam);
    let d = frame_derivative(&frame, dtheta);
    let b = [frame.plus_b, frame.minus_b];
    let mut a = CMat2::zero();
    for m in 0..2 {
        for n in 0..2 {
            a[(m, n)] = I * b[m].inner(&d[n]);
        }
    }
    let a_diag = CMat2::diag(a[(0, 0)], a[(1, 1)]);
    Ok(ConnectionSample { lambda: lam, a, a_diag, dtheta, theta })
}

/// Central difference of the unwrapped mixing angle, an oracle for
/// [`theta_mix_derivative`].
pub fn dtheta_finite_difference(p: &ModelParams, lam: ComplexParam, h: f64) -> Result<C64> {
    let t0 = theta_mix(p, lam, None)?;
    let tp = theta_mix(p, (lam.0 + h).into(), Some(t0))?;
    let tm = theta_mix(p, (lam.0 - h).into(), Some(t0))?;
    Ok((tp - tm) / (2.0 * h))
}

fn check_path_samples(p: &ModelParams, path: &ParamPath) -> Result<()> {
    path.samples().iter().try_for_each(|s| check_ep_distance(p, s.0))
}

/// Winding integral `η(C) = ∮ ∂Θ/∂λ dλ` by the trapezoid rule on the
/// analytic integrand.
pub fn eta(path: &ParamPath, p: &ModelParams) -> Result<f64> {
    path.require_closed()?;
    check_path_samples(p, path)?;
    let f: Vec<C64> = path.samples().iter().map(|s| theta_mix_derivative(p, *s)).collect();
    let total: C64 = path
        .samples()
        .windows(2)
        .zip(f.windows(2))
        .map(|(s, v)| (v[0] + v[1]) * 0.5 * (s[1].0 - s[0].0))
        .sum();
    Ok(total.re)
}

/// Unwrapped `Θ` at every sample of the path.
pub fn unwrapped_theta(p: &ModelParams, path: &ParamPath) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(path.len());
    let mut hint = None;
    for s in path.samples() {
        check_ep_distance(p, s.0)?;
        let t = theta_mix(p, *s, hint)?;
        hint = Some(t);
        out.push(t);
    }
    Ok(out)
}

/// Column permutation and phases with `M = P · diag(phases)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `permutation[n]` is the row holding the surviving entry of column `n`.
    pub permutation: [usize; 2],
    pub phases: [C64; 2],
    /// False when `M` is not within [`FACTORIZATION_TOL`] of the pattern.
    pub factorized: bool,
}

impl Factorization {
    pub fn is_swap(&self) -> bool {
        self.permutation == [1, 0]
    }

    pub fn matrix(&self) -> CMat2 {
        let mut m = CMat2::zero();
        for n in 0..2 {
            m[(self.permutation[n], n)] = self.phases[n];
        }
        m
    }
}

/// Splits `M` into a permutation and diagonal phases; ties go to the
/// identity permutation.
pub fn factorize(m: &CMat2) -> Factorization {
    let keep = m[(0, 0)].norm() * m[(1, 1)].norm();
    let swap = m[(0, 1)].norm() * m[(1, 0)].norm();
    let permutation = if swap > keep { [1, 0] } else { [0, 1] };
    let phases = [m[(permutation[0], 0)], m[(permutation[1], 1)]];
    let mut f = Factorization { permutation, phases, factorized: true };
    f.factorized = frob_dist(&f.matrix(), m) < FACTORIZATION_TOL;
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyResult {
    pub m: CMat2,
    /// Net rotation angle, `Θ(end) − Θ(start)` along the unwrapped path.
    pub eta: f64,
    pub factorization: Factorization,
    pub traversals: u32,
    /// The `exp(i∫A^D)` factor; the identity in the reference gauge.
    pub gauge_factor: CMat2,
    /// Distance between the closed-form segment rotations and the general
    /// ordered product of `exp(−iA dλ)`.
    pub ordered_product_residual: f64,
}

/// Holonomy matrix `M(C) = exp_→(−i∮A dλ) · exp_←(i∮A^D dλ)`.
///
/// Each segment of the first factor is the exact rotation by the change of
/// the unwrapped mixing angle. The same product is also assembled from
/// midpoint connection samples through the general 2×2 exponential and
/// reported as a residual.
pub fn holonomy(path: &ParamPath, p: &ModelParams) -> Result<HolonomyResult> {
    path.require_closed()?;
    ep_locations(p)?;
    let thetas = unwrapped_theta(p, path)?;

    let mut rotation = CMat2::identity();
    let mut general = CMat2::identity();
    let mut gauge = CMat2::identity();
    for (k, w) in path.samples().windows(2).enumerate() {
        let step = thetas[k + 1] - thetas[k];
        let (s, c) = (step.sin(), step.cos());
        rotation = rotation * CMat2::new(c, -s, s, c);

        let dl = w[1].0 - w[0].0;
        let mid = connection(p, ((w[0].0 + w[1].0) * 0.5).into(), Some(thetas[k]))?;
        general = general * expm2(&mid.a.scale(-I * dl));
        // Path-ordered: later samples act from the left.
        gauge = expm2(&mid.a_diag.scale(I * dl)) * gauge;
    }

    let m = rotation * gauge;
    let eta = (thetas[thetas.len() - 1] - thetas[0]).re;
    Ok(HolonomyResult {
        m,
        eta,
        factorization: factorize(&m),
        traversals: path.traversals(),
        gauge_factor: gauge,
        ordered_product_residual: frob_dist(&rotation, &general),
    })
}

/// `M_mn = ⟨ξ^B_m(start)|ξ_n(C)⟩` from explicit parallel transport of
/// numerically computed eigenvectors.
///
/// Each step projects the transported vector onto the matching eigenline of
/// `U` at the next sample and rescales it so that the bilinear normalization
/// against its dual is preserved. Only the starting frame comes from the
/// closed form.
pub fn transported_overlap(path: &ParamPath, p: &ModelParams) -> Result<CMat2> {
    path.require_closed()?;
    let start = path.samples()[0];
    check_ep_distance(p, start.0)?;
    let theta0 = theta_mix(p, start, None)?;
    let frame0 = Eigenframe::from_theta(p.phi(), theta0);

    let mut t = [frame0.plus, frame0.minus];
    let mut tb = [frame0.plus_b, frame0.minus_b];
    for (step, s) in path.samples().iter().enumerate().skip(1) {
        check_ep_distance(p, s.0)?;
        let e = eig2(&floquet(p, *s));
        let w = e.biorthogonal_partners().ok_or(Error::DefectivePoint {
            lambda: format!("{}", s.0),
            distance: 0.0,
        })?;
        let pick = |v: &CVec2| {
            let o0 = e.vectors[0].inner(v).norm();
            let o1 = e.vectors[1].inner(v).norm();
            if o0 >= o1 {
                0
            } else {
                1
            }
        };
        let js = [pick(&t[0].normalized()), pick(&t[1].normalized())];
        if js[0] == js[1] {
            return Err(Error::NearEp { step, gap: (e.values[0] - e.values[1]).norm() });
        }
        for n in 0..2 {
            let (v, wd) = (e.vectors[js[n]], w[js[n]]);
            let c = wd.inner(&t[n]);
            let c_back = tb[n].inner(&v);
            let mut scale = (c / c_back).sqrt();
            if v.scale(-scale).dist(&t[n]) < v.scale(scale).dist(&t[n]) {
                scale = -scale;
            }
            t[n] = v.scale(scale);
            tb[n] = wd.scale(scale.inv().conj());
        }
    }

    let b0 = [frame0.plus_b, frame0.minus_b];
    let mut m = CMat2::zero();
    for a in 0..2 {
        for n in 0..2 {
            m[(a, n)] = b0[a].inner(&t[n]);
        }
    }
    Ok(m)
}
