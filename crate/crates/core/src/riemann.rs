//! The complexified kick strength seen through `e^{iλ} = e^{−λ_i} e^{iλ_r}`.
//!
//! The pair of Floquet eigenvalues is a single-valued function of the polar
//! point `ζ = e^{iλ}`, but the individual eigenvalues live on a two-sheeted
//! surface with square-root branch points at `ζ± = e^{iλ±}`. Here the sheets
//! are separated by the discriminant
//! `tr² − 4 det = A (ζ − ζ₊)(ζ − ζ₋)/ζ²`, taking one square root per branch
//! point. Each root has its cut along a ray leaving its branch point
//! counter-clockwise, perpendicular to the ray from the origin, so the cut
//! attached to the inner point crosses the unit circle once and the outer
//! one never does.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holonomy::ParamPath;
use crate::linalg::{eig2, CMat2, C64};
use crate::model::{
    ep_locations, floquet, floquet_derivative, gap, spectral_constants, ComplexParam, EpPair,
    ModelParams, BETA_DEGENERATE,
};

const I: C64 = C64::new(0.0, 1.0);

/// Newton iteration budget for [`refine_ep`].
pub const MAX_NEWTON_ITERATIONS: usize = 200;

/// Minimum distance between a continuation path and an exceptional point.
pub const CONTINUATION_EP_MARGIN: f64 = 1e-6;

/// Two candidate pairings closer than this make continuation ambiguous.
pub const AMBIGUOUS_MATCH: f64 = 1e-12;

/// Discriminant `(a − d)² + 4bc` of a 2×2 matrix.
fn discriminant(m: &CMat2) -> C64 {
    let d = m[(0, 0)] - m[(1, 1)];
    d * d + m[(0, 1)] * m[(1, 0)] * 4.0
}

/// Square root with its cut along the ray `{t·dir : t > 0}`.
fn sqrt_cut_along(u: C64, dir: C64) -> C64 {
    let d = dir / dir.norm();
    (-u / d).sqrt() * (-d).sqrt()
}

fn roots_flip(a: C64, b: C64) -> bool {
    (a * b.conj()).re < 0.0
}

/// Sheet structure of the eigenvalue pair on the polar plane.
#[derive(Debug, Clone, Copy)]
pub struct PolarSheet {
    params: ModelParams,
    kind: SheetKind,
}

#[derive(Debug, Clone, Copy)]
enum SheetKind {
    Branched {
        zeta_plus: C64,
        zeta_minus: C64,
        dir_plus: C64,
        dir_minus: C64,
        sqrt_lead: C64,
    },
    /// No complex EPs: both eigenvalues are single valued in ζ.
    Degenerate { alpha: f64, kappa: f64 },
}

impl PolarSheet {
    pub fn new(p: &ModelParams) -> Result<Self> {
        match ep_locations(p) {
            Ok(eps) => Ok(Self::branched(p, &eps)),
            Err(Error::DegenerateModel { .. }) => {
                let k = spectral_constants(p)?;
                Ok(PolarSheet { params: *p, kind: SheetKind::Degenerate { alpha: k.alpha, kappa: k.kappa } })
            }
            Err(e) => Err(e),
        }
    }

    fn branched(p: &ModelParams, eps: &EpPair) -> Self {
        let zeta_plus = (I * eps.lambda_plus).exp();
        let zeta_minus = (I * eps.lambda_minus).exp();
        // Leading coefficient from a point well away from both branch points.
        let probe = ComplexParam::new(eps.alpha + FRAC_PI_2, 0.0);
        let z = probe.polar_point();
        let lead = discriminant(&floquet(p, probe)) * z * z / ((z - zeta_plus) * (z - zeta_minus));
        PolarSheet {
            params: *p,
            kind: SheetKind::Branched {
                zeta_plus,
                zeta_minus,
                dir_plus: I * zeta_plus,
                dir_minus: I * zeta_minus,
                sqrt_lead: lead.sqrt(),
            },
        }
    }

    /// Square root of the discriminant on this sheet, i.e. `z_a − z_b`.
    pub fn root(&self, lam: ComplexParam) -> C64 {
        let z = lam.polar_point();
        match self.kind {
            SheetKind::Branched { zeta_plus, zeta_minus, dir_plus, dir_minus, sqrt_lead } => {
                sqrt_lead * sqrt_cut_along(z - zeta_plus, dir_plus) * sqrt_cut_along(z - zeta_minus, dir_minus)
                    / z
            }
            SheetKind::Degenerate { alpha, kappa } => {
                let mu = self.params.mu();
                let z1 = (-I * (mu - alpha) * 0.5).exp() * kappa / z;
                let z2 = (-I * (mu + alpha) * 0.5).exp() * kappa;
                z1 - z2
            }
        }
    }

    /// Eigenvalues `(z_a, z_b)` on this sheet.
    pub fn eigenvalues(&self, lam: ComplexParam) -> [C64; 2] {
        let tr = floquet(&self.params, lam).trace();
        let s = self.root(lam);
        [(tr + s) * 0.5, (tr - s) * 0.5]
    }

    pub fn is_branched(&self) -> bool {
        matches!(self.kind, SheetKind::Branched { .. })
    }

    /// True when going from `a` to `b` crosses a cut. Without complex EPs
    /// both eigenvalues are single valued in ζ and nothing is ever crossed,
    /// even where they meet on the real axis.
    pub fn crosses(&self, a: ComplexParam, b: ComplexParam) -> bool {
        self.is_branched() && roots_flip(self.root(a), self.root(b))
    }
}

/// Polar grid resolution and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_angle: usize,
    pub n_radius: usize,
    /// Rows run from `λ_i = lambda_i_max` (radius `e^{−lambda_i_max}`)
    /// outwards in equal steps of `2·lambda_i_max / n_radius`; row
    /// `n_radius / 2` is the unit circle.
    pub lambda_i_max: f64,
    /// Accept models without complex EPs instead of failing.
    pub allow_degenerate: bool,
}

impl GridSpec {
    /// Square grid sized so both EP radii `e^{∓β}` sit well inside.
    pub fn for_model(p: &ModelParams, n: usize) -> Self {
        let beta = crate::model::alpha_beta(p).map(|(_, b)| b.abs()).unwrap_or(0.0);
        GridSpec {
            n_angle: n,
            n_radius: n,
            lambda_i_max: (2.0 * beta).max(2.0),
            allow_degenerate: beta <= BETA_DEGENERATE,
        }
    }

    pub fn angle_step(&self) -> f64 {
        TAU / self.n_angle as f64
    }

    pub fn lambda_i_step(&self) -> f64 {
        2.0 * self.lambda_i_max / self.n_radius as f64
    }

    /// Angle of column `i`; columns sit half a step off `λ_r = 0`.
    pub fn angle(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.angle_step()
    }

    pub fn lambda_i(&self, j: usize) -> f64 {
        self.lambda_i_max - j as f64 * self.lambda_i_step()
    }

    pub fn unit_circle_row(&self) -> usize {
        self.n_radius / 2
    }

    pub fn r_max(&self) -> f64 {
        (-self.lambda_i(self.n_radius - 1)).exp()
    }

    fn validate(&self) -> Result<()> {
        if self.n_angle < 64 || self.n_radius < 64 || self.n_radius % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 64 x 64 with an even radial count, got {} x {}",
                self.n_angle, self.n_radius
            )));
        }
        if !(self.lambda_i_max.is_finite() && self.lambda_i_max > 0.0) {
            return Err(Error::InvalidArgument("lambda_i_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetNode {
    pub lambda: ComplexParam,
    pub radius: f64,
    /// Principal-branch gap `Δ`.
    pub delta: C64,
    /// Sheet root `z_a − z_b`.
    pub root: C64,
}

/// Grid edge between neighbouring nodes `(i, j)` (angle, radius index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    /// `(i, j)` to `(i + 1 mod n_angle, j)`.
    Angular { i: usize, j: usize },
    /// `(i, j)` to `(i, j + 1)`.
    Radial { i: usize, j: usize },
}

/// A connected set of flagged edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutCurve {
    pub edges: Vec<Edge>,
    /// Cells (by lower-left node) with an odd number of flagged edges;
    /// each holds a branch point.
    pub endpoint_cells: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetGrid {
    pub spec: GridSpec,
    /// Row-major by radius: node `(i, j)` at index `j * n_angle + i`.
    pub nodes: Vec<SheetNode>,
    angular_cut: Vec<bool>,
    radial_cut: Vec<bool>,
}

impl SheetGrid {
    pub fn node(&self, i: usize, j: usize) -> &SheetNode {
        &self.nodes[j * self.spec.n_angle + i]
    }

    pub fn is_cut(&self, edge: Edge) -> bool {
        match edge {
            Edge::Angular { i, j } => self.angular_cut[j * self.spec.n_angle + i],
            Edge::Radial { i, j } => self.radial_cut[j * self.spec.n_angle + i],
        }
    }

    /// Whether the edge joining two neighbouring nodes is flagged, in either
    /// order; `None` if the nodes are not neighbours.
    pub fn is_cut_between(&self, a: (usize, usize), b: (usize, usize)) -> Option<bool> {
        let n = self.spec.n_angle;
        let (lo, hi) = if (a.1, a.0) <= (b.1, b.0) { (a, b) } else { (b, a) };
        if lo.1 == hi.1 {
            let j = lo.1;
            if (lo.0 + 1) % n == hi.0 {
                return Some(self.is_cut(Edge::Angular { i: lo.0, j }));
            }
            if (hi.0 + 1) % n == lo.0 {
                return Some(self.is_cut(Edge::Angular { i: hi.0, j }));
            }
            return None;
        }
        if lo.0 == hi.0 && lo.1 + 1 == hi.1 {
            return Some(self.is_cut(Edge::Radial { i: lo.0, j: lo.1 }));
        }
        None
    }

    /// True when any edge touching node `(i, j)` is flagged.
    pub fn node_flag(&self, i: usize, j: usize) -> bool {
        let n = self.spec.n_angle;
        let left = (i + n - 1) % n;
        let mut touching = vec![Edge::Angular { i, j }, Edge::Angular { i: left, j }];
        if j + 1 < self.spec.n_radius {
            touching.push(Edge::Radial { i, j });
        }
        if j > 0 {
            touching.push(Edge::Radial { i, j: j - 1 });
        }
        touching.into_iter().any(|e| self.is_cut(e))
    }

    pub fn flagged_edges(&self) -> Vec<Edge> {
        let n = self.spec.n_angle;
        let mut out = Vec::new();
        for j in 0..self.spec.n_radius {
            for i in 0..n {
                if self.angular_cut[j * n + i] {
                    out.push(Edge::Angular { i, j });
                }
                if j + 1 < self.spec.n_radius && self.radial_cut[j * n + i] {
                    out.push(Edge::Radial { i, j });
                }
            }
        }
        out
    }

    /// Edges of the cell spanned by nodes `(i, j)`, `(i+1, j)`, `(i, j+1)`,
    /// `(i+1, j+1)`.
    fn cell_edges(&self, i: usize, j: usize) -> [Edge; 4] {
        let n = self.spec.n_angle;
        [
            Edge::Angular { i, j },
            Edge::Angular { i, j: j + 1 },
            Edge::Radial { i, j },
            Edge::Radial { i: (i + 1) % n, j },
        ]
    }

    /// Flagged edges grouped into curves: two flagged edges belong to the
    /// same curve when they bound a common cell.
    pub fn cut_curves(&self) -> Vec<CutCurve> {
        let edges = self.flagged_edges();
        let index: BTreeMap<Edge, usize> = edges.iter().enumerate().map(|(k, e)| (*e, k)).collect();
        let mut parent: Vec<usize> = (0..edges.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut odd_cells = Vec::new();
        for j in 0..self.spec.n_radius - 1 {
            for i in 0..self.spec.n_angle {
                let flagged: Vec<usize> =
                    self.cell_edges(i, j).iter().filter_map(|e| index.get(e).copied()).collect();
                if flagged.len() % 2 == 1 {
                    odd_cells.push(((i, j), flagged[0]));
                }
                for w in flagged.windows(2) {
                    let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, CutCurve> = BTreeMap::new();
        for (k, e) in edges.iter().enumerate() {
            let root = find(&mut parent, k);
            groups
                .entry(root)
                .or_insert_with(|| CutCurve { edges: Vec::new(), endpoint_cells: Vec::new() })
                .edges
                .push(*e);
        }
        for (cell, member) in odd_cells {
            let root = find(&mut parent, member);
            groups.get_mut(&root).expect("member edge has a group").endpoint_cells.push(cell);
        }
        groups.into_values().collect()
    }

    /// Centre of cell `(i, j)` as `(angle, λ_i)`.
    pub fn cell_center(&self, (i, j): (usize, usize)) -> (f64, f64) {
        let s = &self.spec;
        (s.angle(i) + 0.5 * s.angle_step(), s.lambda_i(j) - 0.5 * s.lambda_i_step())
    }

    /// Distance from a cell centre to `lam`, in grid cells (the larger of
    /// the angular and radial index offsets; angles compared modulo 2π).
    pub fn cells_between(&self, cell: (usize, usize), lam: C64) -> f64 {
        let (a, li) = self.cell_center(cell);
        let mut da = (a - lam.re).rem_euclid(TAU);
        if da > TAU / 2.0 {
            da = TAU - da;
        }
        (da / self.spec.angle_step()).max((li - lam.im).abs() / self.spec.lambda_i_step())
    }

    /// Number of flagged edges of `curve` on the unit-circle row.
    pub fn unit_circle_crossings(&self, curve: &CutCurve) -> usize {
        let row = self.spec.unit_circle_row();
        curve
            .edges
            .iter()
            .filter(|e| matches!(e, Edge::Angular { j, .. } if *j == row))
            .count()
    }
}

/// Samples the principal gap and the sheet root on a polar grid and flags
/// every edge across which the eigenvalue labels swap.
pub fn sample_sheet(p: &ModelParams, spec: GridSpec) -> Result<SheetGrid> {
    spec.validate()?;
    if !spec.allow_degenerate {
        ep_locations(p)?;
    }
    let sheet = PolarSheet::new(p)?;
    // Validates the closed-form constants once before the parallel sweep.
    spectral_constants(p)?;

    let (na, nr) = (spec.n_angle, spec.n_radius);
    let nodes: Vec<SheetNode> = (0..na * nr)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % na, k / na);
            let lambda = ComplexParam::new(spec.angle(i), spec.lambda_i(j));
            SheetNode {
                lambda,
                radius: lambda.radius(),
                delta: gap(p, lambda, None).expect("constants validated above"),
                root: sheet.root(lambda),
            }
        })
        .collect();

    let branched = sheet.is_branched();
    let flip = |a: &SheetNode, b: &SheetNode| branched && roots_flip(a.root, b.root);
    let mut angular_cut = vec![false; na * nr];
    let mut radial_cut = vec![false; na * nr];
    for j in 0..nr {
        for i in 0..na {
            let here = &nodes[j * na + i];
            angular_cut[j * na + i] = flip(here, &nodes[j * na + (i + 1) % na]);
            if j + 1 < nr {
                radial_cut[j * na + i] = flip(here, &nodes[(j + 1) * na + i]);
            }
        }
    }
    Ok(SheetGrid { spec, nodes, angular_cut, radial_cut })
}

/// Newton refinement of an exceptional point on the numerically evaluated
/// discriminant of `U(λ)`, which has a simple zero there.
pub fn refine_ep(p: &ModelParams, guess: C64) -> Result<C64> {
    let value = |lam: C64| discriminant(&floquet(p, lam.into()));
    let mut lam = guess;
    let mut f = value(lam);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if f.norm() == 0.0 {
            return Ok(lam);
        }
        let u = floquet(p, lam.into());
        let du = floquet_derivative(p, lam.into());
        let d = u[(0, 0)] - u[(1, 1)];
        let dd = du[(0, 0)] - du[(1, 1)];
        let df = d * dd * 2.0 + (du[(0, 1)] * u[(1, 0)] + u[(0, 1)] * du[(1, 0)]) * 4.0;
        let full = f / df;
        if !full.is_finite() {
            break;
        }
        // Damping: shrink until the residual decreases.
        let mut step = full;
        let mut next = lam - step;
        let mut f_next = value(next);
        let mut halvings = 0;
        while f_next.norm() >= f.norm() && halvings < 30 {
            step *= 0.5;
            next = lam - step;
            f_next = value(next);
            halvings += 1;
        }
        let scale = 1.0 + lam.norm();
        if f_next.norm() < f.norm() {
            lam = next;
            f = f_next;
            if step.norm() <= 1e-15 * scale {
                return Ok(lam);
            }
        } else if full.norm() <= 1e-10 * scale {
            // No further decrease and the Newton step is already tiny: the
            // residual sits at the rounding floor.
            return Ok(lam);
        } else {
            break;
        }
    }
    Err(Error::SearchFailure { iterations: MAX_NEWTON_ITERATIONS })
}

/// Exceptional point in the upper (`upper = true`) or lower half of the
/// strip `−π ≤ λ_r < π`, `|λ_i| ≤ 6`, found without the closed form: the
/// smallest scaled discriminant on a coarse grid seeds [`refine_ep`].
pub fn locate_ep(p: &ModelParams, upper: bool) -> Result<C64> {
    const N_RE: usize = 96;
    const N_IM: usize = 80;
    const IM_MAX: f64 = 6.0;
    let sign = if upper { 1.0 } else { -1.0 };
    let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
    for a in 0..N_RE {
        for b in 1..=N_IM {
            let lam = C64::new(
                -std::f64::consts::PI + TAU * (a as f64 + 0.5) / N_RE as f64,
                sign * IM_MAX * b as f64 / N_IM as f64,
            );
            let u = floquet(p, lam.into());
            let score = discriminant(&u).norm() / u.frob_norm().powi(2);
            if score < best.0 {
                best = (score, lam);
            }
        }
    }
    refine_ep(p, best.1)
}

/// Whether the tracked labels returned to their start or were exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Identity,
    Swap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub samples: Vec<ComplexParam>,
    /// Tracked `(z₊-branch, z₋-branch)` at each sample.
    pub branches: Vec<[C64; 2]>,
    pub pairing: Pairing,
}

impl ContinuationTrace {
    /// Per-step change of the tracked pair.
    pub fn jumps(&self) -> Vec<f64> {
        self.branches
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).norm().max((w[1][1] - w[0][1]).norm()))
            .collect()
    }

    /// No step jumps by more than ten times the larger of its neighbours.
    pub fn is_continuous(&self) -> bool {
        let j = self.jumps();
        (0..j.len()).all(|k| {
            let prev = if k > 0 { j[k - 1] } else { 0.0 };
            let next = if k + 1 < j.len() { j[k + 1] } else { 0.0 };
            j[k] <= 10.0 * prev.max(next).max(1e-15)
        })
    }

    /// Distance between the final pair and the crossed starting pair.
    pub fn crossed_mismatch(&self) -> f64 {
        let (a, b) = (self.branches[0], self.branches[self.branches.len() - 1]);
        (b[0] - a[1]).norm().max((b[1] - a[0]).norm())
    }

    pub fn direct_mismatch(&self) -> f64 {
        let (a, b) = (self.branches[0], self.branches[self.branches.len() - 1]);
        (b[0] - a[0]).norm().max((b[1] - a[1]).norm())
    }
}

/// Follows both eigenvalues of the numerically diagonalized `U` along
/// `path` by nearest continuation.
pub fn continue_eigenvalues(p: &ModelParams, path: &ParamPath) -> Result<ContinuationTrace> {
    let eps = ep_locations(p).ok();
    let mut branches = Vec::with_capacity(path.len());
    for (step, s) in path.samples().iter().enumerate() {
        if let Some(eps) = &eps {
            let d = eps.distance(s.0);
            if d <= CONTINUATION_EP_MARGIN {
                return Err(Error::DefectivePoint { lambda: format!("{}", s.0), distance: d });
            }
        }
        let v = eig2(&floquet(p, *s)).values;
        let Some(prev) = branches.last().copied() else {
            // Start labels follow the analytic principal sheet.
            let a = crate::model::analytic_eigenvalues(p, *s, None)?;
            let direct = (v[0] - a.z_plus).norm() + (v[1] - a.z_minus).norm();
            let crossed = (v[1] - a.z_plus).norm() + (v[0] - a.z_minus).norm();
            branches.push(if crossed < direct { [v[1], v[0]] } else { v });
            continue;
        };
        let prev: [C64; 2] = prev;
        let direct = (v[0] - prev[0]).norm() + (v[1] - prev[1]).norm();
        let crossed = (v[1] - prev[0]).norm() + (v[0] - prev[1]).norm();
        if (direct - crossed).abs() <= AMBIGUOUS_MATCH {
            return Err(Error::NearEp { step, gap: (v[0] - v[1]).norm() });
        }
        branches.push(if crossed < direct { [v[1], v[0]] } else { v });
    }
    let first = branches[0];
    let last = branches[branches.len() - 1];
    let direct = (last[0] - first[0]).norm() + (last[1] - first[1]).norm();
    let crossed = (last[0] - first[1]).norm() + (last[1] - first[0]).norm();
    let pairing = if crossed < direct { Pairing::Swap } else { Pairing::Identity };
    Ok(ContinuationTrace { samples: path.samples().to_vec(), branches, pairing })
}

/// Number of sheet cuts crossed along `path`.
pub fn cut_crossings(p: &ModelParams, path: &ParamPath) -> Result<usize> {
    let sheet = PolarSheet::new(p)?;
    Ok(path.samples().windows(2).filter(|w| sheet.crosses(w[0], w[1])).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn default_params() -> ModelParams {
        ModelParams::new(FRAC_PI_2, FRAC_PI_2, 0.0).unwrap()
    }

    #[test]
    fn sqrt_cut_direction() {
        let dir = C64::new(0.0, 1.0);
        let above = sqrt_cut_along(C64::new(-1e-9, 1.0), dir);
        let below = sqrt_cut_along(C64::new(1e-9, 1.0), dir);
        assert!((above + below).norm() < 1e-6);
        let r = sqrt_cut_along(C64::new(-1.0, 0.0), dir);
        assert!((r * r + 1.0).norm() < 1e-15);
        assert!((sqrt_cut_along(C64::new(-1.0, 0.0), dir) - sqrt_cut_along(C64::new(-1.0, 1e-9), dir)).norm() < 1e-6);
    }

    #[test]
    fn sheet_root_squares_to_discriminant() {
        let p = default_params();
        let sheet = PolarSheet::new(&p).unwrap();
        for lam in [ComplexParam::new(0.3, 0.2), ComplexParam::new(4.0, -1.0), ComplexParam::real(2.0)] {
            let s = sheet.root(lam);
            let d = discriminant(&floquet(&p, lam));
            assert!((s * s - d).norm() < 1e-12 * (1.0 + d.norm()));
            let [a, b] = sheet.eigenvalues(lam);
            let e = eig2(&floquet(&p, lam)).values;
            let m = ((a - e[0]).norm() + (b - e[1]).norm()).min((a - e[1]).norm() + (b - e[0]).norm());
            assert!(m < 1e-12);
        }
    }

    #[test]
    fn degenerate_sheet_has_no_cuts() {
        let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let mut spec = GridSpec::for_model(&p, 64);
        assert!(spec.allow_degenerate);
        let g = sample_sheet(&p, spec).unwrap();
        assert!(g.flagged_edges().is_empty());
        spec.allow_degenerate = false;
        assert!(matches!(sample_sheet(&p, spec), Err(Error::DegenerateModel { .. })));
    }

    #[test]
    fn small_grids_rejected() {
        let p = default_params();
        let spec = GridSpec { n_angle: 32, ..GridSpec::for_model(&p, 64) };
        assert!(sample_sheet(&p, spec).is_err());
    }

    #[test]
    fn two_cuts_ending_at_eps() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        let g = sample_sheet(&p, GridSpec::for_model(&p, 128)).unwrap();
        let curves = g.cut_curves();
        assert_eq!(curves.len(), 2);
        let ends: Vec<_> = curves.iter().flat_map(|c| c.endpoint_cells.clone()).collect();
        assert_eq!(ends.len(), 2);
        for lam in [eps.lambda_plus, eps.lambda_minus] {
            assert!(ends.iter().any(|c| g.cells_between(*c, lam) <= 2.0));
        }
    }

    #[test]
    fn neighbour_flags_are_symmetric() {
        let p = default_params();
        let g = sample_sheet(&p, GridSpec::for_model(&p, 64)).unwrap();
        for e in g.flagged_edges() {
            let (a, b) = match e {
                Edge::Angular { i, j } => ((i, j), ((i + 1) % 64, j)),
                Edge::Radial { i, j } => ((i, j), (i, j + 1)),
            };
            assert_eq!(g.is_cut_between(a, b), Some(true));
            assert_eq!(g.is_cut_between(b, a), Some(true));
        }
        assert_eq!(g.is_cut_between((0, 0), (5, 5)), None);
    }

    #[test]
    fn locate_without_closed_form() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        assert!((locate_ep(&p, true).unwrap() - eps.lambda_plus).norm() < 1e-10);
        assert!((locate_ep(&p, false).unwrap() - eps.lambda_minus).norm() < 1e-10);
    }

    #[test]
    fn refine_from_nearby_guess() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        let r = refine_ep(&p, C64::new(0.1, 1.6)).unwrap();
        assert!((r - eps.lambda_plus).norm() < 1e-8, "{r}");
        let exact = refine_ep(&p, eps.lambda_plus).unwrap();
        assert!((exact - eps.lambda_plus).norm() < 1e-10);
        let c = refine_ep(&p, C64::new(0.1, -1.6)).unwrap();
        assert!((c - eps.lambda_minus).norm() < 1e-8);
    }

    #[test]
    fn real_loop_swaps_and_double_loop_restores() {
        let p = default_params();
        let t = continue_eigenvalues(&p, &ParamPath::real_loop(2000, 1)).unwrap();
        assert_eq!(t.pairing, Pairing::Swap);
        assert!(t.crossed_mismatch() < 1e-9);
        assert!(t.is_continuous());
        let t2 = continue_eigenvalues(&p, &ParamPath::real_loop(2000, 2)).unwrap();
        assert_eq!(t2.pairing, Pairing::Identity);
        assert!(t2.direct_mismatch() < 1e-9);
    }

    #[test]
    fn small_circles() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        let r = 0.1 * eps.beta.abs();
        let around = ParamPath::circle(eps.lambda_plus, r, 400, 1);
        assert_eq!(continue_eigenvalues(&p, &around).unwrap().pairing, Pairing::Swap);
        let away = ParamPath::circle(eps.lambda_plus + C64::new(1.0, 0.0), r, 400, 1);
        assert_eq!(continue_eigenvalues(&p, &away).unwrap().pairing, Pairing::Identity);
    }

    #[test]
    fn crossings_match_swap_parity() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        let paths = [
            ParamPath::real_loop(1000, 1),
            ParamPath::real_loop(1000, 2),
            ParamPath::circle(eps.lambda_plus, 0.3, 300, 1),
            ParamPath::circle(eps.lambda_minus, 0.3, 300, 1),
            ParamPath::circle(C64::new(3.0, 0.0), 1.0, 300, 1),
        ];
        for path in &paths {
            let swap = continue_eigenvalues(&p, path).unwrap().pairing == Pairing::Swap;
            assert_eq!(cut_crossings(&p, path).unwrap() % 2 == 1, swap);
        }
    }

    #[test]
    fn continuation_rejects_paths_through_ep() {
        let p = default_params();
        let eps = ep_locations(&p).unwrap();
        let path = ParamPath::retraced(eps.lambda_plus - 0.1, eps.lambda_plus + 0.1, 2);
        assert!(continue_eigenvalues(&p, &path).is_err());
    }
}
