//! Dense 2×2 complex matrices and vectors.
//!
//! Everything the model needs fits in a qubit-sized Hilbert space, so the
//! eigen-decomposition and the exponentials here are closed forms rather
//! than iterative routines.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Gram-matrix condition number above which an eigenvector pair is
/// reported as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMat2(pub [[C64; 2]; 2]);

/// Two-component complex state vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVec2(pub [C64; 2]);

impl CMat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        CMat2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        CMat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        CMat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    /// σ·v for a (possibly complex) 3-vector.
    pub fn sigma_dot(v: [C64; 3]) -> Self {
        Self::new(v[2], v[0] - I * v[1], v[0] + I * v[1], -v[2])
    }

    /// Matrix whose columns are `a` and `b`.
    pub fn from_columns(a: CVec2, b: CVec2) -> Self {
        Self::new(a.0[0], b.0[0], a.0[1], b.0[1])
    }

    pub fn column(&self, j: usize) -> CVec2 {
        CVec2([self.0[0][j], self.0[1][j]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(det.inv()))
    }

    pub fn apply(&self, v: &CVec2) -> CVec2 {
        let m = &self.0;
        CVec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn frob_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc * *self)
    }
}

impl Index<(usize, usize)> for CMat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for CMat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        mat_mul(&self, &rhs)
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, rhs: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &rhs.0);
        CMat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, rhs: CMat2) -> CMat2 {
        self + (-rhs)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale(-ONE)
    }
}

impl CVec2 {
    pub const fn new(a: C64, b: C64) -> Self {
        CVec2([a, b])
    }

    pub fn up() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn down() -> Self {
        Self::new(ZERO, ONE)
    }

    /// Hermitian inner product ⟨self|other⟩.
    pub fn inner(&self, other: &CVec2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit vector orthogonal to `self` (for a unit `self`).
    pub fn orthogonal(&self) -> Self {
        Self::new(-self.0[1].conj(), self.0[0].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(s * self.0[0], s * self.0[1])
    }

    pub fn normalized(&self) -> Self {
        self.scale(C64::from(1.0 / self.norm()))
    }

    pub fn dist(&self, other: &CVec2) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.0[0] + rhs.0[0], self.0[1] + rhs.0[1])
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.0[0] - rhs.0[0], self.0[1] - rhs.0[1])
    }
}

pub fn adjoint(m: &CMat2) -> CMat2 {
    m.adjoint()
}

pub fn mat_mul(a: &CMat2, b: &CMat2) -> CMat2 {
    let (a, b) = (&a.0, &b.0);
    CMat2::new(
        a[0][0] * b[0][0] + a[0][1] * b[1][0],
        a[0][0] * b[0][1] + a[0][1] * b[1][1],
        a[1][0] * b[0][0] + a[1][1] * b[1][0],
        a[1][0] * b[0][1] + a[1][1] * b[1][1],
    )
}

pub fn frob_dist(a: &CMat2, b: &CMat2) -> f64 {
    (*a - *b).frob_norm()
}

/// P(v) = (I + σ·v)/2 for a real unit vector `v`.
pub fn projector(v: [f64; 3]) -> Result<CMat2> {
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !len.is_finite() || (len - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "projector axis must be a unit vector, |v| = {len}"
        )));
    }
    let s = CMat2::sigma_dot([v[0].into(), v[1].into(), v[2].into()]);
    Ok((CMat2::identity() + s).scale(C64::from(0.5)))
}

/// exp(−i c P) for an idempotent `p`, via exp(−icP) = I + (e^{−ic} − 1) P.
pub fn projector_phase_exp(c: C64, p: &CMat2) -> Result<CMat2> {
    let defect = frob_dist(&(*p * *p), p);
    if !(defect <= 1e-10) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not a projector, |P^2 - P| = {defect:e}"
        )));
    }
    Ok(CMat2::identity() + p.scale((-I * c).exp() - ONE))
}

/// General closed-form exponential exp(X) of a 2×2 matrix.
///
/// Writes X = t·I + Y with t = tr X / 2 and Y traceless, so Y² = q·I with
/// q = −det Y and exp(Y) = cosh(√q)·I + sinh(√q)/√q · Y.
pub fn expm2(x: &CMat2) -> CMat2 {
    let t = x.trace() * 0.5;
    let y = *x - CMat2::identity().scale(t);
    let q = -y.det();
    let s = q.sqrt();
    let (ch, sh_over_s) = if s.norm() < 1e-4 {
        // Taylor tails; next terms are O(q^3).
        (ONE + q / 2.0 + q * q / 24.0, ONE + q / 6.0 + q * q / 120.0)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    (CMat2::identity().scale(ch) + y.scale(sh_over_s)).scale(t.exp())
}

/// Result of a closed-form 2×2 eigen-decomposition.
#[derive(Debug, Clone, Copy)]
pub struct Eig2 {
    pub values: [C64; 2],
    /// Unit-norm right eigenvectors, paired with `values`.
    pub vectors: [CVec2; 2],
    /// Set when the eigenvector pair is numerically rank deficient
    /// (Gram condition number above [`DEFECTIVE_CONDITION`]).
    pub defective: bool,
}

impl Eig2 {
    /// Left partners ⟨w_m| with ⟨w_m|v_n⟩ = δ_mn, returned as kets |w_m⟩.
    pub fn biorthogonal_partners(&self) -> Option<[CVec2; 2]> {
        biorthogonal_partners(&self.vectors)
    }
}

/// Kets |w_m⟩ dual to `v` in the sense ⟨w_m|v_n⟩ = δ_mn.
pub fn biorthogonal_partners(v: &[CVec2; 2]) -> Option<[CVec2; 2]> {
    let inv = CMat2::from_columns(v[0], v[1]).inverse()?;
    // Row m of R⁻¹ is the bra ⟨w_m|.
    let row = |m: usize| CVec2::new(inv.0[m][0].conj(), inv.0[m][1].conj());
    Some([row(0), row(1)])
}

fn eigvec_for(m: &CMat2, z: C64) -> CVec2 {
    let [[a, b], [c, d]] = m.0;
    let v1 = CVec2::new(b, z - a);
    let v2 = CVec2::new(z - d, c);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    if v.norm() == 0.0 {
        // m is a multiple of the identity; any basis works.
        return CVec2::up();
    }
    v.normalized()
}

pub fn eig2(m: &CMat2) -> Eig2 {
    let [[a, b], [c, d]] = m.0;
    let tr = a + d;
    let diff = a - d;
    let disc = diff * diff + b * c * 4.0;
    let sq = disc.sqrt();
    // Pick the sign that avoids cancellation in tr ± sq.
    let big = if (tr + sq).norm() >= (tr - sq).norm() { tr + sq } else { tr - sq };
    let z1 = big * 0.5;
    let z2 = if z1.norm() > 0.0 { m.det() / z1 } else { (tr - sq) * 0.5 };

    if b.norm() == 0.0 && c.norm() == 0.0 {
        // Diagonal input: keep the canonical basis in diagonal order.
        return Eig2 {
            values: [a, d],
            vectors: [CVec2::up(), CVec2::down()],
            defective: false,
        };
    }

    let v1 = eigvec_for(m, z1);
    let mut v2 = eigvec_for(m, z2);
    let mut g = v1.inner(&v2).norm();
    if (z1 - z2).norm() <= 1e-14 * (1.0 + z1.norm()) && g > 1.0 - 1e-12 {
        // Coincident eigenvalues: fall back to the orthogonal complement so
        // the Gram test below sees the rank deficiency, not a duplicate.
        v2 = CVec2::new(-v1.0[1].conj(), v1.0[0].conj());
        let jordan = (*m - CMat2::identity().scale(z1)).frob_norm() > 1e-12 * (1.0 + m.frob_norm());
        return Eig2 { values: [z1, z2], vectors: [v1, v2], defective: jordan };
    }
    g = g.min(1.0);
    let cond = if g >= 1.0 { f64::INFINITY } else { (1.0 + g) / (1.0 - g) };
    Eig2 { values: [z1, z2], vectors: [v1, v2], defective: cond > DEFECTIVE_CONDITION }
}
