//! Fixed-size 2×2 complex matrices with closed-form spectral data.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase_of;

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CMat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl fmt::Debug for CMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m11, self.m12, self.m21, self.m22
        )
    }
}

/// Column vector in C².
pub type Vec2 = [Complex64; 2];

impl CMat2 {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        CMat2 { m11, m12, m21, m22 }
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        CMat2::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn identity() -> Self {
        CMat2::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        CMat2::from_real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        CMat2::new(d1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), d2)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn adjoint(&self) -> Self {
        CMat2::new(
            self.m11.conj(),
            self.m21.conj(),
            self.m12.conj(),
            self.m22.conj(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        CMat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(CMat2::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        mat2_singular_values(self).0
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        mat2_eig(self).values[0].norm()
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        CMat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        CMat2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        CMat2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale_real(-1.0)
    }
}

/// Eigenpairs of a 2×2 matrix.
///
/// `values` are ordered by descending modulus, ties broken by ascending
/// phase in `[0, 2π)`. `vectors[k]` is a unit eigenvector for `values[k]`.
/// When the matrix is defective both slots hold the single eigenvector and
/// `defective` is set.
#[derive(Debug, Clone, Copy)]
pub struct Eigen2 {
    pub values: [Complex64; 2],
    pub vectors: [Vec2; 2],
    pub defective: bool,
}

const TIE_TOL: f64 = 1e-12;
const DEFECT_TOL: f64 = 1e-10;

pub fn mat2_eig(m: &CMat2) -> Eigen2 {
    let scale = m.max_abs();
    if scale == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return Eigen2 {
            values: [zero, zero],
            vectors: unit_basis(),
            defective: false,
        };
    }
    let mean = (m.m11 + m.m22) * 0.5;
    let half_diff = (m.m11 - m.m22) * 0.5;
    let disc = (half_diff * half_diff + m.m12 * m.m21).sqrt();
    let plus = mean + disc;
    let minus = mean - disc;
    let det = m.det();
    // Take the larger root directly and recover the other from the determinant.
    let (big, small) = if plus.norm() >= minus.norm() {
        (plus, minus)
    } else {
        (minus, plus)
    };
    let small = if big.norm() > 0.0 && small.norm() < 0.5 * big.norm() {
        det / big
    } else {
        small
    };
    let mut values = [big, small];
    if eig_order(values[1], values[0], scale) == Ordering::Less {
        values.swap(0, 1);
    }

    // Scalar matrix: every vector is an eigenvector.
    let off = m.m12.norm().max(m.m21.norm()).max((m.m11 - m.m22).norm());
    if off <= 1e-14 * scale {
        return Eigen2 {
            values,
            vectors: unit_basis(),
            defective: false,
        };
    }

    let v0 = eigenvector_for(m, values[0]);
    if (values[0] - values[1]).norm() <= DEFECT_TOL * scale {
        return Eigen2 {
            values,
            vectors: [v0, v0],
            defective: true,
        };
    }
    let v1 = eigenvector_for(m, values[1]);
    Eigen2 {
        values,
        vectors: [v0, v1],
        defective: false,
    }
}

fn unit_basis() -> [Vec2; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [[one, zero], [zero, one]]
}

/// Descending modulus; moduli within `TIE_TOL` are ordered by ascending phase.
pub fn eig_order(x: Complex64, y: Complex64, scale: f64) -> Ordering {
    let (mx, my) = (x.norm(), y.norm());
    if (mx - my).abs() <= TIE_TOL * scale.max(1.0) {
        phase_of(x).total_cmp(&phase_of(y))
    } else {
        my.total_cmp(&mx)
    }
}

fn eigenvector_for(m: &CMat2, lambda: Complex64) -> Vec2 {
    let a = [m.m12, lambda - m.m11];
    let b = [lambda - m.m22, m.m21];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    if na >= nb {
        [a[0] / na, a[1] / na]
    } else {
        [b[0] / nb, b[1] / nb]
    }
}

/// Singular values `(σ₁, σ₂)` with `σ₁ ≥ σ₂ ≥ 0`.
pub fn mat2_singular_values(m: &CMat2) -> (f64, f64) {
    // Gram matrix entries of M†M.
    let p = m.m11.norm_sqr() + m.m21.norm_sqr();
    let r = m.m12.norm_sqr() + m.m22.norm_sqr();
    let q = m.m11.conj() * m.m12 + m.m21.conj() * m.m22;
    let half = 0.5 * (p - r);
    let root = (half * half + q.norm_sqr()).sqrt();
    let s1 = (0.5 * (p + r) + root).sqrt();
    let d = m.det().norm();
    let s2 = if s1 > 0.0 { d / s1 } else { 0.0 };
    (s1, s2.min(s1))
}
