//! Points of the complex projective line and the determinant distance on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mat2::Vec2;

/// A point of PC² stored as a unit representative whose first non-negligible
/// component is real and positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    v: Vec2,
}

const CANONICAL_TOL: f64 = 1e-14;

impl ProjectivePoint {
    /// Normalizes and phase-fixes `v`. Returns `None` for the zero vector or
    /// non-finite input.
    pub fn new(v: Vec2) -> Option<Self> {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        let u = [v[0] / n, v[1] / n];
        let pivot = if u[0].norm() > CANONICAL_TOL { u[0] } else { u[1] };
        let phase = pivot.conj() / pivot.norm();
        Some(ProjectivePoint {
            v: [u[0] * phase, u[1] * phase],
        })
    }

    pub fn vector(&self) -> Vec2 {
        self.v
    }

    /// δ(x̄, ȳ) = |det(x, y)| / (‖x‖‖y‖).
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        projective_distance(self, other)
    }
}

pub fn projective_distance(x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
    vector_distance(x.v, y.v)
}

/// δ on raw (not necessarily normalized) non-zero vectors.
pub fn vector_distance(x: Vec2, y: Vec2) -> f64 {
    let det = x[0] * y[1] - x[1] * y[0];
    let nx = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    let ny = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
    (det.norm() / (nx * ny)).min(1.0)
}

pub fn unit_phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}
