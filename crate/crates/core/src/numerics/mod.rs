//! Exact-size complex linear algebra used throughout the crate.

mod dense;
mod mat2;
mod projective;
pub mod quadrature;

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

pub use dense::{unitarity_residual, unitary_eig, unitary_eigvals, UnitaryEigen, MAX_DIM, UNITARY_TOL};
pub use mat2::{eig_order, mat2_eig, mat2_singular_values, CMat2, Eigen2, Vec2};
pub use projective::{projective_distance, unit_phase, vector_distance, ProjectivePoint};

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not unitary: ‖M†M − I‖_F = {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the dense solver limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

/// Argument of `z` mapped into `[0, 2π)`.
pub fn phase_of(z: Complex64) -> f64 {
    let p = z.arg();
    let p = if p < 0.0 { p + TAU } else { p };
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Euclidean norm of a C² vector.
pub fn vec2_norm(v: Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn vec2_scale(v: Vec2, s: f64) -> Vec2 {
    [v[0] * s, v[1] * s]
}

/// ⟨u, v⟩, antilinear in the first slot.
pub fn vec2_dot(u: Vec2, v: Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}
