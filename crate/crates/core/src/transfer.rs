//! Transfer matrices `τ_z(U)` and what is built from them.
//!
//! In the f-index convention a generalized eigenfunction `(W − z)φ = 0` is
//! carried from `Γ_x = (φ(2x−1), φ(2x))` to `Γ_{x+1}` by
//!
//! ```text
//! τ_z(U_x) = (1/a) · ( det U / z    c )
//!                    (    −b        z )
//! ```
//!
//! The finite restriction fixes the boundary data `Γ_{−N} ∝ (e^{iη_L}, z)`
//! and `Γ_{N+1} ∝ (z, e^{iη_R})`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coins::{DisorderRealization, UnitaryCoin, COIN_TOL, FLIP_TOL};
use crate::lattice::{self, hat};
use crate::numerics::{vec2_norm, CMat2, NumericsError, Vec2};
use crate::restriction::FiniteWalk;

/// Products are renormalized after this many factors.
pub const RESCALE_EVERY: usize = 32;
const CIRCLE_TOL: f64 = 1e-12;
const CORNER_TOL: f64 = 1e-14;
/// Smallest admissible distance from `z` to the spectrum of `W(N)`.
pub const NEAR_SPECTRUM: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("coin at site {site} is a flip (|a| ≤ 1e-14); no transfer matrix exists")]
    FlipCoin { site: i64 },
    #[error("transfer matrix has a vanishing lower-right entry")]
    SingularCorner,
    #[error("the spectral parameter must be non-zero")]
    ZeroSpectralParameter,
    #[error("|z| = {modulus} is not on the unit circle")]
    OffCircle { modulus: f64 },
    #[error("z lies within {distance:.3e} of the spectrum")]
    NearSpectrum { distance: f64 },
    #[error("f-index {index} is outside the restriction window")]
    IndexOutOfRange { index: i64 },
    #[error("matrix is not in the image of τ_z (unitarity residual {residual:.3e})")]
    NotInImage { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `τ_z(U)` together with its spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m: CMat2,
    pub z: Complex64,
}

impl TransferMatrix {
    pub fn inverse(&self) -> CMat2 {
        self.m.inverse().expect("|det τ| = 1")
    }
}

pub fn tau(u: &UnitaryCoin, z: Complex64) -> Result<TransferMatrix, TransferError> {
    tau_at(u, z, 0)
}

fn tau_at(u: &UnitaryCoin, z: Complex64, site: i64) -> Result<TransferMatrix, TransferError> {
    if z.norm() == 0.0 {
        return Err(TransferError::ZeroSpectralParameter);
    }
    let a = u.a();
    if a.norm() <= FLIP_TOL {
        return Err(TransferError::FlipCoin { site });
    }
    let ia = a.inv();
    let m = CMat2::new(u.det() / z * ia, u.c() * ia, -u.b() * ia, z * ia);
    Ok(TransferMatrix { m, z })
}

/// `τ_z⁻¹` applied to an arbitrary matrix `((v, w), (x, y))`:
/// `(z/y)·((1, −x), (w, vy − xw))`.
pub fn tau_inv_matrix(t: &CMat2, z: Complex64) -> Result<CMat2, TransferError> {
    let (v, w, x, y) = (t.m11, t.m12, t.m21, t.m22);
    if y.norm() <= CORNER_TOL {
        return Err(TransferError::SingularCorner);
    }
    let s = z / y;
    Ok(CMat2::new(s, -x * s, w * s, (v * y - x * w) * s))
}

/// The coin `U` with `τ_z(U) = T`.
pub fn tau_inv(t: &TransferMatrix) -> Result<UnitaryCoin, TransferError> {
    let m = tau_inv_matrix(&t.m, t.z)?;
    UnitaryCoin::new(m).map_err(|_| TransferError::NotInImage {
        residual: (m.adjoint() * m - CMat2::identity()).frobenius(),
    })
}

/// Coordinates of `τ_z(U)` in the image parametrization
///
/// ```text
/// ( √(1+r²) e^{iα} / |z|     r e^{iβ}                 )
/// ( r e^{iγ}                 √(1+r²) e^{i(β+γ−α)} |z| )
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageParams {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ImageParams {
    pub fn matrix(&self, z_abs: f64) -> CMat2 {
        let s = (1.0 + self.r * self.r).sqrt();
        CMat2::new(
            Complex64::from_polar(s / z_abs, self.alpha),
            Complex64::from_polar(self.r, self.beta),
            Complex64::from_polar(self.r, self.gamma),
            Complex64::from_polar(s * z_abs, self.beta + self.gamma - self.alpha),
        )
    }
}

/// Reads `(r, α, β, γ)` off `T`, and reports how far `T` is from the
/// parametrized matrix built from them (zero for genuine transfer matrices).
pub fn image_parameters(t: &TransferMatrix) -> (ImageParams, f64) {
    let p = ImageParams {
        r: 0.5 * (t.m.m12.norm() + t.m.m21.norm()),
        alpha: t.m.m11.arg(),
        beta: t.m.m12.arg(),
        gamma: t.m.m21.arg(),
    };
    let dev = (p.matrix(t.z.norm()) - t.m).max_abs();
    (p, dev)
}

/// A product of transfer matrices stored as `matrix · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProduct {
    pub matrix: CMat2,
    pub log_scale: f64,
    pending: usize,
}

impl Default for ScaledProduct {
    fn default() -> Self {
        ScaledProduct {
            matrix: CMat2::identity(),
            log_scale: 0.0,
            pending: 0,
        }
    }
}

impl ScaledProduct {
    /// Replaces the product `P` by `M·P`.
    pub fn push(&mut self, m: &CMat2) {
        self.matrix = *m * self.matrix;
        self.pending += 1;
        if self.pending >= RESCALE_EVERY {
            self.rescale();
        }
    }

    pub fn rescale(&mut self) {
        let s = self.matrix.max_abs();
        if s > 0.0 && s.is_finite() {
            self.matrix = self.matrix.scale_real(1.0 / s);
            self.log_scale += s.ln();
        }
        self.pending = 0;
    }

    pub fn value(&self) -> CMat2 {
        self.matrix.scale_real(self.log_scale.exp())
    }

    /// `log ‖P‖`.
    pub fn log_norm(&self) -> f64 {
        self.matrix.norm().ln() + self.log_scale
    }

    /// `|det P|`, which is 1 up to rounding for transfer matrices.
    pub fn abs_det(&self) -> f64 {
        (self.matrix.det().norm().ln() + 2.0 * self.log_scale).exp()
    }
}

/// `T_y(z) ⋯ T_x(z)` with periodic renormalization; identity if `y < x`.
pub fn transfer_product_scaled(r: &DisorderRealization, z: Complex64, x: i64, y: i64) -> Result<ScaledProduct, TransferError> {
    let mut p = ScaledProduct::default();
    for site in x..=y {
        p.push(&tau_at(&r.coin_at(site), z, site)?.m);
    }
    p.rescale();
    Ok(p)
}

/// `T_y(z) ⋯ T_x(z)` as a plain matrix.
pub fn transfer_product(r: &DisorderRealization, z: Complex64, x: i64, y: i64) -> Result<CMat2, TransferError> {
    Ok(transfer_product_scaled(r, z, x, y)?.value())
}

/// A vector of the plane `Π = {|v₁| = |v₂|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneVector {
    v: Vec2,
}

/// `||v₁| − |v₂|| / ‖v‖`, the scale-free distance of `v` from `Π`.
pub fn plane_residual(v: Vec2) -> f64 {
    (v[0].norm() - v[1].norm()).abs() / vec2_norm(v)
}

impl PlaneVector {
    pub fn new(v: Vec2) -> Option<Self> {
        (vec2_norm(v) > 0.0 && plane_residual(v) <= 1e-12).then_some(PlaneVector { v })
    }

    /// `(e^{iφ₁}, e^{iφ₂}) / √2`.
    pub fn from_phases(phi1: f64, phi2: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PlaneVector {
            v: [Complex64::from_polar(s, phi1), Complex64::from_polar(s, phi2)],
        }
    }

    pub fn vector(&self) -> Vec2 {
        self.v
    }
}

/// Image of a plane vector under a unit-circle transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneImage {
    /// `T·v / ‖T·v‖`.
    pub image: Vec2,
    pub residual: f64,
}

/// Applies `T` to `v` and measures how far the image is from `Π`.
pub fn plane_check(t: &TransferMatrix, v: &PlaneVector) -> Result<PlaneImage, TransferError> {
    let modulus = t.z.norm();
    if (modulus - 1.0).abs() > CIRCLE_TOL {
        return Err(TransferError::OffCircle { modulus });
    }
    let w = t.m.apply(v.v);
    let n = vec2_norm(w);
    let image = [w[0] / n, w[1] / n];
    Ok(PlaneImage {
        image,
        residual: plane_residual(image),
    })
}

/// Boundary-compatible solutions of `(W(N) − z)φ = 0` away from the
/// opposite boundary.
///
/// `left[k]` holds `Γ⁻_{k−N}` normalized to unit length with `left_log[k]`
/// the accumulated log of the discarded scale; likewise for `right`.
#[derive(Debug, Clone)]
pub struct CompatibleSolutions {
    n: usize,
    pub z: Complex64,
    transfers: Vec<CMat2>,
    left: Vec<Vec2>,
    left_log: Vec<f64>,
    right: Vec<Vec2>,
    right_log: Vec<f64>,
}

fn normalize(v: Vec2) -> (Vec2, f64) {
    let n = vec2_norm(v);
    ([v[0] / n, v[1] / n], n.ln())
}

impl CompatibleSolutions {
    pub fn new(fw: &FiniteWalk, z: Complex64) -> Result<Self, TransferError> {
        let n = fw.n();
        let ni = n as i64;
        let (eta_l, eta_r) = fw.eta();
        let mut transfers = Vec::with_capacity(2 * n + 1);
        for x in -ni..=ni {
            transfers.push(tau_at(&fw.coin(x), z, x)?.m);
        }
        let len = 2 * n + 2;
        let mut left = Vec::with_capacity(len);
        let mut left_log = Vec::with_capacity(len);
        let (v, l) = normalize([Complex64::from_polar(1.0, eta_l), z]);
        left.push(v);
        left_log.push(l);
        for t in &transfers {
            let (v, l) = normalize(t.apply(*left.last().expect("non-empty")));
            left.push(v);
            left_log.push(l + left_log.last().expect("non-empty"));
        }
        let mut right = vec![[Complex64::new(0.0, 0.0); 2]; len];
        let mut right_log = vec![0.0; len];
        let (v, l) = normalize([z, Complex64::from_polar(1.0, eta_r)]);
        right[len - 1] = v;
        right_log[len - 1] = l;
        for k in (0..len - 1).rev() {
            let inv = transfers[k].inverse().ok_or(TransferError::SingularCorner)?;
            let (v, l) = normalize(inv.apply(right[k + 1]));
            right[k] = v;
            right_log[k] = l + right_log[k + 1];
        }
        Ok(CompatibleSolutions {
            n,
            z,
            transfers,
            left,
            left_log,
            right,
            right_log,
        })
    }

    fn block(&self, x: i64) -> usize {
        (x + self.n as i64) as usize
    }

    /// `T_x(z)` for `x ∈ −N ..= N`.
    pub fn transfer(&self, x: i64) -> CMat2 {
        self.transfers[self.block(x)]
    }

    /// `Γ⁻_x` up to the positive factor `e^{log}`, for `x ∈ −N ..= N+1`.
    pub fn left_block(&self, x: i64) -> (Vec2, f64) {
        let k = self.block(x);
        (self.left[k], self.left_log[k])
    }

    pub fn right_block(&self, x: i64) -> (Vec2, f64) {
        let k = self.block(x);
        (self.right[k], self.right_log[k])
    }

    /// `φ(f)` as (mantissa, log scale); `f = 2x−1` and `f = 2x` live in `Γ_x`.
    fn value(&self, left: bool, f: i64) -> (Complex64, f64) {
        let x = (f + 1).div_euclid(2);
        let comp = usize::from(f.rem_euclid(2) == 0);
        let (v, l) = if left { self.left_block(x) } else { self.right_block(x) };
        (v[comp], l)
    }

    /// `|det B_x|` with `B_x = (Γ⁻_x | Γ⁺_x)`, as a log. It does not depend
    /// on `x` because `|det T| = 1`.
    fn log_wronskian(&self, x: i64) -> f64 {
        let (l, ll) = self.left_block(x);
        let (r, rl) = self.right_block(x);
        (l[0] * r[1] - l[1] * r[0]).norm().ln() + ll + rl
    }

    /// `|(W(N) − z)⁻¹(n, m)|` from the compatible solutions.
    pub fn resolvent_modulus(&self, n: i64, m: i64) -> Result<f64, TransferError> {
        for idx in [n, m] {
            if lattice::matrix_offset(self.n, idx).is_none() {
                return Err(TransferError::IndexOutOfRange { index: idx });
            }
        }
        let y = m.div_euclid(2);
        // The jump sits between Γ_y and Γ_{y+1}; B is taken on the side of m̂.
        let b_site = if m.rem_euclid(2) == 0 { y } else { y + 1 };
        let (near, far) = if n <= 2 * y { (true, false) } else { (false, true) };
        let (pn, ln) = self.value(near, n);
        let (pm, lm) = self.value(far, hat(m));
        let log = pn.norm().ln() + pm.norm().ln() + ln + lm - self.z.norm().ln() - self.log_wronskian(b_site);
        Ok(log.exp())
    }
}

/// `|(W(N) − z)⁻¹(n, m)|` for f-indices `n, m` computed from transfer matrices.
pub fn resolvent_entry_via_transfer(fw: &FiniteWalk, z: Complex64, n: i64, m: i64) -> Result<f64, TransferError> {
    let distance = fw.spectral_distance(z)?;
    if distance <= NEAR_SPECTRUM {
        return Err(TransferError::NearSpectrum { distance });
    }
    CompatibleSolutions::new(fw, z)?.resolvent_modulus(n, m)
}

/// Normalized boundary vectors and the transfer word for
/// `|(W(N) − z)⁻¹(2x, 2y−1)| = ½ |⟨Φ₊, M Φ₋⟩|⁻¹` on the unit circle.
///
/// For `x < y` the word is `M = T_{y−1} ⋯ T_x`, `Φ₋` comes from `Γ⁻_x` and
/// `Φ₊` from `Γ⁺_y`. For `x ≥ y` the roles swap and
/// `M = T_y⁻¹ ⋯ T_{x−1}⁻¹`, starting from `Γ⁺_x` and pairing with `Γ⁻_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub phi_minus: Vec2,
    pub phi_plus: Vec2,
    pub word: CMat2,
    pub value: f64,
}

/// `u ↦ ⟨Φ, u⟩ ∝ det(Γ, u)` realized by `Φ = (−conj Γ₂, conj Γ₁)`.
fn dual(g: Vec2) -> Vec2 {
    [-g[1].conj(), g[0].conj()]
}

pub fn resolvent_decomposition(sol: &CompatibleSolutions, x: i64, y: i64) -> Result<Decomposition, TransferError> {
    let modulus = sol.z.norm();
    if (modulus - 1.0).abs() > CIRCLE_TOL {
        return Err(TransferError::OffCircle { modulus });
    }
    let ni = sol.n as i64;
    for s in [x, y] {
        if !(-ni..=ni + 1).contains(&s) {
            return Err(TransferError::IndexOutOfRange { index: 2 * s });
        }
    }
    let unit = |v: Vec2| -> Vec2 {
        let n = vec2_norm(v);
        [v[0] / n, v[1] / n]
    };
    let (start, end, word) = if x < y {
        let mut w = CMat2::identity();
        for k in x..y {
            w = sol.transfer(k) * w;
        }
        (sol.left_block(x).0, sol.right_block(y).0, w)
    } else {
        let mut w = CMat2::identity();
        for k in (y..x).rev() {
            w = sol.transfer(k).inverse().ok_or(TransferError::SingularCorner)? * w;
        }
        (sol.right_block(x).0, sol.left_block(y).0, w)
    };
    // On the unit circle both Γ lie in Π, so their unit representatives
    // carry |component| = 1/√2.
    let phi_minus = unit(start);
    let phi_plus = unit(dual(end));
    let image = word.apply(phi_minus);
    let inner = phi_plus[0].conj() * image[0] + phi_plus[1].conj() * image[1];
    Ok(Decomposition {
        phi_minus,
        phi_plus,
        word,
        value: 0.5 / inner.norm(),
    })
}

/// `T_N ⋯ T_{−N} (1, z e^{−iη_L})` as (unit vector, log scale).
fn left_sweep(fw: &FiniteWalk, z: Complex64) -> Result<(Vec2, f64), TransferError> {
    let ni = fw.n() as i64;
    let (eta_l, _) = fw.eta();
    let (mut v, mut log) = normalize([Complex64::new(1.0, 0.0), z * Complex64::from_polar(1.0, -eta_l)]);
    for x in -ni..=ni {
        let (w, l) = normalize(tau_at(&fw.coin(x), z, x)?.m.apply(v));
        v = w;
        log += l;
    }
    Ok((v, log))
}

/// `p_N(z) = z^{2N+1} (−Γ₁ + z e^{−iη_R} Γ₂)` with
/// `Γ = T_N ⋯ T_{−N}(1, z e^{−iη_L})`. Its zeros are the eigenvalues of `W(N)`.
pub fn spectral_polynomial_eval(fw: &FiniteWalk, z: Complex64) -> Result<Complex64, TransferError> {
    let (mant, log) = spectral_polynomial_scaled(fw, z)?;
    Ok(mant * log.exp())
}

/// `p_N(z)` as `mantissa · e^{log}` to survive long chains.
pub fn spectral_polynomial_scaled(fw: &FiniteWalk, z: Complex64) -> Result<(Complex64, f64), TransferError> {
    let (_, eta_r) = fw.eta();
    let (g, log) = left_sweep(fw, z)?;
    let inner = -g[0] + z * Complex64::from_polar(1.0, -eta_r) * g[1];
    let power = (2 * fw.n() + 1) as i32;
    let zp = z / z.norm();
    Ok((inner * zp.powi(power), log + power as f64 * z.norm().ln()))
}

/// `C_N = e^{−i(η_L+η_R)} / ∏ a_l`, the coefficient of `z^{4(N+1)}` in `p_N`.
pub fn leading_coefficient(fw: &FiniteWalk) -> Result<Complex64, TransferError> {
    let (eta_l, eta_r) = fw.eta();
    let ni = fw.n() as i64;
    let mut prod = Complex64::new(1.0, 0.0);
    for x in -ni..=ni {
        let a = fw.coin(x).a();
        if a.norm() <= FLIP_TOL {
            return Err(TransferError::FlipCoin { site: x });
        }
        prod *= a;
    }
    Ok(Complex64::from_polar(1.0, -(eta_l + eta_r)) / prod)
}

/// Number of zeros of `p_N` inside `|z| < radius`, by the argument principle
/// sampled at `samples` points.
pub fn spectral_polynomial_winding(fw: &FiniteWalk, radius: f64, samples: usize) -> Result<i64, TransferError> {
    let mut total = 0.0;
    let arg = |k: usize| -> Result<f64, TransferError> {
        let z = Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / samples as f64);
        Ok(spectral_polynomial_scaled(fw, z)?.0.arg())
    };
    let first = arg(0)?;
    let mut prev = first;
    for k in 1..=samples {
        let cur = if k == samples { first } else { arg(k)? };
        let mut d = cur - prev;
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
        prev = cur;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

/// `‖τ_θ(U)‖ ≤ 2/|a|` on the unit circle; returns the bound.
pub fn norm_bound(u: &UnitaryCoin) -> f64 {
    2.0 / u.a().norm()
}

/// Checks `τ(τ⁻¹(T)) = T` and returns the deviation, for diagnostics.
pub fn roundtrip_deviation(u: &UnitaryCoin, z: Complex64) -> Result<f64, TransferError> {
    let t = tau(u, z)?;
    let back = tau_inv(&t)?;
    debug_assert!(back.unitarity_residual() <= COIN_TOL);
    Ok((back.matrix() - u.matrix()).max_abs())
}
