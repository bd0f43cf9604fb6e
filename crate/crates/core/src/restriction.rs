//! The finite unitary restriction `W(N)` with reflecting boundaries.
//!
//! Sites `−N ..= N` keep their coins. The coins at `±(N+1)` are replaced by
//! the phased flips `e^{iη_{L,R}}·σ_x`, which decouples the f-indices
//! `−2N−1 ..= 2N+2` from the rest of the lattice. The resulting matrix is
//! unitary of dimension `4(N+1)` and pentadiagonal.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coins::{DisorderRealization, UnitaryCoin};
use crate::lattice::{self, Spin};
use crate::numerics::{phase_of, unitarity_residual, unitary_eig, NumericsError, UnitaryEigen};

/// Eigenvalues whose phases differ by less than this are one spectral point.
pub const MERGE_GAP: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RestrictionError {
    #[error("site ({site}, {spin}) is not retained by W({n})")]
    SiteOutOfRange { site: i64, spin: Spin, n: usize },
    #[error("expected {expected} coins for half-width {n}, got {got}")]
    CoinCount { n: usize, expected: usize, got: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub struct FiniteWalk {
    n: usize,
    eta_l: f64,
    eta_r: f64,
    coins: Vec<UnitaryCoin>,
    matrix: DMatrix<Complex64>,
    spectrum: OnceLock<UnitaryEigen>,
}

impl std::fmt::Debug for FiniteWalk {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteWalk")
            .field("n", &self.n)
            .field("eta_l", &self.eta_l)
            .field("eta_r", &self.eta_r)
            .finish_non_exhaustive()
    }
}

impl Clone for FiniteWalk {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        FiniteWalk {
            n: self.n,
            eta_l: self.eta_l,
            eta_r: self.eta_r,
            coins: self.coins.clone(),
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

/// `W(N)` for the coins of `r` on `−N ..= N`.
pub fn build_finite_walk(r: &DisorderRealization, n: usize, eta_l: f64, eta_r: f64) -> FiniteWalk {
    let coins = r.coins(-(n as i64), n as i64);
    FiniteWalk::from_coins(n, coins, eta_l, eta_r).expect("coin count matches by construction")
}

impl FiniteWalk {
    /// `coins[k]` is the coin at site `k − N`.
    pub fn from_coins(n: usize, coins: Vec<UnitaryCoin>, eta_l: f64, eta_r: f64) -> Result<Self, RestrictionError> {
        let expected = 2 * n + 1;
        if coins.len() != expected {
            return Err(RestrictionError::CoinCount {
                n,
                expected,
                got: coins.len(),
            });
        }
        let dim = lattice::restriction_dim(n);
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        let ni = n as i64;
        let left = UnitaryCoin::pauli_x().with_phase(eta_l);
        let right = UnitaryCoin::pauli_x().with_phase(eta_r);
        let coin = |x: i64| -> UnitaryCoin {
            if x == -ni - 1 {
                left
            } else if x == ni + 1 {
                right
            } else {
                coins[(x + ni) as usize]
            }
        };
        let mut put = |row_f: i64, col_f: i64, v: Complex64| {
            if let (Some(r), Some(c)) = (lattice::matrix_offset(n, row_f), lattice::matrix_offset(n, col_f)) {
                matrix[(r, c)] = v;
            }
        };
        for col in 0..dim {
            let f = lattice::offset_to_f(n, col);
            let (x, spin) = lattice::site_spin(f);
            match spin {
                // δ_x⊗e₋ moves to x−1 where the coin's first column acts.
                Spin::Minus => {
                    let u = coin(x - 1);
                    put(f - 2, f, u.a());
                    put(f - 1, f, u.c());
                }
                // δ_x⊗e₊ moves to x+1 where the coin's second column acts.
                Spin::Plus => {
                    let u = coin(x + 1);
                    put(f + 1, f, u.b());
                    put(f + 2, f, u.d());
                }
            }
        }
        Ok(FiniteWalk {
            n,
            eta_l,
            eta_r,
            coins,
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn eta(&self) -> (f64, f64) {
        (self.eta_l, self.eta_r)
    }
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
    pub fn coins(&self) -> &[UnitaryCoin] {
        &self.coins
    }

    /// Coin at site `x ∈ −N ..= N`.
    pub fn coin(&self, x: i64) -> UnitaryCoin {
        self.coins[(x + self.n as i64) as usize]
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn offset(&self, site: i64, spin: Spin) -> Result<usize, RestrictionError> {
        lattice::matrix_offset(self.n, lattice::f_index(site, spin)).ok_or(RestrictionError::SiteOutOfRange { site, spin, n: self.n })
    }

    /// Full eigendecomposition, computed on first use.
    pub fn spectrum(&self) -> Result<&UnitaryEigen, NumericsError> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = unitary_eig(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Eigenvalues, ascending in phase, from the cached decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, NumericsError> {
        Ok(self.spectrum()?.values.clone())
    }

    /// Eigenphases in `[0, 2π)`, ascending.
    pub fn eigenphases(&self) -> Result<Vec<f64>, NumericsError> {
        Ok(self.eigenvalues()?.into_iter().map(phase_of).collect())
    }

    /// `(W(N) − z)⁻¹` by LU, or `None` if numerically singular.
    pub fn resolvent(&self, z: Complex64) -> Option<DMatrix<Complex64>> {
        let d = self.dim();
        let shifted = &self.matrix - DMatrix::<Complex64>::identity(d, d) * z;
        shifted.lu().try_inverse()
    }

    /// Distance from `z` to the spectrum.
    pub fn spectral_distance(&self, z: Complex64) -> Result<f64, NumericsError> {
        Ok(self.eigenvalues()?.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min))
    }

    /// Participation ratio `1 / Σ_f |v(f)|⁴` of every eigenvector, in the
    /// order of the sorted eigenvalues.
    pub fn participation_ratios(&self) -> Result<Vec<f64>, NumericsError> {
        let s = self.spectrum()?;
        Ok(s.vectors
            .column_iter()
            .map(|c| 1.0 / c.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>())
            .collect())
    }
}

/// A finitely supported complex measure on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// `(point, mass)` pairs with pairwise distinct points.
    pub points: Vec<(Complex64, Complex64)>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> Complex64 {
        self.points.iter().map(|p| p.1).sum()
    }

    /// `ρ̂(t) = Σ λ^t ρ({λ})`.
    pub fn moment(&self, t: u32) -> Complex64 {
        self.points.iter().map(|(l, m)| l.powu(t) * m).sum()
    }

    pub fn sum_squared_masses(&self) -> f64 {
        self.points.iter().map(|p| p.1.norm_sqr()).sum()
    }
}

/// Spectral measure `ρ^{x,y}` with `ρ({λ}) = ⟨δ_y⊗e_j, P_λ δ_x⊗e_i⟩`.
pub fn spectral_measure(fw: &FiniteWalk, x: i64, i: Spin, y: i64, j: Spin) -> Result<SpectralMeasure, RestrictionError> {
    let p = fw.offset(x, i)?;
    let q = fw.offset(y, j)?;
    let s = fw.spectrum()?;
    let d = s.values.len();
    let mut points: Vec<(Complex64, Complex64)> = Vec::with_capacity(d);
    let mut phases: Vec<f64> = Vec::with_capacity(d);
    for k in 0..d {
        let mass = s.vectors[(q, k)] * s.vectors[(p, k)].conj();
        let ph = phase_of(s.values[k]);
        match phases.last() {
            Some(&last) if ph - last < MERGE_GAP => {
                points.last_mut().expect("non-empty").1 += mass;
            }
            _ => {
                points.push((s.values[k], mass));
                phases.push(ph);
            }
        }
    }
    // The phase ordering starts at 0, so the last cluster may wrap onto the first.
    if points.len() > 1 && phases[0] + std::f64::consts::TAU - phases[phases.len() - 1] < MERGE_GAP {
        let (_, m) = points.pop().expect("len > 1");
        points[0].1 += m;
    }
    Ok(SpectralMeasure { points })
}

/// `((1/(T+1)) Σ_{t=0}^{T} |ρ̂(t)|², Σ_λ |ρ({λ})|²)`.
pub fn wiener_average(fw: &FiniteWalk, x: i64, i: Spin, y: i64, j: Spin, horizon: u32) -> Result<(f64, f64), RestrictionError> {
    let rho = spectral_measure(fw, x, i, y, j)?;
    Ok(wiener_average_of(&rho, horizon))
}

pub fn wiener_average_of(rho: &SpectralMeasure, horizon: u32) -> (f64, f64) {
    // Running powers λ^t; unit-modulus drift over 10⁵ steps stays at rounding level.
    let mut terms: Vec<(Complex64, Complex64)> = rho.points.iter().map(|&(l, m)| (l / l.norm(), m)).collect();
    let mut acc = 0.0;
    for _ in 0..=horizon {
        let s: Complex64 = terms.iter().map(|t| t.1).sum();
        acc += s.norm_sqr();
        for t in terms.iter_mut() {
            t.1 *= t.0;
        }
    }
    (acc / (horizon as f64 + 1.0), rho.sum_squared_masses())
}

/// Envelope `max_spin |φ(x, spin)|` of every eigenvector over the sites
/// `−N−1 ..= N+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub sites: Vec<i64>,
    pub eigenphases: Vec<f64>,
    /// `envelopes[k][s]` belongs to eigenvector `k` at `sites[s]`.
    pub envelopes: Vec<Vec<f64>>,
    /// Index into `sites` of each eigenvector's maximum.
    pub peaks: Vec<usize>,
}

impl DecayTable {
    /// `max(env(peak − d), env(peak + d)) / env(peak)` for each eigenvector,
    /// skipping eigenvectors for which both sites lie outside the window.
    pub fn relative_envelope(&self, distance: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (env, &p) in self.envelopes.iter().zip(&self.peaks) {
            let lo = p.checked_sub(distance).map(|k| env[k]);
            let hi = env.get(p + distance).copied();
            let v = match (lo, hi) {
                (Some(a), Some(b)) => a.max(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => continue,
            };
            out.push(v / env[p]);
        }
        out
    }
}

pub fn eigenfunction_decay(fw: &FiniteWalk) -> Result<DecayTable, NumericsError> {
    let s = fw.spectrum()?;
    let n = fw.n as i64;
    let sites: Vec<i64> = (-n - 1..=n + 1).collect();
    let mut envelopes = Vec::with_capacity(s.values.len());
    let mut peaks = Vec::with_capacity(s.values.len());
    for col in s.vectors.column_iter() {
        let env: Vec<f64> = sites
            .iter()
            .map(|&x| {
                Spin::BOTH
                    .iter()
                    .filter_map(|&sp| lattice::matrix_offset(fw.n, lattice::f_index(x, sp)))
                    .map(|k| col[k].norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        let peak = env
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        envelopes.push(env);
        peaks.push(peak);
    }
    Ok(DecayTable {
        sites,
        eigenphases: s.values.iter().map(|&v| phase_of(v)).collect(),
        envelopes,
        peaks,
    })
}
