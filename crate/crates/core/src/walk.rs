//! Time evolution of `W = U·S` on a window that grows with the light cone.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coins::{CoinDistribution, DisorderRealization};
use crate::lattice::Spin;
use crate::numerics::CMat2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("horizon {horizon} is shorter than the largest distance {distance}")]
    InsufficientHorizon { horizon: usize, distance: usize },
    #[error("at least one realization is required")]
    NoRealizations,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes on the sites `x_min ..= x_min + len − 1`, each as `(ψ₋, ψ₊)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    pub x_min: i64,
    pub amplitudes: Vec<[Complex64; 2]>,
    pub time: u64,
}

impl WalkState {
    /// `δ_x ⊗ e_spin`.
    pub fn localized(x: i64, spin: Spin) -> Self {
        let mut v = [ZERO; 2];
        v[spin.component()] = Complex64::new(1.0, 0.0);
        WalkState {
            x_min: x,
            amplitudes: vec![v],
            time: 0,
        }
    }

    /// `δ_x ⊗ (c₋ e₋ + c₊ e₊)`, normalized.
    pub fn localized_spinor(x: i64, spinor: [Complex64; 2]) -> Self {
        let n = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
        WalkState {
            x_min: x,
            amplitudes: vec![[spinor[0] / n, spinor[1] / n]],
            time: 0,
        }
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.amplitudes.len() as i64 - 1
    }

    pub fn get(&self, x: i64, spin: Spin) -> Complex64 {
        if x < self.x_min || x > self.x_max() {
            return ZERO;
        }
        self.amplitudes[(x - self.x_min) as usize][spin.component()]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Position marginal `p(x) = |ψ(x,−)|² + |ψ(x,+)|²` over the window.
    pub fn position_distribution(&self) -> Vec<(i64, f64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, v)| (self.x_min + k as i64, v[0].norm_sqr() + v[1].norm_sqr()))
            .collect()
    }
}

/// `Σ x² p(x) − (Σ x p(x))²`.
pub fn variance(state: &WalkState) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, p) in state.position_distribution() {
        let x = x as f64;
        m1 += x * p;
        m2 += x * x * p;
    }
    m2 - m1 * m1
}

/// Coins of one realization, materialized lazily over a growing interval.
#[derive(Debug, Clone)]
pub struct CoinCache<'a> {
    realization: &'a DisorderRealization,
    lo: i64,
    coins: Vec<CMat2>,
}

impl<'a> CoinCache<'a> {
    pub fn new(realization: &'a DisorderRealization) -> Self {
        CoinCache {
            realization,
            lo: 0,
            coins: Vec::new(),
        }
    }

    /// Makes sure every site in `lo ..= hi` is cached.
    pub fn ensure(&mut self, lo: i64, hi: i64) {
        if self.coins.is_empty() {
            self.lo = lo;
            self.coins = (lo..=hi).map(|x| self.realization.coin_at(x).matrix()).collect();
            return;
        }
        if lo < self.lo {
            let mut front: Vec<CMat2> = (lo..self.lo).map(|x| self.realization.coin_at(x).matrix()).collect();
            front.append(&mut self.coins);
            self.coins = front;
            self.lo = lo;
        }
        let cur_hi = self.lo + self.coins.len() as i64 - 1;
        if hi > cur_hi {
            self.coins.extend((cur_hi + 1..=hi).map(|x| self.realization.coin_at(x).matrix()));
        }
    }

    fn get(&self, x: i64) -> &CMat2 {
        &self.coins[(x - self.lo) as usize]
    }
}

/// Applies one step of `W = U·S` in place. The window grows by one site on
/// each side, which is exactly the reach of a single step.
pub fn step_with(state: &mut WalkState, coins: &mut CoinCache<'_>) {
    let old = &state.amplitudes;
    let x_min = state.x_min - 1;
    let len = old.len() + 2;
    coins.ensure(x_min, x_min + len as i64 - 1);
    let mut out = vec![[ZERO; 2]; len];
    for (k, slot) in out.iter_mut().enumerate() {
        // After the shift the new site k holds ψ(x+1, −) and ψ(x−1, +);
        // in old-window coordinates those are offsets k and k − 2.
        let minus = old.get(k).map_or(ZERO, |v| v[0]);
        let plus = if k >= 2 { old.get(k - 2).map_or(ZERO, |v| v[1]) } else { ZERO };
        let u = coins.get(x_min + k as i64);
        *slot = [u.m11 * minus + u.m12 * plus, u.m21 * minus + u.m22 * plus];
    }
    state.amplitudes = out;
    state.x_min = x_min;
    state.time += 1;
}

/// One step for a caller who does not keep a coin cache.
pub fn step(state: &WalkState, r: &DisorderRealization) -> WalkState {
    let mut s = state.clone();
    let mut cache = CoinCache::new(r);
    step_with(&mut s, &mut cache);
    s
}

/// Evolves `state` by `t` steps.
pub fn evolve(state: &WalkState, r: &DisorderRealization, t: usize) -> WalkState {
    let mut s = state.clone();
    let mut cache = CoinCache::new(r);
    for _ in 0..t {
        step_with(&mut s, &mut cache);
    }
    s
}

/// `⟨δ_y⊗e_j, W^t δ_x⊗e_i⟩`, exactly zero outside the light cone.
pub fn amplitude(r: &DisorderRealization, x: i64, i: Spin, y: i64, j: Spin, t: usize) -> Complex64 {
    if (x - y).unsigned_abs() > t as u64 {
        return ZERO;
    }
    evolve(&WalkState::localized(x, i), r, t).get(y, j)
}

/// `max_{0 ≤ t ≤ T} |⟨δ_y⊗e_j, W^t δ_x⊗e_i⟩|`.
pub fn sup_amplitude(r: &DisorderRealization, x: i64, i: Spin, y: i64, j: Spin, horizon: usize) -> f64 {
    let targets = [(y, j)];
    sup_amplitudes(r, x, i, &targets, horizon)[0]
}

/// Running maxima of several target amplitudes along a single evolution.
pub fn sup_amplitudes(r: &DisorderRealization, x: i64, i: Spin, targets: &[(i64, Spin)], horizon: usize) -> Vec<f64> {
    let mut state = WalkState::localized(x, i);
    let mut cache = CoinCache::new(r);
    let mut sup: Vec<f64> = targets.iter().map(|&(y, j)| state.get(y, j).norm()).collect();
    for _ in 0..horizon {
        step_with(&mut state, &mut cache);
        for (s, &(y, j)) in sup.iter_mut().zip(targets) {
            *s = s.max(state.get(y, j).norm());
        }
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationProfile {
    pub distances: Vec<usize>,
    pub mean_sup_amplitude: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realization_count: usize,
    pub horizon: usize,
}

impl LocalizationProfile {
    /// Least-squares slope of `log(mean_sup_amplitude)` against distance.
    pub fn log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .distances
            .iter()
            .zip(&self.mean_sup_amplitude)
            .filter(|(_, &m)| m > 0.0)
            .map(|(&d, &m)| (d as f64, m.ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}

/// Per-realization observable behind [`localization_profile`]: for each
/// distance `d`, the mean over start spin `i` and over `y = ±d` of
/// `max_j sup_{t ≤ T} |⟨δ_y⊗e_j, W^t δ_0⊗e_i⟩|`.
pub fn realization_profile(r: &DisorderRealization, distances: &[usize], horizon: usize) -> Vec<f64> {
    let mut targets = Vec::with_capacity(distances.len() * 4);
    for &d in distances {
        for y in [d as i64, -(d as i64)] {
            for j in Spin::BOTH {
                targets.push((y, j));
            }
        }
    }
    let mut acc = vec![0.0; distances.len()];
    for i in Spin::BOTH {
        let sup = sup_amplitudes(r, 0, i, &targets, horizon);
        for (k, a) in acc.iter_mut().enumerate() {
            let s = &sup[4 * k..4 * k + 4];
            *a += s[0].max(s[1]) + s[2].max(s[3]);
        }
    }
    acc.iter().map(|a| a / 4.0).collect()
}

/// Monte Carlo estimate of the disorder-averaged finite-horizon localization
/// profile, with the standard error of the mean.
pub fn localization_profile(
    mu: &CoinDistribution,
    distances: &[usize],
    horizon: usize,
    realizations: usize,
    seed: u64,
) -> Result<LocalizationProfile, WalkError> {
    if realizations == 0 {
        return Err(WalkError::NoRealizations);
    }
    if let Some(&dmax) = distances.iter().max() {
        if horizon < dmax {
            return Err(WalkError::InsufficientHorizon { horizon, distance: dmax });
        }
    }
    let rows: Vec<Vec<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|k| realization_profile(&DisorderRealization::nth(mu, seed, k), distances, horizon))
        .collect();
    let m = realizations as f64;
    let mut mean = vec![0.0; distances.len()];
    let mut stderr = vec![0.0; distances.len()];
    for (d, (mu_d, se)) in mean.iter_mut().zip(stderr.iter_mut()).enumerate() {
        *mu_d = rows.iter().map(|r| r[d]).sum::<f64>() / m;
        if realizations > 1 {
            let var = rows.iter().map(|r| (r[d] - *mu_d).powi(2)).sum::<f64>() / (m - 1.0);
            *se = (var / m).sqrt();
        }
    }
    Ok(LocalizationProfile {
        distances: distances.to_vec(),
        mean_sup_amplitude: mean,
        stderr,
        realization_count: realizations,
        horizon,
    })
}
