//! Lyapunov exponents of random transfer-matrix products, invariant
//! measures on the projective line, density of states and the Thouless
//! relation between them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coins::{substream, CoinDistribution, DisorderRealization, UnitaryCoin};
use crate::numerics::{phase_of, unitary_eigvals, vec2_norm, CMat2, NumericsError, ProjectivePoint, Vec2};
use crate::restriction::build_finite_walk;
use crate::transfer::{tau, TransferError, RESCALE_EVERY};

pub const MIN_CHAIN: usize = 1000;
pub const DEFAULT_BINS: usize = 512;
/// Offsets from the unit circle used to extrapolate the Thouless right side.
pub const THOULESS_EPS: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Error)]
pub enum LyapunovError {
    #[error("a flip coin was drawn at step {step}; the transfer product is undefined")]
    FlipEncountered { step: usize },
    #[error("the coin law has reflectivity {0} > 0")]
    Reflective(f64),
    #[error("chain length {0} is below the minimum {MIN_CHAIN}")]
    ChainTooShort(usize),
    #[error("{0} must be positive")]
    Empty(&'static str),
    #[error("the DOS needs N ≥ 4, got {0}")]
    SmallRestriction(usize),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn transfer_of(u: &UnitaryCoin, z: Complex64, step: usize) -> Result<CMat2, LyapunovError> {
    if u.is_flip() {
        return Err(LyapunovError::FlipEncountered { step });
    }
    Ok(tau(u, z)?.m)
}

fn unit(v: Vec2) -> (Vec2, f64) {
    let n = vec2_norm(v);
    ([v[0] / n, v[1] / n], n)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub z: Complex64,
    pub gamma_hat: f64,
    pub stderr: f64,
    pub chain_length: usize,
    pub realizations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Multiplications between renormalizations.
    pub chunk: usize,
    pub start: Vec2,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            chunk: RESCALE_EVERY,
            start: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }
}

/// `(1/n) log ‖T_n ⋯ T_1 v‖ / ‖v‖` along one chain drawn from `rng`.
pub fn chain_growth(mu: &CoinDistribution, z: Complex64, n: usize, rng: &mut ChaCha8Rng, opts: &ChainOptions) -> Result<f64, LyapunovError> {
    let (mut v, _) = unit(opts.start);
    let mut log = 0.0;
    let chunk = opts.chunk.max(1);
    for step in 0..n {
        let t = transfer_of(&mu.sample(rng), z, step)?;
        v = t.apply(v);
        if (step + 1) % chunk == 0 {
            let (w, s) = unit(v);
            v = w;
            log += s.ln();
        }
    }
    log += vec2_norm(v).ln();
    Ok(log / n as f64)
}

/// Mean of the per-chain growth rate over `realizations` independent chains.
/// Chain `k` uses the same random stream for every `z`.
pub fn estimate_lyapunov_with(
    mu: &CoinDistribution,
    z: Complex64,
    chain_length: usize,
    realizations: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<LyapunovEstimate, LyapunovError> {
    let p = mu.reflectivity();
    if p > 0.0 {
        return Err(LyapunovError::Reflective(p));
    }
    if chain_length < MIN_CHAIN {
        return Err(LyapunovError::ChainTooShort(chain_length));
    }
    if realizations == 0 {
        return Err(LyapunovError::Empty("realizations"));
    }
    let rates: Vec<f64> = (0..realizations as u64)
        .into_par_iter()
        .map(|k| chain_growth(mu, z, chain_length, &mut substream(seed, "chain", k), opts))
        .collect::<Result<_, _>>()?;
    let (gamma_hat, stderr) = mean_stderr(&rates);
    Ok(LyapunovEstimate {
        z,
        gamma_hat,
        stderr,
        chain_length,
        realizations,
    })
}

pub fn estimate_lyapunov(mu: &CoinDistribution, z: Complex64, chain_length: usize, realizations: usize, seed: u64) -> Result<LyapunovEstimate, LyapunovError> {
    estimate_lyapunov_with(mu, z, chain_length, realizations, seed, &ChainOptions::default())
}

/// Directions `T_k ⋯ T_1 v₀` for `k = burn_in+1 ..= burn_in+samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSample {
    pub z: Complex64,
    pub points: Vec<ProjectivePoint>,
}

pub fn invariant_measure_sample(mu: &CoinDistribution, z: Complex64, burn_in: usize, samples: usize, seed: u64) -> Result<InvariantSample, LyapunovError> {
    let p = mu.reflectivity();
    if p > 0.0 {
        return Err(LyapunovError::Reflective(p));
    }
    let mut rng = substream(seed, "invariant", 0);
    let mut v: Vec2 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut points = Vec::with_capacity(samples);
    for step in 0..burn_in + samples {
        v = unit(transfer_of(&mu.sample(&mut rng), z, step)?.apply(v)).0;
        if step >= burn_in {
            points.push(ProjectivePoint::new(v).expect("unit vector"));
        }
    }
    Ok(InvariantSample { z, points })
}

/// `γ = ∫ Φ_z dν` with `Φ_z(x̄) = E[log ‖g x‖ / ‖x‖]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantEstimate {
    pub gamma: f64,
    /// Batch-means standard error; the chain points are correlated.
    pub stderr: f64,
}

const BATCHES: usize = 32;

/// Averages `Φ_z` over the sample. Discrete laws use the exact expectation
/// over their atoms; laws with a continuous part draw `draws_per_point`
/// coins per point.
pub fn lyapunov_via_invariant(mu: &CoinDistribution, nu: &InvariantSample, draws_per_point: usize, seed: u64) -> Result<InvariantEstimate, LyapunovError> {
    if nu.points.is_empty() {
        return Err(LyapunovError::Empty("invariant sample"));
    }
    let z = nu.z;
    let values: Vec<f64> = match mu.atoms() {
        Some(atoms) => {
            let ts: Vec<(CMat2, f64)> = atoms
                .iter()
                .enumerate()
                .map(|(k, (u, w))| Ok((transfer_of(u, z, k)?, *w)))
                .collect::<Result<_, LyapunovError>>()?;
            nu.points
                .iter()
                .map(|p| ts.iter().map(|(t, w)| w * vec2_norm(t.apply(p.vector())).ln()).sum())
                .collect()
        }
        None => {
            let draws = draws_per_point.max(1);
            let mut rng = substream(seed, "phi", 0);
            let mut out = Vec::with_capacity(nu.points.len());
            for (k, p) in nu.points.iter().enumerate() {
                let mut s = 0.0;
                for _ in 0..draws {
                    s += vec2_norm(transfer_of(&mu.sample(&mut rng), z, k)?.apply(p.vector())).ln();
                }
                out.push(s / draws as f64);
            }
            out
        }
    };
    let b = BATCHES.min(values.len());
    let size = values.len() / b;
    let means: Vec<f64> = (0..b).map(|k| values[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let gamma = values.iter().sum::<f64>() / values.len() as f64;
    let (_, stderr) = mean_stderr(&means);
    Ok(InvariantEstimate { gamma, stderr })
}

/// Pooled eigenphase histogram of `W(N)` over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DOSHistogram {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub n_used: usize,
    pub realizations: usize,
}

impl DOSHistogram {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.bins() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Histogram of a given multiset of phases in `[0, 2π)`.
    pub fn from_phases(phases: &[f64], bins: usize, n_used: usize, realizations: usize) -> Self {
        let mut counts = vec![0.0; bins];
        for &p in phases {
            let k = ((p / TAU * bins as f64) as usize).min(bins - 1);
            counts[k] += 1.0;
        }
        let total = phases.len() as f64;
        DOSHistogram {
            bin_edges: (0..=bins).map(|k| TAU * k as f64 / bins as f64).collect(),
            masses: counts.iter().map(|c| c / total).collect(),
            n_used,
            realizations,
        }
    }

    /// Total-variation distance `½ Σ |p_k − q_k|` to a histogram on the
    /// same bins.
    pub fn total_variation(&self, other: &DOSHistogram) -> f64 {
        0.5 * self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

pub fn density_of_states(mu: &CoinDistribution, n: usize, realizations: usize, bins: usize, seed: u64) -> Result<DOSHistogram, LyapunovError> {
    density_of_states_eta(mu, n, realizations, bins, seed, 0.0, 0.0)
}

pub fn density_of_states_eta(
    mu: &CoinDistribution,
    n: usize,
    realizations: usize,
    bins: usize,
    seed: u64,
    eta_l: f64,
    eta_r: f64,
) -> Result<DOSHistogram, LyapunovError> {
    if n < 4 {
        return Err(LyapunovError::SmallRestriction(n));
    }
    if realizations == 0 {
        return Err(LyapunovError::Empty("realizations"));
    }
    if bins == 0 {
        return Err(LyapunovError::Empty("bins"));
    }
    let per: Vec<Vec<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|k| {
            let fw = build_finite_walk(&DisorderRealization::nth(mu, seed, k), n, eta_l, eta_r);
            unitary_eigvals(fw.matrix()).map(|v| v.into_iter().map(phase_of).collect())
        })
        .collect::<Result<_, _>>()?;
    let phases: Vec<f64> = per.into_iter().flatten().collect();
    Ok(DOSHistogram::from_phases(&phases, bins, n, realizations))
}

/// Cumulative distribution of the DOS at the right bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IDSCurve {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn integrated_dos(hist: &DOSHistogram) -> IDSCurve {
    let mut acc = 0.0;
    let values: Vec<f64> = hist
        .masses
        .iter()
        .map(|m| {
            acc += m;
            acc
        })
        .collect();
    IDSCurve {
        phases: hist.bin_edges[1..].to_vec(),
        values,
    }
}

/// Empirical Hölder modulus `ω(h) = max_φ |𝒩(φ+h) − 𝒩(φ)|` on dyadic
/// multiples of the bin width, with the fitted exponent of `ω(h) ~ h^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoelderFit {
    pub scales: Vec<f64>,
    pub moduli: Vec<f64>,
    pub exponent: f64,
    pub r_squared: f64,
}

fn fit_loglog(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, &y)| y > 0.0).map(|(&x, &y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Hölder probe of the IDS. The exponent is clamped to `(0, 1]`.
pub fn ids_hoelder_probe(curve: &IDSCurve) -> HoelderFit {
    let bins = curve.values.len();
    let width = TAU / bins as f64;
    let at = |k: usize| -> f64 {
        // 𝒩 is extended periodically with increment 1 per turn.
        let turns = (k / bins) as f64;
        let r = k % bins;
        turns + if r == 0 { 0.0 } else { curve.values[r - 1] }
    };
    let mut scales = Vec::new();
    let mut moduli = Vec::new();
    let mut s = 1;
    while s <= bins / 8 {
        let w = (0..bins).map(|k| at(k + s) - at(k)).fold(0.0, f64::max);
        scales.push(s as f64 * width);
        moduli.push(w);
        s *= 2;
    }
    let (slope, r_squared) = fit_loglog(&scales, &moduli);
    HoelderFit {
        scales,
        moduli,
        exponent: slope.clamp(f64::MIN_POSITIVE, 1.0),
        r_squared,
    }
}

/// The terms of `γ(z) = 2∫ log|z − e^{iλ}| dϑ(λ) − E[log|a|] − log|z|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThoulessTerms {
    pub kernel_integral: f64,
    pub expected_log_a: f64,
    pub log_abs_z: f64,
    pub rhs: f64,
}

/// `∫ log|z − e^{iλ}| dϑ` with the mass of every bin spread uniformly over it.
pub fn kernel_integral(hist: &DOSHistogram, z: Complex64) -> f64 {
    const SUB: usize = 8;
    let mut total = 0.0;
    for (k, m) in hist.masses.iter().enumerate() {
        if *m == 0.0 {
            continue;
        }
        let (lo, hi) = (hist.bin_edges[k], hist.bin_edges[k + 1]);
        let h = (hi - lo) / SUB as f64;
        let avg = (0..SUB)
            .map(|j| (z - Complex64::from_polar(1.0, lo + (j as f64 + 0.5) * h)).norm().ln())
            .sum::<f64>()
            / SUB as f64;
        total += m * avg;
    }
    total
}

fn thouless_off_circle(hist: &DOSHistogram, expected_log_a: f64, z: Complex64) -> ThoulessTerms {
    let kernel = kernel_integral(hist, z);
    let log_abs_z = z.norm().ln();
    ThoulessTerms {
        kernel_integral: kernel,
        expected_log_a,
        log_abs_z,
        rhs: 2.0 * kernel - expected_log_a - log_abs_z,
    }
}

/// Right side of the Thouless relation. On the unit circle the value is
/// extrapolated from `|z| = 1 + ε`, `ε ∈ THOULESS_EPS`, by a quadratic in `ε`.
pub fn thouless_rhs(hist: &DOSHistogram, mu: &CoinDistribution, z: Complex64) -> Result<ThoulessTerms, LyapunovError> {
    let ela = mu.expected_log_abs_a();
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Ok(thouless_off_circle(hist, ela, z));
    }
    let phase = crate::numerics::phase_of(z);
    let terms: Vec<ThoulessTerms> = THOULESS_EPS
        .iter()
        .map(|e| thouless_off_circle(hist, ela, Complex64::from_polar(1.0 + e, phase)))
        .collect();
    // Lagrange extrapolation to ε = 0 through the three samples.
    let e = THOULESS_EPS;
    let lag = |k: usize| -> f64 {
        (0..3).filter(|&j| j != k).map(|j| (0.0 - e[j]) / (e[k] - e[j])).product()
    };
    let extrapolate = |f: &dyn Fn(&ThoulessTerms) -> f64| -> f64 { (0..3).map(|k| lag(k) * f(&terms[k])).sum() };
    let kernel = extrapolate(&|t| t.kernel_integral);
    Ok(ThoulessTerms {
        kernel_integral: kernel,
        expected_log_a: ela,
        log_abs_z: 0.0,
        rhs: 2.0 * kernel - ela,
    })
}

/// Continuity probe of `γ` along the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaProbe {
    pub phases: Vec<f64>,
    pub gamma: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `(Δφ, mean |Δγ|)` over dyadic grid spacings.
    pub table: Vec<(f64, f64)>,
    pub exponent: f64,
    pub r_squared: f64,
}

pub fn hoelder_probe_gamma(
    mu: &CoinDistribution,
    phases: &[f64],
    chain_length: usize,
    realizations: usize,
    seed: u64,
) -> Result<GammaProbe, LyapunovError> {
    if phases.len() < 8 {
        return Err(LyapunovError::Empty("phase grid of at least 8 points"));
    }
    let est: Vec<LyapunovEstimate> = phases
        .iter()
        .map(|&p| estimate_lyapunov(mu, Complex64::from_polar(1.0, p), chain_length, realizations, seed))
        .collect::<Result<_, _>>()?;
    let gamma: Vec<f64> = est.iter().map(|e| e.gamma_hat).collect();
    let mut table = Vec::new();
    let mut s = 1;
    while s < phases.len() {
        let pairs: Vec<(f64, f64)> = (0..phases.len() - s).map(|i| ((phases[i + s] - phases[i]).abs(), (gamma[i + s] - gamma[i]).abs())).collect();
        let m = pairs.len() as f64;
        table.push((pairs.iter().map(|p| p.0).sum::<f64>() / m, pairs.iter().map(|p| p.1).sum::<f64>() / m));
        s *= 2;
    }
    let xs: Vec<f64> = table.iter().map(|t| t.0).collect();
    let ys: Vec<f64> = table.iter().map(|t| t.1).collect();
    let (exponent, r_squared) = fit_loglog(&xs, &ys);
    Ok(GammaProbe {
        phases: phases.to_vec(),
        gamma,
        stderr: est.iter().map(|e| e.stderr).collect(),
        table,
        exponent,
        r_squared,
    })
}

/// Uniform draw on `[0, 2π)`, used by several probes.
pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_ids_is_linear() {
        let h = DOSHistogram {
            bin_edges: (0..=4).map(|k| TAU * k as f64 / 4.0).collect(),
            masses: vec![0.25; 4],
            n_used: 4,
            realizations: 1,
        };
        let c = integrated_dos(&h);
        for (k, v) in c.values.iter().enumerate() {
            assert!((v - 0.25 * (k + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn single_bin_ids_is_step() {
        let h = DOSHistogram::from_phases(&[1.0, 1.0, 1.0], 8, 4, 1);
        let c = integrated_dos(&h);
        let k = (1.0 / TAU * 8.0) as usize;
        for (j, v) in c.values.iter().enumerate() {
            assert_eq!(*v, if j < k { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn kernel_lower_bound() {
        let h = DOSHistogram::from_phases(&[0.1, 2.0, 4.0, 5.5], 64, 4, 1);
        let z = Complex64::from_polar(2.0, 0.3);
        assert!(kernel_integral(&h, z) >= (2.0f64 - 1.0).ln());
    }

    #[test]
    fn rejects_reflective_law() {
        let mu = CoinDistribution::Fixed { coin: UnitaryCoin::pauli_x() };
        assert!(matches!(
            estimate_lyapunov(&mu, Complex64::new(1.0, 0.0), 1000, 1, 0),
            Err(LyapunovError::Reflective(_))
        ));
    }

    #[test]
    fn expanding_fixed_coin() {
        // Hadamard at z = 1.5 is hyperbolic; ν is the top eigenvector.
        let mu = CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() };
        let z = Complex64::new(1.5, 0.0);
        let t = tau(&UnitaryCoin::hadamard(), z).unwrap().m;
        let top = crate::numerics::mat2_eig(&t).values[0].norm().ln();
        let nu = invariant_measure_sample(&mu, z, 1000, 200, 1).unwrap();
        let est = lyapunov_via_invariant(&mu, &nu, 1, 0).unwrap();
        assert!((est.gamma - top).abs() < 1e-10, "{} vs {top}", est.gamma);
    }

    #[test]
    fn circle_value_continues_from_outside() {
        let phases: Vec<f64> = (0..4000).map(|k| TAU * (k as f64 + 0.5) / 4000.0).collect();
        let h = DOSHistogram::from_phases(&phases, 64, 4, 1);
        // Uniform density: the kernel integral vanishes on the circle, bin centers included.
        for z in [Complex64::from_polar(1.0, h.centers()[3]), Complex64::from_polar(1.0, 1.0)] {
            let t = thouless_rhs(&h, &CoinDistribution::Haar, z).unwrap();
            assert!(t.kernel_integral.abs() < 1e-3, "{}", t.kernel_integral);
        }
    }
}
