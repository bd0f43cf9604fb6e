//! Single-site coin laws and seeded disorder realizations.
//!
//! A [`DisorderRealization`] is an immutable map `site → coin`. Each site owns
//! its own ChaCha stream keyed by the master seed, so coins can be produced
//! lazily, in any order, on an unbounded lattice.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::quadrature::tanh_sinh_adaptive;
use crate::numerics::CMat2;

/// Maximal Frobenius residual `‖U†U − I‖` accepted for a coin.
pub const COIN_TOL: f64 = 1e-12;
/// Coins whose diagonal entries are at most this small are exact flips.
pub const FLIP_TOL: f64 = 1e-14;
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoinError {
    #[error("coin is not unitary: ‖U†U − I‖_F = {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("coin has non-finite entries")]
    NonFinite,
    #[error("{what}: weights must be positive and sum to 1 (sum = {sum})")]
    BadWeights { what: &'static str, sum: f64 },
    #[error("{0} must contain at least one entry")]
    Empty(&'static str),
}

/// A 2×2 unitary `((a, b), (c, d))` acting in the `(e₋, e₊)` basis.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 4]", into = "[[f64; 2]; 4]")]
pub struct UnitaryCoin {
    m: CMat2,
}

impl fmt::Debug for UnitaryCoin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitaryCoin{:?}", self.m)
    }
}

fn residual(m: &CMat2) -> f64 {
    (m.adjoint() * *m - CMat2::identity()).frobenius()
}

impl UnitaryCoin {
    pub fn new(m: CMat2) -> Result<Self, CoinError> {
        if !m.is_finite() {
            return Err(CoinError::NonFinite);
        }
        let r = residual(&m);
        if r > COIN_TOL {
            return Err(CoinError::NotUnitary { residual: r });
        }
        Ok(UnitaryCoin { m })
    }

    pub fn from_entries(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, CoinError> {
        UnitaryCoin::new(CMat2::new(a, b, c, d))
    }

    pub fn identity() -> Self {
        UnitaryCoin { m: CMat2::identity() }
    }

    /// `(1/√2)((1, 1), (1, −1))`.
    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        UnitaryCoin {
            m: CMat2::from_real(s, s, s, -s),
        }
    }

    pub fn pauli_x() -> Self {
        UnitaryCoin {
            m: CMat2::from_real(0.0, 1.0, 1.0, 0.0),
        }
    }

    /// `((0, e^{iφ}), (e^{iψ}, 0))`, a perfect reflector.
    pub fn flip(phi: f64, psi: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        UnitaryCoin {
            m: CMat2::new(z, Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, psi), z),
        }
    }

    /// `((a, b), (−b̄ e^{iφ}, ā e^{iφ}))` for `|a|² + |b|² = 1`.
    pub fn from_ab(a: Complex64, b: Complex64, phi: f64) -> Result<Self, CoinError> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if (n - 1.0).abs() > COIN_TOL {
            return Err(CoinError::NotUnitary { residual: (n - 1.0).abs() });
        }
        let e = Complex64::from_polar(1.0, phi);
        UnitaryCoin::from_entries(a, b, -b.conj() * e, a.conj() * e)
    }

    pub fn matrix(&self) -> CMat2 {
        self.m
    }
    pub fn a(&self) -> Complex64 {
        self.m.m11
    }
    pub fn b(&self) -> Complex64 {
        self.m.m12
    }
    pub fn c(&self) -> Complex64 {
        self.m.m21
    }
    pub fn d(&self) -> Complex64 {
        self.m.m22
    }
    pub fn det(&self) -> Complex64 {
        self.m.det()
    }

    pub fn unitarity_residual(&self) -> f64 {
        residual(&self.m)
    }

    /// True when the coin reflects completely (a vanishing diagonal entry).
    pub fn is_flip(&self) -> bool {
        self.a().norm() <= FLIP_TOL || self.d().norm() <= FLIP_TOL
    }

    /// `e^{iη}·U`.
    pub fn with_phase(&self, eta: f64) -> Self {
        UnitaryCoin {
            m: self.m.scale(Complex64::from_polar(1.0, eta)),
        }
    }

    /// `V·U`; the product of two coins stays unitary up to rounding.
    pub fn left_mul(&self, v: &UnitaryCoin) -> Self {
        UnitaryCoin { m: v.m * self.m }
    }
}

impl TryFrom<[[f64; 2]; 4]> for UnitaryCoin {
    type Error = CoinError;
    fn try_from(e: [[f64; 2]; 4]) -> Result<Self, CoinError> {
        let c = |k: usize| Complex64::new(e[k][0], e[k][1]);
        UnitaryCoin::from_entries(c(0), c(1), c(2), c(3))
    }
}

impl From<UnitaryCoin> for [[f64; 2]; 4] {
    fn from(u: UnitaryCoin) -> Self {
        u.m.entries().map(|z| [z.re, z.im])
    }
}

/// Haar-random element of U(2).
///
/// The QR factor of a complex Ginibre matrix whose triangular part has a
/// positive diagonal is Haar distributed.
pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R) -> UnitaryCoin {
    let mut g = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let z1 = [g(), g()];
    let z2 = [g(), g()];
    let n1 = (z1[0].norm_sqr() + z1[1].norm_sqr()).sqrt();
    let q1 = [z1[0] / n1, z1[1] / n1];
    let mut q2 = z2;
    // Two Gram-Schmidt passes keep the orthogonality at rounding level even
    // for nearly parallel draws.
    for _ in 0..2 {
        let p = q1[0].conj() * q2[0] + q1[1].conj() * q2[1];
        q2 = [q2[0] - p * q1[0], q2[1] - p * q1[1]];
    }
    let n2 = (q2[0].norm_sqr() + q2[1].norm_sqr()).sqrt();
    q2 = [q2[0] / n2, q2[1] / n2];
    let m = CMat2::new(q1[0], q2[0], q1[1], q2[1]);
    debug_assert!(residual(&m) <= COIN_TOL);
    UnitaryCoin { m }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub coin: UnitaryCoin,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub distribution: CoinDistribution,
    pub weight: f64,
}

/// The single-site law μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoinDistribution {
    Fixed { coin: UnitaryCoin },
    Haar,
    Discrete { atoms: Vec<Atom> },
    Mixture { parts: Vec<Part> },
}

fn check_weights(what: &'static str, w: impl Iterator<Item = f64>) -> Result<(), CoinError> {
    let mut sum = 0.0;
    let mut n = 0;
    for x in w {
        if !(x.is_finite() && x > 0.0) {
            return Err(CoinError::BadWeights { what, sum: f64::NAN });
        }
        sum += x;
        n += 1;
    }
    if n == 0 {
        return Err(CoinError::Empty(what));
    }
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(CoinError::BadWeights { what, sum });
    }
    Ok(())
}

fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, w) in weights.enumerate() {
        acc += w;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

impl CoinDistribution {
    pub fn discrete(atoms: Vec<(UnitaryCoin, f64)>) -> Result<Self, CoinError> {
        let d = CoinDistribution::Discrete {
            atoms: atoms.into_iter().map(|(coin, weight)| Atom { coin, weight }).collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn mixture(parts: Vec<(CoinDistribution, f64)>) -> Result<Self, CoinError> {
        let d = CoinDistribution::Mixture {
            parts: parts
                .into_iter()
                .map(|(distribution, weight)| Part { distribution, weight })
                .collect(),
        };
        d.validate()?;
        Ok(d)
    }

    /// Parses the JSON form and checks all weight invariants.
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let d: CoinDistribution = serde_json::from_str(s)?;
        d.validate().map_err(serde::de::Error::custom)?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), CoinError> {
        match self {
            CoinDistribution::Fixed { .. } | CoinDistribution::Haar => Ok(()),
            CoinDistribution::Discrete { atoms } => check_weights("discrete atoms", atoms.iter().map(|a| a.weight)),
            CoinDistribution::Mixture { parts } => {
                check_weights("mixture parts", parts.iter().map(|p| p.weight))?;
                parts.iter().try_for_each(|p| p.distribution.validate())
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitaryCoin {
        match self {
            CoinDistribution::Fixed { coin } => *coin,
            CoinDistribution::Haar => sample_haar(rng),
            CoinDistribution::Discrete { atoms } => atoms[pick(rng, atoms.iter().map(|a| a.weight))].coin,
            CoinDistribution::Mixture { parts } => {
                let k = pick(rng, parts.iter().map(|p| p.weight));
                parts[k].distribution.sample(rng)
            }
        }
    }

    /// Total weight of flip coins, `1 − μ(U_ND)`. The Haar part carries none.
    pub fn reflectivity(&self) -> f64 {
        match self {
            CoinDistribution::Fixed { coin } => f64::from(u8::from(coin.is_flip())),
            CoinDistribution::Haar => 0.0,
            CoinDistribution::Discrete { atoms } => atoms.iter().filter(|a| a.coin.is_flip()).map(|a| a.weight).sum(),
            CoinDistribution::Mixture { parts } => parts.iter().map(|p| p.weight * p.distribution.reflectivity()).sum(),
        }
    }

    /// The law as a finite list of weighted coins, or `None` if it has a
    /// continuous part.
    pub fn atoms(&self) -> Option<Vec<(UnitaryCoin, f64)>> {
        match self {
            CoinDistribution::Fixed { coin } => Some(vec![(*coin, 1.0)]),
            CoinDistribution::Haar => None,
            CoinDistribution::Discrete { atoms } => Some(atoms.iter().map(|a| (a.coin, a.weight)).collect()),
            CoinDistribution::Mixture { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.distribution.atoms()?.into_iter().map(|(c, w)| (c, w * p.weight)));
                }
                Some(out)
            }
        }
    }

    pub fn has_continuous_part(&self) -> bool {
        self.atoms().is_none()
    }

    /// `E[log|a|]`; `−∞` when flips carry positive weight.
    pub fn expected_log_abs_a(&self) -> f64 {
        match self {
            CoinDistribution::Fixed { coin } => coin.a().norm().ln(),
            CoinDistribution::Haar => haar_expected_log_abs_a(),
            CoinDistribution::Discrete { atoms } => atoms.iter().map(|a| a.weight * a.coin.a().norm().ln()).sum(),
            CoinDistribution::Mixture { parts } => parts.iter().map(|p| p.weight * p.distribution.expected_log_abs_a()).sum(),
        }
    }
}

/// `E[log|a|]` under Haar measure: with `u = |a|²` uniform on `[0, 1]` this
/// is `∫₀¹ ½ log u du`.
pub fn haar_expected_log_abs_a() -> f64 {
    tanh_sinh_adaptive(|u| 0.5 * u.ln(), 0.0, 1.0, 1e-14)
}

/// ChaCha stream for `(master_seed, label, index)`. Distinct labels and
/// indices give non-overlapping streams.
pub fn substream(master_seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    // FNV-1a of the label fills the second key word.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&h.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed for the `index`-th independent realization drawn from `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    substream(master_seed, "realization", index).next_u64()
}

/// One disorder configuration ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub distribution: CoinDistribution,
    pub master_seed: u64,
    /// Sites whose coin is pinned instead of sampled.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<i64, UnitaryCoin>,
}

impl DisorderRealization {
    pub fn new(distribution: CoinDistribution, master_seed: u64) -> Self {
        DisorderRealization {
            distribution,
            master_seed,
            overrides: BTreeMap::new(),
        }
    }

    pub fn fixed(coin: UnitaryCoin) -> Self {
        DisorderRealization::new(CoinDistribution::Fixed { coin }, 0)
    }

    /// The `index`-th realization of a Monte Carlo run seeded by `master_seed`.
    pub fn nth(distribution: &CoinDistribution, master_seed: u64, index: u64) -> Self {
        DisorderRealization::new(distribution.clone(), realization_seed(master_seed, index))
    }

    pub fn with_override(mut self, site: i64, coin: UnitaryCoin) -> Self {
        self.overrides.insert(site, coin);
        self
    }

    pub fn coin_at(&self, x: i64) -> UnitaryCoin {
        if let Some(c) = self.overrides.get(&x) {
            return *c;
        }
        match &self.distribution {
            CoinDistribution::Fixed { coin } => *coin,
            d => d.sample(&mut substream(self.master_seed, "site", x as u64)),
        }
    }

    pub fn coins(&self, lo: i64, hi: i64) -> Vec<UnitaryCoin> {
        (lo..=hi).map(|x| self.coin_at(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_coins_are_unitary() {
        for u in [UnitaryCoin::identity(), UnitaryCoin::hadamard(), UnitaryCoin::pauli_x(), UnitaryCoin::flip(0.3, 1.1)] {
            assert!(u.unitarity_residual() <= COIN_TOL);
        }
        assert!(UnitaryCoin::pauli_x().is_flip());
        assert!(!UnitaryCoin::hadamard().is_flip());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMat2::from_real(1.0, 1.0, 0.0, 1.0);
        assert!(matches!(UnitaryCoin::new(m), Err(CoinError::NotUnitary { .. })));
    }

    #[test]
    fn haar_draws_are_unitary() {
        let mut rng = substream(1, "t", 0);
        for _ in 0..10_000 {
            assert!(sample_haar(&mut rng).unitarity_residual() <= COIN_TOL);
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = CoinDistribution::mixture(vec![
            (CoinDistribution::Haar, 0.25),
            (
                CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 0.5), (UnitaryCoin::flip(0.0, 0.5), 0.5)]).unwrap(),
                0.75,
            ),
        ])
        .unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(CoinDistribution::from_json(&s).unwrap(), d);
        assert_eq!(CoinDistribution::from_json(r#"{"kind":"haar"}"#).unwrap(), CoinDistribution::Haar);
    }

    #[test]
    fn json_rejects_bad_weights() {
        let h = serde_json::to_string(&UnitaryCoin::hadamard()).unwrap();
        let s = format!(r#"{{"kind":"discrete","atoms":[{{"coin":{h},"weight":0.4}}]}}"#);
        assert!(CoinDistribution::from_json(&s).is_err());
    }

    #[test]
    fn reflectivity_values() {
        assert_eq!(CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() }.reflectivity(), 0.0);
        assert_eq!(CoinDistribution::Haar.reflectivity(), 0.0);
        let d = CoinDistribution::discrete(vec![(UnitaryCoin::flip(0.0, 0.7).with_phase(0.4), 0.3), (UnitaryCoin::hadamard(), 0.7)]).unwrap();
        assert!((d.reflectivity() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn haar_log_a_expectation() {
        assert!((haar_expected_log_abs_a() + 0.5).abs() < 1e-12);
        let d = CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() };
        assert!((d.expected_log_abs_a() - 0.5f64.sqrt().ln()).abs() < 1e-15);
    }

    #[test]
    fn coin_at_deterministic_and_local() {
        let r = DisorderRealization::new(CoinDistribution::Haar, 42);
        assert_eq!(r.coin_at(-7), r.coin_at(-7));
        assert_ne!(r.coin_at(3), r.coin_at(4));
        let r2 = r.clone().with_override(3, UnitaryCoin::identity());
        assert_eq!(r2.coin_at(3), UnitaryCoin::identity());
        assert_eq!(r2.coin_at(4), r.coin_at(4));
    }

    #[test]
    fn realizations_differ() {
        assert_ne!(realization_seed(1, 0), realization_seed(1, 1));
        assert_ne!(realization_seed(1, 0), realization_seed(2, 0));
    }
}
