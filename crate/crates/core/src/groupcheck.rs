//! Numerical certificates for the hypotheses on the transfer group
//! generated by `τ_z(supp μ)`: non-compactness, strong irreducibility and
//! ζ-integrability.
//!
//! A failed search is reported as inconclusive and never as a proof of the
//! negation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coins::{sample_haar, substream, CoinDistribution, UnitaryCoin};
use crate::numerics::quadrature::{tanh_sinh, tanh_sinh_adaptive};
use crate::numerics::{mat2_eig, projective_distance, CMat2, ProjectivePoint};
use crate::transfer::{tau, tau_inv_matrix, ImageParams};

/// Minimal spectral radius `1 + NONCOMPACT_MARGIN` of a certificate.
pub const NONCOMPACT_MARGIN: f64 = 1e-9;
/// Minimal projective distance between distinct orbit points.
pub const DISTINCT: f64 = 1e-6;

/// One factor `τ_z(U)` or `τ_z(U)⁻¹` of a group word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Letter {
    pub coin: UnitaryCoin,
    pub inverse: bool,
}

fn letter_matrix(l: &Letter, z: Complex64) -> Option<CMat2> {
    let t = tau(&l.coin, z).ok()?.m;
    if l.inverse {
        t.inverse()
    } else {
        Some(t)
    }
}

/// The product `L_k ⋯ L_1` of a word stored first-letter-first.
pub fn word_matrix(word: &[Letter], z: Complex64) -> Option<CMat2> {
    word.iter().try_fold(CMat2::identity(), |acc, l| Some(letter_matrix(l, z)? * acc))
}

pub fn spectral_radius(m: &CMat2) -> f64 {
    mat2_eig(m).values[0].norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncompactCertificate {
    pub word: Vec<Letter>,
    pub spectral_radius: f64,
}

impl NoncompactCertificate {
    /// Spectral radius of the word rebuilt from its letters.
    pub fn verify(&self, z: Complex64) -> Option<f64> {
        word_matrix(&self.word, z).map(|m| spectral_radius(&m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Noncompactness {
    Certified(NoncompactCertificate),
    Inconclusive { words_tried: usize },
}

fn certify(word: Vec<Letter>, z: Complex64) -> Option<NoncompactCertificate> {
    let m = word_matrix(&word, z)?;
    let spectral_radius = spectral_radius(&m);
    (spectral_radius > 1.0 + NONCOMPACT_MARGIN).then_some(NoncompactCertificate { word, spectral_radius })
}

/// The pair `U, U'` with `τ_z(U) = T(r, α, β, γ)` and `τ_z(U') = T(r', α, β, γ)`.
pub fn shared_phase_pair(r: f64, r_prime: f64, alpha: f64, beta: f64, gamma: f64, z: Complex64) -> Option<(UnitaryCoin, UnitaryCoin)> {
    let build = |r: f64| -> Option<UnitaryCoin> {
        let t = ImageParams { r, alpha, beta, gamma }.matrix(z.norm());
        UnitaryCoin::new(tau_inv_matrix(&t, z).ok()?).ok()
    };
    Some((build(r)?, build(r_prime)?))
}

/// `(f, g)` with `T(r,·)T(r',·)⁻¹` having eigenvalues `f ± g`.
pub fn shared_phase_eigen(r: f64, r_prime: f64) -> (f64, f64) {
    let f = ((1.0 + r * r) * (1.0 + r_prime * r_prime)).sqrt() - r * r_prime;
    let g = r * (1.0 + r_prime * r_prime).sqrt() - r_prime * (1.0 + r * r).sqrt();
    (f, g)
}

/// Searches for a group word with spectral radius above one.
///
/// Finite laws try every `T_i`, `T_i T_j⁻¹` first. Laws with a continuous
/// part try the shared-phase construction `T(r)T(r')⁻¹`, which lies in the
/// group whenever the support is open. Random words of length up to
/// `max_word_length` follow in both cases.
pub fn noncompactness_search(mu: &CoinDistribution, z: Complex64, max_word_length: usize, trials: usize, seed: u64) -> Noncompactness {
    let mut tried = 0;
    let atoms: Vec<UnitaryCoin> = match mu.atoms() {
        Some(a) => a.into_iter().map(|(c, _)| c).filter(|c| !c.is_flip()).collect(),
        None => Vec::new(),
    };
    let mut rng = substream(seed, "noncompact", 0);
    if mu.has_continuous_part() {
        for _ in 0..trials.max(1) {
            let alpha = rng.random::<f64>() * std::f64::consts::TAU;
            let beta = rng.random::<f64>() * std::f64::consts::TAU;
            let gamma = rng.random::<f64>() * std::f64::consts::TAU;
            let r = 0.25 + rng.random::<f64>();
            let (u, v) = match shared_phase_pair(r, 2.0 * r + 0.5, alpha, beta, gamma, z) {
                Some(p) => p,
                None => continue,
            };
            tried += 1;
            let word = vec![Letter { coin: v, inverse: true }, Letter { coin: u, inverse: false }];
            if let Some(c) = certify(word, z) {
                return Noncompactness::Certified(c);
            }
        }
    } else {
        for (i, &u) in atoms.iter().enumerate() {
            tried += 1;
            if let Some(c) = certify(vec![Letter { coin: u, inverse: false }], z) {
                return Noncompactness::Certified(c);
            }
            for (j, &v) in atoms.iter().enumerate() {
                if i == j {
                    continue;
                }
                tried += 1;
                let word = vec![Letter { coin: v, inverse: true }, Letter { coin: u, inverse: false }];
                if let Some(c) = certify(word, z) {
                    return Noncompactness::Certified(c);
                }
            }
        }
    }
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<UnitaryCoin> {
        if atoms.is_empty() {
            if mu.has_continuous_part() {
                Some(mu.sample(rng))
            } else {
                None
            }
        } else {
            Some(atoms[rng.random_range(0..atoms.len())])
        }
    };
    for _ in 0..trials {
        let len = rng.random_range(1..=max_word_length.max(1));
        let mut word = Vec::with_capacity(len);
        for _ in 0..len {
            match draw(&mut rng) {
                Some(c) if !c.is_flip() => word.push(Letter { coin: c, inverse: rng.random() }),
                _ => {}
            }
        }
        if word.is_empty() {
            continue;
        }
        tried += 1;
        if let Some(c) = certify(word, z) {
            return Noncompactness::Certified(c);
        }
    }
    Noncompactness::Inconclusive { words_tried: tried }
}

/// The coin `((a, b), (−b̄, ā))` paired with the Hadamard coin.
pub fn two_coin_partner(a: Complex64, b: Complex64) -> Option<UnitaryCoin> {
    UnitaryCoin::from_ab(a, b, 0.0).ok()
}

/// `|λ±| = |iℑb ± √(|a|² − (ℑb)²)| / |a|` for `T_H T_X⁻¹`, using the
/// principal complex root. Independent of `z`.
pub fn two_coin_closed_form(a: Complex64, b: Complex64) -> (f64, f64) {
    let root = Complex64::new(a.norm_sqr() - b.im * b.im, 0.0).sqrt();
    let ib = Complex64::new(0.0, b.im);
    let abs_a = a.norm();
    ((ib + root).norm() / abs_a, (ib - root).norm() / abs_a)
}

/// The (at most eight) `z` at which `T_H T_X⁻¹` and `T_H⁻¹ T_X` share an
/// eigenvector, from the four sign choices of the eigenvector relation.
pub fn two_coin_exceptional_z(a: Complex64, b: Complex64) -> Vec<Complex64> {
    let s2 = std::f64::consts::SQRT_2;
    let g = Complex64::new(b.im * b.im - a.norm_sqr(), 0.0).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(8);
    for s1 in [1.0, -1.0] {
        for s2_sign in [1.0, -1.0] {
            let l = (b.re - s2 + s1 * i * g) / (s2 * b - 1.0);
            let r = (b.re + s2 + s2_sign * i * g) / (s2 * b + 1.0);
            let q = l / r;
            if !q.is_finite() {
                continue;
            }
            let root = q.sqrt();
            out.push(root);
            out.push(-root);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub start: ProjectivePoint,
    /// Pairwise distinct orbit points, the start included.
    pub points: Vec<ProjectivePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Irreducibility {
    /// Every tested start point, including all eigenvectors of the
    /// generators, has an orbit with at least three distinct points.
    Witness { orbits: Vec<Orbit> },
    Inconclusive { stuck_start: ProjectivePoint, points_found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub criterion: String,
    pub result: Irreducibility,
    /// For two-generator sets: the smallest projective distance between an
    /// eigenvector of `T₁T₂⁻¹` and one of `T₁⁻¹T₂`.
    pub eigenvector_separation: Option<f64>,
}

fn eigvec_points(m: &CMat2) -> Vec<ProjectivePoint> {
    let e = mat2_eig(m);
    let k = if e.defective { 1 } else { 2 };
    e.vectors[..k].iter().filter_map(|v| ProjectivePoint::new(*v)).collect()
}

fn push_distinct(points: &mut Vec<ProjectivePoint>, p: ProjectivePoint) {
    if points.iter().all(|q| projective_distance(q, &p) >= DISTINCT) {
        points.push(p);
    }
}

/// Orbit test for strong irreducibility: every start point must reach at
/// least three pairwise distinct points under sampled group elements.
pub fn irreducibility_orbit_test(mu: &CoinDistribution, z: Complex64, trials: usize, seed: u64) -> IrreducibilityReport {
    let mut rng = substream(seed, "irreducible", 0);
    let mut generators: Vec<CMat2> = Vec::new();
    let finite = mu.atoms();
    if let Some(atoms) = &finite {
        for (u, _) in atoms {
            if let Ok(t) = tau(u, z) {
                generators.push(t.m);
            }
        }
    }
    let mut starts: Vec<ProjectivePoint> = generators.iter().flat_map(eigvec_points).collect();
    for _ in 0..trials.max(1) {
        let v = [
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
        ];
        if let Some(p) = ProjectivePoint::new(v) {
            starts.push(p);
        }
    }
    let eigenvector_separation = (generators.len() == 2).then(|| {
        let (t1, t2) = (generators[0], generators[1]);
        let m1 = t1 * t2.inverse().expect("|det| = 1");
        let m2 = t1.inverse().expect("|det| = 1") * t2;
        let mut best = f64::INFINITY;
        for p in eigvec_points(&m1) {
            for q in eigvec_points(&m2) {
                best = best.min(projective_distance(&p, &q));
            }
        }
        best
    });
    let sample_element = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<CMat2> {
        if generators.is_empty() {
            tau(&mu.sample(rng), z).ok().map(|t| t.m)
        } else {
            let g = generators[rng.random_range(0..generators.len())];
            if rng.random() {
                g.inverse()
            } else {
                Some(g)
            }
        }
    };
    let budget = 20 * trials.max(1);
    let mut orbits = Vec::with_capacity(starts.len());
    for start in starts {
        let mut points = vec![start];
        let mut frontier = start;
        for _ in 0..budget {
            if points.len() >= 3 {
                break;
            }
            if let Some(g) = sample_element(&mut rng) {
                if let Some(p) = ProjectivePoint::new(g.apply(frontier.vector())) {
                    push_distinct(&mut points, p);
                    frontier = p;
                }
            }
        }
        if points.len() < 3 {
            return IrreducibilityReport {
                criterion: CRITERION.to_string(),
                result: Irreducibility::Inconclusive {
                    stuck_start: start,
                    points_found: points.len(),
                },
                eigenvector_separation,
            };
        }
        orbits.push(Orbit { start, points });
    }
    IrreducibilityReport {
        criterion: CRITERION.to_string(),
        result: Irreducibility::Witness { orbits },
        eigenvector_separation,
    }
}

const CRITERION: &str = "orbit of every tested projective point has more than two elements (strong irreducibility given non-compactness and |det| = 1)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Zeta {
    Finite { zeta: f64, expectation: f64, method: String },
    Divergent { zeta: f64, truncated_integrals: Vec<(f64, f64)> },
}

/// `‖τ_θ(U)‖` on the unit circle as a function of `u = |a|²`.
pub fn unit_circle_norm(u: f64) -> f64 {
    (1.0 + (1.0 - u).max(0.0).sqrt()) / u.sqrt()
}

/// Cut-offs `ε_k = 10^{−2k}` of the refinement sequence.
const CUTOFFS: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];

fn haar_zeta(zeta: f64) -> Zeta {
    let f = |u: f64| unit_circle_norm(u).powf(zeta);
    // Map [ε, 1] to s ∈ [ln ε, 0] with u = e^s so the singular end is resolved.
    let truncated: Vec<(f64, f64)> = CUTOFFS
        .iter()
        .map(|&eps| (eps, tanh_sinh(|s: f64| f(s.exp()) * s.exp(), eps.ln(), 0.0, 8)))
        .collect();
    let inc: Vec<f64> = truncated.windows(2).map(|w| w[1].1 - w[0].1).collect();
    // A convergent integral gains geometrically less at each refinement; a
    // divergent one gains at least as much (logarithmic or power growth).
    let ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
    let last = *ratios.last().expect("several cut-offs");
    let total = truncated.last().expect("non-empty").1;
    if last.is_finite() && last < 0.5 && inc.last().expect("non-empty").abs() < 1e-3 * total {
        let value = tanh_sinh_adaptive(f, 0.0, 1.0, 1e-12);
        Zeta::Finite {
            zeta,
            expectation: value,
            method: "tanh-sinh quadrature over |a|² ~ U[0,1]".into(),
        }
    } else {
        Zeta::Divergent {
            zeta,
            truncated_integrals: truncated,
        }
    }
}

/// `E[‖τ_θ(U)‖^ζ]` for `|θ| = 1`, or a divergence flag.
pub fn zeta_integrability(mu: &CoinDistribution, zeta: f64) -> Zeta {
    match mu {
        CoinDistribution::Haar => haar_zeta(zeta),
        CoinDistribution::Mixture { parts } => {
            let mut total = 0.0;
            for p in parts {
                match zeta_integrability(&p.distribution, zeta) {
                    Zeta::Finite { expectation, .. } => total += p.weight * expectation,
                    d @ Zeta::Divergent { .. } => return d,
                }
            }
            Zeta::Finite {
                zeta,
                expectation: total,
                method: "weighted sum over mixture parts".into(),
            }
        }
        _ => {
            let atoms = mu.atoms().expect("finite law");
            let mut total = 0.0;
            for (u, w) in atoms {
                let a2 = u.a().norm_sqr();
                if a2 <= 0.0 {
                    return Zeta::Divergent {
                        zeta,
                        truncated_integrals: vec![],
                    };
                }
                total += w * unit_circle_norm(a2).powf(zeta);
            }
            Zeta::Finite {
                zeta,
                expectation: total,
                method: "exact weighted sum over atoms".into(),
            }
        }
    }
}

/// Monte Carlo estimate of `E‖τ_θ(U)‖^ζ` under Haar measure.
pub fn haar_zeta_monte_carlo(zeta: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = substream(seed, "zeta", 0);
    let xs: Vec<f64> = (0..samples).map(|_| unit_circle_norm(sample_haar(&mut rng).a().norm_sqr()).powf(zeta)).collect();
    let m = samples as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub z: Complex64,
    pub noncompact: Noncompactness,
    pub irreducible: IrreducibilityReport,
    pub zeta: Zeta,
    /// Distance from `z` to the nearest exceptional point, for two-atom laws
    /// of the form `{H, X}`.
    pub exceptional_z_distance: Option<f64>,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub noncompact: bool,
    pub irreducible: bool,
    pub zeta_integrable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub max_word_length: usize,
    pub trials: usize,
    pub zeta: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_word_length: 8,
            trials: 64,
            zeta: 0.5,
            seed: 0,
        }
    }
}

/// If `mu` consists of the Hadamard coin and one other non-flip coin,
/// returns the other coin's `(a, b)`.
fn hadamard_pair(mu: &CoinDistribution) -> Option<(Complex64, Complex64)> {
    let atoms = mu.atoms()?;
    if atoms.len() != 2 {
        return None;
    }
    let h = UnitaryCoin::hadamard().matrix();
    let is_h = |u: &UnitaryCoin| (u.matrix() - h).max_abs() < 1e-12;
    let other = match (is_h(&atoms[0].0), is_h(&atoms[1].0)) {
        (true, false) => atoms[1].0,
        (false, true) => atoms[0].0,
        _ => return None,
    };
    Some((other.a(), other.b()))
}

pub fn check_hypotheses(mu: &CoinDistribution, z: Complex64, opts: &CheckOptions) -> HypothesisReport {
    let noncompact = noncompactness_search(mu, z, opts.max_word_length, opts.trials, opts.seed);
    let irreducible = irreducibility_orbit_test(mu, z, opts.trials, opts.seed);
    let zeta = zeta_integrability(mu, opts.zeta);
    let exceptional_z_distance =
        hadamard_pair(mu).map(|(a, b)| two_coin_exceptional_z(a, b).iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min));
    let verdicts = Verdicts {
        noncompact: matches!(noncompact, Noncompactness::Certified(_)),
        irreducible: matches!(irreducible.result, Irreducibility::Witness { .. }),
        zeta_integrable: matches!(zeta, Zeta::Finite { .. }),
    };
    HypothesisReport {
        z,
        noncompact,
        irreducible,
        zeta,
        exceptional_z_distance,
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shared_phase_eigenvalues() {
        let z = Complex64::from_polar(1.0, 0.8);
        let (u, v) = shared_phase_pair(0.5, 2.0, 0.3, 1.2, -0.7, z).unwrap();
        let m = tau(&u, z).unwrap().m * tau(&v, z).unwrap().m.inverse().unwrap();
        let (f, g) = shared_phase_eigen(0.5, 2.0);
        let e = mat2_eig(&m);
        assert!((e.values[0].norm() - (f + g.abs())).abs() < 1e-10);
        assert!((e.values[1].norm() - (f - g.abs())).abs() < 1e-10);
    }

    #[test]
    fn closed_form_example() {
        let a = c(0.3, 0.0);
        let b = c(0.0, (1.0f64 - 0.09).sqrt());
        let x = two_coin_partner(a, b).unwrap();
        let z = Complex64::from_polar(1.0, 0.4);
        let m = tau(&UnitaryCoin::hadamard(), z).unwrap().m * tau(&x, z).unwrap().m.inverse().unwrap();
        let e = mat2_eig(&m);
        let (p, q) = two_coin_closed_form(a, b);
        let mut want = [p, q];
        want.sort_by(|x, y| y.total_cmp(x));
        assert!((e.values[0].norm() - want[0]).abs() < 1e-10);
        assert!((e.values[1].norm() - want[1]).abs() < 1e-10);
        assert!(want[0] > 1.0);
    }

    #[test]
    fn fixed_coin_in_band_is_inconclusive() {
        let mu = CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() };
        // On the circle τ_z(H) has eigenvalues i√2 sin θ ± √(1 − 2 sin²θ),
        // both unimodular while |sin θ| ≤ 1/√2.
        let z = Complex64::from_polar(1.0, 0.3);
        assert!(matches!(noncompactness_search(&mu, z, 6, 50, 1), Noncompactness::Inconclusive { .. }));
        let rep = irreducibility_orbit_test(&mu, z, 10, 1);
        assert!(matches!(rep.result, Irreducibility::Inconclusive { .. }));
    }

    #[test]
    fn haar_certificates() {
        let z = Complex64::from_polar(1.0, 2.2);
        match noncompactness_search(&CoinDistribution::Haar, z, 4, 8, 3) {
            Noncompactness::Certified(c) => assert!((c.verify(z).unwrap() - c.spectral_radius).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let rep = irreducibility_orbit_test(&CoinDistribution::Haar, z, 10, 3);
        assert!(matches!(rep.result, Irreducibility::Witness { .. }));
    }

    #[test]
    fn zeta_for_finite_laws() {
        let mu = CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() };
        match zeta_integrability(&mu, 3.0) {
            Zeta::Finite { expectation, .. } => {
                let s = std::f64::consts::SQRT_2;
                assert!((expectation - (s * (1.0 + 1.0 / s)).powi(3)).abs() < 1e-12);
            }
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn zeta_haar_log_divergence_detected() {
        assert!(matches!(zeta_integrability(&CoinDistribution::Haar, 2.0), Zeta::Divergent { .. }));
        assert!(matches!(zeta_integrability(&CoinDistribution::Haar, 0.5), Zeta::Finite { .. }));
    }
}
