mod common;

use common::{dft_coefficients, haar_walk};
use locwalk::coins::{substream, sample_haar};
use locwalk::lattice;
use locwalk::transfer::*;
use num_complex::Complex64;
use rand::Rng;

#[test]
fn resolvent_matches_dense_inverse_everywhere() {
    let mut rng = substream(100, "resolvent", 0);
    for trial in 0..30u64 {
        let n = (trial % 5) as usize;
        let fw = haar_walk(n, trial, rng.random::<f64>() * 6.0, rng.random::<f64>() * 6.0);
        let radius = [0.7, 1.3, 1.0][trial as usize % 3];
        let z = Complex64::from_polar(radius, rng.random::<f64>() * std::f64::consts::TAU);
        if fw.spectral_distance(z).unwrap() < 1e-3 {
            continue;
        }
        let g = fw.resolvent(z).unwrap();
        let sol = CompatibleSolutions::new(&fw, z).unwrap();
        for n_f in lattice::f_min(n)..=lattice::f_max(n) {
            for m_f in lattice::f_min(n)..=lattice::f_max(n) {
                let direct = g[(lattice::matrix_offset(n, n_f).unwrap(), lattice::matrix_offset(n, m_f).unwrap())].norm();
                let via = sol.resolvent_modulus(n_f, m_f).unwrap();
                let rel = (via - direct).abs() / direct.max(1e-300);
                assert!(rel < 1e-8, "N={n} z={z} n={n_f} m={m_f}: {via} vs {direct}");
            }
        }
    }
}

#[test]
fn decomposition_on_circle() {
    let mut rng = substream(101, "decomp", 0);
    for trial in 0..20u64 {
        let n = 1 + (trial % 4) as usize;
        let fw = haar_walk(n, 50 + trial, 0.4, 2.2);
        let z = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
        let g = fw.resolvent(z).unwrap();
        let sol = CompatibleSolutions::new(&fw, z).unwrap();
        let ni = n as i64;
        for x in -ni..=ni + 1 {
            for y in -ni..=ni + 1 {
                let d = resolvent_decomposition(&sol, x, y).unwrap();
                for phi in [d.phi_minus, d.phi_plus] {
                    assert!((phi[0].norm() - phi[1].norm()).abs() < 1e-10);
                }
                let direct = g[(lattice::matrix_offset(n, 2 * x).unwrap(), lattice::matrix_offset(n, 2 * y - 1).unwrap())].norm();
                assert!((d.value - direct).abs() / direct < 1e-8, "x={x} y={y}: {} vs {direct}", d.value);
            }
        }
    }
}

#[test]
fn polynomial_fit_degree_and_leading_coefficient() {
    for seed in 0..5 {
        let n = 3;
        let fw = haar_walk(n, seed, 0.7, 1.9);
        let deg = 4 * (n + 1);
        let k = 2 * deg + 8;
        let samples: Vec<Complex64> = (0..k)
            .map(|j| spectral_polynomial_eval(&fw, Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64)).unwrap())
            .collect();
        let coef = dft_coefficients(&samples);
        let scale = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (j, c) in coef.iter().enumerate() {
            if j > deg {
                assert!(c.norm() < 1e-10 * scale, "coefficient {j} = {c}");
            }
        }
        let lead = leading_coefficient(&fw).unwrap();
        assert!((coef[deg] - lead).norm() / lead.norm() < 1e-8, "{} vs {lead}", coef[deg]);
    }
}

#[test]
fn polynomial_vanishes_on_spectrum() {
    let fw = haar_walk(4, 9, 0.0, 0.0);
    let grid_max = (0..4000)
        .map(|j| spectral_polynomial_eval(&fw, Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 4000.0)).unwrap().norm())
        .fold(0.0, f64::max);
    for l in fw.eigenvalues().unwrap() {
        assert!(spectral_polynomial_eval(&fw, l).unwrap().norm() <= 1e-6 * grid_max);
    }
}

#[test]
fn roundtrip_haar() {
    let mut rng = substream(7, "rt", 0);
    for _ in 0..1000 {
        let u = sample_haar(&mut rng);
        let z = Complex64::from_polar(1.0, rng.random::<f64>() * 6.3);
        assert!(roundtrip_deviation(&u, z).unwrap() <= 1e-10);
    }
}
