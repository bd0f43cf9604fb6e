use std::f64::consts::TAU;

use locwalk::coins::{sample_haar, substream, CoinDistribution, UnitaryCoin};
use locwalk::groupcheck::*;
use locwalk::numerics::{mat2_eig, CMat2};
use locwalk::transfer::tau;
use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Eigenvalue moduli from nalgebra's complex Schur form, ascending.
fn oracle_moduli(m: &CMat2) -> [f64; 2] {
    let e = Matrix2::new(m.m11, m.m12, m.m21, m.m22).schur().eigenvalues().unwrap();
    let mut v = [e[0].norm(), e[1].norm()];
    v.sort_by(f64::total_cmp);
    v
}

fn pair_product(a: Complex64, b: Complex64, z: Complex64) -> CMat2 {
    let x = two_coin_partner(a, b).unwrap();
    tau(&UnitaryCoin::hadamard(), z).unwrap().m * tau(&x, z).unwrap().inverse()
}

fn sorted(p: (f64, f64)) -> [f64; 2] {
    [p.0.min(p.1), p.0.max(p.1)]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1000) })]

    #[test]
    fn closed_form_matches_eigensolver(seed in any::<u64>(), phase in 0.0f64..TAU) {
        let u = sample_haar(&mut substream(seed, "pair", 0));
        let (a, b) = (u.a(), u.b());
        let m = pair_product(a, b, Complex64::from_polar(1.0, phase));
        let closed = sorted(two_coin_closed_form(a, b));
        let numeric = oracle_moduli(&m);
        for k in 0..2 {
            prop_assert!((closed[k] - numeric[k]).abs() <= 1e-9 * numeric[1].max(1.0));
        }
        if a.norm() < b.im.abs() {
            prop_assert!(closed[1] > 1.0);
        }
    }
}

#[test]
fn named_closed_form_cases() {
    let a = c(0.3, 0.0);
    let b = c(0.0, (1.0f64 - 0.09).sqrt());
    let m = pair_product(a, b, Complex64::from_polar(1.0, 0.8));
    let closed = sorted(two_coin_closed_form(a, b));
    let numeric = oracle_moduli(&m);
    assert!((closed[0] - numeric[0]).abs() <= 1e-10 && (closed[1] - numeric[1]).abs() <= 1e-10);
    assert!(closed[1] > 1.0);

    let one = sorted(two_coin_closed_form(c(1.0, 0.0), c(0.0, 0.0)));
    let numeric = oracle_moduli(&pair_product(c(1.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, 2.0)));
    assert!((one[0] - numeric[0]).abs() <= 1e-10 && (one[1] - numeric[1]).abs() <= 1e-10);
}

#[test]
fn exceptional_points_share_an_eigenvector() {
    let mut rng = substream(51, "exceptional", 0);
    let mut checked = 0;
    while checked < 50 {
        let u = sample_haar(&mut rng);
        let (a, b) = (u.a(), u.b());
        if a.norm() >= b.im.abs() {
            continue;
        }
        let x = two_coin_partner(a, b).unwrap();
        for z in two_coin_exceptional_z(a, b) {
            let th = tau(&UnitaryCoin::hadamard(), z).unwrap().m;
            let tx = tau(&x, z).unwrap().m;
            let m1 = th * tx.inverse().unwrap();
            let m2 = th.inverse().unwrap() * tx;
            // Some eigenvector of m1 must be an eigenvector of m2.
            let shared = mat2_eig(&m1).vectors.iter().any(|v| {
                let w = m2.apply(*v);
                let cross = (v[0] * w[1] - v[1] * w[0]).norm();
                cross <= 1e-8 * m2.max_abs()
            });
            assert!(shared, "a={a} b={b} z={z}");
            checked += 1;
        }
    }
}

#[test]
fn haar_grid_satisfies_all_hypotheses() {
    let opts = CheckOptions::default();
    for k in 0..32 {
        let z = Complex64::from_polar(1.0, TAU * k as f64 / 32.0);
        let rep = check_hypotheses(&CoinDistribution::Haar, z, &opts);
        assert_eq!(
            rep.verdicts,
            Verdicts {
                noncompact: true,
                irreducible: true,
                zeta_integrable: true
            },
            "z = {z}"
        );
        if let Noncompactness::Certified(cert) = &rep.noncompact {
            assert!(cert.verify(z).unwrap() > 1.0);
        }
    }
}

#[test]
fn haar_irreducibility_within_ten_trials() {
    let mut rng = substream(52, "irr", 0);
    for _ in 0..8 {
        let z = Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
        let rep = irreducibility_orbit_test(&CoinDistribution::Haar, z, 10, 3);
        assert!(matches!(rep.result, Irreducibility::Witness { .. }));
    }
}

#[test]
fn shared_phase_certificate() {
    let z = Complex64::from_polar(1.0, 1.3);
    for (r, rp) in [(0.2, 1.5), (0.9, 0.1), (2.0, 3.0)] {
        let (u, v) = shared_phase_pair(r, rp, 0.4, -1.1, 2.5, z).unwrap();
        let m = tau(&u, z).unwrap().m * tau(&v, z).unwrap().inverse();
        let (f, g) = shared_phase_eigen(r, rp);
        let mut expected = [(f - g).abs(), (f + g).abs()];
        expected.sort_by(f64::total_cmp);
        let numeric = oracle_moduli(&m);
        assert!((expected[0] - numeric[0]).abs() < 1e-10 && (expected[1] - numeric[1]).abs() < 1e-10);
        assert!(numeric[1] > 1.0);
    }
}

#[test]
fn two_coin_set_at_generic_point() {
    let a = c(0.4, 0.0);
    let b = c(0.1, (1.0f64 - 0.17).sqrt());
    let mu = CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 0.5), (two_coin_partner(a, b).unwrap(), 0.5)]).unwrap();
    let z = Complex64::from_polar(1.0, 0.9);
    let rep = check_hypotheses(&mu, z, &CheckOptions::default());
    assert!(rep.verdicts.noncompact && rep.verdicts.irreducible && rep.verdicts.zeta_integrable);
    assert!(rep.exceptional_z_distance.unwrap() > 1e-3);
    assert!(rep.irreducible.eigenvector_separation.unwrap() > 1e-6);
}

#[test]
fn single_coin_is_inconclusive() {
    let mu = CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() };
    let z = Complex64::from_polar(1.0, 0.3);
    let rep = check_hypotheses(&mu, z, &CheckOptions::default());
    assert!(!rep.verdicts.noncompact);
    assert!(matches!(rep.irreducible.result, Irreducibility::Inconclusive { points_found, .. } if points_found <= 2));
}

#[test]
fn finite_law_zeta_is_exact_sum() {
    let x = UnitaryCoin::from_ab(c(0.6, 0.0), c(0.0, 0.8), 0.0).unwrap();
    let mu = CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 0.25), (x, 0.75)]).unwrap();
    for zeta in [0.5, 1.0, 2.0, 7.0] {
        let Zeta::Finite { expectation, .. } = zeta_integrability(&mu, zeta) else {
            panic!("finite law flagged divergent");
        };
        let h = (1.0 + 0.5f64.sqrt()) * 2.0f64.sqrt();
        let xn: f64 = (1.0 + 0.8) / 0.6;
        let expected = 0.25 * h.powf(zeta) + 0.75 * xn.powf(zeta);
        assert!((expectation - expected).abs() <= 1e-12 * expected);
    }
}

#[test]
fn report_serializes_three_verdicts() {
    let rep = check_hypotheses(&CoinDistribution::Haar, Complex64::from_polar(1.0, 0.25), &CheckOptions::default());
    let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
    for key in ["noncompact", "irreducible", "zeta_integrable"] {
        assert!(v["verdicts"][key].is_boolean(), "{key}");
    }
}
