mod common;

use common::{ks_against, ks_two_sample};
use locwalk::coins::{sample_haar, substream, CoinDistribution, DisorderRealization, UnitaryCoin, COIN_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

const DRAWS: usize = 100_000;

#[test]
fn haar_first_moment_vanishes() {
    let mut rng = substream(41, "moment", 0);
    let mut sum = [Complex64::new(0.0, 0.0); 4];
    for _ in 0..DRAWS {
        let u = sample_haar(&mut rng);
        for (s, e) in sum.iter_mut().zip([u.a(), u.b(), u.c(), u.d()]) {
            *s += e;
        }
    }
    for s in sum {
        assert!((s / DRAWS as f64).norm() <= 0.02, "{s}");
    }
}

#[test]
fn haar_corner_modulus_is_uniform() {
    let mut rng = substream(42, "ks", 0);
    let xs: Vec<f64> = (0..DRAWS).map(|_| sample_haar(&mut rng).a().norm_sqr()).collect();
    let d = ks_against(&xs, |x| x.clamp(0.0, 1.0));
    assert!(d <= 0.01, "KS = {d}");
}

#[test]
fn haar_is_left_and_right_invariant() {
    let v = UnitaryCoin::from_ab(Complex64::new(0.6, 0.3), Complex64::new(-0.2, 0.714_142_842_854_285), 0.4).unwrap();
    let mut rng = substream(43, "invariance", 0);
    let plain: Vec<UnitaryCoin> = (0..DRAWS).map(|_| sample_haar(&mut rng)).collect();
    let fresh: Vec<UnitaryCoin> = (0..DRAWS).map(|_| sample_haar(&mut rng)).collect();
    let base: Vec<f64> = plain.iter().map(|u| u.a().norm_sqr()).collect();
    for stat in [|u: &UnitaryCoin| u.a().norm_sqr(), |u: &UnitaryCoin| u.b().arg()] {
        let reference: Vec<f64> = plain.iter().map(stat).collect();
        let left: Vec<f64> = fresh.iter().map(|u| stat(&v.left_mul(u))).collect();
        let right: Vec<f64> = fresh.iter().map(|u| stat(&u.left_mul(&v))).collect();
        assert!(ks_two_sample(&reference, &left) <= 0.01);
        assert!(ks_two_sample(&reference, &right) <= 0.01);
    }
    assert!(ks_against(&base, |x| x.clamp(0.0, 1.0)) <= 0.01);
}

#[test]
fn realization_is_deterministic_over_wide_range() {
    let a = DisorderRealization::new(CoinDistribution::Haar, 44);
    let b = DisorderRealization::new(CoinDistribution::Haar, 44);
    let forward = a.coins(-10_000, 10_000);
    // Query in reverse order so nothing depends on the access sequence.
    for k in (0..forward.len()).rev().step_by(7) {
        let x = k as i64 - 10_000;
        assert_eq!(forward[k], b.coin_at(x));
        assert_eq!(forward[k], a.coin_at(x));
    }
    let other = DisorderRealization::new(CoinDistribution::Haar, 45);
    assert_ne!(other.coin_at(0), a.coin_at(0));
}

#[test]
fn fixed_law_is_constant() {
    let r = DisorderRealization::fixed(UnitaryCoin::hadamard());
    for x in -50..50 {
        assert_eq!(r.coin_at(x), UnitaryCoin::hadamard());
    }
}

#[test]
fn discrete_frequencies() {
    let x = UnitaryCoin::from_ab(Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.953_939_201_416_945_6), 0.0).unwrap();
    let mu = CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 0.5), (x, 0.5)]).unwrap();
    let r = DisorderRealization::new(mu, 46);
    let hits = r.coins(0, 9_999).iter().filter(|u| **u == UnitaryCoin::hadamard()).count();
    let f = hits as f64 / 10_000.0;
    assert!((0.47..=0.53).contains(&f), "{f}");
}

#[test]
fn reflectivity_examples() {
    assert_eq!(CoinDistribution::Fixed { coin: UnitaryCoin::hadamard() }.reflectivity(), 0.0);
    let mu = CoinDistribution::discrete(vec![(UnitaryCoin::flip(0.4, 1.0), 0.3), (UnitaryCoin::hadamard(), 0.7)]).unwrap();
    assert!((mu.reflectivity() - 0.3).abs() < 1e-15);
    assert_eq!(CoinDistribution::Haar.reflectivity(), 0.0);
}

#[test]
fn mixture_json_roundtrip() {
    let mu = CoinDistribution::mixture(vec![
        (CoinDistribution::Haar, 0.25),
        (CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 1.0)]).unwrap(), 0.75),
    ])
    .unwrap();
    let text = serde_json::to_string(&mu).unwrap();
    assert_eq!(CoinDistribution::from_json(&text).unwrap(), mu);
}

fn arb_law() -> impl Strategy<Value = CoinDistribution> {
    prop_oneof![
        Just(CoinDistribution::Haar),
        (0.0f64..6.3, 0.0f64..6.3).prop_map(|(p, q)| CoinDistribution::Fixed { coin: UnitaryCoin::flip(p, q) }),
        (0.05f64..0.95).prop_map(|w| CoinDistribution::mixture(vec![
            (CoinDistribution::Haar, w),
            (CoinDistribution::discrete(vec![(UnitaryCoin::hadamard(), 0.5), (UnitaryCoin::pauli_x(), 0.5)]).unwrap(), 1.0 - w),
        ])
        .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn every_drawn_coin_is_unitary(mu in arb_law(), seed in any::<u64>(), x in -1_000_000i64..1_000_000) {
        let r = DisorderRealization::new(mu, seed);
        let u = r.coin_at(x);
        prop_assert!(u.unitarity_residual() <= COIN_TOL);
        prop_assert_eq!(u, r.coin_at(x));
    }
}
