#![allow(dead_code)]

use locwalk::coins::{CoinDistribution, DisorderRealization};
use locwalk::restriction::{build_finite_walk, FiniteWalk};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn haar_walk(n: usize, seed: u64, eta_l: f64, eta_r: f64) -> FiniteWalk {
    build_finite_walk(&DisorderRealization::new(CoinDistribution::Haar, seed), n, eta_l, eta_r)
}

/// Two-sided Kolmogorov–Smirnov statistic between two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// KS statistic of a sample against a continuous CDF.
pub fn ks_against(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `M^t` by repeated multiplication.
pub fn matrix_power(m: &DMatrix<Complex64>, t: usize) -> DMatrix<Complex64> {
    let mut p = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..t {
        p = m * p;
    }
    p
}

/// Coefficients `c_k`, `k = 0..K`, of a polynomial sampled at the `K`-th
/// roots of unity, by a direct discrete Fourier transform.
pub fn dft_coefficients(samples: &[Complex64]) -> Vec<Complex64> {
    let k_total = samples.len();
    (0..k_total)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * Complex64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / k_total as f64))
                .sum::<Complex64>()
                / k_total as f64
        })
        .collect()
}
