//! The single basis convention shared by every module.
//!
//! `ℓ²(ℤ)⊗C²` is identified with `ℓ²(ℤ)` by `δ_x⊗e₋ ↦ f_{2x}` and
//! `δ_x⊗e₊ ↦ f_{2x+1}`. The finite restriction of half-width `N` lives on
//! the f-indices `−2N−1 ..= 2N+2`, stored at offset `f + 2N + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    /// `e₋`, moved one site to the left by the shift.
    Minus,
    /// `e₊`, moved one site to the right by the shift.
    Plus,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Minus, Spin::Plus];

    /// Position of this component in a coin's `(e₋, e₊)` basis.
    pub fn component(self) -> usize {
        match self {
            Spin::Minus => 0,
            Spin::Plus => 1,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Minus => "-",
            Spin::Plus => "+",
        })
    }
}

impl FromStr for Spin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "-" | "minus" | "m" | "0" => Ok(Spin::Minus),
            "+" | "plus" | "p" | "1" => Ok(Spin::Plus),
            other => Err(format!("unknown spin `{other}` (expected `-` or `+`)")),
        }
    }
}

pub fn f_index(site: i64, spin: Spin) -> i64 {
    2 * site + spin.component() as i64
}

pub fn site_spin(f: i64) -> (i64, Spin) {
    let site = f.div_euclid(2);
    let spin = if f.rem_euclid(2) == 0 { Spin::Minus } else { Spin::Plus };
    (site, spin)
}

/// The partner index `m̂`: `m − 1` for even `m`, `m + 1` for odd `m`.
pub fn hat(m: i64) -> i64 {
    if m.rem_euclid(2) == 0 {
        m - 1
    } else {
        m + 1
    }
}

/// Dimension `4(N+1)` of the restriction of half-width `n`.
pub fn restriction_dim(n: usize) -> usize {
    4 * (n + 1)
}

pub fn f_min(n: usize) -> i64 {
    -2 * n as i64 - 1
}

pub fn f_max(n: usize) -> i64 {
    2 * n as i64 + 2
}

/// Row/column of f-index `f` in the restriction matrix, if it is retained.
pub fn matrix_offset(n: usize, f: i64) -> Option<usize> {
    if f < f_min(n) || f > f_max(n) {
        None
    } else {
        Some((f - f_min(n)) as usize)
    }
}

pub fn offset_to_f(n: usize, k: usize) -> i64 {
    k as i64 + f_min(n)
}
