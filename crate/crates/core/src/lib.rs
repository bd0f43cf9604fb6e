//! Disordered one-dimensional quantum walks.
//!
//! The walk operator is `W = U·S` on `ℓ²(ℤ)⊗C²`: the shift moves the `e₊`
//! component one site right and the `e₋` component one site left, then an
//! independent 2×2 unitary coin acts at every site. The crate provides
//!
//! * time evolution on a growing window ([`walk`]),
//! * the finite unitary restriction with reflecting boundaries and its
//!   spectral data ([`restriction`]),
//! * transfer matrices with the resolvent and spectral polynomial built
//!   from them ([`transfer`]),
//! * Lyapunov exponents, invariant measures, density of states and the
//!   Thouless relation ([`lyapunov`]),
//! * certificates for the hypotheses of the localization criterion
//!   ([`groupcheck`]),
//! * and a command line front end ([`cli`]).
//!
//! All modules share one basis convention, fixed in [`lattice`].

extern crate openblas_src;

pub mod cli;
pub mod coins;
pub mod groupcheck;
pub mod lattice;
pub mod lyapunov;
pub mod numerics;
pub mod restriction;
pub mod transfer;
pub mod walk;

pub use num_complex::Complex64;
