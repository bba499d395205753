//! Numerical core for abelian additive difference equations and the
//! Yangian / quantum loop algebra correspondence built on them.
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation:
//! special functions, rational matrices, fundamental solutions and
//! connection matrices of `φ(u+1) = A(u)φ(u)`, inverse monodromy for
//! commuting families, finite-dimensional module data on both sides, and the
//! functors `F` and `G` between them.
//!
//! File formats, reports and the command line live in the companion
//! `monodromy` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod branch;
pub mod diffeq;
pub mod error;
pub mod functor;
pub mod linalg;
pub mod poly;
pub mod ratmat;
pub mod repmodel;
pub mod sample;
pub mod specfun;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type Mat = nalgebra::DMatrix<C64>;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
