//! Compile quantum circuits into local Hamiltonians whose ground states encode
//! the circuit's computation history, then certify the spectral claims that make
//! adiabatic evolution along those Hamiltonians work.
//!
//! Three compilation flavors are provided:
//!
//! * [`five_local`]: the clock-register construction with 5-local terms,
//!   whose final ground state is the uniform history state.
//! * [`three_local`]: the same history-state idea with locality pushed down
//!   to 3 by paying an energy penalty `J` on illegal clock configurations.
//! * [`grid`]: a two-dimensional layout on six-state particles where the
//!   clock is carried by the *shape* of the active region, with all
//!   interactions between nearest neighbors on the grid.
//!
//! The [`spectral`] module holds the certification toolkit (restricted
//! operators, Perron/Markov mapping, conductance, ground-state geometry) and
//! [`evolution`] integrates the interpolated Schrödinger equation and measures
//! the clock register at the end.

pub mod circuit;
pub mod cli;
pub mod evolution;
pub mod five_local;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod spectral;
pub mod three_local;

mod error;

pub use error::{Error, Result};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex vector (states live here).
pub type CVector = nalgebra::DVector<C64>;

/// Dense real matrix (restricted clock-line operators, Markov kernels).
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Dense real vector.
pub type RVector = nalgebra::DVector<f64>;
