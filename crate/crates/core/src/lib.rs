//! Resolvent growth, polynomial semigroup decay and time-periodic
//! solutions for finite-dimensional partially dissipative systems.
//!
//! A [`Generator`] pairs a system matrix `A` with the Gram matrix of an
//! energy inner product. [`diagnostics`] measures how `||(isI - A)^{-1}||`
//! grows along the imaginary axis and how `||e^{tA} A^{-1}||` decays,
//! [`periodic`] solves `U' = AU + F` for `T`-periodic forcing mode by mode,
//! and [`march`] integrates the same problem in time as an independent check.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod march;
pub mod operators;
pub mod periodic;

pub use error::{Error, Result};
pub use operators::{make_model, Flags, Generator, ModelKind, ModelSpec};
pub use periodic::{FourierForcing, PeriodicSolution};
