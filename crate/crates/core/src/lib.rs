//! Orlicz-Lorentz gauge functionals and positive integral operators on the
//! half-line, with numerical checks of the boundedness conditions that govern
//! inequalities of the form `ρ₁((T_K f)*) ≤ C ρ₂(f*)`.
//!
//! - [`young`]: N-functions, inverses, complementary functions, Δ₂.
//! - [`grid`]: piecewise-constant functions, weights, rearrangements.
//! - [`gauge`]: Luxemburg gauges, the dual gauge and the down dual.
//! - [`kernel`] / [`operators`]: kernels, iterated rearrangement and the
//!   operators built from them.
//! - [`conditions`]: condition checkers producing [`conditions::ConditionReport`]s.
//! - [`harness`]: empirical best constants, O'Neil comparison, experiment runs.
//! - [`spec`]: the small text language naming functions, weights and kernels.

pub mod conditions;
pub mod error;
pub mod gauge;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod operators;
pub mod quad;
pub mod spec;
pub mod sum;
pub mod young;

pub use error::{Error, Result};

pub use grid::{GridFunction, Weight};

pub use young::NFunction;

pub use gauge::{GaugeSpec, GaugeValue};

pub use kernel::{KernelFamily, KernelGrid};
