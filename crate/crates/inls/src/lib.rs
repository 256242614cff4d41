//! Numerical laboratory for the 3D radial inhomogeneous nonlinear
//! Schrödinger equation
//!
//! `i ∂_t u + Δu = |x|^{-a}|u|^{p-2}u - |x|^{-b}|u|^{4-2b}u`
//!
//! with a defocusing subcritical term and a focusing energy-critical term.
//! The crate provides the scalar functionals and Pohozaev quantities, the
//! explicit critical ground state with its sharp constants, Payne-Sattinger
//! classification of sub-threshold data, a conservative Strang-splitting
//! integrator with blow-up detection, virial/Morawetz diagnostics, and a
//! deterministic experiment harness.

pub mod calibration;
pub mod classifier;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod harness;
pub mod interp;
pub mod params;

pub use error::{Error, Result};
pub use field::RadialField;
pub use functionals::FunctionalReport;
pub use grid::RadialGrid;
pub use params::Params;
