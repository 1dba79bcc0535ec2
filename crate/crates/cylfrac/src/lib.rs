//! Numerical toolkit for the conformal fractional Laplacian on the cylinder
//! `R x S^{n-1}`.
//!
//! The crate evaluates the closed-form Fourier symbol of the operator and its
//! normalization constants, the AdS-type extension metric and its special
//! defining function, conserved Hamiltonians of the extension problem,
//! linearization periods of Delaunay-type solutions, and the classical
//! second-order Fowler system. Every closed-form quantity is paired with an
//! independent numerical oracle (ODE solves, quadrature, series) so the two
//! routes can be checked against each other.
//!
//! Modules mirror the mathematical layers:
//!
//! * [`specfun`] - complex Gamma, digamma, Beta and Gauss hypergeometric
//!   functions with the exact identities the rest of the crate relies on.
//! * [`symbol`] - the Fourier multiplier `Theta^k_gamma(xi)`, its integer-order
//!   product form and the normalization constants.
//! * [`geometry`] - extension-metric coefficients, the special defining
//!   function `rho*`, the bubble constant and the monotone Gamma-ratio `X`.
//! * [`linearization`] - the Gamma-ratio equation `F(beta) = 1`, its unique
//!   positive root, periods, and the numeric scan of the mode conjecture.
//! * [`extension`] - per-mode scattering ODE solves (the symbol oracle),
//!   spectral field assembly, Hamiltonian evaluation and Neumann traces.
//! * [`fowler`] - the classical `gamma = 1` ODE, its first integral, orbits
//!   and periods.
//! * [`acceptance`] - the end-to-end verification suite used by the CLI and
//!   the integration tests.

pub mod acceptance;
pub mod error;
pub mod extension;
pub mod fowler;
pub mod geometry;
pub mod linearization;
pub mod quadrature;
pub mod specfun;
pub mod symbol;

pub use error::{Error, Result};
