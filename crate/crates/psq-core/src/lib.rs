//! Exact symbolic algebra and numerical verification for quantum canonical
//! transformations in the phase-space (star-product) formalism.
//!
//! The exact layer works over Q(i)[hbar^±1, params^±1]: star products, Moyal
//! brackets, Weyl (de)quantization, generating functions and intertwiners are
//! literal identities. The grid layer samples what the exact layer cannot
//! close (special-function star-genvalue problems, general sampled star
//! products) with spectral derivatives and windowed residual norms.

pub mod airy;
pub mod closedform;
pub mod coeff;
pub mod ct;
pub mod diffop;
pub mod error;
pub mod exppoly;
pub mod gauss;
pub mod grid;
pub mod intertwine;
pub mod pointct;
pub mod poly;
pub mod star;
pub mod weyl;

pub use coeff::{intern_symbol, symbol_name, Coeff, SymbolId, HBAR};
pub use error::{AlgebraError, CtError, GridError, PointSolveError};
pub use exppoly::{ExpPoly, PhaseFn};
pub use gauss::GaussRat;
pub use poly::PhasePoly;
pub use star::{moyal_bracket, moyal_bracket_poly, star, star_exponential, star_inverse_series};
