//! Coherent-state frames on truncated Hilbert spaces: standard and "unlike"
//! resolutions of unity, spin coherent states, weak energy values, the
//! weak-value phase-space path integral and a planar toy frame.

pub mod error;
pub mod fock;
pub mod ladder;
pub mod quadrature;
pub mod closure;
pub mod spin;
pub mod weak;
pub mod propagator;
pub mod plane;
pub mod transforms;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
