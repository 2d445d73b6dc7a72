//! Quasi-Hermitian quantum mechanics in a truncated oscillator basis.
//!
//! [`opalg`] holds the dense operator algebra, [`nhqcore`] the metric
//! machinery, [`models`] the Swanson and imaginary-cubic Hamiltonians,
//! [`gaugeem`] electromagnetic gauging and transition rates, and
//! [`pertoracle`] a brute-force Rayleigh-Schroedinger reference.

pub mod error;
pub mod gaugeem;
pub mod models;
pub mod nhqcore;
pub mod opalg;
pub mod pertoracle;

pub use error::{QhermError, Result};
pub use opalg::{BasisSpec, OperatorMatrix, StateVector, C64};
