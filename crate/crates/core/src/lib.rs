//! Error exponents for discriminating a pure bipartite state from white noise
//! under one-way LOCC, two-way LOCC and separable measurements, together with
//! exact finite-n oracles: Neyman-Pearson trade-offs over types, separable
//! sandwich bounds, exact error probabilities of two-round LOCC protocols and
//! Bahadur-Rao tail approximations.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod numeric;
pub mod protocol;
pub mod separable;
pub mod sld;
pub mod spectrum;
pub mod typelattice;

pub use error::{Error, Result};
pub use spectrum::SchmidtSpectrum;
