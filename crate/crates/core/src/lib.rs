//! Bounds and simulations for bipartite, binary-outcome Bell experiments.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] holds behaviors `p(a,b|x,y)` and their correlator form.
//! * [`functionals`] builds Bell expressions and computes their local,
//!   local-plus-one-PR-box and algebraic bounds by exact enumeration.
//! * [`quantum`] implements two-qubit states, Bloch-vector observables and the
//!   Born rule, plus the measurement families used for each inequality.
//! * [`optimize`] runs seesaw searches for qubit quantum maxima.
//! * [`analysis`] computes local content (via [`lp`]), predictability and
//!   count-based uncertainties.
//! * [`simulate`] draws coincidence counts for a noisy photon-pair source.
//! * [`fixtures`] exposes the published reference tables bundled with the crate.

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod functionals;
pub mod lp;
pub mod optimize;
pub mod quantum;
pub mod scenario;
pub mod simulate;

mod par;

pub use error::{Error, Result};
