//! Total-momentum statistics of ideal and model quantum gases in a periodic box.
//!
//! The crate covers the dual lattice and its irreducible cell, Gaussian lattice
//! sums, exact canonical spectra of ideal gases with total momentum resolved,
//! the large-N asymptotics of the momentum distribution, the center-of-mass
//! kernel, atomic-measure limits with the Fejér machinery, and the two-fluid
//! and Landau-criterion calculators built on top of them.
//!
//! Natural units (`ħ = m = k_B = 1`) are the default everywhere; see [`units`].
//! All reductions go through [`sum::ExactSum`], so results do not depend on
//! evaluation order and the `parallel` feature never changes an output bit.

pub mod asymptotics;
pub mod com;
pub mod error;
pub mod export;
pub mod fejer;
pub mod lattice;
pub mod measure;
pub mod par;
pub mod quad;
pub mod selftest;
pub mod spectrum;
pub mod sum;
pub mod theta;
pub mod tolerances;
pub mod twofluid;
pub mod units;

pub use error::{Error, Result};
pub use lattice::{BoxGeometry, DualVector};
pub use spectrum::{MomentumDistribution, SpectralTable, Statistics};
pub use theta::ThermalParams;
pub use units::Units;
