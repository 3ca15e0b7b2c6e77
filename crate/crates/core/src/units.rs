//! Unit systems. Natural units set `ħ = m = k_B = 1`; the SI preset uses
//! CODATA constants and the helium-4 atomic mass.

use serde::{Deserialize, Serialize};

pub const HBAR_SI: f64 = 1.054_571_817e-34;
pub const KB_SI: f64 = 1.380_649e-23;
pub const HELIUM4_MASS_KG: f64 = 6.646_473_1e-27;
/// Lambda-point temperature of helium-4 in kelvin.
pub const HELIUM4_LAMBDA_POINT_K: f64 = 2.17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    pub kb: f64,
}

impl Units {
    pub const fn natural() -> Self {
        Units { hbar: 1.0, mass: 1.0, kb: 1.0 }
    }

    pub const fn helium4_si() -> Self {
        Units { hbar: HBAR_SI, mass: HELIUM4_MASS_KG, kb: KB_SI }
    }

    /// `ħ²/2m`, the prefactor of every kinetic energy.
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for Units {
    fn default() -> Self {
        Units::natural()
    }
}
