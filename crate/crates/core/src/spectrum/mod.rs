//! Exact canonical spectra of ideal gases with the total momentum resolved,
//! and everything computed from them: partition functions, the momentum
//! distribution `ν_Q`, occupation numbers, sector dispersions and the
//! Galilean boost identity.
//!
//! Single-particle energies are `ħ²k²/2m` with `k ∈ Λ*`, so every many-body
//! energy is an integer multiple of `ħ²(2π/L)²/2m`. Enumeration works with
//! those integers and converts to energies once, which keeps boost identities
//! exact up to a single rounding.

mod cycles;
mod enumerate;
mod io;
mod oracle;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{irreducible_set, is_irreducible, BoxGeometry, DualVector, LatticeWeights};
use crate::sum::ExactSum;
use crate::theta::ThermalParams;
use crate::units::Units;

pub use cycles::canonical_distribution;
pub use enumerate::{
    cutoff_for_tail, enumerate_spectrum, enumerate_states, ln_truncation_bound, occupation_expectation,
    OccupationState,
};
pub use io::SpectralTableDocument;
pub use oracle::boltzmann_convolution_oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boltzmann,
    Bose,
    Fermi,
}

impl Statistics {
    pub const ALL: [Statistics; 3] = [Statistics::Boltzmann, Statistics::Bose, Statistics::Fermi];

    pub fn name(&self) -> &'static str {
        match self {
            Statistics::Boltzmann => "boltzmann",
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boltzmann" => Ok(Statistics::Boltzmann),
            "bose" => Ok(Statistics::Bose),
            "fermi" => Ok(Statistics::Fermi),
            other => Err(Error::InvalidParams(format!("unknown statistics `{other}`"))),
        }
    }
}

/// One energy eigenvalue with its multiplicity inside a momentum sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
}

/// All eigenvalues `E_{Q,n} ≤ e_max`, grouped by total wave vector `Q` and
/// sorted ascending within each sector. Equal eigenvalues are merged into
/// one [`Level`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    pub geometry: BoxGeometry,
    pub units: Units,
    pub statistics: Statistics,
    pub e_max: f64,
    pub entries: BTreeMap<DualVector, Vec<Level>>,
}

/// `ħ²(2π/L)²/2m`, the energy of one unit of `|n|²`.
pub fn energy_quantum(geom: &BoxGeometry, units: &Units) -> f64 {
    units.kinetic_prefactor() * (2.0 * PI / geom.side).powi(2)
}

impl SpectralTable {
    pub fn energy_quantum(&self) -> f64 {
        energy_quantum(&self.geometry, &self.units)
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.entries.values().filter_map(|v| v.first()).map(|l| l.energy).min_by(f64::total_cmp)
    }

    /// Total number of eigenstates, counting degeneracy.
    pub fn state_count(&self) -> u64 {
        self.entries.values().flatten().map(|l| l.degeneracy).sum()
    }

    /// `Σ_n e^{−β(E_{Q,n} − e_ref)}` for sector `Q` (zero if absent).
    pub fn sector_weight(&self, q: &DualVector, beta: f64, e_ref: f64) -> f64 {
        self.entries
            .get(q)
            .map(|levels| levels.iter().map(|l| l.degeneracy as f64 * (-beta * (l.energy - e_ref)).exp()).collect::<ExactSum>().value())
            .unwrap_or(0.0)
    }

    /// Natural log of a certified bound on the Boltzmann weight of all
    /// eigenstates above the cutoff at inverse temperature `beta`.
    pub fn ln_tail_bound(&self, beta: f64) -> Result<f64> {
        ln_truncation_bound(&self.geometry, &self.units, beta, self.e_max)
    }
}

/// Partition sums of a table, with every weight measured relative to
/// `e^{−β·reference_energy}` to stay in floating-point range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionFunctions {
    pub reference_energy: f64,
    /// Sum over all tabulated states.
    pub z: f64,
    /// Sum over the irreducible sectors only.
    pub z_irred: f64,
    /// Certified bound on the weight of states above the cutoff.
    pub tail_bound: f64,
}

impl PartitionFunctions {
    pub fn ratio(&self) -> f64 {
        self.z / self.z_irred
    }
}

pub fn partition_functions(table: &SpectralTable, th: &ThermalParams) -> Result<PartitionFunctions> {
    let e_ref = table.min_energy().ok_or(Error::CutoffTooSmall(table.e_max))?;
    let beta = th.beta;
    let mut z = ExactSum::new();
    let mut z_irred = ExactSum::new();
    for (q, levels) in &table.entries {
        let irred = is_irreducible(q, table.geometry.particles);
        for l in levels {
            let w = l.degeneracy as f64 * (-beta * (l.energy - e_ref)).exp();
            z.add(w);
            if irred {
                z_irred.add(w);
            }
        }
    }
    let tail = (table.ln_tail_bound(beta)? + beta * e_ref).exp();
    Ok(PartitionFunctions { reference_energy: e_ref, z: z.value(), z_irred: z_irred.value(), tail_bound: tail })
}

/// Probability weights on `Λ*` with a certified bound on the missing mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumDistribution {
    pub geometry: BoxGeometry,
    pub weights: LatticeWeights,
    /// Upper bound on `1 − Σ weights` caused by truncation.
    pub deficit: f64,
}

impl MomentumDistribution {
    pub fn get(&self, q: &DualVector) -> f64 {
        self.weights.get(q).unwrap_or(0.0)
    }
}

/// `ν_Q = Z^{−1} Σ_n e^{−βE_{Q,n}}`, normalized by the tabulated `Z` plus
/// its certified tail so that the reported weights never overshoot.
pub fn nu_distribution(table: &SpectralTable, th: &ThermalParams) -> Result<MomentumDistribution> {
    let pf = partition_functions(table, th)?;
    let norm = pf.z + pf.tail_bound;
    let weights = LatticeWeights::from_map(
        table.entries.keys().map(|q| (*q, table.sector_weight(q, th.beta, pf.reference_energy) / norm)).collect(),
    );
    Ok(MomentumDistribution { geometry: table.geometry, weights, deficit: pf.tail_bound / norm })
}

/// Largest integer coordinate inside the max-norm ball `‖Q‖∞ ≤ κ`.
pub(crate) fn kappa_index(kappa: f64, side: f64) -> i64 {
    // a relative slack keeps points sitting exactly on the boundary inside
    (kappa * side / (2.0 * PI) * (1.0 + 1e-12)).floor() as i64
}

/// `Γ^N_L(κ) = Σ_{‖Q‖∞ ≤ κ} ν_Q`.
pub fn gamma_cdf(dist: &MomentumDistribution, kappa: f64) -> f64 {
    if kappa < 0.0 {
        return 0.0;
    }
    let m = kappa_index(kappa, dist.geometry.side);
    dist.weights.iter().filter(|(q, _)| q.max_abs() <= m).map(|e| e.1).collect::<ExactSum>().value()
}

/// Per-sector Gibbs factors of the irreducible sectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    /// `Ω(q) = Σ_n e^{−β(E_{q,n} − E_{q,0})}`.
    pub omega: BTreeMap<DualVector, f64>,
    /// `X(q) = −β ε_q + ln Ω(q)`.
    pub log_weight: BTreeMap<DualVector, f64>,
    /// Maximizer of `X`, lexicographically smallest among ties.
    pub q_max: DualVector,
}

pub fn omega_and_argmax(table: &SpectralTable, th: &ThermalParams) -> Result<OmegaReport> {
    let eps = epsilon_dispersion(table)?;
    let mut omega = BTreeMap::new();
    let mut log_weight = BTreeMap::new();
    for q in irreducible_set(&table.geometry) {
        let Some(levels) = table.entries.get(&q) else { continue };
        let e0 = levels[0].energy;
        let om = table.sector_weight(&q, th.beta, e0);
        omega.insert(q, om);
        log_weight.insert(q, -th.beta * eps[&q] + om.ln());
    }
    let mut best: Option<(DualVector, f64)> = None;
    for (q, x) in &log_weight {
        // BTreeMap order is lexicographic, so strict > keeps the smallest tie
        if best.is_none_or(|(_, bx)| *x > bx) {
            best = Some((*q, *x));
        }
    }
    let q_max = best.ok_or(Error::CutoffTooSmall(table.e_max))?.0;
    Ok(OmegaReport { omega, log_weight, q_max })
}

/// `ε_Q = E_{Q,0} − E_{0,0}` for every tabulated sector. Fermi gases can
/// have negative values.
pub fn epsilon_dispersion(table: &SpectralTable) -> Result<BTreeMap<DualVector, f64>> {
    let zero = DualVector::zero(table.geometry.dim);
    let e00 = table.entries.get(&zero).and_then(|l| l.first()).ok_or(Error::MissingZero)?.energy;
    Ok(table.entries.iter().map(|(q, l)| (*q, l[0].energy - e00)).collect())
}

/// Outcome of comparing boosted sectors against the Galilean prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalileanReport {
    pub max_residual: f64,
    pub pairs: usize,
    pub levels: usize,
    /// Sector pairs whose level structure disagreed inside the window.
    pub mismatched_pairs: usize,
    /// Set when no pair could be compared.
    pub empty: bool,
}

/// Energy shift `(ħ²/2m)(N k² + 2 k·Q)` of boosting sector `Q` by `Nk`.
pub fn boost_shift(table: &SpectralTable, big_q: &DualVector, k: &DualVector) -> f64 {
    let n = table.geometry.particles as i64;
    table.energy_quantum() * (n * k.norm2() + 2 * k.dot(big_q)) as f64
}

/// Checks `E_{Q+Nk,n} = E_{Q,n} + (ħ²/2m)(Nk² + 2k·Q)` for every pair of
/// tabulated sectors related by a boost, restricted to levels that the
/// cutoff keeps on both sides.
pub fn galilean_check(table: &SpectralTable) -> GalileanReport {
    let n = table.geometry.particles as i64;
    let keys: Vec<DualVector> = table.entries.keys().copied().collect();
    let mut shifts = Vec::new();
    for a in &keys {
        for b in &keys {
            let diff = *b - *a;
            if !diff.is_zero() && diff.coords().iter().all(|c| c % n == 0) {
                shifts.push((*a, diff.map(|c| c / n)));
            }
        }
    }
    compare_boosts(table, &shifts)
}

/// [`galilean_check`] restricted to the given boost vectors `k`.
pub fn galilean_check_shifts(table: &SpectralTable, ks: &[DualVector]) -> GalileanReport {
    let n = table.geometry.particles as i64;
    let mut shifts = Vec::new();
    for q in table.entries.keys() {
        for k in ks {
            if table.entries.contains_key(&(*q + n * *k)) {
                shifts.push((*q, *k));
            }
        }
    }
    compare_boosts(table, &shifts)
}

fn compare_boosts(table: &SpectralTable, shifts: &[(DualVector, DualVector)]) -> GalileanReport {
    let n = table.geometry.particles as i64;
    let slack = 1e-9 * table.e_max.abs().max(1.0);
    let mut report = GalileanReport { max_residual: 0.0, pairs: 0, levels: 0, mismatched_pairs: 0, empty: true };
    for (q, k) in shifts {
        let a = &table.entries[q];
        let b = &table.entries[&(*q + n * *k)];
        let shift = boost_shift(table, q, k);
        let threshold = table.e_max - shift.max(0.0) + slack;
        let a_in: Vec<&Level> = a.iter().filter(|l| l.energy <= threshold).collect();
        let b_in: Vec<&Level> = b.iter().filter(|l| l.energy - shift <= threshold).collect();
        report.pairs += 1;
        report.empty = false;
        if a_in.len() != b_in.len() || a_in.iter().zip(&b_in).any(|(x, y)| x.degeneracy != y.degeneracy) {
            report.mismatched_pairs += 1;
            report.max_residual = f64::INFINITY;
            continue;
        }
        for (x, y) in a_in.iter().zip(&b_in) {
            report.levels += 1;
            report.max_residual = report.max_residual.max((y.energy - (x.energy + shift)).abs());
        }
    }
    report
}

/// Relabels every sector `Q → Q + Nk`; energies are untouched.
pub fn boost_table(table: &SpectralTable, k: &DualVector) -> SpectralTable {
    let n = table.geometry.particles as i64;
    SpectralTable {
        entries: table.entries.iter().map(|(q, l)| (*q + n * *k, l.clone())).collect(),
        ..table.clone()
    }
}

#[cfg(test)]
mod tests;
