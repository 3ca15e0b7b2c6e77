//! Enumeration of many-body eigenstates below an energy cutoff.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{energy_quantum, Level, MomentumDistribution, SpectralTable, Statistics};
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, DualVector, LatticeWeights};
use crate::sum::ExactSum;
use crate::theta::{theta3, ThermalParams};
use crate::tolerances::STATE_GUARD;
use crate::units::Units;

/// Single-particle modes with `|n|² ≤ s_max`, ordered by `(|n|², n)`.
pub(crate) struct Modes {
    pub vectors: Vec<DualVector>,
    pub norm2: Vec<u64>,
}

pub(crate) fn modes(dim: usize, s_max: u64) -> Modes {
    let r = (s_max as f64).sqrt().floor() as i64;
    let mut list = Vec::new();
    let span = |on: bool| if on { -r..=r } else { 0..=0 };
    for a in span(true) {
        for b in span(dim > 1) {
            for c in span(dim > 2) {
                let v = DualVector::new(&[a, b, c][..dim]);
                let s = v.norm2() as u64;
                if s <= s_max {
                    list.push((s, v));
                }
            }
        }
    }
    list.sort();
    Modes { norm2: list.iter().map(|e| e.0).collect(), vectors: list.into_iter().map(|e| e.1).collect() }
}

/// A many-body eigenstate given by its mode occupations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationState {
    /// Occupied modes with their occupation counts, in mode order.
    pub occupancy: Vec<(DualVector, u32)>,
    pub energy: f64,
    pub momentum: DualVector,
    /// Number of eigenstates sharing this occupation pattern: `N!/Π n_k!`
    /// for distinguishable particles, 1 otherwise.
    pub multiplicity: u64,
}

struct Walker<'a, F> {
    modes: &'a Modes,
    n: usize,
    fermi: bool,
    s_max: u64,
    idx: Vec<usize>,
    visit: F,
}

impl<F: FnMut(&[usize], u64, DualVector)> Walker<'_, F> {
    fn run(&mut self, depth: usize, start: usize, s: u64, p: DualVector) {
        if depth == self.n {
            (self.visit)(&self.idx, s, p);
            return;
        }
        let remaining = (self.n - depth) as u64;
        for i in start..self.modes.norm2.len() {
            let si = self.modes.norm2[i];
            if s + remaining * si > self.s_max {
                break;
            }
            self.idx[depth] = i;
            let next = if self.fermi { i + 1 } else { i };
            self.run(depth + 1, next, s + si, p + self.modes.vectors[i]);
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn multiplicity(idx: &[usize], stats: Statistics) -> u64 {
    if stats != Statistics::Boltzmann {
        return 1;
    }
    let mut m = factorial(idx.len());
    let mut run = 1;
    for w in idx.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            m /= factorial(run);
            run = 1;
        }
    }
    m / factorial(run)
}

fn s_max_for(geom: &BoxGeometry, units: &Units, e_max: f64) -> Result<u64> {
    if !(e_max.is_finite() && e_max >= 0.0) {
        return Err(Error::InvalidParams(format!("e_max = {e_max} must be finite and nonnegative")));
    }
    Ok((e_max / energy_quantum(geom, units) * (1.0 + 1e-12)).floor() as u64)
}

/// Rough count of states below the cutoff, from the volume of a ball in
/// `dN` dimensions padded by half a lattice diagonal.
fn estimated_states(geom: &BoxGeometry, stats: Statistics, s_max: u64) -> f64 {
    let dims = (geom.dim * geom.particles) as f64;
    let radius = (s_max as f64).sqrt() + 0.5 * dims.sqrt();
    let ln_vol = 0.5 * dims * std::f64::consts::PI.ln() - ln_gamma(0.5 * dims + 1.0) + dims * radius.ln();
    let ln_sym = if stats == Statistics::Boltzmann { 0.0 } else { ln_gamma(geom.particles as f64 + 1.0) };
    (ln_vol - ln_sym).exp()
}

fn walk<F: FnMut(&[usize], u64, DualVector)>(
    geom: &BoxGeometry,
    units: &Units,
    stats: Statistics,
    e_max: f64,
    visit: F,
) -> Result<Modes> {
    let s_max = s_max_for(geom, units, e_max)?;
    let estimate = estimated_states(geom, stats, s_max);
    if estimate > STATE_GUARD {
        return Err(Error::BlowupGuard { estimate, limit: STATE_GUARD });
    }
    let m = modes(geom.dim, s_max);
    let mut w = Walker {
        modes: &m,
        n: geom.particles,
        fermi: stats == Statistics::Fermi,
        s_max,
        idx: vec![0; geom.particles],
        visit,
    };
    w.run(0, 0, 0, DualVector::zero(geom.dim));
    Ok(m)
}

/// Every eigenstate with energy `≤ e_max`, ordered by energy and then by
/// the lexicographic order of the occupied mode list.
pub fn enumerate_states(geom: &BoxGeometry, units: &Units, stats: Statistics, e_max: f64) -> Result<Vec<OccupationState>> {
    let eq = energy_quantum(geom, units);
    let mut raw: Vec<(u64, Vec<usize>, DualVector)> = Vec::new();
    let m = walk(geom, units, stats, e_max, |idx, s, p| raw.push((s, idx.to_vec(), p)))?;
    if raw.is_empty() {
        return Err(Error::CutoffTooSmall(e_max));
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(raw
        .into_iter()
        .map(|(s, idx, p)| {
            let mut occupancy: Vec<(DualVector, u32)> = Vec::new();
            for &i in &idx {
                match occupancy.last_mut() {
                    Some((v, c)) if *v == m.vectors[i] => *c += 1,
                    _ => occupancy.push((m.vectors[i], 1)),
                }
            }
            OccupationState { multiplicity: multiplicity(&idx, stats), occupancy, energy: eq * s as f64, momentum: p }
        })
        .collect())
}

/// Spectral table of the ideal gas: all eigenvalues `≤ e_max` by sector.
pub fn enumerate_spectrum(geom: &BoxGeometry, units: &Units, stats: Statistics, e_max: f64) -> Result<SpectralTable> {
    let mut sectors: BTreeMap<DualVector, BTreeMap<u64, u64>> = BTreeMap::new();
    walk(geom, units, stats, e_max, |idx, s, p| {
        *sectors.entry(p).or_default().entry(s).or_default() += multiplicity(idx, stats);
    })?;
    if sectors.is_empty() {
        return Err(Error::CutoffTooSmall(e_max));
    }
    let eq = energy_quantum(geom, units);
    let entries = sectors
        .into_iter()
        .map(|(q, lv)| (q, lv.into_iter().map(|(s, g)| Level { energy: eq * s as f64, degeneracy: g }).collect()))
        .collect();
    Ok(SpectralTable { geometry: *geom, units: *units, statistics: stats, e_max, entries })
}

/// Log of a certified bound on `Σ_{E > e_max} e^{−βE}` over eigenstates.
///
/// Symmetric and antisymmetric spectra are sub-multisets of the
/// distinguishable-particle one, so it suffices to bound the latter:
/// for `0 < t < 1`, `Σ_{E>e} e^{−βE} ≤ e^{−(1−t)βe} Z_1(tβ)^N`, minimized
/// over a grid of `t`.
pub fn ln_truncation_bound(geom: &BoxGeometry, units: &Units, beta: f64, e_max: f64) -> Result<f64> {
    let eq = energy_quantum(geom, units);
    let nd = (geom.dim * geom.particles) as f64;
    let mut best = f64::INFINITY;
    for i in 1..200 {
        let t = i as f64 / 200.0;
        let v = -(1.0 - t) * beta * e_max + nd * theta3(t * beta * eq)?.ln();
        best = best.min(v);
    }
    Ok(best)
}

fn ground_energy(geom: &BoxGeometry, units: &Units, stats: Statistics) -> f64 {
    if stats != Statistics::Fermi {
        return 0.0;
    }
    // fill the N lowest modes
    let mut s_max = 1;
    loop {
        let m = modes(geom.dim, s_max);
        if m.norm2.len() >= geom.particles {
            return energy_quantum(geom, units) * m.norm2[..geom.particles].iter().sum::<u64>() as f64;
        }
        s_max *= 2;
    }
}

/// Smallest cutoff (a whole number of energy quanta above the ground state)
/// whose certified tail is below `rel_target` times the ground-state weight.
pub fn cutoff_for_tail(geom: &BoxGeometry, units: &Units, stats: Statistics, beta: f64, rel_target: f64) -> Result<f64> {
    let eq = energy_quantum(geom, units);
    let e0 = ground_energy(geom, units, stats);
    let target = rel_target.ln() - beta * e0;
    let mut s = 1u64;
    while ln_truncation_bound(geom, units, beta, e0 + eq * s as f64)? > target {
        s *= 2;
        if s > 1 << 40 {
            return Err(Error::NoConvergence("cutoff search diverged".into()));
        }
    }
    let (mut lo, mut hi) = (s / 2, s);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ln_truncation_bound(geom, units, beta, e0 + eq * mid as f64)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(e0 + eq * hi as f64)
}

/// Mean occupation per particle `n_k = ⟨N_k⟩/N` of every single-particle
/// mode that appears below the cutoff.
pub fn occupation_expectation(
    geom: &BoxGeometry,
    stats: Statistics,
    th: &ThermalParams,
    e_max: f64,
) -> Result<MomentumDistribution> {
    let units = th.units;
    let eq = energy_quantum(geom, &units);
    let s_max = s_max_for(geom, &units, e_max)?;
    let m = modes(geom.dim, s_max);
    let mut per_mode: Vec<ExactSum> = vec![ExactSum::new(); m.vectors.len()];
    let mut z = ExactSum::new();
    let s_ground = (ground_energy(geom, &units, stats) / eq).round() as u64;
    let mut visited = false;
    walk(geom, &units, stats, e_max, |idx, s, _| {
        visited = true;
        let w = multiplicity(idx, stats) as f64 * (-th.beta * eq * (s - s_ground) as f64).exp();
        z.add(w);
        for &i in idx {
            per_mode[i].add(w);
        }
    })?;
    if !visited {
        return Err(Error::CutoffTooSmall(e_max));
    }
    let e_ref = eq * s_ground as f64;
    let tail = (ln_truncation_bound(geom, &units, th.beta, e_max)? + th.beta * e_ref).exp();
    let norm = (z.value() + tail) * geom.particles as f64;
    let weights = LatticeWeights::from_pairs(
        m.vectors.iter().zip(&per_mode).filter(|(_, s)| s.value() > 0.0).map(|(k, s)| (*k, s.value() / norm)),
    );
    let deficit = tail / (z.value() + tail);
    Ok(MomentumDistribution { geometry: *geom, weights, deficit })
}
