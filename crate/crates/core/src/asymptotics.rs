//! Large-N behaviour of the total-momentum distribution: tail
//! probabilities beyond the irreducible shells, the one-dimensional central
//! limit profile and the two-dimensional tail sandwich.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::Table;
use crate::lattice::{irreducible_set, BoxGeometry};
use crate::par;
use crate::quad::integrate;
use crate::spectrum::{canonical_distribution, nu_distribution, MomentumDistribution, SpectralTable, Statistics};
use crate::sum::ExactSum;
use crate::theta::{cosh_theta, ThermalParams};
use crate::tolerances::{CDF_QUAD_ABS, THETA_REL};

/// `F_{2J−1} = P(|Q_axis| > (2J−1)πN/L)`.
pub fn tail_probability(dist: &MomentumDistribution, j: usize, axis: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidDomain("shell index J must be at least 1".into()));
    }
    if axis >= dist.geometry.dim {
        return Err(Error::InvalidDomain(format!("axis {axis} outside dimension {}", dist.geometry.dim)));
    }
    // |2π m / L| > (2J−1)πN/L  ⟺  2|m| > (2J−1)N
    let bound = (2 * j as i64 - 1) * dist.geometry.particles as i64;
    Ok(dist.weights.iter().filter(|(q, _)| 2 * q.coord(axis).abs() > bound).map(|e| e.1).collect::<ExactSum>().value())
}

/// Limiting CDF of `|Q|/(ρ√N)` in one dimension,
/// `(λρ/π) ∫_0^x exp(−λ²ρ²y²/4π) dy`, by adaptive quadrature.
pub fn clt_reference_cdf(x: f64, th: &ThermalParams, rho: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let lr = th.lambda() * rho;
    let c = lr * lr / (4.0 * PI);
    // beyond y_cut the integrand is below e^{-60} of its peak
    let y_cut = (60.0 / c).sqrt();
    let upper = x.min(y_cut);
    let q = integrate(|y| (lr / PI) * (-c * y * y).exp(), 0.0, upper, CDF_QUAD_ABS)?;
    Ok(q.value.min(1.0))
}

/// Scaled CDF `P(|Q|/(ρ√N) ≤ x)` with every atom spread uniformly over its
/// lattice cell, which removes the staircase of the raw distribution.
pub fn scaled_cdf_smoothed(dist: &MomentumDistribution, x: f64) -> f64 {
    let g = &dist.geometry;
    let h = g.dual_spacing();
    let t = x * g.density() * (g.particles as f64).sqrt();
    dist.weights
        .iter()
        .map(|(q, w)| {
            let c = q.coord(0) as f64 * h;
            let lo = (c - 0.5 * h).max(-t);
            let hi = (c + 0.5 * h).min(t);
            w * ((hi - lo).max(0.0) / h)
        })
        .collect::<ExactSum>()
        .value()
}

/// Raw staircase CDF `P(|Q|/(ρ√N) ≤ x)`.
pub fn scaled_cdf_step(dist: &MomentumDistribution, x: f64) -> f64 {
    let g = &dist.geometry;
    let t = x * g.density() * (g.particles as f64).sqrt();
    let m = crate::spectrum::kappa_index(t, g.side);
    dist.weights.iter().filter(|(q, _)| q.coord(0).abs() <= m).map(|e| e.1).collect::<ExactSum>().value()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltRow {
    pub particles: usize,
    pub side: f64,
    /// Sup over the grid of |cell-smoothed CDF − reference|.
    pub sup_distance: f64,
    /// Same against the raw staircase CDF.
    pub step_sup_distance: f64,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub statistics: Statistics,
    pub lambda: f64,
    pub rho: f64,
    pub grid: Vec<f64>,
    pub rows: Vec<CltRow>,
}

pub const CLT_GRID_POINTS: usize = 200;

impl CltReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["N", "L", "sup_distance"]);
        for r in &self.rows {
            t.push(vec![r.particles as f64, r.side, r.sup_distance]);
        }
        t
    }
}

/// Distance of the exact scaled momentum CDF from its Gaussian limit for
/// each geometry (all one-dimensional at a common density), on a grid of
/// [`CLT_GRID_POINTS`] points over `[0, 4/(λρ)]`.
pub fn clt_convergence_report(geoms: &[BoxGeometry], stats: Statistics, th: &ThermalParams, rel_tol: f64) -> Result<CltReport> {
    let first = geoms.first().ok_or_else(|| Error::InvalidParams("no geometries given".into()))?;
    let rho = first.density();
    for g in geoms {
        if g.dim != 1 {
            return Err(Error::InvalidParams("the CLT report is one-dimensional".into()));
        }
        if ((g.density() - rho) / rho).abs() > 1e-9 {
            return Err(Error::InvalidParams("all geometries must share one density".into()));
        }
    }
    let lambda = th.lambda();
    let x_max = 4.0 / (lambda * rho);
    let grid: Vec<f64> = (0..CLT_GRID_POINTS).map(|i| x_max * i as f64 / (CLT_GRID_POINTS - 1) as f64).collect();
    let reference: Vec<f64> = par::map(&grid, |&x| clt_reference_cdf(x, th, rho)).into_iter().collect::<Result<_>>()?;
    let rows = par::map(geoms, |g| -> Result<CltRow> {
        let dist = canonical_distribution(g, stats, th, rel_tol)?;
        let mut sup = 0.0f64;
        let mut step_sup = 0.0f64;
        for (x, r) in grid.iter().zip(&reference) {
            sup = sup.max((scaled_cdf_smoothed(&dist, *x) - r).abs());
            step_sup = step_sup.max((scaled_cdf_step(&dist, *x) - r).abs());
        }
        Ok(CltRow { particles: g.particles, side: g.side, sup_distance: sup, step_sup_distance: step_sup, deficit: dist.deficit })
    });
    Ok(CltReport { statistics: stats, lambda, rho, grid, rows: rows.into_iter().collect::<Result<_>>()? })
}

fn gaussian_tail(a: f64, j0: usize, shift: bool) -> f64 {
    // Σ_{j≥j0} e^{−a j²} or, with `shift`, Σ_{j≥j0} e^{−a j(j−1)}
    let term = |j: f64| if shift { (-a * j * (j - 1.0)).exp() } else { (-a * j * j).exp() };
    let mut acc = ExactSum::new();
    let mut j = j0 as f64;
    loop {
        acc.add(term(j));
        let ratio = if shift { (-a * 2.0 * (j + 1.0)).exp() } else { (-a * (2.0 * j + 3.0)).exp() };
        let tail = term(j + 1.0) / (1.0 - ratio);
        if tail <= 1e-17 * acc.value() || j > 1e8 {
            return acc.value();
        }
        j += 1.0;
    }
}

/// Two-dimensional tail sandwich
/// `2f Σ_{j≥J} e^{−πλ²ρj²} ≤ F_{2J−1} ≤ 2f Σ_{j≥J} e^{−πλ²ρj(j−1)}`.
pub fn tail_bounds_2d(th: &ThermalParams, rho: f64, j: usize, f_est: f64) -> Result<(f64, f64)> {
    if j == 0 {
        return Err(Error::InvalidDomain("shell index J must be at least 1".into()));
    }
    let a = PI * th.lambda().powi(2) * rho;
    Ok((2.0 * f_est * gaussian_tail(a, j, false), 2.0 * f_est * gaussian_tail(a, j, true)))
}

/// Finite-volume value of `f = (Z_irred/Z)⟨Σ_j e^{−πλ²ρj²} cosh(λ²q₂j/L)⟩_irred`
/// from a two-dimensional momentum distribution.
pub fn f_estimator_2d_from_distribution(dist: &MomentumDistribution, th: &ThermalParams) -> Result<f64> {
    let g = dist.geometry;
    if g.dim != 2 {
        return Err(Error::InvalidDomain("the f estimator is two-dimensional".into()));
    }
    let lam2 = th.lambda().powi(2);
    let a = PI * lam2 * g.particles as f64 / (g.side * g.side);
    let mut acc = ExactSum::new();
    for q in irreducible_set(&g) {
        let q2 = 2.0 * PI * q.coord(1) as f64 / g.side;
        acc.add(dist.get(&q) * cosh_theta(a, lam2 * q2 / g.side, THETA_REL)?.value);
    }
    Ok(acc.value())
}

pub fn f_estimator_2d(table: &SpectralTable, th: &ThermalParams) -> Result<f64> {
    f_estimator_2d_from_distribution(&nu_distribution(table, th)?, th)
}
