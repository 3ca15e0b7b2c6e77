//! Gaussian lattice sums: the boost sum `S(q)` relating `Z` to `Z_irred`,
//! its two-sided bounds, and the periodic heat kernel in both of its
//! Poisson-dual forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{irreducible_set, is_irreducible, BoxGeometry, DualVector};
use crate::par;
use crate::spectrum::SpectralTable;
use crate::sum::ExactSum;
use crate::tolerances::MAX_SERIES_TERMS;
use crate::units::Units;

/// Inverse temperature together with the unit system it is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub beta: f64,
    pub units: Units,
}

impl ThermalParams {
    pub fn new(beta: f64, units: Units) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
        }
        Ok(ThermalParams { beta, units })
    }

    pub fn natural(beta: f64) -> Result<Self> {
        Self::new(beta, Units::natural())
    }

    pub fn from_temperature(temperature: f64, units: Units) -> Result<Self> {
        Self::new(1.0 / (units.kb * temperature), units)
    }

    /// Parameters whose thermal wavelength equals `lambda`.
    pub fn from_wavelength(lambda: f64, units: Units) -> Result<Self> {
        Self::new(units.mass * lambda * lambda / (2.0 * PI * units.hbar * units.hbar), units)
    }

    /// `λ_β = sqrt(2πβħ²/m)`.
    pub fn lambda(&self) -> f64 {
        (2.0 * PI * self.beta * self.units.hbar * self.units.hbar / self.units.mass).sqrt()
    }
}

/// Value of a positive series together with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail: f64,
}

/// `Σ_{j∈ℤ} e^{−a j²} cosh(b j)` for `a > 0`, summed until the certified
/// tail drops below `rel_tol` of the partial sum.
pub fn cosh_theta(a: f64, b: f64, rel_tol: f64) -> Result<SeriesValue> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidDomain(format!("theta series needs a > 0 (a = {a}, b = {b})")));
    }
    let b = b.abs();
    let term = |j: f64| (-a * j * j + b * j).exp() + (-a * j * j - b * j).exp();
    let mut acc = ExactSum::new();
    acc.add(1.0);
    let mut j = 1usize;
    loop {
        let t = term(j as f64);
        acc.add(t);
        let next = j as f64 + 1.0;
        let ratio = (-a * (2.0 * next + 1.0) + b).exp();
        if ratio < 1.0 {
            let tail = term(next) / (1.0 - ratio);
            let partial = acc.value();
            if tail <= rel_tol * partial {
                // `acc` holds 1 + Σ_{j≥1} 2e^{−aj²}cosh(bj), i.e. the full sum.
                return Ok(SeriesValue { value: partial, tail });
            }
        }
        j += 1;
        if j > MAX_SERIES_TERMS {
            return Err(Error::NoConvergence(format!(
                "theta series with a = {a:.3e} exceeded {MAX_SERIES_TERMS} terms"
            )));
        }
    }
}

/// Jacobi theta value `Σ_{j∈ℤ} e^{−a j²}`, switching to the Poisson-dual
/// series when `a < π`.
pub fn theta3(a: f64) -> Result<f64> {
    if a >= PI {
        Ok(cosh_theta(a, 0.0, crate::tolerances::THETA_REL)?.value)
    } else {
        let dual = cosh_theta(PI * PI / a, 0.0, crate::tolerances::THETA_REL)?.value;
        Ok((PI / a).sqrt() * dual)
    }
}

/// Boost sum `S(q) = Σ_{k∈Λ*} exp(−(λ²/4π)(N k² + 2 k·q))` for irreducible `q`.
///
/// It factorizes into one-dimensional theta series with
/// `a = πλ²N/L²` and `b_i = λ² q_i / L`.
pub fn gauss_sum(q: &DualVector, geom: &BoxGeometry, th: &ThermalParams, rel_tol: f64) -> Result<f64> {
    if q.dim() != geom.dim || !is_irreducible(q, geom.particles) {
        return Err(Error::InvalidDomain(format!("{q} is not an irreducible wave vector for N = {}", geom.particles)));
    }
    let lam2 = th.lambda().powi(2);
    let l = geom.side;
    let a = PI * lam2 * geom.particles as f64 / (l * l);
    let per_axis = rel_tol / geom.dim as f64;
    let mut prod = 1.0;
    for &m in q.coords() {
        let qi = 2.0 * PI * m as f64 / l;
        prod *= cosh_theta(a, lam2 * qi / l, per_axis)?.value;
    }
    Ok(prod)
}

/// One-dimensional factor of [`gauss_sum`] for coordinate `m` of `q`.
pub fn gauss_axis_factor(m: i64, geom: &BoxGeometry, th: &ThermalParams, rel_tol: f64) -> Result<f64> {
    let lam2 = th.lambda().powi(2);
    let l = geom.side;
    let a = PI * lam2 * geom.particles as f64 / (l * l);
    Ok(cosh_theta(a, lam2 * 2.0 * PI * m as f64 / (l * l), rel_tol)?.value)
}

/// Two-sided bounds on `Z/Z_irred`:
/// `max{1, [L^{1−d/2}/(λ√ρ) − 1]^d} ≤ Z/Z_irred ≤ [L^{1−d/2}/(λ√ρ) + 3]^d`.
pub fn ratio_bounds(geom: &BoxGeometry, th: &ThermalParams) -> (f64, f64) {
    let x = geom.side.powf(1.0 - geom.dim as f64 / 2.0) / (th.lambda() * geom.density().sqrt());
    let d = geom.dim as i32;
    let lower = (x - 1.0).max(0.0).powi(d).max(1.0);
    let upper = (x + 3.0).powi(d);
    (lower, upper)
}

/// `Z/Z_irred` as the Gibbs average of `S(q)` over the irreducible sectors
/// of `table`.
pub fn average_ratio(table: &SpectralTable, th: &ThermalParams, rel_tol: f64) -> Result<f64> {
    let geom = table.geometry;
    let irred = irreducible_set(&geom);
    let e_ref = table.min_energy().ok_or(Error::CutoffTooSmall(table.e_max))?;
    for q in &irred {
        if !table.entries.contains_key(q) {
            return Err(Error::InvalidDomain(format!("table has no levels at irreducible {q}")));
        }
    }
    let rows: Vec<Result<(f64, f64)>> = par::map(&irred, |q| {
        let w = table.sector_weight(q, th.beta, e_ref);
        Ok((w, w * gauss_sum(q, &geom, th, rel_tol)?))
    });
    let mut den = ExactSum::new();
    let mut num = ExactSum::new();
    for r in rows {
        let (w, ws) = r?;
        den.add(w);
        num.add(ws);
    }
    Ok(num.value() / den.value())
}

/// Periodic heat kernel `L^{−d} Σ_k e^{−α k²} e^{ik·(x−y)}` on the box,
/// evaluated with whichever dual form converges faster
/// (the Fourier series for `α ≥ L²/4π`, images otherwise).
pub fn heat_kernel_periodic(x: &[f64], y: &[f64], alpha: f64, geom: &BoxGeometry) -> Result<f64> {
    if alpha >= geom.side * geom.side / (4.0 * PI) {
        heat_kernel_fourier(x, y, alpha, geom)
    } else {
        heat_kernel_images(x, y, alpha, geom)
    }
}

fn check_kernel_args(x: &[f64], y: &[f64], alpha: f64, geom: &BoxGeometry) -> Result<()> {
    if x.len() != geom.dim || y.len() != geom.dim {
        return Err(Error::InvalidDomain("points must have the box dimension".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidDomain(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

/// Fourier-series form `Π_i L^{−1}[1 + 2Σ_{j≥1} e^{−α(2πj/L)²} cos(2πj r_i/L)]`.
pub fn heat_kernel_fourier(x: &[f64], y: &[f64], alpha: f64, geom: &BoxGeometry) -> Result<f64> {
    check_kernel_args(x, y, alpha, geom)?;
    let l = geom.side;
    let c = alpha * (2.0 * PI / l).powi(2);
    let mut prod = 1.0;
    for (xi, yi) in x.iter().zip(y) {
        let r = (xi - yi).rem_euclid(l);
        let mut acc = ExactSum::new();
        acc.add(1.0);
        let mut j = 1usize;
        loop {
            let jf = j as f64;
            acc.add(2.0 * (-c * jf * jf).exp() * (2.0 * PI * jf * r / l).cos());
            let n1 = jf + 1.0;
            let tail = 2.0 * (-c * n1 * n1).exp() / (1.0 - (-c * (2.0 * n1 + 1.0)).exp());
            if tail <= 1e-18 {
                break;
            }
            j += 1;
            if j > MAX_SERIES_TERMS {
                return Err(Error::NoConvergence(format!("heat-kernel Fourier series at alpha = {alpha:.3e}")));
            }
        }
        prod *= acc.value() / l;
    }
    Ok(prod)
}

/// Image form `Π_i (4πα)^{−1/2} Σ_{n∈ℤ} e^{−(r_i + nL)²/4α}`.
pub fn heat_kernel_images(x: &[f64], y: &[f64], alpha: f64, geom: &BoxGeometry) -> Result<f64> {
    check_kernel_args(x, y, alpha, geom)?;
    let l = geom.side;
    let mut prod = 1.0;
    for (xi, yi) in x.iter().zip(y) {
        // reduce to r in [−L/2, L/2]
        let mut r = (xi - yi).rem_euclid(l);
        if r > 0.5 * l {
            r -= l;
        }
        let g = |s: f64| (-(s * s) / (4.0 * alpha)).exp();
        let mut acc = ExactSum::new();
        acc.add(g(r));
        let mut n = 1usize;
        loop {
            let nf = n as f64;
            acc.add(g(r + nf * l));
            acc.add(g(r - nf * l));
            // remaining images sit at distance ≥ (n + 1/2)L from the origin
            let d = (nf + 0.5) * l;
            let ratio = (-(l * (2.0 * d + l)) / (4.0 * alpha)).exp();
            let tail = 2.0 * g(d) / (1.0 - ratio).max(f64::MIN_POSITIVE);
            if ratio < 1.0 && tail <= 1e-18 * acc.value() {
                break;
            }
            n += 1;
            if n > MAX_SERIES_TERMS {
                return Err(Error::NoConvergence(format!("heat-kernel image sum at alpha = {alpha:.3e}")));
            }
        }
        prod *= acc.value() / (4.0 * PI * alpha).sqrt();
    }
    Ok(prod)
}
