//! Kernel of the center-of-mass reduced density matrix, positivity checks,
//! restricted reductions, boosts and the macroscopic wave function.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::Table;
use crate::lattice::{DualVector, LatticeWeights};
use crate::par;
use crate::spectrum::MomentumDistribution;
use crate::sum::{CompensatedSum, ExactSum};
use crate::tolerances::{BOOST_MATCH, MAX_PHASE_STEP};
use crate::units::Units;

/// Complex kernel values at sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSamples {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
}

impl KernelSamples {
    /// Columns `x…, re, im`, one coordinate column per dimension.
    pub fn table(&self) -> Table {
        let dim = self.points.first().map_or(1, Vec::len);
        let mut header: Vec<String> = if dim == 1 { vec!["x".into()] } else { (1..=dim).map(|i| format!("x{i}")).collect() };
        header.push("re".into());
        header.push("im".into());
        let mut t = Table { header, rows: Vec::new() };
        for (p, v) in self.points.iter().zip(&self.values) {
            let mut row = p.clone();
            row.push(v.re);
            row.push(v.im);
            t.push(row);
        }
        t
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }
}

/// `e^{2πi·sign·(n·x)/L}` with the argument reduced modulo one period first,
/// so that translating `x` by a period leaves the bits unchanged whenever
/// the reduction is exact.
pub(crate) fn lattice_phase(n: &DualVector, x: &[f64], side: f64, sign: f64) -> Complex64 {
    let frac = |t: f64| t - t.floor();
    let t = frac(n.coords().iter().zip(x).map(|(&c, &xi)| frac(c as f64 * xi / side)).sum());
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, sign * s)
}

/// `Σ_k w_k e^{i·sign·k·x}` for every point. Each point is summed by one
/// worker in lattice order, so compensated summation is reproducible here.
pub(crate) fn fourier_sum(weights: &LatticeWeights, side: f64, xs: &[Vec<f64>], sign: f64) -> Vec<Complex64> {
    par::map(xs, |x| {
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for (k, w) in weights.iter() {
            let p = lattice_phase(k, x, side, sign);
            re.add(w * p.re);
            im.add(w * p.im);
        }
        Complex64::new(re.value(), im.value())
    })
}

fn check_points(dim: usize, xs: &[Vec<f64>]) -> Result<()> {
    match xs.iter().position(|x| x.len() != dim) {
        Some(i) => Err(Error::InvalidParams(format!("point {i} does not have {dim} coordinates"))),
        None => Ok(()),
    }
}

/// `f(x) = Σ_Q ν_Q e^{iQ·x}`, normalized so that `f(0) = Σν`.
pub fn com_kernel(dist: &MomentumDistribution, xs: &[Vec<f64>]) -> Result<KernelSamples> {
    check_points(dist.geometry.dim, xs)?;
    let values = fourier_sum(&dist.weights, dist.geometry.side, xs, 1.0);
    Ok(KernelSamples { points: xs.to_vec(), values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdReport {
    pub samples: Vec<DualVector>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
    /// `tol·trace` plus the perturbation allowed by missing weights.
    pub tolerance: f64,
    /// Number of matrix entries filled from the certified-negligible region.
    pub missing_entries: usize,
    pub pass: bool,
}

/// Builds `[φ(Q_i − Q_j)]` and tests it for positive semidefiniteness.
///
/// `phi` returns `None` outside its tabulated domain. Such entries are set to
/// zero when `deficit > 0` bounds every untabulated weight, each one moving
/// the spectrum by at most `deficit`, so `n·deficit` joins the tolerance.
/// Without that bound they are an error.
pub fn psd_check(phi: impl Fn(&DualVector) -> Option<f64>, samples: &[DualVector], tol: f64, deficit: f64) -> Result<PsdReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParams("psd_check needs at least one sample".into()));
    }
    let n = samples.len();
    let mut missing = 0;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = samples[i] - samples[j];
            a[(i, j)] = match phi(&d) {
                Some(v) => v,
                None if deficit > 0.0 => {
                    missing += 1;
                    0.0
                }
                None => return Err(Error::IncompleteSupport(format!("no weight at {d}"))),
            };
        }
    }
    let sym = (&a + a.transpose()) * 0.5;
    let trace = sym.trace();
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = tol * trace.abs() + if missing > 0 { n as f64 * deficit } else { 0.0 };
    Ok(PsdReport {
        samples: samples.to_vec(),
        min_eigenvalue,
        max_eigenvalue,
        trace,
        tolerance,
        missing_entries: missing,
        pass: min_eigenvalue >= -tolerance,
    })
}

/// [`psd_check`] for a momentum distribution, whose untabulated weights are
/// bounded by its deficit.
pub fn psd_check_distribution(dist: &MomentumDistribution, samples: &[DualVector], tol: f64) -> Result<PsdReport> {
    psd_check(|q| dist.weights.get(q), samples, tol, dist.deficit)
}

/// Integer sublattice given by generators, stored in row-echelon
/// (Hermite) form for membership tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Sublattice {
    dim: usize,
    rows: Vec<Vec<i128>>,
}

impl Sublattice {
    pub fn new(dim: usize, generators: &[DualVector]) -> Result<Self> {
        if generators.iter().any(|g| g.dim() != dim) {
            return Err(Error::InvalidParams("generator dimension mismatch".into()));
        }
        let mut m: Vec<Vec<i128>> = generators.iter().map(|g| g.coords().iter().map(|&c| c as i128).collect()).collect();
        let mut rows = Vec::new();
        for col in 0..dim {
            // Euclid on the column until at most one row has a nonzero entry
            loop {
                let mut nz: Vec<usize> = (0..m.len()).filter(|&r| m[r][col] != 0).collect();
                if nz.len() <= 1 {
                    break;
                }
                nz.sort_by_key(|&r| m[r][col].abs());
                let p = nz[0];
                for &r in &nz[1..] {
                    let f = m[r][col] / m[p][col];
                    let pivot = m[p].clone();
                    for (x, y) in m[r].iter_mut().zip(&pivot) {
                        *x -= f * y;
                    }
                }
            }
            if let Some(p) = (0..m.len()).find(|&r| m[r][col] != 0) {
                let mut row = m.swap_remove(p);
                if row[col] < 0 {
                    row.iter_mut().for_each(|v| *v = -*v);
                }
                rows.push(row);
            }
        }
        Ok(Sublattice { dim, rows })
    }

    pub fn contains(&self, q: &DualVector) -> bool {
        if q.dim() != self.dim {
            return false;
        }
        let mut r: Vec<i128> = q.coords().iter().map(|&c| c as i128).collect();
        for row in &self.rows {
            let col = row.iter().position(|&v| v != 0).expect("echelon rows are nonzero");
            if r[col] % row[col] != 0 {
                return false;
            }
            let f = r[col] / row[col];
            for c in 0..self.dim {
                r[c] -= f * row[c];
            }
        }
        r.iter().all(|&v| v == 0)
    }

    /// Small combinations `Σ c_i g_i` with `c_i ∈ {−1, 0, 1}`, deduplicated.
    pub fn sample(&self, limit: usize) -> Vec<DualVector> {
        let gens: Vec<DualVector> =
            self.rows.iter().map(|r| DualVector::new(&r.iter().map(|&v| v as i64).collect::<Vec<_>>())).collect();
        let mut out = vec![DualVector::zero(self.dim)];
        for g in &gens {
            let cur = out.clone();
            for p in cur {
                for s in [-1, 1] {
                    let v = p + s * *g;
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
        out.truncate(limit.max(1));
        out
    }
}

/// `Σ_{Q ∈ 𝓛*} φ_Q ν_Q e^{iQ·x}` over the subgroup `𝓛*` generated by
/// `generators`. `φ` is first checked for positive definiteness on a sample
/// of the subgroup.
pub fn restricted_reduction(
    dist: &MomentumDistribution,
    generators: &[DualVector],
    phi: impl Fn(&DualVector) -> f64 + Sync,
    xs: &[Vec<f64>],
    tol: f64,
) -> Result<KernelSamples> {
    check_points(dist.geometry.dim, xs)?;
    let sub = Sublattice::new(dist.geometry.dim, generators)?;
    let report = psd_check(|q| Some(phi(q)), &sub.sample(12), tol, 0.0)?;
    if !report.pass {
        return Err(Error::PhiNotPsd { min_eigenvalue: report.min_eigenvalue, tolerance: report.tolerance });
    }
    let weights = LatticeWeights::from_pairs(dist.weights.iter().filter(|(q, _)| sub.contains(q)).map(|(q, w)| (*q, phi(q) * w)));
    let values = fourier_sum(&weights, dist.geometry.side, xs, 1.0);
    Ok(KernelSamples { points: xs.to_vec(), values })
}

/// Dual-lattice point `k = mv/ℏ`, or an error if `v` is not a lattice
/// velocity.
pub fn velocity_to_dual(v: &[f64], side: f64, units: &Units) -> Result<DualVector> {
    let coords: Vec<f64> = v.iter().map(|vi| units.mass * vi / units.hbar * side / (2.0 * PI)).collect();
    let rounded: Vec<i64> = coords.iter().map(|c| c.round() as i64).collect();
    let off = coords.iter().zip(&rounded).any(|(c, &r)| (c - r as f64).abs() > BOOST_MATCH * c.abs().max(1.0));
    if off || coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::OffLatticeVelocity(v.to_vec()));
    }
    Ok(DualVector::new(&rounded))
}

/// `e^{−iNmv·x/ℏ} f(x)`: the kernel of the state boosted by a lattice
/// velocity `v`.
pub fn boosted_kernel(dist: &MomentumDistribution, v: &[f64], units: &Units, xs: &[Vec<f64>]) -> Result<KernelSamples> {
    let geom = &dist.geometry;
    if v.len() != geom.dim {
        return Err(Error::InvalidParams(format!("velocity must have {} components", geom.dim)));
    }
    let k = velocity_to_dual(v, geom.side, units)?;
    let nk = geom.particles as i64 * k;
    let mut out = com_kernel(dist, xs)?;
    for (x, val) in out.points.iter().zip(out.values.iter_mut()) {
        *val *= lattice_phase(&nk, x, geom.side, -1.0);
    }
    Ok(out)
}

/// `Ψ(x) = e^{−iNmv·x/2ℏ} √(ρ·max(Re f(x), 0))`. A real part below
/// `−slack` is rejected.
pub fn macroscopic_wavefunction(
    dist: &MomentumDistribution,
    v: &[f64],
    units: &Units,
    rho: f64,
    xs: &[Vec<f64>],
    slack: f64,
) -> Result<Vec<Complex64>> {
    let geom = &dist.geometry;
    if v.len() != geom.dim {
        return Err(Error::InvalidParams(format!("velocity must have {} components", geom.dim)));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParams("density must be positive".into()));
    }
    let k = velocity_to_dual(v, geom.side, units)?;
    let f = com_kernel(dist, xs)?;
    if let Some((index, val)) = f.values.iter().enumerate().find(|(_, z)| z.re < -slack) {
        return Err(Error::NegativeKernel { index, value: val.re });
    }
    let half = 0.5 * geom.particles as f64;
    Ok(xs
        .iter()
        .zip(&f.values)
        .map(|(x, z)| {
            let t: f64 = k.coords().iter().zip(x).map(|(&c, &xi)| c as f64 * xi / geom.side).sum();
            Complex64::from_polar((rho * z.re.max(0.0)).sqrt(), -2.0 * PI * half * t)
        })
        .collect())
}

/// Velocity `−(2ℏ/Nm) ∂ArgΨ` along the line through `points`, returned as
/// a vector parallel to that line.
///
/// The phase is continued to the nearest branch at each step. Since steps
/// of `π` and above cannot be told apart from their aliases, any step whose
/// wrapped size reaches the guard `MAX_PHASE_STEP` is refused.
pub fn velocity_from_phase(psi: &[Complex64], points: &[Vec<f64>], particles: usize, units: &Units) -> Result<Vec<f64>> {
    if psi.len() < 2 || psi.len() != points.len() {
        return Err(Error::InvalidParams("need at least two samples with matching points".into()));
    }
    let scale = psi.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if let Some(i) = psi.iter().position(|z| z.norm() <= 1e-12 * scale || scale == 0.0) {
        return Err(Error::ZeroAmplitude(i));
    }
    let origin = &points[0];
    let dir: Vec<f64> = points[points.len() - 1].iter().zip(origin).map(|(a, b)| a - b).collect();
    let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(Error::InvalidParams("sample line has zero length".into()));
    }
    let unit: Vec<f64> = dir.iter().map(|d| d / len).collect();
    let mut phase = ExactSum::new();
    for i in 0..psi.len() - 1 {
        let step = (psi[i + 1] * psi[i].conj()).arg();
        if step.abs() >= MAX_PHASE_STEP {
            return Err(Error::PhaseWrap { index: i, step });
        }
        phase.add(step);
    }
    let slope = phase.value() / len;
    let speed = -2.0 * units.hbar / (particles as f64 * units.mass) * slope;
    Ok(unit.iter().map(|u| speed * u).collect())
}

/// Evenly spaced points on the first axis, `x_i = i·step` for `i < count`.
pub fn axis_points(dim: usize, step: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut p = vec![0.0; dim];
            p[0] = i as f64 * step;
            p
        })
        .collect()
}
