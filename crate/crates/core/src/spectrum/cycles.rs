//! Exact canonical momentum distribution from the cycle recursion
//! `Z_N(u) = N^{−1} Σ_{j=1}^{N} (±1)^{j+1} C_j(u) Z_{N−j}(u)`, where
//! `C_j(u) = Σ_k e^{−jβε_k} u^{jk}` tracks the momentum carried by a
//! `j`-cycle. Coefficients of the Laurent polynomial `Z_N(u)` are the
//! sector weights, so no many-body state is ever listed.

use super::{energy_quantum, MomentumDistribution, Statistics};
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, DualVector, LatticeWeights};
use crate::par;
use crate::sum::ExactSum;
use crate::theta::{theta3, ThermalParams};

/// Dense coefficients on the cube `[−half, half]^d`.
#[derive(Clone)]
struct Grid {
    dim: usize,
    half: i64,
    data: Vec<f64>,
}

impl Grid {
    fn new(dim: usize, half: i64) -> Self {
        Grid { dim, half, data: vec![0.0; ((2 * half + 1) as usize).pow(dim as u32)] }
    }

    fn side(&self) -> i64 {
        2 * self.half + 1
    }

    fn coords(&self, mut i: usize) -> [i64; 3] {
        let s = self.side() as usize;
        let mut c = [0i64; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = (i % s) as i64 - self.half;
            i /= s;
        }
        c
    }

    fn index(&self, c: &[i64; 3]) -> Option<usize> {
        let s = self.side();
        let mut i = 0i64;
        for axis in (0..self.dim).rev() {
            let v = c[axis] + self.half;
            if v < 0 || v >= s {
                return None;
            }
            i = i * s + v;
        }
        Some(i as usize)
    }

    fn total(&self) -> f64 {
        self.data.iter().copied().collect::<ExactSum>().value()
    }
}

/// Sparse coefficients of one `C_j`.
type Sparse = [([i64; 3], f64)];

/// `Σ_i sign_i · (sparse_i ⊛ dense_i)` evaluated output-coefficient by
/// output-coefficient, each with an exact sum.
fn convolve_sum(terms: &[(f64, &Sparse, &Grid)], dim: usize, half: i64) -> Grid {
    let mut out = Grid::new(dim, half);
    let values = par::map_range(out.data.len(), |o| {
        let oc = out.coords(o);
        let mut acc = ExactSum::new();
        for (sign, sparse, dense) in terms {
            for (c, w) in sparse.iter() {
                let mut rc = [0i64; 3];
                for a in 0..dim {
                    rc[a] = oc[a] - c[a];
                }
                if let Some(i) = dense.index(&rc) {
                    let v = dense.data[i];
                    if v != 0.0 {
                        acc.add(sign * w * v);
                    }
                }
            }
        }
        acc.value()
    });
    out.data = values;
    out
}

/// Exact `ν_Q` for the ideal gas by the cycle recursion, truncating the
/// single-particle modes so the certified missing mass stays below about
/// `rel_tol`.
pub fn canonical_distribution(
    geom: &BoxGeometry,
    stats: Statistics,
    th: &ThermalParams,
    rel_tol: f64,
) -> Result<MomentumDistribution> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParams(format!("tolerance {rel_tol} must lie in (0, 1)")));
    }
    let d = geom.dim;
    let n = geom.particles;
    let a = th.beta * energy_quantum(geom, &th.units);
    let theta = theta3(a)?;
    let z1 = theta.powi(d as i32);
    // per-axis mode cutoff: excluded single-particle weight ≤ rel_tol·z1/N²
    let axis_tail = |m: i64| {
        let m1 = (m + 1) as f64;
        2.0 * (-a * m1 * m1).exp() / (1.0 - (-a * (2.0 * m1 + 1.0)).exp())
    };
    let excluded = |m: i64| d as f64 * axis_tail(m) * theta.powi(d as i32 - 1);
    let mut m_max = 0i64;
    while excluded(m_max) > rel_tol * z1 / (n * n) as f64 {
        m_max += 1;
        if m_max > 1_000_000 {
            return Err(Error::NoConvergence("mode cutoff for the cycle recursion".into()));
        }
    }
    let z_excl = excluded(m_max);

    // sparse C_j
    let mut cycles: Vec<Vec<([i64; 3], f64)>> = Vec::with_capacity(n);
    for j in 1..=n as i64 {
        let mut c = Vec::new();
        let mut idx = [-m_max; 3];
        for slot in idx.iter_mut().skip(d) {
            *slot = 0;
        }
        loop {
            let s: i64 = idx[..d].iter().map(|x| x * x).sum();
            let w = (-(j as f64) * a * s as f64).exp();
            if w > 0.0 {
                let mut pos = [0i64; 3];
                for ax in 0..d {
                    pos[ax] = j * idx[ax];
                }
                c.push((pos, w));
            }
            let mut ax = 0;
            loop {
                if ax == d {
                    break;
                }
                idx[ax] += 1;
                if idx[ax] <= m_max {
                    break;
                }
                idx[ax] = -m_max;
                ax += 1;
            }
            if ax == d {
                break;
            }
        }
        cycles.push(c);
    }

    let sign = |j: usize| match stats {
        Statistics::Fermi if j.is_multiple_of(2) => -1.0,
        _ => 1.0,
    };
    let mut z: Vec<Grid> = Vec::with_capacity(n + 1);
    let mut unit = Grid::new(d, 0);
    unit.data[0] = 1.0;
    z.push(unit);
    let mut missing = vec![0.0f64];
    for k in 1..=n {
        let half = k as i64 * m_max;
        let next = if stats == Statistics::Boltzmann {
            convolve_sum(&[(1.0, &cycles[0], &z[k - 1])], d, half)
        } else {
            let terms: Vec<(f64, &Sparse, &Grid)> =
                (1..=k).map(|j| (sign(j) / k as f64, cycles[j - 1].as_slice(), &z[k - j])).collect();
            convolve_sum(&terms, d, half)
        };
        // Removing one particle from an excluded mode maps a missing state
        // into the (k−1)-particle space; labelled particles add a factor k.
        let labels = if stats == Statistics::Boltzmann { k as f64 } else { 1.0 };
        missing.push(labels * z_excl * (z[k - 1].total() + missing[k - 1]));
        z.push(next);
    }
    let top = &z[n];
    let mut negative = ExactSum::new();
    let mut pairs = Vec::new();
    for (i, &v) in top.data.iter().enumerate() {
        if v > 0.0 {
            pairs.push((DualVector::new(&top.coords(i)[..d]), v));
        } else if v < 0.0 {
            negative.add(-v);
        }
    }
    let total = top.total();
    let norm = total + missing[n];
    let weights = LatticeWeights::from_pairs(pairs.into_iter().map(|(q, v)| (q, v / norm)));
    Ok(MomentumDistribution { geometry: *geom, weights, deficit: (missing[n] + negative.value()) / norm })
}
