//! Distinguishable-particle momentum law as an `N`-fold convolution of the
//! single-particle Gibbs law. It shares no code with the enumerator or the
//! cycle recursion and serves as an independent reference for both.

use super::{energy_quantum, MomentumDistribution};
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, DualVector, LatticeWeights};
use crate::theta::{theta3, ThermalParams};

pub fn boltzmann_convolution_oracle(geom: &BoxGeometry, th: &ThermalParams, tol: f64) -> Result<MomentumDistribution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams("oracle tolerance must be positive".into()));
    }
    let a = th.beta * energy_quantum(geom, &th.units);
    let z = theta3(a)?;
    // one-axis law p(m) = e^{−a m²}/θ(a), truncated where the tail is below tol/(N d)
    let budget = tol / (geom.particles * geom.dim) as f64;
    let mut m_max = 0i64;
    let tail = |m: i64| {
        let m1 = (m + 1) as f64;
        2.0 * (-a * m1 * m1).exp() / (1.0 - (-a * (2.0 * m1 + 1.0)).exp()) / z
    };
    while tail(m_max) > budget {
        m_max += 1;
    }
    let p: Vec<f64> = (-m_max..=m_max).map(|m| (-a * (m * m) as f64).exp() / z).collect();
    let mut law = vec![1.0];
    for _ in 0..geom.particles {
        let mut next = vec![0.0; law.len() + p.len() - 1];
        for (i, &x) in law.iter().enumerate() {
            for (j, &y) in p.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        law = next;
    }
    let half = geom.particles as i64 * m_max;
    let mut pairs = Vec::new();
    let side = law.len();
    let count = side.pow(geom.dim as u32);
    for flat in 0..count {
        let mut rem = flat;
        let mut coords = [0i64; 3];
        let mut w = 1.0;
        for c in coords.iter_mut().take(geom.dim) {
            let i = rem % side;
            rem /= side;
            *c = i as i64 - half;
            w *= law[i];
        }
        if w > 0.0 {
            pairs.push((DualVector::new(&coords[..geom.dim]), w));
        }
    }
    // 1 − (1 − δ)^{Nd} ≤ N d δ for the per-axis truncated mass δ
    let deficit = (geom.particles * geom.dim) as f64 * tail(m_max);
    Ok(MomentumDistribution { geometry: *geom, weights: LatticeWeights::from_pairs(pairs), deficit })
}
