//! Dirichlet and Fejér kernels and the mass the Fejér kernel carries near
//! its central peak.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::integrate_with_breaks;
use crate::tolerances::KERNEL_QUAD_ABS;

/// Distance from `x` to the nearest multiple of `2π`, with sign.
fn reduce(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `D_n(x) = sin((2n+1)x/2) / sin(x/2)`, equal to `2n+1` on `2πℤ`.
pub fn dirichlet_kernel(n: u32, x: f64) -> f64 {
    let r = reduce(x);
    let s = (0.5 * r).sin();
    if s.abs() < 1e-6 {
        // 1 + 2Σ cos(l r) is exact and well conditioned near the peak
        return 1.0 + 2.0 * (1..=n).map(|l| (l as f64 * r).cos()).sum::<f64>();
    }
    ((n as f64 + 0.5) * r).sin() / s
}

/// `F_n(x) = (1 − cos nx) / (n(1 − cos x))`, equal to `n` on `2πℤ`.
/// Evaluated as `sin²(nx/2) / (n sin²(x/2))` to avoid cancellation.
pub fn fejer_kernel(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let r = reduce(x);
    let s = (0.5 * r).sin();
    if s.abs() < 1e-8 {
        return nf * (1.0 - (nf * nf - 1.0) * r * r / 12.0);
    }
    let t = (0.5 * nf * r).sin();
    t * t / (nf * s * s)
}

/// `(1/2π) ∫_{−a}^{a} F_n(x) dx`, integrating lobe by lobe between the
/// zeros `2πl/n`.
pub fn fejer_window_mass(n: u32, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDomain("Fejér index must be positive".into()));
    }
    if a <= 0.0 {
        return Ok(0.0);
    }
    let step = 2.0 * PI / n as f64;
    let mut breaks = vec![0.0];
    let mut k = 1.0;
    while k * step < a {
        breaks.push(k * step);
        k += 1.0;
    }
    breaks.push(a);
    let q = integrate_with_breaks(|x| fejer_kernel(n, x), &breaks, 0.5 * KERNEL_QUAD_ABS * PI)?;
    Ok(q.value / PI)
}

/// Mass of the central peak, `(1/2π) ∫_{−α/n}^{α/n} F_n`.
pub fn fejer_central_mass(n: u32, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDomain("central mass needs n ≥ 2".into()));
    }
    if !(alpha > 0.0 && alpha <= 2.0 * PI) {
        return Err(Error::InvalidDomain(format!("alpha = {alpha} outside (0, 2π]")));
    }
    fejer_window_mass(n, alpha / n as f64)
}

/// Lower bound on [`fejer_central_mass`]: `4/(√3π)` for `√12 ≤ α ≤ 2π` and
/// `(α/π)(1 − α²/36)` below.
pub fn central_mass_lower_bound(alpha: f64) -> f64 {
    if alpha >= 12f64.sqrt() {
        4.0 / (3f64.sqrt() * PI)
    } else {
        alpha / PI * (1.0 - alpha * alpha / 36.0)
    }
}

/// `Σ_{l ≥ l0} l^{−2}`: a short explicit sum followed by the asymptotic
/// trigamma series.
fn inverse_square_tail(l0: u64) -> f64 {
    let m = l0 + 16;
    let head: f64 = (l0..m).rev().map(|l| 1.0 / (l as f64 * l as f64)).sum();
    let x = m as f64;
    let x2 = x * x;
    let tail = 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2 * x2 * x2 * x);
    head + tail
}

/// Smallest `l₀ ≥ 1` with `(1/(π(1 − π²/12))) Σ_{l≥l₀} l^{−2} ≤ ε/2`.
/// For `n ≥ 2l₀` the window `|x| ≤ 2πl₀/n` then holds at least `1 − ε` of
/// the Fejér mass.
pub fn fejer_l0(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidDomain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let c = 1.0 / (PI * (1.0 - PI * PI / 12.0));
    let target = 0.5 * epsilon / c;
    // tail(l) < 1/(l−1), so l = ceil(1/target) + 1 always satisfies it
    let (mut lo, mut hi) = (0u64, (1.0 / target).ceil() as u64 + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if inverse_square_tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(1))
}

/// `(1/2π) ∫_{−π}^{π} |D_n|`, split at the zeros `2πl/(2n+1)`.
pub fn dirichlet_l1_norm(n: u32) -> Result<f64> {
    let step = 2.0 * PI / (2 * n + 1) as f64;
    let mut breaks: Vec<f64> = (0..=n).map(|l| l as f64 * step).collect();
    breaks.push(PI);
    let q = integrate_with_breaks(|x| dirichlet_kernel(n, x).abs(), &breaks, KERNEL_QUAD_ABS)?;
    Ok(q.value / PI)
}
