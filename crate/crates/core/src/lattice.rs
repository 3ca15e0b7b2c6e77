//! The box, its dual lattice `Λ* = (2π/L)ℤ^d`, and the irreducible cell of
//! `Λ*/NΛ*`.
//!
//! Wave vectors are stored as integer coordinates `n`; the physical vector is
//! `k = (2π/L)·n`. Keeping them integral makes every lattice identity exact.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Cube of side `side` in `dim` dimensions holding `particles` particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub dim: usize,
    pub side: f64,
    pub particles: usize,
}

impl BoxGeometry {
    pub fn new(dim: usize, side: f64, particles: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParams(format!("dimension {dim} not in 1..=3")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidParams(format!("side length {side} must be positive")));
        }
        if particles == 0 {
            return Err(Error::InvalidParams("particle number must be at least 1".into()));
        }
        Ok(BoxGeometry { dim, side, particles })
    }

    /// Box holding `particles` at density `rho`; the side is `(N/ρ)^{1/d}`.
    pub fn from_density(dim: usize, rho: f64, particles: usize) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParams(format!("density {rho} must be positive")));
        }
        Self::new(dim, (particles as f64 / rho).powf(1.0 / dim as f64), particles)
    }

    pub fn density(&self) -> f64 {
        self.particles as f64 / self.side.powi(self.dim as i32)
    }

    /// Spacing `2π/L` of the dual lattice.
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Physical wave vector of an integer lattice point.
    pub fn wavevector(&self, q: &DualVector) -> Vec<f64> {
        let h = self.dual_spacing();
        q.coords().iter().map(|&c| c as f64 * h).collect()
    }

    /// Number of irreducible wave vectors, `N^d`.
    pub fn irreducible_count(&self) -> usize {
        self.particles.pow(self.dim as u32)
    }
}

/// Integer coordinates of a dual-lattice point. Ordering is lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualVector {
    dim: u8,
    n: [i64; MAX_DIM],
}

impl DualVector {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "dual vector needs 1..=3 coordinates"
        );
        let mut n = [0; MAX_DIM];
        n[..coords.len()].copy_from_slice(coords);
        DualVector { dim: coords.len() as u8, n }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(&[0; MAX_DIM][..dim])
    }

    /// Unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zero(dim);
        v.n[axis] = 1;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.n[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i64 {
        self.n[axis]
    }

    pub fn is_zero(&self) -> bool {
        self.n.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, other: &DualVector) -> i64 {
        self.coords().iter().zip(other.coords()).map(|(a, b)| a * b).sum()
    }

    /// Squared Euclidean norm in lattice units.
    pub fn norm2(&self) -> i64 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        let mut out = *self;
        for c in out.n[..self.dim()].iter_mut() {
            *c = f(*c);
        }
        out
    }

    fn zip(&self, other: &DualVector, f: impl Fn(i64, i64) -> i64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = *self;
        for i in 0..self.dim() {
            out.n[i] = f(self.n[i], other.n[i]);
        }
        out
    }
}

impl Ord for DualVector {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.dim, self.n).cmp(&(other.dim, other.n))
    }
}

impl PartialOrd for DualVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for DualVector {
    type Output = DualVector;
    fn add(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl Sub for DualVector {
    type Output = DualVector;
    fn sub(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl Neg for DualVector {
    type Output = DualVector;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl Mul<DualVector> for i64 {
    type Output = DualVector;
    fn mul(self, rhs: DualVector) -> DualVector {
        rhs.map(|a| self * a)
    }
}

impl fmt::Debug for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for DualVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        if !(1..=MAX_DIM).contains(&v.len()) {
            return Err(serde::de::Error::custom("dual vector needs 1..=3 coordinates"));
        }
        Ok(DualVector::new(&v))
    }
}

/// Whether every coordinate satisfies `−N < 2m ≤ N`.
pub fn is_irreducible(q: &DualVector, particles: usize) -> bool {
    let n = particles as i64;
    q.coords().iter().all(|&m| -n < 2 * m && 2 * m <= n)
}

/// Integer range of one irreducible coordinate.
fn irreducible_range(particles: usize) -> std::ops::RangeInclusive<i64> {
    let n = particles as i64;
    // -N < 2m  <=>  m >= floor(-N/2) + 1 ;  2m <= N  <=>  m <= floor(N/2)
    (-n).div_euclid(2) + 1..=n.div_euclid(2)
}

/// All `N^d` irreducible wave vectors in lexicographic order.
pub fn irreducible_set(geom: &BoxGeometry) -> Vec<DualVector> {
    let range: Vec<i64> = irreducible_range(geom.particles).collect();
    let mut out = Vec::with_capacity(geom.irreducible_count());
    let mut idx = vec![0usize; geom.dim];
    loop {
        let coords: Vec<i64> = idx.iter().map(|&i| range[i]).collect();
        out.push(DualVector::new(&coords));
        let mut axis = geom.dim;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < range.len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Unique split `Q = q + N k` with `q` irreducible.
pub fn decompose_wavevector(big_q: &DualVector, geom: &BoxGeometry) -> (DualVector, DualVector) {
    let n = geom.particles as i64;
    let q = big_q.map(|c| {
        let r = c.rem_euclid(n);
        if 2 * r > n {
            r - n
        } else {
            r
        }
    });
    let k = (*big_q - q).map(|c| c / n);
    (q, k)
}

/// Real weights on dual-lattice points, kept sorted by point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeWeights {
    entries: Vec<(DualVector, f64)>,
}

impl LatticeWeights {
    /// Builds from arbitrary pairs; repeated points are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (DualVector, f64)>) -> Self {
        let mut map: std::collections::BTreeMap<DualVector, crate::sum::ExactSum> = Default::default();
        for (k, w) in pairs {
            map.entry(k).or_default().add(w);
        }
        LatticeWeights { entries: map.into_iter().map(|(k, s)| (k, s.value())).collect() }
    }

    /// Entries already strictly increasing by point.
    pub(crate) fn from_sorted(entries: Vec<(DualVector, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        LatticeWeights { entries }
    }

    pub fn from_map(map: std::collections::BTreeMap<DualVector, f64>) -> Self {
        LatticeWeights { entries: map.into_iter().collect() }
    }

    pub fn get(&self, k: &DualVector) -> Option<f64> {
        self.entries.binary_search_by(|(p, _)| p.cmp(k)).ok().map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(DualVector, f64)> + '_ {
        self.entries.iter()
    }

    pub fn as_slice(&self) -> &[(DualVector, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        crate::sum::fsum(self.entries.iter().map(|e| e.1))
    }

    /// Largest `|w(k) − w(−k)|`, counting absent points as zero.
    pub fn evenness_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(k, w)| (w - self.get(&-*k).unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn map_values(&self, f: impl Fn(&DualVector, f64) -> f64) -> Self {
        LatticeWeights { entries: self.entries.iter().map(|(k, w)| (*k, f(k, *w))).collect() }
    }
}
