//! Atomic probability measures on `Λ*`, their Fourier transforms, the
//! distribution functions `Γ_L`, `Γ`, `Γ_∞`, Cesàro averages `σ_L`, and
//! constructed families with crystal, fluid, superfluid and condensate
//! behaviour as `L → ∞`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::com::{fourier_sum, KernelSamples};
use crate::error::{Error, Result};
use crate::export::Table;
use crate::lattice::{BoxGeometry, DualVector, LatticeWeights};
use crate::par;
use crate::spectrum::{kappa_index, MomentumDistribution};
use crate::sum::{fsum, ExactSum};

/// Even nonnegative weights on the dual lattice of a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub geometry: BoxGeometry,
    pub weights: LatticeWeights,
    pub deficit: f64,
}

impl AtomicMeasure {
    pub fn new(geometry: BoxGeometry, pairs: impl IntoIterator<Item = (DualVector, f64)>) -> Result<Self> {
        let weights = LatticeWeights::from_pairs(pairs);
        if let Some((k, w)) = weights.iter().find(|(k, w)| !(*w >= 0.0) || k.dim() != geometry.dim) {
            return Err(Error::InvalidParams(format!("weight {w} at {k} is negative or has the wrong dimension")));
        }
        let total = weights.total();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!("total mass {total} exceeds one")));
        }
        if weights.evenness_defect() > 1e-15 {
            return Err(Error::InvalidParams("weights are not even".into()));
        }
        Ok(AtomicMeasure { geometry, weights, deficit: (1.0 - total).max(0.0) })
    }

    pub fn point_mass(geometry: BoxGeometry) -> Self {
        AtomicMeasure { geometry, weights: LatticeWeights::from_pairs([(DualVector::zero(geometry.dim), 1.0)]), deficit: 0.0 }
    }

    pub fn to_distribution(&self) -> MomentumDistribution {
        MomentumDistribution { geometry: self.geometry, weights: self.weights.clone(), deficit: self.deficit }
    }
}

impl From<&MomentumDistribution> for AtomicMeasure {
    fn from(d: &MomentumDistribution) -> Self {
        AtomicMeasure { geometry: d.geometry, weights: d.weights.clone(), deficit: d.deficit }
    }
}

/// `f_L(x) = Σ_k φ(k) e^{−ik·x}`.
pub fn fourier_transform(mu: &AtomicMeasure, xs: &[Vec<f64>]) -> Result<KernelSamples> {
    if let Some(i) = xs.iter().position(|x| x.len() != mu.geometry.dim) {
        return Err(Error::InvalidParams(format!("point {i} has the wrong dimension")));
    }
    Ok(KernelSamples { points: xs.to_vec(), values: fourier_sum(&mu.weights, mu.geometry.side, xs, -1.0) })
}

/// `Γ_L(κ) = Σ_{‖k‖∞ ≤ κ} φ(k)`.
pub fn gamma_l(mu: &AtomicMeasure, kappa: f64) -> f64 {
    if kappa < 0.0 {
        return 0.0;
    }
    let m = kappa_index(kappa, mu.geometry.side);
    mu.weights.iter().filter(|(k, _)| k.max_abs() <= m).map(|e| e.1).collect::<ExactSum>().value()
}

/// `Γ_L` on an ascending κ grid in one pass. Each value is the correctly
/// rounded sum of a growing set of nonnegative terms, so the curve is
/// nondecreasing exactly.
pub fn gamma_l_curve(mu: &AtomicMeasure, kappas: &[f64]) -> Vec<f64> {
    let mut by_radius: Vec<(i64, f64)> = mu.weights.iter().map(|(k, w)| (k.max_abs(), *w)).collect();
    by_radius.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut acc = ExactSum::new();
    let mut next = 0;
    kappas
        .iter()
        .map(|&kappa| {
            if kappa < 0.0 {
                return 0.0;
            }
            let m = kappa_index(kappa, mu.geometry.side);
            while next < by_radius.len() && by_radius[next].0 <= m {
                acc.add(by_radius[next].1);
                next += 1;
            }
            acc.value()
        })
        .collect()
}

/// Cesàro average over centred rectangles,
/// `σ_L(2πn/L) = Σ_k φ(k) Π_i (1 − |m_i|/n)_+`.
pub fn sigma_l(mu: &AtomicMeasure, n: u32) -> f64 {
    let n = n.max(1) as i64;
    let nf = n as f64;
    mu.weights
        .iter()
        .filter(|(k, _)| k.max_abs() < n)
        .map(|(k, w)| k.coords().iter().fold(*w, |acc, &m| acc * ((n - m.abs()) as f64 / nf)))
        .collect::<ExactSum>()
        .value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Crystal,
    NormalFluid,
    Superfluid,
    BecGas,
    EscapingPointMass,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] =
        [FamilyKind::Crystal, FamilyKind::NormalFluid, FamilyKind::Superfluid, FamilyKind::BecGas, FamilyKind::EscapingPointMass];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Crystal => "crystal",
            FamilyKind::NormalFluid => "normal_fluid",
            FamilyKind::Superfluid => "superfluid",
            FamilyKind::BecGas => "bec_gas",
            FamilyKind::EscapingPointMass => "escaping_point_mass",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown family kind `{s}`")))
    }
}

/// One weighted point of a crystal's reciprocal lattice, given by its
/// integer coefficients in the generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalPeak {
    pub coefficients: Vec<i64>,
    pub weight: f64,
}

/// Parameters of an example family. The continuous part is a centred
/// Gaussian of standard deviation `width` per axis; the escaping part is a
/// Gaussian of standard deviation `escape_scale·√N`, so it leaves every
/// fixed ball as `N = ρL^d` grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    pub dim: usize,
    pub rho: f64,
    /// Weight of the point mass at the origin.
    pub zero_weight: f64,
    /// Mass sent to infinity.
    pub infinity_weight: f64,
    pub width: f64,
    pub escape_scale: f64,
    /// Generators of the crystal's reciprocal lattice, one row per axis.
    pub generators: Vec<Vec<f64>>,
    pub peaks: Vec<CrystalPeak>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            dim: 1,
            rho: 1.0,
            zero_weight: 0.0,
            infinity_weight: 0.0,
            width: 1.0,
            escape_scale: 8.0,
            generators: vec![vec![2.0 * PI]],
            peaks: vec![
                CrystalPeak { coefficients: vec![0], weight: 0.5 },
                CrystalPeak { coefficients: vec![1], weight: 0.25 },
                CrystalPeak { coefficients: vec![-1], weight: 0.25 },
            ],
        }
    }
}

/// Largest dual-lattice cube a family may fill.
const MAX_SUPPORT: f64 = 5e7;
/// Gaussian parts are cut at this many standard deviations; the rest is
/// below `1e−16` and removed by renormalization.
const GAUSS_CUT: f64 = 8.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureFamily {
    pub kind: FamilyKind,
    pub params: FamilyParams,
}

pub fn example_family(kind: FamilyKind, params: FamilyParams) -> Result<MeasureFamily> {
    let p = &params;
    let bad = |m: String| Err(Error::InvalidParams(m));
    if !(1..=3).contains(&p.dim) {
        return bad(format!("dimension {} not in 1..=3", p.dim));
    }
    if !(p.rho > 0.0 && p.rho.is_finite()) {
        return bad("rho must be positive".into());
    }
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if !unit(p.zero_weight) || !unit(p.infinity_weight) || p.zero_weight + p.infinity_weight > 1.0 + 1e-15 {
        return bad("zero_weight and infinity_weight must lie in [0, 1] with sum at most 1".into());
    }
    if !(p.width > 0.0 && p.escape_scale > 0.0) {
        return bad("width and escape_scale must be positive".into());
    }
    match kind {
        FamilyKind::Crystal => {
            if p.generators.len() != p.dim || p.generators.iter().any(|g| g.len() != p.dim) {
                return bad(format!("crystal needs {} generators with {} components", p.dim, p.dim));
            }
            let m = nalgebra::DMatrix::from_fn(p.dim, p.dim, |i, j| p.generators[i][j]);
            if m.determinant().abs() < 1e-12 {
                return bad("crystal generators are linearly dependent".into());
            }
            if p.peaks.iter().any(|pk| pk.coefficients.len() != p.dim || !(pk.weight >= 0.0)) {
                return bad("crystal peaks need nonnegative weights and one coefficient per axis".into());
            }
            let total = fsum(p.peaks.iter().map(|pk| pk.weight));
            if (total - 1.0).abs() > 1e-12 {
                return bad(format!("crystal weights sum to {total}, not 1"));
            }
            let weight_of = |c: &[i64]| fsum(p.peaks.iter().filter(|pk| pk.coefficients == c).map(|pk| pk.weight));
            for pk in &p.peaks {
                let neg: Vec<i64> = pk.coefficients.iter().map(|c| -c).collect();
                if weight_of(&pk.coefficients) != weight_of(&neg) {
                    return bad("crystal weights must be even".into());
                }
            }
        }
        FamilyKind::NormalFluid if p.zero_weight != 0.0 => return bad("normal_fluid has no zero_weight".into()),
        FamilyKind::BecGas if p.infinity_weight != 0.0 => return bad("bec_gas has no infinity_weight".into()),
        _ => {}
    }
    Ok(MeasureFamily { kind, params })
}

/// Cell masses of a centred Gaussian on a lattice of spacing `h`, indexed by
/// `|m|` and normalized to total one. Computing by `|m|` keeps them even.
fn gaussian_cells(h: f64, sigma: f64) -> Vec<f64> {
    let radius = (GAUSS_CUT * sigma / h).ceil() as usize + 1;
    let c = h / (sigma * std::f64::consts::SQRT_2);
    let mut cells = Vec::with_capacity(radius + 1);
    cells.push(erf(0.5 * c));
    for m in 1..=radius {
        let m = m as f64;
        cells.push(0.5 * (erfc((m - 0.5) * c) - erfc((m + 0.5) * c)));
    }
    let total = fsum(cells.iter().enumerate().map(|(m, w)| if m == 0 { *w } else { 2.0 * w }));
    cells.iter().map(|w| w / total).collect()
}

fn product_weight(cells: &[f64], k: &DualVector) -> f64 {
    k.coords().iter().fold(1.0, |acc, &m| acc * cells.get(m.unsigned_abs() as usize).copied().unwrap_or(0.0))
}

impl MeasureFamily {
    /// Particle number `round(ρL^d)`, at least one.
    pub fn geometry(&self, side: f64) -> Result<BoxGeometry> {
        let n = (self.params.rho * side.powi(self.params.dim as i32)).round().max(1.0) as usize;
        BoxGeometry::new(self.params.dim, side, n)
    }

    /// The member of the family in a box of side `side`.
    pub fn measure(&self, side: f64) -> Result<AtomicMeasure> {
        let geom = self.geometry(side)?;
        let p = &self.params;
        let h = geom.dual_spacing();
        let d = p.dim;
        let nearest = |x: &[f64]| DualVector::new(&x.iter().map(|xi| (xi / h).round() as i64).collect::<Vec<_>>());
        match self.kind {
            FamilyKind::Crystal => {
                let pairs = p.peaks.iter().map(|pk| {
                    let x: Vec<f64> = (0..d).map(|j| fsum((0..d).map(|i| pk.coefficients[i] as f64 * p.generators[i][j]))).collect();
                    (nearest(&x), pk.weight)
                });
                AtomicMeasure::new(geom, pairs)
            }
            FamilyKind::EscapingPointMass => {
                let mut x = vec![0.0; d];
                x[0] = side;
                let k = nearest(&x);
                AtomicMeasure::new(geom, [(k, 0.5), (-k, 0.5)])
            }
            _ => {
                let continuous = (1.0 - p.zero_weight - p.infinity_weight).max(0.0);
                let cont = gaussian_cells(h, p.width);
                let esc = if p.infinity_weight > 0.0 {
                    gaussian_cells(h, p.escape_scale * (geom.particles as f64).sqrt())
                } else {
                    vec![]
                };
                let radius = cont.len().max(esc.len()) as i64 - 1;
                let count = ((2 * radius + 1) as f64).powi(d as i32);
                if count > MAX_SUPPORT {
                    return Err(Error::BlowupGuard { estimate: count, limit: MAX_SUPPORT });
                }
                let side_len = (2 * radius + 1) as usize;
                let total = side_len.pow(d as u32);
                let entries: Vec<(DualVector, f64)> = par::map_range(total, |mut idx| {
                    let mut c = [0i64; 3];
                    for axis in (0..d).rev() {
                        c[axis] = (idx % side_len) as i64 - radius;
                        idx /= side_len;
                    }
                    let k = DualVector::new(&c[..d]);
                    let point = if k.is_zero() { p.zero_weight } else { 0.0 };
                    let w = fsum([point, continuous * product_weight(&cont, &k), p.infinity_weight * product_weight(&esc, &k)]);
                    (k, w)
                })
                .into_iter()
                .filter(|e| e.1 > 0.0)
                .collect();
                let weights = LatticeWeights::from_sorted(entries);
                let deficit = (1.0 - weights.total()).max(0.0);
                Ok(AtomicMeasure { geometry: geom, weights, deficit })
            }
        }
    }
}

/// Estimates of `Γ`, `Γ_<∞`, `Γ_∞` and the far-field value of `f` from a
/// family sampled on a grid of box sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub kind: FamilyKind,
    pub side_grid: Vec<f64>,
    pub kappa_grid: Vec<f64>,
    /// `Γ_L(κ)`, one row per side length.
    pub gamma_l: Vec<Vec<f64>>,
    /// Surrogate for the limsup: the maximum over the rows listed in
    /// `surrogate_sides`.
    pub gamma: Vec<f64>,
    pub surrogate_sides: Vec<f64>,
    /// Points where some row decreased in κ; zero by construction.
    pub monotonicity_violations: usize,
    /// `Γ` at the smallest κ, the weight sitting at the origin.
    pub zero_weight: f64,
    pub gamma_finite: f64,
    pub gamma_infinity: f64,
    /// Mean of `Re f_L` over `[L/8, L/4]` on the first axis, largest `L`.
    pub far_field: f64,
    pub far_field_window: (f64, f64),
    pub plateau_warning: Option<String>,
}

/// Γ may rise by at most this much over the top octave of the κ grid before
/// a missing plateau is reported.
pub const PLATEAU_TOL: f64 = 0.01;
const FAR_FIELD_POINTS: usize = 64;

pub fn gamma_limit_report(fam: &MeasureFamily, sides: &[f64], kappas: &[f64]) -> Result<LimitReport> {
    if sides.len() < 3 || sides.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams("side grid must be strictly increasing with at least 3 values".into()));
    }
    if kappas.is_empty() || kappas.windows(2).any(|w| !(w[0] < w[1])) || kappas[0] < 0.0 {
        return Err(Error::InvalidParams("kappa grid must be nonnegative and strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(sides.len());
    let mut far_field = 0.0;
    let mut window = (0.0, 0.0);
    for (i, &side) in sides.iter().enumerate() {
        let mu = fam.measure(side)?;
        rows.push(gamma_l_curve(&mu, kappas));
        if i + 1 == sides.len() {
            window = (side / 8.0, side / 4.0);
            let xs: Vec<Vec<f64>> = (0..FAR_FIELD_POINTS)
                .map(|j| {
                    let mut x = vec![0.0; fam.params.dim];
                    x[0] = window.0 + (window.1 - window.0) * j as f64 / (FAR_FIELD_POINTS - 1) as f64;
                    x
                })
                .collect();
            far_field = fsum(fourier_transform(&mu, &xs)?.values.iter().map(|z| z.re)) / FAR_FIELD_POINTS as f64;
        }
    }
    let monotonicity_violations = rows.iter().map(|r| r.windows(2).filter(|w| w[1] < w[0]).count()).sum();
    let top = sides.len() / 2;
    let gamma: Vec<f64> = (0..kappas.len()).map(|j| rows[top..].iter().map(|r| r[j]).fold(0.0, f64::max)).collect();
    let gamma_finite = *gamma.last().expect("nonempty grid");
    let kmax = *kappas.last().expect("nonempty grid");
    let low = kappas.iter().position(|&k| k >= 0.5 * kmax).expect("kmax qualifies");
    let rise = gamma_finite - gamma[low];
    let plateau_warning = (rise > PLATEAU_TOL)
        .then(|| format!("no-plateau: Γ rises by {rise:.3e} over κ ∈ [{}, {}]", kappas[low], kmax));
    Ok(LimitReport {
        kind: fam.kind,
        side_grid: sides.to_vec(),
        kappa_grid: kappas.to_vec(),
        gamma_l: rows,
        zero_weight: gamma[0],
        gamma,
        surrogate_sides: sides[top..].to_vec(),
        monotonicity_violations,
        gamma_finite,
        gamma_infinity: 1.0 - gamma_finite,
        far_field,
        far_field_window: window,
        plateau_warning,
    })
}

impl LimitReport {
    /// Columns `kappa, gamma` followed by one `Γ_L` column per side length.
    pub fn table(&self) -> Table {
        let mut header = vec!["kappa".to_string(), "gamma".to_string()];
        header.extend(self.side_grid.iter().map(|l| format!("gamma_L{}", crate::export::num(*l))));
        let mut t = Table { header, rows: Vec::new() };
        for (j, k) in self.kappa_grid.iter().enumerate() {
            let mut row = vec![*k, self.gamma[j]];
            row.extend(self.gamma_l.iter().map(|r| r[j]));
            t.push(row);
        }
        t
    }
}

/// `(f_L * G_λ)(x) = Σ_k φ(k) e^{−ik·x} e^{−λ²k²/4}` at the largest side in
/// the grid.
pub fn mollified_limit(fam: &MeasureFamily, lambda: f64, x: &[f64], sides: &[f64]) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams("mollifier width must be positive".into()));
    }
    let side = sides.iter().copied().fold(f64::NAN, f64::max);
    if !side.is_finite() {
        return Err(Error::InvalidParams("empty side grid".into()));
    }
    let mu = fam.measure(side)?;
    if x.len() != mu.geometry.dim {
        return Err(Error::InvalidParams("point has the wrong dimension".into()));
    }
    let h = mu.geometry.dual_spacing();
    let damped = mu.weights.map_values(|k, w| w * (-0.25 * lambda * lambda * h * h * k.norm2() as f64).exp());
    Ok(fourier_sum(&damped, side, &[x.to_vec()], -1.0)[0].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fejer::{dirichlet_kernel, fejer_kernel};
    use crate::quad::integrate_with_breaks;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(side: f64) -> BoxGeometry {
        BoxGeometry::new(1, side, 1).unwrap()
    }

    fn random_measure(rng: &mut ChaCha8Rng, side: f64, radius: i64) -> AtomicMeasure {
        let raw: Vec<f64> = (0..=radius).map(|_| if rng.gen_bool(0.7) { rng.gen::<f64>() } else { 0.0 }).collect();
        let total: f64 = raw[0] + 2.0 * raw[1..].iter().sum::<f64>();
        let raw = if total == 0.0 { vec![1.0] } else { raw.iter().map(|w| w / total).collect() };
        let pairs = raw.iter().enumerate().flat_map(|(m, w)| {
            let k = DualVector::new(&[m as i64]);
            if m == 0 { vec![(k, *w)] } else { vec![(k, *w), (-k, *w)] }
        });
        AtomicMeasure::new(geom(side), pairs).unwrap()
    }

    #[test]
    fn transform_examples() {
        let xs: Vec<Vec<f64>> = (0..25).map(|i| vec![0.37 * i as f64]).collect();
        let f = fourier_transform(&AtomicMeasure::point_mass(geom(10.0)), &xs).unwrap();
        assert!(f.values.iter().all(|z| z.re == 1.0 && z.im == 0.0));

        let side = 10.0;
        let k0 = DualVector::new(&[3]);
        let mu = AtomicMeasure::new(geom(side), [(k0, 0.5), (-k0, 0.5)]).unwrap();
        let f = fourier_transform(&mu, &xs).unwrap();
        for (x, z) in xs.iter().zip(&f.values) {
            assert!((z.re - (2.0 * PI * 3.0 * x[0] / side).cos()).abs() < 1e-14);
            assert!(z.im.abs() < 1e-15);
        }

        let n = 6;
        let mu = AtomicMeasure::new(geom(side), (-n..=n).map(|m| (DualVector::new(&[m]), 1.0 / (2 * n + 1) as f64))).unwrap();
        let f = fourier_transform(&mu, &xs).unwrap();
        for (x, z) in xs.iter().zip(&f.values) {
            let d = dirichlet_kernel(n as u32, 2.0 * PI * x[0] / side) / (2 * n + 1) as f64;
            assert!((z.re - d).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_examples_and_oracle() {
        let mu = AtomicMeasure::point_mass(geom(5.0));
        assert!([0.0, 0.1, 100.0].iter().all(|&k| gamma_l(&mu, k) == 1.0));
        let k0 = DualVector::new(&[4]);
        let pair = AtomicMeasure::new(geom(2.0 * PI), [(k0, 0.5), (-k0, 0.5)]).unwrap();
        assert_eq!(gamma_l(&pair, 3.9), 0.0);
        assert_eq!(gamma_l(&pair, 4.0), 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kappas: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
        for _ in 0..20 {
            let mu = random_measure(&mut rng, 2.0 * PI, 12);
            let curve = gamma_l_curve(&mu, &kappas);
            for (kappa, g) in kappas.iter().zip(&curve) {
                let direct: f64 = mu.weights.iter().filter(|(k, _)| k.coord(0).abs() as f64 <= kappa + 1e-9).map(|e| e.1).sum();
                assert!((g - direct).abs() < 1e-14);
                assert_eq!(*g, gamma_l(&mu, *kappa));
            }
            assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sigma_below_gamma_and_matches_fejer_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let side = 3.0;
        for _ in 0..30 {
            let mu = random_measure(&mut rng, side, 9);
            for n in 1..14u32 {
                let s = sigma_l(&mu, n);
                assert!(s <= gamma_l(&mu, 2.0 * PI * n as f64 / side));
            }
        }
        let mu = random_measure(&mut rng, side, 9);
        for n in [1u32, 3, 8, 12] {
            // σ_L = (1/2π)∫_{−π}^{π} f_L(Ly/2π) F_n(y) dy
            let f = |y: f64| -> f64 { mu.weights.iter().map(|(k, w)| w * (k.coord(0) as f64 * y).cos()).sum::<f64>() * fejer_kernel(n, y) };
            let breaks: Vec<f64> = (-(n as i64)..=n as i64).map(|l| PI * l as f64 / n as f64).collect();
            let q = integrate_with_breaks(f, &breaks, 1e-13).unwrap();
            assert!((q.value / (2.0 * PI) - sigma_l(&mu, n)).abs() < 1e-10, "n={n}");
        }
        let point = AtomicMeasure::point_mass(geom(side));
        assert!(sigma_l(&point, 1) <= gamma_l(&point, 2.0 * PI / side));
    }

    #[test]
    fn family_validation() {
        let mut p = FamilyParams { zero_weight: 0.7, infinity_weight: 0.5, ..Default::default() };
        assert!(example_family(FamilyKind::Superfluid, p.clone()).is_err());
        p.zero_weight = 0.2;
        assert!(example_family(FamilyKind::Superfluid, p.clone()).is_ok());
        assert!(example_family(FamilyKind::NormalFluid, p.clone()).is_err());
        assert!(example_family(FamilyKind::BecGas, p).is_err());
        let mut c = FamilyParams::default();
        c.peaks[1].weight = 0.3;
        assert!(example_family(FamilyKind::Crystal, c).is_err());
        let c = FamilyParams { generators: vec![vec![0.0]], ..Default::default() };
        assert!(example_family(FamilyKind::Crystal, c).is_err());
        assert_eq!("bec_gas".parse::<FamilyKind>().unwrap(), FamilyKind::BecGas);
    }

    #[test]
    fn family_members_are_even_probability_measures() {
        let p = FamilyParams { zero_weight: 0.4, infinity_weight: 0.3, ..Default::default() };
        let fam = example_family(FamilyKind::Superfluid, p).unwrap();
        for side in [200.0, 500.0] {
            let mu = fam.measure(side).unwrap();
            assert_eq!(mu.weights.evenness_defect(), 0.0);
            assert!((mu.weights.total() - 1.0).abs() < 1e-13);
            assert!(mu.weights.iter().all(|e| e.1 >= 0.0));
            assert!((mu.weights.get(&DualVector::zero(1)).unwrap() - 0.4).abs() < 0.01);
        }
    }

    #[test]
    fn crystal_family_limits() {
        let fam = example_family(FamilyKind::Crystal, FamilyParams::default()).unwrap();
        let kappas: Vec<f64> = (1..=40).map(|i| 0.4 * i as f64).collect();
        let r = gamma_limit_report(&fam, &[50.0, 100.0, 200.0, 400.0], &kappas).unwrap();
        assert!(r.gamma_infinity < 0.02);
        assert_eq!(r.monotonicity_violations, 0);
        let mu = fam.measure(400.0).unwrap();
        let xs: Vec<Vec<f64>> = (0..50).map(|i| vec![0.05 * i as f64]).collect();
        let shifted: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] + 1.0]).collect();
        let (f, g) = (fourier_transform(&mu, &xs).unwrap(), fourier_transform(&mu, &shifted).unwrap());
        for ((x, a), b) in xs.iter().zip(&f.values).zip(&g.values) {
            assert!((a.re - b.re).abs() < 0.01);
            assert!((a.re - (0.5 + 0.5 * (2.0 * PI * x[0]).cos())).abs() < 0.01);
        }
        assert!((mollified_limit(&fam, 0.01, &[0.0], &[400.0]).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn mollifier_limits() {
        let fam = example_family(FamilyKind::Superfluid, FamilyParams { zero_weight: 0.4, infinity_weight: 0.3, ..Default::default() }).unwrap();
        let v = mollified_limit(&fam, 0.2, &[0.0], &[100.0, 1000.0]).unwrap();
        assert!((v - 0.7).abs() < 0.02, "{v}");
        let v = mollified_limit(&fam, 1e5, &[0.0], &[1000.0]).unwrap();
        let nu0 = fam.measure(1000.0).unwrap().weights.get(&DualVector::zero(1)).unwrap();
        assert!((v - nu0).abs() < 1e-12);
    }

    #[test]
    fn escaping_families() {
        let kappas: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
        let sides = [125.0, 250.0, 500.0, 1000.0];
        let fam = example_family(FamilyKind::EscapingPointMass, FamilyParams::default()).unwrap();
        let r = gamma_limit_report(&fam, &sides, &kappas).unwrap();
        assert!(r.gamma.iter().all(|&g| g == 0.0));
        assert_eq!(r.gamma_infinity, 1.0);

        // all mass escaping at scale √N: f_L vanishes away from the origin
        let fam = example_family(FamilyKind::NormalFluid, FamilyParams { infinity_weight: 1.0, ..Default::default() }).unwrap();
        let r = gamma_limit_report(&fam, &sides, &kappas).unwrap();
        assert!(r.gamma_infinity > 0.95);
        let xs: Vec<Vec<f64>> = (1..20).map(|i| vec![0.5 * i as f64]).collect();
        let peaks: Vec<f64> = [125.0, 1000.0]
            .iter()
            .map(|&s| fourier_transform(&fam.measure(s).unwrap(), &xs).unwrap().values.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .collect();
        assert!(peaks[1] < peaks[0] && peaks[1] < 1e-10);
    }

    #[test]
    fn condensate_family_saturates_at_log_scale() {
        let fam = example_family(FamilyKind::BecGas, FamilyParams { zero_weight: 0.6, ..Default::default() }).unwrap();
        let mut prev = 0.0;
        for side in [10.0, 100.0, 1000.0] {
            let g = gamma_l(&fam.measure(side).unwrap(), f64::ln(side));
            assert!(g >= prev);
            prev = g;
        }
        assert!(prev > 1.0 - 1e-6);
    }
}
