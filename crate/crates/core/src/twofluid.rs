//! Dissipative heating of a flowing superfluid, the two-fluid weight split,
//! and the Landau excitability analysis together with the boost identity
//! that undercuts it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::Table;
use crate::lattice::DualVector;
use crate::measure::LimitReport;
use crate::spectrum::{boost_shift, SpectralTable};
use crate::units::Units;

/// Flow of speed `speed` at temperature `temperature` below the transition
/// temperature `transition`, converting kinetic energy to heat with
/// efficiency `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub temperature: f64,
    pub transition: f64,
    pub eta: f64,
    pub speed: f64,
    pub units: Units,
}

impl FlowParams {
    pub fn new(temperature: f64, transition: f64, eta: f64, speed: f64, units: Units) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if !(temperature >= 0.0 && temperature <= transition && transition.is_finite()) {
            return bad("need 0 ≤ T ≤ T_s");
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return bad("efficiency must lie in (0, 1]");
        }
        if !(units.mass > 0.0 && units.kb > 0.0 && units.hbar > 0.0) {
            return bad("mass, k_B and ħ must be positive");
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return bad("flow speed must be nonnegative");
        }
        Ok(FlowParams { temperature, transition, eta, speed, units })
    }

    pub fn with_speed(&self, speed: f64) -> Result<Self> {
        Self::new(self.temperature, self.transition, self.eta, speed, self.units)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.transition, self.eta, self.speed, self.units)
    }
}

/// `T_t = T + η m v² (1 − α²)/k_B` once the flow has slowed to `αv`.
pub fn heating_temperature(fp: &FlowParams, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidDomain(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(fp.temperature + fp.eta * fp.units.mass * fp.speed * fp.speed * (1.0 - alpha * alpha) / fp.units.kb)
}

/// `T_v = T + η m v²/k_B`, the temperature after full relaxation.
pub fn steady_temperature(fp: &FlowParams) -> f64 {
    fp.temperature + fp.eta * fp.units.mass * fp.speed * fp.speed / fp.units.kb
}

/// `v_cr = √(k_B (T_s − T)/(η m))`, the speed at which `T_v` reaches `T_s`.
pub fn critical_velocity(fp: &FlowParams) -> Result<f64> {
    if fp.temperature > fp.transition {
        return Err(Error::InvalidDomain(format!("T = {} above T_s = {}", fp.temperature, fp.transition)));
    }
    Ok((fp.units.kb * (fp.transition - fp.temperature) / (fp.eta * fp.units.mass)).sqrt())
}

/// `v_cr(T)` on a temperature grid, columns `T, v_cr`.
pub fn critical_velocity_curve(fp: &FlowParams, temperatures: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["T", "v_cr"]);
    for &temp in temperatures {
        t.push(vec![temp, critical_velocity(&fp.with_temperature(temp)?)?]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationStep {
    pub time: f64,
    pub alpha: f64,
    pub temperature: f64,
    /// The superfluid weight has collapsed: `T_t ≥ T_s`.
    pub above_transition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub steps: Vec<RelaxationStep>,
    /// First step at or above `T_s`.
    pub collapse_index: Option<usize>,
}

/// Heating along a prescribed slow-down schedule `(t, α(t))`, which must
/// start at `(0, 1)` and have increasing times and nonincreasing `α`.
pub fn relaxation_series(fp: &FlowParams, schedule: &[(f64, f64)]) -> Result<RelaxationReport> {
    let bad = |m: String| Err(Error::ScheduleNotMonotone(m));
    match schedule.first() {
        Some(&(t, a)) if t == 0.0 && a == 1.0 => {}
        _ => return bad("schedule must start at (0, 1)".into()),
    }
    for (i, w) in schedule.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return bad(format!("time does not increase at step {}", i + 1));
        }
        if !(w[1].1 <= w[0].1) || w[1].1 < 0.0 {
            return bad(format!("alpha increases or leaves [0, 1] at step {}", i + 1));
        }
    }
    let mut steps = Vec::with_capacity(schedule.len());
    for &(time, alpha) in schedule {
        let temperature = heating_temperature(fp, alpha)?;
        steps.push(RelaxationStep { time, alpha, temperature, above_transition: temperature >= fp.transition });
    }
    let collapse_index = steps.iter().position(|s| s.above_transition);
    Ok(RelaxationReport { steps, collapse_index })
}

impl RelaxationReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["t", "alpha", "T_t", "collapsed"]);
        for s in &self.steps {
            t.push(vec![s.time, s.alpha, s.temperature, if s.above_transition { 1.0 } else { 0.0 }]);
        }
        t
    }
}

/// Model excitation spectra `ε_q` as functions of `|q|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDispersion {
    /// `cħ|q|`.
    Phonon { c: f64 },
    /// `Δ + ħ²(|q| − q_r)²/2μ`.
    Roton { delta: f64, mu: f64, q_r: f64 },
    /// Lower envelope of the phonon and roton branches.
    PhononRoton { c: f64, delta: f64, mu: f64, q_r: f64 },
    /// Piecewise-linear interpolation of `(|q|, ε)` samples with increasing
    /// `|q|`.
    Tabulated { table: Vec<(f64, f64)> },
}

impl ModelDispersion {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        match self {
            ModelDispersion::Phonon { c } if !(*c > 0.0) => bad("sound speed must be positive"),
            ModelDispersion::Roton { delta, mu, .. } | ModelDispersion::PhononRoton { delta, mu, .. }
                if !(*delta >= 0.0 && *mu > 0.0) =>
            {
                bad("roton gap must be nonnegative and its mass positive")
            }
            ModelDispersion::PhononRoton { c, .. } if !(*c > 0.0) => bad("sound speed must be positive"),
            ModelDispersion::Tabulated { table } => {
                if table.len() < 2 || table.windows(2).any(|w| !(w[1].0 > w[0].0)) || table[0].0 < 0.0 {
                    return bad("tabulated dispersion needs at least two samples with increasing |q| ≥ 0");
                }
                if table.iter().any(|e| !(e.1 >= 0.0)) {
                    return bad("tabulated energies must be nonnegative");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ε` at wave number `|q|`.
    pub fn energy(&self, q: f64, hbar: f64) -> Result<f64> {
        let roton = |delta: f64, mu: f64, q_r: f64| delta + hbar * hbar * (q - q_r).powi(2) / (2.0 * mu);
        Ok(match self {
            ModelDispersion::Phonon { c } => c * hbar * q,
            ModelDispersion::Roton { delta, mu, q_r } => roton(*delta, *mu, *q_r),
            ModelDispersion::PhononRoton { c, delta, mu, q_r } => (c * hbar * q).min(roton(*delta, *mu, *q_r)),
            ModelDispersion::Tabulated { table } => {
                let (first, last) = (table[0], table[table.len() - 1]);
                if q < first.0 || q > last.0 {
                    return Err(Error::InvalidDomain(format!("|q| = {q} outside the tabulated range")));
                }
                let i = table.partition_point(|e| e.0 <= q).clamp(1, table.len() - 1);
                let (a, b) = (table[i - 1], table[i]);
                a.1 + (b.1 - a.1) * (q - a.0) / (b.0 - a.0)
            }
        })
    }

    /// Exact `inf_{q>0} ε_q/(ħq)` where a closed form exists.
    pub fn analytic_landau_velocity(&self, hbar: f64) -> Option<f64> {
        // for the roton branch the tangent from the origin touches at
        // q* = √(q_r² + 2μΔ/ħ²), with slope ħ(q* − q_r)/μ
        let roton = |delta: f64, mu: f64, q_r: f64| {
            let q_star = (q_r * q_r + 2.0 * mu * delta / (hbar * hbar)).sqrt();
            hbar * (q_star - q_r) / mu
        };
        match self {
            ModelDispersion::Phonon { c } => Some(*c),
            ModelDispersion::Roton { delta, mu, q_r } if *q_r >= 0.0 => Some(roton(*delta, *mu, *q_r)),
            ModelDispersion::PhononRoton { c, delta, mu, q_r } if *q_r >= 0.0 => Some(c.min(roton(*delta, *mu, *q_r))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauReport {
    /// Grid indices with `ε_q + ħq·v < 0`.
    pub excitable: Vec<usize>,
    /// `min ε_q/(ħ|q|)` over the nonzero grid points.
    pub grid_velocity: f64,
    pub analytic_velocity: Option<f64>,
    /// The analytic value when available, otherwise the grid value.
    pub landau_velocity: f64,
}

/// Excitability set and Landau velocity of `disp` for flow velocity `v`.
pub fn landau_excitability(disp: &ModelDispersion, v: &[f64], q_grid: &[Vec<f64>], hbar: f64) -> Result<LandauReport> {
    disp.validate()?;
    let mut excitable = Vec::new();
    let mut grid_velocity = f64::INFINITY;
    for (i, q) in q_grid.iter().enumerate() {
        if q.len() != v.len() {
            return Err(Error::InvalidParams(format!("grid point {i} does not match the velocity dimension")));
        }
        let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eps = disp.energy(qn, hbar)?;
        let qv: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
        if eps + hbar * qv < 0.0 {
            excitable.push(i);
        }
        if qn > 0.0 {
            grid_velocity = grid_velocity.min(eps / (hbar * qn));
        }
    }
    let analytic_velocity = disp.analytic_landau_velocity(hbar);
    Ok(LandauReport { excitable, grid_velocity, analytic_velocity, landau_velocity: analytic_velocity.unwrap_or(grid_velocity) })
}

/// Scan along the flow direction, columns `q, eps, eps_minus_hqv` with
/// `ε_q − ħ|q|v`.
pub fn excitability_scan(disp: &ModelDispersion, speed: f64, qs: &[f64], hbar: f64) -> Result<Table> {
    disp.validate()?;
    let mut t = Table::new(&["q", "eps", "eps_minus_hqv"]);
    for &q in qs {
        let e = disp.energy(q.abs(), hbar)?;
        t.push(vec![q, e, e - hbar * q.abs() * speed]);
    }
    Ok(t)
}

/// Result of comparing `{E_{Q,0} + (ħ²/2m)(Nk² + 2k·Q)}` with `{E_{Q,0}}`
/// below an energy window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoostSetReport {
    pub k: DualVector,
    pub window: f64,
    /// Number of sectors whose ground energy lies in the window.
    pub size: usize,
    /// Largest term-by-term difference `|E_{Q,0} + shift − E_{Q+Nk,0}|`.
    pub max_residual: f64,
    /// The multisets agree after sorting, within the relative tolerance.
    pub multiset_equal: bool,
    /// Pairs `(Q, Q + Nk)` ordered by energy: the boosted level labelled
    /// `Q` is the unboosted level labelled `Q + Nk`.
    pub permutation: Vec<(DualVector, DualVector)>,
    pub identity: bool,
}

impl BoostSetReport {
    pub fn pass(&self) -> bool {
        self.multiset_equal
    }
}

/// Relative tolerance for matching boosted and unboosted ground energies.
pub const BOOST_SET_TOL: f64 = 1e-12;

fn ground(table: &SpectralTable, q: &DualVector) -> Option<f64> {
    table.entries.get(q).and_then(|l| l.first()).map(|l| l.energy)
}

/// Checks the boost set equality on `{Q : E_{Q,0} ≤ window}`. Every
/// sector needed on the boosted side must be present in the table.
pub fn boost_set_equality_check(table: &SpectralTable, k: &DualVector, window: f64) -> Result<BoostSetReport> {
    if window > table.e_max {
        return Err(Error::WindowNotClosed(format!("window {window} exceeds the table cutoff {}", table.e_max)));
    }
    let n = table.geometry.particles as i64;
    let mut target: Vec<(f64, DualVector)> =
        table.entries.keys().filter_map(|q| ground(table, q).filter(|e| *e <= window).map(|e| (e, *q))).collect();
    target.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut boosted = Vec::with_capacity(target.len());
    let mut max_residual = 0.0f64;
    for &(e_target, qp) in &target {
        let q = qp - n * *k;
        let e = ground(table, &q)
            .ok_or_else(|| Error::WindowNotClosed(format!("sector {q} needed for {qp} is not tabulated")))?;
        let b = e + boost_shift(table, &q, k);
        max_residual = max_residual.max((b - e_target).abs());
        boosted.push((b, q));
    }
    // nothing outside the window may boost into it
    let slack = BOOST_SET_TOL * window.abs().max(1.0);
    let extra = table.entries.keys().any(|q| {
        let qp = *q + n * *k;
        ground(table, q).is_some_and(|e| e + boost_shift(table, q, k) <= window - slack)
            && ground(table, &qp).is_none_or(|e| e > window)
    });
    boosted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let multiset_equal = !extra
        && boosted.len() == target.len()
        && boosted.iter().zip(&target).all(|(b, t)| (b.0 - t.0).abs() <= BOOST_SET_TOL * t.0.abs().max(table.energy_quantum()));
    let permutation: Vec<(DualVector, DualVector)> = boosted.iter().map(|&(_, q)| (q, q + n * *k)).collect();
    Ok(BoostSetReport {
        k: *k,
        window,
        size: target.len(),
        max_residual,
        multiset_equal,
        identity: permutation.iter().all(|(a, b)| a == b),
        permutation,
    })
}

/// Largest energy window on which [`boost_set_equality_check`] is closed
/// for every shift in `ks`, or `None` if even the lowest sector fails.
pub fn max_closed_window(table: &SpectralTable, ks: &[DualVector]) -> Option<f64> {
    let n = table.geometry.particles as i64;
    let mut levels: Vec<(f64, DualVector)> = table.entries.keys().filter_map(|q| ground(table, q).map(|e| (e, *q))).collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = None;
    for (i, &(e, qp)) in levels.iter().enumerate() {
        if ks.iter().any(|k| ground(table, &(qp - n * *k)).is_none()) {
            break;
        }
        // only close the window between distinct energies
        if levels.get(i + 1).is_none_or(|next| next.0 > e) {
            best = Some(e);
        }
    }
    best.map(|e| e.min(table.e_max))
}

/// Superfluid, collective and escaping weights, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoFluidWeights {
    pub nu0: f64,
    pub continuous_mass: f64,
    pub infinity_mass: f64,
}

/// Reads the weight at the origin, the finite-κ remainder and the escaping
/// mass off a limit report.
pub fn two_fluid_weights(report: &LimitReport) -> TwoFluidWeights {
    let finite = report.gamma_finite.clamp(0.0, 1.0);
    let nu0 = report.zero_weight.clamp(0.0, finite);
    TwoFluidWeights { nu0, continuous_mass: finite - nu0, infinity_mass: 1.0 - finite }
}
