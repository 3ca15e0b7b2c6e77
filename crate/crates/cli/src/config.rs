//! Run configuration: a TOML document merged with command-line overrides,
//! then validated field by field so every diagnostic can name its field.

use std::fmt;
use std::path::{Path, PathBuf};

use qmomentum::lattice::BoxGeometry;
use qmomentum::measure::{FamilyKind, FamilyParams};
use qmomentum::twofluid::ModelDispersion;
use qmomentum::units::HELIUM4_LAMBDA_POINT_K;
use qmomentum::{Statistics, ThermalParams, Units};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Field(String),
    Line(usize),
    File,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub location: Location,
    pub message: String,
}

impl ConfigError {
    pub fn field(name: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { location: Location::Field(name.into()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Field(name) => write!(f, "field `{name}`: {}", self.message),
            Location::Line(n) => write!(f, "line {n}: {}", self.message),
            Location::File => write!(f, "{}", self.message),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UnitPreset {
    Natural,
    /// SI constants with the helium-4 mass.
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitsSpec {
    Preset(UnitPreset),
    Explicit(ExplicitUnits),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitUnits {
    pub hbar: f64,
    pub mass: f64,
    #[serde(rename = "k_B")]
    pub kb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub d: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(rename = "L_grid", default, skip_serializing_if = "Option::is_none")]
    pub side_grid: Option<Vec<f64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Thermal wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative accuracy of truncated sums and recursions.
    pub rel: f64,
    /// Eigenvalue tolerance of the positivity check, relative to the trace.
    pub psd: f64,
    /// Target for the certified spectral tail when `e_max` is not given.
    pub tail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-12, psd: 1e-10, tail: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistMethod {
    /// List eigenstates below `e_max`.
    #[default]
    Enumerate,
    /// Cycle recursion, no cutoff in energy.
    Cycles,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistSpec {
    pub method: DistMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltSpec {
    pub particles: Vec<usize>,
}

impl Default for CltSpec {
    fn default() -> Self {
        CltSpec { particles: vec![2, 4, 8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComSpec {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
}

impl Default for ComSpec {
    fn default() -> Self {
        ComSpec { points: 65, step: None, velocity: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSpec {
    pub family: FamilyKind,
    pub sides: Vec<f64>,
    pub kappa: Vec<f64>,
    pub params: FamilyParams,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec {
            family: FamilyKind::Crystal,
            sides: vec![60.0, 120.0, 240.0, 480.0],
            kappa: std::iter::once(1e-3).chain((1..=32).map(|i| 0.25 * i as f64)).collect(),
            params: FamilyParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoFluidSpec {
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Transition temperature; the SI preset defaults to the helium-4 lambda point.
    #[serde(rename = "T_s", skip_serializing_if = "Option::is_none")]
    pub transition: Option<f64>,
    pub eta: f64,
    pub speed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    /// Slow-down schedule as `[t, alpha]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<(f64, f64)>>,
}

impl Default for TwoFluidSpec {
    fn default() -> Self {
        TwoFluidSpec { temperature: 0.0, transition: None, eta: 1.0, speed: 0.0, temperatures: None, schedule: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandauSpec {
    /// Boosts to check, integer coordinates; defaults to `{−2..2}^d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Vec<i64>>>,
    /// Energy window; defaults to the largest window closed under every boost.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    pub dispersion: ModelDispersion,
    pub speed: f64,
    pub q_max: f64,
    pub q_points: usize,
}

impl Default for LandauSpec {
    fn default() -> Self {
        LandauSpec {
            k: None,
            window: None,
            dispersion: ModelDispersion::Phonon { c: 1.0 },
            speed: 0.0,
            q_max: 4.0,
            q_points: 81,
        }
    }
}

/// The document as written, after command-line overrides. Serializing it
/// gives the effective configuration echoed into every output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Statistics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clt: Option<CltSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub com: Option<ComSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twofluid: Option<TwoFluidSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landau: Option<LandauSpec>,
}

/// Command-line flags that replace configuration values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub emax: Option<f64>,
    pub units: Option<UnitPreset>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let syntax = |e: toml::de::Error| ConfigError {
        location: e.span().map_or(Location::File, |s| Location::Line(line_of(text, s.start))),
        message: e.message().to_string(),
    };
    let de = toml::Deserializer::parse(text).map_err(syntax)?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            ConfigError { location: Location::File, message: inner.message().to_string() }
        } else if path == "units" {
            ConfigError::field(path, "expected \"natural\", \"si\" or a table with `hbar`, `mass` and `k_B`")
        } else {
            ConfigError::field(path, inner.message())
        }
    })
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError {
                location: Location::File,
                message: format!("cannot read {}: {e}", p.display()),
            })?;
            parse(&text)
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::field(name, format!("must be positive and finite, got {x}")))
    }
}

fn fraction(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(ConfigError::field(name, format!("must lie in (0, 1), got {x}")))
    }
}

fn increasing(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(ConfigError::field(name, "must not be empty"));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ConfigError::field(name, "must be finite and strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(f) = o.format {
            self.format = Some(f);
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(t) = o.tol {
            self.tolerances.rel = t;
        }
        if let Some(e) = o.emax {
            self.e_max = Some(e);
        }
        if let Some(u) = o.units {
            self.units = Some(UnitsSpec::Preset(u));
        }
    }

    /// Checks the fields every command shares.
    pub fn validate(&self) -> Result<()> {
        self.units()?;
        let t = &self.tolerances;
        fraction("tolerances.rel", t.rel)?;
        fraction("tolerances.psd", t.psd)?;
        fraction("tolerances.tail", t.tail)?;
        if let Some(e) = self.e_max {
            positive("e_max", e)?;
        }
        if let Some(g) = &self.geometry {
            if !(1..=3).contains(&g.d) {
                return Err(ConfigError::field("geometry.d", format!("must be 1, 2 or 3, got {}", g.d)));
            }
            if g.side.is_some() && g.side_grid.is_some() {
                return Err(ConfigError::field("geometry.L", "give exactly one of `L` and `L_grid`"));
            }
            if let Some(l) = g.side {
                positive("geometry.L", l)?;
            }
            if let Some(grid) = &g.side_grid {
                increasing("geometry.L_grid", grid)?;
                positive("geometry.L_grid", grid[0])?;
            }
            match (g.particles, g.rho) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(ConfigError::field("geometry.N", "give exactly one of `N` and `rho`"))
                }
                (Some(0), None) => return Err(ConfigError::field("geometry.N", "must be at least 1")),
                (None, Some(r)) => {
                    positive("geometry.rho", r)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn units(&self) -> Result<Units> {
        match &self.units {
            None | Some(UnitsSpec::Preset(UnitPreset::Natural)) => Ok(Units::natural()),
            Some(UnitsSpec::Preset(UnitPreset::Si)) => Ok(Units::helium4_si()),
            Some(UnitsSpec::Explicit(u)) => Ok(Units {
                hbar: positive("units.hbar", u.hbar)?,
                mass: positive("units.mass", u.mass)?,
                kb: positive("units.k_B", u.kb)?,
            }),
        }
    }

    fn is_si(&self) -> bool {
        matches!(self.units, Some(UnitsSpec::Preset(UnitPreset::Si)))
    }

    pub fn thermal(&self) -> Result<ThermalParams> {
        let units = self.units()?;
        let t = self.thermal.as_ref().ok_or_else(|| ConfigError::field("thermal", "required by this command"))?;
        let given = [t.beta.is_some(), t.temperature.is_some(), t.lambda.is_some()].iter().filter(|&&b| b).count();
        if given != 1 {
            return Err(ConfigError::field("thermal", "give exactly one of `beta`, `T` and `lambda`"));
        }
        let th = if let Some(b) = t.beta {
            ThermalParams::new(positive("thermal.beta", b)?, units)
        } else if let Some(temp) = t.temperature {
            ThermalParams::from_temperature(positive("thermal.T", temp)?, units)
        } else {
            ThermalParams::from_wavelength(positive("thermal.lambda", t.lambda.unwrap_or(0.0))?, units)
        };
        th.map_err(|e| ConfigError::field("thermal", e.to_string()))
    }

    pub fn statistics(&self) -> Result<Statistics> {
        self.statistics.ok_or_else(|| ConfigError::field("statistics", "required by this command (boltzmann, bose or fermi)"))
    }

    pub fn geometry(&self) -> Result<&GeometrySpec> {
        self.geometry.as_ref().ok_or_else(|| ConfigError::field("geometry", "required by this command"))
    }

    /// Side lengths to run over: `L_grid`, or `L` as a one-point grid.
    pub fn sides(&self) -> Result<Vec<f64>> {
        let g = self.geometry()?;
        match (&g.side, &g.side_grid) {
            (Some(l), None) => Ok(vec![*l]),
            (None, Some(grid)) => Ok(grid.clone()),
            _ => Err(ConfigError::field("geometry.L", "give exactly one of `L` and `L_grid`")),
        }
    }

    pub fn single_side(&self) -> Result<f64> {
        match self.sides()?.as_slice() {
            [l] => Ok(*l),
            _ => Err(ConfigError::field("geometry.L_grid", "this command takes a single `L`")),
        }
    }

    /// Box of side `side` holding `N` particles, or `round(ρL^d)` of them.
    pub fn box_at(&self, side: f64) -> Result<BoxGeometry> {
        let g = self.geometry()?;
        let n = match (g.particles, g.rho) {
            (Some(n), None) => n,
            (None, Some(rho)) => {
                let n = (rho * side.powi(g.d as i32)).round();
                if n < 1.0 {
                    return Err(ConfigError::field("geometry.rho", format!("rho·L^d rounds to no particles at L = {side}")));
                }
                n as usize
            }
            _ => return Err(ConfigError::field("geometry.N", "give exactly one of `N` and `rho`")),
        };
        BoxGeometry::new(g.d, side, n).map_err(|e| ConfigError::field("geometry", e.to_string()))
    }

    pub fn kappa_grid(name: &str, xs: &[f64]) -> Result<()> {
        increasing(name, xs)?;
        if xs[0] < 0.0 {
            return Err(ConfigError::field(name, "must be nonnegative"));
        }
        Ok(())
    }

    pub fn transition_temperature(&self, opts: &TwoFluidSpec) -> Result<f64> {
        match opts.transition {
            Some(t) => positive("twofluid.T_s", t),
            None if self.is_si() => Ok(HELIUM4_LAMBDA_POINT_K),
            None => Err(ConfigError::field("twofluid.T_s", "required unless units = \"si\"")),
        }
    }

    pub fn require_positive(name: &str, x: f64) -> Result<f64> {
        positive(name, x)
    }

    pub fn require_increasing(name: &str, xs: &[f64]) -> Result<()> {
        increasing(name, xs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_document() {
        let c = parse(
            r#"
            statistics = "bose"
            e_max = 3
            units = "natural"
            [geometry]
            d = 1
            L = 6.5
            N = 2
            [thermal]
            beta = 1.0
            [landau.dispersion]
            kind = "roton"
            delta = 1.0
            mu = 0.2
            q_r = 2.0
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.statistics, Some(Statistics::Bose));
        assert_eq!(c.single_side().unwrap(), 6.5);
        assert_eq!(c.box_at(6.5).unwrap().particles, 2);
        assert_eq!(c.thermal().unwrap().beta, 1.0);
        assert!(matches!(c.landau.unwrap().dispersion, ModelDispersion::Roton { .. }));
    }

    #[test]
    fn errors_name_their_field() {
        let e = parse("[geometry]\nd = 1\nL = \"six\"\nN = 2\n").unwrap_err();
        assert_eq!(e.location, Location::Field("geometry.L".into()));
        let e = parse("[geometry]\nd = 1\nL = 2.0\nN = 2\nrho = 1.0\n").unwrap().validate().unwrap_err();
        assert_eq!(e.location, Location::Field("geometry.N".into()));
        let e = parse("[tolerances]\nrel = -1.0\n").unwrap().validate().unwrap_err();
        assert_eq!(e.location, Location::Field("tolerances.rel".into()));
        let e = parse("[thermal]\nbeta = 1.0\nT = 2.0\n").unwrap().thermal().unwrap_err();
        assert_eq!(e.location, Location::Field("thermal".into()));
        let e = parse("x = [\n").unwrap_err();
        assert!(matches!(e.location, Location::Line(_)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse("[geometry]\nd = 1\nLx = 2.0\n").unwrap_err();
        assert!(e.to_string().contains("Lx"), "{e}");
    }

    #[test]
    fn flags_win() {
        let mut c = parse("e_max = 3\nformat = \"json\"\n").unwrap();
        c.apply(&Overrides { emax: Some(5.0), format: Some(Format::Csv), units: Some(UnitPreset::Si), ..Default::default() });
        assert_eq!(c.e_max, Some(5.0));
        assert_eq!(c.format(), Format::Csv);
        assert_eq!(c.units().unwrap(), Units::helium4_si());
    }

    #[test]
    fn density_sets_the_particle_number() {
        let c = parse("[geometry]\nd = 2\nL_grid = [2.0, 3.0]\nrho = 0.5\n").unwrap();
        c.validate().unwrap();
        assert_eq!(c.box_at(3.0).unwrap().particles, 5);
        assert!(c.single_side().is_err());
    }
}
