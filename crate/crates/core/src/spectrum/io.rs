//! Versioned JSON interchange for spectral tables. Wave vectors are integer
//! lists; every real number is a decimal string in shortest round-trip form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Level, SpectralTable, Statistics};
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, DualVector};
use crate::units::Units;

pub const FORMAT: &str = "qmomentum.spectral-table";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTableDocument {
    pub format: String,
    pub version: u32,
    pub units: UnitsDoc,
    pub geometry: GeometryDoc,
    pub statistics: Statistics,
    pub e_max: String,
    pub entries: Vec<SectorDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitsDoc {
    pub hbar: String,
    pub mass: String,
    pub kb: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDoc {
    pub dim: usize,
    pub side: String,
    pub particles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorDoc {
    pub q: DualVector,
    pub energies: Vec<String>,
    pub degeneracies: Vec<u64>,
}

fn num(s: &str, field: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Format(format!("field `{field}`: `{s}` is not a decimal number")))
}

impl From<&SpectralTable> for SpectralTableDocument {
    fn from(t: &SpectralTable) -> Self {
        SpectralTableDocument {
            format: FORMAT.into(),
            version: VERSION,
            units: UnitsDoc { hbar: t.units.hbar.to_string(), mass: t.units.mass.to_string(), kb: t.units.kb.to_string() },
            geometry: GeometryDoc { dim: t.geometry.dim, side: t.geometry.side.to_string(), particles: t.geometry.particles },
            statistics: t.statistics,
            e_max: t.e_max.to_string(),
            entries: t
                .entries
                .iter()
                .map(|(q, levels)| SectorDoc {
                    q: *q,
                    energies: levels.iter().map(|l| l.energy.to_string()).collect(),
                    degeneracies: levels.iter().map(|l| l.degeneracy).collect(),
                })
                .collect(),
        }
    }
}

impl SpectralTableDocument {
    pub fn into_table(self) -> Result<SpectralTable> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Format(format!("unsupported document {} v{}", self.format, self.version)));
        }
        let units = Units {
            hbar: num(&self.units.hbar, "units.hbar")?,
            mass: num(&self.units.mass, "units.mass")?,
            kb: num(&self.units.kb, "units.kb")?,
        };
        let geometry = BoxGeometry::new(self.geometry.dim, num(&self.geometry.side, "geometry.side")?, self.geometry.particles)?;
        let mut entries = BTreeMap::new();
        for sector in self.entries {
            if sector.q.dim() != geometry.dim {
                return Err(Error::Format(format!("entries.q {} has the wrong dimension", sector.q)));
            }
            if sector.energies.len() != sector.degeneracies.len() {
                return Err(Error::Format(format!("entries {}: energies and degeneracies differ in length", sector.q)));
            }
            let mut levels = Vec::with_capacity(sector.energies.len());
            for (e, g) in sector.energies.iter().zip(&sector.degeneracies) {
                levels.push(Level { energy: num(e, "entries.energies")?, degeneracy: *g });
            }
            if levels.windows(2).any(|w| w[1].energy < w[0].energy) {
                return Err(Error::Format(format!("entries {}: energies not ascending", sector.q)));
            }
            entries.insert(sector.q, levels);
        }
        Ok(SpectralTable { geometry, units, statistics: self.statistics, e_max: num(&self.e_max, "e_max")?, entries })
    }
}

impl SpectralTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpectralTableDocument::from(self)).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectralTableDocument = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.into_table()
    }
}
