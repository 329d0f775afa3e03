//! Instance files: JSON with `units`, `system` and `cet` sections. The units
//! section may be inline or a path to a CSV unit table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::instance::DEFAULT_L_SEG;
use super::params::{CetParams, SystemParams, UnitParams};
use super::{Instance, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitsSection {
    Inline(Vec<UnitParams>),
    /// CSV file, resolved relative to the JSON file.
    Csv(String),
}

/// On-disk instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub units: UnitsSection,
    pub system: SystemParams,
    pub cet: CetParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_seg: Option<usize>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            units: UnitsSection::Inline(inst.units.clone()),
            system: inst.system.clone(),
            cet: inst.cet.clone(),
            l_seg: Some(inst.l_seg),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// Parses a CSV unit table whose header names are the `UnitParams` fields.
pub fn parse_units_csv(text: &str) -> Result<Vec<UnitParams>, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut units = Vec::new();
    for (row, rec) in reader.deserialize::<UnitParams>().enumerate() {
        units.push(rec.map_err(|e| ModelError::Parse(format!("unit table row {}: {e}", row + 1)))?);
    }
    Ok(units)
}

pub fn units_to_csv(units: &[UnitParams]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for u in units {
        w.serialize(u).expect("unit row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv")
}

/// Parses instance JSON. `base_dir` resolves a CSV units reference; without it
/// only inline units are accepted.
pub fn parse_instance_json(
    text: &str,
    base_dir: Option<&Path>,
    l_seg_override: Option<usize>,
) -> Result<Instance, ModelError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| ModelError::Parse(format!("instance json: {e}")))?;
    let units = match file.units {
        UnitsSection::Inline(units) => units,
        UnitsSection::Csv(rel) => {
            let dir = base_dir.ok_or_else(|| {
                ModelError::Parse("units CSV reference needs a base directory".into())
            })?;
            let path: PathBuf = dir.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
            parse_units_csv(&text)?
        }
    };
    let l_seg = l_seg_override.or(file.l_seg).unwrap_or(DEFAULT_L_SEG);
    Instance::derive(units, file.system, file.cet, l_seg)
}

pub fn load_instance(path: &Path, l_seg_override: Option<usize>) -> Result<Instance, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    parse_instance_json(&text, path.parent(), l_seg_override)
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, InstanceFile::from_instance(inst).to_json())
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}
