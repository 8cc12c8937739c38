//! Scenario manifest: names the four model files plus run options.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    parse_architecture, parse_energy_table, parse_package, parse_workload, ArchitectureSpec,
    EnergyTable, PackageSpec, WorkloadGraph,
};
use crate::error::{Error, Result};
use crate::floorplan::FloorplanPolicy;
use crate::scheduler::MappingMode;

pub const DEFAULT_DT_CYCLES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioManifest {
    pub name: String,
    pub workload: PathBuf,
    pub architecture: PathBuf,
    pub energy: PathBuf,
    pub package: PathBuf,
    /// `default` or `swapped:<pe_a>,<pe_b>`.
    #[serde(default = "default_mapping")]
    pub mapping: String,
    /// Fine floorplan to use instead of generating one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floorplan: Option<PathBuf>,
    #[serde(default = "default_dt")]
    pub dt_cycles: u64,
    #[serde(default)]
    pub floorplan_policy: FloorplanPolicy,
}

fn default_mapping() -> String {
    "default".into()
}

fn default_dt() -> u64 {
    DEFAULT_DT_CYCLES
}

impl ScenarioManifest {
    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let manifest: ScenarioManifest = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if manifest.dt_cycles == 0 {
            return Err(Error::invalid("scenario", "dt_cycles must be positive"));
        }
        manifest.mapping_mode()?;
        manifest.floorplan_policy.validate()?;
        Ok(manifest)
    }

    pub fn mapping_mode(&self) -> Result<MappingMode> {
        self.mapping.parse()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// A manifest with every referenced file loaded and validated.
#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub manifest: ScenarioManifest,
    /// Directory the manifest's relative paths resolve against.
    pub root: PathBuf,
    pub workload: WorkloadGraph,
    pub architecture: ArchitectureSpec,
    pub energy: EnergyTable,
    pub package: PackageSpec,
}

impl ScenarioBundle {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        let manifest = ScenarioManifest::parse_str(&text, path)?;
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let workload = parse_workload(&root.join(&manifest.workload))?;
        let architecture = parse_architecture(&root.join(&manifest.architecture))?;
        let energy = parse_energy_table(&root.join(&manifest.energy))?;
        let package = parse_package(&root.join(&manifest.package))?;
        Ok(ScenarioBundle {
            manifest,
            root,
            workload,
            architecture,
            energy,
            package,
        })
    }

    pub fn floorplan_path(&self) -> Option<PathBuf> {
        self.manifest.floorplan.as_ref().map(|p| self.root.join(p))
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.root.join(relative)
    }
}
