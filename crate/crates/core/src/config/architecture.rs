//! Tile architecture: processing elements and the floorplannable components
//! they drive.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeKind {
    Aimcore,
    Vfu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Aimcore,
    Vfu,
    Actbuf,
    Imem,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 4] = [
        ComponentClass::Aimcore,
        ComponentClass::Vfu,
        ComponentClass::Actbuf,
        ComponentClass::Imem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::Aimcore => "aimcore",
            ComponentClass::Vfu => "vfu",
            ComponentClass::Actbuf => "actbuf",
            ComponentClass::Imem => "imem",
        }
    }

    pub fn is_memory(self) -> bool {
        matches!(self, ComponentClass::Actbuf | ComponentClass::Imem)
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<PeKind> for ComponentClass {
    fn from(kind: PeKind) -> Self {
        match kind {
            PeKind::Aimcore => ComponentClass::Aimcore,
            PeKind::Vfu => ComponentClass::Vfu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeSpec {
    pub name: String,
    pub kind: PeKind,
    /// Compute component (aimcore/vfu class) this PE dissipates power in.
    pub component: String,
    pub clock_hz: u64,
    pub macs_per_cycle: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<u64>,
    pub actbuf: String,
    pub imem: String,
}

impl PeSpec {
    /// Weight cells available on an in-memory array; zero for VFUs.
    pub fn weight_capacity(&self) -> u64 {
        self.rows.unwrap_or(0) * self.cols.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub name: String,
    pub class: ComponentClass,
    pub area_mm2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub tile_name: String,
    pub base_clock_hz: u64,
    /// Intra-tile communication cycles added to every pixel.
    #[serde(default)]
    pub comm_cycles_per_pixel: u64,
    #[serde(rename = "pe")]
    pub pes: Vec<PeSpec>,
    #[serde(rename = "component")]
    pub components: Vec<ComponentSpec>,
}

impl ArchitectureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("architecture", "empty component list"));
        }
        if self.pes.is_empty() {
            return Err(Error::invalid("architecture", "no processing elements"));
        }
        if self.base_clock_hz == 0 {
            return Err(Error::invalid("architecture", "base_clock_hz must be positive"));
        }
        let mut names = BTreeSet::new();
        for c in &self.components {
            if !names.insert(c.name.as_str()) {
                return Err(Error::invalid(
                    "architecture",
                    format!("duplicate component `{}`", c.name),
                ));
            }
            if !(c.area_mm2 > 0.0 && c.area_mm2.is_finite()) {
                return Err(Error::invalid(
                    "component",
                    format!("`{}`: area_mm2 must be positive", c.name),
                ));
            }
        }
        let mut pe_names = BTreeSet::new();
        for pe in &self.pes {
            if !pe_names.insert(pe.name.as_str()) {
                return Err(Error::invalid("architecture", format!("duplicate PE `{}`", pe.name)));
            }
            if pe.clock_hz == 0 || !self.base_clock_hz.is_multiple_of(pe.clock_hz) {
                return Err(Error::ClockRatio {
                    pe: pe.name.clone(),
                    clock_hz: pe.clock_hz,
                    base_hz: self.base_clock_hz,
                });
            }
            if pe.macs_per_cycle == 0 {
                return Err(Error::invalid(
                    "pe",
                    format!("`{}`: macs_per_cycle must be positive", pe.name),
                ));
            }
            let has_array = pe.rows.is_some() && pe.cols.is_some();
            let any_array = pe.rows.is_some() || pe.cols.is_some();
            match pe.kind {
                PeKind::Aimcore if !has_array || pe.weight_capacity() == 0 => {
                    return Err(Error::invalid(
                        "pe",
                        format!("`{}`: aimcore needs nonzero rows and cols", pe.name),
                    ))
                }
                PeKind::Vfu if any_array => {
                    return Err(Error::invalid(
                        "pe",
                        format!("`{}`: rows/cols only apply to aimcores", pe.name),
                    ))
                }
                _ => {}
            }
            for (role, name, class) in [
                ("component", &pe.component, ComponentClass::from(pe.kind)),
                ("actbuf", &pe.actbuf, ComponentClass::Actbuf),
                ("imem", &pe.imem, ComponentClass::Imem),
            ] {
                match self.component(name) {
                    Some(c) if c.class == class => {}
                    Some(c) => {
                        return Err(Error::invalid(
                            "pe",
                            format!(
                                "`{}`: {role} `{name}` is a {} component, expected {class}",
                                pe.name, c.class
                            ),
                        ))
                    }
                    None => {
                        return Err(Error::invalid(
                            "pe",
                            format!("`{}`: unknown {role} component `{name}`", pe.name),
                        ))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let arch: ArchitectureSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        arch.validate()?;
        Ok(arch)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("architecture serializes")
    }

    pub fn component(&self, name: &str) -> Option<&ComponentSpec> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn pe_index(&self, name: &str) -> Option<usize> {
        self.pes.iter().position(|p| p.name == name)
    }

    /// Base-clock cycles per PE-clock cycle.
    pub fn clock_ratio(&self, pe: &PeSpec) -> u64 {
        self.base_clock_hz / pe.clock_hz
    }

    pub fn seconds_per_cycle(&self) -> f64 {
        1.0 / self.base_clock_hz as f64
    }

    pub fn pes_of_kind(&self, kind: PeKind) -> impl Iterator<Item = usize> + '_ {
        self.pes
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.kind == kind)
            .map(|(i, _)| i)
    }
}

pub fn parse_architecture(path: &Path) -> Result<ArchitectureSpec> {
    ArchitectureSpec::parse_str(&crate::io::read_to_string(path)?, path)
}

#[cfg(test)]
pub(crate) fn test_architecture(aimcores: usize, vfus: usize) -> ArchitectureSpec {
    let mut pes = Vec::new();
    let mut components = Vec::new();
    let mut push_pe = |i: usize, kind: PeKind| {
        let class = ComponentClass::from(kind);
        let compute = format!("{class}{i}");
        components.push(ComponentSpec {
            name: compute.clone(),
            class,
            area_mm2: 1.0,
            capacity_bytes: None,
        });
        pes.push(PeSpec {
            name: format!("pe{}", pes.len()),
            kind,
            component: compute,
            clock_hz: if kind == PeKind::Aimcore { 100_000_000 } else { 1_000_000_000 },
            macs_per_cycle: if kind == PeKind::Aimcore { 512 } else { 1 },
            rows: (kind == PeKind::Aimcore).then_some(1152),
            cols: (kind == PeKind::Aimcore).then_some(512),
            actbuf: format!("actbuf{}", pes.len()),
            imem: format!("imem{}", pes.len()),
        });
    };
    for i in 0..aimcores {
        push_pe(i, PeKind::Aimcore);
    }
    for i in 0..vfus {
        push_pe(i, PeKind::Vfu);
    }
    for i in 0..pes.len() {
        components.push(ComponentSpec {
            name: format!("actbuf{i}"),
            class: ComponentClass::Actbuf,
            area_mm2: 0.25,
            capacity_bytes: Some(1_536 * 1024),
        });
        components.push(ComponentSpec {
            name: format!("imem{i}"),
            class: ComponentClass::Imem,
            area_mm2: 0.05,
            capacity_bytes: Some(128 * 1024),
        });
    }
    let arch = ArchitectureSpec {
        tile_name: "test".into(),
        base_clock_hz: 1_000_000_000,
        comm_cycles_per_pixel: 0,
        pes,
        components,
    };
    arch.validate().unwrap();
    arch
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_components_rejected() {
        let mut arch = test_architecture(1, 1);
        arch.components.clear();
        assert!(arch.validate().is_err());
    }

    #[test]
    fn non_integer_clock_ratio_rejected() {
        let mut arch = test_architecture(1, 0);
        arch.pes[0].clock_hz = 300_000_000;
        assert!(matches!(arch.validate(), Err(Error::ClockRatio { .. })));
    }

    #[test]
    fn rows_only_on_aimcores() {
        let mut arch = test_architecture(0, 1);
        arch.pes[0].rows = Some(4);
        assert!(arch.validate().is_err());
        let mut arch = test_architecture(1, 0);
        arch.pes[0].cols = None;
        assert!(arch.validate().is_err());
    }

    #[test]
    fn pe_memory_roles_checked() {
        let mut arch = test_architecture(1, 0);
        arch.pes[0].actbuf = "imem0".into();
        assert!(arch.validate().is_err());
        let mut arch = test_architecture(1, 0);
        arch.pes[0].imem = "nope".into();
        assert!(arch.validate().is_err());
    }

    #[test]
    fn round_trip() {
        let arch = test_architecture(2, 1);
        let again = ArchitectureSpec::parse_str(&arch.to_toml(), Path::new("a")).unwrap();
        assert_eq!(arch, again);
        assert_eq!(arch.clock_ratio(&arch.pes[0]), 10);
    }
}
