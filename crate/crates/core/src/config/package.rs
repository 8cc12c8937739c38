//! Package stack: die, TIM, heat spreader, heat sink.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SILICON_HEAT_CAPACITY: f64 = 1.75e6;
pub const TIM_HEAT_CAPACITY: f64 = 4.0e6;
pub const COPPER_HEAT_CAPACITY: f64 = 3.55e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageLayer {
    pub name: String,
    pub footprint_w_mm: f64,
    pub footprint_h_mm: f64,
    pub thickness_mm: f64,
    pub conductivity_w_per_mk: f64,
    /// Defaults by stack position: silicon, TIM, then copper.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volumetric_heat_capacity_j_per_m3k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageSpec {
    pub convection_resistance_k_per_w: f64,
    pub ambient_k: f64,
    #[serde(rename = "layer")]
    pub layers: Vec<PackageLayer>,
}

impl PackageSpec {
    /// Number of stack layers the compact model understands.
    pub const LAYERS: usize = 4;

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() != Self::LAYERS {
            return Err(Error::invalid(
                "package",
                format!(
                    "expected {} layers (die, TIM, spreader, sink), got {}",
                    Self::LAYERS,
                    self.layers.len()
                ),
            ));
        }
        if !(self.convection_resistance_k_per_w > 0.0) {
            return Err(Error::invalid("package", "convection resistance must be positive"));
        }
        if !(self.ambient_k > 0.0) {
            return Err(Error::invalid("package", "ambient temperature must be positive kelvin"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let positive = [
                ("footprint_w_mm", layer.footprint_w_mm),
                ("footprint_h_mm", layer.footprint_h_mm),
                ("thickness_mm", layer.thickness_mm),
                ("conductivity_w_per_mk", layer.conductivity_w_per_mk),
                ("volumetric_heat_capacity_j_per_m3k", self.heat_capacity(i)),
            ];
            for (field, v) in positive {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(
                        "package layer",
                        format!("`{}`: {field} must be positive", layer.name),
                    ));
                }
            }
            if i > 0 {
                let inner = &self.layers[i - 1];
                if layer.footprint_w_mm < inner.footprint_w_mm
                    || layer.footprint_h_mm < inner.footprint_h_mm
                {
                    return Err(Error::invalid(
                        "package",
                        format!(
                            "footprint of `{}` is smaller than `{}`",
                            layer.name, inner.name
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn heat_capacity(&self, layer: usize) -> f64 {
        self.layers[layer]
            .volumetric_heat_capacity_j_per_m3k
            .unwrap_or(match layer {
                0 => SILICON_HEAT_CAPACITY,
                1 => TIM_HEAT_CAPACITY,
                _ => COPPER_HEAT_CAPACITY,
            })
    }

    pub fn die(&self) -> &PackageLayer {
        &self.layers[0]
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let pkg: PackageSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        pkg.validate()?;
        Ok(pkg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("package serializes")
    }
}

pub fn parse_package(path: &Path) -> Result<PackageSpec> {
    PackageSpec::parse_str(&crate::io::read_to_string(path)?, path)
}

#[cfg(test)]
pub(crate) fn test_package(die_w: f64, die_h: f64) -> PackageSpec {
    let layer = |name: &str, w: f64, h: f64, t: f64, k: f64| PackageLayer {
        name: name.into(),
        footprint_w_mm: w,
        footprint_h_mm: h,
        thickness_mm: t,
        conductivity_w_per_mk: k,
        volumetric_heat_capacity_j_per_m3k: None,
    };
    PackageSpec {
        convection_resistance_k_per_w: 0.17,
        ambient_k: 313.15,
        layers: vec![
            layer("silicon", die_w, die_h, 0.5, 140.0),
            layer("tim", die_w, die_h, 0.1, 7.0),
            layer("spreader", 3.375, 3.375, 0.2, 400.0),
            layer("sink", 4.5, 4.5, 1.0, 400.0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_by_position() {
        let pkg = test_package(2.261, 2.242);
        pkg.validate().unwrap();
        assert_eq!(pkg.heat_capacity(0), 1.75e6);
        assert_eq!(pkg.heat_capacity(1), 4.0e6);
        assert_eq!(pkg.heat_capacity(3), 3.55e6);
    }

    #[test]
    fn shrinking_footprint_rejected() {
        let mut pkg = test_package(2.261, 2.242);
        pkg.layers[2].footprint_w_mm = 1.0;
        assert!(pkg.validate().is_err());
    }

    #[test]
    fn nonpositive_values_rejected() {
        let mut pkg = test_package(2.0, 2.0);
        pkg.layers[1].thickness_mm = 0.0;
        assert!(pkg.validate().is_err());
        let mut pkg = test_package(2.0, 2.0);
        pkg.layers[3].volumetric_heat_capacity_j_per_m3k = Some(-1.0);
        assert!(pkg.validate().is_err());
    }

    #[test]
    fn round_trip() {
        let mut pkg = test_package(2.0, 2.0);
        pkg.layers[0].volumetric_heat_capacity_j_per_m3k = Some(1.6e6);
        let again = PackageSpec::parse_str(&pkg.to_toml(), Path::new("p")).unwrap();
        assert_eq!(pkg, again);
    }
}
