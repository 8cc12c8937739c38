//! Pixel-granularity power and thermal simulation of tile-based CNN
//! accelerators.
//!
//! The pipeline runs workload ingest, layer mapping and pixel scheduling,
//! power-trace synthesis, floorplanning and a compact RC thermal model.

pub mod config;
pub mod error;
pub mod floorplan;
pub mod io;
pub mod power;
pub mod scheduler;
pub mod thermal;

pub use config::{
    ArchitectureSpec, ComponentClass, EnergyTable, PackageSpec, ScenarioBundle, ScenarioManifest,
    WorkloadGraph,
};
pub use error::{Error, Result};
pub use floorplan::{Floorplan, FloorplanPolicy};
pub use power::{Granularity, PowerSamples, PowerTrace};
pub use scheduler::{Mapping, MappingMode, ScheduleTrace};
pub use thermal::{SteadyField, ThermalNetwork, TransientField};
