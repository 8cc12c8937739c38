//! Configuration files: workload, architecture, energy table, package stack
//! and the scenario manifest that ties them together.

mod architecture;
mod energy;
mod package;
mod scenario;
mod workload;

pub use architecture::{
    parse_architecture, ArchitectureSpec, ComponentClass, ComponentSpec, PeKind, PeSpec,
};
pub use energy::{parse_energy_table, Action, EnergyTable};
pub use package::{
    parse_package, PackageLayer, PackageSpec, COPPER_HEAT_CAPACITY, SILICON_HEAT_CAPACITY,
    TIM_HEAT_CAPACITY,
};
pub use scenario::{ScenarioBundle, ScenarioManifest, DEFAULT_DT_CYCLES};
pub use workload::{parse_workload, LayerKind, LayerSpec, WorkloadGraph};

#[cfg(test)]
pub(crate) use architecture::test_architecture;
#[cfg(test)]
#[allow(unused_imports)]
pub(crate) use package::test_package;
#[cfg(test)]
pub(crate) use workload::test_layer;
