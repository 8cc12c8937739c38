//! Fixtures shared by the benchmarks.

use std::path::Path;

use pixeltherm_core::config::ScenarioBundle;
use pixeltherm_core::floorplan::{parse_flp, Floorplan};
use pixeltherm_core::power::{pixel_power_trace, PowerTrace};
use pixeltherm_core::scheduler::{assign_layers, count_actions, schedule, Mapping, ScheduleTrace};

pub struct Fixture {
    pub bundle: ScenarioBundle,
    pub mapping: Mapping,
    pub schedule: ScheduleTrace,
    pub trace: PowerTrace,
    pub plan: Floorplan,
}

/// The shipped ResNet18-like scenario, mapped and scheduled once.
pub fn resnet18() -> Fixture {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/resnet18");
    let bundle = ScenarioBundle::load(&dir.join("scenario.toml")).expect("shipped scenario");
    let mode = bundle.manifest.mapping_mode().expect("mapping mode");
    let mapping = assign_layers(&bundle.workload, &bundle.architecture, &mode).expect("mapping");
    let sched = schedule(&bundle.workload, &mapping, &bundle.architecture).expect("schedule");
    let actions = count_actions(&bundle.workload, &mapping, &bundle.architecture, &sched);
    let trace = pixel_power_trace(&bundle.architecture, &sched, &actions, &bundle.energy);
    let plan = parse_flp(&dir.join("floorplan_variant_1.flp")).expect("shipped floorplan");
    Fixture {
        bundle,
        mapping,
        schedule: sched,
        trace,
        plan,
    }
}
