//! Layer-to-PE mapping and pixel-granularity scheduling.

mod actions;
mod mapping;
mod schedule;

pub use actions::{count_actions, ActionCounts, ActionEntry, OneTimeAction};
pub use mapping::{assign_layers, Mapping, MappingMode};
pub use schedule::{
    pixel_latency, required_input_pixel, schedule, Interval, LayerTiming, ScheduleTrace,
};
