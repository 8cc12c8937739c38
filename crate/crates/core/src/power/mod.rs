//! Power traces at pixel, layer and inference granularity.

mod ptrace;
mod trace;
mod transform;

pub use ptrace::{
    export_ptrace, meta_path, read_ptrace, resample, write_samples, PowerSamples, PtraceMeta,
};
pub use trace::{average_over_windows, flatten, ComponentTrace, Granularity, PowerTrace, Segment};
pub use transform::{
    aggregate, pixel_power_trace, remove_bubbles, remove_intervals, repeat, superimpose,
};
