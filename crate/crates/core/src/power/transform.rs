//! Power-trace synthesis from a schedule, and the transforms applied to
//! traces for upper-bound studies.

use super::trace::{average_over_windows, flatten, ComponentTrace, Granularity, PowerTrace, Segment};
use crate::config::{ArchitectureSpec, EnergyTable};
use crate::error::{Error, Result};
use crate::scheduler::{ActionCounts, ScheduleTrace};

/// Pixel-granularity power: each pixel interval carries
/// `Σ count · energy / interval duration` on every component it touches.
/// One-time instruction fetches become one-cycle segments at the layer's
/// first pixel.
pub fn pixel_power_trace(
    arch: &ArchitectureSpec,
    schedule: &ScheduleTrace,
    actions: &ActionCounts,
    table: &EnergyTable,
) -> PowerTrace {
    let seconds_per_cycle = arch.seconds_per_cycle();
    let mut pieces: Vec<Vec<Segment>> = vec![Vec::new(); arch.components.len()];
    for (l, timing) in schedule.layers().iter().enumerate() {
        let entries = actions.pixel_actions(l);
        for (&s, &f) in timing.start.iter().zip(&timing.finish) {
            let seconds = (f - s) as f64 * seconds_per_cycle;
            for e in entries {
                let energy = e.count as f64 * table.energy(e.action);
                pieces[e.component].push(Segment::new(s, f, energy / seconds));
            }
        }
    }
    for once in &actions.one_time {
        let energy = once.count as f64 * table.energy(once.action);
        pieces[once.component].push(Segment::new(
            once.cycle,
            once.cycle + 1,
            energy / seconds_per_cycle,
        ));
    }
    let components = arch
        .components
        .iter()
        .zip(pieces)
        .map(|(c, pieces)| ComponentTrace {
            name: c.name.clone(),
            segments: flatten(pieces),
        })
        .collect();
    PowerTrace {
        seconds_per_cycle,
        duration: schedule.makespan(),
        granularity: Granularity::Pixel,
        components,
    }
}

/// Averages power within layer spans or over the whole inference.
///
/// Layer spans overlap under pipelining, so the layer-level windows are the
/// elementary intervals between consecutive span endpoints; each window
/// carries the component's mean power inside it.
pub fn aggregate(trace: &PowerTrace, granularity: Granularity, schedule: &ScheduleTrace) -> PowerTrace {
    let bounds = match granularity {
        Granularity::Pixel => return trace.clone(),
        Granularity::Inference => vec![0, trace.duration],
        Granularity::Layer => {
            let mut b: Vec<u64> = schedule
                .layers()
                .iter()
                .flat_map(|t| [t.first_start(), t.last_finish()])
                .chain([0, trace.duration])
                .filter(|&c| c <= trace.duration)
                .collect();
            b.sort_unstable();
            b.dedup();
            b
        }
    };
    PowerTrace {
        granularity,
        components: trace
            .components
            .iter()
            .map(|c| ComponentTrace {
                name: c.name.clone(),
                segments: average_over_windows(&c.segments, &bounds),
            })
            .collect(),
        ..trace.clone()
    }
}

/// Deletes globally idle cycles (every PE idle) and closes the gaps.
///
/// Pixel traces carry no power while every PE is idle, so the total energy
/// is unchanged; the duration shrinks by the idle total.
pub fn remove_bubbles(trace: &PowerTrace, schedule: &ScheduleTrace) -> PowerTrace {
    remove_intervals(trace, &schedule.global_idle_intervals())
}

/// Cuts the given sorted, disjoint cycle intervals out of the timeline and
/// shifts everything after each cut left. Power inside a cut is dropped.
pub fn remove_intervals(trace: &PowerTrace, cuts: &[(u64, u64)]) -> PowerTrace {
    let idle: Vec<(u64, u64)> = cuts
        .iter()
        .filter_map(|&(s, e)| (s < trace.duration && e > s).then_some((s, e.min(trace.duration))))
        .collect();
    let removed: u64 = idle.iter().map(|(s, e)| e - s).sum();
    // busy stretches of the timeline and how far each shifts left
    let mut keep: Vec<(u64, u64, u64)> = Vec::new();
    let mut cursor = 0;
    let mut shift = 0;
    for &(s, e) in &idle {
        if s > cursor {
            keep.push((cursor, s, shift));
        }
        shift += e - s;
        cursor = e;
    }
    if cursor < trace.duration {
        keep.push((cursor, trace.duration, shift));
    }

    let components = trace
        .components
        .iter()
        .map(|c| {
            let mut moved = Vec::with_capacity(c.segments.len());
            for seg in &c.segments {
                let first = keep.partition_point(|k| k.1 <= seg.start);
                for &(ks, ke, shift) in &keep[first..] {
                    if ks >= seg.end {
                        break;
                    }
                    let (s, e) = (seg.start.max(ks), seg.end.min(ke));
                    if e > s {
                        moved.push(Segment::new(s - shift, e - shift, seg.power));
                    }
                }
            }
            ComponentTrace {
                name: c.name.clone(),
                segments: flatten(moved),
            }
        })
        .collect();
    PowerTrace {
        duration: trace.duration - removed,
        components,
        ..trace.clone()
    }
}

/// Folds the tail `[split, D)` onto the head by shifting it to cycle 0 and
/// adding it pointwise. The result lasts `max(split, D - split)` cycles.
pub fn superimpose(trace: &PowerTrace, split: u64) -> Result<PowerTrace> {
    if split == 0 || split >= trace.duration {
        return Err(Error::SplitOutOfRange {
            split,
            duration: trace.duration,
        });
    }
    let components = trace
        .components
        .iter()
        .map(|c| {
            let mut pieces = Vec::with_capacity(c.segments.len() + 1);
            for seg in &c.segments {
                if seg.start < split {
                    pieces.push(Segment::new(seg.start, seg.end.min(split), seg.power));
                }
                if seg.end > split {
                    let s = seg.start.max(split);
                    pieces.push(Segment::new(s - split, seg.end - split, seg.power));
                }
            }
            ComponentTrace {
                name: c.name.clone(),
                segments: flatten(pieces),
            }
        })
        .collect();
    Ok(PowerTrace {
        duration: split.max(trace.duration - split),
        components,
        ..trace.clone()
    })
}

/// Back-to-back concatenation of `n` copies.
pub fn repeat(trace: &PowerTrace, n: u32) -> Result<PowerTrace> {
    if n == 0 {
        return Err(Error::invalid("repeat count", "must be at least 1"));
    }
    let d = trace.duration;
    let components = trace
        .components
        .iter()
        .map(|c| {
            let segments = (0..n as u64)
                .flat_map(|k| {
                    c.segments
                        .iter()
                        .map(move |s| Segment::new(s.start + k * d, s.end + k * d, s.power))
                })
                .collect();
            ComponentTrace {
                name: c.name.clone(),
                segments: flatten(segments),
            }
        })
        .collect();
    Ok(PowerTrace {
        duration: d * n as u64,
        components,
        ..trace.clone()
    })
}
