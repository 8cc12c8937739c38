//! Pixel-granularity discrete-event schedule.
//!
//! Every layer runs on one PE and emits output pixels in raster order. A pixel
//! may start once the predecessor pixels it depends on have finished; windowed
//! layers wait for whole predecessor rows, elementwise layers for the pixel at
//! the same raster index. A PE that goes idle picks the ready pixel of its
//! lowest-indexed layer. Gaps this leaves on a PE are pipeline bubbles.

use std::fmt::Write as _;
use std::path::Path;

use super::Mapping;
use crate::config::{ArchitectureSpec, LayerSpec, PeSpec, WorkloadGraph};
use crate::error::{Error, Result};

/// Half-open cycle interval `[start, end)`.
pub type Interval = (u64, u64);

/// Base-clock cycles one output pixel of `layer` occupies on `pe`.
pub fn pixel_latency(layer: &LayerSpec, pe: &PeSpec, arch: &ArchitectureSpec) -> u64 {
    let ops = layer.macs_per_output_pixel.div_ceil(pe.macs_per_cycle);
    (ops * arch.clock_ratio(pe) + arch.comm_cycles_per_pixel).max(1)
}

/// Highest raster index of `pred` that pixel `pixel` of `layer` depends on.
pub fn required_input_pixel(layer: &LayerSpec, pixel: u64, pred: &LayerSpec) -> u64 {
    if layer.kind.is_windowed() {
        let y = pixel / layer.output_w;
        let last_row = (y * layer.stride + layer.kernel - 1).min(pred.output_h - 1);
        (last_row + 1) * pred.output_w - 1
    } else {
        pixel.min(pred.pixel_count() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTiming {
    pub pe: usize,
    pub start: Vec<u64>,
    pub finish: Vec<u64>,
}

impl LayerTiming {
    pub fn first_start(&self) -> u64 {
        self.start[0]
    }

    pub fn last_finish(&self) -> u64 {
        *self.finish.last().unwrap()
    }

    pub fn span(&self) -> Interval {
        (self.first_start(), self.last_finish())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTrace {
    layers: Vec<LayerTiming>,
    pe_busy: Vec<Vec<Interval>>,
}

impl ScheduleTrace {
    fn from_layers(layers: Vec<LayerTiming>, pe_count: usize) -> Self {
        let mut per_pe: Vec<Vec<Interval>> = vec![Vec::new(); pe_count];
        for timing in &layers {
            for (&s, &f) in timing.start.iter().zip(&timing.finish) {
                per_pe[timing.pe].push((s, f));
            }
        }
        let pe_busy = per_pe
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                merge_touching(v)
            })
            .collect();
        ScheduleTrace { layers, pe_busy }
    }

    pub fn layers(&self) -> &[LayerTiming] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &LayerTiming {
        &self.layers[l]
    }

    pub fn pixel(&self, layer: usize, pixel: usize) -> Interval {
        let t = &self.layers[layer];
        (t.start[pixel], t.finish[pixel])
    }

    pub fn pe_count(&self) -> usize {
        self.pe_busy.len()
    }

    /// Maximal busy runs of one PE, sorted.
    pub fn busy_intervals(&self, pe: usize) -> &[Interval] {
        &self.pe_busy[pe]
    }

    /// Cycle at which the last pixel finishes.
    pub fn makespan(&self) -> u64 {
        self.layers.iter().map(LayerTiming::last_finish).max().unwrap_or(0)
    }

    /// Maximal idle gaps on `pe` from the start of the schedule (cycle 0) to
    /// the PE's last finish, including the wait before its first pixel.
    pub fn bubble_intervals(&self, pe: usize) -> Vec<Interval> {
        let busy = &self.pe_busy[pe];
        let mut gaps = Vec::new();
        let mut cursor = 0;
        for &(s, e) in busy {
            if s > cursor {
                gaps.push((cursor, s));
            }
            cursor = e;
        }
        gaps
    }

    /// Maximal intervals in `[0, makespan)` during which no PE is busy.
    pub fn global_idle_intervals(&self) -> Vec<Interval> {
        let mut all: Vec<Interval> = self.pe_busy.iter().flatten().copied().collect();
        all.sort_unstable();
        let busy = merge_touching(all);
        let mut idle = Vec::new();
        let mut cursor = 0;
        for (s, e) in busy {
            if s > cursor {
                idle.push((cursor, s));
            }
            cursor = cursor.max(e);
        }
        idle
    }

    pub fn global_idle_cycles(&self) -> u64 {
        self.global_idle_intervals().iter().map(|(s, e)| e - s).sum()
    }

    /// Tab-separated dump: one `layer pixel pe start finish` record per pixel.
    pub fn to_tsv(&self, graph: &WorkloadGraph, arch: &ArchitectureSpec) -> String {
        let mut out = String::from("layer\tpixel\tpe\tstart\tfinish\n");
        for (l, timing) in self.layers.iter().enumerate() {
            let layer = &graph.layer(l).name;
            let pe = &arch.pes[timing.pe].name;
            for (p, (s, f)) in timing.start.iter().zip(&timing.finish).enumerate() {
                writeln!(out, "{layer}\t{p}\t{pe}\t{s}\t{f}").unwrap();
            }
        }
        out
    }

    /// Rebuilds a trace from [`ScheduleTrace::to_tsv`] output.
    pub fn from_tsv(
        text: &str,
        origin: &Path,
        graph: &WorkloadGraph,
        arch: &ArchitectureSpec,
    ) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut layers: Vec<Option<LayerTiming>> = vec![None; graph.len()];
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(parse_err(n + 1, format!("expected 5 fields, got {}", fields.len())));
            }
            let l = graph
                .index_of(fields[0])
                .ok_or_else(|| parse_err(n + 1, format!("unknown layer `{}`", fields[0])))?;
            let pe = arch
                .pe_index(fields[2])
                .ok_or_else(|| parse_err(n + 1, format!("unknown PE `{}`", fields[2])))?;
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|e| parse_err(n + 1, format!("`{s}`: {e}")))
            };
            let (pixel, start, finish) = (num(fields[1])?, num(fields[3])?, num(fields[4])?);
            let timing = layers[l].get_or_insert_with(|| LayerTiming {
                pe,
                start: Vec::new(),
                finish: Vec::new(),
            });
            if timing.pe != pe || pixel != timing.start.len() as u64 || finish <= start {
                return Err(parse_err(n + 1, "records out of raster order or inconsistent".into()));
            }
            timing.start.push(start);
            timing.finish.push(finish);
        }
        let mut out = Vec::with_capacity(layers.len());
        for (l, timing) in layers.into_iter().enumerate() {
            let timing = timing.ok_or_else(|| {
                Error::invalid("schedule", format!("no records for `{}`", graph.layer(l).name))
            })?;
            if timing.start.len() as u64 != graph.layer(l).pixel_count() {
                return Err(Error::invalid(
                    "schedule",
                    format!("`{}` has a partial record set", graph.layer(l).name),
                ));
            }
            out.push(timing);
        }
        Ok(Self::from_layers(out, arch.pes.len()))
    }
}

fn merge_touching(sorted: Vec<Interval>) -> Vec<Interval> {
    let mut merged: Vec<Interval> = Vec::with_capacity(sorted.len());
    for (s, e) in sorted {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

/// Event-driven schedule. Deterministic for fixed inputs.
pub fn schedule(
    graph: &WorkloadGraph,
    mapping: &Mapping,
    arch: &ArchitectureSpec,
) -> Result<ScheduleTrace> {
    let n = graph.len();
    let pe_count = arch.pes.len();
    let latency: Vec<u64> = (0..n)
        .map(|l| pixel_latency(graph.layer(l), &arch.pes[mapping.pe_of(l)], arch))
        .collect();
    let pixels: Vec<u64> = graph.layers().iter().map(LayerSpec::pixel_count).collect();
    let layers_on: Vec<Vec<usize>> = (0..pe_count).map(|pe| mapping.layers_on(pe)).collect();

    let mut start: Vec<Vec<u64>> = pixels.iter().map(|&c| Vec::with_capacity(c as usize)).collect();
    let mut finish: Vec<Vec<u64>> = start.clone();
    let mut free_at = vec![0u64; pe_count];
    let mut remaining: u64 = pixels.iter().sum();
    let mut now = 0u64;

    let ready = |l: usize, finish: &[Vec<u64>], now: u64| {
        let p = finish[l].len() as u64;
        graph.predecessors(l).iter().all(|&q| {
            let need = required_input_pixel(graph.layer(l), p, graph.layer(q)) as usize;
            finish[q].get(need).is_some_and(|&f| f <= now)
        })
    };

    while remaining > 0 {
        for pe in 0..pe_count {
            if free_at[pe] > now {
                continue;
            }
            let pick = layers_on[pe]
                .iter()
                .copied()
                .find(|&l| (finish[l].len() as u64) < pixels[l] && ready(l, &finish, now));
            if let Some(l) = pick {
                let done = now + latency[l];
                start[l].push(now);
                finish[l].push(done);
                free_at[pe] = done;
                remaining -= 1;
            }
        }
        if remaining == 0 {
            break;
        }
        now = match free_at.iter().copied().filter(|&t| t > now).min() {
            Some(t) => t,
            None => return Err(deadlock(graph, mapping, &finish, &pixels, now)),
        };
    }

    let layers = (0..n)
        .zip(start.into_iter().zip(finish))
        .map(|(l, (start, finish))| LayerTiming {
            pe: mapping.pe_of(l),
            start,
            finish,
        })
        .collect();
    Ok(ScheduleTrace::from_layers(layers, pe_count))
}

fn deadlock(
    graph: &WorkloadGraph,
    mapping: &Mapping,
    finish: &[Vec<u64>],
    pixels: &[u64],
    now: u64,
) -> Error {
    for l in 0..graph.len() {
        let p = finish[l].len() as u64;
        if p == pixels[l] {
            continue;
        }
        for &q in graph.predecessors(l) {
            let need = required_input_pixel(graph.layer(l), p, graph.layer(q)) as usize;
            if finish[q].get(need).is_none_or(|&f| f > now) {
                return Error::Deadlock {
                    blocked: graph.layer(l).name.clone(),
                    waiting_on: graph.layer(q).name.clone(),
                };
            }
        }
    }
    let _ = mapping;
    Error::Deadlock {
        blocked: "?".into(),
        waiting_on: "?".into(),
    }
}
