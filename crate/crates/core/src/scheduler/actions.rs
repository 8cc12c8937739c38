//! Runtime action counts per output pixel.

use super::{Mapping, ScheduleTrace};
use crate::config::{Action, ArchitectureSpec, PeKind, WorkloadGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionEntry {
    pub component: usize,
    pub action: Action,
    pub count: u64,
}

/// An action that happens once per (layer, PE), at `cycle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneTimeAction {
    pub layer: usize,
    pub component: usize,
    pub action: Action,
    pub count: u64,
    pub cycle: u64,
}

/// Action counts. Every pixel of a layer issues the same actions, so they are
/// stored once per layer; the pixel intervals come from the schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCounts {
    per_pixel: Vec<Vec<ActionEntry>>,
    pub one_time: Vec<OneTimeAction>,
}

impl ActionCounts {
    /// Actions issued by each pixel of `layer`.
    pub fn pixel_actions(&self, layer: usize) -> &[ActionEntry] {
        &self.per_pixel[layer]
    }

    /// Total count of `action` on `component` over the whole schedule.
    pub fn total(&self, trace: &ScheduleTrace, component: usize, action: Action) -> u64 {
        let per_pixel: u64 = self
            .per_pixel
            .iter()
            .enumerate()
            .flat_map(|(l, entries)| {
                let pixels = trace.layer(l).start.len() as u64;
                entries
                    .iter()
                    .filter(move |e| e.component == component && e.action == action)
                    .map(move |e| e.count * pixels)
            })
            .sum();
        let once: u64 = self
            .one_time
            .iter()
            .filter(|o| o.component == component && o.action == action)
            .map(|o| o.count)
            .sum();
        per_pixel + once
    }
}

/// Derives action counts from a schedule.
///
/// Each pixel issues its MACs (or SIMD ops) on the PE's compute component,
/// one array activation on aimcores, its buffer reads on the PE's own ActBuf
/// and its writes on the ActBuf of every distinct consumer PE (its own ActBuf
/// when the layer has no consumers). Instructions are fetched from the IMem
/// once when the layer starts.
pub fn count_actions(
    graph: &WorkloadGraph,
    mapping: &Mapping,
    arch: &ArchitectureSpec,
    trace: &ScheduleTrace,
) -> ActionCounts {
    let comp = |name: &str| arch.component_index(name).expect("validated architecture");
    let mut per_pixel = Vec::with_capacity(graph.len());
    let mut one_time = Vec::new();
    for (l, layer) in graph.layers().iter().enumerate() {
        let pe = &arch.pes[mapping.pe_of(l)];
        let compute = comp(&pe.component);
        let mut entries = Vec::new();
        match pe.kind {
            PeKind::Aimcore => {
                entries.push(ActionEntry {
                    component: compute,
                    action: Action::Mac,
                    count: layer.macs_per_output_pixel,
                });
                entries.push(ActionEntry {
                    component: compute,
                    action: Action::ArrayActivate,
                    count: 1,
                });
            }
            PeKind::Vfu => entries.push(ActionEntry {
                component: compute,
                action: Action::SimdOp,
                count: layer.macs_per_output_pixel,
            }),
        }
        entries.push(ActionEntry {
            component: comp(&pe.actbuf),
            action: Action::Read,
            count: layer.buffer_reads_per_pixel,
        });
        let mut consumers: Vec<usize> = graph
            .successors(l)
            .iter()
            .map(|&s| comp(&arch.pes[mapping.pe_of(s)].actbuf))
            .collect();
        if consumers.is_empty() {
            consumers.push(comp(&pe.actbuf));
        }
        consumers.sort_unstable();
        consumers.dedup();
        for component in consumers {
            entries.push(ActionEntry {
                component,
                action: Action::Write,
                count: layer.buffer_writes_per_pixel,
            });
        }
        per_pixel.push(entries);
        if layer.imem_fetch_instructions > 0 {
            one_time.push(OneTimeAction {
                layer: l,
                component: comp(&pe.imem),
                action: Action::Fetch,
                count: layer.imem_fetch_instructions,
                cycle: trace.layer(l).first_start(),
            });
        }
    }
    ActionCounts {
        per_pixel,
        one_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{test_architecture, test_layer, LayerKind, LayerSpec};
    use crate::scheduler::{schedule, MappingMode};

    fn two_layer() -> (WorkloadGraph, ArchitectureSpec, Mapping) {
        let arch = test_architecture(2, 0);
        let mut l0 = test_layer("l0", LayerKind::Conv, (4, 4));
        l0.macs_per_output_pixel = 1024;
        l0.buffer_reads_per_pixel = 9;
        l0.buffer_writes_per_pixel = 1;
        l0.imem_fetch_instructions = 40;
        let l1 = LayerSpec {
            kernel: 3,
            input_h: 4,
            input_w: 4,
            output_h: 2,
            output_w: 2,
            predecessors: vec!["l0".into()],
            ..test_layer("l1", LayerKind::Conv, (2, 2))
        };
        let g = WorkloadGraph::new("g", vec![l0, l1]).unwrap();
        let m = Mapping::from_assignment(&g, &arch, vec![0, 1], MappingMode::Default).unwrap();
        (g, arch, m)
    }

    #[test]
    fn conv_pixel_actions() {
        let (g, arch, m) = two_layer();
        let t = schedule(&g, &m, &arch).unwrap();
        let counts = count_actions(&g, &m, &arch, &t);
        let c = |n: &str| arch.component_index(n).unwrap();
        let got = counts.pixel_actions(0);
        let expect = [
            (c("aimcore0"), Action::Mac, 1024),
            (c("aimcore0"), Action::ArrayActivate, 1),
            (c("actbuf0"), Action::Read, 9),
            (c("actbuf1"), Action::Write, 1),
        ];
        assert_eq!(got.len(), expect.len());
        for (e, (component, action, count)) in got.iter().zip(expect) {
            assert_eq!((e.component, e.action, e.count), (component, action, count));
        }
        // the sink layer writes into its own buffer
        assert!(counts
            .pixel_actions(1)
            .iter()
            .any(|e| e.action == Action::Write && e.component == c("actbuf1")));
    }

    #[test]
    fn imem_fetch_once_per_layer() {
        let (g, arch, m) = two_layer();
        let t = schedule(&g, &m, &arch).unwrap();
        let counts = count_actions(&g, &m, &arch, &t);
        assert_eq!(counts.one_time.len(), 1);
        assert_eq!(counts.one_time[0].cycle, 0);
        assert_eq!(counts.one_time[0].count, 40);
        let imem1 = arch.component_index("imem1").unwrap();
        assert_eq!(counts.total(&t, imem1, Action::Fetch), 0);
    }

    #[test]
    fn total_macs_sum_over_pixels() {
        let (g, arch, m) = two_layer();
        let t = schedule(&g, &m, &arch).unwrap();
        let counts = count_actions(&g, &m, &arch, &t);
        let aim0 = arch.component_index("aimcore0").unwrap();
        let mut oracle = 0;
        for _y in 0..4 {
            for _x in 0..4 {
                oracle += 1024;
            }
        }
        assert_eq!(counts.total(&t, aim0, Action::Mac), oracle);
    }
}
