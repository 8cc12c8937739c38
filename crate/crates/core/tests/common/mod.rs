#![allow(dead_code)]

use pixeltherm_core::config::{
    ArchitectureSpec, ComponentSpec, LayerKind, LayerSpec, PeKind, PeSpec, WorkloadGraph,
};
use pixeltherm_core::scheduler::{Mapping, MappingMode};
use pixeltherm_core::ComponentClass;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn pe(index: usize, kind: PeKind, clock_hz: u64, macs_per_cycle: u64) -> (PeSpec, Vec<ComponentSpec>) {
    let class = match kind {
        PeKind::Aimcore => ComponentClass::Aimcore,
        PeKind::Vfu => ComponentClass::Vfu,
    };
    let compute = format!("{class}{index}");
    let comp = |name: String, class, area| ComponentSpec {
        name,
        class,
        area_mm2: area,
        capacity_bytes: None,
    };
    let spec = PeSpec {
        name: format!("pe{index}"),
        kind,
        component: compute.clone(),
        clock_hz,
        macs_per_cycle,
        rows: (kind == PeKind::Aimcore).then_some(64),
        cols: (kind == PeKind::Aimcore).then_some(64),
        actbuf: format!("actbuf{index}"),
        imem: format!("imem{index}"),
    };
    let comps = vec![
        comp(compute, class, 1.0),
        comp(format!("actbuf{index}"), ComponentClass::Actbuf, 0.25),
        comp(format!("imem{index}"), ComponentClass::Imem, 0.05),
    ];
    (spec, comps)
}

/// `pes` lists (kind, clock_hz, macs_per_cycle) in PE order.
pub fn architecture(pes: &[(PeKind, u64, u64)], comm_cycles_per_pixel: u64) -> ArchitectureSpec {
    let mut specs = Vec::new();
    let mut components = Vec::new();
    for (i, &(kind, clock, mpc)) in pes.iter().enumerate() {
        let (p, c) = pe(i, kind, clock, mpc);
        specs.push(p);
        components.extend(c);
    }
    let arch = ArchitectureSpec {
        tile_name: "test".into(),
        base_clock_hz: 1_000_000_000,
        comm_cycles_per_pixel,
        pes: specs,
        components,
    };
    arch.validate().expect("test architecture is valid");
    arch
}

pub fn layer(name: &str, kind: LayerKind, out: (u64, u64), kernel: u64, stride: u64, preds: &[&str]) -> LayerSpec {
    let windowed = matches!(kind, LayerKind::Conv | LayerKind::Pool | LayerKind::Fc);
    let (input_h, input_w) = if windowed {
        ((out.0 - 1) * stride + kernel, (out.1 - 1) * stride + kernel)
    } else {
        out
    };
    LayerSpec {
        name: name.into(),
        kind,
        input_h,
        input_w,
        input_c: 4,
        kernel: if windowed { kernel } else { 1 },
        stride: if windowed { stride } else { 1 },
        output_h: out.0,
        output_w: out.1,
        output_c: 4,
        predecessors: preds.iter().map(|s| s.to_string()).collect(),
        macs_per_output_pixel: 64,
        buffer_reads_per_pixel: 9,
        buffer_writes_per_pixel: 4,
        imem_fetch_instructions: 8,
    }
}

pub struct Instance {
    pub graph: WorkloadGraph,
    pub arch: ArchitectureSpec,
    pub mapping: Mapping,
}

/// Up to five layers with at most 8x8 outputs on 2-4 PEs, randomly mapped.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let mut pes = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        pes.push((PeKind::Aimcore, 1_000_000_000 / [1u64, 2, 4, 5][rng.random_range(0..4)], rng.random_range(16..=128)));
    }
    for _ in 0..rng.random_range(1..=2) {
        pes.push((PeKind::Vfu, 1_000_000_000 / rng.random_range(1..=2u64), rng.random_range(16..=128)));
    }
    let arch = architecture(&pes, rng.random_range(0..=3));

    let n = rng.random_range(1..=5);
    let mut layers: Vec<LayerSpec> = Vec::new();
    for i in 0..n {
        let name = format!("l{i}");
        let earlier: Vec<usize> = (0..i).filter(|_| rng.random_bool(0.6)).collect();
        let mut spec = if !earlier.is_empty() && rng.random_bool(0.25) {
            let anchor = &layers[earlier[0]];
            let out = (anchor.output_h, anchor.output_w);
            let preds: Vec<&str> = earlier
                .iter()
                .map(|&j| &layers[j])
                .filter(|l| (l.output_h, l.output_w) == out)
                .map(|l| l.name.as_str())
                .collect();
            layer(&name, LayerKind::Elementwise, out, 1, 1, &preds)
        } else {
            let kind = [LayerKind::Conv, LayerKind::Pool, LayerKind::Fc][rng.random_range(0..3)];
            let out = (rng.random_range(1..=8), rng.random_range(1..=8));
            let preds: Vec<&str> = earlier.iter().map(|&j| layers[j].name.as_str()).collect();
            layer(&name, kind, out, rng.random_range(1..=3), rng.random_range(1..=2), &preds)
        };
        spec.macs_per_output_pixel = rng.random_range(1..=512);
        layers.push(spec);
    }
    let graph = WorkloadGraph::new("random", layers).unwrap();
    let assignment = graph
        .layers()
        .iter()
        .map(|l| {
            let kind = if l.kind.needs_aimcore() { PeKind::Aimcore } else { PeKind::Vfu };
            let options: Vec<usize> = arch.pes_of_kind(kind).collect();
            options[rng.random_range(0..options.len())]
        })
        .collect();
    let mapping = Mapping::from_assignment(&graph, &arch, assignment, MappingMode::Default).unwrap();
    Instance { graph, arch, mapping }
}
