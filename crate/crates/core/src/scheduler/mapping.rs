use std::fmt;
use std::str::FromStr;

use crate::config::{ArchitectureSpec, LayerKind, PeKind, WorkloadGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MappingMode {
    #[default]
    Default,
    /// Exchange the complete layer sets of two PEs of the same kind.
    Swapped(String, String),
}

impl FromStr for MappingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "default" {
            return Ok(MappingMode::Default);
        }
        let pair = s
            .strip_prefix("swapped:")
            .ok_or_else(|| Error::Mapping(format!("unknown mapping mode `{s}`")))?;
        match pair.split_once(',') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok(MappingMode::Swapped(a.trim().into(), b.trim().into()))
            }
            _ => Err(Error::Mapping(format!(
                "expected `swapped:<pe_a>,<pe_b>`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for MappingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingMode::Default => f.write_str("default"),
            MappingMode::Swapped(a, b) => write!(f, "swapped:{a},{b}"),
        }
    }
}

/// Layer → PE assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub mode: MappingMode,
    pe_of_layer: Vec<usize>,
}

impl Mapping {
    /// Wraps an explicit assignment after checking PE kinds.
    pub fn from_assignment(
        graph: &WorkloadGraph,
        arch: &ArchitectureSpec,
        pe_of_layer: Vec<usize>,
        mode: MappingMode,
    ) -> Result<Self> {
        if pe_of_layer.len() != graph.len() {
            return Err(Error::Mapping(format!(
                "{} assignments for {} layers",
                pe_of_layer.len(),
                graph.len()
            )));
        }
        for (i, &pe) in pe_of_layer.iter().enumerate() {
            let layer = graph.layer(i);
            let spec = arch.pes.get(pe).ok_or_else(|| {
                Error::Mapping(format!("layer `{}` on unknown PE #{pe}", layer.name))
            })?;
            if spec.kind != required_kind(layer.kind) {
                return Err(Error::Mapping(format!(
                    "layer `{}` ({:?}) cannot run on {:?} PE `{}`",
                    layer.name, layer.kind, spec.kind, spec.name
                )));
            }
        }
        Ok(Mapping { mode, pe_of_layer })
    }

    pub fn pe_of(&self, layer: usize) -> usize {
        self.pe_of_layer[layer]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.pe_of_layer
    }

    /// Layers on `pe` in index order.
    pub fn layers_on(&self, pe: usize) -> Vec<usize> {
        (0..self.pe_of_layer.len())
            .filter(|&l| self.pe_of_layer[l] == pe)
            .collect()
    }
}

fn required_kind(kind: LayerKind) -> PeKind {
    if kind.needs_aimcore() {
        PeKind::Aimcore
    } else {
        PeKind::Vfu
    }
}

/// Deterministic layer placement.
///
/// Conv/FC layers go, in index order, to the aimcore with the fewest weights
/// assigned so far (ties to the earliest declared PE). Elementwise and pooling
/// layers are dealt round-robin over the VFUs. A swapped mode then exchanges
/// two PEs' layer sets.
pub fn assign_layers(
    graph: &WorkloadGraph,
    arch: &ArchitectureSpec,
    mode: &MappingMode,
) -> Result<Mapping> {
    let aimcores: Vec<usize> = arch.pes_of_kind(PeKind::Aimcore).collect();
    let vfus: Vec<usize> = arch.pes_of_kind(PeKind::Vfu).collect();

    let total_weights: u64 = graph
        .layers()
        .iter()
        .filter(|l| l.kind.needs_aimcore())
        .map(|l| l.weight_count())
        .sum();
    let capacity: u64 = aimcores.iter().map(|&p| arch.pes[p].weight_capacity()).sum();
    if total_weights > capacity {
        return Err(Error::Mapping(format!(
            "{total_weights} weights exceed aimcore capacity {capacity}"
        )));
    }

    let mut load = vec![0u64; arch.pes.len()];
    let mut next_vfu = 0usize;
    let mut pe_of_layer = Vec::with_capacity(graph.len());
    for layer in graph.layers() {
        let pe = if layer.kind.needs_aimcore() {
            let &pe = aimcores
                .iter()
                .min_by_key(|&&p| load[p])
                .ok_or_else(|| Error::Mapping(format!("no aimcore for `{}`", layer.name)))?;
            load[pe] += layer.weight_count();
            pe
        } else {
            if vfus.is_empty() {
                return Err(Error::Mapping(format!("no vfu for `{}`", layer.name)));
            }
            let pe = vfus[next_vfu % vfus.len()];
            next_vfu += 1;
            pe
        };
        pe_of_layer.push(pe);
    }

    if let MappingMode::Swapped(a, b) = mode {
        let find = |name: &str| {
            arch.pe_index(name)
                .ok_or_else(|| Error::Mapping(format!("unknown PE `{name}`")))
        };
        let (pa, pb) = (find(a)?, find(b)?);
        if arch.pes[pa].kind != arch.pes[pb].kind {
            return Err(Error::Mapping(format!(
                "cannot swap `{a}` and `{b}`: different PE kinds"
            )));
        }
        for pe in &mut pe_of_layer {
            if *pe == pa {
                *pe = pb;
            } else if *pe == pb {
                *pe = pa;
            }
        }
    }

    Mapping::from_assignment(graph, arch, pe_of_layer, mode.clone())
}
