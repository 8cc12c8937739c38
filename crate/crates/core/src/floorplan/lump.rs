use super::FloorplanPolicy;
use crate::config::{ArchitectureSpec, ComponentClass};

/// Identical components merged into one soft block.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpSpec {
    pub class: ComponentClass,
    /// Component names in declaration order; refinement names sub-blocks
    /// after these.
    pub members: Vec<String>,
    pub area_mm2: f64,
    pub min_ar: f64,
    pub max_ar: f64,
}

impl LumpSpec {
    pub fn name(&self) -> &'static str {
        self.class.as_str()
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adjacency {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lumping {
    pub lumps: Vec<LumpSpec>,
    pub adjacency: Vec<Adjacency>,
}

impl Lumping {
    pub fn total_area(&self) -> f64 {
        self.lumps.iter().map(|l| l.area_mm2).sum()
    }

    pub fn by_name(&self, name: &str) -> Option<&LumpSpec> {
        self.lumps.iter().find(|l| l.name() == name)
    }
}

/// One lump per component class present in `arch`. Each PE class is adjacent
/// to the ActBuf and IMem classes, weighted by the policy weight times the
/// number of PEs of that class.
pub fn lump(arch: &ArchitectureSpec, policy: &FloorplanPolicy) -> Lumping {
    let mut lumps: Vec<LumpSpec> = Vec::new();
    for class in ComponentClass::ALL {
        let members: Vec<&_> = arch.components.iter().filter(|c| c.class == class).collect();
        if members.is_empty() {
            continue;
        }
        let bounds = policy.aspect_for(class);
        lumps.push(LumpSpec {
            class,
            members: members.iter().map(|c| c.name.clone()).collect(),
            area_mm2: members.iter().map(|c| c.area_mm2).sum(),
            min_ar: bounds.min,
            max_ar: bounds.max,
        });
    }
    let index = |class: ComponentClass| lumps.iter().position(|l| l.class == class);
    let mut adjacency = Vec::new();
    for pe_class in [ComponentClass::Aimcore, ComponentClass::Vfu] {
        let Some(pe_lump) = index(pe_class) else { continue };
        let pes = arch
            .pes
            .iter()
            .filter(|p| ComponentClass::from(p.kind) == pe_class)
            .count() as f64;
        for (mem, w) in [
            (ComponentClass::Actbuf, policy.pe_actbuf_weight),
            (ComponentClass::Imem, policy.pe_imem_weight),
        ] {
            if let Some(m) = index(mem) {
                if w > 0.0 && pes > 0.0 {
                    adjacency.push(Adjacency {
                        a: pe_lump,
                        b: m,
                        weight: w * pes,
                    });
                }
            }
        }
    }
    Lumping { lumps, adjacency }
}
