//! Tile floorplanning: identical components are lumped, lumps are placed by
//! simulated annealing over slicing trees, and the lumps are then cut back
//! into one block per component.

mod anneal;
mod flp;
mod geometry;
mod lump;
mod refine;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use anneal::{anneal, AnnealOutcome, AnnealSchedule, Evaluation, PolishExpr, Token};
pub use flp::{export_flp, flp_to_string, parse_flp, parse_flp_str};
pub use geometry::{uncovered_rects, Rect, EPS_MM};
pub use lump::{lump, Adjacency, LumpSpec, Lumping};
pub use refine::{refine, split_rect};

use crate::config::ComponentClass;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub w_mm: f64,
    pub h_mm: f64,
    pub x_mm: f64,
    pub y_mm: f64,
}

impl Block {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x_mm, self.y_mm, self.w_mm, self.h_mm)
    }

    pub fn from_rect(name: impl Into<String>, r: Rect) -> Self {
        Block {
            name: name.into(),
            w_mm: r.w,
            h_mm: r.h,
            x_mm: r.x,
            y_mm: r.y,
        }
    }

    pub fn area(&self) -> f64 {
        self.w_mm * self.h_mm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    pub die_w_mm: f64,
    pub die_h_mm: f64,
    pub blocks: Vec<Block>,
    pub provenance: Provenance,
}

impl Floorplan {
    pub fn die(&self) -> Rect {
        Rect::new(0.0, 0.0, self.die_w_mm, self.die_h_mm)
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn block_area(&self) -> f64 {
        self.blocks.iter().map(Block::area).sum()
    }

    /// Positive sizes, unique names, every block inside the die, and pairwise
    /// disjoint interiors.
    pub fn check_legal(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Floorplan("empty floorplan".into()));
        }
        if !(self.die_w_mm > 0.0 && self.die_h_mm > 0.0) {
            return Err(Error::Floorplan("die dimensions must be positive".into()));
        }
        let die = self.die();
        for (i, b) in self.blocks.iter().enumerate() {
            if !(b.w_mm > 0.0 && b.h_mm > 0.0) {
                return Err(Error::Floorplan(format!("block `{}` has no area", b.name)));
            }
            if !die.contains(&b.rect()) {
                return Err(Error::Floorplan(format!("block `{}` leaves the die", b.name)));
            }
            for other in &self.blocks[i + 1..] {
                if other.name == b.name {
                    return Err(Error::Floorplan(format!("duplicate block `{}`", b.name)));
                }
                if b.rect().interiors_overlap(&other.rect()) {
                    return Err(Error::Floorplan(format!(
                        "blocks `{}` and `{}` overlap",
                        b.name, other.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dead-space rectangles (die minus blocks).
    pub fn filler(&self) -> Vec<Rect> {
        let holes: Vec<Rect> = self.blocks.iter().map(Block::rect).collect();
        uncovered_rects(&self.die(), &holes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AspectBounds {
    pub min: f64,
    pub max: f64,
}

/// Floorplanning knobs exposed through the scenario manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloorplanPolicy {
    pub seed: u64,
    /// Default aspect-ratio (w/h) bounds for every lump.
    pub aspect: AspectBounds,
    /// Per-class overrides, keyed by class name.
    pub class_aspect: BTreeMap<ComponentClass, AspectBounds>,
    pub pe_actbuf_weight: f64,
    pub pe_imem_weight: f64,
    pub area_weight: f64,
    pub adjacency_weight: f64,
    pub schedule: AnnealSchedule,
}

impl Default for FloorplanPolicy {
    fn default() -> Self {
        FloorplanPolicy {
            seed: 1,
            aspect: AspectBounds { min: 0.2, max: 5.0 },
            class_aspect: BTreeMap::new(),
            pe_actbuf_weight: 2.0,
            pe_imem_weight: 1.0,
            area_weight: 1.0,
            adjacency_weight: 1.0,
            schedule: AnnealSchedule::default(),
        }
    }
}

impl FloorplanPolicy {
    pub fn aspect_for(&self, class: ComponentClass) -> AspectBounds {
        self.class_aspect.get(&class).copied().unwrap_or(self.aspect)
    }

    pub fn validate(&self) -> Result<()> {
        for b in std::iter::once(&self.aspect).chain(self.class_aspect.values()) {
            if !(b.min > 0.0 && b.min <= b.max && b.max.is_finite()) {
                return Err(Error::invalid(
                    "floorplan policy",
                    format!("aspect bounds need 0 < min <= max, got [{}, {}]", b.min, b.max),
                ));
            }
        }
        for (name, w) in [
            ("pe_actbuf_weight", self.pe_actbuf_weight),
            ("pe_imem_weight", self.pe_imem_weight),
            ("area_weight", self.area_weight),
            ("adjacency_weight", self.adjacency_weight),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("floorplan policy", format!("{name} must be >= 0")));
            }
        }
        self.schedule.validate()
    }
}
