use super::{Block, Floorplan, Lumping, Provenance, Rect};
use crate::error::{Error, Result};

/// Cuts `rect` into `n` equal-area pieces by recursive guillotine bisection
/// perpendicular to the longer side. The left (or bottom) part takes
/// `n / 2` pieces and comes first in the output.
pub fn split_rect(rect: Rect, n: usize) -> Vec<Rect> {
    let mut out = Vec::with_capacity(n);
    split_into(rect, n, &mut out);
    out
}

fn split_into(r: Rect, n: usize, out: &mut Vec<Rect>) {
    if n <= 1 {
        out.push(r);
        return;
    }
    let first = n / 2;
    let f = first as f64 / n as f64;
    let (a, b) = if r.w >= r.h {
        let w = r.w * f;
        (Rect::new(r.x, r.y, w, r.h), Rect::new(r.x + w, r.y, r.w - w, r.h))
    } else {
        let h = r.h * f;
        (Rect::new(r.x, r.y, r.w, h), Rect::new(r.x, r.y + h, r.w, r.h - h))
    };
    split_into(a, first, out);
    split_into(b, n - first, out);
}

/// Replaces every lumped block by one block per member component.
pub fn refine(coarse: &Floorplan, lumping: &Lumping) -> Result<Floorplan> {
    let mut blocks = Vec::new();
    for b in &coarse.blocks {
        let lump = lumping
            .by_name(&b.name)
            .ok_or_else(|| Error::Floorplan(format!("no lump named `{}`", b.name)))?;
        for (name, r) in lump.members.iter().zip(split_rect(b.rect(), lump.count())) {
            blocks.push(Block::from_rect(name.clone(), r));
        }
    }
    Ok(Floorplan {
        blocks,
        provenance: Provenance::Fine,
        ..coarse.clone()
    })
}
