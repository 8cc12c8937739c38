//! `.flp` text: one `name w h x y` line per block, lengths in metres.
//! Comment lines `# die <w> <h>` and `# provenance <coarse|fine>` carry the
//! outline and origin of the plan.

use std::fmt::Write as _;
use std::path::Path;

use super::{Block, Floorplan, Provenance};
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

fn metres(mm: f64) -> String {
    format!("{:.11e}", mm * 1e-3)
}

pub fn flp_to_string(plan: &Floorplan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# die {} {}", metres(plan.die_w_mm), metres(plan.die_h_mm));
    let provenance = match plan.provenance {
        Provenance::Coarse => "coarse",
        Provenance::Fine => "fine",
    };
    let _ = writeln!(s, "# provenance {provenance}");
    for b in &plan.blocks {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            b.name,
            metres(b.w_mm),
            metres(b.h_mm),
            metres(b.x_mm),
            metres(b.y_mm)
        );
    }
    s
}

pub fn export_flp(plan: &Floorplan, path: &Path) -> Result<()> {
    plan.check_legal()?;
    write_atomic(path, flp_to_string(plan).as_bytes())
}

/// Parses and legality-checks a plan. Without a `# die` line the outline is
/// the bounding box of the blocks anchored at the origin.
pub fn parse_flp_str(text: &str, origin: &Path) -> Result<Floorplan> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let number = |line: usize, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(|x| x * 1e3)
            .ok_or_else(|| err(line, format!("bad number `{v}`")))
    };
    let mut die: Option<(f64, f64)> = None;
    let mut provenance = Provenance::Fine;
    let mut blocks = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let fields: Vec<&str> = comment.split_whitespace().collect();
            match fields.as_slice() {
                ["die", w, h] => die = Some((number(line, w)?, number(line, h)?)),
                ["provenance", "coarse"] => provenance = Provenance::Coarse,
                ["provenance", "fine"] => provenance = Provenance::Fine,
                _ => {}
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let [name, w, h, x, y] = fields.as_slice() else {
            return Err(err(line, format!("expected 5 fields, found {}", fields.len())));
        };
        blocks.push(Block {
            name: name.to_string(),
            w_mm: number(line, w)?,
            h_mm: number(line, h)?,
            x_mm: number(line, x)?,
            y_mm: number(line, y)?,
        });
    }
    if blocks.is_empty() {
        return Err(err(0, "no blocks".into()));
    }
    let (die_w_mm, die_h_mm) = die.unwrap_or_else(|| {
        let w = blocks.iter().map(|b| b.x_mm + b.w_mm).fold(0.0, f64::max);
        let h = blocks.iter().map(|b| b.y_mm + b.h_mm).fold(0.0, f64::max);
        (w, h)
    });
    let plan = Floorplan {
        die_w_mm,
        die_h_mm,
        blocks,
        provenance,
    };
    plan.check_legal().map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(plan)
}

pub fn parse_flp(path: &Path) -> Result<Floorplan> {
    parse_flp_str(&read_to_string(path)?, path)
}
