//! Temperature files: steady `name<TAB>kelvin` lines, ttrace tables and a
//! binary PPM heatmap of the die.

use std::fmt::Write as _;
use std::path::Path;

use super::{SteadyField, TransientField};
use crate::error::{Error, Result};
use crate::floorplan::Floorplan;
use crate::io::{read_to_string, write_atomic};

pub fn write_steady(field: &SteadyField, path: &Path) -> Result<()> {
    let mut s = String::new();
    for (n, t) in field.names.iter().zip(&field.kelvin) {
        let _ = writeln!(s, "{n}\t{t}");
    }
    write_atomic(path, s.as_bytes())
}

/// Reads `name<TAB>kelvin` lines.
pub fn parse_steady(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let (Some(name), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: expected `name kelvin`", i + 1),
            });
        };
        let v: f64 = v.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: bad temperature `{v}`", i + 1),
        })?;
        out.push((name.to_string(), v));
    }
    Ok(out)
}

/// Header of node names, then one row of kelvin per step.
pub fn write_ttrace(field: &TransientField, path: &Path) -> Result<()> {
    let mut s = field.names.join("\t");
    s.push('\n');
    for row in &field.rows {
        for (i, t) in row.iter().enumerate() {
            if i > 0 {
                s.push('\t');
            }
            let _ = write!(s, "{t}");
        }
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, top row first.
    pub rgb: Vec<u8>,
    pub min_k: f64,
    pub max_k: f64,
}

impl Heatmap {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// Blue-to-red ramp through cyan, green and yellow.
fn colour(f: f64) -> [u8; 3] {
    let stops: [[f64; 3]; 5] = [
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
    ];
    let x = f.clamp(0.0, 1.0) * 4.0;
    let i = (x.floor() as usize).min(3);
    let u = x - i as f64;
    let mut c = [0u8; 3];
    for k in 0..3 {
        c[k] = ((stops[i][k] * (1.0 - u) + stops[i + 1][k] * u) * 255.0).round() as u8;
    }
    c
}

/// Renders die-layer temperatures: each pixel takes the temperature of the
/// block or filler node under its centre. `die_kelvin` lists the plan's
/// blocks in order followed by the filler rectangles of `plan.filler()`.
pub fn render_heatmap(plan: &Floorplan, die_kelvin: &[f64], px_per_mm: f64) -> Heatmap {
    let mut rects: Vec<_> = plan.blocks.iter().map(|b| b.rect()).collect();
    rects.extend(plan.filler());
    let width = ((plan.die_w_mm * px_per_mm).round() as usize).max(1);
    let height = ((plan.die_h_mm * px_per_mm).round() as usize).max(1);
    let temps = &die_kelvin[..rects.len().min(die_kelvin.len())];
    let min_k = temps.iter().copied().fold(f64::INFINITY, f64::min);
    let max_k = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max_k - min_k).max(1e-12);
    let mut rgb = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        let y = plan.die_h_mm * (height - row) as f64 / height as f64 - 0.5 * plan.die_h_mm / height as f64;
        for col in 0..width {
            let x = plan.die_w_mm * (col as f64 + 0.5) / width as f64;
            let t = rects
                .iter()
                .zip(temps)
                .find(|(r, _)| x >= r.x && x <= r.right() && y >= r.y && y <= r.top())
                .map(|(_, &t)| t);
            match t {
                Some(t) => rgb.extend(colour((t - min_k) / span)),
                None => rgb.extend([0, 0, 0]),
            }
        }
    }
    Heatmap {
        width,
        height,
        rgb,
        min_k,
        max_k,
    }
}

pub fn write_heatmap(map: &Heatmap, path: &Path) -> Result<()> {
    write_atomic(path, &map.to_ppm())
}
