//! Axis-aligned rectangles in millimetres.

/// Lengths below this are treated as coincident.
pub const EPS_MM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn top(&self) -> f64 {
        self.y + self.h
    }

    pub fn centroid(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    fn x_overlap(&self, other: &Rect) -> f64 {
        (self.right().min(other.right()) - self.x.max(other.x)).max(0.0)
    }

    fn y_overlap(&self, other: &Rect) -> f64 {
        (self.top().min(other.top()) - self.y.max(other.y)).max(0.0)
    }

    pub fn overlap_area(&self, other: &Rect) -> f64 {
        self.x_overlap(other) * self.y_overlap(other)
    }

    /// Whether the interiors intersect (touching edges do not count).
    pub fn interiors_overlap(&self, other: &Rect) -> bool {
        self.x_overlap(other) > EPS_MM && self.y_overlap(other) > EPS_MM
    }

    /// Length of the boundary shared by two abutting rectangles, zero if they
    /// only meet at a corner or do not touch.
    pub fn shared_edge(&self, other: &Rect) -> f64 {
        let touch_x = (self.right() - other.x).abs() < EPS_MM || (other.right() - self.x).abs() < EPS_MM;
        let touch_y = (self.top() - other.y).abs() < EPS_MM || (other.top() - self.y).abs() < EPS_MM;
        let mut edge = 0.0;
        if touch_x {
            edge += self.y_overlap(other);
        }
        if touch_y {
            edge += self.x_overlap(other);
        }
        if edge > EPS_MM {
            edge
        } else {
            0.0
        }
    }

    pub fn centroid_distance(&self, other: &Rect) -> f64 {
        let (ax, ay) = self.centroid();
        let (bx, by) = other.centroid();
        (ax - bx).hypot(ay - by)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x - EPS_MM
            && other.y >= self.y - EPS_MM
            && other.right() <= self.right() + EPS_MM
            && other.top() <= self.top() + EPS_MM
    }
}

/// Decomposes `outer` minus the union of `holes` into disjoint rectangles.
///
/// The plane is cut into a grid at every hole edge; uncovered grid cells are
/// merged into horizontal runs, and identical runs in consecutive rows are
/// merged vertically.
pub fn uncovered_rects(outer: &Rect, holes: &[Rect]) -> Vec<Rect> {
    let clamp_x = |v: f64| v.clamp(outer.x, outer.right());
    let clamp_y = |v: f64| v.clamp(outer.y, outer.top());
    let mut xs: Vec<f64> = vec![outer.x, outer.right()];
    let mut ys: Vec<f64> = vec![outer.y, outer.top()];
    for h in holes {
        xs.extend([clamp_x(h.x), clamp_x(h.right())]);
        ys.extend([clamp_y(h.y), clamp_y(h.top())]);
    }
    let dedup = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < EPS_MM);
    };
    dedup(&mut xs);
    dedup(&mut ys);

    // horizontal runs per grid row: (x0, x1)
    let mut rows: Vec<Vec<(usize, usize)>> = Vec::with_capacity(ys.len() - 1);
    for j in 0..ys.len() - 1 {
        let cy = 0.5 * (ys[j] + ys[j + 1]);
        let mut runs = Vec::new();
        let mut run_start: Option<usize> = None;
        for i in 0..xs.len() - 1 {
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let covered = holes
                .iter()
                .any(|h| cx > h.x && cx < h.right() && cy > h.y && cy < h.top());
            match (covered, run_start) {
                (false, None) => run_start = Some(i),
                (true, Some(s)) => {
                    runs.push((s, i));
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            runs.push((s, xs.len() - 1));
        }
        rows.push(runs);
    }

    let mut out = Vec::new();
    // open runs: (x0, x1, y_start_index)
    let mut open: Vec<(usize, usize, usize)> = Vec::new();
    for (j, runs) in rows.iter().enumerate() {
        let mut next_open = Vec::new();
        for &(a, b, j0) in &open {
            if runs.contains(&(a, b)) {
                next_open.push((a, b, j0));
            } else {
                out.push(Rect::new(xs[a], ys[j0], xs[b] - xs[a], ys[j] - ys[j0]));
            }
        }
        for &(a, b) in runs {
            if !next_open.iter().any(|&(oa, ob, _)| (oa, ob) == (a, b)) {
                next_open.push((a, b, j));
            }
        }
        open = next_open;
    }
    let last = ys.len() - 1;
    for (a, b, j0) in open {
        out.push(Rect::new(xs[a], ys[j0], xs[b] - xs[a], ys[last] - ys[j0]));
    }
    out.retain(|r| r.w > EPS_MM && r.h > EPS_MM);
    out
}
