use std::fmt;

/// Constant power over the half-open cycle interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: u64,
    pub end: u64,
    pub power: f64,
}

impl Segment {
    pub fn new(start: u64, end: u64, power: f64) -> Self {
        debug_assert!(end > start);
        Segment { start, end, power }
    }

    pub fn cycles(&self) -> u64 {
        self.end - self.start
    }

    /// Power × cycles; multiply by seconds-per-cycle for joules.
    pub fn weight(&self) -> f64 {
        self.power * self.cycles() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Pixel,
    Layer,
    Inference,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Pixel => "pixel",
            Granularity::Layer => "layer",
            Granularity::Inference => "inference",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTrace {
    pub name: String,
    /// Sorted, pairwise disjoint.
    pub segments: Vec<Segment>,
}

impl ComponentTrace {
    pub fn energy(&self, seconds_per_cycle: f64) -> f64 {
        self.segments.iter().map(Segment::weight).sum::<f64>() * seconds_per_cycle
    }

    pub fn peak(&self) -> f64 {
        self.segments.iter().map(|s| s.power).fold(0.0, f64::max)
    }

    /// Power at cycle `t` (zero outside every segment).
    pub fn power_at(&self, t: u64) -> f64 {
        let i = self.segments.partition_point(|s| s.end <= t);
        match self.segments.get(i) {
            Some(s) if s.start <= t => s.power,
            _ => 0.0,
        }
    }
}

/// Piecewise-constant power per component on the base-clock timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub seconds_per_cycle: f64,
    /// Length of the timeline in cycles; segments end at or before it.
    pub duration: u64,
    pub granularity: Granularity,
    pub components: Vec<ComponentTrace>,
}

impl PowerTrace {
    pub fn energy(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.energy(self.seconds_per_cycle))
            .sum()
    }

    pub fn component(&self, name: &str) -> Option<&ComponentTrace> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn duration_seconds(&self) -> f64 {
        self.duration as f64 * self.seconds_per_cycle
    }

    /// Tile power summed over all components.
    pub fn total_profile(&self) -> Vec<Segment> {
        flatten(
            self.components
                .iter()
                .flat_map(|c| c.segments.iter().copied())
                .collect(),
        )
    }

    pub fn peak_total_power(&self) -> f64 {
        self.total_profile().iter().map(|s| s.power).fold(0.0, f64::max)
    }

    /// Checks the structural invariants; used by tests and debug assertions.
    pub fn is_well_formed(&self) -> bool {
        self.components.iter().all(|c| {
            c.segments.iter().all(|s| {
                s.end > s.start && s.end <= self.duration && s.power >= 0.0 && s.power.is_finite()
            }) && c.segments.windows(2).all(|w| w[0].end <= w[1].start)
        })
    }
}

/// Sums possibly overlapping constant-power pieces into sorted disjoint
/// segments. Zero-power gaps are omitted and equal-power neighbours merged.
///
/// Each elementary interval re-sums its active pieces rather than carrying a
/// running total, so the result stays exactly nonnegative.
pub fn flatten(mut pieces: Vec<Segment>) -> Vec<Segment> {
    pieces.retain(|p| p.end > p.start && p.power != 0.0);
    if pieces.is_empty() {
        return Vec::new();
    }
    pieces.sort_by_key(|p| p.start);
    let mut bounds: Vec<u64> = pieces.iter().flat_map(|p| [p.start, p.end]).collect();
    bounds.sort_unstable();
    bounds.dedup();

    let mut out: Vec<Segment> = Vec::new();
    let mut active: Vec<Segment> = Vec::new();
    let mut next = 0;
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        active.retain(|p| p.end > a);
        while next < pieces.len() && pieces[next].start <= a {
            active.push(pieces[next]);
            next += 1;
        }
        if active.is_empty() {
            continue;
        }
        let power: f64 = active.iter().map(|p| p.power).sum();
        match out.last_mut() {
            Some(last) if last.end == a && last.power == power => last.end = b,
            _ => out.push(Segment::new(a, b, power)),
        }
    }
    out
}

/// Averages `segments` over consecutive windows delimited by `bounds`
/// (sorted, first = 0, last = trace duration). Each window becomes one
/// segment whose power × length equals the energy inside it.
pub fn average_over_windows(segments: &[Segment], bounds: &[u64]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    let mut i = 0;
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        while i < segments.len() && segments[i].end <= a {
            i += 1;
        }
        let mut weight = 0.0;
        let mut j = i;
        while j < segments.len() && segments[j].start < b {
            let s = &segments[j];
            let overlap = s.end.min(b) - s.start.max(a);
            weight += s.power * overlap as f64;
            j += 1;
        }
        if weight > 0.0 {
            out.push(Segment::new(a, b, weight / (b - a) as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_sums_overlaps() {
        let out = flatten(vec![
            Segment::new(0, 10, 1.0),
            Segment::new(5, 15, 2.0),
            Segment::new(20, 30, 0.5),
        ]);
        assert_eq!(
            out,
            vec![
                Segment::new(0, 5, 1.0),
                Segment::new(5, 10, 3.0),
                Segment::new(10, 15, 2.0),
                Segment::new(20, 30, 0.5),
            ]
        );
    }

    #[test]
    fn flatten_merges_equal_neighbours() {
        let out = flatten(vec![Segment::new(0, 2, 1.0), Segment::new(2, 4, 1.0)]);
        assert_eq!(out, vec![Segment::new(0, 4, 1.0)]);
    }

    #[test]
    fn window_average() {
        let segs = vec![Segment::new(0, 10, 2e-3), Segment::new(20, 30, 4e-3)];
        let out = average_over_windows(&segs, &[0, 30]);
        assert_eq!(out.len(), 1);
        assert!((out[0].power - 2e-3).abs() < 1e-18);
        let out = average_over_windows(&segs, &[0, 15, 30]);
        assert!((out[0].power - 20e-3 / 15.0).abs() < 1e-15);
        assert!((out[1].power - 40e-3 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn power_lookup() {
        let c = ComponentTrace {
            name: "x".into(),
            segments: vec![Segment::new(2, 4, 1.0), Segment::new(6, 7, 3.0)],
        };
        assert_eq!(c.power_at(0), 0.0);
        assert_eq!(c.power_at(3), 1.0);
        assert_eq!(c.power_at(4), 0.0);
        assert_eq!(c.power_at(6), 3.0);
        assert_eq!(c.peak(), 3.0);
    }
}
