//! Block-level compact RC network of the die, TIM, heat spreader and sink.

use std::collections::VecDeque;

use super::solver::CsrMatrix;
use crate::config::PackageSpec;
use crate::error::{Error, Result};
use crate::floorplan::{Floorplan, Rect, EPS_MM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackLayer {
    Die,
    Tim,
    Spreader,
    Sink,
}

impl StackLayer {
    const ALL: [StackLayer; 4] = [StackLayer::Die, StackLayer::Tim, StackLayer::Spreader, StackLayer::Sink];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNode {
    pub name: String,
    pub layer: StackLayer,
    /// Footprint in die coordinates (mm); periphery nodes extend past the die.
    pub rect: Rect,
    pub area_m2: f64,
    pub volume_m3: f64,
}

/// Linear RC network with the ambient as grounded reference. Unknowns are
/// temperatures above ambient at every non-ambient node.
#[derive(Debug, Clone)]
pub struct ThermalNetwork {
    pub nodes: Vec<ThermalNode>,
    /// Conductance matrix (W/K) including the ambient links on the diagonal.
    pub g: CsrMatrix,
    /// Heat capacity per node (J/K).
    pub c: Vec<f64>,
    /// Conductance from each node straight to ambient (W/K).
    pub ambient_links: Vec<f64>,
    pub ambient_k: f64,
    /// Die node of each floorplan block, in plan order.
    pub block_nodes: Vec<usize>,
}

fn mm2(a: f64) -> f64 {
    a * 1e-6
}

impl ThermalNetwork {
    /// Assembles a network from explicit branches. Every node must reach a
    /// node with a nonzero ambient link.
    pub fn from_parts(
        nodes: Vec<ThermalNode>,
        branches: &[(usize, usize, f64)],
        ambient_links: Vec<f64>,
        c: Vec<f64>,
        ambient_k: f64,
        block_nodes: Vec<usize>,
    ) -> Result<Self> {
        let n = nodes.len();
        if ambient_links.len() != n || c.len() != n {
            return Err(Error::Thermal("per-node vectors do not match the node count".into()));
        }
        let mut t = Vec::with_capacity(4 * branches.len() + n);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b, g) in branches {
            if a == b || !(g > 0.0 && g.is_finite()) {
                return Err(Error::Thermal(format!("bad branch {a}-{b} with conductance {g}")));
            }
            t.extend([(a, a, g), (b, b, g), (a, b, -g), (b, a, -g)]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for (i, &g) in ambient_links.iter().enumerate() {
            if g > 0.0 {
                t.push((i, i, g));
            }
        }
        // every node must drain to ambient
        let mut reached = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| ambient_links[i] > 0.0).collect();
        queue.iter().for_each(|&i| reached[i] = true);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !reached[w] {
                    reached[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(Error::Thermal(format!(
                "node `{}` has no conduction path to ambient",
                nodes[i].name
            )));
        }
        Ok(ThermalNetwork {
            g: CsrMatrix::from_triplets(n, &t),
            nodes,
            c,
            ambient_links,
            ambient_k,
            block_nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn total_ambient_conductance(&self) -> f64 {
        self.ambient_links.iter().sum()
    }
}

/// Four rectangles around `inner` that fill `outer`: N and S span the full
/// outer width, E and W the inner height. Empty rectangles are dropped.
fn periphery(outer: &Rect, inner: &Rect) -> Vec<(&'static str, Rect)> {
    let candidates = [
        ("N", Rect::new(outer.x, inner.top(), outer.w, outer.top() - inner.top())),
        ("E", Rect::new(inner.right(), inner.y, outer.right() - inner.right(), inner.h)),
        ("S", Rect::new(outer.x, outer.y, outer.w, inner.y - outer.y)),
        ("W", Rect::new(outer.x, inner.y, inner.x - outer.x, inner.h)),
    ];
    candidates
        .into_iter()
        .filter(|(_, r)| r.w > EPS_MM && r.h > EPS_MM)
        .collect()
}

/// Builds the network for a legal fine plan.
///
/// Die and TIM share the plan's footprints (blocks then dead-space filler);
/// the spreader repeats them under the die and adds four periphery nodes;
/// the sink has one node under the die and four periphery nodes. Spreader
/// and sink are centred on the die.
pub fn build_network(plan: &Floorplan, pkg: &PackageSpec) -> Result<ThermalNetwork> {
    plan.check_legal()?;
    pkg.validate()?;
    let die = plan.die();
    let mut footprints: Vec<(String, Rect)> = plan.blocks.iter().map(|b| (b.name.clone(), b.rect())).collect();
    for (i, r) in plan.filler().into_iter().enumerate() {
        footprints.push((format!("filler{i}"), r));
    }
    let centred = |w: f64, h: f64| Rect::new(die.x - 0.5 * (w - die.w), die.y - 0.5 * (h - die.h), w, h);
    let spreader = centred(pkg.layers[2].footprint_w_mm, pkg.layers[2].footprint_h_mm);
    let sink = centred(pkg.layers[3].footprint_w_mm, pkg.layers[3].footprint_h_mm);

    let mut nodes: Vec<ThermalNode> = Vec::new();
    let mut push = |name: String, layer: StackLayer, rect: Rect| {
        let t = pkg.layers[layer.index()].thickness_mm * 1e-3;
        nodes.push(ThermalNode {
            name,
            layer,
            rect,
            area_m2: mm2(rect.area()),
            volume_m3: mm2(rect.area()) * t,
        });
    };
    for (name, r) in &footprints {
        push(name.clone(), StackLayer::Die, *r);
    }
    for (name, r) in &footprints {
        push(format!("tim.{name}"), StackLayer::Tim, *r);
    }
    for (name, r) in &footprints {
        push(format!("spreader.{name}"), StackLayer::Spreader, *r);
    }
    for (side, r) in periphery(&spreader, &die) {
        push(format!("spreader.{side}"), StackLayer::Spreader, r);
    }
    push("sink.center".into(), StackLayer::Sink, die);
    for (side, r) in periphery(&sink, &die) {
        push(format!("sink.{side}"), StackLayer::Sink, r);
    }

    let k = |l: StackLayer| pkg.layers[l.index()].conductivity_w_per_mk;
    let t = |l: StackLayer| pkg.layers[l.index()].thickness_mm * 1e-3;
    let mut branches = Vec::new();
    for layer in StackLayer::ALL {
        let members: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].layer == layer).collect();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                let edge = nodes[a].rect.shared_edge(&nodes[b].rect) * 1e-3;
                if edge > 0.0 {
                    let d = nodes[a].rect.centroid_distance(&nodes[b].rect) * 1e-3;
                    branches.push((a, b, k(layer) * t(layer) * edge / d));
                }
            }
        }
    }
    for pair in StackLayer::ALL.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for a in (0..nodes.len()).filter(|&i| nodes[i].layer == lo) {
            for b in (0..nodes.len()).filter(|&i| nodes[i].layer == hi) {
                let area = mm2(nodes[a].rect.overlap_area(&nodes[b].rect));
                if area > mm2(EPS_MM * EPS_MM) {
                    let r = t(lo) / (2.0 * k(lo) * area) + t(hi) / (2.0 * k(hi) * area);
                    branches.push((a, b, 1.0 / r));
                }
            }
        }
    }
    let die_nodes = footprints.len();
    if die_nodes > 1 {
        for i in 0..die_nodes {
            if !branches.iter().any(|&(a, b, _)| (a == i && b < die_nodes) || (b == i && a < die_nodes)) {
                return Err(Error::Thermal(format!(
                    "die node `{}` shares no edge with any other die node",
                    nodes[i].name
                )));
            }
        }
    }

    let sink_area = mm2(sink.area());
    let g_conv = 1.0 / pkg.convection_resistance_k_per_w;
    let ambient_links = nodes
        .iter()
        .map(|n| match n.layer {
            StackLayer::Sink => g_conv * n.area_m2 / sink_area,
            _ => 0.0,
        })
        .collect();
    let c = nodes
        .iter()
        .map(|n| pkg.heat_capacity(n.layer.index()) * n.volume_m3)
        .collect();
    ThermalNetwork::from_parts(
        nodes,
        &branches,
        ambient_links,
        c,
        pkg.ambient_k,
        (0..plan.blocks.len()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::test_package;
    use crate::floorplan::{Block, Provenance};

    fn plan(blocks: Vec<Block>, w: f64, h: f64) -> Floorplan {
        Floorplan {
            die_w_mm: w,
            die_h_mm: h,
            blocks,
            provenance: Provenance::Fine,
        }
    }

    fn block(name: &str, x: f64, y: f64, w: f64, h: f64) -> Block {
        Block::from_rect(name, Rect::new(x, y, w, h))
    }

    #[test]
    fn die_to_tim_series_conductance() {
        let p = plan(vec![block("a", 0.0, 0.0, 1.0, 1.0)], 1.0, 1.0);
        let net = build_network(&p, &test_package(1.0, 1.0)).unwrap();
        let r: f64 = 0.5e-3 / (2.0 * 140.0 * 1e-6) + 0.1e-3 / (2.0 * 7.0 * 1e-6);
        assert!((r - (1.7857142857 + 7.1428571429)).abs() < 1e-6);
        let tim = net.node_index("tim.a").unwrap();
        assert!((-net.g.get(0, tim) - 1.0 / r).abs() < 1e-12);
    }

    #[test]
    fn lateral_conductance_between_abutting_blocks() {
        let p = plan(
            vec![block("a", 0.0, 0.0, 1.0, 1.0), block("b", 1.0, 0.0, 1.0, 1.0)],
            2.0,
            1.0,
        );
        let net = build_network(&p, &test_package(2.0, 1.0)).unwrap();
        assert!((-net.g.get(0, 1) - 0.07).abs() < 1e-12);
    }

    #[test]
    fn ambient_conductance_totals_convection() {
        let p = plan(vec![block("a", 0.2, 0.3, 1.0, 1.0)], 2.261, 2.242);
        let net = build_network(&p, &test_package(2.261, 2.242)).unwrap();
        assert!((net.total_ambient_conductance() - 1.0 / 0.17).abs() < 1e-12);
        assert!(net.g.is_symmetric(1e-14));
        assert!(net.c.iter().all(|&c| c > 0.0));
        for i in 0..net.len() {
            let off: f64 = net.g.row(i).filter(|&(j, _)| j != i).map(|(_, v)| -v).sum();
            assert!((net.g.get(i, i) - off - net.ambient_links[i]).abs() < 1e-9 * net.g.get(i, i));
        }
        let filler = net.nodes.iter().filter(|n| n.name.starts_with("filler")).count();
        assert!(filler > 0);
    }

    #[test]
    fn die_footprint_is_covered() {
        let p = plan(
            vec![block("a", 0.0, 0.0, 0.5, 0.5), block("b", 1.0, 1.0, 0.5, 0.5)],
            1.5,
            1.5,
        );
        let net = build_network(&p, &test_package(1.5, 1.5)).unwrap();
        let die_area: f64 = net.nodes.iter().filter(|n| n.layer == StackLayer::Die).map(|n| n.area_m2).sum();
        assert!((die_area - 2.25e-6).abs() < 1e-18);
        let spreader_area: f64 = net
            .nodes
            .iter()
            .filter(|n| n.layer == StackLayer::Spreader)
            .map(|n| n.area_m2)
            .sum();
        assert!((spreader_area - 3.375f64.powi(2) * 1e-6).abs() < 1e-15);
    }

    #[test]
    fn isolated_node_rejected() {
        let node = |name: &str| ThermalNode {
            name: name.into(),
            layer: StackLayer::Die,
            rect: Rect::new(0.0, 0.0, 1.0, 1.0),
            area_m2: 1e-6,
            volume_m3: 1e-9,
        };
        let r = ThermalNetwork::from_parts(
            vec![node("a"), node("b")],
            &[],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            300.0,
            vec![0, 1],
        );
        assert!(r.is_err());
    }
}
