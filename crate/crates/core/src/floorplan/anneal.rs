//! Simulated annealing over normalized Polish expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Block, Floorplan, FloorplanPolicy, Lumping, Provenance, Rect, EPS_MM};
use crate::error::{Error, Result};

const SHAPES_PER_LUMP: usize = 21;
const MAX_SHAPES: usize = 64;
const ILLEGAL_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSchedule {
    /// Target probability of accepting an average uphill move at the start.
    pub initial_acceptance: f64,
    pub cooling: f64,
    pub moves_per_temperature: u32,
    /// Relative improvement of the best cost below which a temperature
    /// counts as stalled.
    pub min_improvement: f64,
    pub stall_temperatures: u32,
    pub max_temperatures: u32,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_acceptance: 0.9,
            cooling: 0.98,
            moves_per_temperature: 500,
            min_improvement: 1e-3,
            stall_temperatures: 5,
            max_temperatures: 2000,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_acceptance > 0.0
            && self.initial_acceptance < 1.0
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.moves_per_temperature > 0
            && self.min_improvement >= 0.0
            && self.stall_temperatures > 0
            && self.max_temperatures > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("anneal schedule", format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Operand(usize),
    /// Children stacked bottom to top.
    H,
    /// Children placed left to right.
    V,
}

impl Token {
    fn is_operator(self) -> bool {
        !matches!(self, Token::Operand(_))
    }
}

/// Postfix slicing-tree expression with no two equal adjacent operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolishExpr(pub Vec<Token>);

#[derive(Debug, Clone, Copy)]
struct Shape {
    w: f64,
    h: f64,
    left: usize,
    right: usize,
}

enum NodeKind {
    Leaf(usize),
    Cut(Token, usize, usize),
}

struct Node {
    kind: NodeKind,
    shapes: Vec<Shape>,
}

/// A Polish expression realised on a die.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    pub legal: bool,
    pub area_term: f64,
    pub adjacency_term: f64,
    /// One rectangle per lump, indexed like `Lumping::lumps`.
    pub rects: Vec<Rect>,
}

impl PolishExpr {
    /// `0 1 V 2 V ... n-1 V`.
    pub fn initial(n: usize) -> Self {
        let mut t = vec![Token::Operand(0)];
        for i in 1..n {
            t.push(Token::Operand(i));
            t.push(Token::V);
        }
        PolishExpr(t)
    }

    pub fn is_normalized(&self) -> bool {
        let mut operands = 0usize;
        let mut operators = 0usize;
        for (i, &t) in self.0.iter().enumerate() {
            if t.is_operator() {
                operators += 1;
                if operators >= operands {
                    return false;
                }
                if i > 0 && self.0[i - 1] == t {
                    return false;
                }
            } else {
                operands += 1;
            }
        }
        operands == operators + 1
    }

    fn build(&self, lumping: &Lumping) -> Vec<Node> {
        let mut nodes: Vec<Node> = Vec::with_capacity(self.0.len());
        let mut stack: Vec<usize> = Vec::new();
        for &t in &self.0 {
            match t {
                Token::Operand(i) => {
                    nodes.push(Node {
                        kind: NodeKind::Leaf(i),
                        shapes: lump_shapes(
                            lumping.lumps[i].area_mm2,
                            lumping.lumps[i].min_ar,
                            lumping.lumps[i].max_ar,
                        ),
                    });
                }
                op => {
                    let r = stack.pop().expect("normalized expression");
                    let l = stack.pop().expect("normalized expression");
                    let shapes = combine(&nodes[l].shapes, &nodes[r].shapes, op);
                    nodes.push(Node {
                        kind: NodeKind::Cut(op, l, r),
                        shapes,
                    });
                }
            }
            stack.push(nodes.len() - 1);
        }
        nodes
    }

    /// Picks the smallest root shape that fits the die (ties broken by
    /// closeness to the die's aspect ratio), places every lump at the
    /// lower-left of its slot and scores the result.
    pub fn evaluate(&self, lumping: &Lumping, die_w: f64, die_h: f64, policy: &FloorplanPolicy) -> Evaluation {
        let nodes = self.build(lumping);
        let root = nodes.len() - 1;
        let die_ar = (die_w / die_h).ln();
        let closeness = |s: &Shape| ((s.w / s.h).ln() - die_ar).abs();
        let fits = |s: &Shape| s.w <= die_w + EPS_MM && s.h <= die_h + EPS_MM;
        let better = |a: &Shape, b: &Shape| {
            let (aa, ba) = (a.w * a.h, b.w * b.h);
            if (aa - ba).abs() > 1e-12 * aa.max(ba) {
                aa < ba
            } else {
                closeness(a) < closeness(b)
            }
        };
        let mut choice: Option<usize> = None;
        for (i, s) in nodes[root].shapes.iter().enumerate() {
            if fits(s) && choice.is_none_or(|c| better(s, &nodes[root].shapes[c])) {
                choice = Some(i);
            }
        }
        let legal = choice.is_some();
        let choice = choice.unwrap_or_else(|| {
            let overflow = |s: &Shape| (s.w / die_w - 1.0).max(0.0) + (s.h / die_h - 1.0).max(0.0);
            (0..nodes[root].shapes.len())
                .min_by(|&a, &b| overflow(&nodes[root].shapes[a]).total_cmp(&overflow(&nodes[root].shapes[b])))
                .expect("nonempty shape curve")
        });

        let mut rects = vec![Rect::new(0.0, 0.0, 0.0, 0.0); lumping.lumps.len()];
        place(&nodes, root, choice, 0.0, 0.0, &mut rects);

        let bounds = nodes[root].shapes[choice];
        let area_term = bounds.w * bounds.h / lumping.total_area();
        let mut adjacency_term = 0.0;
        for adj in &lumping.adjacency {
            let (ax, ay) = rects[adj.a].centroid();
            let (bx, by) = rects[adj.b].centroid();
            adjacency_term += adj.weight * ((ax - bx).abs() + (ay - by).abs());
        }
        adjacency_term /= die_w + die_h;
        let mut cost = policy.area_weight * area_term + policy.adjacency_weight * adjacency_term;
        if !legal {
            let overflow = (bounds.w / die_w - 1.0).max(0.0) + (bounds.h / die_h - 1.0).max(0.0);
            cost += ILLEGAL_PENALTY * (1.0 + overflow);
        }
        Evaluation {
            cost,
            legal,
            area_term,
            adjacency_term,
            rects,
        }
    }

    /// Operand positions in token order.
    fn operand_positions(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_operator()).collect()
    }

    fn swap_adjacent_operands(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let ops = self.operand_positions();
        if ops.len() < 2 {
            return false;
        }
        let k = rng.random_range(0..ops.len() - 1);
        self.0.swap(ops[k], ops[k + 1]);
        true
    }

    fn complement_chain(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let starts: Vec<usize> = (0..self.0.len())
            .filter(|&i| self.0[i].is_operator() && (i == 0 || !self.0[i - 1].is_operator()))
            .collect();
        if starts.is_empty() {
            return false;
        }
        let mut i = starts[rng.random_range(0..starts.len())];
        while i < self.0.len() && self.0[i].is_operator() {
            self.0[i] = if self.0[i] == Token::H { Token::V } else { Token::H };
            i += 1;
        }
        true
    }

    fn swap_operand_operator(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let candidates: Vec<usize> = (0..self.0.len().saturating_sub(1))
            .filter(|&i| self.0[i].is_operator() != self.0[i + 1].is_operator())
            .collect();
        if candidates.is_empty() {
            return false;
        }
        for _ in 0..candidates.len() {
            let i = candidates[rng.random_range(0..candidates.len())];
            self.0.swap(i, i + 1);
            if self.is_normalized() {
                return true;
            }
            self.0.swap(i, i + 1);
        }
        false
    }

    /// Applies one random move, returning false when none was possible.
    pub fn perturb(&mut self, rng: &mut ChaCha8Rng) -> bool {
        for _ in 0..8 {
            let done = match rng.random_range(0..3) {
                0 => self.swap_adjacent_operands(rng),
                1 => self.complement_chain(rng),
                _ => self.swap_operand_operator(rng),
            };
            if done {
                return true;
            }
        }
        false
    }
}

/// Geometric aspect-ratio samples of a soft block with fixed area.
fn lump_shapes(area: f64, min_ar: f64, max_ar: f64) -> Vec<Shape> {
    let n = if (max_ar - min_ar).abs() <= f64::EPSILON * max_ar {
        1
    } else {
        SHAPES_PER_LUMP
    };
    let shapes: Vec<Shape> = (0..n)
        .map(|k| {
            let r = if n == 1 {
                min_ar
            } else {
                min_ar * (max_ar / min_ar).powf(k as f64 / (n - 1) as f64)
            };
            Shape {
                w: (area * r).sqrt(),
                h: (area / r).sqrt(),
                left: 0,
                right: 0,
            }
        })
        .collect();
    prune(shapes)
}

fn combine(a: &[Shape], b: &[Shape], op: Token) -> Vec<Shape> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (i, sa) in a.iter().enumerate() {
        for (j, sb) in b.iter().enumerate() {
            let (w, h) = match op {
                Token::V => (sa.w + sb.w, sa.h.max(sb.h)),
                _ => (sa.w.max(sb.w), sa.h + sb.h),
            };
            out.push(Shape {
                w,
                h,
                left: i,
                right: j,
            });
        }
    }
    prune(out)
}

/// Keeps the Pareto front (no shape both wider and taller than another),
/// sorted by width, thinned evenly to at most `MAX_SHAPES`.
fn prune(mut shapes: Vec<Shape>) -> Vec<Shape> {
    shapes.sort_by(|a, b| a.w.total_cmp(&b.w).then(a.h.total_cmp(&b.h)));
    let mut front: Vec<Shape> = Vec::with_capacity(shapes.len());
    for s in shapes {
        if front.last().is_none_or(|last| s.h < last.h - EPS_MM) {
            front.push(s);
        }
    }
    if front.len() <= MAX_SHAPES {
        return front;
    }
    let n = front.len();
    (0..MAX_SHAPES)
        .map(|k| front[k * (n - 1) / (MAX_SHAPES - 1)])
        .collect()
}

fn place(nodes: &[Node], node: usize, shape: usize, x: f64, y: f64, rects: &mut [Rect]) {
    let s = nodes[node].shapes[shape];
    match nodes[node].kind {
        NodeKind::Leaf(lump) => rects[lump] = Rect::new(x, y, s.w, s.h),
        NodeKind::Cut(op, l, r) => {
            place(nodes, l, s.left, x, y, rects);
            let left = nodes[l].shapes[s.left];
            match op {
                Token::V => place(nodes, r, s.right, x + left.w, y, rects),
                _ => place(nodes, r, s.right, x, y + left.h, rects),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub plan: Floorplan,
    pub expression: PolishExpr,
    pub cost: f64,
    pub initial_cost: f64,
    pub temperatures: u32,
}

/// Places the lumps of `lumping` on a `die_w × die_h` die.
pub fn anneal(lumping: &Lumping, die_w: f64, die_h: f64, policy: &FloorplanPolicy) -> Result<AnnealOutcome> {
    policy.validate()?;
    if lumping.lumps.is_empty() {
        return Err(Error::Floorplan("nothing to place".into()));
    }
    if !(die_w > 0.0 && die_h > 0.0) {
        return Err(Error::Floorplan("die dimensions must be positive".into()));
    }
    if lumping.total_area() > die_w * die_h * (1.0 + 1e-12) {
        return Err(Error::Floorplan(format!(
            "area infeasible: components need {:.6} mm2, die offers {:.6} mm2",
            lumping.total_area(),
            die_w * die_h
        )));
    }
    let sched = &policy.schedule;
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let eval = |e: &PolishExpr| e.evaluate(lumping, die_w, die_h, policy);

    let mut current = PolishExpr::initial(lumping.lumps.len());
    let first = eval(&current);
    let initial_cost = first.cost;
    let mut current_cost = first.cost;
    let mut best = first.legal.then(|| (current.clone(), first.clone()));

    // Temperature calibration from uphill moves between legal plans.
    let mut uphill = Vec::new();
    let mut probe = current.clone();
    let mut probe_eval = first.clone();
    for _ in 0..sched.moves_per_temperature {
        let mut next = probe.clone();
        if !next.perturb(&mut rng) {
            break;
        }
        let e = eval(&next);
        if e.legal && probe_eval.legal && e.cost > probe_eval.cost {
            uphill.push(e.cost - probe_eval.cost);
        }
        if e.legal && best.as_ref().is_none_or(|(_, b)| e.cost < b.cost) {
            best = Some((next.clone(), e.clone()));
        }
        probe = next;
        probe_eval = e;
    }
    let mean_uphill = if uphill.is_empty() {
        0.01 * initial_cost.min(ILLEGAL_PENALTY)
    } else {
        uphill.iter().sum::<f64>() / uphill.len() as f64
    };
    let mut temperature = -mean_uphill / sched.initial_acceptance.ln();

    let mut stalled = 0;
    let mut temperatures = 0;
    let movable = lumping.lumps.len() > 1;
    while movable && temperatures < sched.max_temperatures && stalled < sched.stall_temperatures {
        let best_before = best.as_ref().map(|(_, b)| b.cost);
        for _ in 0..sched.moves_per_temperature {
            let mut next = current.clone();
            if !next.perturb(&mut rng) {
                continue;
            }
            let e = eval(&next);
            let delta = e.cost - current_cost;
            if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                if e.legal && best.as_ref().is_none_or(|(_, b)| e.cost < b.cost) {
                    best = Some((next.clone(), e.clone()));
                }
                current = next;
                current_cost = e.cost;
            }
        }
        let best_after = best.as_ref().map(|(_, b)| b.cost);
        match (best_before, best_after) {
            (Some(b0), Some(b1)) if (b0 - b1) / b0 < sched.min_improvement => stalled += 1,
            (Some(_), Some(_)) => stalled = 0,
            _ => {}
        }
        temperature *= sched.cooling;
        temperatures += 1;
    }

    let (expression, e) = best.ok_or_else(|| {
        Error::Floorplan("no legal plan found within the aspect-ratio bounds".into())
    })?;
    let blocks = lumping
        .lumps
        .iter()
        .zip(&e.rects)
        .map(|(l, r)| Block::from_rect(l.name(), *r))
        .collect();
    Ok(AnnealOutcome {
        plan: Floorplan {
            die_w_mm: die_w,
            die_h_mm: die_h,
            blocks,
            provenance: Provenance::Coarse,
        },
        expression,
        cost: e.cost,
        initial_cost,
        temperatures,
    })
}
