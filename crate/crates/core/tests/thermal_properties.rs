//! Physical and numerical properties of the compact thermal model.

use pixeltherm_core::config::{PackageLayer, PackageSpec};
use pixeltherm_core::floorplan::{Block, Floorplan, Provenance, Rect};
use pixeltherm_core::thermal::{
    build_network, conjugate_gradient, node_power, simulate_transient, solve_steady, StackLayer,
    ThermalNetwork, ThermalNode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn package(die_w: f64, die_h: f64) -> PackageSpec {
    let layer = |name: &str, w: f64, h: f64, t: f64, k: f64| PackageLayer {
        name: name.into(),
        footprint_w_mm: w,
        footprint_h_mm: h,
        thickness_mm: t,
        conductivity_w_per_mk: k,
        volumetric_heat_capacity_j_per_m3k: None,
    };
    PackageSpec {
        convection_resistance_k_per_w: 0.17,
        ambient_k: 313.15,
        layers: vec![
            layer("silicon", die_w, die_h, 0.5, 140.0),
            layer("tim", die_w, die_h, 0.1, 7.0),
            layer("spreader", die_w * 1.5, die_h * 1.5, 0.2, 400.0),
            layer("sink", die_w * 2.0, die_h * 2.0, 1.0, 400.0),
        ],
    }
}

/// `cols x rows` equal blocks covering `fill` of the die width.
fn grid_plan(cols: usize, rows: usize, die: f64, fill: f64) -> Floorplan {
    let (w, h) = (die * fill / cols as f64, die / rows as f64);
    let mut blocks = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            blocks.push(Block::from_rect(
                format!("b{}", r * cols + c),
                Rect::new(c as f64 * w, r as f64 * h, w, h),
            ));
        }
    }
    Floorplan {
        die_w_mm: die,
        die_h_mm: die,
        blocks,
        provenance: Provenance::Fine,
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn random_block_power(net: &ThermalNetwork, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p = vec![0.0; net.len()];
    for &i in &net.block_nodes {
        p[i] = rng.random_range(0.0..0.05);
    }
    p
}

/// Connected random network: a spanning chain plus extra random branches,
/// with a few nodes tied to ambient.
fn random_network(rng: &mut ChaCha8Rng) -> ThermalNetwork {
    let n = rng.random_range(2..40);
    let nodes = (0..n)
        .map(|i| ThermalNode {
            name: format!("n{i}"),
            layer: StackLayer::Die,
            rect: Rect::new(i as f64, 0.0, 1.0, 1.0),
            area_m2: 1e-6,
            volume_m3: 1e-9,
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut branches: Vec<(usize, usize, f64)> = order
        .windows(2)
        .map(|w| (w[0], w[1], rng.random_range(0.01..10.0)))
        .collect();
    for _ in 0..rng.random_range(0..2 * n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            branches.push((a, b, rng.random_range(0.01..10.0)));
        }
    }
    let mut ambient = vec![0.0; n];
    for _ in 0..rng.random_range(1..=3) {
        ambient[rng.random_range(0..n)] = rng.random_range(0.1..10.0);
    }
    let c = (0..n).map(|_| rng.random_range(1e-6..1e-3)).collect();
    ThermalNetwork::from_parts(nodes, &branches, ambient, c, 300.0, (0..n).collect()).unwrap()
}

#[test]
fn steady_heat_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (cols, rows, fill) in [(1, 1, 1.0), (3, 2, 0.8), (4, 4, 0.95), (5, 3, 0.6)] {
        let plan = grid_plan(cols, rows, 2.0, fill);
        let net = build_network(&plan, &package(2.0, 2.0)).unwrap();
        let p = random_block_power(&net, &mut rng);
        let field = solve_steady(&net, &p).unwrap();
        let out: f64 = field
            .kelvin
            .iter()
            .zip(&net.ambient_links)
            .map(|(t, g)| g * (t - net.ambient_k))
            .sum();
        let input: f64 = p.iter().sum();
        assert!(rel_close(out, input, 1e-6), "{cols}x{rows}: {out} vs {input}");
        assert!(rel_close(net.total_ambient_conductance(), 1.0 / 0.17, 1e-12));
    }
}

#[test]
fn steady_is_linear_in_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let plan = grid_plan(4, 3, 2.0, 0.9);
    let net = build_network(&plan, &package(2.0, 2.0)).unwrap();
    for _ in 0..10 {
        let p1 = random_block_power(&net, &mut rng);
        let p2 = random_block_power(&net, &mut rng);
        let (a, b) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
        let mix: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| a * x + b * y).collect();
        let rise = |p: &[f64]| -> Vec<f64> {
            solve_steady(&net, p).unwrap().kelvin.iter().map(|t| t - net.ambient_k).collect()
        };
        let (r1, r2, rm) = (rise(&p1), rise(&p2), rise(&mix));
        for i in 0..net.len() {
            assert!(rel_close(rm[i], a * r1[i] + b * r2[i], 1e-9), "node {i}");
        }
    }
}

#[test]
fn backward_euler_tracks_single_rc() {
    for (r, c, p) in [(0.17, 2e-3, 1.5), (5.0, 1e-6, 0.02), (1.0, 1.0, 3.0)] {
        let net = random_rc(r, c);
        let tau = r * c;
        for div in [50.0, 100.0] {
            let dt = tau / div;
            let steps = (5.0 * div) as usize;
            let field = simulate_transient(&net, &vec![vec![p]; steps], dt, None).unwrap();
            for (k, row) in field.rows.iter().enumerate() {
                let exact = p * r * (1.0 - (-((k + 1) as f64 * dt) / tau).exp());
                let got = row[0] - net.ambient_k;
                assert!((got - exact).abs() <= 0.01 * exact, "dt=tau/{div} step {k}");
            }
        }
    }
}

fn random_rc(r: f64, c: f64) -> ThermalNetwork {
    let node = ThermalNode {
        name: "x".into(),
        layer: StackLayer::Die,
        rect: Rect::new(0.0, 0.0, 1.0, 1.0),
        area_m2: 1e-6,
        volume_m3: 1e-9,
    };
    ThermalNetwork::from_parts(vec![node], &[], vec![1.0 / r], vec![c], 313.15, vec![0]).unwrap()
}

#[test]
fn constant_power_transient_reaches_steady_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plan = grid_plan(3, 3, 2.0, 0.9);
    let net = build_network(&plan, &package(2.0, 2.0)).unwrap();
    let p = random_block_power(&net, &mut rng);
    let steady = solve_steady(&net, &p).unwrap();
    let field = simulate_transient(&net, &vec![p.clone(); 60], 5.0, None).unwrap();
    let last = field.last().unwrap();
    for (a, b) in last.iter().zip(&steady.kelvin) {
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
    // starting at the fixed point, the state stays there
    let theta: Vec<f64> = steady.kelvin.iter().map(|t| t - net.ambient_k).collect();
    let held = simulate_transient(&net, &vec![p; 5], 1e-6, Some(&theta)).unwrap();
    for row in &held.rows {
        for (a, b) in row.iter().zip(&steady.kelvin) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn more_power_never_cools_any_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let net = random_network(&mut rng);
        let p: Vec<f64> = (0..net.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let base = solve_steady(&net, &p).unwrap();
        let mut hotter = p.clone();
        let k = rng.random_range(0..net.len());
        hotter[k] += rng.random_range(0.01..1.0);
        let more = solve_steady(&net, &hotter).unwrap();
        for (a, b) in more.kelvin.iter().zip(&base.kelvin) {
            assert!(a >= b, "{a} < {b}");
        }
        assert!(more.kelvin[k] > base.kelvin[k]);
        for t in &base.kelvin {
            assert!(*t >= net.ambient_k);
        }
    }
}

#[test]
fn cholesky_agrees_with_conjugate_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let net = random_network(&mut rng);
        let p: Vec<f64> = (0..net.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let direct = solve_steady(&net, &p).unwrap();
        let cg = conjugate_gradient(&net.g, &p, 1e-13, 10_000).unwrap();
        let scale = cg.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (t, x) in direct.kelvin.iter().zip(&cg) {
            assert!((t - net.ambient_k - x).abs() <= 1e-8 * scale);
        }
    }
    let plan = grid_plan(4, 4, 2.0, 0.9);
    let net = build_network(&plan, &package(2.0, 2.0)).unwrap();
    let p = random_block_power(&net, &mut rng);
    let direct = solve_steady(&net, &p).unwrap();
    let cg = conjugate_gradient(&net.g, &p, 1e-13, 10_000).unwrap();
    let scale = cg.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (t, x) in direct.kelvin.iter().zip(&cg) {
        assert!((t - net.ambient_k - x).abs() <= 1e-8 * scale);
    }
}

#[test]
fn backward_euler_is_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let plan = grid_plan(3, 2, 2.0, 0.9);
    let net = build_network(&plan, &package(2.0, 2.0)).unwrap();
    let p = random_block_power(&net, &mut rng);
    let horizon = 2e-3;
    let at_end = |steps: usize| -> Vec<f64> {
        let f = simulate_transient(&net, &vec![p.clone(); steps], horizon / steps as f64, None).unwrap();
        f.last().unwrap().to_vec()
    };
    let reference = at_end(64 * 40);
    let err = |steps: usize| -> f64 {
        at_end(steps)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (err(40), err(80), err(160));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((1.7..2.3).contains(&ratio), "halving dt changed the error by {ratio}");
    }
}

#[test]
fn splitting_blocks_barely_moves_temperatures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coarse = grid_plan(2, 2, 2.0, 0.9);
    let fine = grid_plan(4, 4, 2.0, 0.9);
    let pkg = package(2.0, 2.0);
    let cnet = build_network(&coarse, &pkg).unwrap();
    let fnet = build_network(&fine, &pkg).unwrap();
    let watts: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..0.1)).collect();
    let cpow: Vec<(String, f64)> = (0..4).map(|i| (format!("b{i}"), watts[i])).collect();
    // each coarse block covers a 2x2 group of fine blocks
    let fpow: Vec<(String, f64)> = (0..16)
        .map(|i| {
            let (r, c) = (i / 4, i % 4);
            (format!("b{i}"), watts[(r / 2) * 2 + c / 2] / 4.0)
        })
        .collect();
    let cs = solve_steady(&cnet, &node_power(&cnet, &cpow).unwrap()).unwrap();
    let fs = solve_steady(&fnet, &node_power(&fnet, &fpow).unwrap()).unwrap();
    let total: f64 = watts.iter().sum();
    assert!(rel_close(cs.get("sink.center").unwrap(), fs.get("sink.center").unwrap(), 1e-3));
    let rise_c = cs.max_rise();
    let rise_f = fs.max_rise();
    assert!(
        (rise_c - rise_f).abs() <= 0.1 * rise_c,
        "coarse {rise_c} fine {rise_f} for {total} W"
    );
    for i in 0..4 {
        let coarse_t = cs.get(&format!("b{i}")).unwrap() - cs.ambient_k;
        let (r0, c0) = ((i / 2) * 2, (i % 2) * 2);
        let mean: f64 = [(r0, c0), (r0, c0 + 1), (r0 + 1, c0), (r0 + 1, c0 + 1)]
            .iter()
            .map(|(r, c)| fs.get(&format!("b{}", r * 4 + c)).unwrap() - fs.ambient_k)
            .sum::<f64>()
            / 4.0;
        assert!((coarse_t - mean).abs() <= 0.1 * coarse_t, "block {i}: {coarse_t} vs {mean}");
    }
}
