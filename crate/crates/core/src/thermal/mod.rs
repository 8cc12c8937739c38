//! Compact RC thermal model: network construction, steady-state and
//! backward-Euler transient solves, and temperature file formats.

mod io;
mod network;
mod solver;

pub use io::{
    parse_steady, render_heatmap, write_heatmap, write_steady, write_ttrace, Heatmap,
};
pub use network::{build_network, StackLayer, ThermalNetwork, ThermalNode};
pub use solver::{conjugate_gradient, rcm_order, CsrMatrix, SkylineCholesky};

use crate::error::{Error, Result};
use crate::power::PowerSamples;

/// Steady temperatures in kelvin, one per network node.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyField {
    pub names: Vec<String>,
    pub kelvin: Vec<f64>,
    pub ambient_k: f64,
}

impl SteadyField {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.kelvin[i])
    }

    pub fn max(&self) -> f64 {
        self.kelvin.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_rise(&self) -> f64 {
        self.max() - self.ambient_k
    }

    /// Hottest of the first `blocks` nodes (the floorplan blocks).
    pub fn hottest(&self, blocks: usize) -> Option<(&str, f64)> {
        self.names[..blocks]
            .iter()
            .zip(&self.kelvin)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(n, &t)| (n.as_str(), t))
    }
}

/// Temperatures sampled at the end of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientField {
    pub names: Vec<String>,
    pub dt_seconds: f64,
    pub ambient_k: f64,
    /// `rows[step][node]`, kelvin.
    pub rows: Vec<Vec<f64>>,
}

impl TransientField {
    pub fn peak(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn peak_rise(&self) -> f64 {
        (self.peak() - self.ambient_k).max(0.0)
    }

    /// Peak rise inside each consecutive window of `steps` rows.
    pub fn window_peak_rises(&self, steps: usize) -> Vec<f64> {
        self.rows
            .chunks(steps.max(1))
            .map(|w| {
                w.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max) - self.ambient_k
            })
            .collect()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.rows.last().map(Vec::as_slice)
    }
}

/// Per-node power vector from `(block name, watts)` pairs.
pub fn node_power(net: &ThermalNetwork, power: &[(String, f64)]) -> Result<Vec<f64>> {
    let mut p = vec![0.0; net.len()];
    for (name, w) in power {
        let i = die_node(net, name)?;
        p[i] += w;
    }
    Ok(p)
}

fn die_node(net: &ThermalNetwork, name: &str) -> Result<usize> {
    net.block_nodes
        .iter()
        .copied()
        .find(|&i| net.nodes[i].name == name)
        .ok_or_else(|| Error::Thermal(format!("no floorplan block named `{name}`")))
}

/// Routes each trace column to its block's die node; every other node gets
/// zero. Returns `rows[step][node]`.
pub fn map_power(samples: &PowerSamples, net: &ThermalNetwork) -> Result<Vec<Vec<f64>>> {
    let targets = samples
        .names
        .iter()
        .map(|n| die_node(net, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(samples
        .rows
        .iter()
        .map(|row| {
            let mut p = vec![0.0; net.len()];
            for (&i, &w) in targets.iter().zip(row) {
                p[i] += w;
            }
            p
        })
        .collect())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solves `G Θ = P` and returns `T = ambient + Θ`.
pub fn solve_steady(net: &ThermalNetwork, power: &[f64]) -> Result<SteadyField> {
    if power.len() != net.len() {
        return Err(Error::Thermal(format!(
            "power vector has {} entries for {} nodes",
            power.len(),
            net.len()
        )));
    }
    let factor = SkylineCholesky::factor(&net.g)?;
    let mut theta = factor.solve(power);
    let target = 1e-9 * inf_norm(power);
    for _ in 0..3 {
        let r: Vec<f64> = net
            .g
            .mul_vec(&theta)
            .iter()
            .zip(power)
            .map(|(gt, p)| p - gt)
            .collect();
        if inf_norm(&r) <= target {
            break;
        }
        let d = factor.solve(&r);
        theta.iter_mut().zip(d).for_each(|(t, d)| *t += d);
    }
    let residual = inf_norm(
        &net.g
            .mul_vec(&theta)
            .iter()
            .zip(power)
            .map(|(gt, p)| gt - p)
            .collect::<Vec<_>>(),
    );
    if residual > target {
        return Err(Error::Thermal(format!("steady residual {residual:e} above tolerance")));
    }
    Ok(SteadyField {
        names: net.names(),
        kelvin: theta.iter().map(|t| net.ambient_k + t).collect(),
        ambient_k: net.ambient_k,
    })
}

/// Backward Euler: `(C/dt + G) Θₙ₊₁ = (C/dt) Θₙ + Pₙ` with one factorization
/// for all steps. `theta0` is the initial rise above ambient (zero if `None`).
pub fn simulate_transient(
    net: &ThermalNetwork,
    power: &[Vec<f64>],
    dt_seconds: f64,
    theta0: Option<&[f64]>,
) -> Result<TransientField> {
    if !(dt_seconds > 0.0 && dt_seconds.is_finite()) {
        return Err(Error::Thermal(format!("time step must be positive, got {dt_seconds}")));
    }
    if power.is_empty() {
        return Err(Error::Thermal("power trace has no samples".into()));
    }
    if let Some(row) = power.iter().find(|r| r.len() != net.len()) {
        return Err(Error::Thermal(format!(
            "power row has {} entries for {} nodes",
            row.len(),
            net.len()
        )));
    }
    let n = net.len();
    let c_dt: Vec<f64> = net.c.iter().map(|c| c / dt_seconds).collect();
    let factor = SkylineCholesky::factor(&net.g.add_diagonal(&c_dt))?;
    let mut theta = match theta0 {
        Some(t) if t.len() == n => t.to_vec(),
        Some(t) => {
            return Err(Error::Thermal(format!(
                "initial state has {} entries for {} nodes",
                t.len(),
                n
            )))
        }
        None => vec![0.0; n],
    };
    let mut rows = Vec::with_capacity(power.len());
    let mut rhs = vec![0.0; n];
    for p in power {
        for i in 0..n {
            rhs[i] = c_dt[i] * theta[i] + p[i];
        }
        theta = factor.solve(&rhs);
        rows.push(theta.iter().map(|t| net.ambient_k + t).collect());
    }
    Ok(TransientField {
        names: net.names(),
        dt_seconds,
        ambient_k: net.ambient_k,
        rows,
    })
}
