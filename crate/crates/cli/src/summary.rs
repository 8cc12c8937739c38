//! Run summary: flat `key=value` lines followed by a per-component table.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use pixeltherm_core::floorplan::Floorplan;
use pixeltherm_core::power::PowerTrace;
use pixeltherm_core::scheduler::ScheduleTrace;
use pixeltherm_core::{SteadyField, TransientField};

use crate::Scenario;

const TABLE_HEADER: &str = "component\tenergy_j\tavg_power_w\tsteady_k";

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRow {
    pub name: String,
    pub energy_j: f64,
    pub avg_power_w: f64,
    pub steady_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub mapping: String,
    pub total_energy_j: f64,
    pub total_latency_cycles: u64,
    pub bubble_fraction: f64,
    pub steady_max_k: f64,
    pub steady_min_k: f64,
    pub steady_max_rise_k: f64,
    pub transient_peak_rise_k: f64,
    pub hottest_block: String,
    pub components: Vec<ComponentRow>,
    pub stage_seconds: Vec<(String, f64)>,
}

impl ScenarioResult {
    pub(crate) fn collect(
        sc: &Scenario,
        sched: &ScheduleTrace,
        trace: &PowerTrace,
        plan: &Floorplan,
        steady: &SteadyField,
        transient: &TransientField,
        stage_seconds: Vec<(String, f64)>,
    ) -> Self {
        let seconds = trace.duration_seconds();
        let components: Vec<ComponentRow> = trace
            .components
            .iter()
            .map(|c| {
                let e = c.energy(trace.seconds_per_cycle);
                ComponentRow {
                    name: c.name.clone(),
                    energy_j: e,
                    avg_power_w: e / seconds,
                    steady_k: steady.get(&c.name).unwrap_or(f64::NAN),
                }
            })
            .collect();
        let makespan = sched.makespan();
        let hottest = steady
            .hottest(plan.blocks.len())
            .map(|(n, _)| n.to_string())
            .unwrap_or_default();
        ScenarioResult {
            scenario: sc.bundle.manifest.name.clone(),
            mapping: sc.mapping.to_string(),
            total_energy_j: components.iter().map(|c| c.energy_j).sum(),
            total_latency_cycles: makespan,
            bubble_fraction: if makespan == 0 {
                0.0
            } else {
                sched.global_idle_cycles() as f64 / makespan as f64
            },
            steady_max_k: steady.max(),
            steady_min_k: steady.kelvin.iter().copied().fold(f64::INFINITY, f64::min),
            steady_max_rise_k: steady.max_rise(),
            transient_peak_rise_k: transient.peak_rise(),
            hottest_block: hottest,
            components,
            stage_seconds,
        }
    }

    pub fn total_seconds(&self) -> f64 {
        self.stage_seconds.iter().map(|s| s.1).sum()
    }

    pub fn to_summary(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
        kv("scenario", self.scenario.clone());
        kv("mapping", self.mapping.clone());
        kv("total_energy_j", format!("{:e}", self.total_energy_j));
        kv("total_latency_cycles", self.total_latency_cycles.to_string());
        kv("bubble_fraction", format!("{}", self.bubble_fraction));
        kv("steady_max_k", format!("{}", self.steady_max_k));
        kv("steady_min_k", format!("{}", self.steady_min_k));
        kv("steady_max_rise_k", format!("{}", self.steady_max_rise_k));
        kv("transient_peak_rise_k", format!("{}", self.transient_peak_rise_k));
        kv("hottest_block", self.hottest_block.clone());
        for (stage, t) in &self.stage_seconds {
            kv(&format!("seconds.{stage}"), format!("{t:.6}"));
        }
        kv("seconds.total", format!("{:.6}", self.total_seconds()));
        s.push('\n');
        s.push_str(TABLE_HEADER);
        s.push('\n');
        for c in &self.components {
            s.push_str(&format!(
                "{}\t{:e}\t{:e}\t{}\n",
                c.name, c.energy_j, c.avg_power_w, c.steady_k
            ));
        }
        s
    }
}

/// Parsed form of a summary file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub values: BTreeMap<String, String>,
    pub components: Vec<ComponentRow>,
}

impl Summary {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        let v = self.get(key).with_context(|| format!("summary lacks `{key}`"))?;
        v.parse().with_context(|| format!("summary `{key}` = `{v}`"))
    }
}

pub fn parse_summary(text: &str) -> Result<Summary> {
    let mut out = Summary::default();
    let mut in_table = false;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if line == TABLE_HEADER {
            in_table = true;
            continue;
        }
        if in_table {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                bail!("bad component row `{line}`");
            }
            out.components.push(ComponentRow {
                name: f[0].to_string(),
                energy_j: f[1].parse()?,
                avg_power_w: f[2].parse()?,
                steady_k: f[3].parse()?,
            });
        } else {
            let (k, v) = line.split_once('=').with_context(|| format!("bad summary line `{line}`"))?;
            out.values.insert(k.to_string(), v.to_string());
        }
    }
    Ok(out)
}
