//! Stage drivers behind the `pixeltherm` command line.
//!
//! Every stage reads and writes files under an output directory using fixed
//! names, so stages can be rerun one at a time.

mod summary;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pixeltherm_core::config::{ArchitectureSpec, ScenarioBundle, WorkloadGraph};
use pixeltherm_core::floorplan::{self, anneal, lump, refine, AnnealOutcome, Floorplan, FloorplanPolicy};
use pixeltherm_core::io::{read_to_string, write_atomic};
use pixeltherm_core::power::{
    self, pixel_power_trace, remove_bubbles, repeat, superimpose, PowerSamples, PowerTrace,
};
use pixeltherm_core::scheduler::{assign_layers, count_actions, schedule, Mapping, MappingMode, ScheduleTrace};
use pixeltherm_core::thermal::{self, build_network, ThermalNetwork};
use pixeltherm_core::{SteadyField, TransientField};

pub use summary::{parse_summary, ComponentRow, ScenarioResult, Summary};

pub const SCHEDULE_FILE: &str = "schedule.tsv";
pub const PIXEL_PTRACE: &str = "pixel.ptrace";
pub const INFERENCE_PTRACE: &str = "inference.ptrace";
pub const COARSE_FLP: &str = "floorplan_coarse.flp";
pub const FLOORPLAN_FILE: &str = "floorplan.flp";
pub const STEADY_FILE: &str = "steady.tsv";
pub const TRANSIENT_FILE: &str = "transient.ttrace";
pub const HEATMAP_FILE: &str = "heatmap.ppm";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Heatmap resolution.
pub const HEATMAP_PX_PER_MM: f64 = 200.0;

/// Command-line overrides of the scenario manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mapping: Option<MappingMode>,
    pub flp: Option<PathBuf>,
    pub dt_cycles: Option<u64>,
    pub seed: Option<u64>,
}

/// A loaded scenario with overrides applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub bundle: ScenarioBundle,
    pub mapping: MappingMode,
    pub flp: Option<PathBuf>,
    pub dt_cycles: u64,
    pub policy: FloorplanPolicy,
}

impl Scenario {
    pub fn load(path: &Path, o: &Overrides) -> Result<Self> {
        let bundle = ScenarioBundle::load(path).with_context(|| format!("loading scenario {}", path.display()))?;
        let mapping = match &o.mapping {
            Some(m) => m.clone(),
            None => bundle.manifest.mapping_mode()?,
        };
        let flp = o.flp.clone().or_else(|| bundle.floorplan_path());
        let dt_cycles = o.dt_cycles.unwrap_or(bundle.manifest.dt_cycles);
        if dt_cycles == 0 {
            bail!("--dt-cycles must be positive");
        }
        let mut policy = bundle.manifest.floorplan_policy.clone();
        if let Some(seed) = o.seed {
            policy.seed = seed;
        }
        Ok(Scenario {
            bundle,
            mapping,
            flp,
            dt_cycles,
            policy,
        })
    }

    pub fn graph(&self) -> &WorkloadGraph {
        &self.bundle.workload
    }

    pub fn arch(&self) -> &ArchitectureSpec {
        &self.bundle.architecture
    }

    pub fn dt_seconds(&self) -> f64 {
        self.dt_cycles as f64 * self.arch().seconds_per_cycle()
    }
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

/// Maps and schedules the workload.
pub fn run_map(sc: &Scenario) -> Result<(Mapping, ScheduleTrace)> {
    let mapping = assign_layers(sc.graph(), sc.arch(), &sc.mapping).context("map")?;
    let trace = schedule(sc.graph(), &mapping, sc.arch()).context("schedule")?;
    Ok((mapping, trace))
}

pub fn write_schedule(sc: &Scenario, trace: &ScheduleTrace, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_atomic(&out.join(SCHEDULE_FILE), trace.to_tsv(sc.graph(), sc.arch()).as_bytes())?;
    Ok(())
}

pub fn read_schedule(sc: &Scenario, out: &Path) -> Result<(Mapping, ScheduleTrace)> {
    let path = out.join(SCHEDULE_FILE);
    let text = read_to_string(&path)?;
    let trace = ScheduleTrace::from_tsv(&text, &path, sc.graph(), sc.arch())?;
    let assignment = trace.layers().iter().map(|t| t.pe).collect();
    let mapping = Mapping::from_assignment(sc.graph(), sc.arch(), assignment, sc.mapping.clone())?;
    Ok((mapping, trace))
}

/// Pixel-granularity power trace of one inference.
pub fn pixel_trace(sc: &Scenario, mapping: &Mapping, trace: &ScheduleTrace) -> PowerTrace {
    let actions = count_actions(sc.graph(), mapping, sc.arch(), trace);
    pixel_power_trace(sc.arch(), trace, &actions, &sc.bundle.energy)
}

/// Writes the pixel ptrace at the scenario step and a one-step ptrace of
/// inference-average power.
pub fn write_traces(sc: &Scenario, trace: &PowerTrace, out: &Path) -> Result<(PowerSamples, PowerSamples)> {
    ensure_dir(out)?;
    let pixel = power::export_ptrace(trace, sc.dt_seconds(), &out.join(PIXEL_PTRACE))?;
    let average = power::export_ptrace(trace, trace.duration_seconds(), &out.join(INFERENCE_PTRACE))?;
    Ok((pixel, average))
}

/// Generates a coarse plan by annealing and refines it.
pub fn generate_floorplan(sc: &Scenario) -> Result<(AnnealOutcome, Floorplan)> {
    let die = sc.bundle.package.die();
    let lumps = lump(sc.arch(), &sc.policy);
    let outcome = anneal(&lumps, die.footprint_w_mm, die.footprint_h_mm, &sc.policy).context("floorplan")?;
    let fine = refine(&outcome.plan, &lumps)?;
    Ok((outcome, fine))
}

/// Uses the scenario's floorplan when one is given, otherwise generates one.
/// The fine plan is written to `floorplan.flp` and read back, so later
/// stages see the same geometry whether run together or one at a time.
pub fn resolve_floorplan(sc: &Scenario, out: &Path) -> Result<Floorplan> {
    ensure_dir(out)?;
    let plan = match &sc.flp {
        Some(path) => floorplan::parse_flp(path).with_context(|| format!("floorplan {}", path.display()))?,
        None => {
            let (outcome, fine) = generate_floorplan(sc)?;
            floorplan::export_flp(&outcome.plan, &out.join(COARSE_FLP))?;
            fine
        }
    };
    check_plan_covers(sc.arch(), &plan)?;
    let path = out.join(FLOORPLAN_FILE);
    floorplan::export_flp(&plan, &path)?;
    Ok(floorplan::parse_flp(&path)?)
}

fn check_plan_covers(arch: &ArchitectureSpec, plan: &Floorplan) -> Result<()> {
    for c in &arch.components {
        if plan.block(&c.name).is_none() {
            bail!("floorplan has no block for component `{}`", c.name);
        }
    }
    if plan.blocks.len() != arch.components.len() {
        bail!(
            "floorplan has {} blocks for {} components",
            plan.blocks.len(),
            arch.components.len()
        );
    }
    Ok(())
}

pub fn network(sc: &Scenario, plan: &Floorplan) -> Result<ThermalNetwork> {
    build_network(plan, &sc.bundle.package).context("thermal network")
}

/// Steady solve under the single-row average-power samples.
pub fn steady(net: &ThermalNetwork, average: &PowerSamples) -> Result<SteadyField> {
    let rows = thermal::map_power(average, net)?;
    let p = rows.first().context("average power trace is empty")?;
    Ok(thermal::solve_steady(net, p)?)
}

pub fn transient(net: &ThermalNetwork, samples: &PowerSamples) -> Result<TransientField> {
    let rows = thermal::map_power(samples, net)?;
    Ok(thermal::simulate_transient(net, &rows, samples.dt_seconds, None)?)
}

pub fn write_heatmap(plan: &Floorplan, net: &ThermalNetwork, field: &SteadyField, path: &Path) -> Result<()> {
    let die: Vec<f64> = net
        .nodes
        .iter()
        .zip(&field.kelvin)
        .filter(|(n, _)| n.layer == thermal::StackLayer::Die)
        .map(|(_, &t)| t)
        .collect();
    let map = thermal::render_heatmap(plan, &die, HEATMAP_PX_PER_MM);
    thermal::write_heatmap(&map, path)?;
    Ok(())
}

/// Runs every stage and writes all artifacts plus `summary.txt`.
pub fn run_pipeline(sc: &Scenario, out: &Path, heatmap: bool) -> Result<ScenarioResult> {
    ensure_dir(out)?;
    let mut stages = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, stages: &mut Vec<(String, f64)>| {
        stages.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let (mapping, sched) = run_map(sc)?;
    write_schedule(sc, &sched, out)?;
    lap("map", &mut stages);

    let trace = pixel_trace(sc, &mapping, &sched);
    let (pixel, average) = write_traces(sc, &trace, out).context("trace")?;
    lap("trace", &mut stages);

    let plan = resolve_floorplan(sc, out)?;
    lap("floorplan", &mut stages);

    let net = network(sc, &plan)?;
    let steady_field = steady(&net, &average).context("thermal-steady")?;
    thermal::write_steady(&steady_field, &out.join(STEADY_FILE))?;
    if heatmap {
        write_heatmap(&plan, &net, &steady_field, &out.join(HEATMAP_FILE))?;
    }
    lap("thermal-steady", &mut stages);

    let transient_field = transient(&net, &pixel).context("thermal-transient")?;
    thermal::write_ttrace(&transient_field, &out.join(TRANSIENT_FILE))?;
    lap("thermal-transient", &mut stages);

    let result = ScenarioResult::collect(
        sc,
        &sched,
        &trace,
        &plan,
        &steady_field,
        &transient_field,
        stages,
    );
    write_atomic(&out.join(SUMMARY_FILE), result.to_summary().as_bytes())?;
    Ok(result)
}

/// One variant of the upper-bound study.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVariant {
    pub label: String,
    /// Length of one copy in cycles.
    pub duration: u64,
    pub energy_j: f64,
    /// Peak rise over the whole repeated run.
    pub peak_rise: f64,
    /// Peak rise within each repetition.
    pub per_repetition: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundReport {
    pub repeats: u32,
    pub variants: Vec<BoundVariant>,
}

impl UpperBoundReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("repeats={}\nvariant\tcycles\tenergy_j\tpeak_rise_k\tper_repetition_k\n", self.repeats);
        for v in &self.variants {
            let reps: Vec<String> = v.per_repetition.iter().map(|r| format!("{r:.6}")).collect();
            s.push_str(&format!(
                "{}\t{}\t{:.6e}\t{:.6}\t{}\n",
                v.label,
                v.duration,
                v.energy_j,
                v.peak_rise,
                reps.join(",")
            ));
        }
        s
    }
}

/// Repeats `trace` and integrates it; per-repetition peaks are taken over
/// the steps whose start time falls in each copy.
pub fn repeated_transient(
    net: &ThermalNetwork,
    trace: &PowerTrace,
    repeats: u32,
    dt_seconds: f64,
) -> Result<(TransientField, Vec<f64>)> {
    let long = repeat(trace, repeats)?;
    let samples = power::resample(&long, dt_seconds)?;
    let field = transient(net, &samples)?;
    let copy = trace.duration_seconds();
    let mut per = vec![f64::NEG_INFINITY; repeats as usize];
    for (s, row) in field.rows.iter().enumerate() {
        let k = ((s as f64 * dt_seconds / copy) as usize).min(repeats as usize - 1);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        per[k] = per[k].max(m - field.ambient_k);
    }
    Ok((field, per))
}

/// Original, debubbled and successively compressed traces, each repeated
/// `repeats` times and integrated from ambient. Each split is applied to the
/// result of the previous one.
pub fn upper_bound(sc: &Scenario, splits: &[u64], repeats: u32, out: &Path) -> Result<UpperBoundReport> {
    ensure_dir(out)?;
    let (mapping, sched) = run_map(sc)?;
    let original = pixel_trace(sc, &mapping, &sched);
    let plan = resolve_floorplan(sc, out)?;
    let net = network(sc, &plan)?;

    let mut variants: Vec<(String, PowerTrace)> = vec![("original".into(), original.clone())];
    let mut current = remove_bubbles(&original, &sched);
    variants.push(("debubbled".into(), current.clone()));
    for &split in splits {
        current = superimpose(&current, split).with_context(|| format!("split {split}"))?;
        variants.push((format!("split-{split}"), current.clone()));
    }

    let mut report = UpperBoundReport {
        repeats,
        variants: Vec::new(),
    };
    for (label, trace) in &variants {
        let (field, per) = repeated_transient(&net, trace, repeats, sc.dt_seconds())?;
        if label != "original" {
            thermal::write_ttrace(&field, &out.join(format!("upper_{label}.ttrace")))?;
        }
        report.variants.push(BoundVariant {
            label: label.clone(),
            duration: trace.duration,
            energy_j: trace.energy(),
            peak_rise: field.peak_rise(),
            per_repetition: per,
        });
    }
    write_atomic(&out.join("upper_bound.tsv"), report.to_text().as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorplanComparison {
    /// `(block, T_b - T_a)` in kelvin, in the order of plan A.
    pub deltas: Vec<(String, f64)>,
    pub max_a: f64,
    pub max_b: f64,
}

impl FloorplanComparison {
    pub fn max_delta(&self) -> f64 {
        self.max_b - self.max_a
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "max_a_k={}\nmax_b_k={}\nmax_delta_k={}\nblock\tdelta_k\n",
            self.max_a,
            self.max_b,
            self.max_delta()
        );
        for (n, d) in &self.deltas {
            s.push_str(&format!("{n}\t{d}\n"));
        }
        s
    }
}

/// Steady temperatures of the same average power on two plans.
pub fn compare_floorplans(sc: &Scenario, a: &Floorplan, b: &Floorplan) -> Result<FloorplanComparison> {
    check_plan_covers(sc.arch(), a)?;
    check_plan_covers(sc.arch(), b)?;
    let (mapping, sched) = run_map(sc)?;
    let trace = pixel_trace(sc, &mapping, &sched);
    let average = power::resample(&trace, trace.duration_seconds())?;
    let ta = steady(&network(sc, a)?, &average)?;
    let tb = steady(&network(sc, b)?, &average)?;
    let deltas = a
        .blocks
        .iter()
        .map(|blk| {
            let d = tb.get(&blk.name).unwrap_or(f64::NAN) - ta.get(&blk.name).unwrap_or(f64::NAN);
            (blk.name.clone(), d)
        })
        .collect();
    Ok(FloorplanComparison {
        deltas,
        max_a: ta.hottest(a.blocks.len()).map_or(f64::NAN, |h| h.1),
        max_b: tb.hottest(b.blocks.len()).map_or(f64::NAN, |h| h.1),
    })
}
