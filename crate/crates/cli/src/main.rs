use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pixeltherm_cli::*;
use pixeltherm_core::floorplan::{self, parse_flp};
use pixeltherm_core::io::write_atomic;
use pixeltherm_core::power::read_ptrace;
use pixeltherm_core::scheduler::MappingMode;
use pixeltherm_core::thermal;

#[derive(Parser)]
#[command(name = "pixeltherm", version, about = "Pixel-level power and thermal simulation of CNN accelerator tiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario manifest (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// `default` or `swapped:<pe_a>,<pe_b>`.
    #[arg(long)]
    mapping: Option<MappingMode>,
    /// Fine floorplan to use instead of generating one.
    #[arg(long)]
    flp: Option<PathBuf>,
    /// Power/temperature sampling step in base-clock cycles.
    #[arg(long)]
    dt_cycles: Option<u64>,
    /// Floorplan annealing seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        Scenario::load(
            &self.scenario,
            &Overrides {
                mapping: self.mapping.clone(),
                flp: self.flp.clone(),
                dt_cycles: self.dt_cycles,
                seed: self.seed,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Map layers to PEs and write the pixel schedule.
    Map(Common),
    /// Turn the schedule into power traces.
    Trace(Common),
    /// Generate (or validate) the fine floorplan.
    Floorplan(Common),
    /// Steady-state temperatures under inference-average power.
    ThermalSteady {
        #[command(flatten)]
        common: Common,
        /// Also write a PPM heatmap of the die.
        #[arg(long)]
        heatmap: bool,
    },
    /// Transient temperatures under the pixel power trace.
    ThermalTransient(Common),
    /// Run every stage and write a summary.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        heatmap: bool,
    },
    /// Debubble, compress and repeat the trace to bound the temperature rise.
    UpperBound {
        #[command(flatten)]
        common: Common,
        /// Comma-separated split cycles, applied in order.
        #[arg(long, value_delimiter = ',')]
        splits: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        repeats: u32,
    },
    /// Steady temperature differences between two floorplans.
    CompareFlp {
        #[command(flatten)]
        common: Common,
        a: PathBuf,
        b: PathBuf,
    },
}

fn floorplan_for_thermal(sc: &Scenario, out: &Path) -> Result<floorplan::Floorplan> {
    match &sc.flp {
        Some(p) => Ok(parse_flp(p)?),
        None => {
            let path = out.join(FLOORPLAN_FILE);
            parse_flp(&path).with_context(|| "run the `floorplan` stage first or pass --flp")
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Map(c) => {
            let sc = c.scenario()?;
            let (_, sched) = run_map(&sc)?;
            write_schedule(&sc, &sched, &c.out)?;
            println!("makespan_cycles={}", sched.makespan());
            println!("global_idle_cycles={}", sched.global_idle_cycles());
        }
        Command::Trace(c) => {
            let sc = c.scenario()?;
            let (mapping, sched) = read_schedule(&sc, &c.out).context("trace")?;
            let trace = pixel_trace(&sc, &mapping, &sched);
            let (pixel, _) = write_traces(&sc, &trace, &c.out)?;
            println!("total_energy_j={:e}", trace.energy());
            println!("steps={}", pixel.steps());
        }
        Command::Floorplan(c) => {
            let sc = c.scenario()?;
            let plan = resolve_floorplan(&sc, &c.out)?;
            println!("blocks={}", plan.blocks.len());
            println!("block_area_mm2={}", plan.block_area());
        }
        Command::ThermalSteady { common: c, heatmap } => {
            let sc = c.scenario()?;
            let plan = floorplan_for_thermal(&sc, &c.out)?;
            let net = network(&sc, &plan)?;
            let (average, _) = read_ptrace(&c.out.join(INFERENCE_PTRACE)).context("thermal-steady")?;
            let field = steady(&net, &average)?;
            thermal::write_steady(&field, &c.out.join(STEADY_FILE))?;
            if heatmap {
                write_heatmap(&plan, &net, &field, &c.out.join(HEATMAP_FILE))?;
            }
            let (name, t) = field.hottest(plan.blocks.len()).unwrap_or(("", f64::NAN));
            println!("steady_max_rise_k={}", field.max_rise());
            println!("hottest_block={name}");
            println!("hottest_k={t}");
        }
        Command::ThermalTransient(c) => {
            let sc = c.scenario()?;
            let plan = floorplan_for_thermal(&sc, &c.out)?;
            let net = network(&sc, &plan)?;
            let (samples, _) = read_ptrace(&c.out.join(PIXEL_PTRACE)).context("thermal-transient")?;
            let field = transient(&net, &samples)?;
            thermal::write_ttrace(&field, &c.out.join(TRANSIENT_FILE))?;
            println!("transient_peak_rise_k={}", field.peak_rise());
        }
        Command::Pipeline { common: c, heatmap } => {
            let sc = c.scenario()?;
            let result = run_pipeline(&sc, &c.out, heatmap)?;
            print!("{}", result.to_summary());
        }
        Command::UpperBound {
            common: c,
            splits,
            repeats,
        } => {
            let sc = c.scenario()?;
            let report = upper_bound(&sc, &splits, repeats, &c.out)?;
            print!("{}", report.to_text());
        }
        Command::CompareFlp { common: c, a, b } => {
            let sc = c.scenario()?;
            let cmp = compare_floorplans(&sc, &parse_flp(&a)?, &parse_flp(&b)?)?;
            std::fs::create_dir_all(&c.out)?;
            write_atomic(&c.out.join("compare_flp.tsv"), cmp.to_text().as_bytes())?;
            print!("{}", cmp.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
