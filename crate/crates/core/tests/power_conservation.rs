//! Energy bookkeeping through trace synthesis, every transform and the
//! ptrace round trip.

mod common;

use std::collections::BTreeSet;

use common::{random_instance, Instance};
use pixeltherm_core::config::{Action, EnergyTable, PeKind};
use pixeltherm_core::power::{
    aggregate, pixel_power_trace, read_ptrace, remove_bubbles, remove_intervals, repeat, resample,
    superimpose, write_samples, Granularity, PowerTrace,
};
use pixeltherm_core::scheduler::{count_actions, schedule, ScheduleTrace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * a.abs().max(b.abs()).max(1e-30)
}

fn random_table(rng: &mut ChaCha8Rng) -> EnergyTable {
    EnergyTable::from_entries(Action::ALL.map(|a| (a, rng.random_range(0.1..10.0) * 1e-12))).unwrap()
}

/// Energy straight from the layer specs, without the action-count tables.
fn expected_energy(inst: &Instance, table: &EnergyTable) -> f64 {
    let g = &inst.graph;
    let mut total = 0.0;
    for (l, layer) in g.layers().iter().enumerate() {
        let pe = &inst.arch.pes[inst.mapping.pe_of(l)];
        let mut per_pixel = layer.buffer_reads_per_pixel as f64 * table.energy(Action::Read);
        per_pixel += match pe.kind {
            PeKind::Aimcore => {
                layer.macs_per_output_pixel as f64 * table.energy(Action::Mac)
                    + table.energy(Action::ArrayActivate)
            }
            PeKind::Vfu => layer.macs_per_output_pixel as f64 * table.energy(Action::SimdOp),
        };
        let consumers: BTreeSet<usize> = g.successors(l).iter().map(|&s| inst.mapping.pe_of(s)).collect();
        let fanout = consumers.len().max(1) as f64;
        per_pixel += fanout * layer.buffer_writes_per_pixel as f64 * table.energy(Action::Write);
        total += per_pixel * layer.pixel_count() as f64;
        total += layer.imem_fetch_instructions as f64 * table.energy(Action::Fetch);
    }
    total
}

fn build(seed: u64) -> (Instance, ScheduleTrace, PowerTrace, EnergyTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_instance(&mut rng);
    let table = random_table(&mut rng);
    let sched = schedule(&inst.graph, &inst.mapping, &inst.arch).unwrap();
    let actions = count_actions(&inst.graph, &inst.mapping, &inst.arch, &sched);
    let trace = pixel_power_trace(&inst.arch, &sched, &actions, &table);
    (inst, sched, trace, table)
}

/// Energy inside `[s, e)` by walking cycles one at a time.
fn energy_between(trace: &PowerTrace, s: u64, e: u64) -> f64 {
    trace
        .components
        .iter()
        .map(|c| (s..e).map(|t| c.power_at(t)).sum::<f64>())
        .sum::<f64>()
        * trace.seconds_per_cycle
}

#[test]
fn pixel_trace_matches_layer_arithmetic() {
    for seed in 0..100 {
        let (inst, _, trace, table) = build(seed);
        assert!(trace.is_well_formed());
        let want = expected_energy(&inst, &table);
        assert!(close(trace.energy(), want), "seed {seed}: {} vs {want}", trace.energy());
    }
}

#[test]
fn aggregation_preserves_energy() {
    for seed in 0..50 {
        let (_, sched, trace, _) = build(seed);
        for g in [Granularity::Layer, Granularity::Inference] {
            let agg = aggregate(&trace, g, &sched);
            assert!(agg.is_well_formed());
            assert!(close(agg.energy(), trace.energy()), "seed {seed} {g:?}");
            for (a, b) in agg.components.iter().zip(&trace.components) {
                assert!(close(a.energy(agg.seconds_per_cycle), b.energy(trace.seconds_per_cycle)));
            }
        }
    }
}

#[test]
fn transforms_preserve_or_account_for_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..50 {
        let (_, sched, trace, _) = build(seed);
        let e = trace.energy();
        let debubbled = remove_bubbles(&trace, &sched);
        assert!(close(debubbled.energy(), e));
        assert_eq!(debubbled.duration, trace.duration - sched.global_idle_cycles());

        let n = rng.random_range(1..=5);
        let rep = repeat(&trace, n).unwrap();
        assert!(close(rep.energy(), n as f64 * e));
        assert_eq!(rep.duration, n as u64 * trace.duration);

        if trace.duration > 1 {
            let split = rng.random_range(1..trace.duration);
            let folded = superimpose(&trace, split).unwrap();
            assert!(folded.is_well_formed());
            assert!(close(folded.energy(), e));
            assert_eq!(folded.duration, split.max(trace.duration - split));

            let a = rng.random_range(0..trace.duration);
            let b = rng.random_range(a..=trace.duration);
            let cut = remove_intervals(&trace, &[(a, b)]);
            let lost = energy_between(&trace, a, b);
            assert!((cut.energy() - (e - lost)).abs() <= REL * e, "seed {seed} cut [{a},{b})");
            assert_eq!(cut.duration, trace.duration - (b - a));
        }
    }
}

#[test]
fn cutting_hand_made_idle_gaps_closes_them() {
    let (_, _, trace, _) = build(3);
    let d = trace.duration;
    let mut padded = trace.clone();
    padded.duration = d + 500;
    for c in &mut padded.components {
        for s in &mut c.segments {
            s.start += 500;
            s.end += 500;
        }
    }
    let back = remove_intervals(&padded, &[(0, 500)]);
    assert_eq!(back.duration, d);
    assert_eq!(back.components, trace.components);
}

#[test]
fn resampling_and_ptrace_round_trip_conserve_energy() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..50 {
        let (_, _, trace, _) = build(seed);
        let dt_cycles = rng.random_range(1..=trace.duration.max(2) + 7);
        let dt = dt_cycles as f64 * trace.seconds_per_cycle;
        let samples = resample(&trace, dt).unwrap();
        assert!(close(samples.energy(), trace.energy()), "seed {seed} dt {dt_cycles}");
        for (i, c) in trace.components.iter().enumerate() {
            let col: f64 = samples.rows.iter().map(|r| r[i]).sum::<f64>() * dt;
            assert!(close(col, c.energy(trace.seconds_per_cycle)));
        }
        let path = dir.path().join(format!("{seed}.ptrace"));
        write_samples(&samples, 1e9, &path).unwrap();
        let (back, meta) = read_ptrace(&path).unwrap();
        assert_eq!(meta.steps, samples.steps());
        assert!(close(back.energy(), samples.energy()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn chained_transforms_conserve(seed in 0u64..10_000, n in 1u32..4, frac in 0.05f64..0.95) {
        let (_, sched, trace, _) = build(seed);
        let e = trace.energy();
        let mut t = remove_bubbles(&trace, &sched);
        let split = ((t.duration as f64 * frac) as u64).max(1);
        if split < t.duration {
            t = superimpose(&t, split).unwrap();
        }
        t = repeat(&t, n).unwrap();
        let samples = resample(&t, 7.0 * t.seconds_per_cycle).unwrap();
        prop_assert!(close(samples.energy(), n as f64 * e));
    }
}
