use std::sync::Arc;

use instab_core::dynamics::*;
use instab_core::generate::{generate_instance, generate_scenario, FactorMix, GeneratorConfig, ScenarioConfig};
use instab_core::measures::{instability, lin_measure, pair, sequence_measure, SequenceScope};
use instab_core::model::{Job, JobId, ProblemInstance, Schedule, Utility};
use instab_core::oracle::brute_optimal_schedule;
use proptest::prelude::*;

fn instance(seed: u64, jobs: u32, machines: u32) -> Arc<ProblemInstance> {
    let cfg = GeneratorConfig { n_jobs: jobs, n_machines: machines, seed, ..Default::default() };
    Arc::new(generate_instance(&cfg).unwrap())
}

fn policies(seed: u64) -> Vec<RepairPolicy> {
    let ls = |lambda, utility| {
        RepairPolicy::LocalSearch(LocalSearchParams {
            lambda,
            utility,
            decay: 0.95,
            include_frozen: false,
            iteration_budget: 200,
            seed,
        })
    };
    vec![
        RepairPolicy::RightShift,
        RepairPolicy::Regenerate(DispatchRule::Spt),
        RepairPolicy::Regenerate(DispatchRule::Edd),
        RepairPolicy::Regenerate(DispatchRule::Fcfs),
        ls(0.0, Utility::Makespan),
        ls(0.5, Utility::WeightedTardiness),
        ls(1.0, Utility::Makespan),
    ]
}

/// Replays a scenario under one policy, checking every step.
fn replay(seed: u64, policy: &RepairPolicy) -> Vec<Schedule> {
    let inst = instance(seed, 4, 4);
    let mut x = initial_schedule(&inst);
    let scenario =
        generate_scenario(&x, seed, &FactorMix::one_each(), &ScenarioConfig::default()).unwrap();
    let mut out = vec![x.clone()];
    for event in &scenario.events {
        let applied = apply_event(&x, event).unwrap();
        let y = repair(policy, &applied, &x).unwrap();
        assert!(y.is_valid(), "{} seed {seed}: {:?}", policy.label(), y.validate());
        for (k, s) in &applied.frozen.starts {
            assert_eq!(y.start(*k), Some(*s), "{} moved frozen {k}", policy.label());
        }
        assert!(y.starts().values().all(|&s| s >= event.t0 || applied.frozen.starts.values().any(|&f| f == s)));
        let p = pair(&x, &y).unwrap();
        if *policy == RepairPolicy::RightShift {
            assert_eq!(sequence_measure(&p, SequenceScope::PerMachine).total, 0.0);
            assert_eq!(lin_measure(&p).total, 0.0);
        }
        x = y;
        out.push(x.clone());
    }
    out
}

#[test]
fn every_policy_stays_feasible() {
    for seed in 0..15 {
        for policy in policies(seed) {
            replay(seed, &policy);
        }
    }
}

#[test]
fn repairs_are_deterministic() {
    for seed in 0..5 {
        for policy in policies(seed) {
            assert_eq!(replay(seed, &policy), replay(seed, &policy));
        }
    }
}

#[test]
fn right_shift_matches_longest_path_after_breakdown() {
    // a single job chain on three machines, back to back; machine 1 fails
    let inst = Arc::new(
        ProblemInstance::new(
            "chain",
            (0..3).map(instab_core::MachineId).collect(),
            vec![Job::from_routing(0, &[(0, 2), (1, 3), (2, 4)], None, 1)],
            50,
            vec![],
        )
        .unwrap(),
    );
    let x = initial_schedule(&inst);
    for d in 1..6 {
        let ev = RescheduleEvent {
            t0: 1,
            kind: EventKind::MachineDown { machine: instab_core::MachineId(1), from: 2, until: 2 + d },
        };
        let applied = apply_event(&x, &ev).unwrap();
        let y = right_shift_repair(&applied, &x).unwrap();
        let old: Vec<_> = x.starts().values().copied().collect();
        let new: Vec<_> = y.starts().values().copied().collect();
        assert_eq!(new, vec![old[0], old[1] + d, old[2] + d]);
    }
}

#[test]
fn cancel_partitions_by_start() {
    for seed in 0..10 {
        let inst = instance(seed, 4, 3);
        let x = initial_schedule(&inst);
        for t0 in [0, x.makespan() / 3, x.makespan() / 2, x.makespan() - 1] {
            for job in inst.jobs() {
                let ev = RescheduleEvent { t0, kind: EventKind::CancelJob(job.id) };
                let applied = apply_event(&x, &ev).unwrap();
                let (started, unstarted): (Vec<_>, Vec<_>) =
                    job.operations.iter().map(|o| o.key()).partition(|&k| x.start(k).unwrap() < t0);
                assert_eq!(applied.conflicts, unstarted);
                for k in &started {
                    assert!(applied.frozen.starts.contains_key(k));
                    assert!(applied.instance.operation(*k).is_some());
                }
                for k in &unstarted {
                    assert!(applied.instance.operation(*k).is_none());
                }
                let y = right_shift_repair(&applied, &x).unwrap();
                assert!(y.is_valid());
                assert_eq!(pair(&x, &y).unwrap().removed, unstarted);
            }
        }
    }
}

#[test]
fn local_search_never_worse_than_start() {
    for seed in 0..10 {
        let inst = instance(seed, 3, 3);
        let x = initial_schedule(&inst);
        let scenario = generate_scenario(
            &x,
            seed,
            &FactorMix { machine_down: 1, ..Default::default() },
            &ScenarioConfig::default(),
        )
        .unwrap();
        let applied = apply_event(&x, &scenario.events[0]).unwrap();
        let start = right_shift_repair(&applied, &x).unwrap();
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let params = LocalSearchParams {
                lambda,
                utility: Utility::Makespan,
                decay: 0.9,
                include_frozen: false,
                iteration_budget: 1,
                seed,
            };
            let f = |s: &Schedule| {
                let cfg = params.instability_config(applied.frozen.t0);
                let instab = instability(&pair(&x, s).unwrap(), &cfg).unwrap().total;
                lambda * s.makespan() as f64 + (1.0 - lambda) * instab
            };
            for budget in [1, 50, 1000] {
                let y = local_search_repair(&applied, &x, &LocalSearchParams { iteration_budget: budget, ..params })
                    .unwrap();
                assert!(y.is_valid());
                assert!(f(&y) <= f(&start) + 1e-9, "seed {seed} lambda {lambda} budget {budget}");
            }
        }
    }
}

#[test]
fn local_search_reaches_small_optimum() {
    // two jobs on two machines in crossing order
    let inst = Arc::new(
        ProblemInstance::new(
            "2x2",
            (0..2).map(instab_core::MachineId).collect(),
            vec![
                Job::from_routing(0, &[(0, 3), (1, 5)], None, 1),
                Job::from_routing(1, &[(1, 4), (0, 6)], None, 1),
            ],
            40,
            vec![],
        )
        .unwrap(),
    );
    let x = initial_schedule(&inst);
    let (_, optimum) = brute_optimal_schedule(&inst, Utility::Makespan).unwrap();
    let ev = RescheduleEvent { t0: 0, kind: EventKind::WeightChange { job: JobId(0), weight: 1 } };
    let applied = apply_event(&x, &ev).unwrap();
    let params = LocalSearchParams {
        lambda: 1.0,
        utility: Utility::Makespan,
        decay: 1.0,
        include_frozen: false,
        iteration_budget: 500,
        seed: 3,
    };
    let y = local_search_repair(&applied, &x, &params).unwrap();
    assert_eq!(y.makespan() as f64, optimum);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn validate_ignores_job_order(seed in 0u64..1000, shift in 0u64..5) {
        let inst = instance(seed, 4, 3);
        let x = initial_schedule(&inst);
        // perturb some starts so that violations exist
        let starts = x.starts().iter().enumerate()
            .map(|(i, (&k, &s))| (k, if i % 3 == 0 { s.saturating_sub(shift) } else { s }))
            .collect();
        let a = Schedule::new(inst.clone(), starts);
        let mut jobs = inst.jobs().to_vec();
        jobs.reverse();
        let permuted = Arc::new(ProblemInstance::new(
            inst.name(), inst.machines().iter().rev().copied().collect(), jobs, inst.horizon(), vec![],
        ).unwrap());
        let b = Schedule::new(permuted, a.starts().clone());
        prop_assert_eq!(a.validate(), b.validate());
    }

    #[test]
    fn makespan_is_max_completion(seed in 0u64..1000) {
        let x = initial_schedule(&instance(seed, 5, 4));
        prop_assert!(x.is_valid());
        prop_assert_eq!(x.makespan(), *x.completion_times().values().max().unwrap());
    }
}
