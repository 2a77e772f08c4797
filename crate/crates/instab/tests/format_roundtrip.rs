use std::sync::Arc;

use instab::format;
use instab_core::dynamics::initial_schedule;
use instab_core::generate::{generate_instance, generate_scenario, FactorMix, GeneratorConfig, ScenarioConfig};
use instab_core::model::Schedule;
use proptest::prelude::*;
use tempfile::TempDir;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Writing and reading back preserves the schedule and its violations,
    /// feasible or not.
    #[test]
    fn schedule_files_preserve_violations(seed in 0u64..500, jitter in prop::collection::vec(-6i64..6, 20)) {
        let tmp = TempDir::new().unwrap();
        let inst = Arc::new(generate_instance(&GeneratorConfig { n_jobs: 4, n_machines: 5, seed, ..Default::default() }).unwrap());
        let base = initial_schedule(&inst);
        let starts = base.starts().iter().zip(jitter.iter().cycle())
            .map(|((&k, &s), &j)| (k, s.saturating_add_signed(j)))
            .collect();
        let x = Schedule::new(inst.clone(), starts);

        format::write_instance(&tmp.path().join("i.json"), &inst).unwrap();
        format::write_schedule(&tmp.path().join("x.json"), &x).unwrap();
        let inst2 = Arc::new(format::read_instance(&tmp.path().join("i.json")).unwrap());
        prop_assert_eq!(&*inst2, &*inst);
        let y = format::read_schedule(&tmp.path().join("x.json"), inst2).unwrap();
        prop_assert_eq!(y.starts(), x.starts());
        prop_assert_eq!(y.validate(), x.validate());
    }

    #[test]
    fn event_files_round_trip(seed in 0u64..500) {
        let tmp = TempDir::new().unwrap();
        let inst = Arc::new(generate_instance(&GeneratorConfig { n_jobs: 4, n_machines: 3, seed, ..Default::default() }).unwrap());
        let x = initial_schedule(&inst);
        let mix = FactorMix { machine_down: 2, new_job: 1, rush_job: 1, cancel_job: 2, due_date_change: 1, weight_change: 1 };
        let events = generate_scenario(&x, seed, &mix, &ScenarioConfig::default()).unwrap().events;
        let path = tmp.path().join("ev.json");
        format::write_events(&path, &events).unwrap();
        prop_assert_eq!(format::read_events(&path).unwrap(), events);
    }
}
