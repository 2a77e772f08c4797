//! Seeded generators for job-shop instances and disturbance scenarios.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{EventKind, RescheduleEvent};
use crate::model::{Job, JobId, MachineId, ModelError, ProblemInstance, Schedule, Time};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub n_jobs: u32,
    pub n_machines: u32,
    /// Inclusive duration range.
    pub duration_lo: Time,
    pub duration_hi: Time,
    /// Due date = total job processing × tightness (rounded up).
    pub tightness: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { n_jobs: 6, n_machines: 6, duration_lo: 1, duration_hi: 10, tightness: 1.5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerateError {
    NoJobs,
    NoMachines,
    BadDurationRange { lo: Time, hi: Time },
    BadTightness(f64),
    BadDowntimeRange { lo: Time, hi: Time },
    Model(ModelError),
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoJobs => f.write_str("at least one job is required"),
            Self::NoMachines => f.write_str("at least one machine is required"),
            Self::BadDurationRange { lo, hi } => {
                write!(f, "duration range [{lo}, {hi}] needs 1 <= lo <= hi")
            }
            Self::BadTightness(t) => write!(f, "tightness must be positive and finite, got {t}"),
            Self::BadDowntimeRange { lo, hi } => write!(f, "downtime range [{lo}, {hi}] needs lo <= hi"),
            Self::Model(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for GenerateError {}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.n_jobs == 0 {
            return Err(GenerateError::NoJobs);
        }
        if self.n_machines == 0 {
            return Err(GenerateError::NoMachines);
        }
        check_durations(self.duration_lo, self.duration_hi)?;
        check_tightness(self.tightness)
    }
}

fn check_durations(lo: Time, hi: Time) -> Result<(), GenerateError> {
    if lo == 0 || hi < lo {
        return Err(GenerateError::BadDurationRange { lo, hi });
    }
    Ok(())
}

fn check_tightness(t: f64) -> Result<(), GenerateError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(GenerateError::BadTightness(t));
    }
    Ok(())
}

fn due_after(release: Time, processing: Time, tightness: f64) -> Time {
    release + libm::ceil(processing as f64 * tightness) as Time
}

/// A job visiting every machine exactly once in random order.
#[allow(clippy::too_many_arguments)]
fn random_job(
    rng: &mut ChaCha8Rng,
    id: u32,
    machines: &[MachineId],
    lo: Time,
    hi: Time,
    release: Time,
    tightness: f64,
    weight: u64,
) -> Job {
    let mut order: Vec<u32> = machines.iter().map(|m| m.0).collect();
    order.shuffle(rng);
    let routing: Vec<(u32, Time)> = order.into_iter().map(|m| (m, rng.gen_range(lo..=hi))).collect();
    let mut job = Job::from_routing(id, &routing, None, weight);
    job.due_date = Some(due_after(release, job.total_processing(), tightness));
    job
}

/// Classic job shop: every job visits every machine once. The planning
/// horizon is the total processing time, an upper bound on any non-delay
/// makespan.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<ProblemInstance, GenerateError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let machines: Vec<MachineId> = (0..cfg.n_machines).map(MachineId).collect();
    let jobs: Vec<Job> = (0..cfg.n_jobs)
        .map(|j| random_job(&mut rng, j, &machines, cfg.duration_lo, cfg.duration_hi, 0, cfg.tightness, 1))
        .collect();
    let horizon = jobs.iter().map(Job::total_processing).sum::<Time>().max(1);
    let name = format!("js{}x{}-s{}", cfg.n_jobs, cfg.n_machines, cfg.seed);
    ProblemInstance::new(name, machines, jobs, horizon, Vec::new()).map_err(GenerateError::Model)
}

/// Number of events to draw per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FactorMix {
    pub machine_down: u32,
    pub new_job: u32,
    pub rush_job: u32,
    pub cancel_job: u32,
    pub due_date_change: u32,
    pub weight_change: u32,
}

impl FactorMix {
    /// One event of every kind.
    pub fn one_each() -> Self {
        Self {
            machine_down: 1,
            new_job: 1,
            rush_job: 1,
            cancel_job: 1,
            due_date_change: 1,
            weight_change: 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.machine_down
            + self.new_job
            + self.rush_job
            + self.cancel_job
            + self.due_date_change
            + self.weight_change
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Inclusive range of downtime lengths.
    pub downtime_lo: Time,
    pub downtime_hi: Time,
    /// Maximum delay between `t0` and the start of a downtime.
    pub downtime_lead: Time,
    /// Durations and due-date tightness of arriving jobs.
    pub duration_lo: Time,
    pub duration_hi: Time,
    pub tightness: f64,
    /// Upper bound for drawn job weights.
    pub max_weight: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            downtime_lo: 2,
            downtime_hi: 10,
            downtime_lead: 5,
            duration_lo: 1,
            duration_hi: 10,
            tightness: 1.5,
            max_weight: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    /// Ordered by `t0`.
    pub events: Vec<RescheduleEvent>,
    /// Events that could not be drawn, e.g. a cancellation with no job left.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    MachineDown,
    NewJob,
    RushJob,
    CancelJob,
    DueDateChange,
    WeightChange,
}

/// Draws a disturbance scenario for `instance` planned as `initial`.
///
/// Event times are uniform over the initial schedule's active span
/// `[0, makespan)` (capped by the horizon). Cancellations and due-date or
/// weight changes target original jobs not canceled earlier in the scenario.
pub fn generate_scenario(
    initial: &Schedule,
    seed: u64,
    mix: &FactorMix,
    cfg: &ScenarioConfig,
) -> Result<Scenario, GenerateError> {
    check_durations(cfg.duration_lo, cfg.duration_hi)?;
    check_tightness(cfg.tightness)?;
    if cfg.downtime_hi < cfg.downtime_lo {
        return Err(GenerateError::BadDowntimeRange { lo: cfg.downtime_lo, hi: cfg.downtime_hi });
    }
    let instance = initial.instance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = initial.makespan().min(instance.horizon()).max(1);

    let counts = [
        (Kind::MachineDown, mix.machine_down),
        (Kind::NewJob, mix.new_job),
        (Kind::RushJob, mix.rush_job),
        (Kind::CancelJob, mix.cancel_job),
        (Kind::DueDateChange, mix.due_date_change),
        (Kind::WeightChange, mix.weight_change),
    ];
    let mut slots: Vec<(Time, Kind)> = Vec::new();
    for (kind, count) in counts {
        for _ in 0..count {
            slots.push((rng.gen_range(0..span), kind));
        }
    }
    slots.sort();

    let machines = instance.machines();
    let mut live: Vec<JobId> = instance.jobs().iter().map(|j| j.id).collect();
    let mut next_id = live.iter().map(|j| j.0 + 1).max().unwrap_or(0);
    let max_weight = cfg.max_weight.max(1);
    let mut scenario = Scenario::default();

    for (t0, kind) in slots {
        let kind = match kind {
            Kind::MachineDown => {
                let machine = *machines.choose(&mut rng).expect("instance has machines");
                let from = t0 + rng.gen_range(0..=cfg.downtime_lead);
                let until = from + rng.gen_range(cfg.downtime_lo..=cfg.downtime_hi);
                EventKind::MachineDown { machine, from, until }
            }
            Kind::NewJob | Kind::RushJob => {
                let rush = kind == Kind::RushJob;
                let weight = if rush { 1 } else { rng.gen_range(1..=max_weight) };
                let tightness = if rush { cfg.tightness.min(1.0) } else { cfg.tightness };
                let job = random_job(
                    &mut rng,
                    next_id,
                    machines,
                    cfg.duration_lo,
                    cfg.duration_hi,
                    t0,
                    tightness,
                    weight,
                );
                next_id += 1;
                if rush {
                    EventKind::RushJob(job)
                } else {
                    EventKind::NewJob(job)
                }
            }
            Kind::CancelJob | Kind::DueDateChange | Kind::WeightChange => {
                if live.is_empty() {
                    scenario.warnings.push(format!("t0={t0}: no job left for {kind:?}, skipped"));
                    continue;
                }
                let idx = rng.gen_range(0..live.len());
                let job = live[idx];
                match kind {
                    Kind::CancelJob => {
                        live.remove(idx);
                        EventKind::CancelJob(job)
                    }
                    Kind::DueDateChange => {
                        let p = instance.job(job).map_or(1, |j| j.total_processing());
                        EventKind::DueDateChange { job, due_date: Some(t0 + rng.gen_range(0..=2 * p)) }
                    }
                    _ => EventKind::WeightChange { job, weight: rng.gen_range(1..=max_weight) },
                }
            }
        };
        scenario.events.push(RescheduleEvent { t0, kind });
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_schedule;
    use alloc::sync::Arc;

    #[test]
    fn single_op_instance() {
        let cfg = GeneratorConfig { n_jobs: 1, n_machines: 1, ..Default::default() };
        assert_eq!(generate_instance(&cfg).unwrap().operation_count(), 1);
    }

    #[test]
    fn shape_and_determinism() {
        let cfg = GeneratorConfig { seed: 42, ..Default::default() };
        let a = generate_instance(&cfg).unwrap();
        assert_eq!(a.operation_count(), 36);
        assert_eq!(a, generate_instance(&cfg).unwrap());
        for job in a.jobs() {
            let mut ms: Vec<u32> = job.operations.iter().map(|o| o.machine.0).collect();
            ms.sort_unstable();
            assert_eq!(ms, (0..6).collect::<Vec<_>>());
            assert!(job.operations.iter().all(|o| (1..=10).contains(&o.duration)));
            assert_eq!(job.due_date, Some(due_after(0, job.total_processing(), 1.5)));
        }
        let other = generate_instance(&GeneratorConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.jobs(), other.jobs());
    }

    #[test]
    fn rejects_bad_config() {
        let base = GeneratorConfig::default();
        assert!(generate_instance(&GeneratorConfig { duration_lo: 0, ..base }).is_err());
        assert!(generate_instance(&GeneratorConfig { duration_hi: 0, duration_lo: 3, ..base }).is_err());
        assert!(generate_instance(&GeneratorConfig { tightness: 0.0, ..base }).is_err());
        assert!(generate_instance(&GeneratorConfig { n_jobs: 0, ..base }).is_err());
    }

    fn initial(seed: u64) -> Schedule {
        let cfg = GeneratorConfig { seed, ..Default::default() };
        initial_schedule(&Arc::new(generate_instance(&cfg).unwrap()))
    }

    #[test]
    fn scenario_counts() {
        let x = initial(1);
        let cfg = ScenarioConfig::default();
        assert!(generate_scenario(&x, 3, &FactorMix::default(), &cfg).unwrap().events.is_empty());
        let one = FactorMix { machine_down: 1, ..Default::default() };
        let s = generate_scenario(&x, 3, &one, &cfg).unwrap();
        assert_eq!(s.events.len(), 1);
        let e = &s.events[0];
        assert!(e.t0 < x.makespan());
        match e.kind {
            EventKind::MachineDown { from, until, .. } => {
                assert!(from >= e.t0 && until >= from + cfg.downtime_lo)
            }
            _ => panic!("expected machine_down"),
        }
        let all = generate_scenario(&x, 3, &FactorMix::one_each(), &cfg).unwrap();
        assert_eq!(all.events.len(), 6);
        assert!(all.events.windows(2).all(|w| w[0].t0 <= w[1].t0));
        assert_eq!(all, generate_scenario(&x, 3, &FactorMix::one_each(), &cfg).unwrap());
    }

    #[test]
    fn cancellations_run_out() {
        let cfg = GeneratorConfig { n_jobs: 2, n_machines: 2, seed: 5, ..Default::default() };
        let x = initial_schedule(&Arc::new(generate_instance(&cfg).unwrap()));
        let mix = FactorMix { cancel_job: 3, ..Default::default() };
        let s = generate_scenario(&x, 0, &mix, &ScenarioConfig::default()).unwrap();
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.warnings.len(), 1);
    }
}
