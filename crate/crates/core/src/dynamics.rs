//! Rescheduling events and predictive-reactive repair.
//!
//! An event occurring at `t0` revises the instance ([`apply_event`]). Every
//! operation that started before `t0` is frozen, except an operation whose
//! machine breaks down while it is still running: that one is discarded and
//! repeated in full after the downtime. A repair policy then builds the
//! revised schedule around the frozen prefix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{closeness, delta_start, impact, InstabilityConfig, MeasureError};
use crate::model::{
    Downtime, Job, JobId, MachineId, ModelError, OpKey, ProblemInstance, Schedule, Time, Utility,
    Violation,
};
use crate::sequencing::Layout;

/// A disturbance ("rescheduling factor").
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Breakdown or operator absence: `machine` is unavailable on `[from, until)`.
    MachineDown { machine: MachineId, from: Time, until: Time },
    NewJob(Job),
    /// A new job whose weight is raised above every existing weight.
    RushJob(Job),
    CancelJob(JobId),
    DueDateChange { job: JobId, due_date: Option<Time> },
    WeightChange { job: JobId, weight: u64 },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MachineDown { .. } => "machine_down",
            Self::NewJob(_) => "new_job",
            Self::RushJob(_) => "rush_job",
            Self::CancelJob(_) => "cancel_job",
            Self::DueDateChange { .. } => "due_date_change",
            Self::WeightChange { .. } => "weight_change",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RescheduleEvent {
    pub t0: Time,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    UnknownJob(JobId),
    DuplicateJob(JobId),
    UnknownMachine(MachineId),
    /// Downtime must satisfy `t0 ≤ from ≤ until`.
    BadDowntime { t0: Time, from: Time, until: Time },
    T0OutOfHorizon { t0: Time, horizon: Time },
    InvalidSchedule(Vec<Violation>),
    Model(ModelError),
    Measure(MeasureError),
    InvalidLambda(f64),
    ZeroBudget,
    /// Fixed machine sequences contradict job precedence.
    CyclicSequences,
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownJob(j) => write!(f, "event references unknown job {j}"),
            Self::DuplicateJob(j) => write!(f, "job {j} already exists"),
            Self::UnknownMachine(m) => write!(f, "event references unknown machine {m}"),
            Self::BadDowntime { t0, from, until } => {
                write!(f, "downtime [{from}, {until}) invalid for event at t0 = {t0}")
            }
            Self::T0OutOfHorizon { t0, horizon } => {
                write!(f, "event time {t0} outside planning horizon [0, {horizon}]")
            }
            Self::InvalidSchedule(v) => {
                write!(f, "schedule is infeasible ({} violations", v.len())?;
                if let Some(first) = v.first() {
                    write!(f, ", first: {first}")?;
                }
                f.write_str(")")
            }
            Self::Model(e) => write!(f, "revised instance is invalid: {e}"),
            Self::Measure(e) => e.fmt(f),
            Self::InvalidLambda(l) => write!(f, "lambda must lie in [0, 1], got {l}"),
            Self::ZeroBudget => f.write_str("iteration budget must be at least 1"),
            Self::CyclicSequences => f.write_str("machine sequences contradict job precedence"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<ModelError> for DynamicsError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<MeasureError> for DynamicsError {
    fn from(e: MeasureError) -> Self {
        Self::Measure(e)
    }
}

/// Starts that no repair may change.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrozenPrefix {
    pub t0: Time,
    pub starts: BTreeMap<OpKey, Time>,
    /// Frozen operations still running at `t0`.
    pub in_progress: BTreeSet<OpKey>,
}

impl FrozenPrefix {
    /// Nothing frozen; repairs may place operations from `t0` on.
    pub fn empty(t0: Time) -> Self {
        Self { t0, ..Self::default() }
    }
}

/// Result of [`apply_event`].
#[derive(Debug, Clone)]
pub struct AppliedEvent {
    pub instance: Arc<ProblemInstance>,
    pub frozen: FrozenPrefix,
    /// Operations whose current start violates the revised constraints:
    /// overlapping a new downtime, or removed with a canceled job.
    pub conflicts: Vec<OpKey>,
}

/// Revises the instance for `event` and splits `schedule` at `event.t0`.
pub fn apply_event(schedule: &Schedule, event: &RescheduleEvent) -> Result<AppliedEvent, DynamicsError> {
    let violations = schedule.validate();
    if !violations.is_empty() {
        return Err(DynamicsError::InvalidSchedule(violations));
    }
    let inst = schedule.instance();
    let t0 = event.t0;
    if t0 > inst.horizon() {
        return Err(DynamicsError::T0OutOfHorizon { t0, horizon: inst.horizon() });
    }

    let mut frozen = FrozenPrefix::empty(t0);
    for op in inst.operations() {
        let s = schedule.start(op.key()).expect("validated");
        if s < t0 {
            frozen.starts.insert(op.key(), s);
            if s + op.duration > t0 {
                frozen.in_progress.insert(op.key());
            }
        }
    }

    let mut jobs: Vec<Job> = inst.jobs().to_vec();
    let mut downtimes: Vec<Downtime> = inst.downtimes().to_vec();
    let mut conflicts = Vec::new();
    let find = |jobs: &[Job], id: JobId| {
        jobs.iter().position(|j| j.id == id).ok_or(DynamicsError::UnknownJob(id))
    };

    match &event.kind {
        &EventKind::MachineDown { machine, from, until } => {
            if !inst.machines().contains(&machine) {
                return Err(DynamicsError::UnknownMachine(machine));
            }
            if from < t0 || from > until {
                return Err(DynamicsError::BadDowntime { t0, from, until });
            }
            let window = Downtime { machine, from, until };
            downtimes.push(window);
            for op in inst.operations().filter(|op| op.machine == machine) {
                let key = op.key();
                let s = schedule.start(key).expect("validated");
                let running = frozen.in_progress.contains(&key);
                if (s >= t0 || running) && window.overlaps(s, s + op.duration) {
                    conflicts.push(key);
                    if running {
                        frozen.starts.remove(&key);
                        frozen.in_progress.remove(&key);
                    }
                }
            }
        }
        EventKind::NewJob(job) | EventKind::RushJob(job) => {
            if inst.job(job.id).is_some() {
                return Err(DynamicsError::DuplicateJob(job.id));
            }
            let mut job = job.clone();
            if matches!(event.kind, EventKind::RushJob(_)) {
                let top = jobs.iter().map(|j| j.weight).max().unwrap_or(0);
                job.weight = job.weight.max(top + 1);
            }
            jobs.push(job);
        }
        &EventKind::CancelJob(id) => {
            let i = find(&jobs, id)?;
            let job = &mut jobs[i];
            let started = job
                .operations
                .iter()
                .take_while(|op| frozen.starts.contains_key(&op.key()))
                .count();
            conflicts.extend(job.operations[started..].iter().map(|op| op.key()));
            if started == 0 {
                jobs.remove(i);
            } else {
                job.operations.truncate(started);
                job.due_date = None;
            }
        }
        &EventKind::DueDateChange { job, due_date } => {
            let i = find(&jobs, job)?;
            jobs[i].due_date = due_date;
        }
        &EventKind::WeightChange { job, weight } => {
            let i = find(&jobs, job)?;
            jobs[i].weight = weight;
        }
    }

    let revised = ProblemInstance::new(
        inst.name(),
        inst.machines().to_vec(),
        jobs,
        inst.horizon(),
        downtimes,
    )?
    .with_name(format!("{}@{}", inst.name(), t0));
    conflicts.sort_unstable();
    Ok(AppliedEvent { instance: Arc::new(revised), frozen, conflicts })
}

fn fixed_starts(layout: &Layout, frozen: &FrozenPrefix) -> Vec<Option<Time>> {
    layout.keys.iter().map(|k| frozen.starts.get(k).copied()).collect()
}

/// Keeps every machine sequence and delays each unfrozen operation by the
/// minimum needed to restore feasibility. New operations are appended to the
/// end of their machine's sequence. No operation ever moves earlier.
pub fn right_shift_repair(applied: &AppliedEvent, x: &Schedule) -> Result<Schedule, DynamicsError> {
    let layout = Layout::new(&applied.instance);
    let sequences = layout.sequences_from(x);
    let fixed = fixed_starts(&layout, &applied.frozen);
    let t0 = applied.frozen.t0;
    let lower: Vec<Time> =
        layout.keys.iter().map(|&k| x.start(k).map_or(t0, |s| s.max(t0))).collect();
    let starts =
        layout.evaluate(&sequences, &fixed, &lower).ok_or(DynamicsError::CyclicSequences)?;
    Ok(Schedule::new(applied.instance.clone(), layout.to_map(&starts)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchRule {
    /// Shortest processing time.
    Spt,
    /// Earliest job due date; jobs without one go last.
    Edd,
    /// Earliest start in the reference schedule; unreferenced operations last.
    Fcfs,
}

impl DispatchRule {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spt => "spt",
            Self::Edd => "edd",
            Self::Fcfs => "fcfs",
        }
    }
}

/// Non-delay list scheduling of every unfrozen operation from `frozen.t0`.
///
/// Repeatedly takes the machine that can start an available operation
/// earliest and, among the operations it can start at that moment, picks one
/// by `rule` (ties by job id, then operation index). `reference` feeds the
/// FCFS rule.
pub fn dispatch_regenerate(
    instance: &Arc<ProblemInstance>,
    frozen: &FrozenPrefix,
    rule: DispatchRule,
    reference: Option<&Schedule>,
) -> Schedule {
    let layout = Layout::new(instance);
    let n = layout.len();
    let t0 = frozen.t0;
    let mut start: Vec<Option<Time>> = fixed_starts(&layout, frozen);
    let mut machine_ready = vec![t0; layout.machine_count()];
    for (i, s) in start.iter().enumerate() {
        if let Some(s) = *s {
            let m = layout.machine[i];
            machine_ready[m] = machine_ready[m].max(s + layout.duration[i]);
        }
    }
    let due: BTreeMap<JobId, Option<Time>> =
        instance.jobs().iter().map(|j| (j.id, j.due_date)).collect();
    let priority = |i: usize| -> (Time, OpKey) {
        let key = layout.keys[i];
        let primary = match rule {
            DispatchRule::Spt => layout.duration[i],
            DispatchRule::Edd => due[&key.job].unwrap_or(Time::MAX),
            DispatchRule::Fcfs => reference.and_then(|r| r.start(key)).unwrap_or(Time::MAX),
        };
        (primary, key)
    };

    loop {
        // first unscheduled operation of every job whose predecessor is placed
        let mut best: Option<(Time, usize)> = None;
        let mut available: Vec<(usize, Time)> = Vec::new();
        for i in 0..n {
            if start[i].is_some() {
                continue;
            }
            let job_ready = match layout.job_pred[i] {
                None => t0,
                Some(p) => match start[p] {
                    Some(s) => s + layout.duration[p],
                    None => continue,
                },
            };
            let m = layout.machine[i];
            let est = layout.avoid_downtime(m, job_ready.max(machine_ready[m]).max(t0), layout.duration[i]);
            available.push((i, est));
            if best.is_none_or(|(t, bm)| (est, m) < (t, bm)) {
                best = Some((est, m));
            }
        }
        let Some((t_star, m_star)) = best else { break };
        let chosen = available
            .iter()
            .filter(|&&(i, est)| layout.machine[i] == m_star && est == t_star)
            .map(|&(i, _)| i)
            .min_by_key(|&i| priority(i))
            .expect("machine with minimum start has a candidate");
        start[chosen] = Some(t_star);
        machine_ready[m_star] = t_star + layout.duration[chosen];
    }

    let starts = layout
        .keys
        .iter()
        .zip(&start)
        .map(|(&k, s)| (k, s.expect("all operations dispatched")))
        .collect();
    Schedule::new(instance.clone(), starts)
}

/// Non-delay FCFS schedule from time 0, ties by job id: the baseline plan.
pub fn initial_schedule(instance: &Arc<ProblemInstance>) -> Schedule {
    dispatch_regenerate(instance, &FrozenPrefix::empty(0), DispatchRule::Fcfs, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSearchParams {
    /// Weight of utility against instability, in `[0, 1]`.
    pub lambda: f64,
    pub utility: Utility,
    /// Decay base of the instability term; `t0` is taken from the frozen prefix.
    pub decay: f64,
    pub include_frozen: bool,
    /// Maximum number of neighbor evaluations.
    pub iteration_budget: u64,
    pub seed: u64,
}

impl LocalSearchParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.lambda >= 0.0 && self.lambda <= 1.0) {
            return Err(DynamicsError::InvalidLambda(self.lambda));
        }
        if self.iteration_budget == 0 {
            return Err(DynamicsError::ZeroBudget);
        }
        InstabilityConfig::new(self.decay, 0).validate()?;
        Ok(())
    }

    pub fn instability_config(&self, t0: Time) -> InstabilityConfig {
        InstabilityConfig { decay: self.decay, t0, include_frozen: self.include_frozen }
    }
}

/// `λ · utility(x') + (1 − λ) · instab(x, x')` over index-aligned starts.
struct Objective<'a> {
    layout: &'a Layout,
    reference: Vec<Option<Time>>,
    params: LocalSearchParams,
    cfg: InstabilityConfig,
}

impl Objective<'_> {
    fn value(&self, starts: &[Time]) -> f64 {
        let utility = match self.params.utility {
            Utility::Makespan => self.layout.makespan(starts) as f64,
            Utility::WeightedTardiness => self.layout.weighted_tardiness(starts) as f64,
        };
        let mut instab = 0.0;
        for (i, &sp) in starts.iter().enumerate() {
            let Some(s) = self.reference[i] else { continue };
            let dist = closeness(s, sp, self.cfg.t0);
            let delta = delta_start(s, sp);
            if delta == 0 || (dist < 0 && !self.cfg.include_frozen) {
                continue;
            }
            instab += impact(dist, self.cfg.decay) * delta as f64;
        }
        self.params.lambda * utility + (1.0 - self.params.lambda) * instab
    }
}

/// Adjacent pairs `(machine, position)` in which neither operation is frozen.
fn movable_pairs(sequences: &[Vec<usize>], fixed: &[Option<Time>]) -> Vec<(usize, usize)> {
    let mut moves = Vec::new();
    for (m, seq) in sequences.iter().enumerate() {
        for p in 0..seq.len().saturating_sub(1) {
            if fixed[seq[p]].is_none() && fixed[seq[p + 1]].is_none() {
                moves.push((m, p));
            }
        }
    }
    moves
}

/// Weighted utility/instability descent starting from [`right_shift_repair`].
///
/// The neighborhood swaps two adjacent unfrozen operations in one machine
/// sequence; starts are then recomputed as early as possible from `t0`. The
/// unchanged sequences retimed that way are tried first.
/// Neighbors are visited in a seeded random order and the first strict
/// improvement is taken. At a local optimum the best solution found so far is
/// perturbed by a few random adjacent swaps and the descent restarts, until
/// `iteration_budget` evaluations are spent or no move exists. Returns the
/// best solution found, never worse than the start.
pub fn local_search_repair(
    applied: &AppliedEvent,
    x: &Schedule,
    params: &LocalSearchParams,
) -> Result<Schedule, DynamicsError> {
    params.validate()?;
    let start = right_shift_repair(applied, x)?;
    let layout = Layout::new(&applied.instance);
    let t0 = applied.frozen.t0;
    let fixed = fixed_starts(&layout, &applied.frozen);
    let lower = vec![t0; layout.len()];
    let objective = Objective {
        layout: &layout,
        reference: layout.keys.iter().map(|&k| x.start(k)).collect(),
        params: *params,
        cfg: params.instability_config(t0),
    };

    let mut sequences = layout.sequences_from(&start);
    let mut current: Vec<Time> = layout.keys.iter().map(|&k| start.starts()[&k]).collect();
    let mut current_value = objective.value(&current);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluations = 0u64;
    let budget = params.iteration_budget;

    // the start's own sequences, timed as early as possible, count as the first neighbor
    evaluations += 1;
    if let Some(candidate) = layout.evaluate(&sequences, &fixed, &lower) {
        let value = objective.value(&candidate);
        if value < current_value {
            current = candidate;
            current_value = value;
        }
    }
    let mut best = current.clone();
    let mut best_value = current_value;
    let mut best_sequences = sequences.clone();

    loop {
        // first-improvement descent from the current sequences
        'descent: loop {
            let mut moves = movable_pairs(&sequences, &fixed);
            moves.shuffle(&mut rng);
            for (m, p) in moves {
                if evaluations >= budget {
                    break 'descent;
                }
                evaluations += 1;
                sequences[m].swap(p, p + 1);
                if let Some(candidate) = layout.evaluate(&sequences, &fixed, &lower) {
                    let value = objective.value(&candidate);
                    if value < current_value {
                        current = candidate;
                        current_value = value;
                        continue 'descent;
                    }
                }
                sequences[m].swap(p, p + 1);
            }
            break;
        }
        if current_value < best_value {
            best.clone_from(&current);
            best_value = current_value;
            best_sequences.clone_from(&sequences);
        }
        if evaluations >= budget {
            break;
        }

        // local optimum with budget left: kick the best solution and descend again
        let moves = movable_pairs(&best_sequences, &fixed);
        if moves.is_empty() {
            break;
        }
        sequences.clone_from(&best_sequences);
        for _ in 0..rng.gen_range(2..=4) {
            let (m, p) = moves[rng.gen_range(0..moves.len())];
            sequences[m].swap(p, p + 1);
        }
        evaluations += 1;
        match layout.evaluate(&sequences, &fixed, &lower) {
            Some(kicked) => {
                current_value = objective.value(&kicked);
                current = kicked;
            }
            None => {
                sequences.clone_from(&best_sequences);
                current.clone_from(&best);
                current_value = best_value;
            }
        }
    }

    Ok(Schedule::new(applied.instance.clone(), layout.to_map(&best)))
}

/// How a revised schedule is produced after an event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RepairPolicy {
    RightShift,
    Regenerate(DispatchRule),
    LocalSearch(LocalSearchParams),
}

impl RepairPolicy {
    pub fn label(&self) -> alloc::string::String {
        match self {
            Self::RightShift => "right_shift".into(),
            Self::Regenerate(rule) => format!("regenerate_{}", rule.name()),
            Self::LocalSearch(p) => format!("local_search_{}_l{}", p.utility.name(), p.lambda),
        }
    }
}

/// Runs `policy` on an applied event, `x` being the schedule before the event.
pub fn repair(policy: &RepairPolicy, applied: &AppliedEvent, x: &Schedule) -> Result<Schedule, DynamicsError> {
    match policy {
        RepairPolicy::RightShift => right_shift_repair(applied, x),
        RepairPolicy::Regenerate(rule) => {
            Ok(dispatch_regenerate(&applied.instance, &applied.frozen, *rule, Some(x)))
        }
        RepairPolicy::LocalSearch(params) => local_search_repair(applied, x, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{lin_measure, pair, sequence_measure, SequenceScope};

    fn inst(jobs: Vec<Job>, machines: u32) -> Arc<ProblemInstance> {
        Arc::new(
            ProblemInstance::new("t", (0..machines).map(MachineId).collect(), jobs, 100, vec![])
                .unwrap(),
        )
    }

    fn sched(i: &Arc<ProblemInstance>, starts: &[((u32, u32), Time)]) -> Schedule {
        Schedule::new(i.clone(), starts.iter().map(|&((j, k), s)| (OpKey::new(j, k), s)).collect())
    }

    /// One job of three back-to-back operations on machines 0, 1, 2, plus a
    /// second job on machine 0 after it.
    fn chain() -> Schedule {
        let i = inst(
            vec![
                Job::from_routing(0, &[(0, 3), (1, 2), (2, 4)], Some(20), 1),
                Job::from_routing(1, &[(0, 2)], Some(5), 2),
            ],
            3,
        );
        sched(&i, &[((0, 1), 0), ((0, 2), 3), ((0, 3), 5), ((1, 1), 3)])
    }

    #[test]
    fn due_date_change_has_no_conflicts() {
        let x = chain();
        let ev = RescheduleEvent { t0: 1, kind: EventKind::DueDateChange { job: JobId(0), due_date: Some(50) } };
        let a = apply_event(&x, &ev).unwrap();
        assert!(a.conflicts.is_empty());
        assert_eq!(a.instance.job(JobId(0)).unwrap().due_date, Some(50));
        let y = right_shift_repair(&a, &x).unwrap();
        assert_eq!(y.starts(), x.starts());
    }

    #[test]
    fn breakdown_conflict_and_cascade() {
        let x = chain();
        // machine 1 down on [4, 8): O(0,2) at [3,5) must move to 8, delaying O(0,3) by 5 as well
        let ev = RescheduleEvent {
            t0: 3,
            kind: EventKind::MachineDown { machine: MachineId(1), from: 4, until: 8 },
        };
        let a = apply_event(&x, &ev).unwrap();
        assert_eq!(a.conflicts, vec![OpKey::new(0, 2)]);
        let y = right_shift_repair(&a, &x).unwrap();
        assert!(y.is_valid(), "{:?}", y.validate());
        assert_eq!(y.start(OpKey::new(0, 2)), Some(8));
        assert_eq!(y.start(OpKey::new(0, 3)), Some(10));
        assert_eq!(y.start(OpKey::new(0, 1)), Some(0));
        assert_eq!(y.start(OpKey::new(1, 1)), Some(3));
        let p = pair(&x, &y).unwrap();
        assert_eq!(lin_measure(&p).total, 0.0);
        assert_eq!(sequence_measure(&p, SequenceScope::PerMachine).total, 0.0);
    }

    #[test]
    fn in_progress_op_on_failed_machine_is_repeated() {
        let x = chain();
        let ev = RescheduleEvent {
            t0: 1,
            kind: EventKind::MachineDown { machine: MachineId(0), from: 2, until: 6 },
        };
        let a = apply_event(&x, &ev).unwrap();
        assert!(a.frozen.starts.is_empty());
        assert!(a.conflicts.contains(&OpKey::new(0, 1)));
        let y = right_shift_repair(&a, &x).unwrap();
        assert!(y.is_valid());
        assert_eq!(y.start(OpKey::new(0, 1)), Some(6));
        assert_eq!(y.start(OpKey::new(1, 1)), Some(9));
    }

    #[test]
    fn cancel_partitions_started_ops() {
        let x = chain();
        let ev = RescheduleEvent { t0: 4, kind: EventKind::CancelJob(JobId(0)) };
        let a = apply_event(&x, &ev).unwrap();
        let job = a.instance.job(JobId(0)).unwrap();
        assert_eq!(job.operations.len(), 2);
        assert_eq!(a.conflicts, vec![OpKey::new(0, 3)]);
        assert!(a.frozen.starts.contains_key(&OpKey::new(0, 2)));
        assert!(a.frozen.in_progress.contains(&OpKey::new(0, 2)));

        let ev = RescheduleEvent { t0: 0, kind: EventKind::CancelJob(JobId(0)) };
        let a = apply_event(&x, &ev).unwrap();
        assert!(a.instance.job(JobId(0)).is_none());
        assert_eq!(a.conflicts.len(), 3);
    }

    #[test]
    fn unknown_references_are_errors() {
        let x = chain();
        for kind in [
            EventKind::CancelJob(JobId(9)),
            EventKind::WeightChange { job: JobId(9), weight: 3 },
            EventKind::DueDateChange { job: JobId(9), due_date: None },
        ] {
            assert!(matches!(
                apply_event(&x, &RescheduleEvent { t0: 0, kind }),
                Err(DynamicsError::UnknownJob(_))
            ));
        }
        let dup = EventKind::NewJob(Job::from_routing(1, &[(0, 1)], None, 1));
        assert!(matches!(
            apply_event(&x, &RescheduleEvent { t0: 0, kind: dup }),
            Err(DynamicsError::DuplicateJob(_))
        ));
        let early = EventKind::MachineDown { machine: MachineId(0), from: 1, until: 3 };
        assert!(matches!(
            apply_event(&x, &RescheduleEvent { t0: 2, kind: early }),
            Err(DynamicsError::BadDowntime { .. })
        ));
        let late = RescheduleEvent { t0: 101, kind: EventKind::CancelJob(JobId(0)) };
        assert!(matches!(apply_event(&x, &late), Err(DynamicsError::T0OutOfHorizon { .. })));
    }

    #[test]
    fn rush_job_outranks_everyone() {
        let x = chain();
        let ev = RescheduleEvent {
            t0: 2,
            kind: EventKind::RushJob(Job::from_routing(7, &[(2, 1), (0, 1)], Some(4), 1)),
        };
        let a = apply_event(&x, &ev).unwrap();
        assert_eq!(a.instance.job(JobId(7)).unwrap().weight, 3);
        let y = right_shift_repair(&a, &x).unwrap();
        assert!(y.is_valid());
        for (k, s) in x.starts() {
            assert_eq!(y.start(*k), Some(*s));
        }
        assert_eq!(y.start(OpKey::new(7, 1)), Some(9));
        assert_eq!(y.start(OpKey::new(7, 2)), Some(10));
    }

    #[test]
    fn dispatch_rules() {
        let i = inst(
            vec![Job::from_routing(0, &[(0, 9)], Some(3), 1), Job::from_routing(1, &[(0, 2)], Some(5), 1)],
            1,
        );
        let f = FrozenPrefix::empty(0);
        let spt = dispatch_regenerate(&i, &f, DispatchRule::Spt, None);
        assert_eq!(spt.start(OpKey::new(1, 1)), Some(0));
        let edd = dispatch_regenerate(&i, &f, DispatchRule::Edd, None);
        assert_eq!(edd.start(OpKey::new(0, 1)), Some(0));
        let fcfs = dispatch_regenerate(&i, &f, DispatchRule::Fcfs, None);
        assert_eq!(fcfs.start(OpKey::new(0, 1)), Some(0));
        assert!(spt.is_valid() && edd.is_valid() && fcfs.is_valid());
    }

    #[test]
    fn edd_puts_missing_due_dates_last() {
        let i = inst(
            vec![Job::from_routing(0, &[(0, 1)], None, 1), Job::from_routing(1, &[(0, 1)], Some(50), 1)],
            1,
        );
        let s = dispatch_regenerate(&i, &FrozenPrefix::empty(0), DispatchRule::Edd, None);
        assert_eq!(s.start(OpKey::new(1, 1)), Some(0));
    }

    #[test]
    fn dispatch_respects_frozen_and_downtime() {
        let x = chain();
        let ev = RescheduleEvent {
            t0: 4,
            kind: EventKind::MachineDown { machine: MachineId(2), from: 4, until: 7 },
        };
        let a = apply_event(&x, &ev).unwrap();
        for rule in [DispatchRule::Spt, DispatchRule::Edd, DispatchRule::Fcfs] {
            let y = dispatch_regenerate(&a.instance, &a.frozen, rule, Some(&x));
            assert!(y.is_valid(), "{rule:?}: {:?}", y.validate());
            for (k, s) in &a.frozen.starts {
                assert_eq!(y.start(*k), Some(*s));
            }
            assert_eq!(y.start(OpKey::new(0, 3)), Some(7));
        }
    }

    fn ls(lambda: f64, budget: u64) -> LocalSearchParams {
        LocalSearchParams {
            lambda,
            utility: Utility::Makespan,
            decay: 0.9,
            include_frozen: false,
            iteration_budget: budget,
            seed: 7,
        }
    }

    #[test]
    fn local_search_rejects_bad_params() {
        let x = chain();
        let a = apply_event(&x, &RescheduleEvent { t0: 0, kind: EventKind::WeightChange { job: JobId(0), weight: 2 } })
            .unwrap();
        assert_eq!(local_search_repair(&a, &x, &ls(0.5, 0)), Err(DynamicsError::ZeroBudget));
        assert!(matches!(local_search_repair(&a, &x, &ls(1.5, 5)), Err(DynamicsError::InvalidLambda(_))));
        let mut p = ls(0.5, 5);
        p.decay = 2.0;
        assert!(local_search_repair(&a, &x, &p).is_err());
    }

    #[test]
    fn local_search_pure_stability_keeps_right_shift() {
        let x = chain();
        let ev = RescheduleEvent {
            t0: 3,
            kind: EventKind::MachineDown { machine: MachineId(1), from: 4, until: 8 },
        };
        let a = apply_event(&x, &ev).unwrap();
        let rs = right_shift_repair(&a, &x).unwrap();
        let y = local_search_repair(&a, &x, &ls(0.0, 100)).unwrap();
        assert!(y.is_valid());
        assert_eq!(y.starts(), rs.starts());
    }

    #[test]
    fn local_search_improves_makespan() {
        // job 1 is long and waits behind job 0 on machine 0 in the baseline
        let i = inst(
            vec![
                Job::from_routing(0, &[(0, 2), (1, 8)], None, 1),
                Job::from_routing(1, &[(1, 2), (0, 8)], None, 1),
            ],
            2,
        );
        let x = sched(&i, &[((0, 1), 0), ((0, 2), 10), ((1, 1), 0), ((1, 2), 2)]);
        assert!(x.is_valid());
        let a = apply_event(&x, &RescheduleEvent { t0: 0, kind: EventKind::WeightChange { job: JobId(0), weight: 1 } })
            .unwrap();
        let y = local_search_repair(&a, &x, &ls(1.0, 100)).unwrap();
        assert!(y.is_valid());
        assert_eq!(y.makespan(), 10);
    }
}
