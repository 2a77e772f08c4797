//! Job-shop problem instances and schedules.
//!
//! Time is measured in integer ticks. An operation occupies its machine on the
//! half-open interval `[s, s + p)`, so a successor may start exactly when its
//! predecessor ends.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Integer time in ticks.
pub type Time = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.0)
    }
}

impl fmt::Display for MachineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

/// Identity of an operation `O_jk`: job `j`, 1-based position `k` in the job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpKey {
    pub job: JobId,
    pub index: u32,
}

impl OpKey {
    pub const fn new(job: u32, index: u32) -> Self {
        Self { job: JobId(job), index }
    }
}

impl fmt::Display for OpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O({},{})", self.job.0, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub job: JobId,
    pub index: u32,
    pub machine: MachineId,
    pub duration: Time,
}

impl Operation {
    pub fn key(&self) -> OpKey {
        OpKey { job: self.job, index: self.index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    /// Processing order; operation `k` must finish before `k + 1` starts.
    pub operations: Vec<Operation>,
    pub due_date: Option<Time>,
    /// Relative importance, strictly positive.
    pub weight: u64,
}

impl Job {
    /// Builds a job from its routing given as `(machine, duration)` pairs.
    pub fn from_routing(
        id: u32,
        routing: &[(u32, Time)],
        due_date: Option<Time>,
        weight: u64,
    ) -> Self {
        let operations = routing
            .iter()
            .zip(1u32..)
            .map(|(&(machine, duration), index)| Operation {
                job: JobId(id),
                index,
                machine: MachineId(machine),
                duration,
            })
            .collect();
        Self { id: JobId(id), operations, due_date, weight }
    }

    pub fn total_processing(&self) -> Time {
        self.operations.iter().map(|op| op.duration).sum()
    }
}

/// A machine unavailability window `[from, until)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Downtime {
    pub machine: MachineId,
    pub from: Time,
    pub until: Time,
}

impl Downtime {
    pub fn overlaps(&self, start: Time, end: Time) -> bool {
        self.from < self.until && start < self.until && self.from < end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    EmptyJob(JobId),
    DuplicateJob(JobId),
    ZeroDuration(OpKey),
    BadOperationIndex { job: JobId, expected: u32, found: OpKey },
    UnknownMachine { op: OpKey, machine: MachineId },
    DuplicateMachine(MachineId),
    ZeroWeight(JobId),
    ZeroHorizon,
    BadDowntime(Downtime),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyJob(j) => write!(f, "job {j} has no operations"),
            Self::DuplicateJob(j) => write!(f, "job {j} appears more than once"),
            Self::ZeroDuration(op) => write!(f, "operation {op} has zero duration"),
            Self::BadOperationIndex { job, expected, found } => {
                write!(f, "job {job}: expected operation index {expected}, found {found}")
            }
            Self::UnknownMachine { op, machine } => {
                write!(f, "operation {op} uses unknown machine {machine}")
            }
            Self::DuplicateMachine(m) => write!(f, "machine {m} listed more than once"),
            Self::ZeroWeight(j) => write!(f, "job {j} has zero weight"),
            Self::ZeroHorizon => f.write_str("planning horizon must be at least 1"),
            Self::BadDowntime(d) => {
                write!(f, "downtime on {} has from {} > until {}", d.machine, d.from, d.until)
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// A job-shop instance. Jobs are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    name: String,
    machines: Vec<MachineId>,
    jobs: Vec<Job>,
    horizon: Time,
    downtimes: Vec<Downtime>,
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        machines: Vec<MachineId>,
        mut jobs: Vec<Job>,
        horizon: Time,
        mut downtimes: Vec<Downtime>,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::ZeroHorizon);
        }
        let mut sorted_machines = machines.clone();
        sorted_machines.sort_unstable();
        if let Some(w) = sorted_machines.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateMachine(w[0]));
        }
        jobs.sort_by_key(|j| j.id);
        if let Some(w) = jobs.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ModelError::DuplicateJob(w[0].id));
        }
        for job in &jobs {
            if job.operations.is_empty() {
                return Err(ModelError::EmptyJob(job.id));
            }
            if job.weight == 0 {
                return Err(ModelError::ZeroWeight(job.id));
            }
            for (op, expected) in job.operations.iter().zip(1u32..) {
                if op.job != job.id || op.index != expected {
                    return Err(ModelError::BadOperationIndex { job: job.id, expected, found: op.key() });
                }
                if op.duration == 0 {
                    return Err(ModelError::ZeroDuration(op.key()));
                }
                if sorted_machines.binary_search(&op.machine).is_err() {
                    return Err(ModelError::UnknownMachine { op: op.key(), machine: op.machine });
                }
            }
        }
        for d in &downtimes {
            if d.from > d.until || sorted_machines.binary_search(&d.machine).is_err() {
                return Err(ModelError::BadDowntime(*d));
            }
        }
        downtimes.sort_unstable();
        Ok(Self { name: name.into(), machines, jobs, horizon, downtimes })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn machines(&self) -> &[MachineId] {
        &self.machines
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Planning horizon `T` of the decision maker, in the same ticks as starts.
    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn downtimes(&self) -> &[Downtime] {
        &self.downtimes
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.binary_search_by_key(&id, |j| j.id).ok().map(|i| &self.jobs[i])
    }

    pub fn operation(&self, key: OpKey) -> Option<&Operation> {
        let job = self.job(key.job)?;
        let idx = usize::try_from(key.index).ok()?.checked_sub(1)?;
        job.operations.get(idx)
    }

    pub fn operations(&self) -> impl Iterator<Item = &Operation> + '_ {
        self.jobs.iter().flat_map(|j| j.operations.iter())
    }

    pub fn operation_count(&self) -> usize {
        self.jobs.iter().map(|j| j.operations.len()).sum()
    }

    pub fn total_processing(&self) -> Time {
        self.jobs.iter().map(Job::total_processing).sum()
    }

    /// Downtime windows of one machine, sorted by start.
    pub fn downtimes_of(&self, machine: MachineId) -> impl Iterator<Item = &Downtime> + '_ {
        self.downtimes.iter().filter(move |d| d.machine == machine)
    }

    pub(crate) fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// A feasibility rule broken by a schedule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// `before` does not finish before `after` (same job) starts.
    Precedence { before: OpKey, after: OpKey },
    /// Two operations overlap on the same machine; `first < second`.
    Capacity { machine: MachineId, first: OpKey, second: OpKey },
    /// An operation overlaps a downtime window of its machine.
    Unavailable { op: OpKey, window: Downtime },
    MissingStart(OpKey),
    UnknownOperation(OpKey),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Precedence { before, after } => {
                write!(f, "precedence: {before} must finish before {after} starts")
            }
            Self::Capacity { machine, first, second } => {
                write!(f, "capacity: {first} and {second} overlap on {machine}")
            }
            Self::Unavailable { op, window } => write!(
                f,
                "unavailable: {op} overlaps downtime [{}, {}) on {}",
                window.from, window.until, window.machine
            ),
            Self::MissingStart(op) => write!(f, "missing start for {op}"),
            Self::UnknownOperation(op) => write!(f, "start given for unknown operation {op}"),
        }
    }
}

/// Criteria used as schedule utility (both minimized).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Utility {
    Makespan,
    WeightedTardiness,
}

impl Utility {
    pub fn evaluate(self, schedule: &Schedule) -> f64 {
        match self {
            Self::Makespan => schedule.makespan() as f64,
            Self::WeightedTardiness => schedule.total_weighted_tardiness() as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Makespan => "makespan",
            Self::WeightedTardiness => "weighted_tardiness",
        }
    }
}

/// Start times for the operations of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    instance: Arc<ProblemInstance>,
    starts: BTreeMap<OpKey, Time>,
}

impl Schedule {
    /// Wraps a start map. Feasibility is not checked here, see [`Schedule::validate`].
    pub fn new(instance: Arc<ProblemInstance>, starts: BTreeMap<OpKey, Time>) -> Self {
        Self { instance, starts }
    }

    pub fn instance(&self) -> &Arc<ProblemInstance> {
        &self.instance
    }

    pub fn starts(&self) -> &BTreeMap<OpKey, Time> {
        &self.starts
    }

    pub fn start(&self, key: OpKey) -> Option<Time> {
        self.starts.get(&key).copied()
    }

    pub fn end(&self, key: OpKey) -> Option<Time> {
        let op = self.instance.operation(key)?;
        Some(self.start(key)? + op.duration)
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// All feasibility violations, sorted and deduplicated. Empty iff the
    /// schedule is feasible.
    pub fn validate(&self) -> Vec<Violation> {
        let inst = &*self.instance;
        let mut out = Vec::new();

        for &key in self.starts.keys() {
            if inst.operation(key).is_none() {
                out.push(Violation::UnknownOperation(key));
            }
        }

        for job in inst.jobs() {
            let mut prev: Option<(OpKey, Time)> = None;
            for op in &job.operations {
                let key = op.key();
                match self.start(key) {
                    None => {
                        out.push(Violation::MissingStart(key));
                        prev = None;
                    }
                    Some(s) => {
                        if let Some((pk, pend)) = prev {
                            if pend > s {
                                out.push(Violation::Precedence { before: pk, after: key });
                            }
                        }
                        prev = Some((key, s + op.duration));
                    }
                }
            }
        }

        let mut by_machine: BTreeMap<MachineId, Vec<(Time, Time, OpKey)>> = BTreeMap::new();
        for op in inst.operations() {
            if let Some(s) = self.start(op.key()) {
                by_machine.entry(op.machine).or_default().push((s, s + op.duration, op.key()));
            }
        }
        for (&machine, ops) in by_machine.iter_mut() {
            ops.sort_unstable();
            for (i, &(_, end_i, key_i)) in ops.iter().enumerate() {
                for &(s_j, _, key_j) in &ops[i + 1..] {
                    if s_j >= end_i {
                        break;
                    }
                    let (first, second) = if key_i < key_j { (key_i, key_j) } else { (key_j, key_i) };
                    out.push(Violation::Capacity { machine, first, second });
                }
            }
            for window in inst.downtimes_of(machine) {
                for &(s, e, key) in ops.iter() {
                    if window.overlaps(s, e) {
                        out.push(Violation::Unavailable { op: key, window: *window });
                    }
                }
            }
        }

        out.sort();
        out.dedup();
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `C_j` for every job whose last operation has a start.
    pub fn completion_times(&self) -> BTreeMap<JobId, Time> {
        self.instance
            .jobs()
            .iter()
            .filter_map(|job| {
                let last = job.operations.last()?;
                Some((job.id, self.start(last.key())? + last.duration))
            })
            .collect()
    }

    /// Maximum end time over all scheduled operations; 0 when empty.
    pub fn makespan(&self) -> Time {
        self.starts
            .iter()
            .filter_map(|(&key, &s)| Some(s + self.instance.operation(key)?.duration))
            .max()
            .unwrap_or(0)
    }

    /// `Σ_j w_j · max(0, C_j − d_j)` over jobs with a due date.
    pub fn total_weighted_tardiness(&self) -> u64 {
        let completions = self.completion_times();
        self.instance
            .jobs()
            .iter()
            .filter_map(|job| {
                let due = job.due_date?;
                let c = *completions.get(&job.id)?;
                Some(job.weight * c.saturating_sub(due))
            })
            .sum()
    }
}
