//! JSON documents for instances, schedules, events and measure reports.
//!
//! Instance, schedule and event documents carry integer time fields only.
//!
//! ```json
//! { "id": "shop", "horizon": 40, "machines": [0, 1],
//!   "jobs": [ { "id": 0, "operations": [[0, 3], [1, 2]], "due_date": 9, "weight": 1 } ],
//!   "downtimes": [[1, 4, 8]] }
//! { "instance": "shop", "starts": [[0, 1, 0], [0, 2, 3]] }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use instab_core::dynamics::{EventKind, RescheduleEvent};
use instab_core::measures::{MeasureReport, TermKey};
use instab_core::model::{Downtime, Job, JobId, MachineId, ModelError, OpKey, ProblemInstance, Schedule, Time};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid instance: {0}")]
    Model(#[from] ModelError),
    #[error("schedule refers to instance `{found}` but `{expected}` was supplied")]
    InstanceMismatch { expected: String, found: String },
    #[error("schedule lists operation {0} twice")]
    DuplicateStart(OpKey),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobDoc {
    pub id: u32,
    /// `[machine, duration]` per operation, in processing order.
    pub operations: Vec<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub due_date: Option<Time>,
    #[serde(default = "one")]
    pub weight: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub id: String,
    pub horizon: Time,
    pub machines: Vec<u32>,
    pub jobs: Vec<JobDoc>,
    /// `[machine, from, until]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub downtimes: Vec<[u64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub instance: String,
    /// `[job, op_index, start]`.
    pub starts: Vec<[u64; 3]>,
}

impl From<&Job> for JobDoc {
    fn from(job: &Job) -> Self {
        Self {
            id: job.id.0,
            operations: job.operations.iter().map(|o| [o.machine.0 as u64, o.duration]).collect(),
            due_date: job.due_date,
            weight: job.weight,
        }
    }
}

impl JobDoc {
    pub fn to_job(&self) -> Job {
        let routing: Vec<(u32, Time)> =
            self.operations.iter().map(|&[m, p]| (m as u32, p)).collect();
        Job::from_routing(self.id, &routing, self.due_date, self.weight)
    }
}

impl From<&ProblemInstance> for InstanceDoc {
    fn from(inst: &ProblemInstance) -> Self {
        Self {
            id: inst.name().to_owned(),
            horizon: inst.horizon(),
            machines: inst.machines().iter().map(|m| m.0).collect(),
            jobs: inst.jobs().iter().map(JobDoc::from).collect(),
            downtimes: inst
                .downtimes()
                .iter()
                .map(|d| [d.machine.0 as u64, d.from, d.until])
                .collect(),
        }
    }
}

impl InstanceDoc {
    pub fn to_instance(&self) -> Result<ProblemInstance, FormatError> {
        let downtimes = self
            .downtimes
            .iter()
            .map(|&[m, from, until]| Downtime { machine: MachineId(m as u32), from, until })
            .collect();
        Ok(ProblemInstance::new(
            self.id.clone(),
            self.machines.iter().copied().map(MachineId).collect(),
            self.jobs.iter().map(JobDoc::to_job).collect(),
            self.horizon,
            downtimes,
        )?)
    }
}

impl From<&Schedule> for ScheduleDoc {
    fn from(s: &Schedule) -> Self {
        Self {
            instance: s.instance().name().to_owned(),
            starts: s.starts().iter().map(|(k, &v)| [k.job.0 as u64, k.index as u64, v]).collect(),
        }
    }
}

impl ScheduleDoc {
    pub fn to_schedule(&self, instance: Arc<ProblemInstance>) -> Result<Schedule, FormatError> {
        if self.instance != instance.name() {
            return Err(FormatError::InstanceMismatch {
                expected: instance.name().to_owned(),
                found: self.instance.clone(),
            });
        }
        let mut starts = std::collections::BTreeMap::new();
        for &[job, index, start] in &self.starts {
            let key = OpKey::new(job as u32, index as u32);
            if starts.insert(key, start).is_some() {
                return Err(FormatError::DuplicateStart(key));
            }
        }
        Ok(Schedule::new(instance, starts))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventDoc {
    MachineDown { t0: Time, machine: u32, from: Time, until: Time },
    NewJob { t0: Time, job: JobDoc },
    RushJob { t0: Time, job: JobDoc },
    CancelJob { t0: Time, job: u32 },
    DueDateChange { t0: Time, job: u32, due_date: Option<Time> },
    WeightChange { t0: Time, job: u32, weight: u64 },
}

impl From<&RescheduleEvent> for EventDoc {
    fn from(e: &RescheduleEvent) -> Self {
        let t0 = e.t0;
        match &e.kind {
            &EventKind::MachineDown { machine, from, until } => {
                Self::MachineDown { t0, machine: machine.0, from, until }
            }
            EventKind::NewJob(job) => Self::NewJob { t0, job: job.into() },
            EventKind::RushJob(job) => Self::RushJob { t0, job: job.into() },
            &EventKind::CancelJob(job) => Self::CancelJob { t0, job: job.0 },
            &EventKind::DueDateChange { job, due_date } => {
                Self::DueDateChange { t0, job: job.0, due_date }
            }
            &EventKind::WeightChange { job, weight } => Self::WeightChange { t0, job: job.0, weight },
        }
    }
}

impl From<&EventDoc> for RescheduleEvent {
    fn from(d: &EventDoc) -> Self {
        let (t0, kind) = match d {
            &EventDoc::MachineDown { t0, machine, from, until } => {
                (t0, EventKind::MachineDown { machine: MachineId(machine), from, until })
            }
            EventDoc::NewJob { t0, job } => (*t0, EventKind::NewJob(job.to_job())),
            EventDoc::RushJob { t0, job } => (*t0, EventKind::RushJob(job.to_job())),
            &EventDoc::CancelJob { t0, job } => (t0, EventKind::CancelJob(JobId(job))),
            &EventDoc::DueDateChange { t0, job, due_date } => {
                (t0, EventKind::DueDateChange { job: JobId(job), due_date })
            }
            &EventDoc::WeightChange { t0, job, weight } => {
                (t0, EventKind::WeightChange { job: JobId(job), weight })
            }
        };
        RescheduleEvent { t0, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub term: String,
    pub contribution: f64,
}

/// Output document of the `measure` and `simulate` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub measure: String,
    pub total: f64,
    pub added_count: usize,
    pub removed_count: usize,
    pub skipped_count: usize,
    pub per_operation: Vec<TermDoc>,
}

impl ReportDoc {
    pub fn new(measure: &str, r: &MeasureReport) -> Self {
        Self {
            measure: measure.to_owned(),
            total: r.total,
            added_count: r.added_count,
            removed_count: r.removed_count,
            skipped_count: r.skipped_count,
            per_operation: r
                .per_operation
                .iter()
                .map(|(k, &v)| TermDoc { term: term_name(k), contribution: v })
                .collect(),
        }
    }

    /// Plain-text rendering: header, counts, then one line per term.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "measure  {}\ntotal    {}\nadded    {}\nremoved  {}\nskipped  {}\n",
            self.measure, self.total, self.added_count, self.removed_count, self.skipped_count
        );
        for t in &self.per_operation {
            out.push_str(&format!("  {:<12} {}\n", t.term, t.contribution));
        }
        out
    }
}

fn term_name(k: &TermKey) -> String {
    match k {
        TermKey::Op(op) => format!("{}/{}", op.job.0, op.index),
        TermKey::Job(j) => format!("job {}", j.0),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let io = |source| FormatError::Io { path: path.into(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| FormatError::Json { path: path.into(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io)
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance, FormatError> {
    read_json::<InstanceDoc>(path)?.to_instance()
}

pub fn write_instance(path: &Path, inst: &ProblemInstance) -> Result<(), FormatError> {
    write_json(path, &InstanceDoc::from(inst))
}

pub fn read_schedule(path: &Path, instance: Arc<ProblemInstance>) -> Result<Schedule, FormatError> {
    read_json::<ScheduleDoc>(path)?.to_schedule(instance)
}

pub fn write_schedule(path: &Path, s: &Schedule) -> Result<(), FormatError> {
    write_json(path, &ScheduleDoc::from(s))
}

pub fn read_events(path: &Path) -> Result<Vec<RescheduleEvent>, FormatError> {
    let docs: Vec<EventDoc> = read_json(path)?;
    let mut events: Vec<RescheduleEvent> = docs.iter().map(RescheduleEvent::from).collect();
    events.sort_by_key(|e| e.t0);
    Ok(events)
}

pub fn write_events(path: &Path, events: &[RescheduleEvent]) -> Result<(), FormatError> {
    let docs: Vec<EventDoc> = events.iter().map(EventDoc::from).collect();
    write_json(path, &docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use instab_core::dynamics::initial_schedule;
    use instab_core::generate::{generate_instance, GeneratorConfig};

    #[test]
    fn instance_document_shape() {
        let text = r#"{ "id": "shop", "horizon": 40, "machines": [0, 1],
            "jobs": [ { "id": 0, "operations": [[0, 3], [1, 2]], "due_date": 9 } ],
            "downtimes": [[1, 4, 8]] }"#;
        let doc: InstanceDoc = serde_json::from_str(text).unwrap();
        let inst = doc.to_instance().unwrap();
        assert_eq!(inst.operation_count(), 2);
        assert_eq!(inst.jobs()[0].weight, 1);
        assert_eq!(inst.downtimes().len(), 1);
        assert_eq!(InstanceDoc::from(&inst).jobs[0].weight, 1);
    }

    #[test]
    fn floats_are_rejected() {
        let text = r#"{ "instance": "x", "starts": [[0, 1, 2.5]] }"#;
        assert!(serde_json::from_str::<ScheduleDoc>(text).is_err());
    }

    #[test]
    fn schedule_round_trip_and_mismatch() {
        let inst = Arc::new(generate_instance(&GeneratorConfig::default()).unwrap());
        let x = initial_schedule(&inst);
        let doc = ScheduleDoc::from(&x);
        let text = serde_json::to_string(&doc).unwrap();
        let back: ScheduleDoc = serde_json::from_str(&text).unwrap();
        let y = back.to_schedule(inst.clone()).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.validate(), y.validate());

        let other = Arc::new(generate_instance(&GeneratorConfig { seed: 9, ..Default::default() }).unwrap());
        let renamed = ScheduleDoc { instance: "nope".into(), ..doc };
        assert!(matches!(renamed.to_schedule(other), Err(FormatError::InstanceMismatch { .. })));
    }

    #[test]
    fn event_documents() {
        let text = r#"[
            {"kind": "weight_change", "t0": 9, "job": 1, "weight": 4},
            {"kind": "machine_down", "t0": 3, "machine": 0, "from": 4, "until": 9},
            {"kind": "rush_job", "t0": 5, "job": {"id": 7, "operations": [[0, 2]], "weight": 1}}
        ]"#;
        let docs: Vec<EventDoc> = serde_json::from_str(text).unwrap();
        let events: Vec<RescheduleEvent> = docs.iter().map(RescheduleEvent::from).collect();
        assert_eq!(events[1].kind, EventKind::MachineDown { machine: MachineId(0), from: 4, until: 9 });
        let again: Vec<EventDoc> = events.iter().map(EventDoc::from).collect();
        assert_eq!(docs, again);
    }
}
