//! Schedule instability analysis for dynamic job-shop scheduling.
//!
//! The crate is `no_std` (with `alloc`) and contains no I/O. It provides:
//!
//! * [`model`]: job-shop instances, schedules, feasibility checking and
//!   utility criteria (makespan, weighted tardiness).
//! * [`measures`]: the start-time based stability measures found in the
//!   rescheduling literature (absolute shift, earliness shift, weighted
//!   combination, job-level, sequence inversions) and the time-discounted
//!   instability measure `Σ I^(min(s, s') − t0) · |s' − s|`.
//! * [`elicitation`]: deriving the decay base `I` from decision-maker
//!   statements.
//! * [`dynamics`]: rescheduling events and three repair policies.
//! * [`generate`]: seeded instance and disturbance scenario generators.
//! * [`oracle`]: slow brute-force references used by the test suites.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod elicitation;
pub mod generate;
pub mod measures;
pub mod model;
pub mod oracle;

mod fenwick;
mod sequencing;

pub use dynamics::{
    apply_event, dispatch_regenerate, local_search_repair, repair, right_shift_repair, AppliedEvent,
    DispatchRule, DynamicsError, EventKind, FrozenPrefix, LocalSearchParams, RepairPolicy,
    RescheduleEvent,
};
pub use elicitation::{i_from_horizon, i_from_period, ElicitationError, HorizonStatement, PeriodStatement};
pub use measures::{
    closeness, combined_measure, delta_start, impact, instability, job_level_measure, lin_measure,
    pair, sequence_measure, wu_measure, InstabilityConfig, Measure, MeasureError, MeasureReport,
    PairedSchedules, SequenceScope, TermKey,
};
pub use model::{
    Downtime, Job, JobId, MachineId, ModelError, OpKey, Operation, ProblemInstance, Schedule, Time,
    Utility, Violation,
};
