//! Measures of the difference between an initial schedule `x` and a revised
//! schedule `x'`.
//!
//! Every measure returns a [`MeasureReport`] whose total is the sum of its
//! per-term contributions. Operations that exist in only one of the two
//! schedules (new or canceled jobs) contribute nothing to any total; they are
//! counted in `added_count` / `removed_count` instead.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::fenwick::Fenwick;
use crate::model::{JobId, OpKey, Schedule, Time};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    /// The same operation key has different durations in `x` and `x'`.
    DurationMismatch { op: OpKey, before: Time, after: Time },
    /// A schedule holds a start for an operation its instance does not define.
    UnknownOperation(OpKey),
    /// Decay base outside `(0, 1]` or not finite.
    InvalidDecay(f64),
    /// A weight is negative or not finite.
    InvalidWeight(f64),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DurationMismatch { op, before, after } => {
                write!(f, "operation {op} has duration {before} in x but {after} in x'")
            }
            Self::UnknownOperation(op) => write!(f, "operation {op} is not part of its instance"),
            Self::InvalidDecay(i) => write!(f, "decay base must lie in (0, 1], got {i}"),
            Self::InvalidWeight(w) => write!(f, "weights must be finite and non-negative, got {w}"),
        }
    }
}

impl core::error::Error for MeasureError {}

/// Two schedules matched operation by operation.
#[derive(Debug, Clone)]
pub struct PairedSchedules {
    pub x: Schedule,
    pub x_prime: Schedule,
    /// Keys with a start in both schedules, ascending.
    pub pairing: Vec<OpKey>,
    /// Keys only in `x'`.
    pub added: Vec<OpKey>,
    /// Keys only in `x`.
    pub removed: Vec<OpKey>,
    /// Paired keys whose machine differs between the two instances. Reported,
    /// never scored.
    pub reassigned: Vec<OpKey>,
}

impl PairedSchedules {
    /// `(s, s')` for every paired operation.
    pub fn paired_starts(&self) -> impl Iterator<Item = (OpKey, Time, Time)> + '_ {
        self.pairing.iter().map(move |&k| {
            let s = self.x.starts()[&k];
            let sp = self.x_prime.starts()[&k];
            (k, s, sp)
        })
    }

    /// The same pair with the roles of `x` and `x'` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.x_prime.clone(),
            x_prime: self.x.clone(),
            pairing: self.pairing.clone(),
            added: self.removed.clone(),
            removed: self.added.clone(),
            reassigned: self.reassigned.clone(),
        }
    }
}

/// Matches operations of `x` and `x'` by `(job, op_index)`.
pub fn pair(x: &Schedule, x_prime: &Schedule) -> Result<PairedSchedules, MeasureError> {
    let mut pairing = Vec::new();
    let mut removed = Vec::new();
    let mut reassigned = Vec::new();
    for &key in x.starts().keys() {
        let op = x.instance().operation(key).ok_or(MeasureError::UnknownOperation(key))?;
        if x_prime.start(key).is_none() {
            removed.push(key);
            continue;
        }
        let op_prime =
            x_prime.instance().operation(key).ok_or(MeasureError::UnknownOperation(key))?;
        if op.duration != op_prime.duration {
            return Err(MeasureError::DurationMismatch {
                op: key,
                before: op.duration,
                after: op_prime.duration,
            });
        }
        if op.machine != op_prime.machine {
            reassigned.push(key);
        }
        pairing.push(key);
    }
    let mut added = Vec::new();
    for &key in x_prime.starts().keys() {
        x_prime.instance().operation(key).ok_or(MeasureError::UnknownOperation(key))?;
        if x.start(key).is_none() {
            added.push(key);
        }
    }
    Ok(PairedSchedules {
        x: x.clone(),
        x_prime: x_prime.clone(),
        pairing,
        added,
        removed,
        reassigned,
    })
}

/// What a report contribution is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKey {
    Op(OpKey),
    Job(JobId),
}

impl fmt::Display for TermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Op(k) => k.fmt(f),
            Self::Job(j) => j.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub total: f64,
    pub per_operation: BTreeMap<TermKey, f64>,
    pub added_count: usize,
    pub removed_count: usize,
    /// Terms left out: jobs only partially present (job-level measure), or
    /// frozen operations (instability with `include_frozen = false`).
    pub skipped_count: usize,
}

impl MeasureReport {
    fn from_terms(terms: BTreeMap<TermKey, f64>, p: &PairedSchedules, skipped: usize) -> Self {
        let total = terms.values().sum();
        Self {
            total,
            per_operation: terms,
            added_count: p.added.len(),
            removed_count: p.removed.len(),
            skipped_count: skipped,
        }
    }

    fn from_op_terms(
        terms: impl Iterator<Item = (OpKey, f64)>,
        p: &PairedSchedules,
        skipped: usize,
    ) -> Self {
        Self::from_terms(terms.map(|(k, v)| (TermKey::Op(k), v)).collect(), p, skipped)
    }
}

/// `Δ = |s' − s|`.
pub fn delta_start(s: Time, s_prime: Time) -> Time {
    s.abs_diff(s_prime)
}

/// Sum of absolute start-time differences over paired operations.
pub fn wu_measure(p: &PairedSchedules) -> MeasureReport {
    let terms = p.paired_starts().map(|(k, s, sp)| (k, delta_start(s, sp) as f64));
    MeasureReport::from_op_terms(terms, p, 0)
}

/// Sum of `max(0, s − s')`: only operations moved earlier count.
pub fn lin_measure(p: &PairedSchedules) -> MeasureReport {
    let terms = p.paired_starts().map(|(k, s, sp)| (k, s.saturating_sub(sp) as f64));
    MeasureReport::from_op_terms(terms, p, 0)
}

fn check_weight(w: f64) -> Result<f64, MeasureError> {
    if w.is_finite() && w >= 0.0 {
        Ok(w)
    } else {
        Err(MeasureError::InvalidWeight(w))
    }
}

/// `w_early · Σ max(0, s − s') + w_late · Σ max(0, s' − s)`.
///
/// With both weights at 1 this is [`wu_measure`]; with `w_late = 0` and
/// `w_early = 1` it is [`lin_measure`].
pub fn combined_measure(
    p: &PairedSchedules,
    w_early: f64,
    w_late: f64,
) -> Result<MeasureReport, MeasureError> {
    let w_early = check_weight(w_early)?;
    let w_late = check_weight(w_late)?;
    let terms = p.paired_starts().map(|(k, s, sp)| {
        let earlier = s.saturating_sub(sp) as f64;
        let later = sp.saturating_sub(s) as f64;
        (k, w_early * earlier + w_late * later)
    });
    Ok(MeasureReport::from_op_terms(terms, p, 0))
}

/// Job start `S_j` and completion `C_j`, if every operation of the job is scheduled.
fn job_span(schedule: &Schedule, job: JobId) -> Option<(Time, Time)> {
    let j = schedule.instance().job(job)?;
    let mut first = None;
    let mut completion = 0;
    for op in &j.operations {
        let s = schedule.start(op.key())?;
        first.get_or_insert(s);
        completion = s + op.duration;
    }
    Some((first?, completion))
}

/// `Σ_j g_start · |S_j − S'_j| + g_completion · |C_j − C'_j|` over jobs fully
/// present in both schedules. `g_start = 0` gives the completion-only variant.
pub fn job_level_measure(
    p: &PairedSchedules,
    g_start: f64,
    g_completion: f64,
) -> Result<MeasureReport, MeasureError> {
    let g_start = check_weight(g_start)?;
    let g_completion = check_weight(g_completion)?;
    let jobs: BTreeSet<JobId> = p.pairing.iter().map(|k| k.job).collect();
    let mut terms = BTreeMap::new();
    let mut skipped = 0;
    for job in jobs {
        let len = |s: &Schedule| s.instance().job(job).map(|j| j.operations.len());
        match (job_span(&p.x, job), job_span(&p.x_prime, job)) {
            (Some((s, c)), Some((sp, cp))) if len(&p.x) == len(&p.x_prime) => {
                let term =
                    g_start * s.abs_diff(sp) as f64 + g_completion * c.abs_diff(cp) as f64;
                terms.insert(TermKey::Job(job), term);
            }
            _ => skipped += 1,
        }
    }
    Ok(MeasureReport::from_terms(terms, p, skipped))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SequenceScope {
    /// All pairs of paired operations.
    #[default]
    Global,
    /// Only pairs of operations processed on the same machine (in `x'`).
    PerMachine,
}

/// Counts operation pairs `(a, b)` with `s_a < s_b` and `s'_a > s'_b`.
///
/// Each inverted pair is attributed to `a`, the operation that started first
/// in `x`. Ties never count. Runs in `O(n log n)` per group.
pub fn sequence_measure(p: &PairedSchedules, scope: SequenceScope) -> MeasureReport {
    let mut groups: BTreeMap<u32, Vec<(OpKey, Time, Time)>> = BTreeMap::new();
    for (k, s, sp) in p.paired_starts() {
        let group = match scope {
            SequenceScope::Global => 0,
            SequenceScope::PerMachine => {
                p.x_prime.instance().operation(k).map(|op| op.machine.0).unwrap_or(u32::MAX)
            }
        };
        groups.entry(group).or_default().push((k, s, sp));
    }
    let mut counts: BTreeMap<OpKey, u64> = BTreeMap::new();
    for ops in groups.values_mut() {
        count_inversions(ops, &mut counts);
    }
    MeasureReport::from_op_terms(counts.into_iter().map(|(k, c)| (k, c as f64)), p, 0)
}

fn count_inversions(ops: &mut [(OpKey, Time, Time)], counts: &mut BTreeMap<OpKey, u64>) {
    let mut ranks: Vec<Time> = ops.iter().map(|o| o.2).collect();
    ranks.sort_unstable();
    ranks.dedup();
    let rank = |v: Time| ranks.binary_search(&v).unwrap_or_else(|i| i);

    // Descending by s; the tree holds s' ranks of operations with strictly larger s.
    ops.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut tree = Fenwick::new(ranks.len());
    let mut i = 0;
    while i < ops.len() {
        let mut j = i;
        while j < ops.len() && ops[j].1 == ops[i].1 {
            j += 1;
        }
        for &(k, _, sp) in &ops[i..j] {
            counts.insert(k, tree.prefix(rank(sp)));
        }
        for &(_, _, sp) in &ops[i..j] {
            tree.add(rank(sp), 1);
        }
        i = j;
    }
}

/// `dist = min(s, s') − t0`. Negative when the operation starts before `t0`.
pub fn closeness(s: Time, s_prime: Time, t0: Time) -> i64 {
    s.min(s_prime) as i64 - t0 as i64
}

/// `imp(dist) = I^dist`.
pub fn impact(dist: i64, decay: f64) -> f64 {
    libm::pow(decay, dist as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstabilityConfig {
    /// Decay base `I`, in `(0, 1]`.
    pub decay: f64,
    /// Rescheduling moment.
    pub t0: Time,
    /// Whether operations with `min(s, s') < t0` enter the sum.
    pub include_frozen: bool,
}

impl InstabilityConfig {
    pub fn new(decay: f64, t0: Time) -> Self {
        Self { decay, t0, include_frozen: false }
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.decay.is_finite() && self.decay > 0.0 && self.decay <= 1.0 {
            Ok(())
        } else {
            Err(MeasureError::InvalidDecay(self.decay))
        }
    }
}

/// Time-discounted instability: `Σ I^(min(s, s') − t0) · |s' − s|`.
///
/// Changes close to `t0` weigh more than changes far in the future. With
/// `I = 1` this equals [`wu_measure`] (when no operation is frozen or
/// `include_frozen` is set).
pub fn instability(
    p: &PairedSchedules,
    cfg: &InstabilityConfig,
) -> Result<MeasureReport, MeasureError> {
    cfg.validate()?;
    let mut skipped = 0;
    let mut terms = BTreeMap::new();
    for (k, s, sp) in p.paired_starts() {
        let dist = closeness(s, sp, cfg.t0);
        if dist < 0 && !cfg.include_frozen {
            skipped += 1;
            continue;
        }
        let delta = delta_start(s, sp);
        let term = if delta == 0 { 0.0 } else { impact(dist, cfg.decay) * delta as f64 };
        terms.insert(TermKey::Op(k), term);
    }
    Ok(MeasureReport::from_terms(terms, p, skipped))
}

/// A measure with its parameters, for callers that select measures at runtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Wu,
    Lin,
    Combined { w_early: f64, w_late: f64 },
    JobLevel { g_start: f64, g_completion: f64 },
    Sequence(SequenceScope),
    Instability(InstabilityConfig),
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Wu => "wu",
            Self::Lin => "lin",
            Self::Combined { .. } => "combined",
            Self::JobLevel { .. } => "job",
            Self::Sequence(SequenceScope::Global) => "sequence",
            Self::Sequence(SequenceScope::PerMachine) => "sequence-machine",
            Self::Instability(_) => "instability",
        }
    }

    pub fn evaluate(&self, p: &PairedSchedules) -> Result<MeasureReport, MeasureError> {
        match *self {
            Self::Wu => Ok(wu_measure(p)),
            Self::Lin => Ok(lin_measure(p)),
            Self::Combined { w_early, w_late } => combined_measure(p, w_early, w_late),
            Self::JobLevel { g_start, g_completion } => job_level_measure(p, g_start, g_completion),
            Self::Sequence(scope) => Ok(sequence_measure(p, scope)),
            Self::Instability(cfg) => instability(p, &cfg),
        }
    }
}
