//! Indexed view of an instance and earliest-start evaluation of machine
//! sequences, shared by the repair policies.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{OpKey, ProblemInstance, Schedule, Time};

pub(crate) struct Layout {
    pub keys: Vec<OpKey>,
    pub pos: BTreeMap<OpKey, usize>,
    pub duration: Vec<Time>,
    /// Index into the instance's machine list.
    pub machine: Vec<usize>,
    pub job_pred: Vec<Option<usize>>,
    /// Downtime windows per machine, sorted by start.
    pub windows: Vec<Vec<(Time, Time)>>,
    /// Last operation index of every job, with job weight and due date.
    pub job_last: Vec<(usize, u64, Option<Time>)>,
}

impl Layout {
    pub fn new(instance: &ProblemInstance) -> Self {
        let machines = instance.machines();
        let machine_pos: BTreeMap<_, _> = machines.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let n = instance.operation_count();
        let mut layout = Self {
            keys: Vec::with_capacity(n),
            pos: BTreeMap::new(),
            duration: Vec::with_capacity(n),
            machine: Vec::with_capacity(n),
            job_pred: Vec::with_capacity(n),
            windows: vec![Vec::new(); machines.len()],
            job_last: Vec::with_capacity(instance.jobs().len()),
        };
        for job in instance.jobs() {
            let mut prev = None;
            for op in &job.operations {
                let i = layout.keys.len();
                layout.keys.push(op.key());
                layout.pos.insert(op.key(), i);
                layout.duration.push(op.duration);
                layout.machine.push(machine_pos[&op.machine]);
                layout.job_pred.push(prev);
                prev = Some(i);
            }
            if let Some(last) = prev {
                layout.job_last.push((last, job.weight, job.due_date));
            }
        }
        for d in instance.downtimes() {
            if d.from < d.until {
                layout.windows[machine_pos[&d.machine]].push((d.from, d.until));
            }
        }
        layout
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn machine_count(&self) -> usize {
        self.windows.len()
    }

    /// Earliest start `≥ at` on `machine` that avoids every downtime window.
    pub fn avoid_downtime(&self, machine: usize, mut at: Time, duration: Time) -> Time {
        loop {
            let before = at;
            for &(from, until) in &self.windows[machine] {
                if at < until && from < at + duration {
                    at = until;
                }
            }
            if at == before {
                return at;
            }
        }
    }

    /// Per-machine sequences of the given operations ordered by their start in
    /// `reference`; operations without a reference start follow in index order.
    pub fn sequences_from(&self, reference: &Schedule) -> Vec<Vec<usize>> {
        let mut seqs: Vec<Vec<(Time, usize)>> = vec![Vec::new(); self.machine_count()];
        for (i, &key) in self.keys.iter().enumerate() {
            let at = reference.start(key).unwrap_or(Time::MAX);
            seqs[self.machine[i]].push((at, i));
        }
        seqs.into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.into_iter().map(|(_, i)| i).collect()
            })
            .collect()
    }

    /// Earliest starts respecting job precedence, the machine sequences,
    /// downtime windows and per-operation lower bounds. Operations with a
    /// `fixed` start keep it. Returns `None` when the sequences induce a cycle.
    pub fn evaluate(
        &self,
        sequences: &[Vec<usize>],
        fixed: &[Option<Time>],
        lower: &[Time],
    ) -> Option<Vec<Time>> {
        let n = self.len();
        let mut machine_pred = vec![None; n];
        let mut machine_succ = vec![None; n];
        for seq in sequences {
            for w in seq.windows(2) {
                machine_pred[w[1]] = Some(w[0]);
                machine_succ[w[0]] = Some(w[1]);
            }
        }
        let mut job_succ = vec![None; n];
        for (i, p) in self.job_pred.iter().enumerate() {
            if let Some(p) = *p {
                job_succ[p] = Some(i);
            }
        }
        let mut indegree: Vec<u8> = (0..n)
            .map(|i| self.job_pred[i].is_some() as u8 + machine_pred[i].is_some() as u8)
            .collect();
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut start = vec![0; n];
        let mut done = 0;
        while let Some(i) = ready.pop() {
            done += 1;
            start[i] = match fixed[i] {
                Some(s) => s,
                None => {
                    let mut at = lower[i];
                    if let Some(p) = self.job_pred[i] {
                        at = at.max(start[p] + self.duration[p]);
                    }
                    if let Some(p) = machine_pred[i] {
                        at = at.max(start[p] + self.duration[p]);
                    }
                    self.avoid_downtime(self.machine[i], at, self.duration[i])
                }
            };
            for succ in [job_succ[i], machine_succ[i]].into_iter().flatten() {
                indegree[succ] -= 1;
                if indegree[succ] == 0 {
                    ready.push(succ);
                }
            }
        }
        (done == n).then_some(start)
    }

    pub fn makespan(&self, starts: &[Time]) -> Time {
        starts.iter().zip(&self.duration).map(|(s, p)| s + p).max().unwrap_or(0)
    }

    pub fn weighted_tardiness(&self, starts: &[Time]) -> u64 {
        self.job_last
            .iter()
            .filter_map(|&(last, weight, due)| {
                Some(weight * (starts[last] + self.duration[last]).saturating_sub(due?))
            })
            .sum()
    }

    pub fn to_map(&self, starts: &[Time]) -> BTreeMap<OpKey, Time> {
        self.keys.iter().copied().zip(starts.iter().copied()).collect()
    }
}
