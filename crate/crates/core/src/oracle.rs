//! Brute-force references for testing. Slow on purpose, and written without
//! the production code paths they check.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::measures::{InstabilityConfig, PairedSchedules, SequenceScope};
use crate::model::{OpKey, ProblemInstance, Schedule, Time, Utility};

/// Largest pairing [`brute_sequence_count`] accepts.
pub const MAX_SEQUENCE_OPS: usize = 200;
/// Largest number of machine-sequence combinations [`brute_optimal_schedule`] enumerates.
pub const MAX_COMBINATIONS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { size: u128, cap: u128 },
    /// No combination of machine sequences is acyclic.
    NoFeasibleSchedule,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooLarge { size, cap } => write!(f, "oracle refuses size {size} above cap {cap}"),
            Self::NoFeasibleSchedule => f.write_str("no feasible machine sequence combination"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Literal double loop over all ordered pairs of paired operations counting
/// `s_a < s_b ∧ s'_a > s'_b`.
pub fn brute_sequence_count(p: &PairedSchedules, scope: SequenceScope) -> Result<u64, OracleError> {
    let n = p.pairing.len();
    if n > MAX_SEQUENCE_OPS {
        return Err(OracleError::TooLarge { size: n as u128, cap: MAX_SEQUENCE_OPS as u128 });
    }
    let mut count = 0;
    for &a in p.pairing.iter().rev() {
        for &b in p.pairing.iter().rev() {
            if scope == SequenceScope::PerMachine {
                let ma = p.x_prime.instance().operation(a).map(|o| o.machine);
                let mb = p.x_prime.instance().operation(b).map(|o| o.machine);
                if ma != mb {
                    continue;
                }
            }
            let (sa, sb) = (p.x.starts()[&a], p.x.starts()[&b]);
            let (spa, spb) = (p.x_prime.starts()[&a], p.x_prime.starts()[&b]);
            if sa < sb && spa > spb {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Double-double number `hi + lo`, roughly 106 bits of mantissa.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn split(a: f64) -> (f64, f64) {
        let c = 134_217_729.0 * a;
        let hi = c - (c - a);
        (hi, a - hi)
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        let (ah, al) = Self::split(a);
        let (bh, bl) = Self::split(b);
        (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        Self::quick(s, e + self.lo + o.lo)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = Self::two_prod(self.hi, o.hi);
        Self::quick(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        Self::quick(q1, q2).add(Dd::from(q3))
    }

    /// `self^e` by square and multiply.
    fn powi(self, e: i64) -> Dd {
        let mut base = if e < 0 { Dd::ONE.div(self) } else { self };
        let mut n = e.unsigned_abs();
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        acc
    }
}

/// The instability sum evaluated term by term in double-double arithmetic,
/// iterating the revised schedule in descending key order.
pub fn term_by_term_instability(p: &PairedSchedules, cfg: &InstabilityConfig) -> f64 {
    let decay = Dd::from(cfg.decay);
    let mut total = Dd::ZERO;
    for (key, &s_rev) in p.x_prime.starts().iter().rev() {
        let Some(&s) = p.x.starts().get(key) else { continue };
        let earliest = if s < s_rev { s } else { s_rev };
        let dist = earliest as i128 - cfg.t0 as i128;
        if dist < 0 && !cfg.include_frozen {
            continue;
        }
        let change = s.abs_diff(s_rev);
        if change == 0 {
            continue;
        }
        let weight = decay.powi(dist as i64);
        total = total.add(weight.mul(Dd::from(change as f64)));
    }
    total.hi + total.lo
}

/// Earliest starts for fixed machine orders by repeated relaxation. `None`
/// if the orders contradict job precedence.
fn relax(instance: &ProblemInstance, orders: &[Vec<OpKey>]) -> Option<BTreeMap<OpKey, Time>> {
    let mut machine_before: BTreeMap<OpKey, OpKey> = BTreeMap::new();
    for order in orders {
        for w in order.windows(2) {
            machine_before.insert(w[1], w[0]);
        }
    }
    let ops: Vec<_> = instance.operations().collect();
    let mut start: BTreeMap<OpKey, Time> = ops.iter().map(|o| (o.key(), 0)).collect();
    let end = |start: &BTreeMap<OpKey, Time>, k: OpKey| start[&k] + instance.operation(k).unwrap().duration;
    for _ in 0..=ops.len() {
        let mut changed = false;
        for op in &ops {
            let key = op.key();
            let mut at = 0;
            if key.index > 1 {
                at = at.max(end(&start, OpKey { job: key.job, index: key.index - 1 }));
            }
            if let Some(&prev) = machine_before.get(&key) {
                at = at.max(end(&start, prev));
            }
            // skip forward over downtime until clear
            let mut moved = true;
            while moved {
                moved = false;
                for d in instance.downtimes() {
                    if d.machine == op.machine && d.from < d.until && at < d.until && d.from < at + op.duration {
                        at = d.until;
                        moved = true;
                    }
                }
            }
            if at != start[&key] {
                start.insert(key, at);
                changed = true;
            }
        }
        if !changed {
            return Some(start);
        }
    }
    None
}

fn next_permutation(v: &mut [OpKey]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Exhaustively enumerates every combination of machine sequences (in
/// lexicographic order), times each as early as possible from 0, and returns
/// the first one minimizing `objective`.
pub fn brute_optimal_schedule(
    instance: &Arc<ProblemInstance>,
    objective: Utility,
) -> Result<(Schedule, f64), OracleError> {
    let mut orders: Vec<Vec<OpKey>> = instance
        .machines()
        .iter()
        .map(|&m| instance.operations().filter(|o| o.machine == m).map(|o| o.key()).collect())
        .collect();
    let combinations = orders
        .iter()
        .map(|o| factorial(o.len()))
        .try_fold(1u128, |acc, f| acc.checked_mul(f))
        .unwrap_or(u128::MAX);
    if combinations > MAX_COMBINATIONS {
        return Err(OracleError::TooLarge { size: combinations, cap: MAX_COMBINATIONS });
    }
    for o in &mut orders {
        o.sort();
    }

    let mut best: Option<(BTreeMap<OpKey, Time>, f64)> = None;
    loop {
        if let Some(starts) = relax(instance, &orders) {
            let schedule = Schedule::new(instance.clone(), starts);
            let value = objective.evaluate(&schedule);
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((schedule.starts().clone(), value));
            }
        }
        // odometer over machines, last machine fastest
        let mut m = orders.len();
        loop {
            if m == 0 {
                let (starts, value) = best.ok_or(OracleError::NoFeasibleSchedule)?;
                return Ok((Schedule::new(instance.clone(), starts), value));
            }
            m -= 1;
            if next_permutation(&mut orders[m]) {
                break;
            }
            orders[m].sort();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{pair, wu_measure};
    use crate::model::{Job, MachineId};
    use alloc::vec;

    fn inst(jobs: Vec<Job>, machines: u32) -> Arc<ProblemInstance> {
        Arc::new(
            ProblemInstance::new("o", (0..machines).map(MachineId).collect(), jobs, 100, vec![])
                .unwrap(),
        )
    }

    fn flat(starts: &[Time]) -> Schedule {
        let n = starts.len() as u32;
        let i = inst((0..n).map(|j| Job::from_routing(j, &[(0, 1)], None, 1)).collect(), 1);
        Schedule::new(i, starts.iter().zip(0..).map(|(&s, j)| (OpKey::new(j, 1), s)).collect())
    }

    #[test]
    fn sequence_count_examples() {
        let p = pair(&flat(&[0, 1, 2]), &flat(&[0, 1, 2])).unwrap();
        assert_eq!(brute_sequence_count(&p, SequenceScope::Global), Ok(0));
        let p = pair(&flat(&[0, 1, 2]), &flat(&[2, 1, 0])).unwrap();
        assert_eq!(brute_sequence_count(&p, SequenceScope::Global), Ok(3));
        let big: Vec<Time> = (0..201).collect();
        let p = pair(&flat(&big), &flat(&big)).unwrap();
        assert!(matches!(brute_sequence_count(&p, SequenceScope::Global), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn double_double_power() {
        let x = Dd::from(0.5).powi(10);
        assert_eq!(x.hi, 1.0 / 1024.0);
        let y = Dd::from(0.5).powi(-3);
        assert_eq!(y.hi, 8.0);
        let third = Dd::ONE.div(Dd::from(3.0));
        let back = third.mul(Dd::from(3.0));
        assert!((back.hi - 1.0).abs() + back.lo.abs() < 1e-30);
    }

    #[test]
    fn instability_reference() {
        let p = pair(&flat(&[0, 4, 9]), &flat(&[2, 4, 1])).unwrap();
        let cfg = InstabilityConfig { decay: 1.0, t0: 0, include_frozen: false };
        assert_eq!(term_by_term_instability(&p, &cfg), wu_measure(&p).total);
        let cfg = InstabilityConfig { decay: 0.5, t0: 0, include_frozen: false };
        // 0.5^0·2 + 0 + 0.5^1·8
        assert_eq!(term_by_term_instability(&p, &cfg), 6.0);
        let empty = pair(&flat(&[]), &flat(&[])).unwrap();
        assert_eq!(term_by_term_instability(&empty, &cfg), 0.0);
    }

    #[test]
    fn single_job_optimum() {
        let i = inst(vec![Job::from_routing(0, &[(0, 2), (1, 3)], None, 1)], 2);
        let (s, v) = brute_optimal_schedule(&i, Utility::Makespan).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(s.start(OpKey::new(0, 2)), Some(2));
    }

    #[test]
    fn two_jobs_one_machine_tie_break() {
        let i = inst(
            vec![Job::from_routing(0, &[(0, 2)], None, 1), Job::from_routing(1, &[(0, 9)], None, 1)],
            1,
        );
        let (s, v) = brute_optimal_schedule(&i, Utility::Makespan).unwrap();
        assert_eq!(v, 11.0);
        // lexicographically first order: job 0 then job 1
        assert_eq!(s.start(OpKey::new(0, 1)), Some(0));
        assert_eq!(s.start(OpKey::new(1, 1)), Some(2));
        assert!(s.is_valid());
    }

    #[test]
    fn refuses_large_instances() {
        let jobs = (0..11).map(|j| Job::from_routing(j, &[(0, 1)], None, 1)).collect();
        let i = inst(jobs, 1);
        assert!(matches!(brute_optimal_schedule(&i, Utility::Makespan), Err(OracleError::TooLarge { .. })));
    }
}
