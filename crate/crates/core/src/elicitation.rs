//! Deriving the decay base `I` from statements a planner can make.
//!
//! Two routes are offered. Either the planner states the relative impact `pc`
//! of a change at the end of the planning horizon `T` (so `I = pc^(1/T)`), or
//! the decrease `dec` of impact over a familiar period such as a five-day
//! working week (so `I = (1 − dec)^(1/period)`).
//!
//! `T` and `period` must be expressed in the same ticks as schedule start
//! times; a horizon given in days applied to starts in minutes silently yields
//! a far too steep decay.

use core::fmt;

use crate::model::Time;

/// Default reference period: a working week of five days.
pub const WORK_WEEK: Time = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElicitationError {
    /// `pc` must lie in `(0, 1]`.
    ImpactOutOfRange(f64),
    /// `dec` must lie in `[0, 1)`.
    DecreaseOutOfRange(f64),
    /// Horizon or period shorter than one tick.
    ZeroLength,
}

impl fmt::Display for ElicitationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ImpactOutOfRange(pc) => write!(f, "pc must lie in (0, 1], got {pc}"),
            Self::DecreaseOutOfRange(dec) => write!(f, "dec must lie in [0, 1), got {dec}"),
            Self::ZeroLength => f.write_str("horizon and period must be at least one tick"),
        }
    }
}

impl core::error::Error for ElicitationError {}

/// Relative impact `pc` of a change at the end of a horizon of length `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonStatement {
    pub pc: f64,
    pub horizon: Time,
}

/// Decrease `dec` of impact within a reference period of length `period`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodStatement {
    pub dec: f64,
    pub period: Time,
}

impl PeriodStatement {
    pub fn per_week(dec: f64) -> Self {
        Self { dec, period: WORK_WEEK }
    }
}

/// `I = pc^(1/T)`.
pub fn i_from_horizon(s: HorizonStatement) -> Result<f64, ElicitationError> {
    // written so that NaN fails the range check
    if !(s.pc > 0.0 && s.pc <= 1.0) {
        return Err(ElicitationError::ImpactOutOfRange(s.pc));
    }
    if s.horizon == 0 {
        return Err(ElicitationError::ZeroLength);
    }
    if s.horizon == 1 {
        return Ok(s.pc);
    }
    Ok(libm::pow(s.pc, 1.0 / s.horizon as f64))
}

/// `I = (1 − dec)^(1/period)`: the horizon route with `pc = 1 − dec`.
pub fn i_from_period(s: PeriodStatement) -> Result<f64, ElicitationError> {
    if !(s.dec >= 0.0 && s.dec < 1.0) {
        return Err(ElicitationError::DecreaseOutOfRange(s.dec));
    }
    i_from_horizon(HorizonStatement { pc: 1.0 - s.dec, horizon: s.period })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::impact;

    // Reference values from 40-digit decimal evaluation of the roots.
    const PC03_T20: f64 = 0.941_577_479_852_408_818_493_430_796_470_819;
    const PC03_T5: f64 = 0.786_003_085_596_622_780_992_812_794_401_401_9;
    const DEC02_WEEK: f64 = 0.956_352_499_790_036_985_714_639_832_266_189;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn full_impact_gives_one() {
        for t in [1, 5, 20, 1000] {
            assert_eq!(i_from_horizon(HorizonStatement { pc: 1.0, horizon: t }).unwrap(), 1.0);
            assert_eq!(i_from_period(PeriodStatement { dec: 0.0, period: t }).unwrap(), 1.0);
        }
    }

    #[test]
    fn reference_values() {
        let i = i_from_horizon(HorizonStatement { pc: 0.3, horizon: 20 }).unwrap();
        assert!(close(i, PC03_T20, 1e-14), "{i}");
        let i = i_from_horizon(HorizonStatement { pc: 0.3, horizon: 5 }).unwrap();
        assert!(close(i, PC03_T5, 1e-14), "{i}");
        assert_eq!(i_from_horizon(HorizonStatement { pc: 0.3, horizon: 1 }).unwrap(), 0.3);
        let i = i_from_period(PeriodStatement::per_week(0.2)).unwrap();
        assert!(close(i, DEC02_WEEK, 1e-14), "{i}");
    }

    #[test]
    fn horizon_round_trip() {
        for t in [5, 20, 100] {
            let i = i_from_horizon(HorizonStatement { pc: 0.3, horizon: t }).unwrap();
            assert!(close(impact(t as i64, i), 0.3, 1e-9));
        }
    }

    #[test]
    fn domain_errors() {
        for pc in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(i_from_horizon(HorizonStatement { pc, horizon: 5 }).is_err());
        }
        assert_eq!(
            i_from_horizon(HorizonStatement { pc: 0.5, horizon: 0 }),
            Err(ElicitationError::ZeroLength)
        );
        for dec in [1.0, -0.01, 2.0, f64::NAN] {
            assert!(i_from_period(PeriodStatement { dec, period: 5 }).is_err());
        }
        assert!(i_from_period(PeriodStatement { dec: 0.2, period: 0 }).is_err());
    }
}
