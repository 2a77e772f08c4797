//! Experiment matrix: instances × scenarios × repair policies × measures.
//!
//! For every (instance, scenario, policy) cell the runner builds the FCFS
//! baseline, applies the scenario's events one after another, repairs after
//! each, and compares consecutive schedules under every configured measure.
//! All intermediate instances and schedules are written so that every row can
//! be recomputed from disk.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use instab_core::dynamics::{
    apply_event, initial_schedule, repair, DispatchRule, LocalSearchParams, RepairPolicy,
    RescheduleEvent,
};
use instab_core::elicitation::{i_from_horizon, i_from_period, HorizonStatement, PeriodStatement};
use instab_core::generate::{
    generate_instance, generate_scenario, FactorMix, GeneratorConfig, ScenarioConfig,
};
use instab_core::measures::{pair, InstabilityConfig, Measure, SequenceScope};
use instab_core::model::{ProblemInstance, Schedule, Time, Utility};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::{self, FormatError};

/// Where the decay base `I` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DecaySource {
    Fixed { decay: f64 },
    /// `pc` over each instance's own planning horizon.
    Horizon { pc: f64 },
    Period { dec: f64, period: Time },
}

impl DecaySource {
    pub fn resolve(&self, horizon: Time) -> Result<f64, ExperimentError> {
        let decay = match *self {
            Self::Fixed { decay } => {
                InstabilityConfig::new(decay, 0)
                    .validate()
                    .map_err(|e| ExperimentError::Config(e.to_string()))?;
                decay
            }
            Self::Horizon { pc } => i_from_horizon(HorizonStatement { pc, horizon })
                .map_err(|e| ExperimentError::Config(e.to_string()))?,
            Self::Period { dec, period } => i_from_period(PeriodStatement { dec, period })
                .map_err(|e| ExperimentError::Config(e.to_string()))?,
        };
        Ok(decay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum PolicySpec {
    RightShift,
    Regenerate { rule: &'static str },
    LocalSearch { lambda: f64, utility: &'static str, budget: u64 },
}

impl PolicySpec {
    pub fn regenerate(rule: DispatchRule) -> Self {
        Self::Regenerate { rule: rule.name() }
    }

    pub fn local_search(lambda: f64, utility: Utility, budget: u64) -> Self {
        Self::LocalSearch { lambda, utility: utility.name(), budget }
    }

    pub fn label(&self) -> String {
        match self {
            Self::RightShift => "right_shift".into(),
            Self::Regenerate { rule } => format!("regenerate_{rule}"),
            Self::LocalSearch { lambda, utility, .. } => format!("ls_{utility}_l{lambda}"),
        }
    }

    fn lambda(&self) -> Option<f64> {
        match self {
            Self::LocalSearch { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    fn build(&self, decay: f64, seed: u64) -> RepairPolicy {
        match *self {
            Self::RightShift => RepairPolicy::RightShift,
            Self::Regenerate { rule } => RepairPolicy::Regenerate(match rule {
                "spt" => DispatchRule::Spt,
                "edd" => DispatchRule::Edd,
                _ => DispatchRule::Fcfs,
            }),
            Self::LocalSearch { lambda, utility, budget } => {
                RepairPolicy::LocalSearch(LocalSearchParams {
                    lambda,
                    utility: if utility == "makespan" { Utility::Makespan } else { Utility::WeightedTardiness },
                    decay,
                    include_frozen: false,
                    iteration_budget: budget,
                    seed,
                })
            }
        }
    }
}

/// A measure whose instability parameters are filled in per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum MeasureSpec {
    Wu,
    Lin,
    Combined { w_early: f64, w_late: f64 },
    Job { g_start: f64, g_completion: f64 },
    Sequence,
    SequenceMachine,
    Instability { include_frozen: bool },
}

impl MeasureSpec {
    pub fn all() -> Vec<Self> {
        vec![
            Self::Wu,
            Self::Lin,
            Self::Combined { w_early: 1.0, w_late: 1.0 },
            Self::Job { g_start: 1.0, g_completion: 1.0 },
            Self::Sequence,
            Self::SequenceMachine,
            Self::Instability { include_frozen: false },
        ]
    }

    pub fn build(&self, decay: f64, t0: Time) -> Measure {
        match *self {
            Self::Wu => Measure::Wu,
            Self::Lin => Measure::Lin,
            Self::Combined { w_early, w_late } => Measure::Combined { w_early, w_late },
            Self::Job { g_start, g_completion } => Measure::JobLevel { g_start, g_completion },
            Self::Sequence => Measure::Sequence(SequenceScope::Global),
            Self::SequenceMachine => Measure::Sequence(SequenceScope::PerMachine),
            Self::Instability { include_frozen } => {
                Measure::Instability(InstabilityConfig { decay, t0, include_frozen })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        self.build(1.0, 0).name()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub instances: u32,
    pub scenarios_per_instance: u32,
    pub seed: u64,
    #[serde(skip)]
    pub generator: GeneratorConfig,
    #[serde(skip)]
    pub scenario: ScenarioConfig,
    #[serde(skip)]
    pub mix: FactorMix,
    pub policies: Vec<PolicySpec>,
    pub measures: Vec<MeasureSpec>,
    pub decay: DecaySource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instances: 1,
            scenarios_per_instance: 1,
            seed: 0,
            generator: GeneratorConfig::default(),
            scenario: ScenarioConfig::default(),
            mix: FactorMix::one_each(),
            policies: vec![PolicySpec::RightShift],
            measures: MeasureSpec::all(),
            decay: DecaySource::Horizon { pc: 0.3 },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("cannot write report {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// One CSV line: one measure between the schedules before and after one event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub scenario: u32,
    pub policy: String,
    pub lambda: Option<f64>,
    pub step: usize,
    pub t0: Option<Time>,
    pub event: String,
    pub measure: String,
    pub total: Option<f64>,
    pub added: Option<usize>,
    pub removed: Option<usize>,
    pub makespan_before: Option<Time>,
    pub makespan_after: Option<Time>,
    pub tardiness_before: Option<u64>,
    pub tardiness_after: Option<u64>,
    pub runtime_us: u128,
    /// Relative directory of the persisted step files.
    pub files: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSeeds {
    pub instance: String,
    pub instance_seed: u64,
    pub scenario: u32,
    pub scenario_seed: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool_version: &'static str,
    pub config: ExperimentConfig,
    pub generator: GeneratorSummary,
    pub seeds: Vec<CellSeeds>,
    pub decay_per_instance: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSummary {
    pub n_jobs: u32,
    pub n_machines: u32,
    pub duration: (Time, Time),
    pub tightness: f64,
    pub mix: [u32; 6],
    pub downtime: (Time, Time),
    pub downtime_lead: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

type Cell<'a> = (&'a Prepared, &'a (u32, u64, Vec<RescheduleEvent>), usize, &'a PolicySpec);

struct Prepared {
    instance: Arc<ProblemInstance>,
    decay: f64,
    scenarios: Vec<(u32, u64, Vec<RescheduleEvent>)>,
}

fn instance_seed(seed: u64, i: u32) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

fn scenario_seed(seed: u64, i: u32, s: u32) -> u64 {
    instance_seed(seed, i).wrapping_mul(7919).wrapping_add(s as u64 + 1)
}

/// Runs the full matrix. When `out_dir` is given, writes `report.csv`,
/// `metadata.json`, the scenario event files and every step's instance and
/// schedule below it.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<ExperimentReport, ExperimentError> {
    if cfg.policies.is_empty() || cfg.measures.is_empty() {
        return Err(ExperimentError::Config("at least one policy and one measure are required".into()));
    }
    let mut prepared = Vec::new();
    let mut seeds = Vec::new();
    for i in 0..cfg.instances {
        let gen = GeneratorConfig { seed: instance_seed(cfg.seed, i), ..cfg.generator };
        let instance = Arc::new(generate_instance(&gen).map_err(|e| ExperimentError::Config(e.to_string()))?);
        let decay = cfg.decay.resolve(instance.horizon())?;
        let baseline = initial_schedule(&instance);
        let mut scenarios = Vec::new();
        for s in 0..cfg.scenarios_per_instance {
            let seed = scenario_seed(cfg.seed, i, s);
            let scenario = generate_scenario(&baseline, seed, &cfg.mix, &cfg.scenario)
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            if let Some(dir) = out_dir {
                let path = dir.join("scenarios").join(format!("{}_s{s}.events.json", instance.name()));
                format::write_events(&path, &scenario.events)?;
            }
            seeds.push(CellSeeds {
                instance: instance.name().to_owned(),
                instance_seed: gen.seed,
                scenario: s,
                scenario_seed: seed,
                warnings: scenario.warnings,
            });
            scenarios.push((s, seed, scenario.events));
        }
        if let Some(dir) = out_dir {
            format::write_instance(&dir.join("instances").join(format!("{}.json", instance.name())), &instance)?;
        }
        prepared.push(Prepared { instance, decay, scenarios });
    }

    let cells: Vec<Cell> = prepared
        .iter()
        .flat_map(|p| {
            p.scenarios.iter().flat_map(move |sc| {
                cfg.policies.iter().enumerate().map(move |(k, pol)| (p, sc, k, pol))
            })
        })
        .collect();

    let rows: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|&(p, sc, k, pol)| run_cell(p, sc, k, pol, &cfg.measures, out_dir))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();

    let metadata = Metadata {
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        generator: GeneratorSummary {
            n_jobs: cfg.generator.n_jobs,
            n_machines: cfg.generator.n_machines,
            duration: (cfg.generator.duration_lo, cfg.generator.duration_hi),
            tightness: cfg.generator.tightness,
            mix: [
                cfg.mix.machine_down,
                cfg.mix.new_job,
                cfg.mix.rush_job,
                cfg.mix.cancel_job,
                cfg.mix.due_date_change,
                cfg.mix.weight_change,
            ],
            downtime: (cfg.scenario.downtime_lo, cfg.scenario.downtime_hi),
            downtime_lead: cfg.scenario.downtime_lead,
        },
        seeds,
        decay_per_instance: prepared.iter().map(|p| (p.instance.name().to_owned(), p.decay)).collect(),
    };
    let report = ExperimentReport { rows, metadata };
    if let Some(dir) = out_dir {
        write_report(dir, &report)?;
    }
    Ok(report)
}

fn cell_dir(instance: &str, scenario: u32, policy: &str) -> String {
    format!("cells/{instance}/s{scenario}/{policy}")
}

fn run_cell(
    prepared: &Prepared,
    (scenario, seed, events): &(u32, u64, Vec<RescheduleEvent>),
    policy_index: usize,
    spec: &PolicySpec,
    measures: &[MeasureSpec],
    out_dir: Option<&Path>,
) -> Result<Vec<Row>, ExperimentError> {
    let label = spec.label();
    let files = cell_dir(prepared.instance.name(), *scenario, &label);
    let policy = spec.build(prepared.decay, seed.wrapping_add(policy_index as u64));
    let persist = |step: usize, s: &Schedule| -> Result<(), FormatError> {
        if let Some(dir) = out_dir {
            let base = dir.join(&files);
            format::write_instance(&base.join(format!("step{step}.instance.json")), s.instance())?;
            format::write_schedule(&base.join(format!("step{step}.schedule.json")), s)?;
        }
        Ok(())
    };
    let row = |step: usize, t0: Option<Time>, event: &str, measure: &str| Row {
        instance: prepared.instance.name().to_owned(),
        scenario: *scenario,
        policy: label.clone(),
        lambda: spec.lambda(),
        step,
        t0,
        event: event.to_owned(),
        measure: measure.to_owned(),
        total: None,
        added: None,
        removed: None,
        makespan_before: None,
        makespan_after: None,
        tardiness_before: None,
        tardiness_after: None,
        runtime_us: 0,
        files: files.clone(),
        status: "ok".into(),
    };

    let mut x = initial_schedule(&prepared.instance);
    persist(0, &x)?;
    let mut rows = Vec::new();

    if events.is_empty() {
        // no disturbance: the plan is compared with itself
        let p = pair(&x, &x).expect("schedule pairs with itself");
        for m in measures {
            let r = m.build(prepared.decay, 0).evaluate(&p).expect("measure parameters validated");
            rows.push(Row {
                total: Some(r.total),
                added: Some(0),
                removed: Some(0),
                makespan_before: Some(x.makespan()),
                makespan_after: Some(x.makespan()),
                tardiness_before: Some(x.total_weighted_tardiness()),
                tardiness_after: Some(x.total_weighted_tardiness()),
                ..row(0, None, "none", m.name())
            });
        }
        return Ok(rows);
    }

    for (idx, event) in events.iter().enumerate() {
        let step = idx + 1;
        let started = Instant::now();
        let outcome = apply_event(&x, event)
            .and_then(|applied| repair(&policy, &applied, &x))
            .map_err(|e| e.to_string())
            .and_then(|y| {
                let v = y.validate();
                if v.is_empty() {
                    Ok(y)
                } else {
                    Err(format!("repair produced an infeasible schedule: {}", v[0]))
                }
            });
        let runtime_us = started.elapsed().as_micros();
        let y = match outcome {
            Ok(y) => y,
            Err(msg) => {
                for m in measures {
                    rows.push(Row {
                        runtime_us,
                        status: format!("failed: {msg}"),
                        ..row(step, Some(event.t0), event.kind.name(), m.name())
                    });
                }
                return Ok(rows);
            }
        };
        persist(step, &y)?;
        let p = pair(&x, &y).map_err(|e| ExperimentError::Config(e.to_string()))?;
        for m in measures {
            let base = row(step, Some(event.t0), event.kind.name(), m.name());
            let r = match m.build(prepared.decay, event.t0).evaluate(&p) {
                Ok(r) => r,
                Err(e) => {
                    rows.push(Row { status: format!("failed: {e}"), ..base });
                    continue;
                }
            };
            rows.push(Row {
                total: Some(r.total),
                added: Some(r.added_count),
                removed: Some(r.removed_count),
                makespan_before: Some(x.makespan()),
                makespan_after: Some(y.makespan()),
                tardiness_before: Some(x.total_weighted_tardiness()),
                tardiness_after: Some(y.total_weighted_tardiness()),
                runtime_us,
                ..base
            });
        }
        x = y;
    }
    Ok(rows)
}

fn write_report(dir: &Path, report: &ExperimentReport) -> Result<(), ExperimentError> {
    let path = dir.join("report.csv");
    let csv_err = |source| ExperimentError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    for row in &report.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| csv_err(e.into()))?;
    format::write_json(&dir.join("metadata.json"), &report.metadata)?;
    Ok(())
}
