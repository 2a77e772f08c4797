use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use instab::experiment::{run_experiment, DecaySource, ExperimentConfig, MeasureSpec, PolicySpec};
use instab::format::{self, ReportDoc};
use instab_core::dynamics::{
    apply_event, initial_schedule, repair, DispatchRule, LocalSearchParams, RepairPolicy,
};
use instab_core::elicitation::{i_from_horizon, i_from_period, HorizonStatement, PeriodStatement};
use instab_core::generate::{
    generate_instance, generate_scenario, FactorMix, GeneratorConfig, ScenarioConfig,
};
use instab_core::measures::{impact, pair};
use instab_core::model::{ProblemInstance, Schedule, Time, Utility};

/// Schedule-difference measures, rescheduling simulation and experiments.
#[derive(Parser)]
#[command(name = "instab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two schedules under one measure.
    Measure(MeasureCmd),
    /// Derive the decay base from a decision maker's statement.
    Elicit(ElicitCmd),
    /// Replay an event file against a schedule and repair after each event.
    Simulate(SimulateCmd),
    /// Generate instances and disturbance scenarios.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Run the instance × scenario × policy × measure matrix.
    Experiment(ExperimentCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Wu,
    Lin,
    Combined,
    Job,
    Sequence,
    SequenceMachine,
    Instability,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    RightShift,
    RegenerateSpt,
    RegenerateEdd,
    RegenerateFcfs,
    LocalSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum UtilityArg {
    Makespan,
    WeightedTardiness,
}

impl From<UtilityArg> for Utility {
    fn from(u: UtilityArg) -> Self {
        match u {
            UtilityArg::Makespan => Utility::Makespan,
            UtilityArg::WeightedTardiness => Utility::WeightedTardiness,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Decay base: explicit, from (pc, horizon), or from (dec, period).
/// Defaults to pc = 0.3 over the instance horizon.
#[derive(Args, Clone)]
struct DecayArgs {
    /// Decay base I in (0, 1].
    #[arg(long, conflicts_with_all = ["pc", "dec"])]
    decay: Option<f64>,
    /// Impact remaining at the end of the horizon.
    #[arg(long, conflicts_with = "dec")]
    pc: Option<f64>,
    /// Horizon for --pc; defaults to the instance horizon.
    #[arg(long)]
    horizon: Option<Time>,
    /// Relative decrease of impact per period.
    #[arg(long)]
    dec: Option<f64>,
    #[arg(long, default_value_t = 5, requires = "dec")]
    period: Time,
}

impl DecayArgs {
    fn source(&self) -> Result<DecaySource> {
        Ok(match (self.decay, self.pc, self.dec) {
            (Some(decay), _, _) => DecaySource::Fixed { decay },
            (_, _, Some(dec)) => DecaySource::Period { dec, period: self.period },
            (_, pc, _) => {
                let pc = pc.unwrap_or(0.3);
                match self.horizon {
                    Some(horizon) => DecaySource::Fixed {
                        decay: i_from_horizon(HorizonStatement { pc, horizon })?,
                    },
                    None => DecaySource::Horizon { pc },
                }
            }
        })
    }

    fn resolve(&self, instance: &ProblemInstance) -> Result<f64> {
        Ok(self.source()?.resolve(instance.horizon())?)
    }
}

#[derive(Args, Clone)]
struct MeasureParams {
    #[arg(long, default_value_t = 1.0)]
    w_early: f64,
    #[arg(long, default_value_t = 1.0)]
    w_late: f64,
    #[arg(long, default_value_t = 1.0)]
    g_start: f64,
    #[arg(long, default_value_t = 1.0)]
    g_completion: f64,
    /// Count operations that started before the rescheduling point.
    #[arg(long)]
    include_frozen: bool,
}

impl MeasureParams {
    fn spec(&self, m: MeasureArg) -> MeasureSpec {
        match m {
            MeasureArg::Wu => MeasureSpec::Wu,
            MeasureArg::Lin => MeasureSpec::Lin,
            MeasureArg::Combined => MeasureSpec::Combined { w_early: self.w_early, w_late: self.w_late },
            MeasureArg::Job => MeasureSpec::Job { g_start: self.g_start, g_completion: self.g_completion },
            MeasureArg::Sequence => MeasureSpec::Sequence,
            MeasureArg::SequenceMachine => MeasureSpec::SequenceMachine,
            MeasureArg::Instability => MeasureSpec::Instability { include_frozen: self.include_frozen },
        }
    }
}

#[derive(Args)]
struct MeasureCmd {
    /// Instance of the original schedule.
    #[arg(long)]
    instance: PathBuf,
    /// Instance of the revised schedule, when it differs.
    #[arg(long)]
    revised_instance: Option<PathBuf>,
    /// Original schedule x.
    original: PathBuf,
    /// Revised schedule x'.
    revised: PathBuf,
    #[arg(long, value_enum, default_value = "instability")]
    measure: MeasureArg,
    #[command(flatten)]
    params: MeasureParams,
    #[command(flatten)]
    decay: DecayArgs,
    /// Rescheduling point.
    #[arg(long, default_value_t = 0)]
    t0: Time,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct ElicitCmd {
    #[arg(long, required_unless_present = "dec", conflicts_with = "dec", requires = "horizon")]
    pc: Option<f64>,
    #[arg(long)]
    horizon: Option<Time>,
    #[arg(long)]
    dec: Option<f64>,
    #[arg(long, default_value_t = 5)]
    period: Time,
}

#[derive(Args, Clone)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value = "right-shift")]
    policy: PolicyArg,
    /// Weight of utility against instability for local search.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "makespan")]
    utility: UtilityArg,
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long)]
    instance: PathBuf,
    /// Starting schedule; FCFS dispatch when omitted.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    events: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Measures reported after each step; all when omitted.
    #[arg(long = "measure", value_enum, value_delimiter = ',')]
    measures: Vec<MeasureArg>,
    #[command(flatten)]
    params: MeasureParams,
    #[command(flatten)]
    decay: DecayArgs,
    /// Directory for revised instances, schedules and reports.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 6)]
    jobs: u32,
    #[arg(long, default_value_t = 6)]
    machines: u32,
    #[arg(long, default_value_t = 1)]
    min_duration: Time,
    #[arg(long, default_value_t = 10)]
    max_duration: Time,
    #[arg(long, default_value_t = 1.5)]
    tightness: f64,
}

impl GeneratorArgs {
    fn config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n_jobs: self.jobs,
            n_machines: self.machines,
            duration_lo: self.min_duration,
            duration_hi: self.max_duration,
            tightness: self.tightness,
            seed,
        }
    }

    fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            duration_lo: self.min_duration,
            duration_hi: self.max_duration,
            tightness: self.tightness,
            ..ScenarioConfig::default()
        }
    }
}

#[derive(Args, Clone)]
struct MixArgs {
    #[arg(long, default_value_t = 1)]
    machine_down: u32,
    #[arg(long, default_value_t = 1)]
    new_job: u32,
    #[arg(long, default_value_t = 1)]
    rush_job: u32,
    #[arg(long, default_value_t = 1)]
    cancel_job: u32,
    #[arg(long, default_value_t = 1)]
    due_date_change: u32,
    #[arg(long, default_value_t = 1)]
    weight_change: u32,
}

impl From<&MixArgs> for FactorMix {
    fn from(m: &MixArgs) -> Self {
        FactorMix {
            machine_down: m.machine_down,
            new_job: m.new_job,
            rush_job: m.rush_job,
            cancel_job: m.cancel_job,
            due_date_change: m.due_date_change,
            weight_change: m.weight_change,
        }
    }
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random job shop: every job visits every machine once.
    Instance {
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the FCFS schedule of the instance.
        #[arg(long)]
        schedule_out: Option<PathBuf>,
    },
    /// Disturbance events against a schedule of an instance.
    Scenario {
        #[arg(long)]
        instance: PathBuf,
        /// Schedule the events are timed against; FCFS dispatch when omitted.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        mix: MixArgs,
        #[arg(long, default_value_t = 1)]
        min_duration: Time,
        #[arg(long, default_value_t = 10)]
        max_duration: Time,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentCmd {
    #[arg(long, default_value_t = 3)]
    instances: u32,
    #[arg(long, default_value_t = 2)]
    scenarios: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    gen: GeneratorArgs,
    #[command(flatten)]
    mix: MixArgs,
    #[arg(
        long = "policy",
        value_enum,
        value_delimiter = ',',
        default_value = "right-shift,regenerate-spt,local-search"
    )]
    policies: Vec<PolicyArg>,
    /// Lambda values swept for local search.
    #[arg(long = "lambda", value_delimiter = ',', default_value = "0,0.5,1")]
    lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value = "makespan")]
    utility: UtilityArg,
    #[arg(long, default_value_t = 500)]
    budget: u64,
    /// Measures evaluated per step; all when omitted.
    #[arg(long = "measure", value_enum, value_delimiter = ',')]
    measures: Vec<MeasureArg>,
    #[command(flatten)]
    params: MeasureParams,
    #[command(flatten)]
    decay: DecayArgs,
    #[arg(long, short, env = "INSTAB_OUT_DIR")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Measure(cmd) => measure(cmd),
        Command::Elicit(cmd) => elicit(cmd).map(|_| ExitCode::SUCCESS),
        Command::Simulate(cmd) => simulate(cmd),
        Command::Gen(cmd) => gen(cmd).map(|_| ExitCode::SUCCESS),
        Command::Experiment(cmd) => experiment(cmd).map(|_| ExitCode::SUCCESS),
    }
}

fn load_instance(path: &Path) -> Result<Arc<ProblemInstance>> {
    Ok(Arc::new(format::read_instance(path)?))
}

fn load_schedule(path: Option<&Path>, instance: &Arc<ProblemInstance>) -> Result<Schedule> {
    match path {
        Some(p) => Ok(format::read_schedule(p, instance.clone())?),
        None => Ok(initial_schedule(instance)),
    }
}

/// Prints violations and reports whether the schedule is feasible.
fn check_feasible(label: &str, s: &Schedule) -> bool {
    let violations = s.validate();
    for v in &violations {
        eprintln!("{label}: {v}");
    }
    violations.is_empty()
}

fn measure(cmd: MeasureCmd) -> Result<ExitCode> {
    let inst = load_instance(&cmd.instance)?;
    let revised_inst = match &cmd.revised_instance {
        Some(p) => load_instance(p)?,
        None => inst.clone(),
    };
    let x = load_schedule(Some(&cmd.original), &inst)?;
    let y = load_schedule(Some(&cmd.revised), &revised_inst)?;
    let ok_x = check_feasible("original", &x);
    let ok_y = check_feasible("revised", &y);
    if !(ok_x && ok_y) {
        return Ok(ExitCode::from(2));
    }
    let decay = cmd.decay.resolve(&revised_inst)?;
    let m = cmd.params.spec(cmd.measure).build(decay, cmd.t0);
    let report = m.evaluate(&pair(&x, &y)?)?;
    let doc = ReportDoc::new(m.name(), &report);
    match cmd.format {
        OutputFormat::Text => print!("{}", doc.to_text()),
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn elicit(cmd: ElicitCmd) -> Result<()> {
    let (decay, horizon) = match (cmd.pc, cmd.dec) {
        (Some(pc), _) => {
            let horizon = cmd.horizon.context("--pc needs --horizon")?;
            (i_from_horizon(HorizonStatement { pc, horizon })?, horizon)
        }
        (None, Some(dec)) => {
            let period = cmd.period;
            (i_from_period(PeriodStatement { dec, period })?, cmd.horizon.unwrap_or(period))
        }
        (None, None) => bail!("give either --pc and --horizon or --dec"),
    };
    println!("I = {decay:.17}");
    println!("dist  imp(dist)");
    let mut rows = vec![0, cmd.period, horizon];
    rows.sort_unstable();
    rows.dedup();
    for d in rows {
        println!("{d:<5} {:.17}", impact(d as i64, decay));
    }
    Ok(())
}

fn policy(args: &PolicyArgs, decay: f64) -> RepairPolicy {
    match args.policy {
        PolicyArg::RightShift => RepairPolicy::RightShift,
        PolicyArg::RegenerateSpt => RepairPolicy::Regenerate(DispatchRule::Spt),
        PolicyArg::RegenerateEdd => RepairPolicy::Regenerate(DispatchRule::Edd),
        PolicyArg::RegenerateFcfs => RepairPolicy::Regenerate(DispatchRule::Fcfs),
        PolicyArg::LocalSearch => RepairPolicy::LocalSearch(LocalSearchParams {
            lambda: args.lambda,
            utility: args.utility.into(),
            decay,
            include_frozen: false,
            iteration_budget: args.budget,
            seed: args.seed,
        }),
    }
}

fn measure_list(args: &[MeasureArg], params: &MeasureParams) -> Vec<MeasureSpec> {
    if args.is_empty() {
        let mut all = MeasureSpec::all();
        for m in &mut all {
            *m = match *m {
                MeasureSpec::Combined { .. } => params.spec(MeasureArg::Combined),
                MeasureSpec::Job { .. } => params.spec(MeasureArg::Job),
                MeasureSpec::Instability { .. } => params.spec(MeasureArg::Instability),
                other => other,
            };
        }
        all
    } else {
        args.iter().map(|&m| params.spec(m)).collect()
    }
}

fn simulate(cmd: SimulateCmd) -> Result<ExitCode> {
    let inst = load_instance(&cmd.instance)?;
    let mut x = load_schedule(cmd.schedule.as_deref(), &inst)?;
    if !check_feasible("schedule", &x) {
        return Ok(ExitCode::from(2));
    }
    let events = format::read_events(&cmd.events)?;
    let decay = cmd.decay.resolve(&inst)?;
    let policy = policy(&cmd.policy, decay);
    let measures = measure_list(&cmd.measures, &cmd.params);
    for (i, event) in events.iter().enumerate() {
        let step = i + 1;
        let applied = apply_event(&x, event).with_context(|| format!("event {step}"))?;
        let y = repair(&policy, &applied, &x).with_context(|| format!("repair after event {step}"))?;
        let dir = cmd.out.join(format!("step{step}"));
        format::write_instance(&dir.join("instance.json"), y.instance())?;
        format::write_schedule(&dir.join("schedule.json"), &y)?;
        let p = pair(&x, &y)?;
        println!(
            "step {step}  t0 {}  {}  makespan {} -> {}",
            event.t0,
            event.kind.name(),
            x.makespan(),
            y.makespan()
        );
        let mut docs = Vec::new();
        for spec in &measures {
            let m = spec.build(decay, event.t0);
            let doc = ReportDoc::new(m.name(), &m.evaluate(&p)?);
            println!("  {:<16} {}", doc.measure, doc.total);
            docs.push(doc);
        }
        format::write_json(&dir.join("reports.json"), &docs)?;
        x = y;
    }
    format::write_instance(&cmd.out.join("revised.instance.json"), x.instance())?;
    format::write_schedule(&cmd.out.join("revised.schedule.json"), &x)?;
    Ok(ExitCode::SUCCESS)
}

fn gen(cmd: GenCmd) -> Result<()> {
    match cmd {
        GenCmd::Instance { gen, seed, out, schedule_out } => {
            let inst = Arc::new(generate_instance(&gen.config(seed))?);
            format::write_instance(&out, &inst)?;
            if let Some(path) = schedule_out {
                format::write_schedule(&path, &initial_schedule(&inst))?;
            }
        }
        GenCmd::Scenario { instance, schedule, mix, min_duration, max_duration, seed, out } => {
            let inst = load_instance(&instance)?;
            let x = load_schedule(schedule.as_deref(), &inst)?;
            let cfg = ScenarioConfig { duration_lo: min_duration, duration_hi: max_duration, ..Default::default() };
            let scenario = generate_scenario(&x, seed, &FactorMix::from(&mix), &cfg)?;
            for w in &scenario.warnings {
                eprintln!("warning: {w}");
            }
            format::write_events(&out, &scenario.events)?;
        }
    }
    Ok(())
}

fn experiment(cmd: ExperimentCmd) -> Result<()> {
    let mut policies = Vec::new();
    for p in &cmd.policies {
        match p {
            PolicyArg::RightShift => policies.push(PolicySpec::RightShift),
            PolicyArg::RegenerateSpt => policies.push(PolicySpec::regenerate(DispatchRule::Spt)),
            PolicyArg::RegenerateEdd => policies.push(PolicySpec::regenerate(DispatchRule::Edd)),
            PolicyArg::RegenerateFcfs => policies.push(PolicySpec::regenerate(DispatchRule::Fcfs)),
            PolicyArg::LocalSearch => policies.extend(
                cmd.lambdas
                    .iter()
                    .map(|&l| PolicySpec::local_search(l, cmd.utility.into(), cmd.budget)),
            ),
        }
    }
    let cfg = ExperimentConfig {
        instances: cmd.instances,
        scenarios_per_instance: cmd.scenarios,
        seed: cmd.seed,
        generator: cmd.gen.config(0),
        scenario: cmd.gen.scenario(),
        mix: FactorMix::from(&cmd.mix),
        policies,
        measures: measure_list(&cmd.measures, &cmd.params),
        decay: cmd.decay.source()?,
    };
    let report = run_experiment(&cfg, Some(&cmd.out))?;
    let failed = report.rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "{} rows ({} failed) written to {}",
        report.rows.len(),
        failed,
        cmd.out.join("report.csv").display()
    );
    Ok(())
}
