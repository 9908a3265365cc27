//! Command-line workflows: synthesize data, learn and evaluate models,
//! filter logs, simulate trajectories, and run the decision analyses.
//!
//! Every run resolves its parameters from flags, falling back to an
//! optional JSON config file (`--config`, object keyed by subcommand) and
//! then to built-in defaults. The resolved configuration is embedded in
//! each output artifact, so identical configs reproduce byte-identical
//! artifacts when the timestamp is suppressed with `--no-timestamp`.
//! Relative output paths honor the `RIDEMIND_OUT_DIR` override.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::bins::BinConfig;
use crate::data::{
    generate_synthetic, parse_event_log_path, write_event_log_path, SynthConfig, TargetSet,
};
use crate::dbn::{filter_step, forward_simulate, BeliefState, DbnModel, EventInput, TrajectoryPoint};
use crate::decision::{
    cost_sensitivity_sweep, optimal_policy, policy_table, value_of_information, Evidence,
    EvidenceVariable, InfluenceDiagram, UtilitySpec,
};
use crate::error::{Error, Result};
use crate::learning::{
    estimate_cpds, evaluate_accuracy, structure_statistics, EvalOptions,
};
use crate::model_io::{load_model, load_structure, save_model};
use crate::models::reference_model;
use crate::structure::{compact_structure, default_structure, persistence_structure, StructureCandidate};
use crate::vars::{Alignment, AvAction, Contributor, Intention, OtherAction};

#[derive(Parser)]
#[command(
    name = "ridemind",
    version,
    about = "Infer rider well-being, trust, and intention from interaction logs and choose accommodative actions"
)]
struct Cli {
    /// JSON config file with per-subcommand defaults; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Omit the timestamp from output artifacts (for byte-identical reruns).
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic event log from a model.
    Synth(SynthArgs),
    /// Estimate CPDs from an event log with a Dirichlet prior.
    Learn(LearnArgs),
    /// Cross-validated accuracy and held-out log-likelihood report.
    Eval(EvalArgs),
    /// Belief trace over an event log.
    Filter(FilterArgs),
    /// Expected-state trajectory under a scripted scenario.
    Simulate(SimulateArgs),
    /// Optimal accommodative policy, optionally per evidence value.
    Policy(PolicyArgs),
    /// Value of information per observable node.
    Voi(VoiArgs),
    /// Cost-sensitivity sweep of the trade-off policy.
    Sweep(SweepArgs),
    /// Dependency-screening t-tests and correlation over an event log.
    Stats(StatsArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path (a .meta.json sidecar records the run config).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Model JSON to sample from; defaults to the built-in reference model.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    #[arg(long)]
    participants: Option<usize>,
    /// Events per participant (contributors alternate other-then-AV).
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Record the sampled intention on every event, not only AV-contributor ones.
    #[arg(long)]
    intention_everywhere: bool,
    /// Fix both contributors' actions, e.g. "O_PLUS,R_PLUS".
    #[arg(long, value_name = "O_ACTION,R_ACTION")]
    fixed_actions: Option<String>,
}

#[derive(Args)]
struct LearnArgs {
    /// Event-log CSV to learn from.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Output model JSON path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Structure: default | persistence | compact | path to structure JSON.
    #[arg(long)]
    structure: Option<String>,
    /// Dirichlet prior strength.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Output report JSON path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[arg(long)]
    structure: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Worker-count hint; results are identical for any value.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Output belief-trace CSV path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Which observations to condition on: "actions" (inputs only) or
    /// "full" (inputs plus questionnaire scores and stated intention).
    #[arg(long)]
    evidence: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model JSON; defaults to the built-in reference model.
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[arg(long)]
    events: Option<usize>,
    /// Event pattern: r | o | alternate (other-then-AV, as in the study).
    #[arg(long)]
    contributor: Option<String>,
    /// AV action on R events: R_PLUS | R_MINUS.
    #[arg(long)]
    action: Option<String>,
    /// Alignment on R events: AL0 | AL1 (omit to leave unobserved).
    #[arg(long)]
    alignment: Option<String>,
    /// Other's action on O events (and recent action for R events).
    #[arg(long)]
    other_action: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Output JSON path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// wellbeing | trust | tradeoff.
    #[arg(long)]
    utility: Option<String>,
    /// Yielding cost for the trade-off utility.
    #[arg(long)]
    cost: Option<f64>,
    /// Evidence, e.g. "w_prev=2,i=I_PLUS".
    #[arg(long)]
    evidence: Option<String>,
    /// Tabulate the policy per value of this variable
    /// (w_prev | t_prev | i | w_o_prev).
    #[arg(long)]
    by: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct VoiArgs {
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[arg(long)]
    utility: Option<String>,
    #[arg(long)]
    cost: Option<f64>,
    #[arg(long)]
    evidence: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_name = "PATH")]
    model: Option<PathBuf>,
    /// Output sweep CSV path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Explicit comma-separated cost grid, e.g. "0,0.1,0.2".
    #[arg(long)]
    costs: Option<String>,
    /// Inclusive grid upper bound (grid starts at 0).
    #[arg(long)]
    cost_max: Option<f64>,
    #[arg(long)]
    cost_step: Option<f64>,
    /// Evidence variable to tabulate over.
    #[arg(long)]
    by: Option<String>,
    #[arg(long)]
    evidence: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[arg(long)]
    bins: Option<usize>,
}

/// Run the CLI; returns the process exit code (0 success, 1 validation or
/// domain error, 2 usage error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    config: serde_json::Value,
    no_timestamp: bool,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => serde_json::Value::Null,
        };
        Ok(Ctx {
            config,
            no_timestamp: cli.no_timestamp,
        })
    }

    /// Flag value, else config\[section\]\[key\], else the default.
    fn resolve<V: DeserializeOwned>(
        &self,
        section: &str,
        key: &str,
        flag: Option<V>,
        default: V,
    ) -> Result<V> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.config.get(section).and_then(|s| s.get(key)) {
            return serde_json::from_value(raw.clone()).map_err(|e| {
                Error::usage(format!("config field {section}.{key} is malformed: {e}"))
            });
        }
        Ok(default)
    }

    fn timestamp_field(&self) -> serde_json::Value {
        if self.no_timestamp {
            serde_json::Value::Null
        } else {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            json!(secs)
        }
    }

    fn write_json(&self, path: &Path, mut artifact: serde_json::Value) -> Result<()> {
        let ts = self.timestamp_field();
        if !ts.is_null() {
            artifact["timestamp"] = ts;
        }
        std::fs::write(path, serde_json::to_string_pretty(&artifact)? + "\n")?;
        Ok(())
    }

    /// CSV artifact with `# config:` (and optionally `# timestamp:`)
    /// comment lines ahead of the header.
    fn write_csv(&self, path: &Path, config: &serde_json::Value, body: &[u8]) -> Result<()> {
        let mut out = format!("# config: {}\n", serde_json::to_string(config)?);
        let ts = self.timestamp_field();
        if !ts.is_null() {
            out.push_str(&format!("# timestamp: {ts}\n"));
        }
        let mut bytes = out.into_bytes();
        bytes.extend_from_slice(body);
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

fn out_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os("RIDEMIND_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

fn resolve_structure(name: &str) -> Result<StructureCandidate> {
    match name {
        "default" => Ok(default_structure()),
        "persistence" => Ok(persistence_structure()),
        "compact" => Ok(compact_structure()),
        path => load_structure(path),
    }
}

fn resolve_model(path: Option<&Path>, bins: usize) -> Result<DbnModel> {
    match path {
        Some(p) => load_model(p),
        None => reference_model(bins),
    }
}

fn parse_utility(name: &str, cost: f64) -> Result<UtilitySpec> {
    match name {
        "wellbeing" => Ok(UtilitySpec::UserWellbeing),
        "trust" => Ok(UtilitySpec::UserTrust),
        "tradeoff" => Ok(UtilitySpec::Tradeoff { cost }),
        _ => Err(Error::usage(format!(
            "unknown utility {name:?} (expected wellbeing, trust, or tradeoff)"
        ))),
    }
}

fn parse_evidence(spec: &str, n_bins: usize) -> Result<Evidence> {
    let mut ev = Evidence::none();
    for item in spec.split(',').filter(|s| !s.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::usage(format!("evidence item {item:?} is not of the form var=value"))
        })?;
        let var = EvidenceVariable::parse(key.trim())?;
        let value = value.trim();
        let index = match var {
            EvidenceVariable::Intention => match Intention::parse_token(value) {
                Ok(i) => i.index(),
                Err(_) => value.parse::<usize>().map_err(|_| {
                    Error::usage(format!("cannot parse intention value {value:?}"))
                })?,
            },
            _ => value.parse::<usize>().map_err(|_| {
                Error::usage(format!("evidence value {value:?} is not a bin index"))
            })?,
        };
        ev = var.assign(ev, index, n_bins)?;
    }
    Ok(ev)
}

fn dispatch(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(&cli)?;
    match &cli.command {
        Command::Synth(a) => cmd_synth(&ctx, a),
        Command::Learn(a) => cmd_learn(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Filter(a) => cmd_filter(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Policy(a) => cmd_policy(&ctx, a),
        Command::Voi(a) => cmd_voi(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Stats(a) => cmd_stats(&ctx, a),
    }
}

fn cmd_synth(ctx: &Ctx, a: &SynthArgs) -> Result<()> {
    let participants = ctx.resolve("synth", "participants", a.participants, 300)?;
    let events = ctx.resolve("synth", "events", a.events, 4)?;
    let seed = ctx.resolve("synth", "seed", a.seed, 0)?;
    let bins = ctx.resolve("synth", "bins", a.bins, 6)?;
    let fixed_actions = match &a.fixed_actions {
        Some(s) => {
            let (o, r) = s.split_once(',').ok_or_else(|| {
                Error::usage("--fixed-actions expects \"O_ACTION,R_ACTION\"".to_string())
            })?;
            Some((
                OtherAction::parse_token(o.trim())?,
                AvAction::parse_token(r.trim())?,
            ))
        }
        None => None,
    };
    let model = resolve_model(a.model.as_deref(), bins)?;
    let synth_config = SynthConfig {
        n_participants: participants,
        events_per_participant: events,
        seed,
        intention_everywhere: a.intention_everywhere,
        fixed_actions,
    };
    let dataset = generate_synthetic(&model, &synth_config)?;

    let out = out_path(&a.out);
    write_event_log_path(&dataset, &out)?;
    let config = json!({
        "command": "synth",
        "model": a.model.as_ref().map(|p| p.display().to_string()),
        "participants": participants,
        "events": events,
        "seed": seed,
        "bins": bins,
        "intention_everywhere": a.intention_everywhere,
        "fixed_actions": a.fixed_actions,
        "out": a.out.display().to_string(),
    });
    let meta = out.with_extension("meta.json");
    ctx.write_json(&meta, json!({ "config": config }))?;
    println!(
        "wrote {} records for {participants} participants to {}",
        dataset.n_records(),
        out.display()
    );
    Ok(())
}

fn cmd_learn(ctx: &Ctx, a: &LearnArgs) -> Result<()> {
    let structure_name = ctx.resolve(
        "learn",
        "structure",
        a.structure.clone(),
        "default".to_string(),
    )?;
    let alpha = ctx.resolve("learn", "alpha", a.alpha, 1.0)?;
    let bins = ctx.resolve("learn", "bins", a.bins, 6)?;
    let structure = resolve_structure(&structure_name)?;
    let dataset = parse_event_log_path(&a.data, BinConfig::new(bins)?)?;
    let model = estimate_cpds(&dataset, &structure, alpha)?;

    let config = json!({
        "command": "learn",
        "data": a.data.display().to_string(),
        "structure": structure_name,
        "alpha": alpha,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let ts = ctx.timestamp_field();
    let mut provenance = json!({ "config": config });
    if !ts.is_null() {
        provenance["timestamp"] = ts;
    }
    let out = out_path(&a.out);
    save_model(&model, &out, Some(provenance))?;
    println!(
        "learned {} ({} records, alpha {alpha}) -> {}",
        model.structure_id(),
        dataset.n_records(),
        out.display()
    );
    Ok(())
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let structure_name = ctx.resolve(
        "eval",
        "structure",
        a.structure.clone(),
        "default".to_string(),
    )?;
    let opts = EvalOptions {
        folds: ctx.resolve("eval", "folds", a.folds, 5)?,
        iterations: ctx.resolve("eval", "iterations", a.iterations, 100)?,
        seed: ctx.resolve("eval", "seed", a.seed, 0)?,
        alpha: ctx.resolve("eval", "alpha", a.alpha, 1.0)?,
        workers: ctx.resolve("eval", "workers", a.workers, 0)?,
    };
    let bins = ctx.resolve("eval", "bins", a.bins, 6)?;
    let structure = resolve_structure(&structure_name)?;
    let dataset = parse_event_log_path(&a.data, BinConfig::new(bins)?)?;
    let report = evaluate_accuracy(&dataset, &structure, &opts)?;

    let config = json!({
        "command": "eval",
        "data": a.data.display().to_string(),
        "structure": structure_name,
        "folds": opts.folds,
        "iterations": opts.iterations,
        "seed": opts.seed,
        "alpha": opts.alpha,
        "workers": opts.workers,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_json(&out, json!({ "config": config, "report": report }))?;
    for (target, acc) in &report.per_target_accuracy {
        println!("{target}: accuracy {acc:.4}");
    }
    println!("report -> {}", out.display());
    Ok(())
}

fn cmd_filter(ctx: &Ctx, a: &FilterArgs) -> Result<()> {
    let evidence_mode = ctx.resolve(
        "filter",
        "evidence",
        a.evidence.clone(),
        "actions".to_string(),
    )?;
    let targets = match evidence_mode.as_str() {
        "actions" => TargetSet::none(),
        "full" => TargetSet::all(),
        other => {
            return Err(Error::usage(format!(
                "unknown evidence mode {other:?} (expected actions or full)"
            )))
        }
    };
    let model = load_model(&a.model)?;
    let dataset = parse_event_log_path(&a.data, BinConfig::new(model.n_bins())?)?;

    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record(["participant_id", "event_index", "E_w", "E_t", "P_I_plus", "E_wO"])?;
        for (seq, inputs) in dataset
            .sequences
            .iter()
            .zip(dataset.to_event_inputs(targets))
        {
            let mut belief = BeliefState::initial(&model)?;
            for event in &inputs {
                belief = filter_step(&belief, event, &model)?;
                let p = TrajectoryPoint::of(&belief);
                w.write_record([
                    seq.participant_id.clone(),
                    p.event_index.to_string(),
                    format!("{:.12}", p.e_w),
                    format!("{:.12}", p.e_t),
                    format!("{:.12}", p.p_i_plus),
                    format!("{:.12}", p.e_w_o),
                ])?;
            }
        }
        w.flush()?;
    }
    let config = json!({
        "command": "filter",
        "model": a.model.display().to_string(),
        "data": a.data.display().to_string(),
        "evidence": evidence_mode,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_csv(&out, &config, &body)?;
    println!("belief trace -> {}", out.display());
    Ok(())
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let events = ctx.resolve("simulate", "events", a.events, 10)?;
    let contributor = ctx.resolve(
        "simulate",
        "contributor",
        a.contributor.clone(),
        "r".to_string(),
    )?;
    let action_token = ctx.resolve("simulate", "action", a.action.clone(), "R_PLUS".to_string())?;
    let bins = ctx.resolve("simulate", "bins", a.bins, 6)?;
    if events == 0 {
        return Err(Error::usage("--events must be at least 1".to_string()));
    }

    let model = resolve_model(a.model.as_deref(), bins)?;
    let action = AvAction::parse_token(&action_token)?;
    let alignment = a
        .alignment
        .as_deref()
        .map(Alignment::parse_token)
        .transpose()?;
    let other_action = a
        .other_action
        .as_deref()
        .map(OtherAction::parse_token)
        .transpose()?;

    let script: Vec<EventInput> = (0..events)
        .map(|k| -> Result<EventInput> {
            let kind = match contributor.as_str() {
                "r" => Contributor::R,
                "o" => Contributor::O,
                "alternate" => {
                    if k % 2 == 0 {
                        Contributor::O
                    } else {
                        Contributor::R
                    }
                }
                other => {
                    return Err(Error::usage(format!(
                        "unknown contributor pattern {other:?} (expected r, o, or alternate)"
                    )))
                }
            };
            Ok(match kind {
                Contributor::R => {
                    let mut e = EventInput::r_event(action, alignment);
                    e.a_o = other_action;
                    e
                }
                Contributor::O => EventInput::o_event(other_action.ok_or_else(|| {
                    Error::usage("O-contributor events need --other-action".to_string())
                })?),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let init = BeliefState::initial(&model)?;
    let trajectory = forward_simulate(&init, &script, &model)?;

    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record(["event_index", "E_w", "E_t", "P_I_plus", "E_wO"])?;
        for p in &trajectory {
            w.write_record([
                p.event_index.to_string(),
                format!("{:.12}", p.e_w),
                format!("{:.12}", p.e_t),
                format!("{:.12}", p.p_i_plus),
                format!("{:.12}", p.e_w_o),
            ])?;
        }
        w.flush()?;
    }
    let config = json!({
        "command": "simulate",
        "model": a.model.as_ref().map(|p| p.display().to_string()),
        "events": events,
        "contributor": contributor,
        "action": action_token,
        "alignment": a.alignment,
        "other_action": a.other_action,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_csv(&out, &config, &body)?;
    println!("trajectory ({events} events) -> {}", out.display());
    Ok(())
}

fn cmd_policy(ctx: &Ctx, a: &PolicyArgs) -> Result<()> {
    let utility_name = ctx.resolve(
        "policy",
        "utility",
        a.utility.clone(),
        "wellbeing".to_string(),
    )?;
    let cost = ctx.resolve("policy", "cost", a.cost, 0.2)?;
    let bins = ctx.resolve("policy", "bins", a.bins, 6)?;
    let model = resolve_model(a.model.as_deref(), bins)?;
    let n_bins = model.n_bins();
    let utility = parse_utility(&utility_name, cost)?;
    let cim = InfluenceDiagram::new(model, utility);
    let ev = match &a.evidence {
        Some(s) => parse_evidence(s, n_bins)?,
        None => Evidence::none(),
    };

    let config = json!({
        "command": "policy",
        "model": a.model.as_ref().map(|p| p.display().to_string()),
        "utility": utility_name,
        "cost": cost,
        "evidence": a.evidence,
        "by": a.by,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let payload = match &a.by {
        Some(var) => {
            let table = policy_table(&cim, EvidenceVariable::parse(var)?, &ev)?;
            for e in &table.entries {
                println!(
                    "{}={}: {} (EU yield {:.6}, unyield {:.6})",
                    var, e.value_label, e.decision.action, e.decision.eu_yield, e.decision.eu_unyield
                );
            }
            json!({ "config": config, "table": table })
        }
        None => {
            let d = optimal_policy(&cim, &ev)?;
            println!(
                "optimal action: {} (EU yield {:.6}, unyield {:.6})",
                d.action, d.eu_yield, d.eu_unyield
            );
            json!({ "config": config, "decision": d })
        }
    };
    let out = out_path(&a.out);
    ctx.write_json(&out, payload)?;
    println!("policy -> {}", out.display());
    Ok(())
}

fn cmd_voi(ctx: &Ctx, a: &VoiArgs) -> Result<()> {
    let utility_name = ctx.resolve("voi", "utility", a.utility.clone(), "wellbeing".to_string())?;
    let cost = ctx.resolve("voi", "cost", a.cost, 0.2)?;
    let bins = ctx.resolve("voi", "bins", a.bins, 6)?;
    let model = resolve_model(a.model.as_deref(), bins)?;
    let n_bins = model.n_bins();
    let utility = parse_utility(&utility_name, cost)?;
    let cim = InfluenceDiagram::new(model, utility);
    let ev = match &a.evidence {
        Some(s) => parse_evidence(s, n_bins)?,
        None => Evidence::none(),
    };

    let mut voi = std::collections::BTreeMap::new();
    for node in EvidenceVariable::ALL {
        if node.is_assigned(&ev) {
            continue;
        }
        let value = value_of_information(&cim, node, &ev)?;
        println!("VOI({}) = {value:.6}", node.name());
        voi.insert(node.name().to_string(), value);
    }
    let config = json!({
        "command": "voi",
        "model": a.model.as_ref().map(|p| p.display().to_string()),
        "utility": utility_name,
        "cost": cost,
        "evidence": a.evidence,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_json(&out, json!({ "config": config, "voi": voi }))?;
    println!("voi report -> {}", out.display());
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> Result<()> {
    let bins = ctx.resolve("sweep", "bins", a.bins, 6)?;
    let cost_max = ctx.resolve("sweep", "cost_max", a.cost_max, 1.0)?;
    let cost_step = ctx.resolve("sweep", "cost_step", a.cost_step, 0.1)?;
    let model = resolve_model(a.model.as_deref(), bins)?;
    let n_bins = model.n_bins();

    let grid: Vec<f64> = match &a.costs {
        Some(s) => s
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::usage(format!("cost {t:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => {
            if cost_step <= 0.0 || cost_step.is_nan() {
                return Err(Error::usage("cost step must be positive".to_string()));
            }
            let n = (cost_max / cost_step).round() as usize;
            (0..=n).map(|k| k as f64 * cost_step).collect()
        }
    };
    let ev = match &a.evidence {
        Some(s) => parse_evidence(s, n_bins)?,
        None => Evidence::none(),
    };
    let by = a.by.as_deref().map(EvidenceVariable::parse).transpose()?;
    let cim = InfluenceDiagram::new(model, UtilitySpec::Tradeoff { cost: 0.0 });
    let rows = cost_sensitivity_sweep(&cim, &grid, by, &ev)?;

    let mut body = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut body);
        w.write_record([
            "cost",
            "evidence_var",
            "evidence_value",
            "optimal_action",
            "eu_yield",
            "eu_unyield",
        ])?;
        for r in &rows {
            w.write_record([
                format!("{}", r.cost),
                r.evidence_var.clone(),
                r.evidence_value.clone(),
                r.optimal_action.clone(),
                format!("{:.12}", r.eu_yield),
                format!("{:.12}", r.eu_unyield),
            ])?;
        }
        w.flush()?;
    }
    let config = json!({
        "command": "sweep",
        "model": a.model.as_ref().map(|p| p.display().to_string()),
        "costs": grid,
        "by": a.by,
        "evidence": a.evidence,
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_csv(&out, &config, &body)?;
    println!("sweep ({} rows) -> {}", rows.len(), out.display());
    Ok(())
}

fn cmd_stats(ctx: &Ctx, a: &StatsArgs) -> Result<()> {
    let bins = ctx.resolve("stats", "bins", a.bins, 6)?;
    let dataset = parse_event_log_path(&a.data, BinConfig::new(bins)?)?;
    let report = structure_statistics(&dataset)?;
    for c in &report.comparisons {
        println!(
            "{}: t({:.2}) = {:.4}, p(two) = {:.4e}",
            c.label, c.df, c.t, c.p_two_tail
        );
    }
    if let Some(corr) = &report.wellbeing_trust_correlation {
        println!(
            "wellbeing/trust: r({}) = {:.4}, p = {:.4e}",
            corr.n.saturating_sub(2),
            corr.r,
            corr.p
        );
    }
    let config = json!({
        "command": "stats",
        "data": a.data.display().to_string(),
        "bins": bins,
        "out": a.out.display().to_string(),
    });
    let out = out_path(&a.out);
    ctx.write_json(&out, json!({ "config": config, "report": report }))?;
    println!("stats report -> {}", out.display());
    Ok(())
}
