//! Subcommand execution: build the emitted JSON records.

use std::fmt;
use std::path::Path;

use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, to_value, Value};

use conat::apps::{
    controlled_teleport, controlled_teleport_two_mode, qss_classical, QssOptions, TeleportOptions,
};
use conat::protocols::{ccaecc_mq, ccaecc_pq, superdense_conat, ChannelOutput};
use conat::verify::{
    check_mq_definition, check_pq_definition, cross_validate, mc_epsilons, predicted_epsilons,
    EpsilonReport, Method, PredictedEpsilons,
};
use conat::{ChannelKind, LinearForm, Topology};

use crate::{
    CcaeccArgs, Cli, Command, Engine, EngineArgs, Format, Kind, QssArgs, SuperdenseArgs,
    SweepArgs, SweepParam, TeleportArgs, VerifyArgs, VerifyTarget,
};

#[derive(Debug)]
pub enum CliError {
    Core(conat::Error),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<conat::Error> for CliError {
    fn from(e: conat::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// What a subcommand produced: the artifact, optional per-row CSV shape,
/// and whether every attached check passed.
pub struct Outcome {
    pub record: Value,
    pub csv_rows: Option<Vec<Value>>,
    pub pass: bool,
}

impl Outcome {
    fn passing(record: Value) -> Self {
        Outcome { record, csv_rows: None, pass: true }
    }
}

fn engine_label(engine: Engine) -> &'static str {
    match engine {
        Engine::Symbolic => "symbolic",
        Engine::Gaussian => "gaussian",
        Engine::Both => "both",
    }
}

fn kind_label(kind: Kind) -> &'static str {
    match kind {
        Kind::Pq => "pq",
        Kind::Mq => "mq",
    }
}

fn format_label(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn base_config(subcommand: &str, engine: &EngineArgs, format: Format) -> Value {
    json!({
        "subcommand": subcommand,
        "engine": engine_label(engine.engine),
        "trials": engine.trials,
        "seed": engine.seed,
        "format": format_label(format),
        "sigma2_vac": conat::VACUUM_VARIANCE,
        "prune_threshold": conat::PRUNE_THRESHOLD,
        "symplectic_tolerance": conat::SYMPLECTIC_TOL,
        "reference_convention": "sender-output-referenced",
    })
}

fn merge(config: &mut Value, extras: Value) {
    if let (Value::Object(base), Value::Object(add)) = (config, extras) {
        for (k, v) in add {
            base.insert(k, v);
        }
    }
}

fn load_topology(path: &Path) -> Result<Topology> {
    let text = std::fs::read_to_string(path)?;
    Ok(Topology::from_json(&text)?)
}

/// Measured/predicted ε block for one channel output.
fn channel_block(
    out: &ChannelOutput,
    method: Method,
    engine: &EngineArgs,
    expect: Option<&[f64]>,
) -> Result<(Value, bool)> {
    let report: EpsilonReport = match out.kind {
        ChannelKind::Pq => check_pq_definition(out)?,
        ChannelKind::Mq => check_mq_definition(out)?,
    };
    let predicted = match expect {
        Some(values) => {
            let n = out.receivers.len();
            if values.len() != n {
                return Err(CliError::Usage(format!(
                    "--expect needs {n} values (ε₁…εₙ), got {}",
                    values.len()
                )));
            }
            PredictedEpsilons {
                per_receiver: values[..n - 1].to_vec(),
                collective: values[n - 1],
            }
        }
        None => predicted_epsilons(
            method,
            out.kind,
            out.meta.n_receivers,
            out.meta.r,
            out.meta.eta,
            out.meta.topology.as_ref(),
        )?,
    };
    let report = report.with_predictions(predicted, 1e-12);
    let mut pass = report.pass.unwrap_or(true);
    let mut block = json!({
        "kind": out.kind,
        "receivers": report.receivers,
        "reference_convention": report.reference_convention,
        "epsilons_measured": report.epsilons(),
        "epsilons_input_referenced": report.per_receiver_input_referenced,
        "epsilons_predicted": report.predicted.as_ref().map(PredictedEpsilons::epsilons),
        "means": report.means,
        "commutators": to_value(&report.commutators).expect("serializable"),
        "tolerance": report.tolerance,
        "pass": report.pass,
    });
    match engine.engine {
        Engine::Symbolic => {}
        Engine::Gaussian => {
            let mc = mc_epsilons(out, engine.trials, engine.seed)?;
            block["monte_carlo"] = to_value(&mc).expect("serializable");
        }
        Engine::Both => {
            let agreement = cross_validate(out, engine.trials, engine.seed)?;
            pass &= agreement.agree;
            block["agreement"] = to_value(&agreement).expect("serializable");
        }
    }
    Ok((block, pass))
}

fn make_ccaecc(args: &CcaeccArgs) -> Result<ChannelOutput> {
    Ok(match args.kind {
        Kind::Pq => ccaecc_pq(args.n, args.r, args.eta)?,
        Kind::Mq => ccaecc_mq(args.n, args.r, args.eta)?,
    })
}

fn run_ccaecc(args: &CcaeccArgs, format: Format, expect: Option<&[f64]>) -> Result<Outcome> {
    let out = make_ccaecc(args)?;
    let (block, pass) = channel_block(&out, Method::Ccaecc, &args.engine, expect)?;
    let mut config = base_config("ccaecc", &args.engine, format);
    merge(
        &mut config,
        json!({"n": args.n, "r": args.r, "eta": args.eta, "kind": kind_label(args.kind)}),
    );
    let mut record = json!({"config": config});
    merge(&mut record, block);
    Ok(Outcome { record, csv_rows: None, pass })
}

fn run_superdense(args: &SuperdenseArgs, format: Format) -> Result<Outcome> {
    let topology = load_topology(&args.topology)?;
    let (pq, mq) = superdense_conat(&topology, args.r)?;
    let (pq_block, pq_pass) = channel_block(&pq, Method::Superdense, &args.engine, None)?;
    let (mq_block, mq_pass) = channel_block(&mq, Method::Superdense, &args.engine, None)?;
    let mut config = base_config("superdense", &args.engine, format);
    merge(
        &mut config,
        json!({
            "r": args.r,
            "topology_path": args.topology.display().to_string(),
            "topology": to_value(&topology).expect("serializable"),
        }),
    );
    let record = json!({"config": config, "pq": pq_block, "mq": mq_block});
    Ok(Outcome { record, csv_rows: None, pass: pq_pass && mq_pass })
}

fn run_verify(args: &VerifyArgs, format: Format) -> Result<Outcome> {
    match &args.target {
        VerifyTarget::Ccaecc(inner) => {
            let mut outcome = run_ccaecc(inner, format, args.expect.as_deref())?;
            outcome.record["config"]["subcommand"] = json!("verify ccaecc");
            Ok(outcome)
        }
        VerifyTarget::Superdense(inner) => {
            if args.expect.is_some() {
                return Err(CliError::Usage(
                    "--expect is only supported for `verify ccaecc` (a superdense run has two channels)"
                        .to_string(),
                ));
            }
            let mut outcome = run_superdense(inner, format)?;
            outcome.record["config"]["subcommand"] = json!("verify superdense");
            Ok(outcome)
        }
    }
}

fn run_ghz(parties: usize, r: f64, format: Format) -> Result<Outcome> {
    let reg = conat::prepare_ghz(parties, r)?;
    let mut total_p = LinearForm::zero();
    for m in 0..parties {
        total_p.add_scaled(reg.p_form(m)?, 1.0);
    }
    let total = reg.variance_of(&total_p)?;
    let mut rel_min = f64::INFINITY;
    let mut rel_max = f64::NEG_INFINITY;
    for i in 0..parties {
        for j in 0..parties {
            if i != j {
                let v = reg.variance_of(&(reg.x_form(i)? - reg.x_form(j)?))?;
                rel_min = rel_min.min(v);
                rel_max = rel_max.max(v);
            }
        }
    }
    let e2 = (-2.0 * r).exp();
    let engine = EngineArgs { engine: Engine::Symbolic, trials: 0, seed: 0 };
    let mut config = base_config("ghz", &engine, format);
    merge(&mut config, json!({"n": parties, "r": r}));
    Ok(Outcome::passing(json!({
        "config": config,
        "total_momentum_variance": total,
        "predicted_total_momentum_variance": parties as f64 * e2,
        "relative_position_variance_min": rel_min,
        "relative_position_variance_max": rel_max,
        "predicted_relative_position_variance": 2.0 * e2,
        "symplectic_pass": reg.symplectic_check().pass,
    })))
}

fn run_epr(r: f64, format: Format) -> Result<Outcome> {
    let reg = conat::prepare_epr(r)?;
    let x_diff = reg.variance_of(&(reg.x_form(0)? - reg.x_form(1)?))?;
    let p_sum = {
        let mut f = reg.p_form(0)?.clone();
        f.add_scaled(reg.p_form(1)?, 1.0);
        reg.variance_of(&f)?
    };
    let x_sum = {
        let mut f = reg.x_form(0)?.clone();
        f.add_scaled(reg.x_form(1)?, 1.0);
        reg.variance_of(&f)?
    };
    let engine = EngineArgs { engine: Engine::Symbolic, trials: 0, seed: 0 };
    let mut config = base_config("epr", &engine, format);
    merge(&mut config, json!({"r": r}));
    Ok(Outcome::passing(json!({
        "config": config,
        "x_difference_variance": x_diff,
        "p_sum_variance": p_sum,
        "x_sum_variance": x_sum,
        "predicted_correlated_variance": 2.0 * (-2.0 * r).exp(),
        "predicted_anticorrelated_variance": 2.0 * (2.0 * r).exp(),
        "symplectic_pass": reg.symplectic_check().pass,
    })))
}

fn run_teleport(args: &TeleportArgs, format: Format) -> Result<Outcome> {
    let mc = match args.engine.engine {
        Engine::Symbolic => None,
        _ => Some((args.engine.trials, args.engine.seed)),
    };
    let mut config = base_config("teleport", &args.engine, format);
    merge(
        &mut config,
        json!({
            "receiver": args.receiver,
            "r": args.r,
            "eta": args.eta,
            "x0": args.x0,
            "p0": args.p0,
            "eta_controllers": args.eta_controllers,
            "drop_controllers": args.drop_controller,
        }),
    );
    match &args.topology {
        Some(path) => {
            if !args.drop_controller.is_empty() {
                return Err(CliError::Usage(
                    "--drop-controller is not supported for two-mode teleportation".to_string(),
                ));
            }
            let topology = load_topology(path)?;
            let (pq, mq) = superdense_conat(&topology, args.r)?;
            let (pq_report, mq_report) = controlled_teleport_two_mode(
                &pq,
                &mq,
                &args.receiver,
                ((args.x1, args.p1), (args.x0, args.p0)),
                args.eta_controllers,
                mc,
            )?;
            merge(
                &mut config,
                json!({
                    "topology_path": path.display().to_string(),
                    "x1": args.x1,
                    "p1": args.p1,
                }),
            );
            Ok(Outcome::passing(json!({
                "config": config,
                "pq": to_value(&pq_report).expect("serializable"),
                "mq": to_value(&mq_report).expect("serializable"),
            })))
        }
        None => {
            let channel = make_ccaecc(&CcaeccArgs {
                n: args.n,
                r: args.r,
                eta: args.eta,
                kind: args.kind,
                engine: args.engine.clone(),
            })?;
            let options = TeleportOptions {
                input_mean: (args.x0, args.p0),
                eta_controllers: args.eta_controllers,
                drop_controllers: args.drop_controller.clone(),
                monte_carlo: mc,
            };
            let report = controlled_teleport(&channel, &args.receiver, &options)?;
            merge(&mut config, json!({"n": args.n, "kind": kind_label(args.kind)}));
            Ok(Outcome::passing(json!({
                "config": config,
                "teleport": to_value(&report).expect("serializable"),
            })))
        }
    }
}

fn run_qss(args: &QssArgs, format: Format) -> Result<Outcome> {
    let channel = make_ccaecc(&CcaeccArgs {
        n: args.n,
        r: args.r,
        eta: args.eta,
        kind: args.kind,
        engine: args.engine.clone(),
    })?;
    let trials = match args.engine.engine {
        Engine::Symbolic => 0,
        _ => args.engine.trials,
    };
    let options = QssOptions {
        eta_controllers: args.eta_controllers,
        trials,
        seed: args.engine.seed,
    };
    let report = qss_classical(
        &channel,
        (args.secret_x, args.secret_p),
        &args.receiver,
        &args.coalition,
        &options,
    )?;
    let mut config = base_config("qss", &args.engine, format);
    merge(
        &mut config,
        json!({
            "n": args.n,
            "r": args.r,
            "eta": args.eta,
            "kind": kind_label(args.kind),
            "receiver": args.receiver,
            "coalition": args.coalition,
            "secret_x": args.secret_x,
            "secret_p": args.secret_p,
        }),
    );
    Ok(Outcome::passing(json!({
        "config": config,
        "qss": to_value(&report).expect("serializable"),
    })))
}

fn set_sweep_param(command: &mut Command, param: SweepParam, value: f64) -> Result<()> {
    let fail = |what: &str| {
        Err(CliError::Usage(format!("cannot sweep {what} over this subcommand")))
    };
    match param {
        SweepParam::R => match command {
            Command::Ccaecc(a) => a.r = value,
            Command::Superdense(a) => a.r = value,
            Command::Teleport(a) => a.r = value,
            Command::Qss(a) => a.r = value,
            Command::Ghz { r, .. } => *r = value,
            Command::Epr { r } => *r = value,
            _ => return fail("r"),
        },
        SweepParam::Eta => match command {
            Command::Ccaecc(a) => a.eta = value,
            Command::Teleport(a) => a.eta = value,
            Command::Qss(a) => a.eta = value,
            _ => return fail("eta"),
        },
        SweepParam::N => {
            let n = value.round();
            if (value - n).abs() > 1e-9 || n < 0.0 {
                return Err(CliError::Usage(format!("n must be a non-negative integer, got {value}")));
            }
            let n = n as usize;
            match command {
                Command::Ccaecc(a) => a.n = n,
                Command::Teleport(a) => a.n = n,
                Command::Qss(a) => a.n = n,
                Command::Ghz { parties, .. } => *parties = n,
                _ => return fail("n"),
            }
        }
    }
    Ok(())
}

fn param_label(param: SweepParam) -> &'static str {
    match param {
        SweepParam::R => "r",
        SweepParam::Eta => "eta",
        SweepParam::N => "n",
    }
}

fn run_sweep(args: &SweepArgs, format: Format) -> Result<Outcome> {
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".to_string()));
    }
    let argv = std::iter::once("conat".to_string()).chain(args.over.iter().cloned());
    let inner = Cli::try_parse_from(argv)
        .map_err(|e| CliError::Usage(format!("cannot parse --over subcommand: {e}")))?;
    if matches!(inner.command, Command::Sweep(_)) {
        return Err(CliError::Usage("cannot sweep over a sweep".to_string()));
    }
    let grid: Vec<f64> = (0..args.steps)
        .map(|i| {
            if args.steps == 1 {
                args.from
            } else {
                args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect();

    let results: Vec<Result<Outcome>> = grid
        .par_iter()
        .map(|&value| {
            let mut command = inner.command.clone();
            set_sweep_param(&mut command, args.param, value)?;
            execute(&command, format)
        })
        .collect();

    let mut rows = Vec::with_capacity(args.steps);
    let mut pass = true;
    for (i, (value, result)) in grid.iter().zip(results).enumerate() {
        let outcome = result?;
        pass &= outcome.pass;
        let mut row = json!({
            "index": i,
            "param": param_label(args.param),
            "value": value,
        });
        merge(&mut row, json!({"result": outcome.record}));
        rows.push(row);
    }

    let engine = EngineArgs { engine: Engine::Both, trials: 0, seed: 0 };
    let mut config = base_config("sweep", &engine, format);
    merge(
        &mut config,
        json!({
            "param": param_label(args.param),
            "from": args.from,
            "to": args.to,
            "steps": args.steps,
            "over": args.over,
        }),
    );
    // the sweep config echoes the inner command's engine settings per row
    if let Value::Object(map) = &mut config {
        map.remove("engine");
        map.remove("trials");
        map.remove("seed");
    }
    let record = json!({"config": config, "rows": rows.clone()});
    Ok(Outcome { record, csv_rows: Some(rows), pass })
}

pub fn execute(command: &Command, format: Format) -> Result<Outcome> {
    match command {
        Command::Ghz { parties, r } => run_ghz(*parties, *r, format),
        Command::Epr { r } => run_epr(*r, format),
        Command::Ccaecc(args) => run_ccaecc(args, format, None),
        Command::Superdense(args) => run_superdense(args, format),
        Command::Verify(args) => run_verify(args, format),
        Command::Teleport(args) => run_teleport(args, format),
        Command::Qss(args) => run_qss(args, format),
        Command::Sweep(args) => run_sweep(args, format),
    }
}
