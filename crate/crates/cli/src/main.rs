//! `toylocal` command-line front end.
//!
//! Every subcommand writes pretty-printed JSON to stdout (or `--output`).
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use toylocal::bell::{teleport_run, teleport_stats, TeleportConfig, DEFAULT_DISTANCE};
use toylocal::bundled;
use toylocal::cloning::{
    exact_pass_probability, run_challenge, search_strategies, ChallengeConfig, ChallengeMode,
    CloningStrategy, SearchConfig,
};
use toylocal::prob::{format_prob, to_f64};
use toylocal::rng::trial_rng;
use toylocal::spacetime::{audit_locality, WorldLog};
use toylocal::stats::ChiSquareTest;
use toylocal::theory::{
    enumerate_valid_measurements, validate_measurement, Measurement, MeasurementDef,
    MeasurementFamily, ParticleState,
};
use toylocal::Prob;

const DEFAULT_CLONE_TRIALS: u64 = 10_000;
const DEFAULT_SEPARATION: i64 = 1;

#[derive(Parser)]
#[command(
    name = "toylocal",
    version,
    about = "Simulator for a local four-state toy theory"
)]
struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of trials (at least 1).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Separation in cells: Alice to Bob (teleport), Peter to Alice (clone).
    #[arg(long, global = true, value_parser = clap::value_parser!(i64).range(1..))]
    distance: Option<i64>,
    /// Include hidden values in the output.
    #[arg(long, global = true)]
    god_view: bool,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a measurement file against the theory's rules.
    Validate { path: PathBuf },
    /// Check an event log for locality violations.
    Audit { path: PathBuf },
    /// Run teleportation once (transcript) or in batch (statistics).
    Teleport {
        /// Input value; drawn from the seed when omitted.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..4))]
        input: Option<u8>,
    },
    /// Play the cloning challenge with a strategy file.
    Clone {
        #[arg(long)]
        strategy: PathBuf,
        /// Peter's preparation: p, p-prime, a, b, or a measurement file.
        /// Repeatable; defaults to p and p-prime.
        #[arg(long = "prep")]
        preparations: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Clone)]
        mode: Mode,
    },
    /// Exhaustive exact search for the best cloning strategy.
    CloneSearch {
        /// Particles Alice holds.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long = "prep")]
        preparations: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        node_budget: u64,
    },
    /// List valid measurements.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Required for n = 2.
        #[arg(long, value_enum)]
        family: Option<Family>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Clone,
    Control,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Exhaustive,
    ProductsAndCosets,
}

/// Output plus whether the checked property held.
struct Report {
    body: Value,
    ok: bool,
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, UsageError> {
    fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, UsageError> {
    serde_json::from_str(&read(path)?).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn preparation(name: &str) -> Result<Measurement, UsageError> {
    Ok(match name {
        "p" => bundled::preparation_p(),
        "p-prime" => bundled::preparation_p_prime(),
        "a" => bundled::single_a(),
        "b" => bundled::single_b(),
        path => parse_json(Path::new(path))?,
    })
}

fn preparations(names: &[String]) -> Result<(Vec<String>, Vec<Measurement>), UsageError> {
    let names: Vec<String> = if names.is_empty() {
        vec!["p".into(), "p-prime".into()]
    } else {
        names.to_vec()
    };
    let ms = names
        .iter()
        .map(|n| preparation(n))
        .collect::<Result<_, _>>()?;
    Ok((names, ms))
}

fn audit(path: &Path) -> Result<Report, UsageError> {
    let log: WorldLog = parse_json(path)?;
    let report = audit_locality(&log)?;
    let mut body = json!({
        "events_checked": report.events_checked,
        "passed": report.passed(),
    });
    if let Some((index, v)) = &report.violation {
        body["violation"] = json!({ "event": index, "detail": v });
    }
    Ok(Report {
        body,
        ok: report.passed(),
    })
}

fn validate(path: &Path) -> Result<Report, UsageError> {
    let def: MeasurementDef = parse_json(path)?;
    let report = validate_measurement(&def)?;
    Ok(match report.violation() {
        None => Report {
            body: json!({ "status": "valid" }),
            ok: true,
        },
        Some(v) => Report {
            body: json!({
                "status": "invalid",
                "rule": v.rule().to_string(),
                "message": v.to_string(),
                "violation": v,
            }),
            ok: false,
        },
    })
}

#[derive(Serialize)]
struct BatchGodView {
    particle1_histogram: [u64; 4],
    particle1_uniformity: ChiSquareTest,
    post_state_by_outcome: [[u64; 4]; 4],
}

fn teleport(cli: &Cli, input: Option<u8>) -> Result<Report, UsageError> {
    let config = TeleportConfig {
        distance: cli.distance.unwrap_or(DEFAULT_DISTANCE),
    };
    let trials = cli.trials.unwrap_or(1);
    if trials == 1 {
        let mut rng = trial_rng(cli.seed, 0);
        let x = match input {
            Some(v) => ParticleState::new(v)?,
            None => ParticleState::uniform(&mut rng),
        };
        let t = teleport_run(x, &config, &mut rng)?;
        let audit = audit_locality(&t.event_log)?;
        return Ok(Report {
            body: json!({
                "seed": cli.seed,
                "distance": config.distance,
                "locality_audit_passed": audit.passed(),
                "transcript": t.to_json(cli.god_view),
            }),
            ok: audit.passed() && t.succeeded(),
        });
    }
    if input.is_some() {
        return Err(UsageError("--input applies to single runs only".into()));
    }
    let s = teleport_stats(trials, cli.seed, &config)?;
    let mut body = json!({
        "seed": cli.seed,
        "distance": config.distance,
        "trials": s.trials,
        "successes": s.successes,
        "success_rate": s.success_rate,
        "locality_violations": s.locality_violations,
        "alice_outcome_histogram": s.alice_outcome_histogram,
        "alice_outcome_uniformity": s.alice_outcome_uniformity,
    });
    if cli.god_view {
        body["god_view"] = serde_json::to_value(BatchGodView {
            particle1_histogram: s.particle1_histogram,
            particle1_uniformity: s.particle1_uniformity,
            post_state_by_outcome: s.post_state_by_outcome,
        })?;
    }
    Ok(Report {
        body,
        ok: s.successes == s.trials && s.locality_violations == 0,
    })
}

fn prob_json(p: &Prob) -> Value {
    json!({ "exact": format_prob(p), "approx": to_f64(p) })
}

fn clone(cli: &Cli, strategy: &Path, preps: &[String], mode: Mode) -> Result<Report, UsageError> {
    let strategy: CloningStrategy = parse_json(strategy)?;
    let (names, preps) = preparations(preps)?;
    let mode = match mode {
        Mode::Clone => ChallengeMode::Clone,
        Mode::Control => ChallengeMode::Control,
    };
    let config = ChallengeConfig {
        trials: cli.trials.unwrap_or(DEFAULT_CLONE_TRIALS),
        seed: cli.seed,
        separation: cli.distance.unwrap_or(DEFAULT_SEPARATION),
        mode,
    };
    let res = run_challenge(&strategy, &preps, &config)?;
    let exact = exact_pass_probability(&strategy, &preps, mode)?;
    let branches: Vec<Value> = res
        .branches
        .iter()
        .map(|b| {
            let mut v = json!({
                "path": b.path,
                "returned": b.returned,
                "reached": b.reached,
                "passes": b.passes,
                "failures": b.reached - b.passes,
            });
            if cli.god_view {
                v["copy_mismatches_by_input"] =
                    serde_json::to_value(b.copy_by_input).expect("plain data");
            }
            v
        })
        .collect();
    Ok(Report {
        body: json!({
            "seed": cli.seed,
            "separation": config.separation,
            "mode": mode,
            "preparations": names,
            "trials": res.trials,
            "passes": res.passes,
            "pass_rate": format_prob(&res.pass_rate),
            "pass_rate_f64": res.pass_rate_f64,
            "exact_pass_probability": prob_json(&exact),
            "locality_violations": res.locality_violations,
            "branches": branches,
        }),
        ok: res.locality_violations == 0,
    })
}

fn clone_search(
    n: usize,
    depth: usize,
    preps: &[String],
    node_budget: u64,
) -> Result<Report, UsageError> {
    let (names, preps) = preparations(preps)?;
    let mut config = SearchConfig::new(n, depth, preps);
    config.node_budget = node_budget;
    let out = search_strategies(&config)?;
    let below_one = out.max_pass_probability < Prob::from_integer(1);
    Ok(Report {
        body: json!({
            "num_particles": n,
            "depth": depth,
            "preparations": names,
            "max_pass_probability": prob_json(&out.max_pass_probability),
            "below_one": below_one,
            "nodes_evaluated": out.nodes_evaluated,
            "strategy": out.strategy,
        }),
        ok: below_one,
    })
}

fn enumerate(n: usize, family: Option<Family>) -> Result<Report, UsageError> {
    let family = match (n, family) {
        (1, f) => match f {
            Some(Family::ProductsAndCosets) => MeasurementFamily::ProductsAndCosets,
            _ => MeasurementFamily::Exhaustive,
        },
        (2, Some(Family::ProductsAndCosets)) => MeasurementFamily::ProductsAndCosets,
        (2, _) => {
            return Err(UsageError(
                "n = 2 is only listed for --family products-and-cosets".into(),
            ))
        }
        _ => {
            return Err(UsageError(format!(
                "enumeration is supported for n = 1 (and n = 2 with a family), got n = {n}"
            )))
        }
    };
    let ms = enumerate_valid_measurements(n, family)?;
    let defs: Vec<MeasurementDef> = ms.iter().map(Measurement::to_def).collect();
    Ok(Report {
        body: json!({ "num_particles": n, "count": defs.len(), "measurements": defs }),
        ok: true,
    })
}

fn run(cli: &Cli) -> Result<Report, UsageError> {
    match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Audit { path } => audit(path),
        Command::Teleport { input } => teleport(cli, *input),
        Command::Clone {
            strategy,
            preparations,
            mode,
        } => clone(cli, strategy, preparations, *mode),
        Command::CloneSearch {
            n,
            depth,
            preparations,
            node_budget,
        } => clone_search(*n, *depth, preparations, *node_budget),
        Command::Enumerate { n, family } => enumerate(*n, *family),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut text = serde_json::to_string_pretty(&report.body).expect("JSON values serialize");
    text.push('\n');
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
