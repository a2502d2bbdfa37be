use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use seqpt_core::harness::{execute, exit_status, render, RunConfig};
use seqpt_core::Error;

/// Selective process tomography on simulated channels.
#[derive(Parser, Debug)]
#[command(name = "seqpt", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Registered channel name (identity, controlled_uc, noisy_uc, depolarizing, polarization_unitary).
    #[arg(long, global = true)]
    channel: Option<String>,
    /// Channel parameter, e.g. `--param p=0.3`; repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Number of qubits.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// `exact` or a shot count per setting outcome.
    #[arg(long, global = true)]
    shots: Option<String>,
    /// Design states sampled per element.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// RNG seed; `SEQPT_SEED` supplies the default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the whole process matrix.
    Full,
    /// Estimate one element chi_ab.
    Element {
        #[arg(short)]
        a: String,
        #[arg(short)]
        b: String,
    },
    /// Average fidelity to a unitary target.
    Fidelity {
        #[arg(long)]
        target: Option<String>,
    },
    /// Fidelity traces over several sampling orders.
    Convergence {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        orders: Option<usize>,
    },
    /// Check channel and design invariants.
    Validate,
    /// Describe the mutually unbiased bases.
    DesignInfo,
}

fn param_value(raw: &str) -> Value {
    raw.parse::<f64>().map(|v| json!(v)).unwrap_or_else(|_| json!(raw))
}

fn overrides(cli: &Cli) -> Result<Map<String, Value>, Error> {
    let c = &cli.common;
    let mut o = Map::new();
    let task = match &cli.command {
        Command::Full => "full",
        Command::Element { a, b } => {
            o.insert("a".into(), json!(a));
            o.insert("b".into(), json!(b));
            "element"
        }
        Command::Fidelity { target } => {
            if let Some(t) = target {
                o.insert("target".into(), json!({ "name": t }));
            }
            "fidelity"
        }
        Command::Convergence { target, orders } => {
            if let Some(t) = target {
                o.insert("target".into(), json!({ "name": t }));
            }
            if let Some(k) = orders {
                o.insert("orders".into(), json!(k));
            }
            "convergence"
        }
        Command::Validate => "validate",
        Command::DesignInfo => "design-info",
    };
    o.insert("task".into(), json!(task));
    if let Some(name) = &c.channel {
        o.insert("channel".into(), json!({ "name": name }));
    }
    if !c.params.is_empty() {
        let mut params = Map::new();
        for p in &c.params {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::Config(format!("--param expects KEY=VALUE, got {p:?}")))?;
            params.insert(k.to_string(), param_value(v));
        }
        o.insert("channel_params".into(), Value::Object(params));
    }
    if let Some(n) = c.n {
        o.insert("n".into(), json!(n));
    }
    if let Some(s) = &c.shots {
        let shots: seqpt_core::Shots = s.parse()?;
        o.insert("shots".into(), serde_json::to_value(shots)?);
    }
    if let Some(m) = c.m {
        o.insert("m".into(), json!(m));
    }
    if let Some(seed) = c.seed {
        o.insert("seed".into(), json!(seed));
    }
    if let Some(out) = &c.out {
        o.insert("out".into(), json!(out));
    }
    Ok(o)
}

fn env_fallbacks() -> Result<Map<String, Value>, Error> {
    let mut f = Map::new();
    if let Ok(raw) = std::env::var("SEQPT_SEED") {
        let seed: u64 = raw.trim().parse().map_err(|_| Error::Config(format!("SEQPT_SEED must be an unsigned integer, got {raw:?}")))?;
        f.insert("seed".into(), json!(seed));
    }
    Ok(f)
}

fn run(cli: &Cli) -> i32 {
    let config = overrides(cli)
        .and_then(|o| Ok((o, env_fallbacks()?)))
        .and_then(|(o, f)| RunConfig::load_with_fallbacks(cli.common.config.as_deref(), o, f));
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = execute(&config);
    match &result {
        Ok(outcome) if outcome.written.is_empty() => match render(&outcome.report) {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        Ok(outcome) => {
            for path in &outcome.written {
                println!("{}", path.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    let status = exit_status(&result);
    if status == 3 {
        eprintln!("error: numerical integrity check failed");
    }
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(&cli) as u8)
}
