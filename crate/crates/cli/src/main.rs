mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrgibbs::Error;

use crate::config::RunConfig;

/// Exit codes.
pub mod code {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    /// Bad flags, unreadable or invalid config, invalid parameters.
    pub const USAGE: u8 = 2;
    pub const BUDGET: u8 = 3;
    /// Dense or bond cap exceeded.
    pub const CAP: u8 = 4;
    /// A measured error exceeded its bound.
    pub const VERIFICATION: u8 = 5;
}

#[derive(Parser, Debug)]
#[command(name = "lrgibbs", version, about = "MPO Gibbs states and real-time evolution for long-range spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest Hilbert-space dimension handled densely.
    #[arg(long = "cap-dense", global = true, value_name = "N")]
    pub cap_dense: Option<usize>,
    /// none | tol=T | maxbond=D
    #[arg(long, global = true, value_name = "POLICY")]
    pub compress: Option<String>,
    /// Comma-separated Schatten indices, e.g. 1,2,inf
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    pub pnorms: Option<Vec<String>>,
    /// Bundled model name; replaces the config's model.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Site count of the bundled or file model.
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build M_beta (or M_t) and write the MPO plus an error report.
    Build {
        #[arg(long, conflicts_with = "time")]
        beta: Option<f64>,
        /// Real-time evolution e^{-iHt}.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Force the truncation order.
        #[arg(long)]
        m0: Option<usize>,
        /// Force the number of powering steps.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Run the bound-verification suite and print a pass/fail table.
    Verify {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        m0: Option<usize>,
        /// Randomized instances per lemma.
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Sweep m0, epsilon, Q or an (n, beta, epsilon) grid; rows go to CSV.
    Sweep {
        #[arg(long, value_parser = ["m0", "epsilon", "q", "grid"])]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Fit the exponential-sum kernel for r^{-alpha}.
    Fit {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) => code::BUDGET,
        Error::DenseCapExceeded { .. } | Error::BondCapExceeded { .. } => code::CAP,
        Error::Verification(_) => code::VERIFICATION,
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidTerm(_)
        | Error::InvalidInterval { .. }
        | Error::InvalidCut { .. } => code::USAGE,
        _ => code::OTHER,
    }
}

/// Config file (if any) with the command-line flags applied on top.
fn load_config(g: &GlobalArgs) -> lrgibbs::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::empty(),
    };
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.cap_dense.is_some() {
        cfg.dense_cap = g.cap_dense;
    }
    if g.compress.is_some() {
        cfg.compress = g.compress.clone();
    }
    if g.pnorms.is_some() {
        cfg.pnorms = g.pnorms.clone();
    }
    if g.out.is_some() {
        cfg.out = g.out.clone();
    }
    if let Some(name) = &g.model {
        cfg.model = Some(config::ModelRef { bundled: Some(name.clone()), n: g.n, ..Default::default() });
    } else if let (Some(n), Some(m)) = (g.n, cfg.model.as_mut()) {
        m.n = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> lrgibbs::Result<u8> {
    let mut cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Build { beta, time, epsilon, m0, q } => {
            let b = &mut cfg.build;
            if beta.is_some() {
                b.beta = beta;
                b.time = None;
            }
            if time.is_some() {
                b.time = time;
                b.beta = None;
            }
            b.epsilon = epsilon.or(b.epsilon);
            b.m0 = m0.or(b.m0);
            b.q = q.or(b.q);
            cfg.validate()?;
            commands::build(&cfg)
        }
        Command::Verify { epsilon, m0, instances } => {
            let v = &mut cfg.verify;
            v.epsilon = epsilon.or(v.epsilon);
            v.m0 = m0.or(v.m0);
            v.instances = instances.or(v.instances);
            cfg.validate()?;
            commands::verify(&cfg)
        }
        Command::Sweep { kind, values } => {
            if let Some(kind) = kind {
                let kind: config::SweepKind = serde_json::from_value(serde_json::Value::String(kind))
                    .map_err(|e| Error::Config(e.to_string()))?;
                let section = cfg.sweep.get_or_insert(config::SweepSection {
                    kind,
                    values: Vec::new(),
                    beta: None,
                    epsilon: None,
                    n_values: Vec::new(),
                    beta_multiples: Vec::new(),
                    epsilon_values: Vec::new(),
                });
                section.kind = kind;
            }
            if let Some(values) = values {
                let section = cfg
                    .sweep
                    .as_mut()
                    .ok_or_else(|| Error::Config("--values needs --kind or a [sweep] section".into()))?;
                section.values = values;
            }
            commands::sweep(&cfg)
        }
        Command::Fit { alpha, epsilon } => {
            cfg.fit.alpha = alpha.or(cfg.fit.alpha);
            cfg.fit.epsilon = epsilon.or(cfg.fit.epsilon);
            commands::fit(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
