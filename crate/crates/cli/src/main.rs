//! `rbdf`: simulate, nudge, evaluate the determining map and audit the
//! parameter conditions from a flat key = value configuration.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbdf_core::io::RunConfig;
use rbdf_core::Error;

#[derive(Parser)]
#[command(
    name = "rbdf",
    version,
    about = "Rayleigh-Benard nudging, determining map and parameter audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the Boussinesq system; writes snapshots and an energy CSV.
    Simulate(Common),
    /// Velocity-only nudging against a reference run; writes the error CSV.
    Nudge(Common),
    /// Evaluate the determining map on the projection of a reference run.
    Wmap(Common),
    /// Scalar reduction of the determining form along a ray; writes (s, beta, f).
    Detform(Common),
    /// Evaluate constants and conditions on (mu, h) and suggest a pair.
    Audit(Common),
    /// Fit interpolant error constants on a random ensemble.
    InterpFit(Common),
    /// Run a quick invariant suite; exit code 0 on pass.
    Selftest(Common),
}

#[derive(Args, Clone, Default)]
pub struct Common {
    /// Configuration file (key = value, '#' comments).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> rbdf_core::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.h {
            c.h = v;
        }
        if let Some(v) = self.t_end {
            c.t_end = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.out = v.display().to_string();
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Exit code per failure class.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidDomain(_)
        | Error::HTooSmall { .. }
        | Error::HNotLessThanL { .. }
        | Error::Format(_)
        | Error::Io(_) => 2,
        Error::Infeasible { .. } => 4,
        Error::NonFinite { .. }
        | Error::GridMismatch
        | Error::SpanTooShort { .. }
        | Error::TailNotConverged { .. }
        | Error::NoConvergence { .. }
        | Error::NotSteady { .. }
        | Error::DivisionByZero => 3,
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("RBDF_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
    {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("could not size the worker pool: {e}");
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => c.load().and_then(|cfg| commands::simulate(&cfg)),
        Command::Nudge(c) => c.load().and_then(|cfg| commands::nudge(&cfg)),
        Command::Wmap(c) => c.load().and_then(|cfg| commands::wmap(&cfg)),
        Command::Detform(c) => c.load().and_then(|cfg| commands::detform(&cfg)),
        Command::Audit(c) => c.load().and_then(|cfg| commands::audit(&cfg)),
        Command::InterpFit(c) => c.load().and_then(|cfg| commands::interp_fit(&cfg)),
        Command::Selftest(_) => {
            return if selftest::run() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
