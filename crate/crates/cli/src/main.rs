//! `liberlab` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Free entropy of a projection pair law.
    Chi,
    /// Free Fisher information and the conjugate variable.
    Fisher,
    /// Both sides of the log-Sobolev inequality, optionally relative to a tilt.
    Lsi,
    /// Spectra of `PQP` for Haar-random projection pairs.
    Sample,
    /// Matrix-level log-Sobolev inequality for the tilted Jacobi ensemble.
    LsiMatrix,
    /// Commutator-sum identity on the Grassmannian.
    VerifyRicci,
    /// Gradient-norm formula for trace functions of `PQP`.
    VerifyGradient,
    /// Particle simulation of the liberation flow.
    Liberate,
    /// Equilibrium law for a tilted potential.
    Equilibrium,
    /// `½∫φ* dt` along the flow compared with the entropy.
    Istar,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "liberlab", version, about = "Free entropy and log-Sobolev computations for projection pairs")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Law document (JSON).
    #[arg(long)]
    pub law: Option<PathBuf>,
    /// Potential document (JSON) for the tilt h̃.
    #[arg(long)]
    pub h: Option<PathBuf>,
    /// Quadrature nodes on the support.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Matrix size.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; CSV data goes next to it (or the report next to a `.csv` path).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    #[arg(long, default_value_t = 512)]
    pub particles: usize,
    #[arg(long, default_value_t = 20.0)]
    pub tmax: f64,
    /// Tilt for the matrix commands, as `poly:c0,c1,...`.
    #[arg(long)]
    pub psi: Option<String>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("LIBERLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<liberlab::Error>() {
        Some(e) if !e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match commands::run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
