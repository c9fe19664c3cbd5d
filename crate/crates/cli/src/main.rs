//! `continua` command-line front end.
//!
//! Exit codes: 0 satisfied, 1 unsatisfied, 2 input error, 3 certification
//! failure. Set `CONTINUA_LOG` (e.g. `info`, `debug`) for progress logging.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use continua::rational::parse_rational;
use continua::{Orientation, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "continua",
    version,
    about = "Exact PL interval dynamics, f* and shadowing on a planar continuum"
)]
pub struct Cli {
    /// Seed for every sampled quantity; reruns with the same flags are byte-identical.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Artifact format; each command has its own default and accepted set.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Orient {
    R,
    L,
}

impl From<Orient> for Orientation {
    fn from(o: Orient) -> Self {
        match o {
            Orient::R => Orientation::R,
            Orient::L => Orientation::L,
        }
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// An interval map file or a model bundle from `build-y`.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct System {
    /// Interval map JSON (as written by `build-fstar` or `explode`).
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Model bundle JSON (as written by `build-y`).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The depth-N truncation f*_N as map JSON or a phase diagram.
    BuildFstar {
        #[arg(long)]
        depth: u32,
    },
    /// Decides P_eps; prints the witness chain (exit 0) or None (exit 1).
    CheckPeps {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
    },
    /// Greedy conjugacy to f*_(depth-1) with its residual.
    Conjugate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        depth: u32,
    },
    /// Explodes a fixed point into a wandering interval, or with `--densify`
    /// perturbs the map into one with P_eps.
    Explode {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = rational, required_unless_present = "densify")]
        point: Option<Rational>,
        #[arg(long, value_parser = rational, required_unless_present = "densify")]
        radius: Option<Rational>,
        #[arg(long, value_enum, default_value_t = Orient::R)]
        orientation: Orient,
        /// Target epsilon for repeated explosions.
        #[arg(long, value_parser = rational, conflicts_with_all = ["point", "radius"])]
        densify: Option<Rational>,
    },
    /// Seeded pseudo-orbit as CSV.
    Orbit {
        #[command(flatten)]
        system: System,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        /// Starting point: a parameter in [0, 1] (on `--arc` for models).
        #[arg(long, value_parser = rational)]
        start: Rational,
        #[arg(long, default_value_t = 0)]
        arc: usize,
        #[arg(long, default_value_t = 20)]
        forward: u32,
        #[arg(long, default_value_t = 0)]
        back: u32,
    },
    /// Exact shadowing set (maps) or a verified shadowing point (models).
    Shadow {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        orbit: PathBuf,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
    },
    /// Empirical shadowing modulus of an interval map.
    Modulus {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        #[arg(long, default_value_t = 256)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        window: u32,
    },
    /// The truncated continuum Y with f*_N on every arc.
    BuildY {
        #[arg(long, default_value_t = 8)]
        segments: u32,
        #[arg(long, default_value_t = 10)]
        depth: u32,
    },
    /// Certificates per arc, the global delta and a sampled validation.
    Certify {
        /// Model bundle; without it Y is built from `--segments` and `--depth`.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 8, conflicts_with = "model")]
        segments: u32,
        #[arg(long, default_value_t = 10, conflicts_with = "model")]
        depth: u32,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        /// Sampled pseudo-orbits for the validation.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        window: u32,
    },
    /// SVG picture of a map (phase diagram) or a model.
    Render {
        #[command(flatten)]
        system: System,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONTINUA_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
