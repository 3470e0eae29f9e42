mod config;
mod series;
mod sweep;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use toric_renyi::lattice::{build_partition_at, PartitionCase, Star};

use config::{Format, RunConfig, Settings};

#[derive(Parser)]
#[command(
    name = "toric-renyi",
    version,
    about = "Topological Rényi entropy and Wilson loops of the perturbed toric code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Exact free-fermion sweep over field values and sizes (CSV).
    Sweep,
    /// High-order series coefficients and ratio-test estimates.
    Series,
    /// Oracle and invariant checks; exits non-zero if any check fails.
    Verify,
    /// Boundary geometry of partition cases as JSON.
    Geometry,
}

/// Settings shared by all commands. Precedence: preset < config file < flags.
#[derive(Args)]
struct Opts {
    /// quasi1d or isotropic2d
    #[arg(long, global = true)]
    variant: Option<String>,
    /// small or large (series only; default both)
    #[arg(long, global = true)]
    regime: Option<String>,
    /// renyi, wilson or all (series only)
    #[arg(long, global = true)]
    target: Option<String>,
    /// renyi or wilson (sweep only)
    #[arg(long, global = true)]
    observable: Option<String>,
    /// Comma-separated field values
    #[arg(long, global = true)]
    lambda: Option<String>,
    /// start,stop,points
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Torus size(s); accepts lists and a..b ranges
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Outer extent(s)
    #[arg(long = "D", global = true)]
    extent: Option<String>,
    /// Thickness(es); defaults to D/3
    #[arg(long = "d", global = true)]
    thickness: Option<String>,
    /// Partition case 1..=4 (geometry only; default all)
    #[arg(long, global = true)]
    case: Option<String>,
    /// Series order in λ² or 1/λ² units of two
    #[arg(long, global = true)]
    order: Option<String>,
    #[arg(long, global = true)]
    preset: Option<String>,
    /// key=value settings file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or a directory for series output
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Cap on boundary subsets summed per entropy
    #[arg(long, global = true)]
    budget: Option<String>,
    #[arg(long, global = true, env = "TORIC_RENYI_THREADS")]
    threads: Option<String>,
    /// Allow the expensive isotropic order-6 expansion
    #[arg(long, global = true)]
    stretch: bool,
}

impl Opts {
    fn settings(&self, command: &str) -> Result<Settings> {
        let mut s = match &self.preset {
            Some(p) => config::preset(p, command)?,
            None => Settings::default(),
        };
        if let Some(path) = &self.config {
            s.read_file(path)?;
        }
        let flags = [
            ("variant", &self.variant),
            ("regime", &self.regime),
            ("target", &self.target),
            ("observable", &self.observable),
            ("lambda", &self.lambda),
            ("grid", &self.grid),
            ("N", &self.n),
            ("D", &self.extent),
            ("d", &self.thickness),
            ("case", &self.case),
            ("order", &self.order),
            ("out", &self.out),
            ("format", &self.format),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("threads", &self.threads),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v.as_str());
            }
        }
        if self.stretch {
            s.set("stretch", "true");
        }
        Ok(s)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn geometry(cfg: &RunConfig) -> Result<String> {
    let Some(size) = cfg.sizes.first() else {
        bail!("geometry needs N and D")
    };
    let cases: Vec<u8> = match cfg.case {
        Some(m) => vec![m],
        None => vec![1, 2, 3, 4],
    };
    let docs = cases
        .into_iter()
        .map(|m| {
            let case = PartitionCase::new(m, size.extent, size.thickness)?;
            Ok(build_partition_at(case, size.n, Star::new(0, 0))?.to_json())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_string_pretty(&docs)? + "\n")
}

fn run(cli: Cli) -> Result<bool> {
    let name = match cli.command {
        Command::Sweep => "sweep",
        Command::Series => "series",
        Command::Verify => "verify",
        Command::Geometry => "geometry",
    };
    let cfg = RunConfig::from_settings(&cli.opts.settings(name)?)?;
    let out = cfg.out.as_deref();
    match cli.command {
        Command::Sweep => emit(out, &sweep::run(&cfg)?)?,
        Command::Series => {
            let result = series::run(&cfg)?;
            match out {
                Some(dir) if dir.is_dir() => {
                    emit(Some(&dir.join("series.json")), &result.json)?;
                    emit(Some(&dir.join("estimates.csv")), &result.csv)?;
                }
                _ => match cfg.format {
                    Format::Json => emit(out, &result.json)?,
                    Format::Csv => emit(out, &result.csv)?,
                },
            }
        }
        Command::Verify => {
            let report = verify::run(&cfg);
            emit(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            return Ok(report.pass);
        }
        Command::Geometry => emit(out, &geometry(&cfg)?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
