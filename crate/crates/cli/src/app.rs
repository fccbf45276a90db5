//! Argument parsing and subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use helmscat_core::profile::Profile;
use helmscat_core::riccati::FieldKind;
use helmscat_core::scatter::{field_grid, KGridSpec};
use num_complex::Complex64;

use crate::catalog;
use crate::commands::{self, JostWhich};
use crate::config::{parse_complex, parse_kgrid, RunConfig, Subcommand, Tolerances, DEFAULT_QUAD_TOL};
use crate::error::CliError;
use crate::io::{self, Table};
use crate::verify::{run_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "helmscat", version, about = "Scattering and recovery for u'' + (k/c)^2 u = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Relative tolerance of the ODE integrator.
    #[arg(long = "tol-ode", global = true, default_value_t = helmscat_core::jost::DEFAULT_RTOL)]
    pub tol_ode: f64,
    /// Target accuracy of the k-space quadrature panels.
    #[arg(long = "tol-quad", global = true, default_value_t = DEFAULT_QUAD_TOL)]
    pub tol_quad: f64,
    /// Truncation tolerance for decaying profiles; overrides the profile file.
    #[arg(long = "tol-tail", global = true)]
    pub tol_tail: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum JostArg {
    M1,
    M2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldArg {
    R,
    W,
    WMinus,
    Rho,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// T, R1, R2 on a real k-grid.
    Forward {
        #[arg(long)]
        profile: PathBuf,
        /// lo:hi:n[:log|symlog|lin]
        #[arg(long)]
        kgrid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// A Jost function and its derivative on an x-grid.
    Jost {
        #[arg(long)]
        profile: PathBuf,
        /// Wavenumber as re,im.
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, value_enum, default_value = "m1")]
        field: JostArg,
        /// Number of x samples across the padded support.
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// A Riccati field on an x-grid.
    Riccati {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, value_enum)]
        field: FieldArg,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recovers T and the travel-time integrals from a forward CSV.
    Recover {
        /// CSV with columns k, ReR2, ImR2.
        #[arg(long)]
        r2: PathBuf,
        /// Profile to compare against.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transfer-matrix scattering for piecewise-constant profiles.
    Oracle {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        kgrid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the invariant checklist; exits nonzero if any check fails.
    Verify {
        /// Defaults to the smooth bump c = 1 + 0.5 phi(x).
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        kgrid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Cli {
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let (sub, profile, kgrid, out) = match &self.command {
            Command::Forward { profile, kgrid, out } => (Subcommand::Forward, Some(profile), kgrid.as_deref(), Some(out)),
            Command::Jost { profile, out, .. } => (Subcommand::Jost, Some(profile), None, Some(out)),
            Command::Riccati { profile, out, .. } => (Subcommand::Riccati, Some(profile), None, Some(out)),
            Command::Recover { truth, out, .. } => (Subcommand::Recover, truth.as_ref(), None, Some(out)),
            Command::Oracle { profile, kgrid, out } => (Subcommand::Oracle, Some(profile), kgrid.as_deref(), Some(out)),
            Command::Verify { profile, kgrid, out } => (Subcommand::Verify, profile.as_ref(), kgrid.as_deref(), out.as_ref()),
        };
        let config = RunConfig {
            subcommand: sub,
            profile: profile.cloned(),
            kgrid: match kgrid {
                Some(s) => parse_kgrid(s)?,
                None => KGridSpec::default(),
            },
            tolerances: Tolerances {
                ode_tol: self.common.tol_ode,
                quad_tol: self.common.tol_quad,
                tail_tol: self.common.tol_tail,
            },
            out: out.cloned(),
            jobs: self.common.jobs,
        };
        config.validate()?;
        Ok(config)
    }
}

fn load_profile(config: &RunConfig) -> Result<Profile, CliError> {
    match &config.profile {
        Some(path) => io::parse_profile(path, config.tolerances.tail_tol),
        None => Err(CliError::Usage("--profile is required".into())),
    }
}

fn out_path(config: &RunConfig) -> Result<&Path, CliError> {
    config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out is required".into()))
}

fn write_table(config: &RunConfig, t: &Table) -> Result<(), CliError> {
    io::emit_csv(t, out_path(config)?)
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let config = cli.run_config()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(cli, &config))
}

fn dispatch(cli: &Cli, config: &RunConfig) -> Result<i32, CliError> {
    let rtol = config.tolerances.ode_tol;
    match &cli.command {
        Command::Forward { .. } => {
            let p = load_profile(config)?;
            let t = commands::forward(&p, &config.kgrid.values()?, &config.scatter_solver()?)?;
            write_table(config, &t)?;
        }
        Command::Jost { k, field, points, .. } => {
            let p = load_profile(config)?;
            let which = match field {
                JostArg::M1 => JostWhich::M1,
                JostArg::M2 => JostWhich::M2,
            };
            let t = commands::jost(&p, parse_complex(k)?, &field_grid(&p, *points), which, rtol)?;
            write_table(config, &t)?;
        }
        Command::Riccati { k, field, points, .. } => {
            let p = load_profile(config)?;
            let which = match field {
                FieldArg::R => FieldKind::R,
                FieldArg::W => FieldKind::W,
                FieldArg::WMinus => FieldKind::WMinus,
                FieldArg::Rho => FieldKind::Rho,
            };
            let k: Complex64 = parse_complex(k)?;
            let t = commands::riccati(&p, k, &field_grid(&p, *points), which, rtol)?;
            write_table(config, &t)?;
        }
        Command::Recover { r2, .. } => {
            let file = r2.display().to_string();
            let (ks, samples) = io::r2_samples(&io::read_csv(r2)?, &file)?;
            let truth = match &config.profile {
                Some(_) => {
                    let p = load_profile(config)?;
                    Some(commands::truth(&p, &ks, None, &config.scatter_solver()?)?)
                }
                None => None,
            };
            let report = commands::recover(&ks, &samples, truth.as_ref())?;
            for f in &report.flags {
                eprintln!("warning: {f}");
            }
            io::write_text(out_path(config)?, &io::to_json(&report))?;
        }
        Command::Oracle { .. } => {
            let p = load_profile(config)?;
            let t = commands::oracle(&p, &config.kgrid.values()?, &config.scatter_solver()?)?;
            write_table(config, &t)?;
        }
        Command::Verify { kgrid, .. } => {
            let p = match &config.profile {
                Some(_) => load_profile(config)?,
                None => catalog::bump(),
            };
            let mut opts = VerifyOptions {
                seed: catalog::seed_from_env(),
                ..VerifyOptions::default()
            };
            if kgrid.is_some() {
                opts.kgrid = config.kgrid;
            }
            let report = run_verify(&p, &opts, &config.scatter_solver()?)?;
            for c in &report.checks {
                println!("{}", c.line());
            }
            if let Some(out) = &config.out {
                io::write_text(out, &io::to_json(&report))?;
            }
            if !report.passed {
                eprintln!("failed checks: {}", report.failed.join(", "));
                return Ok(1);
            }
        }
    }
    Ok(0)
}
