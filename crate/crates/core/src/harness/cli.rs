//! `bpderiv` command line. Exit codes: 0 all checks pass, 1 a check failed
//! or the run aborted, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiments as ex;
use super::report::TheoremReport;
use crate::error::Result;

#[derive(Parser, Debug)]
#[command(name = "bpderiv", version, about = "Bounded point derivation experiments", arg_required_else_help = true)]
struct Cli {
    /// Experiment config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run with p <= 2 anyway; results are flagged exploratory.
    #[arg(long = "allow-p-le-2", global = true)]
    allow_p_le_2: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Region utilities.
    Region {
        #[command(subcommand)]
        action: RegionCmd,
    },
    /// Verify functionals.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Density of the set E at x0.
    Density {
        #[command(subcommand)]
        action: DensityCmd,
    },
    /// Difference quotient convergence.
    Diffquot {
        #[command(subcommand)]
        action: DiffquotCmd,
    },
    /// Full experiments.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
    },
}

#[derive(Subcommand, Debug)]
enum RegionCmd {
    /// Rasterize the configured region and write region.rgn.
    Gen,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Battery test of the order-t functional.
    Representing,
    /// Reduce k_t to lower orders and test each.
    Wilken,
    /// Move the order-0 functional to another point.
    Bishop,
}

#[derive(Subcommand, Debug)]
enum DensityCmd {
    Scan,
}

#[derive(Subcommand, Debug)]
enum DiffquotCmd {
    Table,
}

#[derive(Subcommand, Debug)]
enum ExperimentCmd {
    Theorem1,
    Theorem2,
    Bounds,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(r) = cli.resolution {
        cfg.resolution = r;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    cfg.check_p(cli.allow_p_le_2)?;
    Ok(cfg)
}

fn dispatch(cmd: &Cmd, cfg: &ExperimentConfig) -> Result<TheoremReport> {
    match cmd {
        Cmd::Region { action: RegionCmd::Gen } => ex::run_region_gen(cfg),
        Cmd::Verify { what: VerifyCmd::Representing } => ex::run_verify_representing(cfg),
        Cmd::Verify { what: VerifyCmd::Wilken } => ex::run_verify_wilken(cfg),
        Cmd::Verify { what: VerifyCmd::Bishop } => ex::run_verify_bishop(cfg),
        Cmd::Density { action: DensityCmd::Scan } => ex::run_density_scan(cfg),
        Cmd::Diffquot { action: DiffquotCmd::Table } => ex::run_diffquot_table(cfg),
        Cmd::Experiment { which: ExperimentCmd::Theorem1 } => ex::run_theorem1(cfg),
        Cmd::Experiment { which: ExperimentCmd::Theorem2 } => ex::run_theorem2(cfg),
        Cmd::Experiment { which: ExperimentCmd::Bounds } => ex::run_bounds(cfg),
    }
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = match dispatch(&cli.cmd, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    for line in report.lines() {
        println!("{line}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    if let Err(e) = report.write(&cfg.out) {
        eprintln!("error: writing {}: {e}", cfg.out.display());
        return 1;
    }
    println!("{} -> {}", if report.passed { "PASS" } else { "FAIL" }, cfg.out.display());
    if report.passed {
        0
    } else {
        1
    }
}
