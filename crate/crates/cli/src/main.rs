use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use szilard_cli::{cmd_cycle, cmd_density, cmd_qbl, cmd_sweep, CliError, DensityArgs, Overrides, RunConfig, SweepWhich};
use szilard_core::{EnergyUnit, Occupancy};

#[derive(Parser)]
#[command(name = "szilard", version, about = "Quantum Szilard engine simulator")]
struct Cli {
    /// Flat JSON config; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Energy unit of tables and reports.
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,
    /// Grid spacing, nm.
    #[arg(long, global = true)]
    grid_nm: Option<f64>,
    #[arg(long, global = true)]
    temp_k: Option<f64>,
    #[arg(long, global = true)]
    lx_nm: Option<f64>,
    #[arg(long, global = true)]
    ly_nm: Option<f64>,
    /// Points per sweep.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Sweep worker threads (default: all processors).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    Kt,
    Joule,
    Zj,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Insert,
    ExpandSuperposed,
    ExpandLocalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum Occ {
    FullBox,
    Superposed,
    LocalizedLeft,
    LocalizedRight,
}

#[derive(Subcommand)]
enum Command {
    /// Insertion, measurement, expansion and removal ledger.
    Cycle,
    /// Thermodynamic quantities along a partition sweep.
    Sweep {
        #[arg(value_enum)]
        which: Which,
    },
    /// Thermal probability density on the grid.
    Density {
        /// Partition depth, nm.
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        /// Partition position, nm (default: box centre).
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, value_enum, default_value = "full-box")]
        occupancy: Occ,
    },
    /// Boundary-layer formulas against exact sums.
    Qbl,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        out: cli.out,
        units: cli.units.map(|u| match u {
            Units::Kt => EnergyUnit::KtUnits,
            Units::Joule => EnergyUnit::Joule,
            Units::Zj => EnergyUnit::Zeptojoule,
        }),
        grid_nm: cli.grid_nm,
        temp_k: cli.temp_k,
        lx_nm: cli.lx_nm,
        ly_nm: cli.ly_nm,
        points: cli.points,
        workers: cli.workers,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Cycle => cmd_cycle(&cfg)?,
        Command::Sweep { which } => cmd_sweep(
            &cfg,
            match which {
                Which::Insert => SweepWhich::Insert,
                Which::ExpandSuperposed => SweepWhich::ExpandSuperposed,
                Which::ExpandLocalized => SweepWhich::ExpandLocalized,
            },
        )?,
        Command::Density { d, l, occupancy } => cmd_density(
            &cfg,
            DensityArgs {
                depth_nm: d,
                position_nm: l.unwrap_or(cfg.lx_nm / 2.0),
                occupancy: match occupancy {
                    Occ::FullBox => Occupancy::FullBox,
                    Occ::Superposed => Occupancy::SuperposedHalves,
                    Occ::LocalizedLeft => Occupancy::LocalizedLeft,
                    Occ::LocalizedRight => Occupancy::LocalizedRight,
                },
            },
        )?,
        Command::Qbl => cmd_qbl(&cfg)?,
    };
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("szilard: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
