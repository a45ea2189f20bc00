//! `kslab`: run scenarios, sweeps, and reference calculations for the
//! Keller-Segel laboratory.
//!
//! Output directories are resolved under `$KSLAB_OUTPUT_ROOT` when it is set.
//! Exit status: 0 success, 1 failed verification, 2 configuration, I/O, or
//! numerical failure, 3 blow-up detector triggered.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kslab_core::harness::{
    self, parse_config, run_eps_study, run_scenario, run_sweep, verify::SCENARIOS, ScenarioConfig, SweepOutcome,
    EXIT_FAILURE,
};
use kslab_core::oracle::{self, HMinimum};
use kslab_core::Result;

#[derive(Parser)]
#[command(name = "kslab", version, about = "Finite-volume Keller-Segel laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes series.csv, report.txt, and snapshots.
    Run { config: PathBuf },
    /// Run the [sweep] parameter grid; writes sweep.csv.
    Sweep { config: PathBuf },
    /// Compare runs over the [eps_study] epsilon list; writes eps_study.csv.
    EpsStudy { config: PathBuf },
    /// Closed-form reference values, printed as CSV.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run the acceptance criteria whose names contain FILTER (all if omitted).
    Verify { filter: Option<String> },
    /// Print a shipped scenario file, or list them.
    Scenario { name: Option<String> },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// A1(delta).
    A1 { delta: f64 },
    /// Boundedness threshold on mu for a given regularity constant C.
    Threshold {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        chi: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Minimizer and minimum of H(y) = y + A1 y^-delta chi^(delta+1) C.
    MinH {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        chi: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Closed-form logistic solution at the given times.
    Logistic {
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, num_args = 1.., required = true)]
        t: Vec<f64>,
    },
    /// RK4 trajectory of the spatially homogeneous system.
    Ode {
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Print every k-th step.
        #[arg(long, default_value_t = 100)]
        every: usize,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| kslab_core::Error::Io { path: path.into(), source: e })?;
    parse_config(&text)
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { config } => {
            let summary = run_scenario(&load(&config)?)?;
            print!("{}", summary.report);
            println!("outputs: {}", summary.output_dir.display());
            Ok(summary.exit_code() as u8)
        }
        Command::Sweep { config } => {
            let (rows, path) = run_sweep(&load(&config)?)?;
            for r in &rows {
                println!("{}", r.csv_row());
            }
            let triggered = rows.iter().filter(|r| r.outcome == SweepOutcome::Triggered).count();
            println!("{} runs ({triggered} triggered) -> {}", rows.len(), path.display());
            Ok(0)
        }
        Command::EpsStudy { config } => {
            let (study, path) = run_eps_study(&load(&config)?)?;
            print!("{}", study.to_csv());
            println!("nonincreasing: {} -> {}", study.nonincreasing(), path.display());
            Ok(0)
        }
        Command::Oracle { which } => oracle_command(which).map(|()| 0),
        Command::Verify { filter } => {
            let mut failed = 0;
            for r in harness::verify(filter.as_deref())? {
                println!("{r}");
                failed += usize::from(!r.passed);
            }
            println!("{failed} failed");
            Ok(u8::from(failed > 0))
        }
        Command::Scenario { name: None } => {
            for (name, _) in SCENARIOS {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Scenario { name: Some(name) } => match SCENARIOS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => {
                print!("{text}");
                Ok(0)
            }
            None => Err(kslab_core::Error::Precondition(format!("no shipped scenario named `{name}`"))),
        },
    }
}

fn oracle_command(which: OracleCommand) -> Result<()> {
    match which {
        OracleCommand::A1 { delta } => {
            println!("delta,a1");
            println!("{delta:.16e},{:.16e}", oracle::a1_constant(delta)?);
        }
        OracleCommand::Threshold { dim, chi, c } => {
            println!("dim,chi,c_const,mu_threshold");
            println!("{dim},{chi:.16e},{c:.16e},{:.16e}", oracle::threshold_mu(dim, chi, c)?);
        }
        OracleCommand::MinH { delta, chi, c } => {
            println!("{}", HMinimum::CSV_HEADER);
            println!("{}", oracle::minimize_h(delta, chi, c)?.csv_row());
        }
        OracleCommand::Logistic { u0, a, mu, t } => {
            println!("t,u");
            for t in t {
                println!("{t:.16e},{:.16e}", oracle::logistic_closed_form(u0, a, mu, t));
            }
        }
        OracleCommand::Ode { u0, v0, a, mu, t_end, dt, every } => {
            let traj = oracle::homogeneous_ode(u0, v0, a, mu, t_end, dt)?;
            println!("t,u,v");
            let last = traj.len() - 1;
            for (k, (t, u, v)) in traj.into_iter().enumerate() {
                if k % every.max(1) == 0 || k == last {
                    println!("{t:.16e},{u:.16e},{v:.16e}");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
