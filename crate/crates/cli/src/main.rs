use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poem_cli::cost::CostComparison;
use poem_cli::{output, CliError, Overrides, Study, ValidatedConfig};

/// Discretization-error estimation by grid refinement with preset orders.
#[derive(Parser)]
#[command(name = "poem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full study and write its tables and report.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Iterate the preset orders until every term converges at its order.
    CheckOrders {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Compare the work units (points times steps) of two studies.
    Cost { first: PathBuf, second: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Flags {
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    midas: Option<Switch>,
    /// Asymptotic-range threshold on the term ratio.
    #[arg(long)]
    beta: Option<f64>,
    /// Number of refinement levels (windows, for the two-tier protocol).
    #[arg(long)]
    levels: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            midas: self.midas.map(|s| matches!(s, Switch::On)),
            beta: self.beta,
            levels: self.levels,
            out: self.out.clone(),
        }
    }
}

/// Runs a subcommand and returns what it prints on stdout.
fn run(command: Command) -> Result<String, CliError> {
    let mut out = String::new();
    match command {
        Command::Run { config, flags } => {
            let config = ValidatedConfig::load(&config, &flags.overrides())?;
            let dir = config.output_dir();
            eprintln!("solving {} levels", poem_cli::study::Plan::new(&config).distinct_levels().len());
            let outcome = Study::prepare(config)?.run()?;
            let written = output::write_all(&outcome, &dir)?;
            out.push_str(&output::summary(&outcome));
            out.push('\n');
            for path in written {
                let _ = writeln!(out, "wrote {}", path.display());
            }
        }
        Command::CheckOrders { config, flags } => {
            let config = ValidatedConfig::load(&config, &flags.overrides())?;
            let dir = config.output_dir();
            let study = Study::prepare(config)?;
            let iteration = study.iterate()?;
            std::fs::create_dir_all(&dir).map_err(|source| output::OutputError::Io {
                path: dir.clone(),
                source,
            })?;
            let path = dir.join("orders_trail.json");
            let json = serde_json::to_string_pretty(&iteration).map_err(output::OutputError::from)?;
            std::fs::write(&path, json + "\n").map_err(|source| output::OutputError::Io {
                path: path.clone(),
                source,
            })?;
            for step in &iteration.trail {
                let slopes: Vec<String> = step
                    .check
                    .verdicts
                    .iter()
                    .map(|v| format!("{:.4}", v.observed_slope))
                    .collect();
                let _ = writeln!(out, "orders {:?}  finest slopes [{}]", step.orders, slopes.join(", "));
            }
            let _ = writeln!(
                out,
                "{} final orders {:?}",
                if iteration.converged { "converged:" } else { "not converged, best attempt:" },
                iteration.final_orders
            );
            let _ = writeln!(out, "wrote {}", path.display());
        }
        Command::Cost { first, second } => {
            let none = Overrides::default();
            let a = ValidatedConfig::load(&first, &none)?;
            let b = ValidatedConfig::load(&second, &none)?;
            out.push_str(&CostComparison::new(&a, &b).render());
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(text) => {
            // A reader that closes the pipe early (`| head`) is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
