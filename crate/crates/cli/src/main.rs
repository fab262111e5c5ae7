use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hesm_core::sim::{Mode, SupervisorKind};
use hesm_sim::commands::{self, Overrides};
use hesm_sim::{parse_config, CliError, Config};

#[derive(Parser)]
#[command(name = "hesm-sim", version, about = "Battery/ultracapacitor hybrid storage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Flc,
    Ifthen,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Switched,
    Averaged,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration; writes trace.csv, report.json and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        controller: Option<ControllerArg>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Fixed integration step, s.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run two configurations on the same load and report b's improvement over a.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the FLC input/output surface as CSV.
    Surface {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid points per input axis.
        #[arg(long, default_value_t = 50)]
        res: usize,
    },
    /// Run one configuration per value of a dotted config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key path, e.g. `load.phase_b.i_high` or `controller.flc.output.sets[4].shape.points`.
        #[arg(long)]
        vary: String,
        /// Comma-separated values, or one JSON array.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the complete default configuration.
    Defaults,
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, out, controller, model, dt } => {
            let mut cfg = parse_config(&config)?;
            Overrides {
                controller: controller.map(|c| match c {
                    ControllerArg::Flc => SupervisorKind::Flc,
                    ControllerArg::Ifthen => SupervisorKind::Ifthen,
                }),
                model: model.map(|m| match m {
                    ModelArg::Switched => Mode::Switched,
                    ModelArg::Averaged => Mode::Averaged,
                }),
                dt,
            }
            .apply(&mut cfg)?;
            let r = commands::cmd_run(&cfg, &out)?;
            println!(
                "{} {} dt={} s: {} steps in {:.2} s",
                r.run.controller, r.run.model, r.run.dt_s, r.run.steps, r.run.wall_time_s
            );
            match &r.metrics {
                Some(m) => println!(
                    "swing {:.4} V, sag {}",
                    m.swing_v,
                    m.sag_v.map_or("n/a".into(), |s| format!("{s:.4} V"))
                ),
                None => println!("metrics unavailable: {}", r.run.metrics_note.as_deref().unwrap_or("")),
            }
            println!("wrote {}", out.display());
        }
        Command::Compare { a, b, out } => {
            let (ca, cb) = (parse_config(&a)?, parse_config(&b)?);
            let r = commands::cmd_compare(&ca, &cb, &out)?;
            print!("{}", commands::compare_table(&r));
            println!("wrote {}", out.display());
        }
        Command::Surface { config, out, res } => {
            let cfg = parse_config(&config)?;
            let n = commands::cmd_surface(&cfg, &out, res)?;
            println!("wrote {n} rows to {}", out.display());
        }
        Command::Sweep { config, vary, values, out } => {
            let cfg = parse_config(&config)?;
            let values = commands::parse_values(&values)?;
            let threads = commands::threads_from_env()?;
            let r = commands::cmd_sweep(&cfg, &vary, &values, &out, threads)?;
            println!("{} runs on {} threads, wrote {}", r.entries.len(), r.threads, out.display());
        }
        Command::Defaults => {
            let text = serde_json::to_string_pretty(&Config::default()).expect("config serializes");
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hesm-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
