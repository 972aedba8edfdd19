use clap::{Args, Parser, Subcommand};
use qbm::scenario::{emit_outputs, run_scenario, Preset, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qbm", version, about = "Exact vs Markovian dynamics of a damped oscillator qubit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV/SVG output
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (flat TOML, `schema = 1`)
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in figure scenario
    #[arg(long, value_parser = ["fig1", "fig2", "fig3", "fig4"])]
    preset: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Starting Fock cutoff
    #[arg(long)]
    cutoff: Option<usize>,
    /// Inner time step in ns
    #[arg(long)]
    grid_step: Option<f64>,
    /// Skip the multi-level Lindblad baseline
    #[arg(long)]
    no_markov: bool,
    /// Skip SVG plots
    #[arg(long)]
    csv_only: bool,
}

fn run(args: RunArgs) -> qbm::Result<()> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(p)) => p.parse::<Preset>()?.config(),
        (None, None) => unreachable!("clap requires one of --config/--preset"),
    };
    if let Some(d) = args.out_dir {
        cfg.out_dir = d;
    }
    if let Some(c) = args.cutoff {
        cfg.fock_cutoff = c;
    }
    if let Some(s) = args.grid_step {
        cfg.grid_step_ns = s;
    }
    cfg.markov_mls &= !args.no_markov;
    cfg.csv_only |= args.csv_only;
    cfg.validate()?;
    let results = run_scenario(&cfg)?;
    for path in emit_outputs(&results, &cfg.out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Run(args) = Cli::parse().command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
