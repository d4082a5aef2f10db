use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use unsatflow::driver::{
    presets, run_convergence_sweep, run_fertigation_strategy, run_scenario, RunArtifacts, RunOptions,
    ScenarioConfig, ScenarioError, Strategy, SweepLevel,
};

#[derive(Parser)]
#[command(name = "unsatflow", version, about = "Unsaturated flow and solute transport on triangular meshes")]
struct Cli {
    /// Directory for VTK snapshots, CSV metrics and the JSON-lines log.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Number of evenly spaced VTK snapshots (overrides the config).
    #[arg(long, global = true)]
    snapshots: Option<usize>,
    /// Accepted for interface stability; the solver uses no randomness.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run { config: PathBuf },
    /// Run a convergence sweep over mesh and time-step levels.
    Sweep {
        config: PathBuf,
        /// Comma-separated levels `NXxNZ@DT`, e.g. `12x12@0.02,25x25@0.01`.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<SweepLevel>,
        /// Run levels on separate threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Run a fertigation strategy (A, B or C).
    Strategy { strategy: Strategy, config: PathBuf },
    /// Print a built-in scenario as TOML.
    Preset { name: PresetName },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    Test1,
    Test2,
    Lshape,
    Salt,
    Fertigation,
}

fn summarize(run: &RunArtifacts) {
    info!(
        "t = {}: {} steps, {} flow solves, {} Picard iterations, {:.3} s",
        run.flow.time, run.flow_stats.steps, run.flow_stats.linear_solves, run.flow_stats.picard_iterations, run.cpu_s
    );
    if let Some(r) = &run.report {
        println!("l2_psi = {:.6e}  l2_S = {:.6e}  cpu_s = {:.3}", r.l2_psi, r.l2_s, r.cpu_s);
    }
    for f in &run.files {
        info!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> Result<(), ScenarioError> {
    let opts = RunOptions {
        out_dir: Some(cli.out_dir.clone()),
        snapshots: cli.snapshots,
    };
    match cli.command {
        Command::Run { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            summarize(&run_scenario(&cfg, &opts)?);
        }
        Command::Sweep {
            config,
            levels,
            parallel,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let sweep = run_convergence_sweep(&cfg, &levels, &opts, parallel)?;
            print!("{}", sweep.table.render());
        }
        Command::Strategy { strategy, config } => {
            let cfg = ScenarioConfig::load(&config)?;
            summarize(&run_fertigation_strategy(strategy, &cfg, &opts)?);
        }
        Command::Preset { name } => {
            let cfg = match name {
                PresetName::Test1 => presets::green_ampt_test1(12, 0.02, "silf2"),
                PresetName::Test2 => presets::green_ampt_test2(12, 0.02, "silf2"),
                PresetName::Lshape => presets::lshape(75, 160.0),
                PresetName::Salt => presets::salt_transport(40, 1e-3),
                PresetName::Fertigation => presets::fertigation(41, 5e-4, 247.5, 1000.0),
            };
            print!("{}", cfg.to_toml_string()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
