//! `lspsim`: run secrecy-rate sweeps, validate configs, run invariant checks
//! and dump sample drops.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use lsp_core::checks;
use lsp_core::config::{to_key_values, Assignments};
use lsp_core::experiment::{run_sweep, ExperimentConfig};
use lsp_core::scenario::{derive_seed, generate, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "lspsim", version, about = "Leakage-subspace precoding simulator")]
struct Cli {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key, applied after the file (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory that receives every output file.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Shortcut for `--set master_seed=N`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full sweep and write the results CSV.
    Run,
    /// Print the resolved parameter table.
    Validate,
    /// Run the randomised invariant suites.
    Check {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Write one drop as a plain-text fixture.
    DumpScenario {
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// Number of Bobs (defaults to the first configured value).
        #[arg(long)]
        bobs: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut assignments = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            Assignments::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => Assignments::default(),
    };
    for o in &cli.overrides {
        assignments.set_line(o).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        assignments
            .set("master_seed", &seed.to_string())
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    assignments.resolve().map_err(|e| Failure::Usage(e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_validate(config: &ExperimentConfig) {
    let rows = to_key_values(config);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &rows {
        println!("{k:<width$} = {v}");
    }
    let g = &config.geometry;
    println!("# aperture            {:.4} m", g.aperture());
    println!("# rayleigh_distance   {:.4} m", g.rayleigh_distance());
    println!("# critical_distance   {:.4} m", g.critical_distance());
}

fn cmd_run(config: &mut ExperimentConfig, out: &Path) -> Result<(), Failure> {
    ensure_dir(out)?;
    let name = config
        .output_path
        .file_name()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    config.output_path = out.join(name);
    info!(
        "sweep: {} realizations, K_B {:?}, SNR {:?} dB",
        config.num_realizations, config.bob_counts, config.snr_grid_db
    );
    let rows = run_sweep(config).map_err(runtime)?;
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    info!("wrote {} rows to {} ({failures} failed realizations)", rows.len(), config.output_path.display());
    println!("{}", config.output_path.display());
    Ok(())
}

fn cmd_check(config: &ExperimentConfig, trials: usize) -> Result<(), Failure> {
    let reports = checks::run_all(trials, config.master_seed);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(runtime(format!("{failed} suite(s) failed")));
    }
    Ok(())
}

fn cmd_dump(config: &ExperimentConfig, out: &Path, realization: usize, bobs: Option<usize>) -> Result<(), Failure> {
    let num_bobs = bobs.unwrap_or(config.bob_counts[0]);
    let scenario = ScenarioConfig {
        num_bobs,
        seed: derive_seed(config.master_seed, realization as u64),
        ..config.scenario.clone()
    };
    scenario.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let instance = generate(&scenario).map_err(runtime)?;
    ensure_dir(out)?;
    let path = out.join(format!(
        "scenario_{}_K{num_bobs}_seed{}_r{realization}.txt",
        scenario.collusion, config.master_seed
    ));
    fs::write(&path, instance.to_text()).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Validate => {
            cmd_validate(&config);
            Ok(())
        }
        Command::Run => cmd_run(&mut config, &cli.out),
        Command::Check { trials } => cmd_check(&config, trials),
        Command::DumpScenario { realization, bobs } => cmd_dump(&config, &cli.out, realization, bobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    env_logger::Builder::new().filter_level(level).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("lspsim: {msg}");
            ExitCode::from(f.code())
        }
    }
}
