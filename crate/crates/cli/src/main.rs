use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use distbound::rng::lineage;
use distbound_cli::{find, write_artifacts, Format, Manifest, RunConfig, DEFAULT_SEED, SCENARIOS};

#[derive(Parser)]
#[command(name = "distbound", version, about = "Distance-bound experiments for evolution equations")]
struct Cli {
    /// Seed for all random streams; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for Monte Carlo loops.
    #[arg(long, global = true, env = "DISTBOUND_THREADS")]
    threads: Option<usize>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a JSON config.
    Run { config: PathBuf },
    /// Print the scenario names with one-line descriptions.
    ListScenarios,
    /// Print the default parameter block of one scenario (all when omitted).
    ShowDefaults { scenario: Option<String> },
}

fn run(cli: &Cli, config: &PathBuf) -> anyhow::Result<ExitCode> {
    let cfg = RunConfig::load(config)?;
    let scenario = find(&cfg.scenario)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let threads = rayon::current_num_threads();
    log::info!("running {} with seed {seed} on {threads} threads", scenario.name);
    let outcome = (scenario.run)(&cfg.params, seed)?;
    let manifest = Manifest {
        scenario: scenario.name.into(),
        seed,
        seed_lineage: lineage(seed),
        params: outcome.params.clone(),
        threads,
        format: cli.format,
        out_dir: cli.out.display().to_string(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    write_artifacts(&cli.out, &manifest, &outcome)?;
    for a in &outcome.assertions {
        let status = if a.passed { "PASS" } else { "FAIL" };
        let kind = if a.hard { "hard" } else { "soft" };
        println!("[{status}] {} ({kind}): {}", a.name, a.detail);
    }
    Ok(if outcome.hard_failures() == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{:<22}{}", s.name, s.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ShowDefaults { scenario } => {
            let value = match scenario {
                Some(name) => (find(name)?.defaults)(),
                None => SCENARIOS.iter().map(|s| (s.name.to_string(), (s.defaults)())).collect(),
            };
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
