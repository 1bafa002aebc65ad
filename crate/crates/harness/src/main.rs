use anyhow::Context;
use clap::{Parser, Subcommand};
use parabolic_harness::{run_experiment, ExperimentConfig, REGISTRY};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "parabolic", version, about = "Run registered estimate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run {
        config: PathBuf,
        /// Output directory; overrides `out` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for data-parallel internals (default 1).
        #[arg(long)]
        threads: Option<usize>,
        /// Leaf override `dotted.key=value`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the registry with the statements each experiment exercises.
    List,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::List => {
            for entry in REGISTRY {
                println!("{}", entry.id);
                for s in entry.statements {
                    println!("    {s}");
                }
            }
            Ok(true)
        }
        Command::Run { config, out, seed, threads, mut overrides } => {
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            if let Some(k) = threads {
                overrides.push(format!("threads={k}"));
            }
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads.unwrap_or(1))
                .build_global()
                .context("configuring the thread pool")?;
            let report = run_experiment(&cfg)?;
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("runs").join(&cfg.experiment));
            report.write(&dir).with_context(|| format!("writing {}", dir.display()))?;
            for c in &report.checks {
                println!("{} {} = {:e} (threshold {:e})", if c.pass { "pass" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            if let Some(e) = &report.error {
                println!("FAIL aborted: {e}");
            }
            println!(
                "{}: {} in {:.1} s, report in {}",
                report.experiment,
                if report.passed() { "passed" } else { "failed" },
                report.wall_clock_seconds,
                dir.display()
            );
            Ok(report.passed())
        }
    }
}
