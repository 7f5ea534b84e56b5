use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stokes_green::commands::format_checks;
use stokes_green::{
    cmd_modes, cmd_solve, cmd_sweep, cmd_verify, parse_config, CliError, RunConfig,
};
use stokes_green_core::verification::Verdict;

#[derive(Parser)]
#[command(
    name = "stokes-green",
    version,
    about = "Green-function pressure reconstruction for linear Stokes on a box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (flat dotted keys); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed override for random forcings and test corpora.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Print the truncated eigenbasis sorted by eigenvalue.
    Modes,
    /// Solve for the configured forcing and write snapshots and norms.
    Solve,
    /// Run the selected verification suites.
    Verify,
    /// Run the refinement ladder.
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.forcing.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| match cli.command {
        Command::Modes => {
            print!("{}", cmd_modes(&cfg)?);
            Ok(true)
        }
        Command::Solve => {
            let s = cmd_solve(&cfg, &cfg.output_dir)?;
            for r in &s.rows {
                println!("{:<20} {:.6e}", r.metric, r.value);
            }
            println!("wrote {}", cfg.output_dir.display());
            Ok(true)
        }
        Command::Verify | Command::Sweep => {
            let v = if matches!(cli.command, Command::Verify) {
                cmd_verify(&cfg, &cfg.output_dir)?
            } else {
                cmd_sweep(&cfg, &cfg.output_dir)?
            };
            print!("{}", format_checks(v.checks()));
            let failed = v.checks().filter(|c| c.verdict == Verdict::Fail).count();
            println!(
                "{} checks, {failed} failed; wrote {}",
                v.checks().count(),
                cfg.output_dir.display()
            );
            Ok(v.passed())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
