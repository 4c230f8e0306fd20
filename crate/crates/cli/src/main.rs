use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irsvlc_cli::output::{write_run, write_sweep};
use irsvlc_cli::{simulate, sweep, verify, Result, RunConfig, Vary};

#[derive(Parser)]
#[command(name = "irsvlc", version, about = "Monte Carlo SER of indoor VLC links with reflecting surfaces")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; omitted keys take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials per blocker density, overriding the config
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, env = "IRSVLC_THREADS")]
    threads: Option<usize>,

    /// Output directory, overriding the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write an SVG chart of the curves
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured density and scenario
    Simulate,
    /// Repeat the simulation over values of one parameter
    Sweep {
        #[arg(long, value_enum)]
        vary: VaryArg,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Run the oracle and property suites
    Verify {
        /// Randomized cases per property suite
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VaryArg {
    N,
    Density,
}

fn effective_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    cfg.output.svg |= args.svg;
    cfg.validate()?;
    Ok(cfg)
}

fn execute(args: Args) -> Result<bool> {
    let cfg = effective_config(&args)?;
    match args.command {
        Command::Simulate => {
            let out = simulate(&cfg)?;
            for r in out.summary().results {
                println!("lambda={:<5} {:<13} {}", r.blocker_density, r.scenario.to_string(), r.required_snr);
            }
            for g in out.summary().gaps {
                if let Some(db) = g.gap_db {
                    println!("lambda={:<5} {} - {}: {db:.2} dB", g.blocker_density, g.baseline, g.improved);
                }
            }
            println!("{:.1} s", out.wall_clock_s);
            for path in write_run(&out, &cfg.output.dir)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Sweep { vary, values } => {
            let vary = match vary {
                VaryArg::N => Vary::N,
                VaryArg::Density => Vary::Density,
            };
            let out = sweep(&cfg, vary, &values)?;
            for row in &out.rows {
                println!(
                    "{}={:<6} lambda={:<5} {:<13} {}",
                    if vary == Vary::N { "n" } else { "density" },
                    row.value,
                    row.blocker_density,
                    row.scenario.to_string(),
                    row.required_snr
                );
            }
            for path in write_sweep(&out, &cfg.output.dir)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Verify { cases } => {
            let reports = verify(cases, cfg.seed)?;
            for r in &reports {
                println!("{r}");
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = match args.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| execute(args)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

