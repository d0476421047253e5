use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use convexflow::flow::Termination;
use convexflow::verify::{Suite, Verifier, VerifyOptions};
use convexflow_cli::commands::{cmd_compare, cmd_evolve, cmd_generate};
use convexflow_cli::config::{parse_config, seed_from_env, InitConfig, RunConfig};

#[derive(Parser)]
#[command(name = "convexflow", version, about = "Nonlocal curvature flows of convex curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a flow and write diagnostics and snapshots.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite and print a pass/fail table.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Compare the engine with the marker-particle solver.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 512)]
        markers: usize,
        #[arg(long, default_value_t = 0.5)]
        horizon: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also run at doubled resolution and report the error ratio.
        #[arg(long)]
        refine: bool,
    },
    /// Write the profile and curve of an initial shape, e.g. `ellipse:a=2,b=1`.
    Generate {
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Conservation,
    Monotonicity,
    Rates,
    Geometry,
    Oracle,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Conservation => Suite::Conservation,
            SuiteArg::Monotonicity => Suite::Monotonicity,
            SuiteArg::Rates => Suite::Rates,
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::Oracle => Suite::Oracle,
        }
    }
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut cfg = parse_config(&text)?;
    cfg.apply_seed_env()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Evolve { config, out } => {
            let cfg = load(&config)?;
            let out = out
                .or_else(|| cfg.output.directory.clone())
                .context("no output directory: pass --out or set output.directory")?;
            let s = cmd_evolve(&cfg, &out)?;
            println!(
                "termination={} steps={} records={} t={}",
                s.termination.name(),
                s.steps,
                s.records,
                s.t_final
            );
            if s.termination != Termination::Completed {
                eprintln!("run stopped early: {}", s.termination.name());
            }
            Ok(s.termination == Termination::Completed)
        }
        Command::Verify { suite, n, t_end } => {
            let mut opts = VerifyOptions::default();
            if let Some(n) = n {
                opts.n = n;
            }
            opts.t_end = t_end;
            if let Some(seed) = seed_from_env()? {
                opts.seed = seed;
            }
            let suite: Suite = suite.into();
            let results = Verifier::new(opts).run_suite(suite);
            println!("suite {} (n = {})", suite.name(), opts.n);
            for r in &results {
                println!("{r}");
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Command::Compare {
            config,
            markers,
            horizon,
            out,
            refine,
        } => {
            let cfg = load(&config)?;
            let s = cmd_compare(&cfg, markers, horizon, &out, refine)?;
            println!("max_hausdorff={:.6e} tolerance={:.6e}", s.max_distance, s.tolerance);
            if let Some(r) = s.refinement_ratio {
                println!("refinement_ratio={r:.4}");
            }
            Ok(s.passed())
        }
        Command::Generate { init, n, out } => {
            let mut init = InitConfig::from_spec(&init)?;
            if let (Some(seed), InitConfig::Random { seed: s, .. }) = (seed_from_env()?, &mut init) {
                *s = seed;
            }
            let s = cmd_generate(&init, n, &out)?;
            println!("L={:.10}", s.length);
            println!("A={:.10}", s.area);
            println!("deficit={:.6e}", s.deficit);
            println!("alpha={:.10}", s.alpha);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
