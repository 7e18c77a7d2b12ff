//! Command-line front end for the operator-growth pipeline.
//!
//! `run` executes a single TOML-described experiment, `sweep` fans a base
//! config across one scalar axis, `preset` reproduces a named bundle of
//! runs, and `oracle-check` cross-validates the reduced chain dynamics
//! against direct integration of the full superoperator (guarded to small
//! problems).

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use klind_core::dynamics::{
    default_time_grid, direct_evolution_oracle, evolve, IntegratorControls, ORACLE_MAX_DIM,
};
use klind_core::experiment::{
    build_system, run, run_preset, sweep, ExperimentConfig,
};
use klind_core::krylov_iter::{bilanczos, effective_tridiagonal, IterationOptions, PROPERTY_TOL};

#[derive(Parser)]
#[command(name = "klind", version, about = "Operator growth in dissipative spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory (default: ./out)
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Maximum concurrent runs
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Keep the Krylov bases in memory (enables bi-orthogonality and
    /// leakage diagnostics; memory-heavy for large runs)
    #[arg(long)]
    store_bases: bool,
    /// Disable full reorthogonalization (faster, numerically fragile)
    #[arg(long)]
    no_reorth: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single experiment from a TOML config
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a base config once per value of one scalar axis
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis to vary: alpha, gamma, g, h, epsilon, t_max
        #[arg(long)]
        axis: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a named bundle: fig1-closed-tfim, table1, fig3-open-saturation,
    /// xxz-sector, finite-size
    Preset {
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compare chain dynamics against direct evolution of the full
    /// superoperator (dimension-guarded)
    OracleCheck {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_config(path: &PathBuf, common: &CommonOpts) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if common.store_bases {
        cfg.iteration.store_bases = true;
    }
    if common.no_reorth {
        cfg.iteration.reorth = false;
    }
    Ok(cfg)
}

fn oracle_check(cfg: &ExperimentConfig) -> Result<()> {
    let system = build_system(cfg)?;
    let dim = system.generator.dim();
    if dim > ORACLE_MAX_DIM {
        bail!(
            "superoperator dimension {dim} exceeds the oracle guard of {ORACLE_MAX_DIM}; \
             use a smaller system"
        );
    }
    let opts = IterationOptions {
        max_steps: cfg.iteration.max_steps,
        breakdown_tol: cfg.iteration.breakdown_tol,
        reorth: cfg.iteration.reorth,
        store_bases: true,
        ..IterationOptions::default()
    };
    let (tri, bases) = bilanczos(&system.generator, &system.seed, &opts)?;
    let bases = bases.expect("bases requested");
    let eff = effective_tridiagonal(&tri, PROPERTY_TOL)?;

    let grid = default_time_grid(cfg.integration.t_max, cfg.integration.grid_points);
    let controls = IntegratorControls {
        rtol: cfg.integration.rtol,
        atol: cfg.integration.atol,
        ..IntegratorControls::default()
    };
    let chain = evolve(&eff, &grid, &controls)?;
    let direct = direct_evolution_oracle(&system.generator, &system.seed, &bases, &grid, &controls)?;

    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
    };
    let dp = sup(&chain.p, &direct.p);
    let dko = sup(&chain.k_o, &direct.k_o);
    println!("superoperator dimension: {dim}");
    println!("krylov dimension:        {}", tri.krylov_dim);
    println!("sup-norm deviation, P:   {dp:.3e}");
    println!("sup-norm deviation, K_o: {dko:.3e}");
    let tol = 1e-6;
    if dp <= tol && dko <= tol {
        println!("oracle check: PASS (tolerance {tol:.0e})");
        Ok(())
    } else {
        bail!("oracle check: FAIL (tolerance {tol:.0e})");
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, common } => {
            let cfg = load_config(&config, &common)?;
            let summary = run(&cfg, &common.out)?;
            println!(
                "run complete: K = {}, termination = {}, artifacts in {}",
                summary.krylov_dim,
                summary.termination,
                common.out.display()
            );
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            common,
        } => {
            let cfg = load_config(&config, &common)?;
            if values.is_empty() {
                bail!("--values must list at least one number");
            }
            let summaries = sweep(&cfg, &axis, &values, common.workers, &common.out)?;
            for (v, s) in values.iter().zip(&summaries) {
                println!("{axis} = {v}: K = {}, termination = {}", s.krylov_dim, s.termination);
            }
            println!("consolidated table: {}", common.out.join("sweep.csv").display());
            Ok(())
        }
        Command::Preset { name, common } => {
            let summaries = run_preset(&name, &common.out, common.workers)?;
            println!(
                "preset {name}: {} runs complete, summary in {}",
                summaries.len(),
                common.out.join("summary.csv").display()
            );
            Ok(())
        }
        Command::OracleCheck { config, common } => {
            let cfg = load_config(&config, &common)?;
            oracle_check(&cfg)
        }
    }
}
