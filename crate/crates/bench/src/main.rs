use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use riemgrad_bench::config::{Experiment, ExperimentSpec, SpecOverrides, StrategyName};
use riemgrad_bench::output::{summary_table, write_outputs};
use riemgrad_bench::run_experiment;

/// Run Riemannian gradient descent experiments and write the results as CSV.
#[derive(Debug, Parser)]
#[command(name = "riemgrad", version)]
struct Cli {
    /// Experiment to run; may instead come from --config.
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// TOML file with any of the settings below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Starting points per instance.
    #[arg(long)]
    runs: Option<usize>,
    /// Number of random instances.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Repeat to run several strategies.
    #[arg(long = "strategy", value_enum)]
    strategies: Vec<StrategyName>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    l0: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Fraction of the distance to the boundary tried first by the Euclidean baseline.
    #[arg(long)]
    boundary_fraction: Option<f64>,
    #[arg(long)]
    lipschitz_const: Option<f64>,
    /// Karcher: Strategy 1 with the radius-based stepsize 1.99·t̄.
    #[arg(long)]
    afsari: bool,
    #[arg(long)]
    kappa_hat: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    eig_lo: Option<f64>,
    #[arg(long)]
    eig_hi: Option<f64>,
    /// Upper end of the orthant starting box.
    #[arg(long)]
    box_hi: Option<f64>,
    /// Record trajectories and write bound-check traces.
    #[arg(long)]
    traces: bool,
    /// Write a performance profile over nfev.
    #[arg(long)]
    profile: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-instance parameters for problem1/problem2.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> SpecOverrides {
        SpecOverrides {
            experiment: self.experiment,
            n: self.n,
            m: self.m,
            runs: self.runs,
            instances: self.instances,
            seed: self.seed,
            strategies: (!self.strategies.is_empty()).then(|| self.strategies.clone()),
            beta: self.beta,
            l0: self.l0,
            eta: self.eta,
            boundary_fraction: self.boundary_fraction,
            lipschitz_const: self.lipschitz_const,
            afsari: self.afsari.then_some(true),
            kappa_hat: self.kappa_hat,
            tol: self.tol,
            max_iter: self.max_iter,
            eig_lo: self.eig_lo,
            eig_hi: self.eig_hi,
            box_hi: self.box_hi,
            traces: self.traces.then_some(true),
            profile: self.profile.then_some(true),
            out: self.out.clone(),
            params: self.params.clone(),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut layers = Vec::new();
    if let Some(path) = &cli.config {
        layers.push(SpecOverrides::load(path)?);
    }
    layers.push(cli.overrides());
    let spec = ExperimentSpec::resolve(&layers)?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("thread pool")?;
    }
    let out = run_experiment(&spec)?;
    write_outputs(&out, &spec.out)?;
    print!("{}", summary_table(&out));
    println!("wrote {}", spec.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
