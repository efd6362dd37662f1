use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dimer_nm::harness::{self, Experiment, RunConfig};
use dimer_nm::{Error, Result};

/// Dephased dimer: time traces, steady states and non-Markovianity sweeps.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// evolve, steady, nmm, sweep, eq8check or convergence
    experiment: String,
    /// Configuration file (`key = value` lines)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration: fig1, fig2, fig3 or eq8
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV path ("-" for stdout)
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated f values, replacing the configured grid
    #[arg(long)]
    f: Option<String>,
    /// Fock cutoff per mode
    #[arg(long)]
    fock: Option<usize>,
    /// Integration step
    #[arg(long)]
    dt: Option<f64>,
    /// Final time
    #[arg(long)]
    tmax: Option<f64>,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::parse(
            &std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        )?,
        (None, Some(name)) => RunConfig::parse(
            harness::preset(name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?,
        )?,
        (None, None) => RunConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        log::info!(
            "running '{}' with a configuration written for '{}'",
            experiment.name(),
            cfg.experiment.name()
        );
        cfg.experiment = experiment;
    }
    if let Some(out) = &cli.out {
        cfg.set_key("output", out)?;
    }
    if let Some(f) = &cli.f {
        cfg.set_key("f_list", f)?;
    }
    if let Some(n) = cli.fock {
        cfg.set_key("n_fock", &n.to_string())?;
    }
    if let Some(dt) = cli.dt {
        cfg.set_key("dt", &dt.to_string())?;
    }
    if let Some(t) = cli.tmax {
        cfg.set_key("t_end", &t.to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        let out = harness::run(&cfg)?;
        harness::emit(&out.table, &cfg, &out.details)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
