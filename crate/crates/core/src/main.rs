use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hcn_sim::channel::Fading;
use hcn_sim::output::create_metrics_file;
use hcn_sim::{emit_plot_data, oracle, run_sweep_with, ConfigError, RunConfig, SchemeKind, SimError, Simulator};

/// Monte Carlo simulator for green heterogeneous cellular networks.
#[derive(Parser)]
#[command(name = "hcn-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep and write metrics.csv, config.echo.toml and plot data.
    Run(RunArgs),
    /// Check a config file without running anything.
    Validate(ConfigArgs),
    /// Check association and SIR against brute-force oracles.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; defaults apply when omitted.
    #[arg(value_name = "CONFIG")]
    path: Option<PathBuf>,
    /// Same as the positional CONFIG.
    #[arg(long = "config", value_name = "CONFIG", conflicts_with = "path")]
    flag: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, ConfigError> {
        match self.path.as_ref().or(self.flag.as_ref()) {
            Some(p) => RunConfig::load(p),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Samples per (scheme, density, lambda_e) cell.
    #[arg(long)]
    samples: Option<i64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<i64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, env = "HCN_SIM_THREADS")]
    threads: Option<usize>,
    /// Restrict the sweep to these schemes (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<SchemeKind>,
    /// Use unit channel gains instead of Rayleigh fading.
    #[arg(long)]
    deterministic_fading: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Random instances per check.
    #[arg(long, default_value_t = 500)]
    cases: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Exit status for configuration problems.
const EXIT_CONFIG: u8 = 2;

fn config_failure(err: &ConfigError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(EXIT_CONFIG)
}

fn run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = match args.config.load() {
        Ok(c) => c,
        Err(e) => return Ok(config_failure(&e)),
    };
    if let Some(n) = args.samples {
        cfg.sweep.n_samples = n;
    }
    if let Some(s) = args.seed {
        cfg.sweep.master_seed = s;
    }
    if let Some(out) = &args.out {
        cfg.output.directory = out.clone();
    }
    if !args.scheme.is_empty() {
        cfg.sweep.schemes = args.scheme.iter().map(|s| s.label().to_string()).collect();
    }
    if args.deterministic_fading {
        cfg.channel.fading = Fading::Deterministic;
    }
    let valid = match cfg.validate() {
        Ok(v) => v,
        Err(e) => return Ok(config_failure(&e)),
    };
    let mut sweep = valid.sweep.clone();
    sweep.threads = args.threads;

    let dir = valid.output.directory.clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.echo.toml"), cfg.to_toml()).context("writing config echo")?;

    let sim = Simulator::new(valid.sim.clone())?;
    let metrics_path = dir.join("metrics.csv");
    let mut writer = create_metrics_file(&metrics_path).with_context(|| format!("creating {}", metrics_path.display()))?;
    let total = sweep.schemes.len() * sweep.densities.len() * sweep.lambda_e.len();
    let mut done = 0;
    let rows = run_sweep_with(&sim, &sweep, |row| {
        writer.write_row(row)?;
        done += 1;
        eprintln!(
            "[{done}/{total}] {} lambda_e={} density={}: grid {:.1} W, rate {:.4e} bit/s",
            row.scheme, row.lambda_e, row.density, row.grid_power.mean, row.sum_rate.mean
        );
        Ok::<(), SimError>(())
    })?;
    drop(writer);

    if valid.output.plot_data {
        emit_plot_data(&rows, &dir)?;
    }
    let unconverged: f64 = rows.iter().map(|r| r.unconverged_fraction).sum::<f64>() / rows.len() as f64;
    println!("wrote {} rows to {}", rows.len(), metrics_path.display());
    if unconverged > 0.0 {
        println!("mean unconverged fraction {unconverged:.4}");
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: &ConfigArgs) -> ExitCode {
    let checked = args.load().and_then(|c| c.validate());
    match checked {
        Ok(v) => {
            let l = &v.sim.layout;
            println!(
                "ok: {} small cells ({} CSBS, {} RSBS, {} HSBS), {} cells x {} samples",
                l.n_csbs + l.n_rsbs + l.n_hsbs,
                l.n_csbs,
                l.n_rsbs,
                l.n_hsbs,
                v.sweep.schemes.len() * v.sweep.densities.len() * v.sweep.lambda_e.len(),
                v.sweep.n_samples
            );
            ExitCode::SUCCESS
        }
        Err(e) => config_failure(&e),
    }
}

fn run_oracle(args: &OracleArgs) -> ExitCode {
    let mut ok = true;
    for report in oracle::run_suite(args.cases, args.seed) {
        let status = if report.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} ({} cases, {} mismatches)", report.name, report.cases, report.mismatches.len());
        for m in report.mismatches.iter().take(5) {
            println!("    {m}");
        }
        ok &= report.passed();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => match run(args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::Validate(args) => validate(args),
        Command::Oracle(args) => run_oracle(args),
    }
}
