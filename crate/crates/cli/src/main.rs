//! Batch experiment runner: parses a flat key-value config plus subcommand
//! flags, executes the requested sweep, and writes self-describing CSV
//! (optionally JSON) into the output directory.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numerical or convergence
//! failure, 3 validation failure.

mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;
use fdadm_core::montecarlo::{
    run_ber_sweep, run_memory_sweep, run_secrecy_sweep, Scenario, SweepMetric, SweepResult,
    SweepSpec,
};
use fdadm_core::precoder::AnMethod;
use output::{records_from_sweep, to_csv, to_json, utc_timestamp};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fdadm",
    about = "Frequency-diverse-array directional modulation: security sweeps and validation",
    version
)]
struct Cli {
    /// Configuration file (flat `section.key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override single keys, e.g. --set power.beta1=0.7 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    /// Output directory (FDADM_OUT_DIR overrides the default ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Also write a JSON copy of the records.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BerAxis {
    Snr,
    Range,
    Azimuth,
    Elevation,
}

#[derive(Clone, Copy, ValueEnum)]
enum LambdaAxis {
    #[value(name = "lambda-b")]
    LambdaB,
    #[value(name = "lambda-e")]
    LambdaE,
}

#[derive(Clone, Copy, ValueEnum)]
enum MemoryAxis {
    N,
    L,
}

#[derive(Args)]
struct GridArgs {
    /// Sweep start (units of the swept axis).
    #[arg(long)]
    from: Option<f64>,
    /// Sweep end, inclusive.
    #[arg(long)]
    to: Option<f64>,
    /// Sweep step.
    #[arg(long)]
    step: Option<f64>,
    /// Explicit comma-separated grid; overrides from/to/step.
    #[arg(long)]
    grid: Option<String>,
}

impl GridArgs {
    fn build(&self, default_from: f64, default_to: f64, default_step: f64) -> Result<Vec<f64>, String> {
        if let Some(g) = &self.grid {
            let vals: Result<Vec<f64>, _> = g.split(',').map(|s| s.trim().parse::<f64>()).collect();
            return vals.map_err(|e| format!("bad --grid: {e}"));
        }
        let from = self.from.unwrap_or(default_from);
        let to = self.to.unwrap_or(default_to);
        let step = self.step.unwrap_or(default_step);
        if !(step > 0.0) || to < from {
            return Err(format!("bad sweep range {from}..{to} step {step}"));
        }
        let mut grid = Vec::new();
        let mut v = from;
        let eps = step * 1e-9;
        while v <= to + eps {
            grid.push(v);
            v += step;
        }
        Ok(grid)
    }
}

#[derive(Args)]
struct CommonRunArgs {
    /// Methods to include (comma separated: sp,zf,svd,noan).
    #[arg(long, default_value = "sp,zf,svd,noan")]
    methods: String,
    /// Monte Carlo trials per grid point (overrides mc.trials).
    #[arg(long)]
    trials: Option<usize>,
    /// RNG seed (overrides mc.seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol-level BER sweeps versus SNR or receiver position.
    Ber {
        #[arg(long, value_enum, default_value_t = BerAxis::Snr)]
        sweep: BerAxis,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonRunArgs,
        /// Modulation, e.g. psk4, psk8, qam16 (overrides the config).
        #[arg(long)]
        modulation: Option<String>,
        /// Apply fading draws inside the BER loop (default: no fading).
        #[arg(long)]
        fading: bool,
    },
    /// Average secrecy rate versus an average SNR, with analytic values
    /// and the closed-form lower bound attached.
    SecrecyRate {
        #[arg(long, value_enum, default_value_t = LambdaAxis::LambdaB)]
        sweep: LambdaAxis,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Secrecy outage probability versus an average SNR, with analytic
    /// values and the closed-form upper bound attached.
    Sop {
        #[arg(long, value_enum, default_value_t = LambdaAxis::LambdaB)]
        sweep: LambdaAxis,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonRunArgs,
        /// Target secrecy rate, bits/s/Hz (overrides sop.r0).
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Exact memory totals per method over an N or L grid, plus ratios.
    Memory {
        #[arg(long, value_enum, default_value_t = MemoryAxis::N)]
        sweep: MemoryAxis,
        /// Largest swept N (element count is 2N+1).
        #[arg(long, default_value_t = 25)]
        n_max: u32,
        /// Largest swept L.
        #[arg(long, default_value_t = 25)]
        l_max: u32,
    },
    /// Run the invariant suites; non-zero exit on any failure.
    Validate {
        /// Monte Carlo trials for the statistical suites.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Print the canonical configuration (defaults merged with the file
    /// and --set overrides).
    DumpConfig,
}

fn parse_methods(s: &str) -> Result<Vec<AnMethod>, String> {
    s.split(',')
        .map(|m| AnMethod::parse(m.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    for pair in &cli.sets {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got '{pair}'"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    if let Some(d) = &cli.out_dir {
        return d.clone();
    }
    if let Ok(d) = std::env::var("FDADM_OUT_DIR") {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    PathBuf::from(".")
}

fn write_outputs(
    cli: &Cli,
    cfg: &ExperimentConfig,
    experiment: &str,
    result: &SweepResult,
    seed: u64,
) -> Result<PathBuf, String> {
    let records = records_from_sweep(experiment, result, seed, &cfg.hash());
    let dir = out_dir(cli);
    std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let stem = format!("{experiment}-{}-{}", cfg.hash(), utc_timestamp());
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, to_csv(&records))
        .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
    if cli.json {
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&json_path, to_json(&records))
            .map_err(|e| format!("cannot write {}: {e}", json_path.display()))?;
    }
    Ok(csv_path)
}

fn run_sweep_command(
    cli: &Cli,
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    experiment: &str,
    spec: &SweepSpec,
) -> Result<u8, String> {
    let run = match spec.metric {
        m if m.is_ber() => run_ber_sweep(scenario, spec),
        m if m.is_secrecy() => run_secrecy_sweep(scenario, spec),
        _ => run_memory_sweep(scenario, spec),
    };
    match run {
        Ok(result) => {
            let path = write_outputs(cli, cfg, experiment, &result, spec.seed)?;
            println!(
                "{experiment}: {} grid points x {} methods -> {}",
                spec.grid.len(),
                spec.methods.len(),
                path.display()
            );
            Ok(0)
        }
        Err(e) if validate::is_numerical(&e) => {
            eprintln!("numerical failure: {e}");
            Ok(EXIT_NUMERICAL)
        }
        Err(e) => Err(e.to_string()),
    }
}

fn dispatch(cli: &Cli) -> Result<u8, String> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::DumpConfig => {
            print!("{}", cfg.dump());
            Ok(0)
        }
        Command::Validate { trials } => {
            let scenario = cfg.scenario()?;
            let outcomes = validate::run_all(&scenario, trials.unwrap_or(cfg.trials));
            let mut failed = false;
            for o in &outcomes {
                match &o.result {
                    Ok(msg) => println!("PASS {}: {msg}", o.name),
                    Err(msg) => {
                        failed = true;
                        println!("FAIL {}: {msg}", o.name);
                    }
                }
            }
            Ok(if failed { EXIT_VALIDATION } else { 0 })
        }
        Command::Ber {
            sweep,
            grid,
            common,
            modulation,
            fading,
        } => {
            let mut scenario = cfg.scenario()?;
            scenario.ber_fading = *fading;
            let (metric, g) = match sweep {
                BerAxis::Snr => (SweepMetric::BerVsSnr, grid.build(0.0, 14.0, 2.0)?),
                BerAxis::Range => (SweepMetric::BerVsRange, grid.build(200.0, 12_000.0, 200.0)?),
                BerAxis::Azimuth => {
                    let deg = grid.build(-40.0, 60.0, 2.5)?;
                    (
                        SweepMetric::BerVsAzimuth,
                        deg.into_iter().map(|d| d.to_radians()).collect(),
                    )
                }
                BerAxis::Elevation => {
                    let deg = grid.build(0.0, 90.0, 3.75)?;
                    (
                        SweepMetric::BerVsElevation,
                        deg.into_iter().map(|d| d.to_radians()).collect(),
                    )
                }
            };
            let modn = match modulation {
                Some(s) => fdadm_core::montecarlo::Modulation::parse(s).map_err(|e| e.to_string())?,
                None => cfg.modulation()?,
            };
            let spec = SweepSpec {
                metric,
                grid: g,
                methods: parse_methods(&common.methods)?,
                trials: common.trials.unwrap_or(cfg.trials),
                seed: common.seed.unwrap_or(cfg.seed),
                modulation: modn,
            };
            spec.validate().map_err(|e| e.to_string())?;
            run_sweep_command(cli, &cfg, &scenario, "ber", &spec)
        }
        Command::SecrecyRate { sweep, grid, common } => {
            let scenario = cfg.scenario()?;
            let metric = match sweep {
                LambdaAxis::LambdaB => SweepMetric::SrVsLambdaB,
                LambdaAxis::LambdaE => SweepMetric::SrVsLambdaE,
            };
            let spec = SweepSpec {
                metric,
                grid: grid.build(0.0, 20.0, 5.0)?,
                methods: parse_methods(&common.methods)?,
                trials: common.trials.unwrap_or(cfg.trials),
                seed: common.seed.unwrap_or(cfg.seed),
                modulation: cfg.modulation()?,
            };
            spec.validate().map_err(|e| e.to_string())?;
            run_sweep_command(cli, &cfg, &scenario, "secrecy-rate", &spec)
        }
        Command::Sop {
            sweep,
            grid,
            common,
            r0,
        } => {
            let mut scenario = cfg.scenario()?;
            if let Some(r) = r0 {
                if !(*r >= 0.0) {
                    return Err(format!("--r0 must be >= 0, got {r}"));
                }
                scenario.r0 = *r;
            }
            let metric = match sweep {
                LambdaAxis::LambdaB => SweepMetric::SopVsLambdaB,
                LambdaAxis::LambdaE => SweepMetric::SopVsLambdaE,
            };
            let spec = SweepSpec {
                metric,
                grid: grid.build(0.0, 20.0, 5.0)?,
                methods: parse_methods(&common.methods)?,
                trials: common.trials.unwrap_or(cfg.trials),
                seed: common.seed.unwrap_or(cfg.seed),
                modulation: cfg.modulation()?,
            };
            spec.validate().map_err(|e| e.to_string())?;
            run_sweep_command(cli, &cfg, &scenario, "sop", &spec)
        }
        Command::Memory { sweep, n_max, l_max } => {
            let scenario = cfg.scenario()?;
            let (metric, grid) = match sweep {
                MemoryAxis::N => (
                    SweepMetric::MemoryVsN,
                    (1..=*n_max).map(|n| n as f64).collect::<Vec<_>>(),
                ),
                MemoryAxis::L => (
                    SweepMetric::MemoryVsL,
                    (1..=*l_max).map(|l| l as f64).collect::<Vec<_>>(),
                ),
            };
            let spec = SweepSpec {
                metric,
                grid,
                methods: vec![AnMethod::Sp, AnMethod::Zf, AnMethod::Svd],
                trials: 1,
                seed: cfg.seed,
                modulation: cfg.modulation()?,
            };
            spec.validate().map_err(|e| e.to_string())?;
            run_sweep_command(cli, &cfg, &scenario, "memory", &spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
