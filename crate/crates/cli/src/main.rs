use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use toml::Value;

mod config;
mod error;
mod experiments;
mod output;
mod scan;
mod svg;

use config::ExperimentConfig;
use error::CliError;
use experiments::{run_experiment, Stat};
use output::{Bundle, Flags, Plot, RunManifest, ScanAxisRecord, ScanRecord, Table};

const DEFAULT_OUT: &str = "tcsim-out";

#[derive(Parser)]
#[command(name = "tcsim", version, about = "Simulate periodically driven many-body systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write a result bundle.
    Run(Common),
    /// Run an experiment over a grid of parameter values.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Scan axis, `path=lo:hi:count` or `path=v1,v2,...`. Repeat for a 2D map.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
    /// Validate a configuration and print the effective settings.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; never changes results.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Dotted-path override, e.g. `--set quantum.sites=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, Value)>, CliError> {
        let mut ov = self
            .set
            .iter()
            .map(|s| config::parse_override(s))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).map_err(|_| CliError::field("seed", "too large"))?;
            ov.push(("seed".into(), Value::Integer(seed)));
        }
        Ok(ov)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

fn kind_name(cfg: &ExperimentConfig) -> String {
    serde_json::to_value(cfg.experiment)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn manifest(
    command: &'static str,
    cfg: &ExperimentConfig,
    config_toml: &str,
    workers: usize,
    started: Instant,
    scan: Option<ScanRecord>,
    blow_up: Option<String>,
    files: Vec<output::FileEntry>,
) -> RunManifest {
    RunManifest {
        tool: "tcsim",
        version: env!("CARGO_PKG_VERSION"),
        command,
        experiment: kind_name(cfg),
        name: cfg.name.clone(),
        config_sha256: output::sha256_hex(config_toml.as_bytes()),
        seeds: cfg.seeds(),
        workers,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        scan,
        flags: Flags {
            blow_up: blow_up.is_some(),
            message: blow_up,
        },
        files,
    }
}

fn finish(dir: &Path, m: &RunManifest) -> Result<(), CliError> {
    output::write_manifest(dir, m)?;
    eprintln!("wrote {} files to {}", m.files.len() + 1, dir.display());
    match &m.flags.message {
        Some(msg) => Err(CliError::BlowUp(msg.clone())),
        None => Ok(()),
    }
}

fn cmd_run(args: &Common) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = config::load(&args.config, &args.overrides()?)?;
    let dir = args.out_dir(&cfg);
    let config_toml = cfg.to_toml();
    let outcome = run_experiment(&cfg, args.workers.max(1))?;
    for (k, v) in &outcome.stats {
        println!("{k} = {}", v.to_csv());
    }
    let files = output::write_bundle(&dir, &config_toml, &outcome.bundle)?;
    let blow = outcome.bundle.blow_up.clone();
    finish(&dir, &manifest("run", &cfg, &config_toml, args.workers, started, None, blow, files))
}

fn cmd_scan(args: &Common, axis_specs: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let axes = axis_specs
        .iter()
        .map(|s| scan::parse_axis(s))
        .collect::<Result<Vec<_>, _>>()?;
    let base = args.overrides()?;
    let base_cfg = config::load(&args.config, &base)?;
    let grid = scan::points(&axes);

    // Validate every point before running any of them.
    let mut configs = Vec::with_capacity(grid.len());
    for idx in &grid {
        let mut ov = base.clone();
        for (axis, &j) in axes.iter().zip(idx) {
            ov.push((axis.path.clone(), axis.values[j].clone()));
        }
        configs.push(config::load(&args.config, &ov)?);
    }

    let mut header: Vec<String> = axes.iter().map(|a| a.path.clone()).collect();
    let mut stat_names: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(grid.len());
    let mut first_stat = Vec::with_capacity(grid.len());
    let mut blowups = Vec::new();
    for (idx, cfg) in grid.iter().zip(&configs) {
        let outcome = run_experiment(cfg, args.workers.max(1))?;
        if stat_names.is_empty() {
            stat_names = outcome.stats.iter().map(|(k, _)| k.clone()).collect();
        }
        let mut row: Vec<String> = axes
            .iter()
            .zip(idx)
            .map(|(a, &j)| output::num(scan::value_f64(&a.values[j])))
            .collect();
        row.extend(outcome.stats.iter().map(|(_, v)| v.to_csv()));
        first_stat.push(outcome.stats.first().map_or(f64::NAN, |(_, v)| Stat::as_f64(*v)));
        rows.push(row);
        if let Some(msg) = outcome.bundle.blow_up {
            blowups.push(msg);
        }
    }
    header.extend(stat_names.iter().cloned());
    let table = Table {
        name: "scan".into(),
        header,
        rows,
    };

    let mut bundle = Bundle {
        tables: vec![table],
        ..Default::default()
    };
    let label = stat_names.first().cloned().unwrap_or_default();
    match axes.as_slice() {
        [x] => bundle.plots.push(Plot::Line(svg::LinePlot {
            name: "scan".into(),
            title: format!("{label} along {}", x.path),
            x_label: x.path.clone(),
            y_label: label,
            x: x.numeric(),
            series: vec![(String::new(), first_stat)],
        })),
        [x, y] => bundle.plots.push(Plot::Heat(svg::HeatMap {
            name: "scan".into(),
            title: label,
            x_label: x.path.clone(),
            y_label: y.path.clone(),
            xs: x.numeric(),
            ys: y.numeric(),
            values: first_stat,
        })),
        _ => {}
    }
    let dir = args.out_dir(&base_cfg);
    let config_toml = base_cfg.to_toml();
    let files = output::write_bundle(&dir, &config_toml, &bundle)?;
    let record = ScanRecord {
        axes: axes
            .iter()
            .map(|a| ScanAxisRecord {
                path: a.path.clone(),
                values: a.numeric(),
            })
            .collect(),
        points: grid.len(),
        seeds_per_point: base_cfg.seeds(),
    };
    let blow = (!blowups.is_empty()).then(|| blowups.join("; "));
    finish(
        &dir,
        &manifest("scan", &base_cfg, &config_toml, args.workers, started, Some(record), blow, files),
    )
}

fn cmd_check(args: &Common) -> Result<(), CliError> {
    let cfg = config::load(&args.config, &args.overrides()?)?;
    print!("{}", cfg.to_toml());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Scan { common, axes } => cmd_scan(common, axes),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tcsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
