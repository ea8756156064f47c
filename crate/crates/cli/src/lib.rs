//! Command-line front end for `spectral-mce`.
//!
//! Every subcommand reads a JSON experiment config (see [`config`]), applies
//! `--set key=value` overrides, and writes its artifacts plus a
//! `manifest.json` into `--out`. Exit codes: 0 success, 1 invalid input,
//! 2 numerical failure.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use spectral_mce::asymptotics::{continuous_predictions, discrete_predictions};
use spectral_mce::estimators::estimate;
use spectral_mce::harness::ExperimentConfig;
use spectral_mce::paths::BINARY_MAGIC;
use spectral_mce::sampler::{NonstationarySampler, StationarySampler};
use spectral_mce::{
    reference_rates, run_experiment, CoordinatePaths, EstimateResult, ReferenceEstimator, RngPolicy, SamplingScheme,
};

pub use config::{apply_override, config_to_json, parse_config};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config error at `{pointer}`: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Core(#[from] spectral_mce::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spectral-mce", version, about = "Weighted minimum-contrast estimation for fractional spectral models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one replication of the coordinate paths.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Replication index whose substream is used.
        #[arg(long, default_value_t = 0)]
        replication: u64,
    },
    /// Run the configured estimators on an exported path file.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Path file written by `simulate` (CSV or binary).
        #[arg(long)]
        paths: PathBuf,
    },
    /// Monte Carlo experiment: summary, raw draws and fitted rates.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Theoretical rate predictions over the N grid.
    Rates {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Weighted vs unweighted vs reference rates, with empirical slopes.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Dotted-path override, e.g. `model.hurst=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads; 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Files written by one successful invocation, in manifest order.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<RunReport, CliError> {
    let (name, common) = match &cli.command {
        Command::Simulate { common, .. } => ("simulate", common),
        Command::Estimate { common, .. } => ("estimate", common),
        Command::Experiment { common } => ("experiment", common),
        Command::Rates { common } => ("rates", common),
        Command::Compare { common } => ("compare", common),
    };
    let text = fs::read(&common.config).map_err(|source| CliError::Io {
        path: common.config.clone(),
        source,
    })?;
    let cfg = parse_config(&text, &common.overrides)?;

    let mut outputs = Outputs::default();
    let mut extra = serde_json::Map::new();
    match &cli.command {
        Command::Simulate { replication, .. } => {
            let paths = simulate(&cfg, *replication)?;
            outputs.csv("paths.csv", |w| paths.write_csv(w))?;
            outputs.add("paths.bin", {
                let mut buf = Vec::new();
                paths.write_binary(&mut buf)?;
                buf
            });
            extra.insert("replication".into(), json!(replication));
        }
        Command::Estimate { paths, .. } => {
            let results = estimate_file(&cfg, paths)?;
            let docs: Vec<_> = results.iter().map(EstimateResult::to_json).collect();
            outputs.json("estimates.json", &json!(docs))?;
            outputs.csv("estimates.csv", |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(EstimateResult::CSV_HEADER)?;
                for r in &results {
                    w.write_record(r.csv_record())?;
                }
                w.flush()?;
                Ok(())
            })?;
            extra.insert("paths".into(), json!(paths.display().to_string()));
        }
        Command::Experiment { .. } => {
            let s = run_experiment(&cfg, common.threads)?;
            outputs.csv("summary.csv", |w| s.write_summary_csv(w))?;
            outputs.csv("samples.csv", |w| s.write_samples_csv(w))?;
            outputs.csv("rates.csv", |w| s.write_rates_csv(w))?;
            if common.format == Format::Json {
                outputs.json("summary.json", &json!({ "rows": s.rows, "rate_slopes": s.rate_slopes }))?;
            }
        }
        Command::Rates { .. } => {
            let preds = predictions(&cfg)?;
            outputs.csv("rates.csv", |w| {
                let mut w = w;
                for (i, p) in preds.iter().enumerate() {
                    p.write_csv(&mut w, i == 0)?;
                }
                Ok(())
            })?;
            if common.format == Format::Json {
                outputs.json("rates.json", &serde_json::to_value(&preds).map_err(spectral_mce::Error::from)?)?;
            }
        }
        Command::Compare { .. } => {
            let s = run_experiment(&cfg, common.threads)?;
            outputs.csv("comparison.csv", |w| s.write_comparison_csv(w))?;
            outputs.csv("slopes.csv", |w| s.write_rates_csv(w))?;
            if common.format == Format::Json {
                outputs.json(
                    "comparison.json",
                    &json!({ "comparison": s.comparison, "rate_slopes": s.rate_slopes }),
                )?;
            }
        }
    }
    outputs.commit(&common.out, name, &cfg, extra)
}

fn simulate(cfg: &ExperimentConfig, replication: u64) -> Result<CoordinatePaths, CliError> {
    if replication >= cfg.replications as u64 {
        return Err(CliError::Usage(format!(
            "replication {replication} is outside the configured {} replications",
            cfg.replications
        )));
    }
    let model = Arc::new(cfg.model.clone());
    let grid = cfg.scheme.grid();
    let st = StationarySampler::new(model, &grid, cfg.sampler, cfg.max_n())?;
    let rng = RngPolicy::new(cfg.master_seed).replication(replication);
    Ok(if cfg.init.is_stationary() {
        st.sample(&rng)
    } else {
        NonstationarySampler::new(st, cfg.init.clone())?.sample(&rng)
    })
}

fn estimate_file(cfg: &ExperimentConfig, path: &Path) -> Result<Vec<EstimateResult>, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model = Arc::new(cfg.model.clone());
    let paths = if bytes.starts_with(BINARY_MAGIC) {
        CoordinatePaths::read_binary(bytes.as_slice(), model.clone())?
    } else {
        CoordinatePaths::read_csv(bytes.as_slice(), model.clone(), cfg.init.is_stationary())?
    };
    if paths.n_coords() < cfg.max_n() {
        return Err(CliError::Usage(format!(
            "path file holds {} coordinates but N_grid needs {}",
            paths.n_coords(),
            cfg.max_n()
        )));
    }
    let mut out = Vec::new();
    for &kind in &cfg.estimators {
        for &n in &cfg.n_grid {
            out.push(estimate(kind, &paths, &model, n, &cfg.scheme, cfg.eq34_normalizer)?);
        }
    }
    Ok(out)
}

fn predictions(cfg: &ExperimentConfig) -> Result<Vec<spectral_mce::RatePrediction>, CliError> {
    let m = &cfg.model;
    let mut preds = match cfg.scheme {
        SamplingScheme::Discrete { n } => discrete_predictions(m, n, &cfg.n_grid)?,
        SamplingScheme::Continuous { horizon, .. } => continuous_predictions(m, horizon, &cfg.n_grid)?,
    };
    preds.extend(reference_rates(m, &cfg.n_grid, ReferenceEstimator::Mle)?);
    if m.dimension_hint().is_some() {
        preds.extend(reference_rates(m, &cfg.n_grid, ReferenceEstimator::Tfe)?);
    }
    Ok(preds)
}

#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> spectral_mce::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut buf = serde_json::to_vec_pretty(value).map_err(spectral_mce::Error::from)?;
        buf.push(b'\n');
        self.add(name, buf);
        Ok(())
    }

    /// Writes every file and the manifest; on any failure removes what was
    /// written.
    fn commit(
        self,
        dir: &Path,
        subcommand: &str,
        cfg: &ExperimentConfig,
        extra: serde_json::Map<String, serde_json::Value>,
    ) -> Result<RunReport, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| {
            let mut listed = Vec::new();
            for (name, bytes) in &self.files {
                let path = dir.join(name);
                written.push(path.clone());
                fs::write(&path, bytes).map_err(io(&path))?;
                listed.push(json!({ "file": name, "bytes": bytes.len(), "sha256": sha256_hex(bytes) }));
            }
            let mut manifest = json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "subcommand": subcommand,
                "master_seed": cfg.master_seed,
                "config": config_to_json(cfg),
                "outputs": listed,
            });
            manifest.as_object_mut().unwrap().extend(extra);
            let path = dir.join("manifest.json");
            written.push(path.clone());
            let mut text = serde_json::to_vec_pretty(&manifest).map_err(spectral_mce::Error::from)?;
            text.push(b'\n');
            fs::write(&path, text).map_err(io(&path))?;
            Ok(())
        })();
        match result {
            Ok(()) => Ok(RunReport {
                out_dir: dir.to_path_buf(),
                files: self.files.into_iter().map(|f| f.0).collect(),
            }),
            Err(e) => {
                for p in written {
                    let _ = fs::remove_file(p);
                }
                Err(e)
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
