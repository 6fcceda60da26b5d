use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use indsel::indicators::IndicatorRegistry;
use indsel::regress::{self, RegressorFamily, RegressorModel};

use indsel_cli::config::ExperimentConfig;
use indsel_cli::pipeline::{build_feature_frame, build_partition, PipelineSettings};
use indsel_cli::{experiment, report, synth, CliError};

#[derive(Parser)]
#[command(
    name = "indsel",
    about = "Technical-indicator feature selection and regression experiments on daily OHLCV data",
    version
)]
struct Cli {
    /// Experiment config file (sectioned key = value text).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fast profile: ensembles capped at 50 members, trimmed budgets.
    #[arg(long, global = true)]
    fast: bool,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, impute, and summarize the input CSV.
    Ingest,
    /// Compute the indicator frame and write features.csv.
    Indicators,
    /// Build the windowed supervised dataset and write windowed.csv.
    Window,
    /// Run the selection phase and persist per-run JSON results.
    Select,
    /// Train one regressor on the prediction partition's training split.
    Train {
        /// Regressor family (LR, Ridge, Lasso, DTR, KNN, MLP, SVR, ADA, GBR, RFR).
        #[arg(long)]
        family: String,
    },
    /// Evaluate a trained model on the prediction partition's test split.
    Evaluate {
        #[arg(long)]
        family: String,
        /// Model artifact path (default: <out>/models/<family>.bin).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Full two-phase experiment: selection, prediction, reports, plots.
    RunExperiment,
    /// Rebuild prediction reports and plots from persisted selections.
    Report,
    /// Write a synthetic OHLCV CSV for demos and tests.
    Synth {
        /// Number of daily bars.
        #[arg(long, default_value_t = 300)]
        days: usize,
        /// Output CSV path.
        #[arg(long, default_value = "synthetic.csv")]
        file: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<(ExperimentConfig, String), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| std::path::Path::new("."));
    let mut config = ExperimentConfig::parse(&text, base)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.fast {
        config.fast = true;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok((config, text))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth { days, file } => {
            let seed = cli.seed.unwrap_or(1);
            let series = synth::synthetic_ohlcv(*days, seed);
            if let Some(parent) = file.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let f = std::fs::File::create(file)?;
            series.write_csv(f)?;
            println!("wrote {} bars to {}", days, file.display());
            Ok(())
        }
        Command::Ingest => {
            let (config, _) = load_config(&cli)?;
            let series = indsel_cli::load_input(&config)?;
            let imputed = series.impute_missing()?;
            let missing: usize = [
                &series.open,
                &series.high,
                &series.low,
                &series.close,
                &series.adj_close,
                &series.volume,
            ]
            .iter()
            .map(|col| col.iter().filter(|v| v.is_nan()).count())
            .sum();
            let out = config.out_dir.join("ingested.csv");
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            imputed.write_csv(std::fs::File::create(&out)?)?;
            println!(
                "{} rows, {} .. {}, {missing} missing cells imputed -> {}",
                series.len(),
                series.dates[0],
                series.dates[series.len() - 1],
                out.display()
            );
            Ok(())
        }
        Command::Indicators => {
            let (config, _) = load_config(&cli)?;
            let series = indsel_cli::load_input(&config)?;
            let registry = IndicatorRegistry::with_defaults();
            let (frame, _) = build_feature_frame(&series, None, &registry, &config.roster)?;
            let out = config.out_dir.join("features.csv");
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            frame.write_csv(std::fs::File::create(&out)?)?;
            println!(
                "{} indicator columns x {} rows -> {}",
                frame.width(),
                frame.len(),
                out.display()
            );
            Ok(())
        }
        Command::Window => {
            let (config, _) = load_config(&cli)?;
            let series = indsel_cli::load_input(&config)?;
            let registry = IndicatorRegistry::with_defaults();
            let settings = PipelineSettings::from_config(&config)?;
            let part = build_partition(&series, None, &registry, &settings)?;
            let out = config.out_dir.join("windowed.csv");
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            part.dataset.write_csv(std::fs::File::create(&out)?)?;
            println!(
                "{} samples x {} features (train split {}) -> {}",
                part.dataset.rows(),
                part.dataset.cols(),
                part.train_rows,
                out.display()
            );
            Ok(())
        }
        Command::Select => {
            let (config, _) = load_config(&cli)?;
            let series = indsel_cli::load_input(&config)?;
            let registry = IndicatorRegistry::with_defaults();
            let results = experiment::run_selection_phase(&config, &series, &registry)?;
            report::write_selection_results(&config.out_dir.join("selection"), &results)?;
            for r in &results {
                println!(
                    "{} {} {}: best {:?} (score {:.6}, {} fits)",
                    r.method, r.regressor.family, r.metric, r.best_subset, r.best_score, r.fit_count
                );
            }
            Ok(())
        }
        Command::Train { family } => {
            let (config, _) = load_config(&cli)?;
            let family = RegressorFamily::parse(family)?;
            let series = indsel_cli::load_input(&config)?;
            let registry = IndicatorRegistry::with_defaults();
            let settings = PipelineSettings::from_config(&config)?;
            let part = build_partition(
                &series,
                config.prediction_range.as_ref(),
                &registry,
                &settings,
            )?;
            let train = part.train()?;
            let model = regress::fit(&config.regressor_config(family), &train.x, &train.y)?;
            let path = config.out_dir.join("models").join(format!("{family}.bin"));
            std::fs::create_dir_all(path.parent().unwrap())?;
            model.save(std::fs::File::create(&path)?)?;
            println!(
                "trained {family} on {} samples ({} iterations, converged: {}) -> {}",
                train.rows(),
                model.meta.iterations,
                model.meta.converged,
                path.display()
            );
            Ok(())
        }
        Command::Evaluate { family, model } => {
            let (config, _) = load_config(&cli)?;
            let family = RegressorFamily::parse(family)?;
            let path = model
                .clone()
                .unwrap_or_else(|| config.out_dir.join("models").join(format!("{family}.bin")));
            let loaded = RegressorModel::load(std::fs::File::open(&path)?)?;
            let series = indsel_cli::load_input(&config)?;
            let registry = IndicatorRegistry::with_defaults();
            let settings = PipelineSettings::from_config(&config)?;
            let part = build_partition(
                &series,
                config.prediction_range.as_ref(),
                &registry,
                &settings,
            )?;
            let test = part.test()?;
            let pred = loaded.predict(&test.x)?;
            let report = indsel::evaluate::metrics(&test.y, &pred)?;
            println!(
                "{family} on {} test samples: r2 {:.6}  mse {:.6e}  rmse {:.6e}  mae {:.6e}  mape {}",
                test.rows(),
                report.r2,
                report.mse,
                report.rmse,
                report.mae,
                report
                    .mape
                    .map(|v| format!("{v:.4}%"))
                    .unwrap_or_else(|| "undefined".into()),
            );
            Ok(())
        }
        Command::RunExperiment => {
            let (config, text) = load_config(&cli)?;
            let summary = indsel_cli::run_experiment(&config, &text)?;
            println!(
                "{} selection runs, {} model reports -> {}",
                summary.selections.len(),
                summary.reports.len(),
                config.out_dir.display()
            );
            if let Some((name, pct)) = summary.census.first() {
                println!("top indicator: {name} ({pct:.1}% of best subsets)");
            }
            Ok(())
        }
        Command::Report => {
            let (config, text) = load_config(&cli)?;
            let summary = indsel_cli::rebuild_reports(&config, &text)?;
            println!(
                "rebuilt {} model reports -> {}",
                summary.reports.len(),
                config.out_dir.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
