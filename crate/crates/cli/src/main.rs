use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emgmm::formats::{dataset_to_string, read_dataset, write_dataset};
use emgmm::harness::{figure_data, run_trial};
use emgmm::{
    export_figure_data, fit, generate, initialize, run_experiment, Error, ExperimentConfig, InitKind,
    InitStrategy, ScenarioRef,
};
use serde_json::json;

const EXIT_CONFIG: u8 = 1;
const EXIT_TRIAL_FAILURES: u8 = 2;

#[derive(Parser)]
#[command(name = "emgmm", version, about = "EM for Gaussian mixtures with random, K-means and K-medoids starts")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed (data seed for trial i is seed + i)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (or file, for generate and export-fig)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Built-in scenario name
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Random, KMeans or KMedoids; repeat or comma-separate for several
    #[arg(long, global = true, value_delimiter = ',')]
    strategy: Vec<String>,
    #[arg(long, global = true)]
    param_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    mean_tol_frac: Option<f64>,
    #[arg(long, global = true)]
    accuracy_min: Option<f64>,
    #[arg(long, global = true)]
    points_per_cluster: Option<usize>,
    /// Worker threads for experiment trials
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labeled dataset from a scenario
    Generate,
    /// Fit a mixture to a dataset file
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Number of components (defaults to K from the file header)
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run repeated trials and write the report
    Experiment,
    /// Re-run one trial and write its figure data
    ExportFig {
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

impl Global {
    fn experiment_config(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(ScenarioRef::Named("4c2d".into())),
        };
        if let Some(name) = &self.scenario {
            config.scenario = ScenarioRef::Named(name.clone());
        }
        if !self.strategy.is_empty() {
            config.strategies = self
                .strategy
                .iter()
                .map(|s| s.parse::<InitKind>())
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = self.seed {
            config.base_seed = v;
        }
        if let Some(v) = self.trials {
            config.trials = v;
        }
        if let Some(v) = self.param_tol {
            config.fit.param_tol = v;
        }
        if let Some(v) = self.max_iters {
            config.fit.max_iters = v;
        }
        if let Some(v) = self.mean_tol_frac {
            config.criteria.mean_tol_frac = v;
        }
        if let Some(v) = self.accuracy_min {
            config.criteria.accuracy_min = v;
        }
        if let Some(v) = self.points_per_cluster {
            config.points_per_cluster = Some(v);
        }
        if let Some(v) = self.workers {
            config.workers = v;
        }
        if let Some(dir) = &self.out {
            config.output_dir = Some(dir.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn single_strategy(config: &ExperimentConfig) -> Result<InitKind, Error> {
    match config.strategies.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::InvalidConfig("exactly one --strategy is required here".into())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let config = cli.global.experiment_config()?;
    match cli.command {
        Command::Generate => {
            let scenario = config.resolve_scenario()?;
            let data = generate(&scenario, config.base_seed)?;
            match cli.global.out.as_deref() {
                Some(path) => write_dataset(path, &data, scenario.k())?,
                None => print!("{}", dataset_to_string(&data, scenario.k())),
            }
        }
        Command::Fit { data, k } => {
            let (dataset, header_k) = read_dataset(&data)?;
            let k = k.or((header_k > 0).then_some(header_k)).ok_or_else(|| {
                Error::InvalidConfig("dataset is unlabeled; pass --k".into())
            })?;
            let strategy = single_strategy(&config)?;
            let init = initialize(&dataset, k, &InitStrategy::new(strategy, config.base_seed))?;
            let result = fit(&dataset, &init.params, &config.fit)?;
            let model = json!({
                "strategy": strategy,
                "seed": config.base_seed,
                "k": k,
                "initial": init.params.to_records(),
                "components": result.params.to_records(),
                "hard_assignments": result.responsibilities.hard_assignments(),
                "trace": result.trace,
            });
            let text = serde_json::to_string_pretty(&model).expect("model serializes") + "\n";
            match cli.global.out.as_deref() {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("model.json"), text)?;
                }
                None => print!("{text}"),
            }
            eprintln!(
                "{strategy}: {} iterations, converged={}, log-likelihood {:.6}",
                result.trace.iterations,
                result.trace.converged,
                result.trace.final_log_likelihood()
            );
        }
        Command::Experiment => {
            let report = run_experiment(&config)?;
            print!("{}", report.to_table());
            if report.has_failures() {
                for f in &report.failures {
                    eprintln!("trial {} ({}) failed: {}", f.trial_index, f.strategy, f.error);
                }
                return Ok(ExitCode::from(EXIT_TRIAL_FAILURES));
            }
        }
        Command::ExportFig { trial } => {
            let scenario = config.resolve_scenario()?;
            let strategy = single_strategy(&config)?;
            let record = run_trial(&scenario, strategy, &config.fit, &config.criteria, config.base_seed, trial);
            if let Some(e) = &record.error {
                eprintln!("trial {trial} failed: {e}");
                return Ok(ExitCode::from(EXIT_TRIAL_FAILURES));
            }
            match cli.global.out.as_deref() {
                Some(path) => export_figure_data(&record, path)?,
                None => print!("{}", figure_data(&record)?.to_text()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
