//! Repeated-trial experiments comparing EM initializations.
//!
//! A case is one (scenario, strategy) pair. Trial `i` of every case draws its
//! data from seed `base_seed + i`, so all strategies see the same datasets,
//! and seeds its initializer with `base_seed + i + 2^32`. Trials run on a
//! rayon pool; results are collected in trial order, so the report does not
//! depend on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em::{fit, FitConfig, FitTrace, MONOTONICITY_SLACK};
use crate::error::{Error, Result};
use crate::evaluation::{judge, judge_model, MatchReport, WellCriteria};
use crate::formats::FigureData;
use crate::init::{initialize, InitKind, InitStrategy};
use crate::model::Dataset;
use crate::synthetic::{generate, Scenario, ScenarioSpec, RNG_DESCRIPTION};

pub const DEFAULT_TRIALS: usize = 50;
/// Offset separating initializer seeds from data seeds.
pub const INIT_SEED_OFFSET: u64 = 1 << 32;

/// Column headers of the per-case table.
pub const TABLE_COLUMNS: [&str; 4] = ["none well", "K-means well /N_K", "EM well /N_E", "N_K/N_E"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Named(String),
    Inline(ScenarioSpec),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<Scenario> {
        match self {
            ScenarioRef::Named(name) => Scenario::builtin(name),
            ScenarioRef::Inline(spec) => Scenario::from_spec(spec),
        }
    }
}

fn default_strategies() -> Vec<InitKind> {
    InitKind::ALL.to_vec()
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioRef,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<InitKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Overrides the scenario's own points per cluster.
    #[serde(default)]
    pub points_per_cluster: Option<usize>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub criteria: WellCriteria,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioRef) -> Self {
        Self {
            scenario,
            strategies: default_strategies(),
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            points_per_cluster: None,
            fit: FitConfig::default(),
            criteria: WellCriteria::default(),
            output_dir: None,
            workers: default_workers(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("strategies must be non-empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        self.fit.validate()?;
        self.criteria.validate()
    }

    pub fn resolve_scenario(&self) -> Result<Scenario> {
        let scenario = self.scenario.resolve()?;
        match self.points_per_cluster {
            Some(ppc) => scenario.with_points_per_cluster(ppc),
            None => Ok(scenario),
        }
    }
}

/// Data and means kept in memory so a trial can be plotted afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialArtifacts {
    pub data: Dataset,
    pub true_means: Array2<f64>,
    pub initial_means: Array2<f64>,
    pub fitted_means: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub data_seed: u64,
    pub init_seed: u64,
    pub strategy: InitKind,
    /// Verdict on the hard clustering; `None` for random initialization.
    pub initializer_well: Option<bool>,
    pub em_well: Option<bool>,
    pub em_iterations: Option<usize>,
    pub em_converged: Option<bool>,
    pub final_log_likelihood: Option<f64>,
    pub monotonicity_violations: Option<usize>,
    pub em_repairs: Option<usize>,
    /// Steps where the K-means/K-medoids objective increased.
    pub initializer_objective_increases: Option<usize>,
    pub initializer_iterations: Option<usize>,
    pub initializer_match: Option<MatchReport>,
    pub em_match: Option<MatchReport>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub trace: Option<FitTrace>,
    #[serde(skip)]
    pub artifacts: Option<TrialArtifacts>,
}

impl TrialRecord {
    fn empty(trial_index: usize, data_seed: u64, init_seed: u64, strategy: InitKind) -> Self {
        Self {
            trial_index,
            data_seed,
            init_seed,
            strategy,
            initializer_well: None,
            em_well: None,
            em_iterations: None,
            em_converged: None,
            final_log_likelihood: None,
            monotonicity_violations: None,
            em_repairs: None,
            initializer_objective_increases: None,
            initializer_iterations: None,
            initializer_match: None,
            em_match: None,
            error: None,
            wall_time: Duration::ZERO,
            trace: None,
            artifacts: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn em_is_well(&self) -> bool {
        self.em_well == Some(true)
    }

    pub fn initializer_is_well(&self) -> bool {
        self.initializer_well == Some(true)
    }
}

pub fn trial_seeds(base_seed: u64, trial_index: usize) -> (u64, u64) {
    let data_seed = base_seed.wrapping_add(trial_index as u64);
    (data_seed, data_seed.wrapping_add(INIT_SEED_OFFSET))
}

/// Generates a dataset, initializes, fits and judges. Errors are captured
/// in the record rather than returned.
pub fn run_trial(
    scenario: &Scenario,
    strategy: InitKind,
    fit_config: &FitConfig,
    criteria: &WellCriteria,
    base_seed: u64,
    trial_index: usize,
) -> TrialRecord {
    let (data_seed, init_seed) = trial_seeds(base_seed, trial_index);
    let mut record = TrialRecord::empty(trial_index, data_seed, init_seed, strategy);
    let start = Instant::now();
    if let Err(e) = fill_trial(&mut record, scenario, fit_config, criteria) {
        record.error = Some(e.to_string());
    }
    record.wall_time = start.elapsed();
    record
}

fn fill_trial(
    record: &mut TrialRecord,
    scenario: &Scenario,
    fit_config: &FitConfig,
    criteria: &WellCriteria,
) -> Result<()> {
    let data = generate(scenario, record.data_seed)?;
    let labels = data.true_labels().expect("generated data is labeled").to_vec();
    let init = initialize(&data, scenario.k(), &InitStrategy::new(record.strategy, record.init_seed))?;
    if let Some(c) = &init.clustering {
        let m = judge(c.centers.view(), &c.assignments, &labels, scenario, criteria)?;
        record.initializer_well = Some(m.well);
        record.initializer_match = Some(m);
        record.initializer_objective_increases = Some(c.objective_increases(1e-12));
        record.initializer_iterations = Some(c.iterations);
    }
    let result = fit(&data, &init.params, fit_config)?;
    let m = judge_model(&result.params, &result.responsibilities, &labels, scenario, criteria)?;
    record.em_well = Some(m.well);
    record.em_match = Some(m);
    record.em_iterations = Some(result.trace.iterations);
    record.em_converged = Some(result.trace.converged);
    record.final_log_likelihood = Some(result.trace.final_log_likelihood());
    record.monotonicity_violations = Some(result.trace.monotonicity_violations(MONOTONICITY_SLACK));
    record.em_repairs = Some(result.trace.repairs.len());
    record.artifacts = Some(TrialArtifacts {
        true_means: scenario.true_means(),
        initial_means: init.params.means(),
        fitted_means: result.params.means(),
        data,
    });
    record.trace = Some(result.trace);
    Ok(())
}

/// Counts for one (scenario, strategy) case, in the table's schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseCounts {
    pub scenario: String,
    pub strategy: InitKind,
    pub trials: usize,
    pub completed: usize,
    pub failed: usize,
    pub none_well: usize,
    /// `N_K`; `None` when the strategy has no hard clusterer.
    pub initializer_well: Option<usize>,
    /// `N_E`.
    pub em_well: usize,
    /// `N_K/N_E`; `None` when undefined.
    pub ratio: Option<f64>,
    pub monotonicity_violations: usize,
    pub em_repairs: usize,
    pub em_unconverged: usize,
}

impl CaseCounts {
    pub fn tally(scenario: &str, strategy: InitKind, records: &[&TrialRecord]) -> Self {
        let completed: Vec<&&TrialRecord> = records.iter().filter(|r| !r.failed()).collect();
        let em_well = completed.iter().filter(|r| r.em_is_well()).count();
        let initializer_well = (strategy != InitKind::Random)
            .then(|| completed.iter().filter(|r| r.initializer_is_well()).count());
        let none_well = completed
            .iter()
            .filter(|r| !r.em_is_well() && !r.initializer_is_well())
            .count();
        let ratio = match initializer_well {
            Some(nk) if em_well > 0 => Some(nk as f64 / em_well as f64),
            _ => None,
        };
        Self {
            scenario: scenario.to_string(),
            strategy,
            trials: records.len(),
            completed: completed.len(),
            failed: records.len() - completed.len(),
            none_well,
            initializer_well,
            em_well,
            ratio,
            monotonicity_violations: completed
                .iter()
                .map(|r| r.monotonicity_violations.unwrap_or(0))
                .sum(),
            em_repairs: completed.iter().map(|r| r.em_repairs.unwrap_or(0)).sum(),
            em_unconverged: completed.iter().filter(|r| r.em_converged == Some(false)).count(),
        }
    }

    /// Trials in which the initializer or EM (or both) came out well.
    pub fn any_well(&self) -> usize {
        self.completed - self.none_well
    }
}

/// The parts of the configuration that determine the results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub scenario: ScenarioSpec,
    pub strategies: Vec<InitKind>,
    pub trials: usize,
    pub base_seed: u64,
    pub fit: FitConfig,
    pub criteria: WellCriteria,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEntry {
    pub strategy: InitKind,
    pub trial_index: usize,
    pub data_seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rng: String,
    pub config: ConfigEcho,
    pub cases: Vec<CaseCounts>,
    pub failures: Vec<FailureEntry>,
    #[serde(skip)]
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn case(&self, strategy: InitKind) -> Option<&CaseCounts> {
        self.cases.iter().find(|c| c.strategy == strategy)
    }

    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn trial(&self, strategy: InitKind, trial_index: usize) -> Option<&TrialRecord> {
        self.trials
            .iter()
            .find(|t| t.strategy == strategy && t.trial_index == trial_index)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per trial, in case then trial order.
    pub fn trials_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&serde_json::to_string(t).expect("trial serializes"));
            out.push('\n');
        }
        out
    }

    /// One block per case: a caption line, then the four-column table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for case in &self.cases {
            writeln!(
                out,
                "Case: {} / {} (trials={}, completed={}, failed={})",
                case.scenario, case.strategy, case.trials, case.completed, case.failed
            )
            .expect("writing to a String");
            let cells = [
                case.none_well.to_string(),
                case.initializer_well.map_or_else(|| "-".into(), |v| v.to_string()),
                case.em_well.to_string(),
                case.ratio.map_or_else(|| "undefined".into(), |r| format!("{r:.2}")),
            ];
            let widths: Vec<usize> = TABLE_COLUMNS
                .iter()
                .zip(&cells)
                .map(|(h, c)| h.len().max(c.len()))
                .collect();
            let header: Vec<String> = TABLE_COLUMNS
                .iter()
                .zip(&widths)
                .map(|(h, &w)| format!("{h:<w$}"))
                .collect();
            let row: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:>w$}"))
                .collect();
            writeln!(out, "{}", header.join(" | ").trim_end()).expect("writing to a String");
            writeln!(out, "{}", row.join(" | ")).expect("writing to a String");
            out.push('\n');
        }
        out
    }

    /// Writes `report.json`, `report.txt`, `trials.jsonl` and `timings.csv`.
    /// Only the last depends on the machine.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(dir.join("report.txt"), self.to_table())?;
        fs::write(dir.join("trials.jsonl"), self.trials_jsonl())?;
        let mut timings = String::from("strategy,trial_index,wall_time_secs\n");
        for t in &self.trials {
            writeln!(timings, "{},{},{:.6}", t.strategy, t.trial_index, t.wall_time.as_secs_f64())
                .expect("writing to a String");
        }
        fs::write(dir.join("timings.csv"), timings)?;
        Ok(())
    }
}

/// Runs every (strategy, trial) pair of `config` and tallies the cases.
/// Writes the report when `config.output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let scenario = config.resolve_scenario()?;
    let jobs: Vec<(InitKind, usize)> = config
        .strategies
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |i| (s, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let trials: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(strategy, i)| {
                run_trial(&scenario, strategy, &config.fit, &config.criteria, config.base_seed, i)
            })
            .collect()
    });
    let cases = config
        .strategies
        .iter()
        .map(|&s| {
            let records: Vec<&TrialRecord> = trials.iter().filter(|t| t.strategy == s).collect();
            CaseCounts::tally(&scenario.name, s, &records)
        })
        .collect();
    let failures = trials
        .iter()
        .filter_map(|t| {
            t.error.as_ref().map(|e| FailureEntry {
                strategy: t.strategy,
                trial_index: t.trial_index,
                data_seed: t.data_seed,
                error: e.clone(),
            })
        })
        .collect();
    let report = ExperimentReport {
        rng: RNG_DESCRIPTION.to_string(),
        config: ConfigEcho {
            scenario: scenario.to_spec(),
            strategies: config.strategies.clone(),
            trials: config.trials,
            base_seed: config.base_seed,
            fit: config.fit,
            criteria: config.criteria,
        },
        cases,
        failures,
        trials,
    };
    if let Some(dir) = &config.output_dir {
        report.write_to(dir)?;
    }
    Ok(report)
}

pub fn figure_data(trial: &TrialRecord) -> Result<FigureData> {
    let a = trial.artifacts.as_ref().ok_or(Error::MissingTrialArtifacts)?;
    Ok(FigureData {
        points: a.data.points().to_owned(),
        labels: a.data.true_labels().expect("generated data is labeled").to_vec(),
        true_means: a.true_means.clone(),
        initial_means: a.initial_means.clone(),
        fitted_means: a.fitted_means.clone(),
    })
}

/// Writes the trial's points, true means, initial means and fitted means.
pub fn export_figure_data(trial: &TrialRecord, output: &Path) -> Result<()> {
    let fig = figure_data(trial)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(output, fig.to_text())?;
    Ok(())
}
