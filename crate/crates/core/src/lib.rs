//! Gaussian mixture estimation by expectation maximization, with random,
//! K-means and K-medoids initialization and a seeded harness for comparing
//! them on synthetic mixtures.

pub mod em;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod harness;
pub mod init;
pub mod model;
pub mod synthetic;

pub use em::{e_step, expected_complete_log_likelihood, fit, log_likelihood, m_step, FitConfig, FitResult, FitTrace};
pub use error::{Error, Result};
pub use evaluation::{best_permutation_match, judge, judge_model, MatchReport, WellCriteria};
pub use harness::{export_figure_data, run_experiment, run_trial, ExperimentConfig, ExperimentReport, ScenarioRef, TrialRecord};
pub use init::{clustering_to_gmm, init_random, initialize, k_means, k_medoids, HardClustering, InitKind, InitStrategy};
pub use model::{cholesky_factor, log_density, log_mixture_density, Dataset, GaussianComponent, GmmParams, Responsibilities};
pub use synthetic::{generate, sample_mvn, Scenario};
