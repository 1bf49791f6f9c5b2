//! Expectation maximization for full-covariance Gaussian mixtures.
//!
//! One iteration evaluates responsibilities and `ℓ(θ_t)` in a single pass
//! (both come out of the same per-row log-sum-exp), then re-estimates θ in
//! closed form. The loop stops on the largest entrywise parameter change,
//! not on the likelihood change; both series are kept in the trace.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    log_mixture_density, log_sum_exp, weighted_scatter, Dataset, GaussianComponent, GmmParams,
    Responsibilities, DEFAULT_RIDGE,
};

/// A component whose mass falls below this fraction of `n` is degenerate.
pub const DEGENERATE_MASS_FRAC: f64 = 1e-8;
/// Per-step tolerance on decreases of the log-likelihood.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Stop once the max absolute parameter change drops below this.
    pub param_tol: f64,
    pub max_iters: usize,
    /// Ridge factor applied to covariances that fail to factor.
    pub regularization: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            param_tol: 1e-6,
            max_iters: 500,
            regularization: DEFAULT_RIDGE,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.param_tol > 0.0 && self.param_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "param_tol must be > 0, got {}",
                self.param_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "regularization must be >= 0, got {}",
                self.regularization
            )));
        }
        Ok(())
    }
}

/// A degenerate component re-seeded during the M-step of `iteration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repair {
    pub iteration: usize,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitTrace {
    /// `ℓ(θ_0), …, ℓ(θ_T)`: one entry per iteration plus the final parameters.
    pub log_likelihoods: Vec<f64>,
    /// Max absolute change between θ_t and θ_{t+1}.
    pub param_deltas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub repairs: Vec<Repair>,
}

impl FitTrace {
    /// Steps where ℓ dropped by more than `slack`. Steps whose M-step
    /// re-seeded a component are excluded; they are listed in `repairs`.
    pub fn monotonicity_violations(&self, slack: f64) -> usize {
        self.log_likelihoods
            .windows(2)
            .enumerate()
            .filter(|(t, _)| !self.repairs.iter().any(|r| r.iteration == *t))
            .filter(|(_, w)| w[1] < w[0] - slack)
            .count()
    }

    pub fn final_log_likelihood(&self) -> f64 {
        self.log_likelihoods.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GmmParams,
    pub responsibilities: Responsibilities,
    pub trace: FitTrace,
}

fn check_data(data: &Dataset, params: &GmmParams) -> Result<()> {
    params.check_dim(data.dim())
}

/// Responsibilities together with `ℓ(θ)`, from the same log-sum-exp pass.
fn e_step_with_likelihood(data: &Dataset, params: &GmmParams) -> (Responsibilities, f64) {
    let k = params.k();
    let mut gamma = Array2::zeros((data.len(), k));
    let mut terms = vec![0.0; k];
    let mut total = 0.0;
    for (i, x) in data.points().outer_iter().enumerate() {
        params.weighted_log_densities(x, &mut terms);
        let norm = log_sum_exp(&terms);
        total += norm;
        for j in 0..k {
            gamma[[i, j]] = (terms[j] - norm).exp();
        }
    }
    (Responsibilities::from_normalized(gamma), total)
}

/// `γ_ij ∝ w_j N(x_i; μ_j, Σ_j)`, rows normalized in log space.
pub fn e_step(data: &Dataset, params: &GmmParams) -> Result<Responsibilities> {
    check_data(data, params)?;
    Ok(e_step_with_likelihood(data, params).0)
}

/// The Q function `Σ_i Σ_j γ_ij (ln w_j + ln N(x_i; μ_j, Σ_j))`.
pub fn expected_complete_log_likelihood(
    data: &Dataset,
    gamma: &Responsibilities,
    params: &GmmParams,
) -> Result<f64> {
    check_data(data, params)?;
    check_gamma(data, gamma, params.k())?;
    let mut terms = vec![0.0; params.k()];
    let mut total = 0.0;
    for (x, g) in data.points().outer_iter().zip(gamma.gamma().outer_iter()) {
        params.weighted_log_densities(x, &mut terms);
        for (gij, t) in g.iter().zip(&terms) {
            // a zero responsibility contributes nothing, even against ln 0
            if *gij > 0.0 {
                total += gij * t;
            }
        }
    }
    Ok(total)
}

fn check_gamma(data: &Dataset, gamma: &Responsibilities, k: usize) -> Result<()> {
    if gamma.n() != data.len() || gamma.k() != k {
        return Err(Error::MismatchedShapes(format!(
            "responsibilities are {}x{}, expected {}x{}",
            gamma.n(),
            gamma.k(),
            data.len(),
            k
        )));
    }
    Ok(())
}

/// Weighted moments of one column, or `None` when its mass is degenerate.
fn component_moments(
    data: &Dataset,
    gamma: &Responsibilities,
    j: usize,
) -> (f64, Option<(Array1<f64>, Array2<f64>)>) {
    let n = data.len() as f64;
    let col = gamma.gamma().column(j).to_vec();
    let mass: f64 = col.iter().sum();
    if mass < DEGENERATE_MASS_FRAC * n {
        return (mass, None);
    }
    let mut mean = Array1::zeros(data.dim());
    for (x, &g) in data.points().outer_iter().zip(&col) {
        mean.scaled_add(g, &x);
    }
    mean /= mass;
    let cov = weighted_scatter(data.points(), &col, mean.view(), mass);
    (mass, Some((mean, cov)))
}

/// Closed-form maximizer of the Q function for fixed responsibilities:
/// `w_j = N_j/n`, `μ_j = Σ γ_ij x_i / N_j`, `Σ_j = Σ γ_ij (x_i−μ_j)(x_i−μ_j)ᵀ / N_j`.
///
/// Covariances that fail to factor get one ridge retry with `regularization`.
pub fn m_step(data: &Dataset, gamma: &Responsibilities, regularization: f64) -> Result<GmmParams> {
    check_gamma(data, gamma, gamma.k())?;
    let n = data.len() as f64;
    let mut components = Vec::with_capacity(gamma.k());
    for j in 0..gamma.k() {
        match component_moments(data, gamma, j) {
            (mass, Some((mean, cov))) => {
                components.push(GaussianComponent::regularized(mean, cov, mass / n, regularization)?)
            }
            (mass, None) => return Err(Error::DegenerateComponent { component: j, mass }),
        }
    }
    GmmParams::normalized(components)
}

/// M-step used inside [`fit`]: degenerate components are re-seeded at the
/// points the current model explains worst, with pooled covariance and
/// weight `1/K` before renormalization.
fn m_step_repairing(
    data: &Dataset,
    gamma: &Responsibilities,
    current: &GmmParams,
    regularization: f64,
    iteration: usize,
    repairs: &mut Vec<Repair>,
) -> Result<GmmParams> {
    let n = data.len() as f64;
    let k = gamma.k();
    let mut slots: Vec<Option<GaussianComponent>> = Vec::with_capacity(k);
    let mut degenerate = Vec::new();
    for j in 0..k {
        match component_moments(data, gamma, j) {
            (mass, Some((mean, cov))) => slots.push(Some(GaussianComponent::regularized(
                mean,
                cov,
                mass / n,
                regularization,
            )?)),
            _ => {
                slots.push(None);
                degenerate.push(j);
            }
        }
    }
    if !degenerate.is_empty() {
        let mut order: Vec<(f64, usize)> = data
            .points()
            .outer_iter()
            .enumerate()
            .map(|(i, x)| (log_mixture_density(x, current).unwrap_or(f64::NEG_INFINITY), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pooled = data.covariance();
        for (&j, &(_, i)) in degenerate.iter().zip(&order) {
            slots[j] = Some(GaussianComponent::regularized(
                data.point(i).to_owned(),
                pooled.clone(),
                1.0 / k as f64,
                regularization.max(DEFAULT_RIDGE),
            )?);
            repairs.push(Repair {
                iteration,
                component: j,
            });
        }
    }
    GmmParams::normalized(slots.into_iter().map(|c| c.expect("every slot filled")).collect())
}

/// `ℓ(θ) = Σ_i ln p(x_i; θ)`.
pub fn log_likelihood(data: &Dataset, params: &GmmParams) -> Result<f64> {
    check_data(data, params)?;
    Ok(data
        .points()
        .outer_iter()
        .map(|x| {
            let mut terms = vec![0.0; params.k()];
            params.weighted_log_densities(x, &mut terms);
            log_sum_exp(&terms)
        })
        .sum())
}

/// Alternates E- and M-steps from `initial` until the parameter change is
/// below `config.param_tol` or `config.max_iters` iterations have run.
pub fn fit(data: &Dataset, initial: &GmmParams, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_data(data, initial)?;
    if data.len() < initial.k() {
        return Err(Error::TooFewPoints {
            n: data.len(),
            k: initial.k(),
        });
    }
    let mut trace = FitTrace::default();
    let mut params = initial.clone();
    for iteration in 0..config.max_iters {
        let (gamma, ll) = e_step_with_likelihood(data, &params);
        trace.log_likelihoods.push(ll);
        let next = m_step_repairing(
            data,
            &gamma,
            &params,
            config.regularization,
            iteration,
            &mut trace.repairs,
        )?;
        let delta = next.max_abs_change(&params);
        trace.param_deltas.push(delta);
        trace.iterations += 1;
        params = next;
        if delta < config.param_tol {
            trace.converged = true;
            break;
        }
    }
    let (responsibilities, ll) = e_step_with_likelihood(data, &params);
    trace.log_likelihoods.push(ll);
    Ok(FitResult {
        params,
        responsibilities,
        trace,
    })
}
