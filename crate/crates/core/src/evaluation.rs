//! Well/poor verdicts against ground truth.
//!
//! Components are matched to the true components by the permutation with
//! the smallest summed mean distance, found by exhaustive search. A result
//! is "well" when every matched mean is within `mean_tol` of its truth and
//! the hard assignments agree with the true labels often enough.

use itertools::Itertools;
use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GmmParams, Responsibilities};
use crate::synthetic::Scenario;

/// Exhaustive matching is used up to this many components.
pub const MAX_EXHAUSTIVE_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellCriteria {
    /// Mean tolerance as a fraction of the smallest distance between true means.
    pub mean_tol_frac: f64,
    pub accuracy_min: f64,
}

impl Default for WellCriteria {
    fn default() -> Self {
        Self {
            mean_tol_frac: 0.25,
            accuracy_min: 0.80,
        }
    }
}

impl WellCriteria {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_tol_frac > 0.0 && self.mean_tol_frac.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mean_tol_frac must be > 0, got {}",
                self.mean_tol_frac
            )));
        }
        if !(0.0..=1.0).contains(&self.accuracy_min) {
            return Err(Error::InvalidConfig(format!(
                "accuracy_min must lie in [0, 1], got {}",
                self.accuracy_min
            )));
        }
        Ok(())
    }

    /// Absolute mean tolerance for `scenario`. With a single true component
    /// the scale is its RMS standard deviation `sqrt(trace Σ / d)` instead.
    pub fn mean_tol(&self, scenario: &Scenario) -> f64 {
        let means = scenario.true_means();
        let k = means.nrows();
        let scale = if k < 2 {
            let c = &scenario.true_params.components()[0];
            (c.covariance().diag().sum() / c.dim() as f64).sqrt()
        } else {
            (0..k)
                .tuple_combinations()
                .map(|(a, b)| euclid(means.row(a), means.row(b)))
                .fold(f64::INFINITY, f64::min)
        };
        self.mean_tol_frac * scale
    }
}

fn euclid(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationMatch {
    /// `permutation[estimated] = true` component index.
    pub permutation: Vec<usize>,
    pub per_component_mean_error: Vec<f64>,
    pub max_mean_error: f64,
    pub total_mean_error: f64,
}

/// Bijection minimizing `Σ_j ‖est_j − true_{π(j)}‖`. Among equal-cost
/// permutations the lexicographically first wins.
pub fn best_permutation_match(
    estimated_means: ArrayView2<'_, f64>,
    true_means: ArrayView2<'_, f64>,
) -> Result<PermutationMatch> {
    if estimated_means.dim() != true_means.dim() {
        return Err(Error::MismatchedShapes(format!(
            "estimated means {:?} vs true means {:?}",
            estimated_means.dim(),
            true_means.dim()
        )));
    }
    let k = true_means.nrows();
    if k == 0 || k > MAX_EXHAUSTIVE_K {
        return Err(Error::MismatchedShapes(format!(
            "exhaustive matching supports 1..={MAX_EXHAUSTIVE_K} components, got {k}"
        )));
    }
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|e| (0..k).map(|t| euclid(estimated_means.row(e), true_means.row(t))).collect())
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(e, &t)| cost[e][t]).sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm));
        }
    }
    let (total, permutation) = best.expect("at least one permutation");
    let per_component_mean_error: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(e, &t)| cost[e][t])
        .collect();
    let max_mean_error = per_component_mean_error.iter().copied().fold(0.0, f64::max);
    Ok(PermutationMatch {
        permutation,
        per_component_mean_error,
        max_mean_error,
        total_mean_error: total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub permutation: Vec<usize>,
    pub per_component_mean_error: Vec<f64>,
    pub max_mean_error: f64,
    pub accuracy: f64,
    pub mean_tol: f64,
    pub well: bool,
    /// Frobenius distance of each matched covariance; informational only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance_errors: Option<Vec<f64>>,
}

/// Fraction of points whose mapped assignment equals the true label.
pub fn accuracy(assignments: &[usize], true_labels: &[usize], permutation: &[usize]) -> f64 {
    let hits = assignments
        .iter()
        .zip(true_labels)
        .filter(|(&a, &t)| permutation[a] == t)
        .count();
    hits as f64 / true_labels.len() as f64
}

/// Verdict for a set of estimated means and hard assignments.
pub fn judge(
    result_means: ArrayView2<'_, f64>,
    hard_assignments: &[usize],
    true_labels: &[usize],
    scenario: &Scenario,
    criteria: &WellCriteria,
) -> Result<MatchReport> {
    let truth = scenario.true_means();
    let matched = best_permutation_match(result_means, truth.view())?;
    if hard_assignments.len() != true_labels.len() || true_labels.is_empty() {
        return Err(Error::MismatchedShapes(format!(
            "{} assignments for {} labels",
            hard_assignments.len(),
            true_labels.len()
        )));
    }
    let k = scenario.k();
    if let Some(&bad) = hard_assignments.iter().chain(true_labels).find(|&&a| a >= k) {
        return Err(Error::LabelOutOfRange { label: bad, clusters: k });
    }
    let accuracy = accuracy(hard_assignments, true_labels, &matched.permutation);
    let mean_tol = criteria.mean_tol(scenario);
    let well = matched.max_mean_error <= mean_tol && accuracy >= criteria.accuracy_min;
    Ok(MatchReport {
        permutation: matched.permutation,
        per_component_mean_error: matched.per_component_mean_error,
        max_mean_error: matched.max_mean_error,
        accuracy,
        mean_tol,
        well,
        covariance_errors: None,
    })
}

/// [`judge`] for a fitted mixture, using argmax responsibilities and also
/// reporting matched covariance errors.
pub fn judge_model(
    params: &GmmParams,
    responsibilities: &Responsibilities,
    true_labels: &[usize],
    scenario: &Scenario,
    criteria: &WellCriteria,
) -> Result<MatchReport> {
    let mut report = judge(
        params.means().view(),
        &responsibilities.hard_assignments(),
        true_labels,
        scenario,
        criteria,
    )?;
    let truth = scenario.true_params.components();
    let errors = params
        .components()
        .iter()
        .zip(&report.permutation)
        .map(|(c, &t)| {
            c.covariance()
                .iter()
                .zip(truth[t].covariance().iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    report.covariance_errors = Some(errors);
    Ok(report)
}
