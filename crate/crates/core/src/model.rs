//! Datasets, Gaussian components and mixture parameters.
//!
//! Every covariance carries its lower Cholesky factor, computed once at
//! construction, so densities are evaluated by forward substitution and the
//! log-determinant is read off the factor's diagonal. No matrix is ever
//! inverted explicitly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for `|a_ij - a_ji|`, scaled by `1 + max|a|`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance on mixture weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Default ridge factor used when a covariance fails to factor.
pub const DEFAULT_RIDGE: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `n` points in `d` dimensions, optionally carrying ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    true_labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::MismatchedShapes(format!(
                "dataset must have n >= 1 and d >= 1, got {}x{}",
                points.nrows(),
                points.ncols()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset points"));
        }
        Ok(Self {
            points,
            true_labels: None,
        })
    }

    /// Builds a labeled dataset; every label must be below `clusters`.
    pub fn with_labels(points: Array2<f64>, labels: Vec<usize>, clusters: usize) -> Result<Self> {
        let mut data = Self::new(points)?;
        if labels.len() != data.len() {
            return Err(Error::MismatchedShapes(format!(
                "{} labels for {} points",
                labels.len(),
                data.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= clusters) {
            return Err(Error::LabelOutOfRange { label, clusters });
        }
        data.true_labels = Some(labels);
        Ok(data)
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn true_labels(&self) -> Option<&[usize]> {
        self.true_labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn mean(&self) -> Array1<f64> {
        self.points
            .mean_axis(Axis(0))
            .expect("dataset is never empty")
    }

    /// Population (1/n) covariance of all points.
    pub fn covariance(&self) -> Array2<f64> {
        let mean = self.mean();
        let weights = vec![1.0; self.len()];
        weighted_scatter(self.points.view(), &weights, mean.view(), self.len() as f64)
    }

    /// Population covariance of the points at `indices`.
    pub fn subset_covariance(&self, indices: &[usize]) -> Array2<f64> {
        let d = self.dim();
        let mut mean = Array1::zeros(d);
        for &i in indices {
            mean += &self.point(i);
        }
        mean /= indices.len() as f64;
        let mut cov = Array2::zeros((d, d));
        for &i in indices {
            let diff = &self.point(i) - &mean;
            accumulate_outer(&mut cov, diff.view(), 1.0);
        }
        symmetrize_upper(&mut cov);
        cov / indices.len() as f64
    }
}

/// `Σ_i w_i (x_i − μ)(x_i − μ)ᵀ / total`, accumulated on the upper triangle and mirrored.
pub(crate) fn weighted_scatter(
    points: ArrayView2<'_, f64>,
    weights: &[f64],
    mean: ArrayView1<'_, f64>,
    total: f64,
) -> Array2<f64> {
    let d = points.ncols();
    let mut cov = Array2::zeros((d, d));
    for (row, &w) in points.outer_iter().zip(weights) {
        let diff = &row - &mean;
        accumulate_outer(&mut cov, diff.view(), w);
    }
    symmetrize_upper(&mut cov);
    cov / total
}

fn accumulate_outer(acc: &mut Array2<f64>, v: ArrayView1<'_, f64>, w: f64) {
    let d = v.len();
    for a in 0..d {
        let wa = w * v[a];
        for b in a..d {
            acc[[a, b]] += wa * v[b];
        }
    }
}

fn symmetrize_upper(m: &mut Array2<f64>) {
    let d = m.nrows();
    for a in 0..d {
        for b in 0..a {
            m[[a, b]] = m[[b, a]];
        }
    }
}

pub fn check_symmetric(a: ArrayView2<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::MismatchedShapes(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = 1.0 + a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..a.nrows() {
        for j in 0..i {
            let gap = (a[[i, j]] - a[[j, i]]).abs();
            if gap > SYMMETRY_TOL * scale || gap.is_nan() {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
    }
    Ok(())
}

/// Lower-triangular `L` with `L·Lᵀ = a`.
///
/// Only the lower triangle of `a` is read after the symmetry check.
pub fn cholesky_factor(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_symmetric(a)?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let d = a.nrows();
    let mut l = Array2::<f64>::zeros((d, d));
    for j in 0..d {
        let mut pivot = a[[j, j]];
        for k in 0..j {
            pivot -= l[[j, k]] * l[[j, k]];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { row: j, pivot });
        }
        let diag = pivot.sqrt();
        l[[j, j]] = diag;
        for i in (j + 1)..d {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / diag;
        }
    }
    Ok(l)
}

/// Adds `lambda · trace(a)/d · I`. A zero trace falls back to `lambda · I`.
pub fn ridge(a: ArrayView2<'_, f64>, lambda: f64) -> Array2<f64> {
    let d = a.nrows();
    let trace: f64 = a.diag().sum();
    let scale = if trace > 0.0 { trace / d as f64 } else { 1.0 };
    let mut out = a.to_owned();
    for i in 0..d {
        out[[i, i]] += lambda * scale;
    }
    out
}

/// One weighted multivariate normal component of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    mean: Array1<f64>,
    covariance: Array2<f64>,
    weight: f64,
    factor: Array2<f64>,
    log_det: f64,
}

impl GaussianComponent {
    /// Strict constructor: the covariance must factor as given.
    pub fn new(mean: Array1<f64>, covariance: Array2<f64>, weight: f64) -> Result<Self> {
        Self::check_shapes(&mean, &covariance, weight)?;
        let factor = cholesky_factor(covariance.view())?;
        Ok(Self::from_parts(mean, covariance, weight, factor))
    }

    /// Like [`GaussianComponent::new`], but on factorization failure retries
    /// once with [`ridge`]`(covariance, lambda)`. `lambda = 0` disables the retry.
    pub fn regularized(
        mean: Array1<f64>,
        covariance: Array2<f64>,
        weight: f64,
        lambda: f64,
    ) -> Result<Self> {
        Self::check_shapes(&mean, &covariance, weight)?;
        match cholesky_factor(covariance.view()) {
            Ok(factor) => Ok(Self::from_parts(mean, covariance, weight, factor)),
            Err(Error::NotPositiveDefinite { .. }) if lambda > 0.0 => {
                let repaired = ridge(covariance.view(), lambda);
                let factor = cholesky_factor(repaired.view())?;
                Ok(Self::from_parts(mean, repaired, weight, factor))
            }
            Err(e) => Err(e),
        }
    }

    fn check_shapes(mean: &Array1<f64>, covariance: &Array2<f64>, weight: f64) -> Result<()> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::MismatchedShapes("empty mean vector".into()));
        }
        if covariance.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: covariance.nrows(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("component mean"));
        }
        if !(weight > 0.0 && weight <= 1.0 + WEIGHT_SUM_TOL) {
            return Err(Error::InvalidWeights(format!(
                "component weight {weight} outside (0, 1]"
            )));
        }
        Ok(())
    }

    fn from_parts(mean: Array1<f64>, covariance: Array2<f64>, weight: f64, factor: Array2<f64>) -> Self {
        let log_det = 2.0 * factor.diag().iter().map(|v| v.ln()).sum::<f64>();
        Self {
            mean,
            covariance,
            weight,
            factor,
            log_det,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> ArrayView1<'_, f64> {
        self.mean.view()
    }

    pub fn covariance(&self) -> ArrayView2<'_, f64> {
        self.covariance.view()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn cholesky(&self) -> ArrayView2<'_, f64> {
        self.factor.view()
    }

    /// `ln |Σ|`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub(crate) fn with_weight(&self, weight: f64) -> Self {
        Self {
            weight,
            ..self.clone()
        }
    }

    /// Squared Mahalanobis distance `(x−μ)ᵀ Σ⁻¹ (x−μ)` via forward substitution.
    pub(crate) fn mahalanobis_sq(&self, x: ArrayView1<'_, f64>) -> f64 {
        let d = self.dim();
        let mut y = [0.0_f64; 8];
        let mut heap;
        let y: &mut [f64] = if d <= y.len() {
            &mut y[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut total = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= self.factor[[i, k]] * y[k];
            }
            y[i] = s / self.factor[[i, i]];
            total += y[i] * y[i];
        }
        total
    }

    /// `ln N(x; μ, Σ)` without a dimension check.
    pub(crate) fn log_pdf(&self, x: ArrayView1<'_, f64>) -> f64 {
        -0.5 * (self.dim() as f64 * LN_2PI + self.log_det + self.mahalanobis_sq(x))
    }
}

/// `ln N(x; μ, Σ) = −d/2·ln 2π − ½ ln|Σ| − ½ (x−μ)ᵀ Σ⁻¹ (x−μ)`.
pub fn log_density(x: ArrayView1<'_, f64>, component: &GaussianComponent) -> Result<f64> {
    if x.len() != component.dim() {
        return Err(Error::DimensionMismatch {
            expected: component.dim(),
            got: x.len(),
        });
    }
    Ok(component.log_pdf(x))
}

/// Max-shifted `ln Σ exp(v_j)`. Empty input or all `-inf` yields `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Serializable view of a component (parameters only; the factor is recomputed on load).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub weight: f64,
}

/// Mixture parameters θ: `K` components whose weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    components: Vec<GaussianComponent>,
}

impl GmmParams {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::MismatchedShapes("a mixture needs K >= 1".into()))?;
        let d = first.dim();
        if let Some(c) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.dim(),
            });
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(Self { components })
    }

    /// Rescales weights to sum to one before validating.
    pub fn normalized(components: Vec<GaussianComponent>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        let components = components
            .iter()
            .map(|c| c.with_weight(c.weight / total))
            .collect();
        Self::new(components)
    }

    pub fn from_records(records: &[ComponentRecord], lambda: f64) -> Result<Self> {
        let components = records
            .iter()
            .map(|r| {
                let d = r.mean.len();
                if r.covariance.len() != d || r.covariance.iter().any(|row| row.len() != d) {
                    return Err(Error::MismatchedShapes(format!(
                        "covariance must be {d}x{d}"
                    )));
                }
                let cov = Array2::from_shape_fn((d, d), |(i, j)| r.covariance[i][j]);
                GaussianComponent::regularized(Array1::from(r.mean.clone()), cov, r.weight, lambda)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn to_records(&self) -> Vec<ComponentRecord> {
        self.components
            .iter()
            .map(|c| ComponentRecord {
                mean: c.mean.to_vec(),
                covariance: c.covariance.outer_iter().map(|r| r.to_vec()).collect(),
                weight: c.weight,
            })
            .collect()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// `K × d` matrix of component means.
    pub fn means(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.k(), self.dim()), |(j, a)| self.components[j].mean[a])
    }

    /// Largest absolute entrywise difference over means, covariances and weights.
    pub fn max_abs_change(&self, other: &GmmParams) -> f64 {
        let mut delta = 0.0_f64;
        for (a, b) in self.components.iter().zip(&other.components) {
            delta = delta.max((a.weight - b.weight).abs());
            for (x, y) in a.mean.iter().zip(&b.mean) {
                delta = delta.max((x - y).abs());
            }
            for (x, y) in a.covariance.iter().zip(&b.covariance) {
                delta = delta.max((x - y).abs());
            }
        }
        delta
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }

    /// Fills `out[j] = ln w_j + ln N(x; μ_j, Σ_j)`.
    pub(crate) fn weighted_log_densities(&self, x: ArrayView1<'_, f64>, out: &mut [f64]) {
        for (slot, c) in out.iter_mut().zip(&self.components) {
            *slot = c.weight.ln() + c.log_pdf(x);
        }
    }
}

/// `ln Σ_j w_j N(x; μ_j, Σ_j)` by log-sum-exp.
pub fn log_mixture_density(x: ArrayView1<'_, f64>, params: &GmmParams) -> Result<f64> {
    params.check_dim(x.len())?;
    let mut terms = vec![0.0; params.k()];
    params.weighted_log_densities(x, &mut terms);
    Ok(log_sum_exp(&terms))
}

/// Tolerance on responsibility rows summing to one.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// `n × K` row-stochastic matrix of posterior component memberships.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    gamma: Array2<f64>,
}

impl Responsibilities {
    pub fn new(gamma: Array2<f64>) -> Result<Self> {
        if gamma.nrows() == 0 || gamma.ncols() == 0 {
            return Err(Error::MismatchedShapes("empty responsibility matrix".into()));
        }
        for (i, row) in gamma.outer_iter().enumerate() {
            if row.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
                return Err(Error::InvalidWeights(format!(
                    "responsibility row {i} has entries outside [0, 1]"
                )));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidWeights(format!(
                    "responsibility row {i} sums to {sum}"
                )));
            }
        }
        Ok(Self { gamma })
    }

    pub(crate) fn from_normalized(gamma: Array2<f64>) -> Self {
        Self { gamma }
    }

    pub fn gamma(&self) -> ArrayView2<'_, f64> {
        self.gamma.view()
    }

    pub fn n(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn k(&self) -> usize {
        self.gamma.ncols()
    }

    /// Column masses `N_j = Σ_i γ_ij`.
    pub fn column_mass(&self) -> Array1<f64> {
        self.gamma.sum_axis(Axis(0))
    }

    /// Argmax per row; ties go to the lowest component index.
    pub fn hard_assignments(&self) -> Vec<usize> {
        self.gamma
            .outer_iter()
            .map(|row| {
                let mut best = 0;
                for j in 1..row.len() {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let eye = Array2::<f64>::eye(2);
        assert_eq!(cholesky_factor(eye.view()).unwrap(), eye);
        let l = cholesky_factor(array![[4.0, 0.0], [0.0, 9.0]].view()).unwrap();
        assert_eq!(l, array![[2.0, 0.0], [0.0, 3.0]]);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let l = cholesky_factor(a.view()).unwrap();
        assert_eq!(l[[0, 1]], 0.0);
        let back = l.dot(&l.t());
        for (x, y) in back.iter().zip(a.iter()) {
            assert!(close(*x, *y, 1e-9));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_and_asymmetric() {
        let indefinite = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(
            cholesky_factor(indefinite.view()),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
        let singular = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(
            cholesky_factor(singular.view()),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let asym = array![[1.0, 0.5], [0.4, 1.0]];
        assert!(matches!(cholesky_factor(asym.view()), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn regularization_repairs_singular_covariance_once() {
        let singular = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(GaussianComponent::new(array![0.0, 0.0], singular.clone(), 1.0).is_err());
        let c = GaussianComponent::regularized(array![0.0, 0.0], singular.clone(), 1.0, DEFAULT_RIDGE)
            .unwrap();
        assert!(close(c.covariance()[[0, 0]], 1.0 + 1e-6, 1e-15));
        assert!(close(c.covariance()[[0, 1]], 1.0, 0.0));
        assert!(GaussianComponent::regularized(array![0.0, 0.0], singular, 1.0, 0.0).is_err());
        // a ridge cannot rescue a strongly indefinite matrix
        let bad = array![[1.0, 3.0], [3.0, 1.0]];
        assert!(GaussianComponent::regularized(array![0.0, 0.0], bad, 1.0, DEFAULT_RIDGE).is_err());
    }

    #[test]
    fn log_density_reference_values() {
        let c = GaussianComponent::new(array![0.0], array![[1.0]], 1.0).unwrap();
        assert!(close(log_density(array![0.0].view(), &c).unwrap(), -0.5 * LN_2PI, 1e-15));
        let c2 = GaussianComponent::new(array![0.0, 0.0], Array2::eye(2), 1.0).unwrap();
        assert!(close(log_density(array![0.0, 0.0].view(), &c2).unwrap(), -LN_2PI, 1e-15));
        assert!(close(
            log_density(array![1.0, 0.0].view(), &c2).unwrap(),
            -LN_2PI - 0.5,
            1e-15
        ));
        assert!(matches!(
            log_density(array![1.0].view(), &c2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mixture_density_degenerate_cases() {
        let c = GaussianComponent::new(array![0.5, -1.0], array![[2.0, 0.3], [0.3, 1.0]], 1.0).unwrap();
        let x = array![1.0, 2.0];
        let single = GmmParams::new(vec![c.clone()]).unwrap();
        assert_eq!(
            log_mixture_density(x.view(), &single).unwrap(),
            log_density(x.view(), &c).unwrap()
        );
        let dup = GmmParams::new(vec![c.with_weight(0.5), c.with_weight(0.5)]).unwrap();
        assert!(close(
            log_mixture_density(x.view(), &dup).unwrap(),
            log_density(x.view(), &c).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn mixture_density_two_scalar_normals() {
        let left = GaussianComponent::new(array![-1.0], array![[1.0]], 0.5).unwrap();
        let right = GaussianComponent::new(array![1.0], array![[1.0]], 0.5).unwrap();
        let params = GmmParams::new(vec![left, right]).unwrap();
        let pdf = |x: f64, mu: f64| (-(x - mu) * (x - mu) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let expected = (0.5 * pdf(0.0, -1.0) + 0.5 * pdf(0.0, 1.0)).ln();
        assert!(close(log_mixture_density(array![0.0].view(), &params).unwrap(), expected, 1e-14));
    }

    #[test]
    fn log_sum_exp_survives_extreme_inputs() {
        let v = log_sum_exp(&[-1e6, -1e6 - 1.0]);
        assert!(close(v, -1e6 + (1.0 + (-1.0_f64).exp()).ln(), 1e-6));
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!(close(log_sum_exp(&[1e6, 1e6]), 1e6 + 2.0_f64.ln(), 1e-6));
    }

    #[test]
    fn far_point_stays_finite() {
        let left = GaussianComponent::new(array![-1.0], array![[1e-4]], 0.5).unwrap();
        let right = GaussianComponent::new(array![1.0], array![[1e-4]], 0.5).unwrap();
        let params = GmmParams::new(vec![left, right]).unwrap();
        let v = log_mixture_density(array![20.0].view(), &params).unwrap();
        assert!(v.is_finite() && v < -1e5);
    }

    #[test]
    fn params_validation() {
        let a = GaussianComponent::new(array![0.0], array![[1.0]], 0.3).unwrap();
        let b = GaussianComponent::new(array![1.0], array![[1.0]], 0.3).unwrap();
        assert!(matches!(GmmParams::new(vec![a.clone(), b.clone()]), Err(Error::InvalidWeights(_))));
        let p = GmmParams::normalized(vec![a, b]).unwrap();
        assert!(close(p.weights().iter().sum::<f64>(), 1.0, 1e-15));
        let c3 = GaussianComponent::new(array![0.0, 0.0], Array2::eye(2), 0.5).unwrap();
        let c1 = GaussianComponent::new(array![0.0], array![[1.0]], 0.5).unwrap();
        assert!(matches!(GmmParams::new(vec![c1, c3]), Err(Error::DimensionMismatch { .. })));
        assert!(GaussianComponent::new(array![0.0], array![[1.0]], 0.0).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(matches!(
            Dataset::new(array![[0.0, f64::NAN]]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            Dataset::with_labels(array![[0.0], [1.0]], vec![0, 2], 2),
            Err(Error::LabelOutOfRange { label: 2, clusters: 2 })
        ));
        let d = Dataset::with_labels(array![[0.0], [2.0]], vec![0, 1], 2).unwrap();
        assert_eq!(d.covariance(), array![[1.0]]);
        assert_eq!(d.subset_covariance(&[0, 1]), array![[1.0]]);
    }

    #[test]
    fn responsibilities_validation() {
        assert!(Responsibilities::new(array![[0.5, 0.5], [1.0, 0.0]]).is_ok());
        assert!(Responsibilities::new(array![[0.6, 0.5]]).is_err());
        assert!(Responsibilities::new(array![[1.5, -0.5]]).is_err());
        let r = Responsibilities::new(array![[0.2, 0.8], [0.5, 0.5]]).unwrap();
        assert_eq!(r.hard_assignments(), vec![1, 0]);
    }
}
