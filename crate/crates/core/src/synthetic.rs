//! Ground-truth mixtures and seeded sampling from them.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cholesky_factor, ComponentRecord, Dataset, GaussianComponent, GmmParams};

/// Generator and normal-conversion algorithm, echoed into every report.
pub const RNG_DESCRIPTION: &str =
    "ChaCha20Rng (rand_chacha 0.9, seed_from_u64) with rand_distr 0.5 StandardNormal (ziggurat)";

pub const DEFAULT_POINTS_PER_CLUSTER: usize = 100;

pub const BUILTIN_SCENARIOS: [&str; 5] = ["4c2d", "4c2d-hard", "3c2d", "4c3d", "4c3d-hard"];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub true_params: GmmParams,
    pub points_per_cluster: usize,
    pub overlap_note: String,
}

/// Inline scenario definition as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub components: Vec<ComponentRecord>,
    #[serde(default = "default_ppc")]
    pub points_per_cluster: usize,
    #[serde(default)]
    pub overlap_note: String,
}

fn default_ppc() -> usize {
    DEFAULT_POINTS_PER_CLUSTER
}

fn isotropic(means: &[&[f64]], variance: f64) -> GmmParams {
    let k = means.len();
    let components = means
        .iter()
        .map(|m| {
            let d = m.len();
            GaussianComponent::new(
                Array1::from(m.to_vec()),
                Array2::eye(d) * variance,
                1.0 / k as f64,
            )
            .expect("isotropic covariance is positive definite")
        })
        .collect();
    GmmParams::normalized(components).expect("equal weights")
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        true_params: GmmParams,
        points_per_cluster: usize,
        overlap_note: impl Into<String>,
    ) -> Result<Self> {
        if points_per_cluster == 0 {
            return Err(Error::InvalidConfig("points_per_cluster must be >= 1".into()));
        }
        Ok(Self {
            name: name.into(),
            true_params,
            points_per_cluster,
            overlap_note: overlap_note.into(),
        })
    }

    /// One of [`BUILTIN_SCENARIOS`].
    pub fn builtin(name: &str) -> Result<Self> {
        let (params, note) = match name {
            "4c2d" => (
                isotropic(&[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 4.0], &[4.0, 4.0]], 1.0),
                "square of side 4, unit covariances: moderate overlap",
            ),
            "4c2d-hard" => (
                isotropic(&[&[0.0, 0.0], &[2.5, 0.0], &[0.0, 2.5], &[2.5, 2.5]], 1.5),
                "square of side 2.5, covariances 1.5 I: heavy overlap",
            ),
            "3c2d" => (
                isotropic(&[&[0.0, 0.0], &[3.0, 3.0], &[6.0, 0.0]], 1.0),
                "three clusters in a triangle, unit covariances",
            ),
            "4c3d" => (
                isotropic(
                    &[&[0.0, 0.0, 0.0], &[4.0, 0.0, 0.0], &[0.0, 4.0, 0.0], &[0.0, 0.0, 4.0]],
                    1.0,
                ),
                "origin plus three axis points at 4, unit covariances",
            ),
            "4c3d-hard" => (
                isotropic(
                    &[&[0.0, 0.0, 0.0], &[2.5, 0.0, 0.0], &[0.0, 2.5, 0.0], &[0.0, 0.0, 2.5]],
                    1.5,
                ),
                "origin plus three axis points at 2.5, covariances 1.5 I: heavy overlap",
            ),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown scenario '{other}' (built-ins: {})",
                    BUILTIN_SCENARIOS.join(", ")
                )))
            }
        };
        Self::new(name, params, DEFAULT_POINTS_PER_CLUSTER, note)
    }

    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let params = GmmParams::from_records(&spec.components, 0.0)?;
        Self::new(spec.name.clone(), params, spec.points_per_cluster, spec.overlap_note.clone())
    }

    pub fn to_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: self.name.clone(),
            components: self.true_params.to_records(),
            points_per_cluster: self.points_per_cluster,
            overlap_note: self.overlap_note.clone(),
        }
    }

    pub fn with_points_per_cluster(mut self, points_per_cluster: usize) -> Result<Self> {
        if points_per_cluster == 0 {
            return Err(Error::InvalidConfig("points_per_cluster must be >= 1".into()));
        }
        self.points_per_cluster = points_per_cluster;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.true_params.dim()
    }

    pub fn k(&self) -> usize {
        self.true_params.k()
    }

    pub fn true_means(&self) -> Array2<f64> {
        self.true_params.means()
    }

    /// Points drawn for each component: `max(1, round(ppc · K · w_j))`.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let scale = (self.points_per_cluster * self.k()) as f64;
        self.true_params
            .weights()
            .iter()
            .map(|w| ((scale * w).round() as usize).max(1))
            .collect()
    }
}

fn draw_mvn<R: Rng>(
    rng: &mut R,
    mean: ArrayView1<'_, f64>,
    factor: ArrayView2<'_, f64>,
    count: usize,
) -> Array2<f64> {
    let d = mean.len();
    let mut out = Array2::zeros((count, d));
    let mut z = vec![0.0; d];
    for mut row in out.outer_iter_mut() {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for a in 0..d {
            let mut s = mean[a];
            for b in 0..=a {
                s += factor[[a, b]] * z[b];
            }
            row[a] = s;
        }
    }
    out
}

/// `count` draws of `mean + L·z` with `L` the Cholesky factor of `covariance`.
pub fn sample_mvn(
    mean: ArrayView1<'_, f64>,
    covariance: ArrayView2<'_, f64>,
    count: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    if covariance.dim() != (mean.len(), mean.len()) {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: covariance.nrows(),
        });
    }
    let factor = cholesky_factor(covariance)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(draw_mvn(&mut rng, mean, factor.view(), count))
}

/// Labeled sample from the scenario mixture, order shuffled by `seed`.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sizes = scenario.cluster_sizes();
    let n: usize = sizes.iter().sum();
    let d = scenario.dim();
    let mut rows: Vec<(Array1<f64>, usize)> = Vec::with_capacity(n);
    for (j, (comp, &count)) in scenario.true_params.components().iter().zip(&sizes).enumerate() {
        let block = draw_mvn(&mut rng, comp.mean(), comp.cholesky(), count);
        rows.extend(block.outer_iter().map(|r| (r.to_owned(), j)));
    }
    rows.shuffle(&mut rng);
    let points = Array2::from_shape_fn((n, d), |(i, a)| rows[i].0[a]);
    let labels = rows.iter().map(|r| r.1).collect();
    Dataset::with_labels(points, labels, scenario.k())
}
