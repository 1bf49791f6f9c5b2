//! Initial parameters for EM: random data points, K-means, or K-medoids.
//!
//! Both hard clusterers start from `K` distinct points drawn uniformly
//! without replacement. K-means runs plain Lloyd iterations on squared
//! Euclidean distance; K-medoids alternates nearest-medoid assignment with
//! the in-cluster medoid update on plain Euclidean distance.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, GaussianComponent, GmmParams, DEFAULT_RIDGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InitKind {
    #[serde(alias = "random")]
    Random,
    #[serde(alias = "kmeans", alias = "k-means")]
    KMeans,
    #[serde(alias = "kmedoids", alias = "k-medoids")]
    KMedoids,
}

impl InitKind {
    pub const ALL: [InitKind; 3] = [InitKind::Random, InitKind::KMeans, InitKind::KMedoids];

    pub fn name(self) -> &'static str {
        match self {
            InitKind::Random => "Random",
            InitKind::KMeans => "KMeans",
            InitKind::KMedoids => "KMedoids",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "random" => Ok(InitKind::Random),
            "kmeans" => Ok(InitKind::KMeans),
            "kmedoids" => Ok(InitKind::KMedoids),
            _ => Err(Error::InvalidConfig(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitStrategy {
    pub kind: InitKind,
    pub seed: u64,
    pub kmeans_max_iters: usize,
    pub kmedoids_max_iters: usize,
}

impl InitStrategy {
    pub fn new(kind: InitKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            kmeans_max_iters: 300,
            kmedoids_max_iters: 300,
        }
    }
}

/// Result of K-means or K-medoids.
#[derive(Debug, Clone, PartialEq)]
pub struct HardClustering {
    /// `K × d` means or medoids.
    pub centers: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Objective at `centers`/`assignments`: squared distances for K-means,
    /// plain distances for K-medoids.
    pub inertia: f64,
    /// Objective after each assignment step, then the final value.
    pub objective_history: Vec<f64>,
    /// Data indices of the medoids (K-medoids only).
    pub medoids: Option<Vec<usize>>,
    pub iterations: usize,
    pub converged: bool,
}

impl HardClustering {
    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    /// Steps where the objective increased by more than `slack`.
    pub fn objective_increases(&self, slack: f64) -> usize {
        self.objective_history
            .windows(2)
            .filter(|w| w[1] > w[0] + slack * (1.0 + w[0].abs()))
            .count()
    }
}

/// Output of [`initialize`]: the starting mixture and, for the hard
/// clusterers, the clustering it came from.
#[derive(Debug, Clone)]
pub struct Initialization {
    pub params: GmmParams,
    pub clustering: Option<HardClustering>,
}

fn check_k(data: &Dataset, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    if data.len() < k {
        return Err(Error::TooFewPoints { n: data.len(), k });
    }
    Ok(())
}

fn sample_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    index::sample(&mut rng, n, k).into_vec()
}

fn gather(data: &Dataset, indices: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((indices.len(), data.dim()), |(j, a)| data.point(indices[j])[a])
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    sq_dist(a, b).sqrt()
}

fn pooled_component(data: &Dataset, mean: Array1<f64>, weight: f64) -> Result<GaussianComponent> {
    GaussianComponent::regularized(mean, data.covariance(), weight, DEFAULT_RIDGE)
}

/// Means at `K` distinct data points, pooled covariance, uniform weights.
pub fn init_random(data: &Dataset, k: usize, seed: u64) -> Result<GmmParams> {
    check_k(data, k)?;
    let components = sample_indices(data.len(), k, seed)
        .into_iter()
        .map(|i| pooled_component(data, data.point(i).to_owned(), 1.0 / k as f64))
        .collect::<Result<Vec<_>>>()?;
    GmmParams::normalized(components)
}

/// Nearest center per point; ties go to the lowest index.
fn assign(points: ArrayView2<'_, f64>, centers: ArrayView2<'_, f64>, metric: fn(ArrayView1<'_, f64>, ArrayView1<'_, f64>) -> f64) -> Vec<usize> {
    points
        .outer_iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (j, c) in centers.outer_iter().enumerate() {
                let d = metric(x, c);
                if d < best.0 {
                    best = (d, j);
                }
            }
            best.1
        })
        .collect()
}

fn objective(
    points: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    assignments: &[usize],
    metric: fn(ArrayView1<'_, f64>, ArrayView1<'_, f64>) -> f64,
) -> f64 {
    points
        .outer_iter()
        .zip(assignments)
        .map(|(x, &j)| metric(x, centers.row(j)))
        .sum()
}

/// Moves the farthest point of a multi-member cluster into each empty
/// cluster as a singleton. Returns `(cluster, point)` pairs applied.
fn repair_empty(
    points: ArrayView2<'_, f64>,
    centers: &mut Array2<f64>,
    assignments: &mut [usize],
    metric: fn(ArrayView1<'_, f64>, ArrayView1<'_, f64>) -> f64,
) -> Vec<(usize, usize)> {
    let k = centers.nrows();
    let mut repaired = Vec::new();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            break;
        };
        let mut far = (f64::NEG_INFINITY, usize::MAX);
        for (i, x) in points.outer_iter().enumerate() {
            if sizes[assignments[i]] < 2 {
                continue;
            }
            let d = metric(x, centers.row(assignments[i]));
            if d > far.0 {
                far = (d, i);
            }
        }
        // n >= K guarantees a multi-member cluster whenever one is empty
        let i = far.1;
        assignments[i] = empty;
        centers.row_mut(empty).assign(&points.row(i));
        repaired.push((empty, i));
    }
    repaired
}

fn cluster_means(points: ArrayView2<'_, f64>, assignments: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, points.ncols()));
    let mut counts = vec![0usize; k];
    for (x, &j) in points.outer_iter().zip(assignments) {
        sums.row_mut(j).scaled_add(1.0, &x);
        counts[j] += 1;
    }
    for (j, &c) in counts.iter().enumerate() {
        sums.row_mut(j).mapv_inplace(|v| v / c as f64);
    }
    sums
}

/// Lloyd's K-means from `K` seeded distinct data points.
pub fn k_means(data: &Dataset, k: usize, seed: u64, max_iters: usize) -> Result<HardClustering> {
    check_k(data, k)?;
    let init = gather(data, &sample_indices(data.len(), k, seed));
    k_means_from(data, init, max_iters)
}

/// Lloyd's K-means from explicit initial centers. Stops once the
/// assignment of every point is unchanged between rounds.
pub fn k_means_from(data: &Dataset, initial_centers: Array2<f64>, max_iters: usize) -> Result<HardClustering> {
    let k = initial_centers.nrows();
    check_k(data, k)?;
    if initial_centers.ncols() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: initial_centers.ncols(),
        });
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
    }
    let points = data.points();
    let mut centers = initial_centers;
    let mut previous: Option<Vec<usize>> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut assignments = Vec::new();
    while iterations < max_iters {
        iterations += 1;
        assignments = assign(points, centers.view(), sq_dist);
        repair_empty(points, &mut centers, &mut assignments, sq_dist);
        history.push(objective(points, centers.view(), &assignments, sq_dist));
        if previous.as_ref() == Some(&assignments) {
            converged = true;
            break;
        }
        centers = cluster_means(points, &assignments, k);
        previous = Some(assignments.clone());
    }
    let inertia = objective(points, centers.view(), &assignments, sq_dist);
    history.push(inertia);
    // count update rounds; the confirming round does not move anything
    let iterations = iterations - usize::from(converged);
    Ok(HardClustering {
        centers,
        assignments,
        inertia,
        objective_history: history,
        medoids: None,
        iterations,
        converged,
    })
}

/// K-medoids from `K` seeded distinct data points.
pub fn k_medoids(data: &Dataset, k: usize, seed: u64, max_iters: usize) -> Result<HardClustering> {
    check_k(data, k)?;
    k_medoids_from(data, sample_indices(data.len(), k, seed), max_iters)
}

/// K-medoids from explicit initial medoid indices. Each round assigns
/// points to their nearest medoid, then moves every medoid to the member
/// with the smallest total distance to its cluster. Stops once the medoid
/// set is unchanged.
pub fn k_medoids_from(data: &Dataset, initial: Vec<usize>, max_iters: usize) -> Result<HardClustering> {
    let k = initial.len();
    check_k(data, k)?;
    if let Some(&bad) = initial.iter().find(|&&i| i >= data.len()) {
        return Err(Error::InvalidConfig(format!("medoid index {bad} out of range")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
    }
    let points = data.points();
    let mut medoids = initial;
    let mut centers = gather(data, &medoids);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut assignments = Vec::new();
    while iterations < max_iters {
        iterations += 1;
        assignments = assign(points, centers.view(), dist);
        for (j, i) in repair_empty(points, &mut centers, &mut assignments, dist) {
            medoids[j] = i;
        }
        history.push(objective(points, centers.view(), &assignments, dist));

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &j) in assignments.iter().enumerate() {
            members[j].push(i);
        }
        let updated: Vec<usize> = members
            .iter()
            .zip(&medoids)
            .map(|(cluster, &current)| best_medoid(points, cluster, current))
            .collect();
        if updated == medoids {
            converged = true;
            break;
        }
        medoids = updated;
        centers = gather(data, &medoids);
    }
    let inertia = objective(points, centers.view(), &assignments, dist);
    history.push(inertia);
    let iterations = iterations - usize::from(converged);
    Ok(HardClustering {
        centers,
        assignments,
        inertia,
        objective_history: history,
        medoids: Some(medoids),
        iterations,
        converged,
    })
}

/// Member minimizing the summed distance to the cluster. The current medoid
/// wins ties so the iteration cannot cycle between equal-cost medoids.
fn best_medoid(points: ArrayView2<'_, f64>, cluster: &[usize], current: usize) -> usize {
    let cost = |c: usize| -> f64 {
        cluster
            .iter()
            .map(|&i| dist(points.row(c), points.row(i)))
            .sum()
    };
    let mut best = (f64::INFINITY, usize::MAX);
    for &c in cluster {
        let v = cost(c);
        if v < best.0 {
            best = (v, c);
        }
    }
    if cluster.contains(&current) && cost(current) <= best.0 {
        current
    } else {
        best.1
    }
}

/// Mean `= center_j`, covariance = the cluster's population covariance
/// (pooled covariance for clusters with fewer than `d + 1` members),
/// weight = cluster fraction.
pub fn clustering_to_gmm(data: &Dataset, clustering: &HardClustering) -> Result<GmmParams> {
    if clustering.assignments.len() != data.len() {
        return Err(Error::MismatchedShapes(format!(
            "{} assignments for {} points",
            clustering.assignments.len(),
            data.len()
        )));
    }
    if clustering.centers.ncols() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: clustering.centers.ncols(),
        });
    }
    let k = clustering.k();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &j) in clustering.assignments.iter().enumerate() {
        if j >= k {
            return Err(Error::LabelOutOfRange { label: j, clusters: k });
        }
        members[j].push(i);
    }
    let n = data.len() as f64;
    let pooled = data.covariance();
    let components = members
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            if idx.is_empty() {
                return Err(Error::DegenerateComponent { component: j, mass: 0.0 });
            }
            let cov = if idx.len() < data.dim() + 1 {
                pooled.clone()
            } else {
                data.subset_covariance(idx)
            };
            GaussianComponent::regularized(
                clustering.centers.row(j).to_owned(),
                cov,
                idx.len() as f64 / n,
                DEFAULT_RIDGE,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    GmmParams::normalized(components)
}

/// Builds the starting mixture for `strategy`.
pub fn initialize(data: &Dataset, k: usize, strategy: &InitStrategy) -> Result<Initialization> {
    match strategy.kind {
        InitKind::Random => Ok(Initialization {
            params: init_random(data, k, strategy.seed)?,
            clustering: None,
        }),
        InitKind::KMeans => {
            let clustering = k_means(data, k, strategy.seed, strategy.kmeans_max_iters)?;
            Ok(Initialization {
                params: clustering_to_gmm(data, &clustering)?,
                clustering: Some(clustering),
            })
        }
        InitKind::KMedoids => {
            let clustering = k_medoids(data, k, strategy.seed, strategy.kmedoids_max_iters)?;
            Ok(Initialization {
                params: clustering_to_gmm(data, &clustering)?,
                clustering: Some(clustering),
            })
        }
    }
}
