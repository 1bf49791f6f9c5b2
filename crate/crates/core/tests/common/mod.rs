//! Independent scalar-arithmetic oracles. Nothing here calls into the
//! library's numerics; matrices are plain nested vectors and inverses and
//! determinants come from cofactor expansion.

#![allow(dead_code)]

use std::f64::consts::PI;

use emgmm::{Dataset, GaussianComponent, GmmParams, Responsibilities};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn det(m: &Mat) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("oracle supports d <= 3"),
    }
}

fn minor(m: &Mat, row: usize, col: usize) -> Mat {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| *v).collect())
        .collect()
}

/// Adjugate over determinant.
pub fn inverse(m: &Mat) -> Mat {
    let d = m.len();
    let det_m = det(m);
    if d == 1 {
        return vec![vec![1.0 / det_m]];
    }
    let mut inv = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[j][i] = sign * det(&minor(m, i, j)) / det_m;
        }
    }
    inv
}

pub fn gaussian_pdf(x: &[f64], mean: &[f64], cov: &Mat) -> f64 {
    let d = x.len();
    let inv = inverse(cov);
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let mut quad = 0.0;
    for a in 0..d {
        for b in 0..d {
            quad += diff[a] * inv[a][b] * diff[b];
        }
    }
    (-0.5 * quad).exp() / ((2.0 * PI).powi(d as i32) * det(cov)).sqrt()
}

pub fn gaussian_log_pdf(x: &[f64], mean: &[f64], cov: &Mat) -> f64 {
    let d = x.len();
    let inv = inverse(cov);
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let mut quad = 0.0;
    for a in 0..d {
        for b in 0..d {
            quad += diff[a] * inv[a][b] * diff[b];
        }
    }
    -0.5 * (d as f64 * (2.0 * PI).ln() + det(cov).ln() + quad)
}

/// Plain-vector copy of a mixture: (weight, mean, covariance) per component.
pub struct OracleMixture {
    pub parts: Vec<(f64, Vec<f64>, Mat)>,
}

impl OracleMixture {
    pub fn from_params(p: &GmmParams) -> Self {
        Self {
            parts: p
                .components()
                .iter()
                .map(|c| {
                    (
                        c.weight(),
                        c.mean().to_vec(),
                        c.covariance().outer_iter().map(|r| r.to_vec()).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn joint(&self, x: &[f64]) -> Vec<f64> {
        self.parts.iter().map(|(w, m, s)| w * gaussian_pdf(x, m, s)).collect()
    }

    pub fn log_likelihood(&self, points: &[Vec<f64>]) -> f64 {
        points.iter().map(|x| self.joint(x).iter().sum::<f64>().ln()).sum()
    }

    pub fn responsibilities(&self, points: &[Vec<f64>]) -> Mat {
        points
            .iter()
            .map(|x| {
                let j = self.joint(x);
                let total: f64 = j.iter().sum();
                j.iter().map(|v| v / total).collect()
            })
            .collect()
    }
}

/// Weighted moments by direct summation: (weight, mean, covariance) per column.
pub fn weighted_moments(points: &[Vec<f64>], gamma: &Mat) -> Vec<(f64, Vec<f64>, Mat)> {
    let n = points.len();
    let d = points[0].len();
    let k = gamma[0].len();
    (0..k)
        .map(|j| {
            let mass: f64 = (0..n).map(|i| gamma[i][j]).sum();
            let mut mean = vec![0.0; d];
            for i in 0..n {
                for a in 0..d {
                    mean[a] += gamma[i][j] * points[i][a];
                }
            }
            for v in mean.iter_mut() {
                *v /= mass;
            }
            let mut cov = vec![vec![0.0; d]; d];
            for i in 0..n {
                for a in 0..d {
                    for b in 0..d {
                        cov[a][b] += gamma[i][j] * (points[i][a] - mean[a]) * (points[i][b] - mean[b]);
                    }
                }
            }
            for row in cov.iter_mut() {
                for v in row.iter_mut() {
                    *v /= mass;
                }
            }
            (mass / n as f64, mean, cov)
        })
        .collect()
}

pub fn rows(data: &Dataset) -> Vec<Vec<f64>> {
    data.points().outer_iter().map(|r| r.to_vec()).collect()
}

pub fn to_mat(a: ndarray::ArrayView2<'_, f64>) -> Mat {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

/// Random SPD matrix `A Aᵀ + 0.5 I` with entries of `A` in [-1, 1].
pub fn random_spd<R: Rng>(rng: &mut R, d: usize) -> Array2<f64> {
    let a = Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0));
    let mut s = a.dot(&a.t()) + Array2::<f64>::eye(d) * 0.5;
    // exact symmetry
    for i in 0..d {
        for j in 0..i {
            s[[i, j]] = s[[j, i]];
        }
    }
    s
}

pub fn random_params<R: Rng>(rng: &mut R, k: usize, d: usize) -> GmmParams {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let comps = raw
        .iter()
        .map(|w| {
            let mean = Array1::from_shape_fn(d, |_| rng.random_range(-3.0..3.0));
            GaussianComponent::new(mean, random_spd(rng, d), w / total).unwrap()
        })
        .collect();
    GmmParams::normalized(comps).unwrap()
}

pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, d: usize) -> Dataset {
    Dataset::new(Array2::from_shape_fn((n, d), |_| rng.random_range(-4.0..4.0))).unwrap()
}

pub fn random_gamma<R: Rng>(rng: &mut R, n: usize, k: usize) -> Responsibilities {
    let mut g = Array2::from_shape_fn((n, k), |_| rng.random_range(0.05..1.0));
    for mut row in g.outer_iter_mut() {
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    Responsibilities::new(g).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
