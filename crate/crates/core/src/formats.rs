//! Plain-text dataset and figure-data files.
//!
//! Dataset file:
//!
//! ```text
//! dim=<d> n=<n> K=<K>
//! <x_1> … <x_d> [<label>]
//! ```
//!
//! `K=0` marks an unlabeled dataset. Figure data has one `#` header line
//! followed by `n + 3K` rows of `<x_1> … <x_d> <role> <label>` where role is
//! `point`, `star` (true mean), `plus` (initial mean) or `fitted`.
//! Coordinates are written with 17 significant digits, so a read-back
//! reproduces every value exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::model::Dataset;

fn push_coords(out: &mut String, row: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:.16e}").expect("writing to a String");
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, usize)> {
    let mut dim = None;
    let mut n = None;
    let mut k = None;
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field '{field}'")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::Parse(format!("bad header value '{field}'")))?;
        match key {
            "dim" => dim = Some(value),
            "n" => n = Some(value),
            "K" => k = Some(value),
            _ => return Err(Error::Parse(format!("unknown header key '{key}'"))),
        }
    }
    match (dim, n, k) {
        (Some(d), Some(n), Some(k)) => Ok((d, n, k)),
        _ => Err(Error::Parse(format!("header must be 'dim=<d> n=<n> K=<K>', got '{line}'"))),
    }
}

fn parse_num<T: FromStr>(token: &str, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse '{token}'")))
}

/// Renders a dataset; `clusters` is written as `K` (0 when unlabeled).
pub fn dataset_to_string(data: &Dataset, clusters: usize) -> String {
    let k = if data.true_labels().is_some() { clusters } else { 0 };
    let mut out = format!("dim={} n={} K={}\n", data.dim(), data.len(), k);
    for (i, row) in data.points().outer_iter().enumerate() {
        push_coords(&mut out, row.iter().copied());
        if let Some(labels) = data.true_labels() {
            write!(out, " {}", labels[i]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<(Dataset, usize)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty dataset file".into()))?;
    let (d, n, k) = parse_header(header)?;
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut rows = 0;
    for (idx, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let expected = if k > 0 { d + 1 } else { d };
        if tokens.len() != expected {
            return Err(Error::Parse(format!(
                "line {}: expected {expected} fields, got {}",
                idx + 1,
                tokens.len()
            )));
        }
        for t in &tokens[..d] {
            values.push(parse_num::<f64>(t, idx + 1)?);
        }
        if k > 0 {
            labels.push(parse_num::<usize>(tokens[d], idx + 1)?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("header declares n={n}, found {rows} rows")));
    }
    let points = Array2::from_shape_vec((n, d), values).map_err(|e| Error::Parse(e.to_string()))?;
    let data = if k > 0 {
        Dataset::with_labels(points, labels, k)?
    } else {
        Dataset::new(points)?
    };
    Ok((data, k))
}

pub fn write_dataset(path: &Path, data: &Dataset, clusters: usize) -> Result<()> {
    fs::write(path, dataset_to_string(data, clusters))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<(Dataset, usize)> {
    parse_dataset(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureRole {
    Point,
    Star,
    Plus,
    Fitted,
}

impl FigureRole {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureRole::Point => "point",
            FigureRole::Star => "star",
            FigureRole::Plus => "plus",
            FigureRole::Fitted => "fitted",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(FigureRole::Point),
            "star" => Ok(FigureRole::Star),
            "plus" => Ok(FigureRole::Plus),
            "fitted" => Ok(FigureRole::Fitted),
            other => Err(Error::Parse(format!("unknown figure role '{other}'"))),
        }
    }
}

/// Everything needed to redraw one trial's scatter plot.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub points: Array2<f64>,
    pub labels: Vec<usize>,
    pub true_means: Array2<f64>,
    pub initial_means: Array2<f64>,
    pub fitted_means: Array2<f64>,
}

impl FigureData {
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn rows(&self) -> Vec<(Vec<f64>, FigureRole, usize)> {
        let mut rows = Vec::new();
        for (row, &l) in self.points.outer_iter().zip(&self.labels) {
            rows.push((row.to_vec(), FigureRole::Point, l));
        }
        let blocks: [(ArrayView2<'_, f64>, FigureRole); 3] = [
            (self.true_means.view(), FigureRole::Star),
            (self.initial_means.view(), FigureRole::Plus),
            (self.fitted_means.view(), FigureRole::Fitted),
        ];
        for (block, role) in blocks {
            for (j, row) in block.outer_iter().enumerate() {
                rows.push((row.to_vec(), role, j));
            }
        }
        rows
    }

    pub fn to_text(&self) -> String {
        let d = self.dim();
        let mut out = String::from("#");
        for a in 0..d {
            write!(out, " x{a}").expect("writing to a String");
        }
        out.push_str(" role label\n");
        for (coords, role, label) in self.rows() {
            push_coords(&mut out, coords);
            writeln!(out, " {} {label}", role.as_str()).expect("writing to a String");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut d = None;
        let mut groups: [Vec<(Vec<f64>, usize)>; 4] = Default::default();
        for (idx, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(Error::Parse(format!("line {}: too few fields", idx + 1)));
            }
            let dim = tokens.len() - 2;
            if *d.get_or_insert(dim) != dim {
                return Err(Error::Parse(format!("line {}: inconsistent dimension", idx + 1)));
            }
            let coords = tokens[..dim]
                .iter()
                .map(|t| parse_num::<f64>(t, idx + 1))
                .collect::<Result<Vec<_>>>()?;
            let role = FigureRole::parse(tokens[dim])?;
            let label = parse_num::<usize>(tokens[dim + 1], idx + 1)?;
            groups[role as usize].push((coords, label));
        }
        let d = d.ok_or_else(|| Error::Parse("figure file has no rows".into()))?;
        let to_matrix = |rows: &[(Vec<f64>, usize)]| {
            Array2::from_shape_fn((rows.len(), d), |(i, a)| rows[i].0[a])
        };
        Ok(Self {
            points: to_matrix(&groups[0]),
            labels: groups[0].iter().map(|r| r.1).collect(),
            true_means: to_matrix(&groups[1]),
            initial_means: to_matrix(&groups[2]),
            fitted_means: to_matrix(&groups[3]),
        })
    }
}
