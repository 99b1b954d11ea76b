use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::env::derived_rng;
use crate::env::equations::EquationTemplate;

use super::EvalError;

/// Equations (or any states) with a category label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub items: Vec<String>,
    pub labels: Vec<String>,
}

impl LabeledSet {
    /// Labels as dense indices, in order of first appearance.
    pub fn label_ids(&self) -> Vec<usize> {
        let mut ids: Vec<&str> = Vec::new();
        self.labels
            .iter()
            .map(|l| match ids.iter().position(|x| x == l) {
                Some(i) => i,
                None => {
                    ids.push(l);
                    ids.len() - 1
                }
            })
            .collect()
    }
}

fn check_labels(labels: &[usize]) -> Result<(), EvalError> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(EvalError::DegenerateSet("need at least two categories".into()));
    }
    if counts.values().any(|&c| c < 2) {
        return Err(EvalError::DegenerateSet("every category needs two items".into()));
    }
    Ok(())
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Leave-one-out nearest neighbour of every item; `dist` is symmetric and
/// ties go to the lower index.
fn nearest(n: usize, dist: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    (0..n)
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for j in (0..n).filter(|&j| j != i) {
                let d = dist(i, j);
                if best == usize::MAX || d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn accuracy(labels: &[usize], nn: &[usize]) -> f64 {
    let hits = nn.iter().enumerate().filter(|&(i, &j)| labels[i] == labels[j]).count();
    hits as f64 / labels.len() as f64
}

/// Leave-one-out 1-NN accuracy under an arbitrary distance.
pub fn knn_accuracy(labels: &[usize], dist: &dyn Fn(usize, usize) -> f64) -> Result<f64, EvalError> {
    check_labels(labels)?;
    Ok(accuracy(labels, &nearest(labels.len(), dist)))
}

pub fn edit_distance_knn(set: &LabeledSet) -> Result<f64, EvalError> {
    let items = &set.items;
    knn_accuracy(&set.label_ids(), &|i, j| levenshtein(&items[i], &items[j]) as f64)
}

/// 1-NN by cosine similarity between embedding rows.
pub fn embedding_knn(embeddings: &Array2<f64>, labels: &[usize]) -> Result<f64, EvalError> {
    if embeddings.nrows() != labels.len() {
        return Err(EvalError::DegenerateSet("one embedding per label required".into()));
    }
    let rows: Vec<Vec<f64>> = embeddings.rows().into_iter().map(|r| r.to_vec()).collect();
    knn_accuracy(labels, &|i, j| -cosine_similarity(&rows[i], &rows[j]))
}

/// Mean leave-one-out accuracy after shuffling labels, keeping each item's
/// nearest neighbour under `dist` fixed.
pub fn shuffled_label_chance(
    labels: &[usize],
    dist: &dyn Fn(usize, usize) -> f64,
    shuffles: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    check_labels(labels)?;
    let nn = nearest(labels.len(), dist);
    let mut shuffled = labels.to_vec();
    let mut total = 0.0;
    for k in 0..shuffles {
        let mut rng = derived_rng(seed, 21, k as u64);
        shuffled.shuffle(&mut rng);
        total += accuracy(&shuffled, &nn);
    }
    Ok(total / shuffles.max(1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// `[n, dims]` projections of the centred data.
    pub coords: Array2<f64>,
    /// Variance along each kept component, largest first.
    pub explained_variance: Vec<f64>,
    /// Variance along every component, largest first.
    pub all_variances: Vec<f64>,
}

/// Projects mean-centred rows onto the top `dims` principal components.
/// Each component is signed so its largest-magnitude projection is positive.
pub fn pca_project(data: &Array2<f64>, dims: usize) -> Result<Pca, EvalError> {
    let (n, d) = data.dim();
    if n < dims + 1 {
        return Err(EvalError::DegenerateSet(format!("{n} vectors cannot span {dims} components")));
    }
    let mean = data.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let centred = data - &mean;
    let m = DMatrix::from_fn(n, d, |i, j| centred[[i, j]]);
    let cov = (m.transpose() * &m) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let all_variances: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let mut coords = Array2::zeros((n, dims.min(d)));
    for (c, &k) in order.iter().take(dims).enumerate() {
        let v = eig.eigenvectors.column(k);
        let proj: Vec<f64> = (0..n)
            .map(|i| (0..d).map(|j| centred[[i, j]] * v[j]).sum())
            .collect();
        let pivot = proj
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (i, p) in proj.into_iter().enumerate() {
            coords[[i, c]] = sign * p;
        }
    }
    Ok(Pca {
        coords,
        explained_variance: all_variances[..dims.min(d)].to_vec(),
        all_variances,
    })
}

const SYNTHETIC_CATEGORIES: [(&str, usize, &[&str]); 4] = [
    ("one-step-add", 11, &["(x + ?) = ?", "(x - ?) = ?", "(? + x) = ?"]),
    ("one-step-mul", 11, &["?x = ?", "(x / ?) = ?"]),
    ("two-step", 11, &["(?x + ?) = ?", "(?x - ?) = ?", "((x / ?) + ?) = ?"]),
    ("both-sides", 9, &["(?x + ?) = (?x + ?)", "(?x - ?) = (?x + ?)"]),
];

/// A generated stand-in for a curated set of textbook equations in four
/// sections of 11, 11, 11 and 9 items. Not real course data.
pub fn synthetic_equation_set(seed: u64) -> LabeledSet {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (c, (label, size, templates)) in SYNTHETIC_CATEGORIES.iter().enumerate() {
        let templates: Vec<EquationTemplate> = templates
            .iter()
            .map(|t| EquationTemplate::new(t).expect("valid template"))
            .collect();
        let mut rng = derived_rng(seed, 31, c as u64);
        let mut k = 0;
        while k < *size {
            let t = &templates[k % templates.len()];
            let eq = t.sample(&mut rng).to_string();
            if seen.insert(eq.clone()) {
                items.push(eq);
                labels.push(label.to_string());
                k += 1;
            }
        }
    }
    LabeledSet { items, labels }
}

/// Reads `equation,label` rows (with a header line).
pub fn load_labeled_csv(path: &Path) -> Result<LabeledSet, EvalError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| EvalError::Io(e.to_string()))?;
    let mut set = LabeledSet {
        items: Vec::new(),
        labels: Vec::new(),
    };
    for row in reader.records() {
        let row = row.map_err(|e| EvalError::Io(e.to_string()))?;
        let (Some(item), Some(label)) = (row.get(0), row.get(1)) else {
            return Err(EvalError::Io(format!("expected equation,label in {path:?}")));
        };
        set.items.push(item.to_string());
        set.labels.push(label.to_string());
    }
    Ok(set)
}
