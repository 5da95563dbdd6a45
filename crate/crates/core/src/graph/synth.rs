//! Synthetic functional-connectivity style networks.
//!
//! Each node gets an i.i.d. standard-normal time series. A [`PlantSpec`]
//! mixes one shared latent series into an ordered node subset with
//! loadings that taper along the order, so that pairwise correlations
//! among planted nodes decrease along the list and the greedy decreasing
//! walk from the first planted node tends to follow it. Edge weights are
//! the pairwise Pearson correlations of the final series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{EdgeInput, Label, LabeledDataset, WeightedGraph};
use crate::error::{Error, Result};

/// Ordered node subset receiving the shared latent signal, and its strength
/// in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub nodes: Vec<usize>,
    pub strength: f64,
}

impl PlantSpec {
    pub fn new(nodes: Vec<usize>, strength: f64) -> Self {
        Self { nodes, strength }
    }

    fn validate(&self, n_nodes: usize) -> Result<()> {
        if !(self.strength > 0.0 && self.strength <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "plant strength must be in (0, 1], got {}",
                self.strength
            )));
        }
        let mut seen = vec![false; n_nodes];
        for &v in &self.nodes {
            if v >= n_nodes || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!(
                    "plant nodes must be distinct and < {n_nodes}: {:?}",
                    self.nodes
                )));
            }
        }
        Ok(())
    }

    /// Loading of the latent signal at position `k` of the plant:
    /// `s * (1 - k * (1 - s))`, floored at zero. With `s = 1` every
    /// planted node carries the latent series verbatim.
    pub fn loading(&self, k: usize) -> f64 {
        let s = self.strength;
        (s * (1.0 - k as f64 * (1.0 - s))).max(0.0)
    }
}

/// Pearson correlation of two equal-length series; `0.0` when either is
/// constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let denom = (sxx * syy).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (sxy / denom).clamp(-1.0, 1.0)
    }
}

/// Complete graph on `n_nodes` nodes (labels `ROI_1..`) weighted by the
/// Pearson correlation of synthetic time series.
pub fn generate_correlation_graph(
    n_nodes: usize,
    n_timepoints: usize,
    planted: Option<&PlantSpec>,
    rng_seed: u64,
) -> Result<WeightedGraph> {
    if n_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 nodes, got {n_nodes}"
        )));
    }
    if n_timepoints < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 timepoints for a correlation, got {n_timepoints}"
        )));
    }
    let mut loadings = vec![0.0; n_nodes];
    if let Some(plant) = planted {
        plant.validate(n_nodes)?;
        for (k, &v) in plant.nodes.iter().enumerate() {
            loadings[v] = plant.loading(k);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let latent: Vec<f64> = (0..n_timepoints)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let series: Vec<Vec<f64>> = loadings
        .iter()
        .map(|&a| {
            let noise = (1.0 - a * a).max(0.0).sqrt();
            latent
                .iter()
                .map(|&z| {
                    let e: f64 = rng.sample(StandardNormal);
                    a * z + noise * e
                })
                .collect()
        })
        .collect();

    let mut edges = Vec::with_capacity(n_nodes * (n_nodes - 1) / 2);
    for u in 0..n_nodes {
        for v in u + 1..n_nodes {
            edges.push(EdgeInput::new(u, v, pearson(&series[u], &series[v])));
        }
    }
    WeightedGraph::new(
        (1..=n_nodes).map(|i| format!("ROI_{i}")).collect(),
        None,
        edges,
    )
}

/// `2 * n_per_class` graphs: samples `s0000..` carry label `+1` and the
/// first plant, followed by the `-1` samples with the second plant.
pub fn generate_dataset(
    n_per_class: usize,
    n_nodes: usize,
    n_timepoints: usize,
    class_plants: (&PlantSpec, &PlantSpec),
    rng_seed: u64,
) -> Result<LabeledDataset> {
    if n_per_class == 0 {
        return Err(Error::InvalidArgument(
            "n_per_class must be positive".into(),
        ));
    }
    if class_plants.0 == class_plants.1 {
        return Err(Error::IndistinguishableClasses);
    }
    let mut master = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut graphs = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (label, plant) in [(Label::Pos, class_plants.0), (Label::Neg, class_plants.1)] {
        for _ in 0..n_per_class {
            let seed: u64 = master.random();
            graphs.push(generate_correlation_graph(
                n_nodes,
                n_timepoints,
                Some(plant),
                seed,
            )?);
            labels.push(label);
        }
    }
    let ids = (0..graphs.len()).map(|i| format!("s{i:04}")).collect();
    LabeledDataset::new(graphs, labels, ids)
}
