use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Fraction of edges to delete and the seed that picks them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub missing_rate: f64,
    pub rng_seed: u64,
}

impl PerturbationSpec {
    pub fn new(missing_rate: f64, rng_seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&missing_rate) {
            return Err(Error::InvalidArgument(format!(
                "missing rate must lie in [0, 1], got {missing_rate}"
            )));
        }
        Ok(Self {
            missing_rate,
            rng_seed,
        })
    }

    /// Number of edges removed from a graph with `edge_count` edges.
    pub fn removed_count(&self, edge_count: usize) -> usize {
        ((self.missing_rate * edge_count as f64).round() as usize).min(edge_count)
    }
}

/// Deletes `round(missing_rate * |E|)` edges chosen uniformly without
/// replacement. Nodes, labels and attributes are kept.
pub fn perturb_missing(g: &WeightedGraph, spec: &PerturbationSpec) -> Result<WeightedGraph> {
    let spec = PerturbationSpec::new(spec.missing_rate, spec.rng_seed)?;
    let m = g.edge_count();
    let k = spec.removed_count(m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut removed = vec![false; m];
    for i in rand::seq::index::sample(&mut rng, m, k) {
        removed[i] = true;
    }
    Ok(g.retain_edges(|i| !removed[i]))
}
