//! Depth-first ordinal patterns (DOPs).
//!
//! The DOP of a start node is built greedily: from the current node, step
//! to the unvisited neighbour with the largest edge weight strictly below
//! the previously traversed weight (no bound on the first step), breaking
//! ties by smallest node index, until no such neighbour exists.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::ordinal::OrdinalPattern;

/// Deepest greedy ordinal pattern from `start`. A node without neighbours
/// yields a zero-edge singleton.
pub fn construct_dop(g: &WeightedGraph, start: usize) -> Result<OrdinalPattern> {
    if start >= g.node_count() {
        return Err(Error::InvalidArgument(format!(
            "start node {start} out of range 0..{}",
            g.node_count()
        )));
    }
    let mut visited = vec![false; g.node_count()];
    visited[start] = true;
    let mut pattern = OrdinalPattern::singleton(start);
    let mut current = start;
    loop {
        let bound = pattern.last_weight();
        let mut best: Option<(f64, usize, usize)> = None;
        // neighbours are sorted by index, so `>` keeps the smallest on ties
        for &(next, edge) in g.neighbors(current) {
            let w = g.edge(edge).weight;
            if visited[next] || bound.is_some_and(|b| w >= b) {
                continue;
            }
            if best.is_none_or(|(bw, _, _)| w > bw) {
                best = Some((w, next, edge));
            }
        }
        let Some((w, next, edge)) = best else { break };
        visited[next] = true;
        pattern.push(next, edge, w);
        current = next;
    }
    Ok(pattern)
}

/// The DOP of every node of a graph.
#[derive(Debug, Clone)]
pub struct DopProfile<'g> {
    pub host: &'g WeightedGraph,
    pub per_node: Vec<OrdinalPattern>,
}

/// JSON view of one DOP: node labels and traversed weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DopRecord {
    pub start: usize,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl<'g> DopProfile<'g> {
    pub fn labels(&self, start: usize) -> Vec<&'g str> {
        let host = self.host;
        self.per_node[start]
            .nodes()
            .iter()
            .map(|&v| host.node_label(v))
            .collect()
    }

    pub fn records(&self) -> Vec<DopRecord> {
        self.per_node
            .iter()
            .enumerate()
            .map(|(start, p)| DopRecord {
                start,
                labels: self.labels(start).into_iter().map(str::to_owned).collect(),
                weights: p.weights().to_vec(),
            })
            .collect()
    }
}

pub fn build_profile(g: &WeightedGraph) -> DopProfile<'_> {
    let per_node = (0..g.node_count())
        .map(|v| construct_dop(g, v).expect("node index in range"))
        .collect();
    DopProfile { host: g, per_node }
}

/// A DOP prefix (as node labels) and how differently often it occurs in
/// the two classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminativePattern {
    pub labels: Vec<String>,
    pub score: f64,
    pub freq_a: f64,
    pub freq_b: f64,
}

/// Ranks DOP prefixes at `start_node` by `|freq_a - freq_b|`, where `freq`
/// is the fraction of a class's graphs whose DOP starts with the prefix.
/// Every prefix of length >= 2 seen in either class is a candidate. Ties
/// go to the longer prefix, then to the lexicographically smaller label
/// sequence.
pub fn mine_discriminative(
    profiles_a: &[DopProfile<'_>],
    profiles_b: &[DopProfile<'_>],
    start_node: usize,
    top_k: usize,
) -> Result<Vec<DiscriminativePattern>> {
    if profiles_a.is_empty() || profiles_b.is_empty() {
        return Err(Error::InvalidArgument(
            "both classes need at least one graph".into(),
        ));
    }
    let node_count = profiles_a[0].per_node.len();
    if profiles_a
        .iter()
        .chain(profiles_b)
        .any(|p| p.per_node.len() != node_count)
    {
        return Err(Error::InvalidArgument(
            "profiles differ in node count".into(),
        ));
    }
    if start_node >= node_count {
        return Err(Error::InvalidArgument(format!(
            "start node {start_node} out of range 0..{node_count}"
        )));
    }

    let mut counts: BTreeMap<Vec<&str>, [usize; 2]> = BTreeMap::new();
    for (class, profiles) in [profiles_a, profiles_b].into_iter().enumerate() {
        for profile in profiles {
            let seq = profile.labels(start_node);
            for len in 2..=seq.len() {
                counts.entry(seq[..len].to_vec()).or_default()[class] += 1;
            }
        }
    }

    let (na, nb) = (profiles_a.len() as f64, profiles_b.len() as f64);
    let mut ranked: Vec<DiscriminativePattern> = counts
        .into_iter()
        .map(|(labels, [ca, cb])| {
            let (freq_a, freq_b) = (ca as f64 / na, cb as f64 / nb);
            DiscriminativePattern {
                labels: labels.into_iter().map(str::to_owned).collect(),
                score: (freq_a - freq_b).abs(),
                freq_a,
                freq_b,
            }
        })
        .collect();
    ranked.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then(y.labels.len().cmp(&x.labels.len()))
            .then_with(|| x.labels.cmp(&y.labels))
    });
    ranked.truncate(top_k);
    Ok(ranked)
}
