//! Ordinal patterns and the exact (exhaustive) ordinal-pattern kernels.
//!
//! An ordinal pattern is a simple path whose edge weights strictly decrease
//! along the path. Enumerating every such path is exponential in general,
//! so [`enumerate_patterns`] is bounded both by path length (`depth_cap`)
//! and by a pattern budget. These kernels are intended for small graphs and
//! as a reference for the DOP kernel in [`crate::kernels`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::kernels::{attribute_factor, check_attributes, AttributeKernel};

/// Default cap on the number of enumerated patterns per graph.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// A simple path with strictly decreasing edge weights, stored from its
/// heaviest edge to its lightest. A single node (zero edges) is allowed
/// and represents a start node with no admissible step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdinalPattern {
    nodes: Vec<usize>,
    edges: Vec<usize>,
    weights: Vec<f64>,
}

impl OrdinalPattern {
    pub fn singleton(node: usize) -> Self {
        Self {
            nodes: vec![node],
            edges: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Validates `nodes` as an ordinal pattern of `g`.
    pub fn from_nodes(g: &WeightedGraph, nodes: &[usize]) -> Result<Self> {
        let Some(&first) = nodes.first() else {
            return Err(Error::InvalidArgument("empty node sequence".into()));
        };
        if first >= g.node_count() {
            return Err(Error::InvalidArgument(format!("node {first} out of range")));
        }
        let mut pattern = Self::singleton(first);
        for &next in &nodes[1..] {
            let tail = *pattern.nodes.last().expect("non-empty");
            let edge = g.edge_index(tail, next).ok_or_else(|| {
                Error::InvalidArgument(format!("nodes {tail} and {next} are not adjacent"))
            })?;
            let w = g.edge(edge).weight;
            if pattern.nodes.contains(&next) {
                return Err(Error::InvalidArgument(format!("node {next} repeats")));
            }
            if pattern.weights.last().is_some_and(|&prev| w >= prev) {
                return Err(Error::InvalidArgument(format!(
                    "weights do not strictly decrease at ({tail}, {next})"
                )));
            }
            pattern.push(next, edge, w);
        }
        Ok(pattern)
    }

    pub(crate) fn push(&mut self, node: usize, edge: usize, weight: f64) {
        self.nodes.push(node);
        self.edges.push(edge);
        self.weights.push(weight);
    }

    fn pop(&mut self) {
        self.nodes.pop();
        self.edges.pop();
        self.weights.pop();
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Edge indices into the host graph, in path order.
    pub fn edge_ids(&self) -> &[usize] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn last_weight(&self) -> Option<f64> {
        self.weights.last().copied()
    }
}

/// All ordinal patterns of a graph up to `depth_cap` edges.
#[derive(Debug, Clone)]
pub struct OrdinalPatternSet<'g> {
    pub host: &'g WeightedGraph,
    pub patterns: Vec<OrdinalPattern>,
    pub depth_cap: usize,
}

impl OrdinalPatternSet<'_> {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// `histogram[k]` = number of patterns with `k` edges.
    pub fn length_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.depth_cap + 1];
        for p in &self.patterns {
            h[p.edge_count()] += 1;
        }
        h
    }
}

pub fn enumerate_patterns(g: &WeightedGraph, depth_cap: usize) -> Result<OrdinalPatternSet<'_>> {
    enumerate_patterns_with_budget(g, depth_cap, DEFAULT_BUDGET)
}

/// Every simple path of 1..=`depth_cap` edges with strictly decreasing
/// weights, each emitted once and oriented from its heaviest edge. Fails
/// with [`Error::BudgetExceeded`] as soon as more than `budget` patterns
/// have been found.
pub fn enumerate_patterns_with_budget(
    g: &WeightedGraph,
    depth_cap: usize,
    budget: usize,
) -> Result<OrdinalPatternSet<'_>> {
    if depth_cap == 0 {
        return Err(Error::InvalidArgument(
            "depth_cap must be at least 1".into(),
        ));
    }
    let mut out = Vec::new();
    let mut visited = vec![false; g.node_count()];
    for start in 0..g.node_count() {
        let mut path = OrdinalPattern::singleton(start);
        visited[start] = true;
        for &(next, edge) in g.neighbors(start) {
            let w = g.edge(edge).weight;
            path.push(next, edge, w);
            visited[next] = true;
            // A one-edge path has no orientation; keep the u < v copy.
            if start < next {
                emit(&mut out, &path, budget)?;
            }
            extend(g, depth_cap, budget, &mut path, &mut visited, &mut out)?;
            visited[next] = false;
            path.pop();
        }
        visited[start] = false;
    }
    Ok(OrdinalPatternSet {
        host: g,
        patterns: out,
        depth_cap,
    })
}

fn emit(out: &mut Vec<OrdinalPattern>, path: &OrdinalPattern, budget: usize) -> Result<()> {
    if out.len() >= budget {
        return Err(Error::BudgetExceeded { budget });
    }
    out.push(path.clone());
    Ok(())
}

fn extend(
    g: &WeightedGraph,
    depth_cap: usize,
    budget: usize,
    path: &mut OrdinalPattern,
    visited: &mut [bool],
    out: &mut Vec<OrdinalPattern>,
) -> Result<()> {
    if path.edge_count() >= depth_cap {
        return Ok(());
    }
    let tail = *path.nodes.last().expect("non-empty");
    let bound = path.last_weight().expect("at least one edge");
    for &(next, edge) in g.neighbors(tail) {
        let w = g.edge(edge).weight;
        if visited[next] || w >= bound {
            continue;
        }
        path.push(next, edge, w);
        visited[next] = true;
        emit(out, path, budget)?;
        extend(g, depth_cap, budget, path, visited, out)?;
        visited[next] = false;
        path.pop();
    }
    Ok(())
}

/// Two decreasing paths are order-isomorphic exactly when they have the
/// same number of edges: the i-th heaviest edge maps to the i-th heaviest.
pub fn is_isomorphic(p: &OrdinalPattern, q: &OrdinalPattern) -> bool {
    p.edge_count() == q.edge_count()
}

/// Number of pairs of equal-length contiguous sub-paths (with at least one
/// edge) of two paths with `a` and `b` edges: `sum_k (a-k+1)(b-k+1)`.
pub fn common_subpath_count(a: usize, b: usize) -> u64 {
    (1..=a.min(b))
        .map(|k| ((a - k + 1) * (b - k + 1)) as u64)
        .sum()
}

/// Sub-ordinal-pattern isomorphism kernel with uniform weight `lambda` per
/// isomorphic sub-path pair.
pub fn sopi_kernel(p: &OrdinalPattern, q: &OrdinalPattern, lambda: f64) -> f64 {
    lambda * common_subpath_count(p.edge_count(), q.edge_count()) as f64
}

/// Node count of `p` when the two patterns are isomorphic, the SOPI kernel
/// otherwise.
pub fn iso_count(p: &OrdinalPattern, q: &OrdinalPattern, lambda: f64) -> f64 {
    if is_isomorphic(p, q) {
        p.node_count() as f64
    } else {
        sopi_kernel(p, q, lambda)
    }
}

/// Exact ordinal-pattern kernel: `iso_count` summed over all pattern pairs.
pub fn op_kernel(
    g1: &WeightedGraph,
    g2: &WeightedGraph,
    depth_cap: usize,
    lambda: f64,
) -> Result<f64> {
    let s1 = enumerate_patterns(g1, depth_cap)?;
    let s2 = enumerate_patterns(g2, depth_cap)?;
    Ok(op_kernel_sets(&s1, &s2, lambda))
}

pub fn op_kernel_sets(s1: &OrdinalPatternSet<'_>, s2: &OrdinalPatternSet<'_>, lambda: f64) -> f64 {
    let mut total = 0.0;
    for p in &s1.patterns {
        for q in &s2.patterns {
            total += iso_count(p, q, lambda);
        }
    }
    total
}

/// Ordinal-pattern attribute kernel: each `iso_count` term is scaled by the
/// product of node and edge attribute kernels over the rank-aligned
/// correspondence of the two patterns.
pub fn opa_kernel(
    g1: &WeightedGraph,
    g2: &WeightedGraph,
    depth_cap: usize,
    lambda: f64,
    kv: &AttributeKernel,
    ke: &AttributeKernel,
) -> Result<f64> {
    let s1 = enumerate_patterns(g1, depth_cap)?;
    let s2 = enumerate_patterns(g2, depth_cap)?;
    opa_kernel_sets(&s1, &s2, lambda, kv, ke)
}

pub fn opa_kernel_sets(
    s1: &OrdinalPatternSet<'_>,
    s2: &OrdinalPatternSet<'_>,
    lambda: f64,
    kv: &AttributeKernel,
    ke: &AttributeKernel,
) -> Result<f64> {
    check_attributes(s1.host, s2.host, kv, ke)?;
    let mut total = 0.0;
    for p in &s1.patterns {
        for q in &s2.patterns {
            let factor = attribute_factor(s1.host, p, s2.host, q, kv, ke)?;
            total += iso_count(p, q, lambda) * factor;
        }
    }
    Ok(total)
}
