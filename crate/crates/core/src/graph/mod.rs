//! Weighted undirected graphs and the datasets built from them.

mod dataset;
mod io;
mod perturb;
mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{Label, LabeledDataset};
pub use io::{load_graph, load_manifest, save_graph, write_dataset, GraphFile, ManifestRow};
pub use perturb::{perturb_missing, PerturbationSpec};
pub use synth::{generate_correlation_graph, generate_dataset, pearson, PlantSpec};

/// An undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Input edge for [`WeightedGraph::new`]; endpoints may be in either order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInput {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub attrs: Option<Vec<f64>>,
}

impl EdgeInput {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Self {
            u,
            v,
            weight,
            attrs: None,
        }
    }
}

/// An undirected graph with finite real edge weights and optional node and
/// edge attribute vectors.
///
/// Edges are kept in canonical order (sorted by `(min, max)` endpoint), and
/// adjacency lists are sorted by neighbour index, so everything computed
/// from a graph is independent of the order its edges were supplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_labels: Vec<String>,
    node_attrs: Option<Vec<Vec<f64>>>,
    edges: Vec<Edge>,
    edge_attrs: Option<Vec<Vec<f64>>>,
    // (neighbour, edge index), sorted by neighbour
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    pub fn new(
        node_labels: Vec<String>,
        node_attrs: Option<Vec<Vec<f64>>>,
        edges: Vec<EdgeInput>,
    ) -> Result<Self> {
        let n = node_labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "graph must have at least one node".into(),
            ));
        }
        if let Some(attrs) = &node_attrs {
            if attrs.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: attrs.len(),
                });
            }
            check_uniform("node", attrs.iter().map(Vec::len))?;
        }

        let with_attrs = edges.iter().filter(|e| e.attrs.is_some()).count();
        if with_attrs != 0 && with_attrs != edges.len() {
            let index = edges.iter().position(|e| e.attrs.is_none()).unwrap_or(0);
            let expected = edges
                .iter()
                .find_map(|e| e.attrs.as_ref().map(Vec::len))
                .unwrap_or(0);
            return Err(Error::RaggedAttributes {
                what: "edge",
                index,
                expected,
                found: 0,
            });
        }
        check_uniform(
            "edge",
            edges.iter().filter_map(|e| e.attrs.as_ref().map(Vec::len)),
        )?;

        let mut seen = HashSet::with_capacity(edges.len());
        let mut canon: Vec<(Edge, Option<Vec<f64>>)> = Vec::with_capacity(edges.len());
        for (index, e) in edges.into_iter().enumerate() {
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange {
                        index,
                        node,
                        node_count: n,
                    });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop { index, node: e.u });
            }
            if !e.weight.is_finite() {
                return Err(Error::NonFiniteWeight {
                    index,
                    u: e.u,
                    v: e.v,
                });
            }
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge {
                    index,
                    u: e.u,
                    v: e.v,
                });
            }
            canon.push((
                Edge {
                    u,
                    v,
                    weight: e.weight,
                },
                e.attrs,
            ));
        }
        canon.sort_by_key(|(e, _)| (e.u, e.v));

        let edge_attrs = if with_attrs > 0 {
            Some(
                canon
                    .iter_mut()
                    .map(|(_, a)| a.take().unwrap_or_default())
                    .collect(),
            )
        } else {
            None
        };
        let edges: Vec<Edge> = canon.into_iter().map(|(e, _)| e).collect();
        Ok(Self::assemble(node_labels, node_attrs, edges, edge_attrs))
    }

    /// Graph on `n` nodes labelled `"0"`, `"1"`, ... from `(u, v, weight)` triples.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            (0..n).map(|i| i.to_string()).collect(),
            None,
            edges
                .iter()
                .map(|&(u, v, w)| EdgeInput::new(u, v, w))
                .collect(),
        )
    }

    // `edges` must already be canonical and sorted.
    fn assemble(
        node_labels: Vec<String>,
        node_attrs: Option<Vec<Vec<f64>>>,
        edges: Vec<Edge>,
        edge_attrs: Option<Vec<Vec<f64>>>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); node_labels.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            node_labels,
            node_attrs,
            edges,
            edge_attrs,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// `(neighbour, edge index)` pairs, sorted by neighbour.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let list = self.adjacency.get(u)?;
        list.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|pos| list[pos].1)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.edge_index(u, v).map(|i| self.edges[i].weight)
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn node_label(&self, node: usize) -> &str {
        &self.node_labels[node]
    }

    pub fn node_attrs(&self) -> Option<&[Vec<f64>]> {
        self.node_attrs.as_deref()
    }

    pub fn node_attr(&self, node: usize) -> Option<&[f64]> {
        self.node_attrs.as_ref().map(|a| a[node].as_slice())
    }

    pub fn edge_attrs(&self) -> Option<&[Vec<f64>]> {
        self.edge_attrs.as_deref()
    }

    pub fn edge_attr(&self, edge: usize) -> Option<&[f64]> {
        self.edge_attrs.as_ref().map(|a| a[edge].as_slice())
    }

    /// Replaces node attributes (validated).
    pub fn with_node_attrs(mut self, attrs: Vec<Vec<f64>>) -> Result<Self> {
        if attrs.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                found: attrs.len(),
            });
        }
        check_uniform("node", attrs.iter().map(Vec::len))?;
        self.node_attrs = Some(attrs);
        Ok(self)
    }

    /// Replaces edge attributes; `attrs[i]` belongs to `self.edges()[i]`.
    pub fn with_edge_attrs(mut self, attrs: Vec<Vec<f64>>) -> Result<Self> {
        if attrs.len() != self.edge_count() {
            return Err(Error::LengthMismatch {
                expected: self.edge_count(),
                found: attrs.len(),
            });
        }
        check_uniform("edge", attrs.iter().map(Vec::len))?;
        self.edge_attrs = Some(attrs);
        Ok(self)
    }

    /// Copy with every edge weight replaced by `f(weight)`.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut edges = self.edges.clone();
        for (index, e) in edges.iter_mut().enumerate() {
            e.weight = f(e.weight);
            if !e.weight.is_finite() {
                return Err(Error::NonFiniteWeight {
                    index,
                    u: e.u,
                    v: e.v,
                });
            }
        }
        Ok(Self::assemble(
            self.node_labels.clone(),
            self.node_attrs.clone(),
            edges,
            self.edge_attrs.clone(),
        ))
    }

    /// Copy keeping only the edges for which `keep(edge index)` is true.
    pub fn retain_edges(&self, keep: impl Fn(usize) -> bool) -> Self {
        let kept: Vec<usize> = (0..self.edge_count()).filter(|&i| keep(i)).collect();
        let edges = kept.iter().map(|&i| self.edges[i]).collect();
        let edge_attrs = self
            .edge_attrs
            .as_ref()
            .map(|a| kept.iter().map(|&i| a[i].clone()).collect());
        Self::assemble(
            self.node_labels.clone(),
            self.node_attrs.clone(),
            edges,
            edge_attrs,
        )
    }

    /// Renumbers nodes: old node `i` becomes node `perm[i]`. Labels and
    /// attributes travel with their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let mut labels = vec![String::new(); n];
        for (i, l) in self.node_labels.iter().enumerate() {
            labels[perm[i]] = l.clone();
        }
        let node_attrs = self.node_attrs.as_ref().map(|a| {
            let mut out = vec![Vec::new(); n];
            for (i, x) in a.iter().enumerate() {
                out[perm[i]] = x.clone();
            }
            out
        });
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeInput {
                u: perm[e.u],
                v: perm[e.v],
                weight: e.weight,
                attrs: self.edge_attr(i).map(<[f64]>::to_vec),
            })
            .collect();
        Self::new(labels, node_attrs, edges)
    }
}

fn check_uniform(what: &'static str, dims: impl Iterator<Item = usize>) -> Result<()> {
    let mut expected = None;
    for (index, d) in dims.enumerate() {
        match expected {
            None => expected = Some(d),
            Some(e) if e != d => {
                return Err(Error::RaggedAttributes {
                    what,
                    index,
                    expected: e,
                    found: d,
                })
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_edge_order() {
        let a = WeightedGraph::from_edges(3, &[(2, 1, 0.5), (0, 1, 0.9)]).unwrap();
        let b = WeightedGraph::from_edges(3, &[(1, 0, 0.9), (1, 2, 0.5)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.edges()[0],
            Edge {
                u: 0,
                v: 1,
                weight: 0.9
            }
        );
        assert_eq!(a.weight(2, 1), Some(0.5));
        assert_eq!(a.weight(0, 2), None);
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(
            WeightedGraph::from_edges(4, &[(3, 3, 1.0)]),
            Err(Error::SelfLoop { node: 3, .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 1, f64::NAN)]),
            Err(Error::NonFiniteWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge { index: 1, .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, &[(0, 2, 1.0)]),
            Err(Error::NodeOutOfRange { node: 2, .. })
        ));
    }

    #[test]
    fn rejects_ragged_attributes() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            g.clone().with_node_attrs(vec![vec![1.0], vec![1.0, 2.0]]),
            Err(Error::RaggedAttributes { what: "node", .. })
        ));
        let mut e1 = EdgeInput::new(0, 1, 1.0);
        e1.attrs = Some(vec![1.0]);
        let e2 = EdgeInput::new(1, 2, 1.0);
        let labels = vec!["a".into(), "b".into(), "c".into()];
        assert!(matches!(
            WeightedGraph::new(labels, None, vec![e1, e2]),
            Err(Error::RaggedAttributes { what: "edge", .. })
        ));
    }

    #[test]
    fn permutation_moves_labels() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 0.9), (1, 2, 0.5)]).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.node_label(2), "0");
        assert_eq!(p.weight(2, 0), Some(0.9));
        assert_eq!(p.weight(0, 1), Some(0.5));
    }
}
