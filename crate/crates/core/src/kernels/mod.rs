//! The DOP kernel and its building blocks.
//!
//! `k(G1, G2) = sum_{v in G1} sum_{u in G2} term(DOP(v), DOP(u))`
//!
//! where the term counts matched substructures of the two DOPs, either
//! equal-length sub-paths or agreeing positions (see [`MatchMode`]), each
//! weighted by the node and edge attribute kernels over its rank-aligned
//! nodes and edges (see [`dop_pair_term`]).

mod gram;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dop::{build_profile, DopProfile};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::ordinal::{sopi_kernel, OrdinalPattern};

pub use gram::{
    gram, gram_exact, gram_from_fn, psd_check, read_gram_text, symmetric_eigen_extremes,
    write_gram_text, write_libsvm, GramKind, GramMatrix, PsdDiagnostic,
};

/// Kernel on node or edge attribute vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKernel {
    Linear,
    Rbf {
        gamma: f64,
    },
    Delta,
    #[default]
    ConstantOne,
}

impl AttributeKernel {
    pub fn is_constant(&self) -> bool {
        matches!(self, AttributeKernel::ConstantOne)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AttributeKernel::Rbf { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => Err(
                Error::InvalidArgument(format!("rbf gamma must be positive, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if self.is_constant() {
            return Ok(1.0);
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(match self {
            AttributeKernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            AttributeKernel::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            AttributeKernel::Delta => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
            AttributeKernel::ConstantOne => 1.0,
        })
    }
}

impl fmt::Display for AttributeKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeKernel::Linear => f.write_str("linear"),
            AttributeKernel::Rbf { gamma } => write!(f, "rbf:{gamma}"),
            AttributeKernel::Delta => f.write_str("delta"),
            AttributeKernel::ConstantOne => f.write_str("one"),
        }
    }
}

/// Parses `linear`, `delta`, `one` or `rbf:<gamma>`.
impl FromStr for AttributeKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.trim() {
            "linear" => AttributeKernel::Linear,
            "delta" => AttributeKernel::Delta,
            "one" | "constant_one" | "none" => AttributeKernel::ConstantOne,
            other => match other.strip_prefix("rbf:") {
                Some(g) => AttributeKernel::Rbf {
                    gamma: g
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad rbf gamma {g:?}")))?,
                },
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown attribute kernel {other:?} (linear, delta, one, rbf:<gamma>)"
                    )))
                }
            },
        };
        k.validate()?;
        Ok(k)
    }
}

/// How two DOPs are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// `lambda * sum_k c_k(p) c_k(q)` with `c_k` the number of contiguous
    /// `k`-edge sub-paths: counts isomorphic sub-path pairs.
    Structural,
    /// `lambda *` number of positions where the two DOPs visit nodes with
    /// the same label.
    #[default]
    Positional,
}

impl FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structural" => Ok(MatchMode::Structural),
            "positional" => Ok(MatchMode::Positional),
            other => Err(Error::InvalidArgument(format!(
                "unknown match mode {other:?} (structural, positional)"
            ))),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Structural => "structural",
            MatchMode::Positional => "positional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub lambda: f64,
    pub match_mode: MatchMode,
    pub node_kernel: AttributeKernel,
    pub edge_kernel: AttributeKernel,
    pub normalize: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            match_mode: MatchMode::Positional,
            node_kernel: AttributeKernel::ConstantOne,
            edge_kernel: AttributeKernel::ConstantOne,
            normalize: false,
        }
    }
}

impl KernelConfig {
    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        self.node_kernel.validate()?;
        self.edge_kernel.validate()
    }
}

/// Checks that both graphs carry the attributes the kernels need, with
/// matching dimensions.
pub fn check_attributes(
    g1: &WeightedGraph,
    g2: &WeightedGraph,
    kv: &AttributeKernel,
    ke: &AttributeKernel,
) -> Result<()> {
    if !kv.is_constant() {
        let dims = [g1, g2].map(|g| g.node_attrs().map(|a| a.first().map_or(0, Vec::len)));
        match dims {
            [Some(a), Some(b)] if a != b => {
                return Err(Error::DimensionMismatch { left: a, right: b })
            }
            [Some(_), Some(_)] => {}
            _ => return Err(Error::MissingAttributes { what: "node" }),
        }
    }
    if !ke.is_constant() {
        let dims = [g1, g2].map(|g| {
            if g.edge_count() == 0 {
                // nothing to compare; an edgeless graph needs no edge attributes
                Some(None)
            } else {
                g.edge_attrs().map(|a| Some(a[0].len()))
            }
        });
        match dims {
            [Some(Some(a)), Some(Some(b))] if a != b => {
                return Err(Error::DimensionMismatch { left: a, right: b })
            }
            [Some(_), Some(_)] => {}
            _ => return Err(Error::MissingAttributes { what: "edge" }),
        }
    }
    Ok(())
}

/// Similarity of two DOPs under `cfg.match_mode`, without attributes.
pub fn match_dops(
    p_host: &WeightedGraph,
    p: &OrdinalPattern,
    q_host: &WeightedGraph,
    q: &OrdinalPattern,
    cfg: &KernelConfig,
) -> f64 {
    match cfg.match_mode {
        MatchMode::Structural => sopi_kernel(p, q, cfg.lambda),
        MatchMode::Positional => {
            let agree = p
                .nodes()
                .iter()
                .zip(q.nodes())
                .filter(|&(&a, &b)| p_host.node_label(a) == q_host.node_label(b))
                .count();
            cfg.lambda * agree as f64
        }
    }
}

/// `prod_t K_V(node_t(p), node_t(q)) * prod_t K_E(edge_t(p), edge_t(q))`
/// over positions present in both patterns. Attribute presence must have
/// been checked with [`check_attributes`].
pub fn attribute_factor(
    p_host: &WeightedGraph,
    p: &OrdinalPattern,
    q_host: &WeightedGraph,
    q: &OrdinalPattern,
    kv: &AttributeKernel,
    ke: &AttributeKernel,
) -> Result<f64> {
    aligned_factor(
        (p_host, p.nodes(), p.edge_ids()),
        (q_host, q.nodes(), q.edge_ids()),
        kv,
        ke,
    )
}

type Segment<'a> = (&'a WeightedGraph, &'a [usize], &'a [usize]);

fn aligned_factor(
    p: Segment<'_>,
    q: Segment<'_>,
    kv: &AttributeKernel,
    ke: &AttributeKernel,
) -> Result<f64> {
    let mut factor = 1.0;
    if !kv.is_constant() {
        for (&a, &b) in p.1.iter().zip(q.1) {
            let (Some(x), Some(y)) = (p.0.node_attr(a), q.0.node_attr(b)) else {
                return Err(Error::MissingAttributes { what: "node" });
            };
            factor *= kv.eval(x, y)?;
        }
    }
    if !ke.is_constant() {
        for (&a, &b) in p.2.iter().zip(q.2) {
            let (Some(x), Some(y)) = (p.0.edge_attr(a), q.0.edge_attr(b)) else {
                return Err(Error::MissingAttributes { what: "edge" });
            };
            factor *= ke.eval(x, y)?;
        }
    }
    Ok(factor)
}

/// One `(DOP(v), DOP(u))` term of the kernel with attributes folded into
/// the matched substructures.
///
/// Structural mode sums [`attribute_factor`] over every pair of equal-length
/// sub-paths; positional mode weights each agreeing position `t` by the
/// factor of the two prefixes ending at `t`. With constant-one kernels this
/// is exactly [`match_dops`].
pub fn dop_pair_term(
    p_host: &WeightedGraph,
    p: &OrdinalPattern,
    q_host: &WeightedGraph,
    q: &OrdinalPattern,
    cfg: &KernelConfig,
) -> Result<f64> {
    let (kv, ke) = (&cfg.node_kernel, &cfg.edge_kernel);
    if kv.is_constant() && ke.is_constant() {
        return Ok(match_dops(p_host, p, q_host, q, cfg));
    }
    let (pn, pe) = (p.nodes(), p.edge_ids());
    let (qn, qe) = (q.nodes(), q.edge_ids());
    let mut sum = 0.0;
    match cfg.match_mode {
        MatchMode::Structural => {
            for k in 1..=pe.len().min(qe.len()) {
                for a in 0..=pe.len() - k {
                    for b in 0..=qe.len() - k {
                        sum += aligned_factor(
                            (p_host, &pn[a..=a + k], &pe[a..a + k]),
                            (q_host, &qn[b..=b + k], &qe[b..b + k]),
                            kv,
                            ke,
                        )?;
                    }
                }
            }
        }
        MatchMode::Positional => {
            for t in 0..pn.len().min(qn.len()) {
                if p_host.node_label(pn[t]) == q_host.node_label(qn[t]) {
                    sum += aligned_factor(
                        (p_host, &pn[..=t], &pe[..t]),
                        (q_host, &qn[..=t], &qe[..t]),
                        kv,
                        ke,
                    )?;
                }
            }
        }
    }
    Ok(cfg.lambda * sum)
}

/// DOP kernel between two graphs.
pub fn dop_kernel(g1: &WeightedGraph, g2: &WeightedGraph, cfg: &KernelConfig) -> Result<f64> {
    cfg.validate()?;
    dop_kernel_profiles(&build_profile(g1), &build_profile(g2), cfg)
}

/// DOP kernel from precomputed profiles. Terms are accumulated in
/// `(i, j)` index order.
pub fn dop_kernel_profiles(
    a: &DopProfile<'_>,
    b: &DopProfile<'_>,
    cfg: &KernelConfig,
) -> Result<f64> {
    check_attributes(a.host, b.host, &cfg.node_kernel, &cfg.edge_kernel)?;
    let mut total = 0.0;
    for p in &a.per_node {
        for q in &b.per_node {
            total += dop_pair_term(a.host, p, b.host, q, cfg)?;
        }
    }
    Ok(total)
}
