use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// Binary class label, written `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "+1",
            Label::Neg => "-1",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Label::Pos),
            "-1" => Ok(Label::Neg),
            other => Err(Error::InvalidArgument(format!(
                "label must be +1 or -1, got {other:?}"
            ))),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(serde::de::Error::custom(format!(
                "label must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// Graphs with binary labels and unique sample identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    graphs: Vec<WeightedGraph>,
    labels: Vec<Label>,
    ids: Vec<String>,
}

impl LabeledDataset {
    pub fn new(graphs: Vec<WeightedGraph>, labels: Vec<Label>, ids: Vec<String>) -> Result<Self> {
        let n = graphs.len();
        for found in [labels.len(), ids.len()] {
            if found != n {
                return Err(Error::LengthMismatch { expected: n, found });
            }
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate sample id {id:?}"
                )));
            }
        }
        Ok(Self {
            graphs,
            labels,
            ids,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[WeightedGraph] {
        &self.graphs
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&Label::Pos) && self.labels.contains(&Label::Neg)
    }

    /// Same graphs and ids with new labels.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Self::new(self.graphs.clone(), labels, self.ids.clone())
    }

    /// Applies `f` to every graph, keeping labels and ids.
    pub fn map_graphs(
        &self,
        f: impl Fn(usize, &WeightedGraph) -> Result<WeightedGraph>,
    ) -> Result<Self> {
        let graphs = self
            .graphs
            .iter()
            .enumerate()
            .map(|(i, g)| f(i, g))
            .collect::<Result<_>>()?;
        Ok(Self {
            graphs,
            labels: self.labels.clone(),
            ids: self.ids.clone(),
        })
    }

    /// Indices of the samples carrying `label`.
    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }
}
