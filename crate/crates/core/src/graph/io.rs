//! JSON graph files and CSV dataset manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EdgeInput, Label, LabeledDataset, WeightedGraph};
use crate::error::{Error, Result};

/// On-disk graph layout:
/// `{"nodes":[{"id":0,"label":"ROI_1","attrs":[..]}], "edges":[{"u":0,"v":1,"w":0.83,"attrs":[..]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attrs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub w: WeightValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attrs: Option<Vec<f64>>,
}

/// A weight is normally a JSON number; strings such as `"NaN"` are accepted
/// by the parser so that they can be rejected with a precise error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightValue {
    Number(f64),
    Text(String),
}

impl WeightValue {
    fn value(&self) -> f64 {
        match self {
            WeightValue::Number(x) => *x,
            WeightValue::Text(s) => s.trim().parse().unwrap_or(f64::NAN),
        }
    }
}

impl GraphFile {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let nodes = (0..g.node_count())
            .map(|id| NodeRecord {
                id,
                label: g.node_label(id).to_string(),
                attrs: g.node_attr(id).map(<[f64]>::to_vec),
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeRecord {
                u: e.u,
                v: e.v,
                w: WeightValue::Number(e.weight),
                attrs: g.edge_attr(i).map(<[f64]>::to_vec),
            })
            .collect();
        Self { nodes, edges }
    }

    pub fn into_graph(self) -> Result<WeightedGraph> {
        let n = self.nodes.len();
        let mut slots: Vec<Option<NodeRecord>> = vec![None; n];
        for rec in self.nodes {
            if rec.id >= n {
                return Err(Error::InvalidArgument(format!(
                    "node id {} out of range 0..{n}",
                    rec.id
                )));
            }
            let id = rec.id;
            if slots[id].replace(rec).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate node id {id}")));
            }
        }
        let nodes: Vec<NodeRecord> = slots
            .into_iter()
            .map(|s| s.expect("all ids seen"))
            .collect();
        let any_attrs = nodes.iter().any(|r| r.attrs.is_some());
        let mut labels = Vec::with_capacity(n);
        let mut attrs = Vec::with_capacity(n);
        for rec in nodes {
            if any_attrs && rec.attrs.is_none() {
                return Err(Error::RaggedAttributes {
                    what: "node",
                    index: rec.id,
                    expected: attrs.first().map(Vec::len).unwrap_or(0),
                    found: 0,
                });
            }
            labels.push(rec.label);
            attrs.push(rec.attrs.unwrap_or_default());
        }
        let edges = self
            .edges
            .into_iter()
            .map(|e| EdgeInput {
                u: e.u,
                v: e.v,
                weight: e.w.value(),
                attrs: e.attrs,
            })
            .collect();
        WeightedGraph::new(labels, any_attrs.then_some(attrs), edges)
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: GraphFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    file.into_graph().map_err(|e| match e {
        e @ (Error::Io { .. } | Error::Parse { .. }) => e,
        other => Error::parse(path, other),
    })
}

pub fn save_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text =
        serde_json::to_string(&GraphFile::from_graph(g)).map_err(|e| Error::parse(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One manifest row (`id,path,label`); `path` is relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub path: String,
    pub label: String,
}

/// Loads every graph listed in a manifest, in row order.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let header = reader.headers().map_err(|e| Error::parse(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "path", "label"] {
        return Err(Error::parse(
            path,
            "manifest header must be `id,path,label`",
        ));
    }
    let (mut graphs, mut labels, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    for row in reader.deserialize::<ManifestRow>() {
        let row = row.map_err(|e| Error::parse(path, e))?;
        let label = row
            .label
            .parse::<Label>()
            .map_err(|e| Error::parse(path, format!("row {:?}: {e}", row.id)))?;
        let gpath: PathBuf = base.join(&row.path);
        graphs.push(load_graph(&gpath)?);
        labels.push(label);
        ids.push(row.id);
    }
    LabeledDataset::new(graphs, labels, ids).map_err(|e| Error::parse(path, e))
}

/// Writes `graphs/<id>.json` for every sample plus `manifest.csv` under
/// `dir`, returning the manifest path.
pub fn write_dataset(ds: &LabeledDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let gdir = dir.join("graphs");
    fs::create_dir_all(&gdir).map_err(|e| Error::io(&gdir, e))?;
    let manifest = dir.join("manifest.csv");
    let mut writer = csv::Writer::from_path(&manifest).map_err(|e| Error::parse(&manifest, e))?;
    for ((g, label), id) in ds.graphs().iter().zip(ds.labels()).zip(ds.ids()) {
        let rel = format!("graphs/{id}.json");
        save_graph(g, dir.join(&rel))?;
        writer
            .serialize(ManifestRow {
                id: id.clone(),
                path: rel,
                label: label.to_string(),
            })
            .map_err(|e| Error::parse(&manifest, e))?;
    }
    writer.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}
