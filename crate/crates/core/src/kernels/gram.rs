use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{dop_kernel_profiles, KernelConfig, MatchMode};
use crate::dop::{build_profile, DopProfile};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{Label, LabeledDataset};
use crate::ordinal::{enumerate_patterns_with_budget, op_kernel_sets};

/// What produced a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum GramKind {
    Dop(KernelConfig),
    Exact {
        depth_cap: usize,
        lambda: f64,
        budget: usize,
        normalize: bool,
    },
}

/// Symmetric matrix of pairwise kernel values over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: DMatrix<f64>,
    sample_ids: Vec<String>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    kind: GramKind,
}

impl GramMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    pub fn kind(&self) -> &GramKind {
        &self.kind
    }

    pub fn psd(&self, rel_tol: f64) -> PsdDiagnostic {
        PsdDiagnostic::new(self.min_eigenvalue, self.max_eigenvalue, rel_tol)
    }
}

/// Extreme eigenvalues of a symmetric matrix and the PSD verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdDiagnostic {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub rel_tol: f64,
    pub psd: bool,
}

impl PsdDiagnostic {
    fn new(min: f64, max: f64, rel_tol: f64) -> Self {
        let scale = min.abs().max(max.abs());
        Self {
            min_eigenvalue: min,
            max_eigenvalue: max,
            rel_tol,
            psd: min >= -rel_tol * scale,
        }
    }
}

impl std::fmt::Display for PsdDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "min_eig={:e} max_eig={:e} psd={}",
            self.min_eigenvalue, self.max_eigenvalue, self.psd
        )
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::Asymmetric { i, j });
            }
        }
    }
    Ok(())
}

/// `(min, max)` eigenvalue of a symmetric matrix; `(0, 0)` when empty.
pub fn symmetric_eigen_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let eig = m.clone().symmetric_eigenvalues();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// PSD iff `min_eig >= -rel_tol * max|eig|`. Errors on asymmetric input.
pub fn psd_check(m: &DMatrix<f64>, rel_tol: f64) -> Result<PsdDiagnostic> {
    check_symmetric(m)?;
    let (min, max) = symmetric_eigen_extremes(m);
    Ok(PsdDiagnostic::new(min, max, rel_tol))
}

/// Builds a Gram matrix by evaluating `kernel(i, j)` for `i <= j` (in
/// parallel under [`Exec::Parallel`]) and mirroring. With `normalize`,
/// entries become `K(i,j) / sqrt(K(i,i) K(j,j))`, or 0 where a diagonal
/// entry is not positive.
pub fn gram_from_fn<F>(
    sample_ids: Vec<String>,
    kind: GramKind,
    normalize: bool,
    exec: Exec,
    kernel: F,
) -> Result<GramMatrix>
where
    F: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    let n = sample_ids.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values = exec.try_map(cells.len(), |c| {
        let (i, j) = cells[c];
        kernel(i, j).map_err(|e| Error::GramCell {
            i,
            j,
            source: Box::new(e),
        })
    })?;

    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &v) in cells.iter().zip(&values) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    if normalize {
        let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        for &(i, j) in &cells {
            let v = if diag[i] > 0.0 && diag[j] > 0.0 {
                if i == j {
                    1.0
                } else {
                    m[(i, j)] / (diag[i] * diag[j]).sqrt()
                }
            } else {
                0.0
            };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let (min_eigenvalue, max_eigenvalue) = symmetric_eigen_extremes(&m);
    Ok(GramMatrix {
        values: m,
        sample_ids,
        min_eigenvalue,
        max_eigenvalue,
        kind,
    })
}

/// DOP-kernel Gram matrix over a dataset.
pub fn gram(ds: &LabeledDataset, cfg: &KernelConfig, exec: Exec) -> Result<GramMatrix> {
    cfg.validate()?;
    let graphs = ds.graphs();
    let profiles = exec.map(graphs.len(), |i| build_profile(&graphs[i]));
    if cfg.match_mode == MatchMode::Positional
        && cfg.node_kernel.is_constant()
        && cfg.edge_kernel.is_constant()
    {
        let seqs = interned_label_sequences(&profiles);
        return gram_from_fn(
            ds.ids().to_vec(),
            GramKind::Dop(*cfg),
            cfg.normalize,
            exec,
            |i, j| Ok(positional_plain(&seqs[i], &seqs[j], cfg.lambda)),
        );
    }
    gram_from_fn(
        ds.ids().to_vec(),
        GramKind::Dop(*cfg),
        cfg.normalize,
        exec,
        |i, j| dop_kernel_profiles(&profiles[i], &profiles[j], cfg),
    )
}

/// Node-label sequence of every DOP, with labels mapped to dataset-wide ids.
fn interned_label_sequences(profiles: &[DopProfile<'_>]) -> Vec<Vec<Vec<u32>>> {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    profiles
        .iter()
        .map(|prof| {
            prof.per_node
                .iter()
                .map(|p| {
                    p.nodes()
                        .iter()
                        .map(|&v| {
                            let next = ids.len() as u32;
                            *ids.entry(prof.host.node_label(v)).or_insert(next)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Positional DOP kernel with constant attribute kernels. Performs the same
/// additions in the same order as [`dop_kernel_profiles`], so results agree
/// bit for bit.
fn positional_plain(a: &[Vec<u32>], b: &[Vec<u32>], lambda: f64) -> f64 {
    let mut total = 0.0;
    for p in a {
        for q in b {
            let agree = p.iter().zip(q).filter(|(x, y)| x == y).count();
            total += lambda * agree as f64;
        }
    }
    total
}

/// Gram matrix of the exact ordinal-pattern kernel (exponential; small
/// graphs only).
pub fn gram_exact(
    ds: &LabeledDataset,
    depth_cap: usize,
    lambda: f64,
    budget: usize,
    normalize: bool,
    exec: Exec,
) -> Result<GramMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let graphs = ds.graphs();
    let sets = exec.try_map(graphs.len(), |i| {
        enumerate_patterns_with_budget(&graphs[i], depth_cap, budget).map_err(|e| Error::GramCell {
            i,
            j: i,
            source: Box::new(e),
        })
    })?;
    gram_from_fn(
        ds.ids().to_vec(),
        GramKind::Exact {
            depth_cap,
            lambda,
            budget,
            normalize,
        },
        normalize,
        exec,
        |i, j| Ok(op_kernel_sets(&sets[i], &sets[j], lambda)),
    )
}

fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("ids.csv")
}

/// Writes `n` on the first line and one row per line (17 significant
/// digits), plus an `id,label` sidecar next to it (`<stem>.ids.csv`).
/// Returns the sidecar path.
pub fn write_gram_text(
    gram: &GramMatrix,
    labels: &[Label],
    path: impl AsRef<Path>,
) -> Result<PathBuf> {
    let path = path.as_ref();
    let n = gram.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_value(gram.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    let side = sidecar_path(path);
    let mut csv = String::from("id,label\n");
    for (id, label) in gram.sample_ids().iter().zip(labels) {
        let _ = writeln!(csv, "{id},{label}");
    }
    fs::write(&side, csv).map_err(|e| Error::io(&side, e))?;
    Ok(side)
}

pub fn read_gram_text(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let n: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, "first line must be the matrix size"))?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(path, format!("missing row {i}")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, format!("row {i}: {e}")))?;
        if row.len() != n {
            return Err(Error::parse(
                path,
                format!("row {i} has {} values, expected {n}", row.len()),
            ));
        }
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// LIBSVM precomputed-kernel rows: `<label> 0:<i> 1:<K(i,1)> ... n:<K(i,n)>`
/// with 1-based serial numbers.
pub fn write_libsvm(gram: &GramMatrix, labels: &[Label], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = gram.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        let _ = write!(out, "{label} 0:{}", i + 1);
        for j in 0..n {
            let _ = write!(out, " {}:{}", j + 1, fmt_value(gram.get(i, j)));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeInput, WeightedGraph};
    use crate::kernels::dop_kernel;

    fn tiny() -> LabeledDataset {
        let g1 = WeightedGraph::from_edges(3, &[(0, 1, 0.9), (1, 2, 0.4)]).unwrap();
        let g2 = WeightedGraph::from_edges(3, &[(0, 2, 0.9), (1, 2, 0.4), (0, 1, 0.1)]).unwrap();
        let g3 = WeightedGraph::from_edges(3, &[]).unwrap();
        LabeledDataset::new(
            vec![g1, g2, g3],
            vec![Label::Pos, Label::Neg, Label::Pos],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn interned_positional_path_matches_reference() {
        let graph = |labels: [&str; 3], edges: &[(usize, usize, f64)]| {
            let edges = edges
                .iter()
                .map(|&(u, v, w)| EdgeInput::new(u, v, w))
                .collect();
            WeightedGraph::new(labels.map(String::from).to_vec(), None, edges).unwrap()
        };
        let labelled = LabeledDataset::new(
            vec![
                graph(["x", "y", "z"], &[(0, 1, 0.9), (1, 2, 0.4)]),
                graph(["z", "x", "y"], &[(0, 2, 0.9), (1, 2, 0.4), (0, 1, 0.1)]),
                graph(["y", "y", "x"], &[(0, 1, 0.5), (0, 2, 0.7)]),
            ],
            vec![Label::Pos, Label::Neg, Label::Pos],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        for ds in [tiny(), labelled] {
            for lambda in [0.3, 1.0, 7.5] {
                let cfg = KernelConfig {
                    lambda,
                    match_mode: MatchMode::Positional,
                    ..Default::default()
                };
                let fast = gram(&ds, &cfg, Exec::Sequential).unwrap();
                let profiles: Vec<_> = ds.graphs().iter().map(build_profile).collect();
                for i in 0..ds.len() {
                    for j in i..ds.len() {
                        let slow = dop_kernel_profiles(&profiles[i], &profiles[j], &cfg).unwrap();
                        assert_eq!(fast.get(i, j).to_bits(), slow.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn psd_check_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(psd_check(&id, 1e-8).unwrap().psd);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let d = psd_check(&m, 1e-8).unwrap();
        assert!(!d.psd);
        assert!((d.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!((d.max_eigenvalue - 3.0).abs() < 1e-12);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(
            psd_check(&asym, 1e-8),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn single_graph_gram() {
        let ds = tiny();
        let one = LabeledDataset::new(
            vec![ds.graphs()[0].clone()],
            vec![Label::Pos],
            vec!["x".into()],
        )
        .unwrap();
        let cfg = KernelConfig::default();
        let g = gram(&one, &cfg, Exec::Sequential).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(
            g.get(0, 0),
            dop_kernel(&one.graphs()[0], &one.graphs()[0], &cfg).unwrap()
        );
        assert!(g.get(0, 0) >= 0.0);
    }

    #[test]
    fn normalized_diagonal() {
        let cfg = KernelConfig {
            normalize: true,
            ..Default::default()
        };
        let g = gram(&tiny(), &cfg, Exec::Sequential).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.get(i, i), 1.0);
        }
        // the edgeless graph still has positive positional self-similarity
        let structural = KernelConfig {
            match_mode: crate::kernels::MatchMode::Structural,
            normalize: true,
            ..Default::default()
        };
        let g = gram(&tiny(), &structural, Exec::Sequential).unwrap();
        assert_eq!(g.get(2, 2), 0.0);
        assert_eq!(g.get(0, 2), 0.0);
    }

    #[test]
    fn cell_errors_name_the_pair() {
        let cfg = KernelConfig {
            node_kernel: crate::kernels::AttributeKernel::Delta,
            ..Default::default()
        };
        let err = gram(&tiny(), &cfg, Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::GramCell { i: 0, j: 0, .. }), "{err}");
    }

    #[test]
    fn text_and_libsvm_formats() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny();
        let g = gram(
            &ds,
            &KernelConfig::default().with_lambda(0.1),
            Exec::Sequential,
        )
        .unwrap();
        let p = dir.path().join("gram.txt");
        let side = write_gram_text(&g, ds.labels(), &p).unwrap();
        assert_eq!(side, dir.path().join("gram.ids.csv"));
        assert_eq!(&read_gram_text(&p).unwrap(), g.values());
        assert_eq!(
            fs::read_to_string(&side).unwrap(),
            "id,label\na,+1\nb,-1\nc,+1\n"
        );

        let lp = dir.path().join("gram.libsvm");
        write_libsvm(&g, ds.labels(), &lp).unwrap();
        let text = fs::read_to_string(&lp).unwrap();
        let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
        assert_eq!(first[0], "+1");
        assert_eq!(first[1], "0:1");
        assert_eq!(first.len(), 2 + 3);
        assert_eq!(first[2].split_once(':').unwrap().0, "1");
        let v: f64 = first[3].split_once(':').unwrap().1.parse().unwrap();
        assert_eq!(v, g.get(0, 1));
    }
}
