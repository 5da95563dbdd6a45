//! Leave-one-out evaluation with grid search over `lambda` and `C`.
//!
//! In nested mode (the default) every outer fold picks `(lambda, C)` by an
//! inner leave-one-out run restricted to its own training samples, so the
//! held-out sample's kernel values are never read during selection. The
//! non-nested mode scores each grid point by plain LOOCV over the whole
//! dataset and reports the best one.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::source::{KernelSource, SubMatrix};
use super::svm::{fit_indices, predict, SvmParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{perturb_missing, Label, LabeledDataset, PerturbationSpec};
use crate::kernels::{gram, KernelConfig};

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [1e-2, 1e-1, 1.0, 1e1, 1e2];
pub const DEFAULT_C_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    #[default]
    Nested,
    NonNested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Kernel settings; `lambda` is taken from `lambdas` instead.
    pub kernel: KernelConfig,
    pub lambdas: Vec<f64>,
    pub cs: Vec<f64>,
    pub tuning: TuningMode,
    pub tol: f64,
    pub max_updates: usize,
    pub exec: Exec,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            lambdas: DEFAULT_LAMBDA_GRID.to_vec(),
            cs: DEFAULT_C_GRID.to_vec(),
            tuning: TuningMode::Nested,
            tol: 1e-3,
            max_updates: 100_000,
            exec: Exec::Parallel,
        }
    }
}

impl EvalOptions {
    fn svm(&self, c: f64) -> SvmParams {
        SvmParams {
            c,
            tol: self.tol,
            max_updates: self.max_updates,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.cs.is_empty() {
            return Err(Error::InvalidArgument(
                "lambda and C grids must be non-empty".into(),
            ));
        }
        for &x in self.lambdas.iter().chain(&self.cs) {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "grid values must be positive, got {x}"
                )));
            }
        }
        Ok(())
    }
}

/// One precomputed Gram matrix of the lambda grid.
#[derive(Clone, Copy)]
pub struct LambdaGram<'a> {
    pub lambda: f64,
    pub source: &'a dyn KernelSource,
    /// Diagonal jitter applied to every training submatrix.
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub id: String,
    pub true_label: Label,
    pub predicted: Option<Label>,
    pub decision_value: Option<f64>,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub failure: Option<String>,
}

impl FoldResult {
    pub fn correct(&self) -> bool {
        self.predicted == Some(self.true_label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub n_folds: usize,
    pub n_correct: usize,
    pub n_failures: usize,
    pub best_lambda: f64,
    pub best_c: f64,
    pub tuning: TuningMode,
    pub lambda_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Largest KKT violation among the fold models.
    pub max_kkt_residual: f64,
    pub per_fold: Vec<FoldResult>,
}

impl EvalReport {
    /// Per-fold table as CSV (`id,true_label,predicted,decision_value,lambda,c,failure`).
    pub fn folds_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("id,true_label,predicted,decision_value,lambda,c,failure\n");
        for f in &self.per_fold {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.id,
                f.true_label,
                f.predicted.map(|l| l.to_string()).unwrap_or_default(),
                opt(f.decision_value),
                opt(f.lambda),
                opt(f.c),
                f.failure.as_deref().unwrap_or("").replace(',', ";"),
            ));
        }
        out
    }
}

/// `(lambda, C)` chosen by inner leave-one-out on a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub lambda_index: usize,
    pub lambda: f64,
    pub c: f64,
    pub inner_accuracy: f64,
}

fn has_both(labels: impl IntoIterator<Item = Label>) -> bool {
    let (mut pos, mut neg) = (false, false);
    for l in labels {
        pos |= l == Label::Pos;
        neg |= l == Label::Neg;
    }
    pos && neg
}

/// Inner leave-one-out over `train` for every grid point. Reads only kernel
/// entries with both indices in `train`. Ties keep the earliest grid point
/// (lambda-major, then C in grid order).
pub fn select_hyperparameters(
    grams: &[LambdaGram<'_>],
    labels: &[Label],
    train: &[usize],
    cs: &[f64],
    opts: &EvalOptions,
) -> Selection {
    let local_labels: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
    let m = train.len();
    let mut best: Option<Selection> = None;
    for (lambda_index, g) in grams.iter().enumerate() {
        let sub = SubMatrix::gather(&g.source, train);
        for &c in cs {
            let params = opts.svm(c);
            let mut correct = 0usize;
            let mut inner: Vec<usize> = Vec::with_capacity(m.saturating_sub(1));
            for t in 0..m {
                inner.clear();
                inner.extend((0..m).filter(|&s| s != t));
                if !has_both(inner.iter().map(|&s| local_labels[s])) {
                    continue;
                }
                let Ok(model) = fit_indices(&sub, &inner, &local_labels, &params, g.jitter) else {
                    continue;
                };
                let row: Vec<f64> = inner.iter().map(|&s| sub.at(t, s)).collect();
                if predict(&model, &row).ok() == Some(local_labels[t]) {
                    correct += 1;
                }
            }
            let acc = if m == 0 {
                0.0
            } else {
                correct as f64 / m as f64
            };
            if best.is_none_or(|b| acc > b.inner_accuracy) {
                best = Some(Selection {
                    lambda_index,
                    lambda: g.lambda,
                    c,
                    inner_accuracy: acc,
                });
            }
        }
    }
    best.expect("non-empty grids")
}

struct FoldOutcome {
    result: FoldResult,
    kkt: f64,
}

fn failed_fold(id: &str, label: Label, why: String) -> FoldOutcome {
    FoldOutcome {
        result: FoldResult {
            id: id.to_string(),
            true_label: label,
            predicted: None,
            decision_value: None,
            lambda: None,
            c: None,
            failure: Some(why),
        },
        kkt: 0.0,
    }
}

/// Trains on every sample but `held_out` and predicts it.
fn run_fold(
    g: &LambdaGram<'_>,
    labels: &[Label],
    ids: &[String],
    held_out: usize,
    c: f64,
    opts: &EvalOptions,
) -> FoldOutcome {
    let n = labels.len();
    let train: Vec<usize> = (0..n).filter(|&i| i != held_out).collect();
    if !has_both(train.iter().map(|&i| labels[i])) {
        return failed_fold(
            &ids[held_out],
            labels[held_out],
            "single-class training set".into(),
        );
    }
    let model = match fit_indices(&g.source, &train, labels, &opts.svm(c), g.jitter) {
        Ok(m) => m,
        Err(e) => return failed_fold(&ids[held_out], labels[held_out], e.to_string()),
    };
    let row: Vec<f64> = train.iter().map(|&t| g.source.get(held_out, t)).collect();
    let value = model.decision_value(&row).expect("row length matches");
    FoldOutcome {
        result: FoldResult {
            id: ids[held_out].clone(),
            true_label: labels[held_out],
            predicted: Some(if value >= 0.0 { Label::Pos } else { Label::Neg }),
            decision_value: Some(value),
            lambda: Some(g.lambda),
            c: Some(c),
            failure: None,
        },
        kkt: model.kkt_residual,
    }
}

fn summarize(
    outcomes: Vec<FoldOutcome>,
    best_lambda: f64,
    best_c: f64,
    grams: &[LambdaGram<'_>],
    opts: &EvalOptions,
) -> EvalReport {
    let n = outcomes.len();
    let n_correct = outcomes.iter().filter(|o| o.result.correct()).count();
    let n_failures = outcomes
        .iter()
        .filter(|o| o.result.failure.is_some())
        .count();
    let max_kkt_residual = outcomes.iter().map(|o| o.kkt).fold(0.0, f64::max);
    EvalReport {
        accuracy: if n == 0 {
            0.0
        } else {
            n_correct as f64 / n as f64
        },
        n_folds: n,
        n_correct,
        n_failures,
        best_lambda,
        best_c,
        tuning: opts.tuning,
        lambda_grid: grams.iter().map(|g| g.lambda).collect(),
        c_grid: opts.cs.clone(),
        max_kkt_residual,
        per_fold: outcomes.into_iter().map(|o| o.result).collect(),
    }
}

/// Leave-one-out evaluation over precomputed Gram matrices (one per lambda).
pub fn loocv_precomputed(
    grams: &[LambdaGram<'_>],
    labels: &[Label],
    ids: &[String],
    opts: &EvalOptions,
) -> Result<EvalReport> {
    opts.validate()?;
    let n = labels.len();
    if ids.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: ids.len(),
        });
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "leave-one-out needs at least 4 samples, got {n}"
        )));
    }
    if !has_both(labels.iter().copied()) {
        return Err(Error::SingleClass);
    }
    if grams.is_empty() || grams.iter().any(|g| g.source.size() != n) {
        return Err(Error::InvalidArgument(
            "one n x n Gram matrix per lambda is required".into(),
        ));
    }

    match opts.tuning {
        TuningMode::Nested => {
            let outcomes = opts.exec.map(n, |h| {
                let train: Vec<usize> = (0..n).filter(|&i| i != h).collect();
                if !has_both(train.iter().map(|&i| labels[i])) {
                    return (
                        failed_fold(&ids[h], labels[h], "single-class training set".into()),
                        None,
                    );
                }
                let sel = select_hyperparameters(grams, labels, &train, &opts.cs, opts);
                let c_index = opts.cs.iter().position(|&c| c == sel.c).unwrap_or(0);
                let out = run_fold(&grams[sel.lambda_index], labels, ids, h, sel.c, opts);
                (out, Some((sel.lambda_index, c_index)))
            });
            // modal choice, ties to the earliest grid point
            let mut votes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for (_, choice) in &outcomes {
                if let Some(key) = choice {
                    *votes.entry(*key).or_default() += 1;
                }
            }
            let mut mode = (0, 0);
            let mut top = 0;
            for (&key, &count) in &votes {
                if count > top {
                    top = count;
                    mode = key;
                }
            }
            let outcomes = outcomes.into_iter().map(|(o, _)| o).collect();
            Ok(summarize(
                outcomes,
                grams[mode.0].lambda,
                opts.cs[mode.1],
                grams,
                opts,
            ))
        }
        TuningMode::NonNested => {
            let mut best: Option<(f64, usize, f64, Vec<FoldOutcome>)> = None;
            for (li, g) in grams.iter().enumerate() {
                for &c in &opts.cs {
                    let outcomes = opts.exec.map(n, |h| run_fold(g, labels, ids, h, c, opts));
                    let acc =
                        outcomes.iter().filter(|o| o.result.correct()).count() as f64 / n as f64;
                    if best.as_ref().is_none_or(|b| acc > b.0) {
                        best = Some((acc, li, c, outcomes));
                    }
                }
            }
            let (_, li, c, outcomes) = best.expect("non-empty grids");
            Ok(summarize(outcomes, grams[li].lambda, c, grams, opts))
        }
    }
}

/// Computes one Gram matrix per lambda and runs [`loocv_precomputed`].
/// A Gram matrix that is not PSD within `1e-8` relative gets the diagonal
/// jitter `1e-10 * trace / n`, logged as a warning.
pub fn loocv(ds: &LabeledDataset, opts: &EvalOptions) -> Result<EvalReport> {
    opts.validate()?;
    let mut grams = Vec::with_capacity(opts.lambdas.len());
    for &lambda in &opts.lambdas {
        grams.push(gram(ds, &opts.kernel.with_lambda(lambda), opts.exec)?);
    }
    let jitters: Vec<f64> = grams
        .iter()
        .zip(&opts.lambdas)
        .map(|(g, lambda)| {
            let diag = g.psd(1e-8);
            if diag.psd {
                0.0
            } else {
                let n = g.len() as f64;
                let trace: f64 = (0..g.len()).map(|i| g.get(i, i)).sum();
                let j = 1e-10 * trace / n;
                log::warn!("Gram for lambda={lambda} is not PSD ({diag}); jitter {j:e}");
                j
            }
        })
        .collect();
    let views: Vec<LambdaGram<'_>> = grams
        .iter()
        .zip(&opts.lambdas)
        .zip(&jitters)
        .map(|((g, &lambda), &jitter)| LambdaGram {
            lambda,
            source: g,
            jitter,
        })
        .collect();
    loocv_precomputed(&views, ds.labels(), ds.ids(), opts)
}

/// Labels permuted uniformly at random (seeded).
pub fn shuffled_labels(labels: &[Label], seed: u64) -> Vec<Label> {
    let mut out = labels.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRun {
    pub missing_rate: f64,
    pub seed: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub baseline: EvalReport,
    pub runs: Vec<RobustRun>,
}

impl RobustnessReport {
    /// `missing_rate,seed,accuracy` table; the baseline row has an empty seed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("missing_rate,seed,accuracy\n");
        out.push_str(&format!("0,,{}\n", self.baseline.accuracy));
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{}\n",
                r.missing_rate, r.seed, r.report.accuracy
            ));
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Perturbation seed of graph `index` under run seed `seed`.
pub fn graph_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Re-runs [`loocv`] after deleting a fraction of every graph's edges, once
/// per `(rate, seed)`, next to the unperturbed baseline.
pub fn robustness_eval(
    ds: &LabeledDataset,
    rates: &[f64],
    seeds: &[u64],
    opts: &EvalOptions,
) -> Result<RobustnessReport> {
    for &r in rates {
        PerturbationSpec::new(r, 0)?;
    }
    let baseline = loocv(ds, opts)?;
    let mut runs = Vec::with_capacity(rates.len() * seeds.len());
    for &missing_rate in rates {
        for &seed in seeds {
            let perturbed = ds.map_graphs(|i, g| {
                perturb_missing(
                    g,
                    &PerturbationSpec::new(missing_rate, graph_seed(seed, i))?,
                )
            })?;
            let report = loocv(&perturbed, opts)?;
            log::info!(
                "missing_rate={missing_rate} seed={seed} accuracy={}",
                report.accuracy
            );
            runs.push(RobustRun {
                missing_rate,
                seed,
                report,
            });
        }
    }
    Ok(RobustnessReport { baseline, runs })
}
