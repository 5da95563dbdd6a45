//! Soft-margin C-SVM dual solved by sequential minimal optimisation.
//!
//! The working pair takes the maximal KKT violator as its first index and
//! the second-order (LIBSVM) choice as its second, lowest index on ties;
//! the pair update and bias computation follow the usual LIBSVM
//! formulation. Stops when the violation `m(a) - M(a)`
//! falls below `tol`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::source::{KernelSource, SubMatrix};
use crate::error::{Error, Result};
use crate::graph::Label;
use crate::kernels::psd_check;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_updates: usize,
}

impl SvmParams {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: 1e-3,
            max_updates: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmModel {
    /// `alpha_i * y_i` for every training sample.
    pub dual_coefs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Training positions with nonzero `alpha`.
    pub support: Vec<usize>,
    pub c_param: f64,
    /// Maximal KKT violation at termination.
    pub kkt_residual: f64,
    pub updates: usize,
    pub converged: bool,
    /// Diagonal jitter added before solving (0 when none was needed).
    pub jitter: f64,
}

impl SvmModel {
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.dual_coefs.len() {
            return Err(Error::LengthMismatch {
                expected: self.dual_coefs.len(),
                found: kernel_row.len(),
            });
        }
        let s: f64 = self
            .dual_coefs
            .iter()
            .zip(kernel_row)
            .map(|(a, k)| a * k)
            .sum();
        Ok(s + self.bias)
    }

    pub fn support_ids<'a>(&self, ids: &'a [String]) -> Vec<&'a str> {
        self.support.iter().map(|&i| ids[i].as_str()).collect()
    }
}

/// `+1` when the decision value is `>= 0` (zero maps to `+1`).
pub fn predict(model: &SvmModel, kernel_row: &[f64]) -> Result<Label> {
    Ok(if model.decision_value(kernel_row)? >= 0.0 {
        Label::Pos
    } else {
        Label::Neg
    })
}

/// Trains on a full precomputed Gram matrix. If the matrix is not PSD to
/// within `1e-8` relative, `1e-10 * trace / n` is added to its diagonal and
/// recorded in [`SvmModel::jitter`].
pub fn train_svm(gram: &DMatrix<f64>, labels: &[Label], params: &SvmParams) -> Result<SvmModel> {
    let n = gram.nrows();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let diag = psd_check(gram, 1e-8)?;
    let mut k = SubMatrix::from_matrix(gram);
    let jitter = if diag.psd {
        0.0
    } else {
        let j = 1e-10 * k.trace() / n as f64;
        log::warn!("Gram matrix is not PSD ({diag}); adding diagonal jitter {j:e}");
        j
    };
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    fit_dense(k_with_jitter(&mut k, jitter), &y, params, jitter)
}

fn k_with_jitter(k: &mut SubMatrix, jitter: f64) -> &SubMatrix {
    if jitter != 0.0 {
        k.add_diagonal(jitter);
    }
    k
}

/// Trains on the samples `indices` of `source`; `labels` is indexed like
/// `source`. Only entries `(i, j)` with both `i` and `j` in `indices` are
/// read.
pub fn fit_indices(
    source: &impl KernelSource,
    indices: &[usize],
    labels: &[Label],
    params: &SvmParams,
    jitter: f64,
) -> Result<SvmModel> {
    let mut k = SubMatrix::gather(source, indices);
    let y: Vec<f64> = indices.iter().map(|&i| labels[i].sign()).collect();
    fit_dense(k_with_jitter(&mut k, jitter), &y, params, jitter)
}

fn fit_dense(k: &SubMatrix, y: &[f64], params: &SvmParams, jitter: f64) -> Result<SvmModel> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive, got {}",
            params.c
        )));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    Ok(solve(k, y, params, jitter))
}

struct Violation {
    i: usize,
    j: usize,
    gap: f64,
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// `i` maximises the violation over the up set; `j` maximises the
/// second-order decrease of the objective over the low set. Strict
/// comparisons keep the lowest index on ties.
fn select_pair(k: &SubMatrix, alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> Option<Violation> {
    let (mut i, mut up_val) = (None, f64::NEG_INFINITY);
    let mut low_val = f64::INFINITY;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > up_val {
            i = Some(t);
            up_val = v;
        }
        if in_low(alpha[t], y[t], c) && v < low_val {
            low_val = v;
        }
    }
    let i = i?;
    if low_val == f64::INFINITY {
        return None;
    }
    let ki = k.row(i);
    let (mut j, mut best) = (None, f64::INFINITY);
    for t in 0..alpha.len() {
        if !in_low(alpha[t], y[t], c) {
            continue;
        }
        let b = up_val + y[t] * grad[t];
        if b > 0.0 {
            let a = ki[i] + k.at(t, t) - 2.0 * y[i] * y[t] * ki[t];
            let obj = -(b * b) / if a > 0.0 { a } else { TAU };
            if obj < best {
                j = Some(t);
                best = obj;
            }
        }
    }
    Some(Violation {
        i,
        j: j.unwrap_or(i),
        gap: up_val - low_val,
    })
}

fn solve(k: &SubMatrix, y: &[f64], params: &SvmParams, jitter: f64) -> SvmModel {
    let n = y.len();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; n];
    let mut updates = 0;
    let mut converged = true;

    let kkt_residual = loop {
        let Some(Violation { i, j, gap }) = select_pair(k, &alpha, &grad, y, c) else {
            break 0.0;
        };
        if gap < params.tol {
            break gap.max(0.0);
        }
        if updates >= params.max_updates {
            log::warn!("SMO stopped after {updates} updates with KKT violation {gap:e}");
            converged = false;
            break gap;
        }
        updates += 1;

        let (ki, kj) = (k.row(i), k.row(j));
        let qij = y[i] * y[j] * ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (ki[i] + kj[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        // clamp away round-off so the box holds exactly
        alpha[i] = alpha[i].clamp(0.0, c);
        alpha[j] = alpha[j].clamp(0.0, c);

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    };

    let bias = -rho(&alpha, &grad, y, c);
    let dual_coefs: Vec<f64> = alpha.iter().zip(y).map(|(a, y)| a * y).collect();
    let support = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    SvmModel {
        dual_coefs,
        alphas: alpha,
        bias,
        support,
        c_param: c,
        kkt_residual,
        updates,
        converged,
        jitter,
    }
}

fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Maximal KKT violation of a finished model on its training matrix
/// (independent of the solver's internal gradient).
#[cfg(test)]
pub(crate) fn kkt_violation(k: &DMatrix<f64>, labels: &[Label], model: &SvmModel) -> f64 {
    let n = labels.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let grad: Vec<f64> = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    y[t] * y[s]
                        * (k[(t, s)] + if s == t { model.jitter } else { 0.0 })
                        * model.alphas[s]
                })
                .sum::<f64>()
                - 1.0
        })
        .collect();
    let c = model.c_param;
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..n {
        let v = -y[t] * grad[t];
        if in_up(model.alphas[t], y[t], c) {
            up = up.max(v);
        }
        if in_low(model.alphas[t], y[t], c) {
            low = low.min(v);
        }
    }
    (up - low).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sample_identity() {
        let k = DMatrix::<f64>::identity(2, 2);
        let labels = [Label::Pos, Label::Neg];
        let m = train_svm(&k, &labels, &SvmParams::new(1.0)).unwrap();
        assert_eq!(m.alphas, vec![1.0, 1.0]);
        assert_eq!(m.bias, 0.0);
        assert_eq!(m.support, vec![0, 1]);
        assert!(m.decision_value(&[1.0, 0.0]).unwrap() > 0.0);
        assert!(m.decision_value(&[0.0, 1.0]).unwrap() < 0.0);
        assert_eq!(predict(&m, &[1.0, 0.0]).unwrap(), Label::Pos);
        assert_eq!(predict(&m, &[0.0, 1.0]).unwrap(), Label::Neg);
    }

    #[test]
    fn block_separable() {
        // two tight clusters, orthogonal to each other
        let n = 6;
        let labels: Vec<Label> = (0..n)
            .map(|i| if i < 3 { Label::Pos } else { Label::Neg })
            .collect();
        let k = DMatrix::from_fn(n, n, |i, j| {
            if (i < 3) == (j < 3) {
                if i == j {
                    1.0
                } else {
                    0.8
                }
            } else {
                0.1
            }
        });
        let m = train_svm(&k, &labels, &SvmParams::new(10.0)).unwrap();
        for i in 0..n {
            let row: Vec<f64> = (0..n).map(|j| k[(i, j)]).collect();
            assert_eq!(predict(&m, &row).unwrap(), labels[i]);
        }
        let s: f64 = m.dual_coefs.iter().sum();
        assert!(s.abs() < 1e-8);
        assert!(kkt_violation(&k, &labels, &m) <= 1e-3);
    }

    #[test]
    fn prediction_conventions() {
        let m = SvmModel {
            dual_coefs: vec![0.5, -0.5],
            alphas: vec![0.5, 0.5],
            bias: -0.25,
            support: vec![0, 1],
            c_param: 1.0,
            kkt_residual: 0.0,
            updates: 0,
            converged: true,
            jitter: 0.0,
        };
        assert_eq!(predict(&m, &[0.0, 0.0]).unwrap(), Label::Neg);
        assert_eq!(predict(&m, &[0.5, 0.0]).unwrap(), Label::Pos); // exactly zero
        assert!(matches!(
            predict(&m, &[0.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let k = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            train_svm(&k, &[Label::Pos, Label::Pos], &SvmParams::new(1.0)),
            Err(Error::SingleClass)
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(matches!(
            train_svm(&asym, &[Label::Pos, Label::Neg], &SvmParams::new(1.0)),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn indefinite_gram_gets_jitter() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let m = train_svm(&k, &[Label::Pos, Label::Neg], &SvmParams::new(1.0)).unwrap();
        assert_eq!(m.jitter, 1e-10);
    }
}
