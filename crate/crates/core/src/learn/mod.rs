//! Kernel SVM on precomputed Gram matrices and the leave-one-out protocol.

mod cv;
mod source;
mod stats;
mod svm;

pub use cv::{
    graph_seed, loocv, loocv_precomputed, robustness_eval, select_hyperparameters, shuffled_labels,
    EvalOptions, EvalReport, FoldResult, LambdaGram, RobustRun, RobustnessReport, Selection,
    TuningMode, DEFAULT_C_GRID, DEFAULT_LAMBDA_GRID,
};
pub use source::{KernelSource, SubMatrix};
pub use stats::binomial_upper_bound;
pub use svm::{fit_indices, predict, train_svm, SvmModel, SvmParams};
