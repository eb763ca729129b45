//! Evaluation harness: rank-based AUC with an independent pairwise
//! oracle, temporal-window analysis, three-split aggregation, the
//! ablation table over m, distribution and gallery exports, and a
//! dependency-free SVG plotter.

pub mod ablation;
pub mod auc;
mod error;
pub mod gallery;
pub mod harness;
pub mod histogram;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod svg;
pub mod windows;

pub use ablation::{ablation_csv, run_ablation, AblationRow};
pub use auc::{auc, auc_pairwise_oracle, best_threshold_accuracy, mean_std, ScoredSample};
pub use error::{Error, Result};
pub use gallery::flow_gallery;
pub use harness::{score_split, score_test_set, MethodScores, METHOD_ORDER};
pub use histogram::Histogram;
pub use pipeline::{train_chain, train_split, IoGenChain, StageConfigs, TrainedSplit};
pub use report::{
    build_method_reports, build_window_reports, export_distributions, median, write_distributions,
    write_report, DistributionExport, EvalReport, MethodReport, WindowReport,
};
pub use stats::{kendall_tau, paired_t_one_sided_greater, spearman, welch_t_test, WelchResult};
pub use windows::{default_windows, windowed_auc, DayWindow};
