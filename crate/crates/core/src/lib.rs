//! Cross-asset correlation, LASSO influence weights, lagged-price design
//! matrices and PCA + least-squares component sweeps for daily price series.
//!
//! Every numerical routine (coordinate descent, Jacobi eigensolver,
//! Householder QR) is implemented here without external linear algebra.

pub mod design;
pub mod error;
pub mod lagfeatures;
pub mod lasso;
pub mod matrix;
pub mod pca;
pub mod pipeline;
pub mod regress;
pub mod report;
pub mod stats;
pub mod svg;
pub mod synth;
pub mod timeseries;

pub use design::DesignMatrix;
pub use error::{Error, Result};
pub use lagfeatures::{build_lag_matrix, feedback_profile, node_count, Covariate, FeedbackProfile, LagMatrix, LagSpec};
pub use lasso::{fit_lasso, influence_weights, lambda_max, soft_threshold, LassoConfig, LassoFit};
pub use matrix::Matrix;
pub use pca::{covariance_matrix, explained_variance_ratio, fit_pca, fit_pca_with, project, symmetric_eigen, PcaBasis, PcaScaling};
pub use regress::{fit_ols, metrics, predict, MetricsReport, OlsFit};
pub use stats::{correlation_matrix, pearson, standardize, CorrMatrix, ScalingParams};
pub use synth::{generate, GeneratorKind, GeneratorSpec};
pub use timeseries::{align_inner, chronological_split, parse_ohlcv_csv, AlignedPanel, Bar, Channel, SeriesFrame};
pub use pipeline::{pca_sweep, run_influence, run_feedback_profile, run_pca_sweep, ExperimentConfig, SweepRange, SweepResult};
