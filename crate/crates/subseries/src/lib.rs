//! Decomposition-based time series forecasting with a dynamically
//! re-weighted hybrid training loss.
//!
//! A raw series is split by a sliding-window moving average into a trend
//! sub-series and a seasonal residual. A linear forecaster predicts each
//! sub-series separately and sums them. Training minimizes a hybrid loss
//! that combines the overall forecast MSE with per-sub-series MSEs, where
//! both the overall/component balance and the seasonal/trend balance are
//! re-estimated every optimization step by exponentiated (multiplicative)
//! updates on the simplex — mass shifts toward whichever loss is currently
//! larger.
//!
//! ## Crate layout
//!
//! - [`series`] — series values and the moving-average decomposition
//! - [`data`] — CSV loading, benchmark splits, standardization, windowing
//! - [`model`] — the per-component linear forecaster with analytic
//!   gradients and bit-exact checkpointing
//! - [`loss`] — the hybrid loss, its ablation variants, and the weight
//!   updates
//! - [`train`] — Adam loop with early stopping and weight trajectories
//! - [`metrics`] — overall and per-sub-series MSE/MAE reporting
//! - [`synth`] — deterministic synthetic series for controlled studies
//! - [`harness`] — config-driven experiments, sweeps, and ablations
//!
//! ## Runnable examples
//!
//! ```text
//! cargo run --example decompose        # seasonal/trend split basics
//! cargo run --example weight_dynamics  # the loss weights reacting to loss gaps
//! cargo run --example gradient_check   # analytic vs finite-difference grads
//! cargo run --example train_synthetic  # hybrid loss vs overall-only baseline
//! cargo run --example ablation         # loss variants and initial-weight grid
//! cargo run --example ett_benchmark    # the standard ETT protocol (needs data)
//! ```
//!
//! The same capabilities are scriptable through the `subseries` binary:
//! `decompose`, `train`, `ablate`, `synth`, and `eval` subcommands.

pub mod data;
pub mod error;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod series;
pub mod synth;
pub mod train;

pub use data::{
    fit_standardizer, load_csv, make_windows, split, write_csv, SegmentRanges, SplitMode,
    SplitSpec, StandardizationStats, TargetDecomposition, WindowBatch, WindowPlan,
};
pub use error::{Error, Result};
pub use loss::{
    component_losses, hybrid_loss, loss_gradients, make_variant, update_weights, InnerWeightSource,
    LossBreakdown, LossPolicy, LossVariant, LossWeights,
};
pub use metrics::{mae, mse, report, MetricsReport};
pub use model::{
    ForecastOutput, GradientSet, InitScheme, LinearForecaster, ModelConfig, StreamGradients,
};
pub use series::{moving_average_decompose, reconstruct, DecompositionPair, TimeSeries};
pub use synth::{generate, SeasonalComponent, SynthSpec, TrendKind};
pub use train::{adam_step, evaluate, train, AdamState, TrainConfig, TrainOutcome};
