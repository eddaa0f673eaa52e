//! Config-driven experiment orchestration: multi-horizon training sweeps,
//! loss-variant and initial-weight ablations, and report emission.
//!
//! One JSON document describes an experiment. A sweep runs one training
//! job per horizon and aggregates the six test metrics across horizons by
//! unweighted mean, the usual multi-horizon reporting convention. Every
//! run is deterministic given its config and seed; output files are named
//! per (tag, horizon) so sweep entries never collide.

use crate::data::{
    fit_standardizer, load_csv, split, write_csv, SplitMode, SplitSpec, StandardizationStats,
    TargetDecomposition, WindowPlan,
};
use crate::error::{Error, Result};
use crate::loss::{InnerWeightSource, LossVariant, LossWeights};
use crate::metrics::{average_reports, MetricsReport};
use crate::model::{InitScheme, LinearForecaster, ModelConfig};
use crate::series::{moving_average_decompose, TimeSeries};
use crate::synth::{generate, SynthSpec};
use crate::train::{evaluate, train, TrainConfig, TrajectoryRecord};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBlock {
    pub path: String,
    #[serde(default)]
    pub date_column: Option<String>,
    pub split_mode: SplitMode,
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    #[serde(default)]
    pub target_decomposition: TargetDecomposition,
}

fn default_ratios() -> [f64; 3] {
    [0.7, 0.1, 0.2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelBlock {
    pub input_length: usize,
    pub kernel: usize,
    pub share_channels: bool,
    pub init: InitScheme,
}

impl Default for ModelBlock {
    fn default() -> Self {
        Self {
            input_length: 96,
            kernel: 25,
            share_channels: true,
            init: InitScheme::UniformAverage,
        }
    }
}

/// Optimizer settings; the loss-side keys live in [`LossBlock`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainBlock {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub grad_clip: Option<f64>,
}

impl Default for TrainBlock {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
            max_epochs: d.max_epochs,
            patience: d.patience,
            adam_beta1: d.adam_beta1,
            adam_beta2: d.adam_beta2,
            adam_eps: d.adam_eps,
            seed: d.seed,
            grad_clip: d.grad_clip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossBlock {
    pub variant: LossVariant,
    pub initial_w1: f64,
    pub initial_alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub inner_weight_source: InnerWeightSource,
}

impl Default for LossBlock {
    fn default() -> Self {
        Self {
            variant: LossVariant::Hybrid,
            initial_w1: 0.5,
            initial_alpha: 0.5,
            lambda1: 0.9,
            lambda2: 0.1,
            inner_weight_source: InnerWeightSource::Updated,
        }
    }
}

impl LossBlock {
    /// The plain overall-MSE baseline, expressed inside the same code
    /// path: w1 pinned to 1 (the simplex boundary is absorbing) with both
    /// temperatures zeroed so no weight moves.
    pub fn original() -> Self {
        Self {
            variant: LossVariant::Hybrid,
            initial_w1: 1.0,
            initial_alpha: 0.5,
            lambda1: 0.0,
            lambda2: 0.0,
            inner_weight_source: InnerWeightSource::Updated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub dataset: DatasetBlock,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub train: TrainBlock,
    #[serde(default)]
    pub loss: LossBlock,
    pub horizons: Vec<usize>,
    pub output_dir: String,
}

fn default_schema_version() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config(format!(
                "schema_version: unsupported version {}",
                self.schema_version
            )));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("horizons: must be non-empty".into()));
        }
        if self.horizons.contains(&0) {
            return Err(Error::Config("horizons: entries must be >= 1".into()));
        }
        if self.model.input_length == 0 {
            return Err(Error::Config("model.input_length: must be >= 1".into()));
        }
        if self.model.kernel == 0 || self.model.kernel.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "model.kernel: must be an odd positive integer, got {}",
                self.model.kernel
            )));
        }
        self.train_config()
            .validate()
            .map_err(|e| Error::Config(format!("train/loss: {e}")))?;
        if self.dataset.path.is_empty() {
            return Err(Error::Config("dataset.path: must be set".into()));
        }
        Ok(())
    }

    /// Flatten the train and loss blocks into the trainer's config.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            max_epochs: self.train.max_epochs,
            patience: self.train.patience,
            adam_beta1: self.train.adam_beta1,
            adam_beta2: self.train.adam_beta2,
            adam_eps: self.train.adam_eps,
            seed: self.train.seed,
            loss_variant: self.loss.variant,
            initial_w1: self.loss.initial_w1,
            initial_alpha: self.loss.initial_alpha,
            lambda1: self.loss.lambda1,
            lambda2: self.loss.lambda2,
            grad_clip: self.train.grad_clip,
            inner_weight_source: self.loss.inner_weight_source,
        }
    }

    fn dataset_stem(&self) -> String {
        Path::new(&self.dataset.path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }
}

/// CLI-level overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub output_dir: Option<String>,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(seed) = self.seed {
            config.train.seed = seed;
        }
        if let Some(h) = self.horizon {
            if !config.horizons.contains(&h) {
                return Err(Error::Config(format!(
                    "horizons: --horizon {h} is not in the configured sweep {:?}",
                    config.horizons
                )));
            }
            config.horizons = vec![h];
        }
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        Ok(config)
    }
}

/// Everything written for one (config, horizon) training job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub horizon: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub train_loss_per_epoch: Vec<f64>,
    pub val_mse_per_epoch: Vec<f64>,
    pub test_metrics: MetricsReport,
    pub final_weights: LossWeights,
    pub wall_clock_seconds: f64,
    pub checkpoint_path: String,
    pub trajectory_path: String,
}

/// A sweep's per-horizon reports plus their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub per_horizon: Vec<RunReport>,
    pub aggregate: MetricsReport,
}

/// The standardized series plus its segment boundaries, shared by every
/// run in a sweep so metric differences are attributable to the loss.
pub struct PreparedData {
    pub series: TimeSeries,
    pub stats: StandardizationStats,
    pub ranges: crate::data::SegmentRanges,
}

/// Load, split, and standardize per the config for one horizon.
pub fn prepare_data(config: &ExperimentConfig, horizon: usize) -> Result<PreparedData> {
    let raw = load_csv(&config.dataset.path, config.dataset.date_column.as_deref())?;
    let spec = SplitSpec::with_ratios(
        config.dataset.split_mode,
        config.dataset.ratios,
        config.model.input_length,
        horizon,
    )?;
    let ranges = split(&raw, &spec)?;
    let stats = fit_standardizer(&raw, &ranges.train)?;
    let series = stats.apply(&raw)?;
    Ok(PreparedData {
        series,
        stats,
        ranges,
    })
}

fn plan(
    data: &PreparedData,
    segment: std::ops::Range<usize>,
    config: &ExperimentConfig,
    horizon: usize,
) -> Result<WindowPlan> {
    WindowPlan::new(
        &data.series,
        segment,
        config.model.input_length,
        horizon,
        config.model.kernel,
        config.dataset.target_decomposition,
    )
}

fn write_trajectory(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: display.clone(),
        source: e,
    })?;
    writer
        .write_record([
            "step", "w1", "w2", "alpha", "beta", "loss_g", "loss_s", "loss_t", "combined",
        ])
        .map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?;
    for r in records {
        writer
            .write_record([
                r.step.to_string(),
                r.w1.to_string(),
                r.w2.to_string(),
                r.alpha.to_string(),
                r.beta.to_string(),
                r.loss_g.to_string(),
                r.loss_s.to_string(),
                r.loss_t.to_string(),
                r.combined.to_string(),
            ])
            .map_err(|e| Error::Csv {
                path: display.clone(),
                source: e,
            })?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ensure_dir(dir: &str) -> Result<PathBuf> {
    let path = PathBuf::from(dir);
    std::fs::create_dir_all(&path).map_err(|e| Error::Io {
        path: dir.to_string(),
        source: e,
    })?;
    Ok(path)
}

fn variant_tag(loss: &LossBlock) -> String {
    if *loss == LossBlock::original() {
        return "original".into();
    }
    let base = match loss.variant {
        LossVariant::Hybrid => "hybrid",
        LossVariant::ComponentOnly => "component",
        LossVariant::FixedWeight => "fixweight",
    };
    if loss.variant == LossVariant::Hybrid && (loss.initial_w1 != 0.5 || loss.initial_alpha != 0.5)
    {
        format!("{base}_w{}_a{}", loss.initial_w1, loss.initial_alpha)
    } else {
        base.to_string()
    }
}

/// Train one horizon of the sweep and write its artifacts.
pub fn run_one(config: &ExperimentConfig, horizon: usize) -> Result<RunReport> {
    let started = Instant::now();
    let out_dir = ensure_dir(&config.output_dir)?;
    let data = prepare_data(config, horizon)?;
    let train_plan = plan(&data, data.ranges.train.clone(), config, horizon)?;
    let val_plan = plan(&data, data.ranges.val.clone(), config, horizon)?;
    let test_plan = plan(&data, data.ranges.test.clone(), config, horizon)?;

    let mut model = LinearForecaster::new(ModelConfig {
        input_length: config.model.input_length,
        horizon,
        num_channels: data.series.num_channels(),
        share_channels: config.model.share_channels,
        kernel: config.model.kernel,
        init: config.model.init,
        seed: config.train.seed,
    })?;
    let train_config = config.train_config();
    let outcome = train(&mut model, &train_plan, &val_plan, &train_config)?;
    let test_metrics = evaluate(&model, &test_plan)?;

    let tag = format!(
        "{}_{}_h{horizon}",
        config.dataset_stem(),
        variant_tag(&config.loss)
    );
    let checkpoint_path = out_dir.join(format!("{tag}_model.json"));
    model.save_checkpoint(&checkpoint_path)?;
    let trajectory_path = out_dir.join(format!("{tag}_trajectory.csv"));
    write_trajectory(&trajectory_path, &outcome.trajectory)?;

    let report = RunReport {
        schema_version: 1,
        config: config.clone(),
        horizon,
        epochs_run: outcome.epochs_run,
        best_epoch: outcome.best_epoch,
        best_val_mse: outcome.best_val_mse,
        train_loss_per_epoch: outcome.train_loss_per_epoch,
        val_mse_per_epoch: outcome.val_mse_per_epoch,
        test_metrics,
        final_weights: outcome.final_weights,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        checkpoint_path: checkpoint_path.display().to_string(),
        trajectory_path: trajectory_path.display().to_string(),
    };
    write_json(&out_dir.join(format!("{tag}_report.json")), &report)?;
    Ok(report)
}

/// Run the full horizon sweep and write the aggregate report.
pub fn run_training(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut per_horizon = Vec::new();
    for &h in &config.horizons {
        log::info!("training horizon {h}");
        per_horizon.push(run_one(config, h)?);
    }
    let aggregate = average_reports(
        &per_horizon
            .iter()
            .map(|r| r.test_metrics.clone())
            .collect::<Vec<_>>(),
    )?;
    let sweep = SweepReport {
        schema_version: 1,
        config: config.clone(),
        per_horizon,
        aggregate,
    };
    let out_dir = ensure_dir(&config.output_dir)?;
    let tag = format!("{}_{}", config.dataset_stem(), variant_tag(&config.loss));
    write_json(&out_dir.join(format!("{tag}_aggregate.json")), &sweep)?;
    Ok(sweep)
}

/// One ablation entry: what was varied and what came out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub label: String,
    pub loss: LossBlock,
    pub aggregate: MetricsReport,
    pub per_horizon: Vec<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Hybrid vs component-only vs fixed-weight, shared data and seed.
    pub variants: Vec<AblationEntry>,
    /// The five-point initial-weight grid on the hybrid variant.
    pub weight_grid: Vec<AblationEntry>,
}

/// Initial-weight grid exercised by the ablation command.
pub const WEIGHT_GRID: [(f64, f64); 5] =
    [(0.1, 0.1), (0.1, 0.9), (0.5, 0.5), (0.9, 0.1), (0.9, 0.9)];

/// Run the loss-variant ablation and the initial-weight grid. Every run
/// shares the same splits and seed, so metric differences are
/// attributable to the loss settings alone.
pub fn run_ablation(config: &ExperimentConfig) -> Result<AblationReport> {
    config.validate()?;
    let mut variants = Vec::new();
    for variant in [
        LossVariant::Hybrid,
        LossVariant::ComponentOnly,
        LossVariant::FixedWeight,
    ] {
        let mut c = config.clone();
        c.loss.variant = variant;
        let sweep = run_training(&c)?;
        variants.push(AblationEntry {
            label: variant_tag(&c.loss),
            loss: c.loss,
            aggregate: sweep.aggregate,
            per_horizon: sweep
                .per_horizon
                .iter()
                .map(|r| r.test_metrics.clone())
                .collect(),
        });
    }
    let mut weight_grid = Vec::new();
    for (w1, alpha) in WEIGHT_GRID {
        let mut c = config.clone();
        c.loss.variant = LossVariant::Hybrid;
        c.loss.initial_w1 = w1;
        c.loss.initial_alpha = alpha;
        let sweep = run_training(&c)?;
        weight_grid.push(AblationEntry {
            label: format!("w1={w1}, alpha={alpha}"),
            loss: c.loss,
            aggregate: sweep.aggregate,
            per_horizon: sweep
                .per_horizon
                .iter()
                .map(|r| r.test_metrics.clone())
                .collect(),
        });
    }
    let report = AblationReport {
        schema_version: 1,
        config: config.clone(),
        variants,
        weight_grid,
    };
    let out_dir = ensure_dir(&config.output_dir)?;
    let stem = config.dataset_stem();
    write_json(&out_dir.join(format!("{stem}_ablation.json")), &report)?;
    write_ablation_csv(&out_dir.join(format!("{stem}_ablation.csv")), &report)?;
    Ok(report)
}

fn write_ablation_csv(path: &Path, report: &AblationReport) -> Result<()> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: display.clone(),
        source: e,
    })?;
    let err = |e: csv::Error| Error::Csv {
        path: display.clone(),
        source: e,
    };
    writer
        .write_record([
            "study",
            "label",
            "overall_mse",
            "overall_mae",
            "seasonal_mse",
            "seasonal_mae",
            "trend_mse",
            "trend_mae",
        ])
        .map_err(err)?;
    let err = |e: csv::Error| Error::Csv {
        path: display.clone(),
        source: e,
    };
    for (study, entries) in [
        ("variant", &report.variants),
        ("initial_weights", &report.weight_grid),
    ] {
        for e in entries {
            writer
                .write_record([
                    study.to_string(),
                    e.label.clone(),
                    e.aggregate.overall_mse.to_string(),
                    e.aggregate.overall_mae.to_string(),
                    e.aggregate.seasonal_mse.to_string(),
                    e.aggregate.seasonal_mae.to_string(),
                    e.aggregate.trend_mse.to_string(),
                    e.aggregate.trend_mae.to_string(),
                ])
                .map_err(err)?;
        }
    }
    writer.flush().map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

/// Decompose a CSV and write, per channel, original/seasonal/trend
/// columns — plot-ready data for case-study figures.
pub fn decompose_to_csv(
    input: impl AsRef<Path>,
    date_column: Option<&str>,
    kernel: usize,
    output: impl AsRef<Path>,
) -> Result<()> {
    let series = load_csv(input, date_column)?;
    let pair = moving_average_decompose(&series, kernel)?;
    let output = output.as_ref();
    let display = output.display().to_string();
    let mut writer = csv::Writer::from_path(output).map_err(|e| Error::Csv {
        path: display.clone(),
        source: e,
    })?;
    let err = |e: csv::Error| Error::Csv {
        path: display.clone(),
        source: e,
    };
    let mut header = Vec::new();
    if series.timestamps().is_some() {
        header.push("date".to_string());
    }
    for name in series.channel_names() {
        header.push(format!("{name}_original"));
        header.push(format!("{name}_seasonal"));
        header.push(format!("{name}_trend"));
    }
    writer.write_record(&header).map_err(err)?;
    let err = |e: csv::Error| Error::Csv {
        path: display.clone(),
        source: e,
    };
    for t in 0..series.len() {
        let mut record = Vec::with_capacity(header.len());
        if let Some(ts) = series.timestamps() {
            record.push(ts[t].clone());
        }
        for c in 0..series.num_channels() {
            record.push(series.values()[(t, c)].to_string());
            record.push(pair.seasonal()[(t, c)].to_string());
            record.push(pair.trend()[(t, c)].to_string());
        }
        writer.write_record(&record).map_err(err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: display,
        source: e,
    })
}

/// Generate a synthetic series from a spec file and emit it as CSV.
pub fn synth_to_csv(spec_path: impl AsRef<Path>, output: impl AsRef<Path>) -> Result<SynthSpec> {
    let spec_path = spec_path.as_ref();
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::Io {
        path: spec_path.display().to_string(),
        source: e,
    })?;
    let spec: SynthSpec = serde_json::from_str(&text)?;
    let series = generate(&spec)?;
    write_csv(&series, output)?;
    Ok(spec)
}

/// Evaluate a saved checkpoint on one segment of the configured dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    Train,
    Val,
    #[default]
    Test,
}

impl std::str::FromStr for EvalSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(EvalSplit::Train),
            "val" => Ok(EvalSplit::Val),
            "test" => Ok(EvalSplit::Test),
            other => Err(Error::Config(format!("unknown split '{other}'"))),
        }
    }
}

pub fn eval_checkpoint(
    config: &ExperimentConfig,
    checkpoint: impl AsRef<Path>,
    split_choice: EvalSplit,
) -> Result<MetricsReport> {
    let model = LinearForecaster::load_checkpoint(checkpoint)?;
    let horizon = model.config().horizon;
    if model.config().input_length != config.model.input_length {
        return Err(Error::Config(format!(
            "model.input_length: checkpoint was trained with L={}, config says {}",
            model.config().input_length,
            config.model.input_length
        )));
    }
    let data = prepare_data(config, horizon)?;
    let segment = match split_choice {
        EvalSplit::Train => data.ranges.train.clone(),
        EvalSplit::Val => data.ranges.val.clone(),
        EvalSplit::Test => data.ranges.test.clone(),
    };
    let plan = WindowPlan::new(
        &data.series,
        segment,
        config.model.input_length,
        horizon,
        model.config().kernel,
        config.dataset.target_decomposition,
    )?;
    evaluate(&model, &plan)
}
