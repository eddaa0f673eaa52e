//! Optimization loop: Adam updates, per-step loss re-weighting, early
//! stopping on validation MSE, and best-checkpoint restoration.
//!
//! The loop is strictly sequential and every random choice flows from the
//! configured seed, so identical (seed, config, data) reproduce identical
//! parameters and weight trajectories bit for bit.

use crate::data::WindowPlan;
use crate::error::{Error, Result};
use crate::loss::{component_losses, InnerWeightSource, LossPolicy, LossVariant, LossWeights};
use crate::metrics::{MetricsAccumulator, MetricsReport};
use crate::model::{GradientSet, LinearForecaster};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Windows evaluated per chunk when streaming a full segment.
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Consecutive non-improving validation epochs tolerated before
    /// stopping.
    pub patience: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub loss_variant: LossVariant,
    pub initial_w1: f64,
    pub initial_alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Global-norm gradient clip; off by default.
    pub grad_clip: Option<f64>,
    pub inner_weight_source: InnerWeightSource,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 20,
            patience: 3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            loss_variant: LossVariant::Hybrid,
            initial_w1: 0.5,
            initial_alpha: 0.5,
            lambda1: 0.9,
            lambda2: 0.1,
            grad_clip: None,
            inner_weight_source: InnerWeightSource::Updated,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("adam betas must be in [0, 1)".into()));
        }
        if self.adam_eps <= 0.0 {
            return Err(Error::Config("adam_eps must be positive".into()));
        }
        for (name, v) in [
            ("initial_w1", self.initial_w1),
            ("initial_alpha", self.initial_alpha),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::Config("temperatures must be non-negative".into()));
        }
        if let Some(c) = self.grad_clip {
            if c <= 0.0 {
                return Err(Error::Config("grad_clip must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> LossPolicy {
        LossPolicy {
            variant: self.loss_variant,
            inner_source: self.inner_weight_source,
        }
    }
}

/// First/second-moment accumulators per parameter block plus the step
/// counter for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(model: &LinearForecaster) -> Self {
        let shapes: Vec<usize> = model.param_blocks().iter().map(|b| b.len()).collect();
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// Standard bias-corrected Adam update applied in place.
pub fn adam_step(
    model: &mut LinearForecaster,
    grads: &GradientSet,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    let grad_blocks = grads.blocks();
    let mut param_blocks = model.param_blocks_mut();
    if grad_blocks.len() != param_blocks.len()
        || grad_blocks
            .iter()
            .zip(param_blocks.iter())
            .any(|(g, p)| g.len() != p.len())
    {
        return Err(Error::InvalidArgument(
            "gradient blocks do not mirror the parameter set".into(),
        ));
    }
    state.step += 1;
    let t = state.step as f64;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let mc = 1.0 - b1.powf(t);
    let vc = 1.0 - b2.powf(t);
    for (bi, (params, grads)) in param_blocks.iter_mut().zip(grad_blocks.iter()).enumerate() {
        let m = &mut state.m[bi];
        let v = &mut state.v[bi];
        for k in 0..params.len() {
            let g = grads[k];
            m[k] = b1 * m[k] + (1.0 - b1) * g;
            v[k] = b2 * v[k] + (1.0 - b2) * g * g;
            let m_hat = m[k] / mc;
            let v_hat = v[k] / vc;
            params[k] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
        }
    }
    Ok(())
}

/// One row of the weight-trajectory log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub w1: f64,
    pub w2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub loss_g: f64,
    pub loss_s: f64,
    pub loss_t: f64,
    pub combined: f64,
}

/// Everything a training run produces besides the mutated model.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub train_loss_per_epoch: Vec<f64>,
    pub val_mse_per_epoch: Vec<f64>,
    pub final_weights: LossWeights,
    pub trajectory: Vec<TrajectoryRecord>,
}

/// Run the optimization loop. On return the model holds the parameters of
/// the best validation epoch.
pub fn train(
    model: &mut LinearForecaster,
    train_plan: &WindowPlan,
    val_plan: &WindowPlan,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_plan.num_windows() == 0 || val_plan.num_windows() == 0 {
        return Err(Error::Config("empty train or validation stream".into()));
    }
    let policy = config.policy();
    let mut weights = policy.initial_weights(
        config.initial_w1,
        config.initial_alpha,
        config.lambda1,
        config.lambda2,
    )?;
    let mut adam = AdamState::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut indices: Vec<usize> = (0..train_plan.num_windows()).collect();

    let mut trajectory = Vec::new();
    let mut train_loss_per_epoch = Vec::new();
    let mut val_mse_per_epoch = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = model.clone();
    let mut bad_epochs = 0usize;
    let mut step: u64 = 0;

    for epoch in 0..config.max_epochs {
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut steps_in_epoch = 0usize;
        for chunk in indices.chunks(config.batch_size) {
            step += 1;
            let batch = train_plan.batch(chunk)?;
            let output = model.forward(batch.inputs())?;
            let (loss_g, loss_s, loss_t) = component_losses(&output, &batch)?;
            if !loss_g.is_finite() || !loss_s.is_finite() || !loss_t.is_finite() {
                return Err(Error::Numerical {
                    step,
                    message: format!(
                        "non-finite loss (G={loss_g}, S={loss_s}, T={loss_t}) in epoch {epoch}"
                    ),
                });
            }
            weights = policy.update(&weights, loss_g, loss_s, loss_t)?;
            let breakdown = policy.breakdown(&weights, loss_g, loss_s, loss_t)?;
            trajectory.push(TrajectoryRecord {
                step,
                w1: weights.w1,
                w2: weights.w2,
                alpha: weights.alpha,
                beta: weights.beta,
                loss_g,
                loss_s,
                loss_t,
                combined: breakdown.combined,
            });
            let stream_grads = policy.gradients(&weights, &output, &batch)?;
            let mut grads = model.backward(batch.inputs(), &stream_grads)?;
            if let Some(clip) = config.grad_clip {
                let norm = grads.l2_norm();
                if norm > clip {
                    grads.scale(clip / norm);
                }
            }
            adam_step(model, &grads, &mut adam, config)?;
            if !model.all_finite() {
                return Err(Error::Numerical {
                    step,
                    message: format!("non-finite parameter after update in epoch {epoch}"),
                });
            }
            loss_sum += breakdown.combined;
            steps_in_epoch += 1;
        }
        train_loss_per_epoch.push(loss_sum / steps_in_epoch as f64);
        let val = evaluate(model, val_plan)?;
        val_mse_per_epoch.push(val.overall_mse);
        log::debug!(
            "epoch {epoch}: train loss {:.6}, val mse {:.6}",
            train_loss_per_epoch[epoch],
            val.overall_mse
        );
        if val.overall_mse < best_val {
            best_val = val.overall_mse;
            best_epoch = epoch;
            best_params = model.clone();
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
            if bad_epochs >= config.patience.max(1) {
                break;
            }
        }
    }

    *model = best_params;
    Ok(TrainOutcome {
        epochs_run: val_mse_per_epoch.len(),
        best_epoch,
        best_val_mse: best_val,
        train_loss_per_epoch,
        val_mse_per_epoch,
        final_weights: weights,
        trajectory,
    })
}

/// Stream a whole segment through the model and reduce to the six metrics.
pub fn evaluate(model: &LinearForecaster, plan: &WindowPlan) -> Result<MetricsReport> {
    let n = plan.num_windows();
    if n == 0 {
        return Err(Error::Config("empty evaluation stream".into()));
    }
    let mut acc = MetricsAccumulator::new();
    let indices: Vec<usize> = (0..n).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let batch = plan.batch(chunk)?;
        let output = model.forward(batch.inputs())?;
        acc.update(&output, &batch)?;
    }
    acc.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{TargetDecomposition, WindowPlan};
    use crate::model::{InitScheme, ModelConfig};
    use crate::series::TimeSeries;
    use crate::synth::{generate, SeasonalComponent, SynthSpec, TrendKind};

    fn toy_series() -> TimeSeries {
        generate(&SynthSpec {
            length: 400,
            channels: 1,
            trend: TrendKind::Linear { slope: 0.01 },
            seasonal: vec![SeasonalComponent {
                amplitude: 1.0,
                period: 24.0,
                phase: 0.3,
            }],
            noise_std: 0.05,
            seed: 11,
        })
        .unwrap()
    }

    fn plans(series: &TimeSeries) -> (WindowPlan, WindowPlan) {
        let train =
            WindowPlan::new(series, 0..300, 24, 12, 7, TargetDecomposition::PerWindow).unwrap();
        let val =
            WindowPlan::new(series, 276..400, 24, 12, 7, TargetDecomposition::PerWindow).unwrap();
        (train, val)
    }

    fn model_config() -> ModelConfig {
        ModelConfig {
            input_length: 24,
            horizon: 12,
            num_channels: 1,
            share_channels: true,
            kernel: 7,
            init: InitScheme::UniformAverage,
            seed: 0,
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let before = model.clone();
        let grads = model.zeros_like();
        let mut state = AdamState::new(&model);
        let config = TrainConfig::default();
        adam_step(&mut model, &grads, &mut state, &config).unwrap();
        assert_eq!(model, before);
        assert_eq!(state.step(), 1);
    }

    #[test]
    fn adam_first_step_approximates_signed_lr() {
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let mut grads = model.zeros_like();
        grads.seasonal_weight[0][(0, 0)] = 0.37;
        grads.trend_bias[0][3] = -2.0;
        let before = model.clone();
        let mut state = AdamState::new(&model);
        let config = TrainConfig::default();
        adam_step(&mut model, &grads, &mut state, &config).unwrap();
        // Step 1: m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps).
        let lr = config.learning_rate;
        let d_w = model.param_blocks()[0][0] - before.param_blocks()[0][0];
        assert!((d_w - (-lr * 0.37 / (0.37 + config.adam_eps))).abs() < 1e-15);
        let bias_block_before = before.param_blocks()[3][3];
        let bias_block_after = model.param_blocks()[3][3];
        let d_b = bias_block_after - bias_block_before;
        assert!((d_b - (lr * 2.0 / (2.0 + config.adam_eps))).abs() < 1e-15);
    }

    #[test]
    fn adam_constant_gradient_approaches_lr_magnitude() {
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let mut grads = model.zeros_like();
        grads.seasonal_weight[0][(1, 2)] = 0.8;
        let mut state = AdamState::new(&model);
        let config = TrainConfig::default();
        // Row-major entry (1, 2) of the 12x24 seasonal weight block.
        let idx = 24 + 2;
        let mut prev = model.param_blocks()[0][idx];
        for _ in 0..1000 {
            adam_step(&mut model, &grads, &mut state, &config).unwrap();
            prev = model.param_blocks()[0][idx];
        }
        let last_delta = {
            adam_step(&mut model, &grads, &mut state, &config).unwrap();
            model.param_blocks()[0][idx] - prev
        };
        // Magnitude approaches lr * sign(g) within 1%.
        assert!((last_delta.abs() - config.learning_rate).abs() < 0.01 * config.learning_rate);
        assert!(last_delta < 0.0);
    }

    #[test]
    fn zero_learning_rate_is_rejected_but_weights_would_update() {
        // lr = 0 fails validation; the freeze-theta-not-w behavior is
        // exercised through a tiny lr instead.
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());

        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let config = TrainConfig {
            learning_rate: 1e-300,
            max_epochs: 1,
            seed: 5,
            ..TrainConfig::default()
        };
        let before = model.clone();
        let outcome = train(&mut model, &train_plan, &val_plan, &config).unwrap();
        // Parameters essentially frozen; the weight state still moved.
        for (a, b) in model
            .param_blocks()
            .iter()
            .zip(before.param_blocks().iter())
        {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-250);
            }
        }
        let w = outcome.final_weights;
        assert!(w.w1 != 0.5 || w.alpha != 0.5);
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let config = TrainConfig {
            max_epochs: 3,
            seed: 42,
            ..TrainConfig::default()
        };
        let mut m1 = LinearForecaster::new(model_config()).unwrap();
        let o1 = train(&mut m1, &train_plan, &val_plan, &config).unwrap();
        let mut m2 = LinearForecaster::new(model_config()).unwrap();
        let o2 = train(&mut m2, &train_plan, &val_plan, &config).unwrap();
        for (a, b) in m1.param_blocks().iter().zip(m2.param_blocks().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(o1.trajectory, o2.trajectory);
        assert_eq!(o1.val_mse_per_epoch, o2.val_mse_per_epoch);
    }

    #[test]
    fn trajectory_length_equals_steps() {
        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let config = TrainConfig {
            max_epochs: 2,
            batch_size: 50,
            ..TrainConfig::default()
        };
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let outcome = train(&mut model, &train_plan, &val_plan, &config).unwrap();
        let n = train_plan.num_windows();
        let steps_per_epoch = n.div_ceil(50);
        assert_eq!(
            outcome.trajectory.len(),
            steps_per_epoch * outcome.epochs_run
        );
        assert_eq!(
            outcome.trajectory.last().unwrap().step,
            outcome.trajectory.len() as u64
        );
    }

    #[test]
    fn restored_model_matches_best_epoch() {
        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let config = TrainConfig {
            max_epochs: 6,
            patience: 2,
            seed: 3,
            ..TrainConfig::default()
        };
        let mut model = LinearForecaster::new(model_config()).unwrap();
        let outcome = train(&mut model, &train_plan, &val_plan, &config).unwrap();
        let val = evaluate(&model, &val_plan).unwrap();
        assert!((val.overall_mse - outcome.best_val_mse).abs() < 1e-12);
        assert!(outcome
            .val_mse_per_epoch
            .iter()
            .all(|&v| v >= outcome.best_val_mse));
    }

    #[test]
    fn fixed_weight_equals_hybrid_with_zero_lambdas() {
        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let base = TrainConfig {
            max_epochs: 2,
            seed: 9,
            ..TrainConfig::default()
        };
        let fixed = TrainConfig {
            loss_variant: LossVariant::FixedWeight,
            ..base.clone()
        };
        let zero_lambda = TrainConfig {
            loss_variant: LossVariant::Hybrid,
            lambda1: 0.0,
            lambda2: 0.0,
            ..base
        };
        let mut m1 = LinearForecaster::new(model_config()).unwrap();
        train(&mut m1, &train_plan, &val_plan, &fixed).unwrap();
        let mut m2 = LinearForecaster::new(model_config()).unwrap();
        train(&mut m2, &train_plan, &val_plan, &zero_lambda).unwrap();
        for (a, b) in m1.param_blocks().iter().zip(m2.param_blocks().iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn diverging_run_aborts_naming_the_step() {
        let series = toy_series();
        let (train_plan, val_plan) = plans(&series);
        let mut model = LinearForecaster::new(model_config()).unwrap();
        // An absurd learning rate blasts the parameters to ~1e160 on the
        // first step; the squared residuals overflow on the second.
        let config = TrainConfig {
            learning_rate: 1e160,
            max_epochs: 1,
            ..TrainConfig::default()
        };
        let err = train(&mut model, &train_plan, &val_plan, &config).unwrap_err();
        match err {
            Error::Numerical { step, .. } => assert!(step >= 2),
            other => panic!("expected numerical abort, got {other}"),
        }
    }

    #[test]
    fn evaluate_on_perfect_model_is_zero() {
        // A constant series is predicted exactly by the averaging init.
        let series = TimeSeries::from_column(vec![3.0; 100]).unwrap();
        // Constant channels fail standardization, so build the plan on the
        // raw series directly.
        let plan =
            WindowPlan::new(&series, 0..100, 24, 12, 7, TargetDecomposition::PerWindow).unwrap();
        let model = LinearForecaster::new(model_config()).unwrap();
        let report = evaluate(&model, &plan).unwrap();
        assert!(report.overall_mse < 1e-20);
        assert!(report.seasonal_mse < 1e-20);
        assert!(report.trend_mse < 1e-20);
    }
}
