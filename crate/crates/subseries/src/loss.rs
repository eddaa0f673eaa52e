//! The dual min-max hybrid loss with exponentiated weight updates.
//!
//! Three scalar losses are formed per batch: the overall MSE of the
//! combined forecast (`loss_g`), and the per-component MSEs of the
//! seasonal and trend streams (`loss_s`, `loss_t`). Two simplex-constrained
//! weight pairs are then re-estimated multiplicatively — mass moves toward
//! whichever loss is currently larger — and the training loss is
//!
//! ```text
//! combined = w1 * loss_g + w2 * (alpha * loss_s + beta * loss_t)
//! ```
//!
//! The weights are updated by closed form, not by gradient descent, and are
//! held constant while differentiating the combined loss with respect to
//! the predictions.

use crate::data::WindowBatch;
use crate::error::{Error, Result};
use crate::metrics::mse;
use crate::model::{ForecastOutput, StreamGradients};
use serde::{Deserialize, Serialize};

/// The four simplex-constrained scalars plus their update temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w1: f64,
    pub w2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LossWeights {
    /// Conventional starting point: everything at 1/2.
    pub fn balanced(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(0.5, 0.5, lambda1, lambda2)
    }

    pub fn new(initial_w1: f64, initial_alpha: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        let w = Self {
            w1: initial_w1,
            w2: 1.0 - initial_w1,
            alpha: initial_alpha,
            beta: 1.0 - initial_alpha,
            lambda1,
            lambda2,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w1", self.w1),
            ("w2", self.w2),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        if (self.w1 + self.w2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "w1 + w2 = {} != 1",
                self.w1 + self.w2
            )));
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "alpha + beta = {} != 1",
                self.alpha + self.beta
            )));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} must be non-negative and finite"
                )));
            }
        }
        Ok(())
    }
}

/// All five scalars of one loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub loss_g: f64,
    pub loss_s: f64,
    pub loss_t: f64,
    pub loss_c: f64,
    pub combined: f64,
}

fn check_loss(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{name} = {v} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Overall, seasonal, and trend MSEs for one batch.
pub fn component_losses(output: &ForecastOutput, batch: &WindowBatch) -> Result<(f64, f64, f64)> {
    let loss_g = mse(output.combined(), batch.targets())?;
    let loss_s = mse(output.seasonal_pred(), batch.targets_seasonal())?;
    let loss_t = mse(output.trend_pred(), batch.targets_trend())?;
    Ok((loss_g, loss_s, loss_t))
}

/// One multiplicative reweighting step on a two-point simplex.
///
/// Exponent arguments are shifted by their maximum over the entries with
/// nonzero prior mass, which is algebraically a no-op but keeps the
/// arithmetic finite for losses far beyond exp's overflow threshold.
pub(crate) fn exp_reweight(wa: f64, la: f64, wb: f64, lb: f64, lambda: f64) -> (f64, f64) {
    let arg_a = lambda * la;
    let arg_b = lambda * lb;
    let mut shift = f64::NEG_INFINITY;
    if wa > 0.0 {
        shift = shift.max(arg_a);
    }
    if wb > 0.0 {
        shift = shift.max(arg_b);
    }
    let term_a = if wa > 0.0 {
        wa * (arg_a - shift).exp()
    } else {
        0.0
    };
    let term_b = if wb > 0.0 {
        wb * (arg_b - shift).exp()
    } else {
        0.0
    };
    let a = term_a / (term_a + term_b);
    (a, 1.0 - a)
}

/// Which inner weights feed the component loss that drives the outer
/// update. The update step re-estimates (alpha, beta) first and uses the
/// fresh values by default; `Previous` keeps the pre-update pair instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerWeightSource {
    #[default]
    Updated,
    Previous,
}

/// Full dual update: inner pair first, then the outer pair against the
/// resulting component loss.
pub fn update_weights(
    weights: &LossWeights,
    loss_g: f64,
    loss_s: f64,
    loss_t: f64,
) -> Result<LossWeights> {
    update_weights_with(weights, loss_g, loss_s, loss_t, InnerWeightSource::Updated)
}

pub fn update_weights_with(
    weights: &LossWeights,
    loss_g: f64,
    loss_s: f64,
    loss_t: f64,
    inner_source: InnerWeightSource,
) -> Result<LossWeights> {
    weights.validate()?;
    check_loss("loss_g", loss_g)?;
    check_loss("loss_s", loss_s)?;
    check_loss("loss_t", loss_t)?;
    let (alpha, beta) = exp_reweight(weights.alpha, loss_s, weights.beta, loss_t, weights.lambda2);
    let (ca, cb) = match inner_source {
        InnerWeightSource::Updated => (alpha, beta),
        InnerWeightSource::Previous => (weights.alpha, weights.beta),
    };
    let loss_c = ca * loss_s + cb * loss_t;
    let (w1, w2) = exp_reweight(weights.w1, loss_g, weights.w2, loss_c, weights.lambda1);
    Ok(LossWeights {
        w1,
        w2,
        alpha,
        beta,
        lambda1: weights.lambda1,
        lambda2: weights.lambda2,
    })
}

/// Evaluate the weighted loss with the current weights.
pub fn hybrid_loss(
    weights: &LossWeights,
    loss_g: f64,
    loss_s: f64,
    loss_t: f64,
) -> Result<LossBreakdown> {
    weights.validate()?;
    check_loss("loss_g", loss_g)?;
    check_loss("loss_s", loss_s)?;
    check_loss("loss_t", loss_t)?;
    let loss_c = weights.alpha * loss_s + weights.beta * loss_t;
    Ok(LossBreakdown {
        loss_g,
        loss_s,
        loss_t,
        loss_c,
        combined: weights.w1 * loss_g + weights.w2 * loss_c,
    })
}

/// Gradients of the weighted loss with respect to each prediction stream.
/// The weights are constants here; they were fixed by the update step.
pub fn loss_gradients(
    weights: &LossWeights,
    output: &ForecastOutput,
    batch: &WindowBatch,
) -> Result<StreamGradients> {
    gradients_with_outer(weights, weights.w1, weights.w2, output, batch)
}

fn gradients_with_outer(
    weights: &LossWeights,
    w1: f64,
    w2: f64,
    output: &ForecastOutput,
    batch: &WindowBatch,
) -> Result<StreamGradients> {
    if output.combined().dim() != batch.targets().dim() {
        return Err(Error::InvalidArgument(format!(
            "output shape {:?} vs target shape {:?}",
            output.combined().dim(),
            batch.targets().dim()
        )));
    }
    let (n, h, c) = batch.targets().dim();
    let scale = 2.0 / (n * h * c) as f64;
    let overall = output.combined() - batch.targets();
    let d_seasonal = overall.mapv(|v| w1 * scale * v)
        + (output.seasonal_pred() - batch.targets_seasonal())
            .mapv(|v| w2 * weights.alpha * scale * v);
    let d_trend = overall.mapv(|v| w1 * scale * v)
        + (output.trend_pred() - batch.targets_trend()).mapv(|v| w2 * weights.beta * scale * v);
    Ok(StreamGradients {
        d_seasonal,
        d_trend,
    })
}

/// Loss policy variants from the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// Full dual min-max behavior.
    #[default]
    Hybrid,
    /// Only the sub-series loss, with only (alpha, beta) updated.
    ComponentOnly,
    /// All four weights pinned at 0.5, updates disabled.
    FixedWeight,
}

impl std::str::FromStr for LossVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hybrid" => Ok(LossVariant::Hybrid),
            "component_only" => Ok(LossVariant::ComponentOnly),
            "fixed_weight" => Ok(LossVariant::FixedWeight),
            other => Err(Error::Config(format!("unknown loss variant '{other}'"))),
        }
    }
}

/// A loss variant plus the inner-weight ordering flag; the single object
/// the trainer consults each optimization step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossPolicy {
    pub variant: LossVariant,
    pub inner_source: InnerWeightSource,
}

/// Build the policy for a variant with default ordering.
pub fn make_variant(variant: LossVariant) -> LossPolicy {
    LossPolicy {
        variant,
        inner_source: InnerWeightSource::Updated,
    }
}

impl LossPolicy {
    /// Starting weights for a run. The fixed-weight variant pins all four
    /// at 0.5 regardless of the configured initial values.
    pub fn initial_weights(
        &self,
        initial_w1: f64,
        initial_alpha: f64,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<LossWeights> {
        match self.variant {
            LossVariant::FixedWeight => LossWeights::balanced(lambda1, lambda2),
            _ => LossWeights::new(initial_w1, initial_alpha, lambda1, lambda2),
        }
    }

    /// Per-step weight update as the variant prescribes.
    pub fn update(
        &self,
        weights: &LossWeights,
        loss_g: f64,
        loss_s: f64,
        loss_t: f64,
    ) -> Result<LossWeights> {
        match self.variant {
            LossVariant::Hybrid => {
                update_weights_with(weights, loss_g, loss_s, loss_t, self.inner_source)
            }
            LossVariant::ComponentOnly => {
                weights.validate()?;
                check_loss("loss_s", loss_s)?;
                check_loss("loss_t", loss_t)?;
                let (alpha, beta) =
                    exp_reweight(weights.alpha, loss_s, weights.beta, loss_t, weights.lambda2);
                Ok(LossWeights {
                    alpha,
                    beta,
                    ..*weights
                })
            }
            LossVariant::FixedWeight => {
                weights.validate()?;
                Ok(*weights)
            }
        }
    }

    /// The variant's effective outer pair: the component-only loss is the
    /// hybrid loss restricted to the component side of the simplex.
    fn effective_outer(&self, weights: &LossWeights) -> (f64, f64) {
        match self.variant {
            LossVariant::ComponentOnly => (0.0, 1.0),
            _ => (weights.w1, weights.w2),
        }
    }

    /// Evaluate the variant's training loss with the current weights.
    pub fn breakdown(
        &self,
        weights: &LossWeights,
        loss_g: f64,
        loss_s: f64,
        loss_t: f64,
    ) -> Result<LossBreakdown> {
        let (w1, w2) = self.effective_outer(weights);
        let loss_c = weights.alpha * loss_s + weights.beta * loss_t;
        check_loss("loss_g", loss_g)?;
        check_loss("loss_s", loss_s)?;
        check_loss("loss_t", loss_t)?;
        Ok(LossBreakdown {
            loss_g,
            loss_s,
            loss_t,
            loss_c,
            combined: w1 * loss_g + w2 * loss_c,
        })
    }

    /// Per-stream gradients of the variant's training loss.
    pub fn gradients(
        &self,
        weights: &LossWeights,
        output: &ForecastOutput,
        batch: &WindowBatch,
    ) -> Result<StreamGradients> {
        let (w1, w2) = self.effective_outer(weights);
        gradients_with_outer(weights, w1, w2, output, batch)
    }
}
