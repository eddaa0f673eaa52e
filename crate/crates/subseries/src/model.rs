//! Linear per-component forecaster over decomposed inputs.
//!
//! Each input window is split into seasonal and trend parts; an H×L linear
//! map (plus bias) per stream produces the component forecasts, and their
//! sum is the combined forecast. Gradients are closed-form: the model has
//! exactly four parameter blocks, so a finite-difference oracle in the
//! tests replaces autodiff.

use crate::error::{Error, Result};
use crate::series::decompose_values;
use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Every weight entry 1/L, biases zero: the untrained model predicts
    /// the input's moving average, which keeps early loss dynamics tame.
    #[default]
    UniformAverage,
    /// Uniform in [-1/sqrt(L), 1/sqrt(L)], deterministic given the seed.
    ScaledRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_length: usize,
    pub horizon: usize,
    pub num_channels: usize,
    /// One parameter set applied to every channel (true) or an independent
    /// set per channel (false).
    #[serde(default = "default_share")]
    pub share_channels: bool,
    pub kernel: usize,
    #[serde(default)]
    pub init: InitScheme,
    #[serde(default)]
    pub seed: u64,
}

fn default_share() -> bool {
    true
}

/// Seasonal prediction, trend prediction, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutput {
    seasonal_pred: Array3<f64>,
    trend_pred: Array3<f64>,
    combined: Array3<f64>,
}

impl ForecastOutput {
    /// `combined` is always computed as the elementwise sum, never stored
    /// independently.
    pub fn new(seasonal_pred: Array3<f64>, trend_pred: Array3<f64>) -> Result<Self> {
        if seasonal_pred.dim() != trend_pred.dim() {
            return Err(Error::InvalidArgument(format!(
                "stream shapes differ: {:?} vs {:?}",
                seasonal_pred.dim(),
                trend_pred.dim()
            )));
        }
        let combined = &seasonal_pred + &trend_pred;
        Ok(Self {
            seasonal_pred,
            trend_pred,
            combined,
        })
    }

    pub fn seasonal_pred(&self) -> &Array3<f64> {
        &self.seasonal_pred
    }

    pub fn trend_pred(&self) -> &Array3<f64> {
        &self.trend_pred
    }

    pub fn combined(&self) -> &Array3<f64> {
        &self.combined
    }
}

/// Upstream loss gradients per prediction stream, shape N×H×C each. Any
/// combined-stream term is already folded into both (combined is the sum,
/// so its gradient distributes identically).
#[derive(Debug, Clone)]
pub struct StreamGradients {
    pub d_seasonal: Array3<f64>,
    pub d_trend: Array3<f64>,
}

/// Gradients with respect to every parameter, same block structure as the
/// forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub seasonal_weight: Vec<Array2<f64>>,
    pub seasonal_bias: Vec<Array1<f64>>,
    pub trend_weight: Vec<Array2<f64>>,
    pub trend_bias: Vec<Array1<f64>>,
}

impl GradientSet {
    pub fn all_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for w in &self.seasonal_weight {
            out.push(w.as_slice().expect("standard layout"));
        }
        for b in &self.seasonal_bias {
            out.push(b.as_slice().expect("standard layout"));
        }
        for w in &self.trend_weight {
            out.push(w.as_slice().expect("standard layout"));
        }
        for b in &self.trend_bias {
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }

    /// Every gradient entry flattened in the same order as
    /// [`LinearForecaster::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    /// Global L2 norm over every entry, used for gradient clipping.
    pub fn l2_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for w in self
            .seasonal_weight
            .iter_mut()
            .chain(self.trend_weight.iter_mut())
        {
            w.mapv_inplace(|v| v * factor);
        }
        for b in self
            .seasonal_bias
            .iter_mut()
            .chain(self.trend_bias.iter_mut())
        {
            b.mapv_inplace(|v| v * factor);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearForecaster {
    config: ModelConfig,
    /// One matrix when channels are shared, C matrices otherwise.
    seasonal_weight: Vec<Array2<f64>>,
    seasonal_bias: Vec<Array1<f64>>,
    trend_weight: Vec<Array2<f64>>,
    trend_bias: Vec<Array1<f64>>,
}

impl LinearForecaster {
    pub fn new(config: ModelConfig) -> Result<Self> {
        if config.input_length == 0 || config.horizon == 0 || config.num_channels == 0 {
            return Err(Error::InvalidArgument(
                "model dimensions must be positive".into(),
            ));
        }
        if config.kernel == 0 || config.kernel.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "kernel must be an odd positive integer, got {}",
                config.kernel
            )));
        }
        let sets = if config.share_channels {
            1
        } else {
            config.num_channels
        };
        let (l, h) = (config.input_length, config.horizon);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut make_weight = || match config.init {
            InitScheme::UniformAverage => Array2::from_elem((h, l), 1.0 / l as f64),
            InitScheme::ScaledRandom => {
                let bound = 1.0 / (l as f64).sqrt();
                Array2::from_shape_fn((h, l), |_| rng.random_range(-bound..bound))
            }
        };
        let seasonal_weight: Vec<_> = (0..sets).map(|_| make_weight()).collect();
        let trend_weight: Vec<_> = (0..sets).map(|_| make_weight()).collect();
        let seasonal_bias = vec![Array1::zeros(h); sets];
        let trend_bias = vec![Array1::zeros(h); sets];
        Ok(Self {
            config,
            seasonal_weight,
            seasonal_bias,
            trend_weight,
            trend_bias,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kernel(&self) -> usize {
        self.config.kernel
    }

    fn check_inputs(&self, inputs: &Array3<f64>) -> Result<()> {
        let (_, l, c) = inputs.dim();
        if l != self.config.input_length || c != self.config.num_channels {
            return Err(Error::InvalidArgument(format!(
                "inputs of shape {:?} do not match model (L={}, C={})",
                inputs.dim(),
                self.config.input_length,
                self.config.num_channels
            )));
        }
        if inputs.dim().0 == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        Ok(())
    }

    /// Decompose every input window with the model's kernel.
    fn decompose_inputs(&self, inputs: &Array3<f64>) -> (Array3<f64>, Array3<f64>) {
        let (n, l, c) = inputs.dim();
        let mut seasonal = Array3::zeros((n, l, c));
        let mut trend = Array3::zeros((n, l, c));
        for i in 0..n {
            let (t, s) = decompose_values(inputs.index_axis(Axis(0), i), self.config.kernel);
            trend.index_axis_mut(Axis(0), i).assign(&t);
            seasonal.index_axis_mut(Axis(0), i).assign(&s);
        }
        (seasonal, trend)
    }

    /// Apply one stream's linear maps to its decomposed input component.
    fn apply_stream(
        &self,
        component: &Array3<f64>,
        weight: &[Array2<f64>],
        bias: &[Array1<f64>],
    ) -> Array3<f64> {
        let (n, l, c) = component.dim();
        let h = self.config.horizon;
        let mut pred = Array3::zeros((n, h, c));
        if self.config.share_channels {
            // Fold windows and channels into one (L, N*C) matrix so a
            // single matmul covers the whole batch.
            let mut x = Array2::zeros((l, n * c));
            for i in 0..n {
                x.slice_mut(s![.., i * c..(i + 1) * c])
                    .assign(&component.index_axis(Axis(0), i));
            }
            let p = weight[0].dot(&x);
            let b = bias[0].view().insert_axis(Axis(1));
            for i in 0..n {
                let mut window = pred.index_axis_mut(Axis(0), i);
                window.assign(&p.slice(s![.., i * c..(i + 1) * c]));
                window += &b;
            }
        } else {
            for ch in 0..c {
                let mut x = Array2::zeros((l, n));
                for i in 0..n {
                    x.column_mut(i).assign(&component.slice(s![i, .., ch]));
                }
                let p = weight[ch].dot(&x);
                for i in 0..n {
                    for j in 0..h {
                        pred[(i, j, ch)] = p[(j, i)] + bias[ch][j];
                    }
                }
            }
        }
        pred
    }

    /// Decompose the batch, run both linear streams, and sum them.
    pub fn forward(&self, inputs: &Array3<f64>) -> Result<ForecastOutput> {
        self.check_inputs(inputs)?;
        let (seasonal_in, trend_in) = self.decompose_inputs(inputs);
        let seasonal_pred =
            self.apply_stream(&seasonal_in, &self.seasonal_weight, &self.seasonal_bias);
        let trend_pred = self.apply_stream(&trend_in, &self.trend_weight, &self.trend_bias);
        ForecastOutput::new(seasonal_pred, trend_pred)
    }

    fn stream_gradient(
        &self,
        component: &Array3<f64>,
        grads: &Array3<f64>,
    ) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let (n, l, c) = component.dim();
        let h = self.config.horizon;
        // Gradients are written into freshly allocated standard-layout
        // arrays; the Adam step flattens blocks by slice and relies on it.
        if self.config.share_channels {
            let mut x = Array2::zeros((l, n * c));
            let mut g = Array2::zeros((h, n * c));
            for i in 0..n {
                x.slice_mut(s![.., i * c..(i + 1) * c])
                    .assign(&component.index_axis(Axis(0), i));
                g.slice_mut(s![.., i * c..(i + 1) * c])
                    .assign(&grads.index_axis(Axis(0), i));
            }
            let mut dw = Array2::zeros((h, l));
            general_mat_mul(1.0, &g, &x.t(), 0.0, &mut dw);
            let db = Array1::from_iter(g.rows().into_iter().map(|r| r.sum()));
            (vec![dw], vec![db])
        } else {
            let mut dws = Vec::with_capacity(c);
            let mut dbs = Vec::with_capacity(c);
            for ch in 0..c {
                let mut x = Array2::zeros((l, n));
                let mut g = Array2::zeros((h, n));
                for i in 0..n {
                    x.column_mut(i).assign(&component.slice(s![i, .., ch]));
                    g.column_mut(i).assign(&grads.slice(s![i, .., ch]));
                }
                let mut dw = Array2::zeros((h, l));
                general_mat_mul(1.0, &g, &x.t(), 0.0, &mut dw);
                dws.push(dw);
                dbs.push(Array1::from_iter(g.rows().into_iter().map(|r| r.sum())));
            }
            (dws, dbs)
        }
    }

    /// Exact gradients of the loss with respect to every parameter, given
    /// the per-stream upstream gradients.
    pub fn backward(&self, inputs: &Array3<f64>, grads: &StreamGradients) -> Result<GradientSet> {
        self.check_inputs(inputs)?;
        let expected = (
            inputs.dim().0,
            self.config.horizon,
            self.config.num_channels,
        );
        if grads.d_seasonal.dim() != expected || grads.d_trend.dim() != expected {
            return Err(Error::InvalidArgument(format!(
                "stream gradient shapes {:?}/{:?} do not match {:?}",
                grads.d_seasonal.dim(),
                grads.d_trend.dim(),
                expected
            )));
        }
        let (seasonal_in, trend_in) = self.decompose_inputs(inputs);
        let (seasonal_weight, seasonal_bias) =
            self.stream_gradient(&seasonal_in, &grads.d_seasonal);
        let (trend_weight, trend_bias) = self.stream_gradient(&trend_in, &grads.d_trend);
        Ok(GradientSet {
            seasonal_weight,
            seasonal_bias,
            trend_weight,
            trend_bias,
        })
    }

    /// Zero-valued gradient set with this model's block structure.
    pub fn zeros_like(&self) -> GradientSet {
        GradientSet {
            seasonal_weight: self
                .seasonal_weight
                .iter()
                .map(|w| Array2::zeros(w.dim()))
                .collect(),
            seasonal_bias: self
                .seasonal_bias
                .iter()
                .map(|b| Array1::zeros(b.len()))
                .collect(),
            trend_weight: self
                .trend_weight
                .iter()
                .map(|w| Array2::zeros(w.dim()))
                .collect(),
            trend_bias: self
                .trend_bias
                .iter()
                .map(|b| Array1::zeros(b.len()))
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.seasonal_weight
            .iter()
            .chain(self.trend_weight.iter())
            .all(|w| w.iter().all(|v| v.is_finite()))
            && self
                .seasonal_bias
                .iter()
                .chain(self.trend_bias.iter())
                .all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for w in &mut self.seasonal_weight {
            out.push(w.as_slice_mut().expect("standard layout"));
        }
        for b in &mut self.seasonal_bias {
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        for w in &mut self.trend_weight {
            out.push(w.as_slice_mut().expect("standard layout"));
        }
        for b in &mut self.trend_bias {
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub(crate) fn param_blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for w in &self.seasonal_weight {
            out.push(w.as_slice().expect("standard layout"));
        }
        for b in &self.seasonal_bias {
            out.push(b.as_slice().expect("standard layout"));
        }
        for w in &self.trend_weight {
            out.push(w.as_slice().expect("standard layout"));
        }
        for b in &self.trend_bias {
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }

    /// Total number of scalar parameters.
    pub fn num_params(&self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }

    /// Every parameter flattened in block order (seasonal weights, seasonal
    /// biases, trend weights, trend biases; row-major within a block).
    /// [`GradientSet::flat`] uses the same order.
    pub fn params_flat(&self) -> Vec<f64> {
        self.param_blocks()
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    /// Replace every parameter from a flat vector in [`Self::params_flat`]
    /// order.
    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} parameters",
                values.len(),
                self.num_params()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite parameter value".into()));
        }
        let mut offset = 0;
        for block in self.param_blocks_mut() {
            block.copy_from_slice(&values[offset..offset + block.len()]);
            offset += block.len();
        }
        Ok(())
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = CheckpointFile {
            schema_version: 1,
            config: self.config.clone(),
            seasonal_weight: self.seasonal_weight.iter().map(flatten2).collect(),
            seasonal_bias: self.seasonal_bias.iter().map(|b| b.to_vec()).collect(),
            trend_weight: self.trend_weight.iter().map(flatten2).collect(),
            trend_bias: self.trend_bias.iter().map(|b| b.to_vec()).collect(),
        };
        let path = path.as_ref();
        let json = serde_json::to_string(&file)?;
        std::fs::write(path, json).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let file: CheckpointFile = serde_json::from_str(&text)?;
        if file.schema_version != 1 {
            return Err(Error::InvalidData(format!(
                "unsupported checkpoint schema version {}",
                file.schema_version
            )));
        }
        let (l, h) = (file.config.input_length, file.config.horizon);
        let sets = if file.config.share_channels {
            1
        } else {
            file.config.num_channels
        };
        let unflatten = |blocks: Vec<Vec<f64>>, what: &str| -> Result<Vec<Array2<f64>>> {
            if blocks.len() != sets {
                return Err(Error::InvalidData(format!(
                    "checkpoint has {} {what} blocks, expected {sets}",
                    blocks.len()
                )));
            }
            blocks
                .into_iter()
                .map(|flat| {
                    Array2::from_shape_vec((h, l), flat)
                        .map_err(|e| Error::InvalidData(format!("{what}: {e}")))
                })
                .collect()
        };
        let biases = |blocks: Vec<Vec<f64>>, what: &str| -> Result<Vec<Array1<f64>>> {
            if blocks.len() != sets || blocks.iter().any(|b| b.len() != h) {
                return Err(Error::InvalidData(format!("{what} bias shape mismatch")));
            }
            Ok(blocks.into_iter().map(Array1::from_vec).collect())
        };
        let model = Self {
            seasonal_weight: unflatten(file.seasonal_weight, "seasonal_weight")?,
            seasonal_bias: biases(file.seasonal_bias, "seasonal")?,
            trend_weight: unflatten(file.trend_weight, "trend_weight")?,
            trend_bias: biases(file.trend_bias, "trend")?,
            config: file.config,
        };
        if !model.all_finite() {
            return Err(Error::InvalidData(
                "checkpoint contains non-finite parameters".into(),
            ));
        }
        Ok(model)
    }
}

fn flatten2(arr: &Array2<f64>) -> Vec<f64> {
    arr.iter().copied().collect()
}

/// On-disk checkpoint layout: shapes plus parameter arrays in row-major
/// order. JSON doubles round-trip bit-exactly (shortest-representation
/// printing), which the tests assert.
#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    schema_version: u32,
    config: ModelConfig,
    seasonal_weight: Vec<Vec<f64>>,
    seasonal_bias: Vec<Vec<f64>>,
    trend_weight: Vec<Vec<f64>>,
    trend_bias: Vec<Vec<f64>>,
}
