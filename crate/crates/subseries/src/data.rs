//! CSV ingestion, benchmark-convention splitting, standardization, and
//! supervised window extraction with decomposed targets.
//!
//! Split conventions follow the long-horizon forecasting benchmark family:
//! the ETT datasets use fixed month-based boundaries (12/4/4 months of
//! hourly or 15-minute rows), everything else a 0.7/0.1/0.2 ratio split.
//! Validation and test segments are prefixed with `input_length` rows of
//! context borrowed from the preceding segment, so every target row of a
//! segment is reachable by a full input window.

use crate::error::{Error, Result};
use crate::series::{decompose_values, TimeSeries};
use ndarray::{s, Array1, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::path::Path;

/// ETT hourly boundaries: 12/4/4 months of 30-day months, 24 rows per day.
const ETT_HOURLY_TRAIN_END: usize = 12 * 30 * 24;
const ETT_HOURLY_VAL_END: usize = 16 * 30 * 24;
const ETT_HOURLY_TEST_END: usize = 20 * 30 * 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Fixed month boundaries for the hourly ETT files.
    EttHourly,
    /// The same boundaries scaled by four for the 15-minute ETT files.
    EttMinute,
    /// Proportional split by `ratios`.
    Ratio,
}

/// How a segment is carved into train/val/test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    /// Train/val/test fractions, used when `mode == Ratio`.
    pub ratios: [f64; 3],
    pub input_length: usize,
    pub horizon: usize,
}

impl SplitSpec {
    pub fn new(mode: SplitMode, input_length: usize, horizon: usize) -> Result<Self> {
        Self::with_ratios(mode, [0.7, 0.1, 0.2], input_length, horizon)
    }

    pub fn with_ratios(
        mode: SplitMode,
        ratios: [f64; 3],
        input_length: usize,
        horizon: usize,
    ) -> Result<Self> {
        if input_length == 0 || horizon == 0 {
            return Err(Error::InvalidArgument(
                "input_length and horizon must be >= 1".into(),
            ));
        }
        if mode == SplitMode::Ratio {
            if ratios.iter().any(|&r| r < 0.0) {
                return Err(Error::InvalidArgument("negative split ratio".into()));
            }
            let sum: f64 = ratios.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "split ratios must sum to 1, got {sum}"
                )));
            }
        }
        Ok(Self {
            mode,
            ratios,
            input_length,
            horizon,
        })
    }
}

/// Row ranges for the three segments. Validation and test ranges already
/// include the `input_length` rows of context from the preceding segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentRanges {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl SegmentRanges {
    /// Stride-1 window counts `(train, val, test)` for the given (L, H).
    pub fn window_counts(&self, input_length: usize, horizon: usize) -> (usize, usize, usize) {
        let count = |r: &Range<usize>| window_count(r.len(), input_length, horizon);
        (count(&self.train), count(&self.val), count(&self.test))
    }
}

/// Number of stride-1 windows in a segment: `len - L - H + 1`.
pub fn window_count(segment_len: usize, input_length: usize, horizon: usize) -> usize {
    (segment_len + 1).saturating_sub(input_length + horizon)
}

/// Carve a series into train/val/test row ranges per the benchmark
/// conventions described in the module docs.
pub fn split(series: &TimeSeries, spec: &SplitSpec) -> Result<SegmentRanges> {
    let t = series.len();
    let l = spec.input_length;
    let (train_end, val_end, test_end) = match spec.mode {
        SplitMode::EttHourly => (
            ETT_HOURLY_TRAIN_END,
            ETT_HOURLY_VAL_END,
            ETT_HOURLY_TEST_END,
        ),
        SplitMode::EttMinute => (
            4 * ETT_HOURLY_TRAIN_END,
            4 * ETT_HOURLY_VAL_END,
            4 * ETT_HOURLY_TEST_END,
        ),
        SplitMode::Ratio => {
            let train_end = (spec.ratios[0] * t as f64).floor() as usize;
            let test_len = (spec.ratios[2] * t as f64).floor() as usize;
            (train_end, t - test_len, t)
        }
    };
    if test_end > t {
        return Err(Error::Config(format!(
            "series has {t} rows but the split needs {test_end}"
        )));
    }
    if train_end < l || val_end < l {
        return Err(Error::Config(
            "segment boundaries shorter than input length".into(),
        ));
    }
    let ranges = SegmentRanges {
        train: 0..train_end,
        val: train_end - l..val_end,
        test: val_end - l..test_end,
    };
    let (a, b, c) = ranges.window_counts(l, spec.horizon);
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::Config(format!(
            "a segment is too short for one (L={l}, H={}) window: counts ({a}, {b}, {c})",
            spec.horizon
        )));
    }
    Ok(ranges)
}

/// Per-channel mean and population standard deviation over the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fit standardization statistics on the training rows only.
pub fn fit_standardizer(series: &TimeSeries, train: &Range<usize>) -> Result<StandardizationStats> {
    if train.is_empty() || train.end > series.len() {
        return Err(Error::InvalidArgument(format!(
            "train range {train:?} invalid for series of length {}",
            series.len()
        )));
    }
    let rows = series.values().slice(s![train.clone(), ..]);
    let n = rows.nrows() as f64;
    let mean = rows.mean_axis(Axis(0)).expect("non-empty");
    let mut std = Array1::zeros(rows.ncols());
    for c in 0..rows.ncols() {
        let var = rows
            .index_axis(Axis(1), c)
            .iter()
            .map(|v| (v - mean[c]) * (v - mean[c]))
            .sum::<f64>()
            / n;
        if var <= 0.0 {
            return Err(Error::InvalidData(format!(
                "channel '{}' has zero variance over the training rows",
                series.channel_names()[c]
            )));
        }
        std[c] = var.sqrt();
    }
    Ok(StandardizationStats {
        mean: mean.to_vec(),
        std: std.to_vec(),
    })
}

impl StandardizationStats {
    /// Apply `(x - mean) / std` to every row of the series.
    pub fn apply(&self, series: &TimeSeries) -> Result<TimeSeries> {
        if self.mean.len() != series.num_channels() {
            return Err(Error::InvalidArgument(format!(
                "stats for {} channels applied to {}",
                self.mean.len(),
                series.num_channels()
            )));
        }
        let mut values = series.values().clone();
        for (c, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.mean[c]) / self.std[c]);
        }
        TimeSeries::new(
            values,
            series.channel_names().to_vec(),
            series.timestamps().map(|t| t.to_vec()),
        )
    }
}

/// How the seasonal/trend ground truth for the target windows is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetDecomposition {
    /// Decompose each H-row target window in isolation (replicate padding
    /// within the window). Matches what a model decomposing finite windows
    /// sees, and is the default.
    #[default]
    PerWindow,
    /// Decompose the full standardized series once, then slice target rows
    /// out of the component matrices. Kept for sensitivity checks.
    FullSeries,
}

/// Aligned (input, target, target-seasonal, target-trend) window tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBatch {
    inputs: Array3<f64>,
    targets: Array3<f64>,
    targets_seasonal: Array3<f64>,
    targets_trend: Array3<f64>,
}

impl WindowBatch {
    pub fn new(
        inputs: Array3<f64>,
        targets: Array3<f64>,
        targets_seasonal: Array3<f64>,
        targets_trend: Array3<f64>,
    ) -> Result<Self> {
        let (n, _, c) = inputs.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        for (name, tensor) in [
            ("targets", &targets),
            ("targets_seasonal", &targets_seasonal),
            ("targets_trend", &targets_trend),
        ] {
            let (tn, _, tc) = tensor.dim();
            if tn != n || tc != c {
                return Err(Error::InvalidArgument(format!(
                    "{name} shape {:?} inconsistent with inputs {:?}",
                    tensor.dim(),
                    inputs.dim()
                )));
            }
        }
        if targets_seasonal.dim() != targets.dim() || targets_trend.dim() != targets.dim() {
            return Err(Error::InvalidArgument(
                "target component shapes differ from targets".into(),
            ));
        }
        let max_gap = targets
            .iter()
            .zip(targets_seasonal.iter().zip(targets_trend.iter()))
            .map(|(t, (ts, tt))| (t - ts - tt).abs())
            .fold(0.0f64, f64::max);
        if max_gap > 1e-9 {
            return Err(Error::InvalidData(format!(
                "seasonal+trend fails to reconstruct targets (max gap {max_gap:e})"
            )));
        }
        Ok(Self {
            inputs,
            targets,
            targets_seasonal,
            targets_trend,
        })
    }

    pub fn inputs(&self) -> &Array3<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &Array3<f64> {
        &self.targets
    }

    pub fn targets_seasonal(&self) -> &Array3<f64> {
        &self.targets_seasonal
    }

    pub fn targets_trend(&self) -> &Array3<f64> {
        &self.targets_trend
    }

    pub fn num_windows(&self) -> usize {
        self.inputs.dim().0
    }

    pub fn horizon(&self) -> usize {
        self.targets.dim().1
    }

    pub fn num_channels(&self) -> usize {
        self.inputs.dim().2
    }
}

/// A segment prepared for window extraction. Owns the segment rows (and,
/// for [`TargetDecomposition::FullSeries`], the pre-decomposed components)
/// and materializes batches on demand so long-horizon runs never hold every
/// window tensor in memory at once.
#[derive(Debug, Clone)]
pub struct WindowPlan {
    segment: Array2<f64>,
    seasonal: Option<Array2<f64>>,
    trend: Option<Array2<f64>>,
    input_length: usize,
    horizon: usize,
    kernel: usize,
}

impl WindowPlan {
    pub fn new(
        series: &TimeSeries,
        segment: Range<usize>,
        input_length: usize,
        horizon: usize,
        kernel: usize,
        target_decomposition: TargetDecomposition,
    ) -> Result<Self> {
        if segment.end > series.len() || segment.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "segment {segment:?} invalid for series of length {}",
                series.len()
            )));
        }
        if segment.len() < input_length + horizon {
            return Err(Error::Config(format!(
                "segment of {} rows is shorter than L+H = {}",
                segment.len(),
                input_length + horizon
            )));
        }
        let seg_values = series.values().slice(s![segment.clone(), ..]).to_owned();
        let (seasonal, trend) = match target_decomposition {
            TargetDecomposition::PerWindow => (None, None),
            TargetDecomposition::FullSeries => {
                // Decompose the whole series, then keep the segment rows.
                let (trend, seasonal) = decompose_values(series.values().view(), kernel);
                (
                    Some(seasonal.slice(s![segment.clone(), ..]).to_owned()),
                    Some(trend.slice(s![segment, ..]).to_owned()),
                )
            }
        };
        Ok(Self {
            segment: seg_values,
            seasonal,
            trend,
            input_length,
            horizon,
            kernel,
        })
    }

    pub fn num_windows(&self) -> usize {
        window_count(self.segment.nrows(), self.input_length, self.horizon)
    }

    pub fn input_length(&self) -> usize {
        self.input_length
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn num_channels(&self) -> usize {
        self.segment.ncols()
    }

    /// Materialize the windows at the given indices, in order.
    pub fn batch(&self, indices: &[usize]) -> Result<WindowBatch> {
        let (l, h) = (self.input_length, self.horizon);
        let c = self.segment.ncols();
        let n = indices.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty index set".into()));
        }
        let max = self.num_windows();
        let mut inputs = Array3::zeros((n, l, c));
        let mut targets = Array3::zeros((n, h, c));
        let mut targets_seasonal = Array3::zeros((n, h, c));
        let mut targets_trend = Array3::zeros((n, h, c));
        for (k, &i) in indices.iter().enumerate() {
            if i >= max {
                return Err(Error::InvalidArgument(format!(
                    "window index {i} out of range (max {max})"
                )));
            }
            let target_rows = self.segment.slice(s![i + l..i + l + h, ..]);
            inputs
                .index_axis_mut(Axis(0), k)
                .assign(&self.segment.slice(s![i..i + l, ..]));
            targets.index_axis_mut(Axis(0), k).assign(&target_rows);
            match (&self.seasonal, &self.trend) {
                (Some(seas), Some(trend)) => {
                    targets_seasonal
                        .index_axis_mut(Axis(0), k)
                        .assign(&seas.slice(s![i + l..i + l + h, ..]));
                    targets_trend
                        .index_axis_mut(Axis(0), k)
                        .assign(&trend.slice(s![i + l..i + l + h, ..]));
                }
                _ => {
                    let (trend, seasonal) = decompose_values(target_rows, self.kernel);
                    targets_seasonal
                        .index_axis_mut(Axis(0), k)
                        .assign(&seasonal);
                    targets_trend.index_axis_mut(Axis(0), k).assign(&trend);
                }
            }
        }
        WindowBatch::new(inputs, targets, targets_seasonal, targets_trend)
    }

    /// All windows, in segment order.
    pub fn full_batch(&self) -> Result<WindowBatch> {
        let indices: Vec<usize> = (0..self.num_windows()).collect();
        self.batch(&indices)
    }
}

/// Extract every stride-1 window of a standardized series segment,
/// decomposing each target window with the given kernel.
pub fn make_windows(
    series: &TimeSeries,
    segment: Range<usize>,
    input_length: usize,
    horizon: usize,
    kernel: usize,
) -> Result<WindowBatch> {
    WindowPlan::new(
        series,
        segment,
        input_length,
        horizon,
        kernel,
        TargetDecomposition::PerWindow,
    )?
    .full_batch()
}

/// Load a CSV of real-valued channels. The first row is a header; an
/// optional date column (by name) is excluded from the math and kept as
/// timestamps. Channels with zero variance over the whole file are
/// rejected here, matching the standardizer's requirement.
pub fn load_csv(path: impl AsRef<Path>, date_column: Option<&str>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: display.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Csv {
                path: display.clone(),
                source: e,
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let date_idx = match date_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidArgument(format!("date column '{name}' not found in header"))
        })?),
        None => None,
    };
    let channel_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != date_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if channel_names.is_empty() {
        return Err(Error::InvalidData(format!(
            "{display}: no numeric columns after excluding the date column"
        )));
    }

    let mut flat: Vec<f64> = Vec::new();
    let mut timestamps: Vec<String> = Vec::new();
    let mut rows = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?;
        for (col_idx, field) in record.iter().enumerate() {
            if Some(col_idx) == date_idx {
                timestamps.push(field.to_string());
                continue;
            }
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::InvalidData(format!(
                    "{display}: unparseable cell '{field}' at data row {row_idx}, column '{}'",
                    headers.get(col_idx).map(String::as_str).unwrap_or("?")
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidData(format!(
                    "{display}: non-finite value at data row {row_idx}, column '{}'",
                    headers[col_idx]
                )));
            }
            flat.push(value);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(Error::InvalidData(format!(
            "{display}: need at least 2 data rows, got {rows}"
        )));
    }
    let c = channel_names.len();
    if flat.len() != rows * c {
        return Err(Error::InvalidData(format!(
            "{display}: ragged rows (expected {c} numeric columns per row)"
        )));
    }
    let values =
        Array2::from_shape_vec((rows, c), flat).map_err(|e| Error::InvalidData(e.to_string()))?;

    for (ch, name) in channel_names.iter().enumerate() {
        let col = values.index_axis(Axis(1), ch);
        let mean = col.iter().sum::<f64>() / rows as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / rows as f64;
        if var <= 0.0 {
            return Err(Error::InvalidData(format!(
                "{display}: channel '{name}' has zero variance"
            )));
        }
    }

    TimeSeries::new(
        values,
        channel_names,
        if date_idx.is_some() {
            Some(timestamps)
        } else {
            None
        },
    )
}

/// Write a series as CSV in the same format `load_csv` reads: header row,
/// optional leading `date` column when timestamps are present.
pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: display.clone(),
        source: e,
    })?;
    let mut header: Vec<String> = Vec::new();
    if series.timestamps().is_some() {
        header.push("date".to_string());
    }
    header.extend(series.channel_names().iter().cloned());
    writer.write_record(&header).map_err(|e| Error::Csv {
        path: display.clone(),
        source: e,
    })?;
    for t in 0..series.len() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if let Some(ts) = series.timestamps() {
            record.push(ts[t].clone());
        }
        for c in 0..series.num_channels() {
            record.push(format!("{}", series.values()[(t, c)]));
        }
        writer.write_record(&record).map_err(|e| Error::Csv {
            path: display.clone(),
            source: e,
        })?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: display,
        source: e,
    })?;
    Ok(())
}
