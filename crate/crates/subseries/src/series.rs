//! Core time-series value types and the sliding-window moving-average
//! decomposition.
//!
//! A series is split additively into a trend component (centered moving
//! average with replicate padding at both ends) and a seasonal component
//! (whatever the trend leaves behind). The split is exact by construction:
//! `seasonal + trend` reproduces the source elementwise.

use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2, Axis};

/// A T×C matrix of observations with channel names and optional timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Array2<f64>,
    channel_names: Vec<String>,
    timestamps: Option<Vec<String>>,
}

impl TimeSeries {
    /// Build a series from a values matrix, validating finiteness and shape.
    pub fn new(
        values: Array2<f64>,
        channel_names: Vec<String>,
        timestamps: Option<Vec<String>>,
    ) -> Result<Self> {
        let (t, c) = values.dim();
        if t == 0 || c == 0 {
            return Err(Error::InvalidArgument(format!(
                "series must be non-empty, got shape {t}x{c}"
            )));
        }
        if channel_names.len() != c {
            return Err(Error::InvalidArgument(format!(
                "{} channel names for {c} channels",
                channel_names.len()
            )));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != t {
                return Err(Error::InvalidArgument(format!(
                    "{} timestamps for {t} rows",
                    ts.len()
                )));
            }
        }
        if let Some(((row, col), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value {v} at row {row}, channel {col}"
            )));
        }
        Ok(Self {
            values,
            channel_names,
            timestamps,
        })
    }

    /// Build a series with generated channel names `c0..c{C-1}`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let names = (0..values.ncols()).map(|i| format!("c{i}")).collect();
        Self::new(values, names, None)
    }

    /// Single-channel convenience constructor.
    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        let t = values.len();
        let arr = Array2::from_shape_vec((t, 1), values)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_values(arr)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Number of time points T.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of channels C.
    pub fn num_channels(&self) -> usize {
        self.values.ncols()
    }
}

/// Seasonal and trend matrices whose sum reconstructs the source exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPair {
    seasonal: Array2<f64>,
    trend: Array2<f64>,
    kernel: usize,
}

impl DecompositionPair {
    pub fn new(seasonal: Array2<f64>, trend: Array2<f64>, kernel: usize) -> Result<Self> {
        validate_kernel(kernel)?;
        if seasonal.dim() != trend.dim() {
            return Err(Error::InvalidArgument(format!(
                "seasonal shape {:?} != trend shape {:?}",
                seasonal.dim(),
                trend.dim()
            )));
        }
        Ok(Self {
            seasonal,
            trend,
            kernel,
        })
    }

    pub fn seasonal(&self) -> &Array2<f64> {
        &self.seasonal
    }

    pub fn trend(&self) -> &Array2<f64> {
        &self.trend
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }
}

fn validate_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "kernel must be an odd positive integer, got {kernel}"
        )));
    }
    Ok(())
}

/// Decompose a series into seasonal and trend components.
///
/// The trend at row `t` is the mean of the kernel-length window centered at
/// `t`, over the series padded on both ends by replicating the first and
/// last rows `(kernel-1)/2` times. Seasonal is the residual. Channels are
/// processed independently.
pub fn moving_average_decompose(series: &TimeSeries, kernel: usize) -> Result<DecompositionPair> {
    validate_kernel(kernel)?;
    let (trend, seasonal) = decompose_values(series.values().view(), kernel);
    DecompositionPair::new(seasonal, trend, kernel)
}

/// Decomposition on a raw matrix view: returns `(trend, seasonal)`.
///
/// The caller guarantees the kernel is odd and positive and the values are
/// finite; this is the hot path used inside the model's forward pass.
pub fn decompose_values(values: ArrayView2<'_, f64>, kernel: usize) -> (Array2<f64>, Array2<f64>) {
    debug_assert!(kernel % 2 == 1 && kernel >= 1);
    let (t, c) = values.dim();
    let half = (kernel / 2) as isize;
    let mut trend = Array2::zeros((t, c));

    // Each window is summed directly rather than via a running sum: a
    // running sum drifts by accumulated rounding, which would break the
    // exact kernel=1 identity and leak into every downstream tolerance.
    for ch in 0..c {
        let col = values.index_axis(Axis(1), ch);
        for row in 0..t {
            let mut sum = 0.0;
            for j in -half..=half {
                let i = (row as isize + j).clamp(0, t as isize - 1) as usize;
                sum += col[i];
            }
            trend[(row, ch)] = sum / kernel as f64;
        }
    }

    let seasonal = &values - &trend;
    (trend, seasonal)
}

/// Elementwise sum of the two components.
pub fn reconstruct(pair: &DecompositionPair) -> Result<TimeSeries> {
    // Shape agreement is a constructor invariant, re-checked cheaply here.
    if pair.seasonal.dim() != pair.trend.dim() {
        return Err(Error::InvalidArgument(
            "seasonal/trend shape mismatch".into(),
        ));
    }
    TimeSeries::from_values(&pair.seasonal + &pair.trend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use proptest::prelude::*;

    fn single(values: &[f64]) -> TimeSeries {
        TimeSeries::from_column(values.to_vec()).unwrap()
    }

    /// Independent oracle: trend by explicit padding and window averaging.
    fn naive_trend(values: &[f64], kernel: usize) -> Vec<f64> {
        let half = kernel / 2;
        let mut padded = vec![values[0]; half];
        padded.extend_from_slice(values);
        padded.extend(std::iter::repeat_n(*values.last().unwrap(), half));
        (0..values.len())
            .map(|i| padded[i..i + kernel].iter().sum::<f64>() / kernel as f64)
            .collect()
    }

    #[test]
    fn constant_series_is_pure_trend() {
        let s = single(&[5.0, 5.0, 5.0, 5.0]);
        let pair = moving_average_decompose(&s, 3).unwrap();
        for t in 0..4 {
            assert_eq!(pair.trend()[(t, 0)], 5.0);
            assert_eq!(pair.seasonal()[(t, 0)], 0.0);
        }
    }

    #[test]
    fn kernel_one_is_identity() {
        let s = single(&[1.0, -2.0, 7.5, 0.25]);
        let pair = moving_average_decompose(&s, 1).unwrap();
        assert_eq!(pair.trend(), s.values());
        assert!(pair.seasonal().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_ramp() {
        // Padded sequence [1,1,2,3,4,4], kernel 3.
        let s = single(&[1.0, 2.0, 3.0, 4.0]);
        let pair = moving_average_decompose(&s, 3).unwrap();
        let expected_trend = [4.0 / 3.0, 2.0, 3.0, 11.0 / 3.0];
        let expected_seasonal = [-1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0];
        for t in 0..4 {
            assert!((pair.trend()[(t, 0)] - expected_trend[t]).abs() < 1e-12);
            assert!((pair.seasonal()[(t, 0)] - expected_seasonal[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn even_kernel_rejected() {
        let s = single(&[1.0, 2.0]);
        assert!(matches!(
            moving_average_decompose(&s, 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            moving_average_decompose(&s, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn nan_input_rejected_at_construction() {
        let arr = arr2(&[[1.0], [f64::NAN]]);
        assert!(matches!(
            TimeSeries::from_values(arr),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn reconstruct_inverts_hand_example() {
        let seasonal = arr2(&[[-1.0 / 3.0], [0.0], [0.0], [1.0 / 3.0]]);
        let trend = arr2(&[[4.0 / 3.0], [2.0], [3.0], [11.0 / 3.0]]);
        let pair = DecompositionPair::new(seasonal, trend, 3).unwrap();
        let rec = reconstruct(&pair).unwrap();
        for (t, want) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert!((rec.values()[(t, 0)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_rejects_shape_mismatch() {
        let seasonal = Array2::zeros((3, 1));
        let trend = Array2::zeros((4, 1));
        assert!(matches!(
            DecompositionPair::new(seasonal, trend, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_seasonal_reconstructs_to_trend() {
        let trend = arr2(&[[1.5, -2.0], [3.0, 0.5]]);
        let pair = DecompositionPair::new(Array2::zeros((2, 2)), trend.clone(), 1).unwrap();
        assert_eq!(reconstruct(&pair).unwrap().values(), &trend);
    }

    #[test]
    fn matches_naive_oracle() {
        let values = [0.3, -1.2, 4.0, 2.2, 2.2, -0.7, 9.9, 3.1];
        let s = single(&values);
        for kernel in [1, 3, 5, 7, 25] {
            let pair = moving_average_decompose(&s, kernel).unwrap();
            let oracle = naive_trend(&values, kernel);
            for (t, want) in oracle.iter().enumerate() {
                assert!(
                    (pair.trend()[(t, 0)] - want).abs() < 1e-12,
                    "kernel {kernel} row {t}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn reconstruction_is_exact(
            rows in proptest::collection::vec(
                proptest::collection::vec(-1e3f64..1e3, 3), 1..64),
            half in 0usize..12,
        ) {
            let t = rows.len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let s = TimeSeries::from_values(
                Array2::from_shape_vec((t, 3), flat).unwrap()).unwrap();
            let kernel = 2 * half + 1;
            let pair = moving_average_decompose(&s, kernel).unwrap();
            let rec = reconstruct(&pair).unwrap();
            for (a, b) in rec.values().iter().zip(s.values().iter()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn translation_moves_only_the_trend(
            values in proptest::collection::vec(-100f64..100.0, 4..50),
            offset in -50f64..50.0,
            half in 0usize..6,
        ) {
            let kernel = 2 * half + 1;
            let base = TimeSeries::from_column(values.clone()).unwrap();
            let shifted = TimeSeries::from_column(
                values.iter().map(|v| v + offset).collect()).unwrap();
            let p0 = moving_average_decompose(&base, kernel).unwrap();
            let p1 = moving_average_decompose(&shifted, kernel).unwrap();
            for t in 0..values.len() {
                prop_assert!((p1.trend()[(t,0)] - p0.trend()[(t,0)] - offset).abs() < 1e-9);
                prop_assert!((p1.seasonal()[(t,0)] - p0.seasonal()[(t,0)]).abs() < 1e-9);
            }
        }

        #[test]
        fn channels_decompose_independently(
            col_a in proptest::collection::vec(-10f64..10.0, 8),
            col_b in proptest::collection::vec(-10f64..10.0, 8),
        ) {
            let mut values = Array2::zeros((8, 2));
            for t in 0..8 {
                values[(t, 0)] = col_a[t];
                values[(t, 1)] = col_b[t];
            }
            let multi = TimeSeries::from_values(values).unwrap();
            let pair = moving_average_decompose(&multi, 3).unwrap();
            let pa = moving_average_decompose(
                &TimeSeries::from_column(col_a).unwrap(), 3).unwrap();
            let pb = moving_average_decompose(
                &TimeSeries::from_column(col_b).unwrap(), 3).unwrap();
            for t in 0..8 {
                prop_assert_eq!(pair.trend()[(t, 0)], pa.trend()[(t, 0)]);
                prop_assert_eq!(pair.trend()[(t, 1)], pb.trend()[(t, 0)]);
            }
        }

        #[test]
        fn kernel_one_zero_seasonal(values in proptest::collection::vec(-10f64..10.0, 1..30)) {
            let s = TimeSeries::from_column(values).unwrap();
            let pair = moving_average_decompose(&s, 1).unwrap();
            prop_assert!(pair.seasonal().iter().all(|&v| v == 0.0));
        }
    }
}
