//! MSE/MAE computation, overall and per sub-series.

use crate::data::WindowBatch;
use crate::error::{Error, Result};
use crate::model::ForecastOutput;
use ndarray::{ArrayBase, Data, Dimension};
use serde::{Deserialize, Serialize};

/// The six reported quantities for one evaluation pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub overall_mse: f64,
    pub overall_mae: f64,
    pub seasonal_mse: f64,
    pub seasonal_mae: f64,
    pub trend_mse: f64,
    pub trend_mae: f64,
    pub horizon: usize,
    pub n_windows: usize,
}

fn check_shapes<S1, S2, D>(pred: &ArrayBase<S1, D>, target: &ArrayBase<S2, D>) -> Result<()>
where
    S1: Data<Elem = f64>,
    S2: Data<Elem = f64>,
    D: Dimension,
{
    if pred.shape() != target.shape() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: {:?} vs {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("empty input".into()));
    }
    Ok(())
}

/// Mean over all elements of squared residuals.
pub fn mse<S1, S2, D>(pred: &ArrayBase<S1, D>, target: &ArrayBase<S2, D>) -> Result<f64>
where
    S1: Data<Elem = f64>,
    S2: Data<Elem = f64>,
    D: Dimension,
{
    check_shapes(pred, target)?;
    let sum: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Mean over all elements of absolute residuals.
pub fn mae<S1, S2, D>(pred: &ArrayBase<S1, D>, target: &ArrayBase<S2, D>) -> Result<f64>
where
    S1: Data<Elem = f64>,
    S2: Data<Elem = f64>,
    D: Dimension,
{
    check_shapes(pred, target)?;
    let sum: f64 = pred
        .iter()
        .zip(target.iter())
        .map(|(p, t)| (p - t).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Streaming accumulator over batches; reduction order is sequential so
/// repeated runs produce bitwise-identical reports.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    sq: [f64; 3],
    abs: [f64; 3],
    elements: usize,
    n_windows: usize,
    horizon: usize,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, output: &ForecastOutput, batch: &WindowBatch) -> Result<()> {
        if output.combined().dim() != batch.targets().dim() {
            return Err(Error::InvalidArgument(format!(
                "output shape {:?} vs target shape {:?}",
                output.combined().dim(),
                batch.targets().dim()
            )));
        }
        let streams = [
            (output.combined(), batch.targets()),
            (output.seasonal_pred(), batch.targets_seasonal()),
            (output.trend_pred(), batch.targets_trend()),
        ];
        for (k, (pred, target)) in streams.iter().enumerate() {
            for (p, t) in pred.iter().zip(target.iter()) {
                let r = p - t;
                self.sq[k] += r * r;
                self.abs[k] += r.abs();
            }
        }
        let (n, h, c) = batch.targets().dim();
        self.elements += n * h * c;
        self.n_windows += n;
        self.horizon = h;
        Ok(())
    }

    pub fn finalize(&self) -> Result<MetricsReport> {
        if self.n_windows == 0 {
            return Err(Error::Config("no windows accumulated".into()));
        }
        let m = self.elements as f64;
        Ok(MetricsReport {
            overall_mse: self.sq[0] / m,
            overall_mae: self.abs[0] / m,
            seasonal_mse: self.sq[1] / m,
            seasonal_mae: self.abs[1] / m,
            trend_mse: self.sq[2] / m,
            trend_mae: self.abs[2] / m,
            horizon: self.horizon,
            n_windows: self.n_windows,
        })
    }
}

/// Six metrics for a single forecast/batch pair.
pub fn report(output: &ForecastOutput, batch: &WindowBatch) -> Result<MetricsReport> {
    let mut acc = MetricsAccumulator::new();
    acc.update(output, batch)?;
    acc.finalize()
}

/// Unweighted mean of per-horizon reports, the multi-horizon reporting
/// convention. Window counts are summed; the horizon field is left at 0
/// since the inputs differ.
pub fn average_reports(reports: &[MetricsReport]) -> Result<MetricsReport> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no reports to average".into()));
    }
    let k = reports.len() as f64;
    Ok(MetricsReport {
        overall_mse: reports.iter().map(|r| r.overall_mse).sum::<f64>() / k,
        overall_mae: reports.iter().map(|r| r.overall_mae).sum::<f64>() / k,
        seasonal_mse: reports.iter().map(|r| r.seasonal_mse).sum::<f64>() / k,
        seasonal_mae: reports.iter().map(|r| r.seasonal_mae).sum::<f64>() / k,
        trend_mse: reports.iter().map(|r| r.trend_mse).sum::<f64>() / k,
        trend_mae: reports.iter().map(|r| r.trend_mae).sum::<f64>() / k,
        horizon: 0,
        n_windows: reports.iter().map(|r| r.n_windows).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array3};
    use proptest::prelude::*;

    #[test]
    fn identical_tensors_score_zero() {
        let x = arr1(&[1.0, -4.0, 2.5]);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(mae(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn unit_residuals() {
        let pred = arr1(&[1.0, -1.0, 1.0, -1.0]);
        let target = arr1(&[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(mse(&pred, &target).unwrap(), 1.0);
        assert_eq!(mae(&pred, &target).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_values() {
        let pred = arr1(&[1.0, 2.0]);
        let target = arr1(&[3.0, 1.0]);
        assert_eq!(mse(&pred, &target).unwrap(), 2.5);
        assert_eq!(mae(&pred, &target).unwrap(), 1.5);
    }

    #[test]
    fn shape_mismatch_and_empty_rejected() {
        let a = arr1(&[1.0]);
        let b = arr1(&[1.0, 2.0]);
        assert!(mse(&a, &b).is_err());
        let e: ndarray::Array1<f64> = arr1(&[]);
        assert!(mae(&e, &e).is_err());
    }

    fn fixture() -> (ForecastOutput, WindowBatch) {
        // N=2, H=2, C=1 with hand-picked residuals per stream.
        let ts = Array3::from_shape_vec((2, 2, 1), vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let tt = Array3::from_shape_vec((2, 2, 1), vec![0.0, 1.0, 2.0, 2.0]).unwrap();
        let targets = &ts + &tt;
        let inputs = Array3::zeros((2, 3, 1));
        let batch = WindowBatch::new(inputs, targets, ts.clone(), tt.clone()).unwrap();
        // Seasonal off by +1 on every element, trend off by -0.5.
        let sp = &ts + 1.0;
        let tp = &tt - 0.5;
        (ForecastOutput::new(sp, tp).unwrap(), batch)
    }

    #[test]
    fn six_metric_report_by_hand() {
        let (out, batch) = fixture();
        let r = report(&out, &batch).unwrap();
        // seasonal residual +1, trend residual -0.5, combined residual +0.5.
        assert!((r.seasonal_mse - 1.0).abs() < 1e-12);
        assert!((r.seasonal_mae - 1.0).abs() < 1e-12);
        assert!((r.trend_mse - 0.25).abs() < 1e-12);
        assert!((r.trend_mae - 0.5).abs() < 1e-12);
        assert!((r.overall_mse - 0.25).abs() < 1e-12);
        assert!((r.overall_mae - 0.5).abs() < 1e-12);
        assert_eq!(r.horizon, 2);
        assert_eq!(r.n_windows, 2);
    }

    #[test]
    fn streaming_equals_concatenation() {
        let (out, batch) = fixture();
        let mut acc = MetricsAccumulator::new();
        acc.update(&out, &batch).unwrap();
        acc.update(&out, &batch).unwrap();
        let streamed = acc.finalize().unwrap();
        let single = report(&out, &batch).unwrap();
        assert!((streamed.overall_mse - single.overall_mse).abs() < 1e-12);
        assert!((streamed.trend_mae - single.trend_mae).abs() < 1e-12);
        assert_eq!(streamed.n_windows, 4);
    }

    proptest! {
        #[test]
        fn scaling_laws(
            pred in proptest::collection::vec(-10f64..10.0, 1..40),
            target in proptest::collection::vec(-10f64..10.0, 40),
            scale in 0.1f64..5.0,
        ) {
            let n = pred.len();
            let p = arr1(&pred);
            let t = arr1(&target[..n]);
            let ps = p.mapv(|v| v * scale);
            let tsc = t.mapv(|v| v * scale);
            let m0 = mse(&p, &t).unwrap();
            let m1 = mse(&ps, &tsc).unwrap();
            prop_assert!((m1 - scale * scale * m0).abs() <= 1e-9 * m0.max(1.0));
            let a0 = mae(&p, &t).unwrap();
            let a1 = mae(&ps, &tsc).unwrap();
            prop_assert!((a1 - scale * a0).abs() <= 1e-9 * a0.max(1.0));
        }
    }
}
