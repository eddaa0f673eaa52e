//! Deterministic synthetic series generation.
//!
//! Values follow `trend(t) + sum_k amp_k * sin(2*pi*t/period_k +
//! phase_k) + gaussian(0, noise_std)`. Noise comes from a documented
//! portable transform: per channel `c`, a ChaCha8 stream seeded with
//! `seed` on stream id `c`, each normal drawn via Box-Muller from two
//! `next_u64` uniforms mapped into (0, 1]. Identical specs therefore
//! reproduce identical series across runs and platforms.

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrendKind {
    #[default]
    None,
    Linear {
        slope: f64,
    },
    /// Slope changes at each break index; `slopes` has one more entry than
    /// `breaks` and the trend stays continuous.
    Piecewise {
        breaks: Vec<usize>,
        slopes: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalComponent {
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    pub channels: usize,
    #[serde(default)]
    pub trend: TrendKind,
    #[serde(default)]
    pub seasonal: Vec<SeasonalComponent>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.channels == 0 {
            return Err(Error::InvalidArgument(
                "length and channels must be >= 1".into(),
            ));
        }
        for s in &self.seasonal {
            if s.period < 2.0 || !s.period.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "seasonal period {} must be >= 2",
                    s.period
                )));
            }
            if !s.amplitude.is_finite() || !s.phase.is_finite() {
                return Err(Error::InvalidArgument(
                    "seasonal amplitude/phase must be finite".into(),
                ));
            }
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise_std {} must be non-negative",
                self.noise_std
            )));
        }
        if let TrendKind::Piecewise { breaks, slopes } = &self.trend {
            if slopes.len() != breaks.len() + 1 {
                return Err(Error::InvalidArgument(format!(
                    "piecewise trend needs {} slopes for {} breaks, got {}",
                    breaks.len() + 1,
                    breaks.len(),
                    slopes.len()
                )));
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "piecewise breaks must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    fn trend_value(&self, t: usize) -> f64 {
        match &self.trend {
            TrendKind::None => 0.0,
            TrendKind::Linear { slope } => slope * t as f64,
            TrendKind::Piecewise { breaks, slopes } => {
                // Integrate the slope profile up to t, keeping continuity.
                let mut value = 0.0;
                let mut prev = 0usize;
                for (i, &brk) in breaks.iter().enumerate() {
                    if t <= brk {
                        return value + slopes[i] * (t - prev) as f64;
                    }
                    value += slopes[i] * (brk - prev) as f64;
                    prev = brk;
                }
                value + slopes[breaks.len()] * (t - prev) as f64
            }
        }
    }
}

/// Box-Muller over two uniforms in (0, 1]; one normal per pair of u64s.
fn next_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Map onto (0, 1] so the log argument never hits zero.
    let u1 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let u1 = 1.0 - u1;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn generate(spec: &SynthSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let (t_len, c_len) = (spec.length, spec.channels);
    let mut values = Array2::zeros((t_len, c_len));
    for c in 0..c_len {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(c as u64);
        for t in 0..t_len {
            let mut v = spec.trend_value(t);
            for s in &spec.seasonal {
                v += s.amplitude
                    * (2.0 * std::f64::consts::PI * t as f64 / s.period + s.phase).sin();
            }
            if spec.noise_std > 0.0 {
                v += spec.noise_std * next_normal(&mut rng);
            }
            values[(t, c)] = v;
        }
    }
    TimeSeries::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::moving_average_decompose;

    #[test]
    fn pure_sinusoid_closed_form() {
        let spec = SynthSpec {
            length: 100,
            channels: 1,
            trend: TrendKind::None,
            seasonal: vec![SeasonalComponent {
                amplitude: 1.0,
                period: 24.0,
                phase: 0.7,
            }],
            noise_std: 0.0,
            seed: 0,
        };
        let series = generate(&spec).unwrap();
        assert!((series.values()[(0, 0)] - 0.7f64.sin()).abs() < 1e-15);
        assert!(series.values().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn linear_trend_exact() {
        let spec = SynthSpec {
            length: 50,
            channels: 2,
            trend: TrendKind::Linear { slope: 0.01 },
            seasonal: vec![],
            noise_std: 0.0,
            seed: 0,
        };
        let series = generate(&spec).unwrap();
        for t in 0..50 {
            assert_eq!(series.values()[(t, 0)], 0.01 * t as f64);
            assert_eq!(series.values()[(t, 1)], 0.01 * t as f64);
        }
    }

    #[test]
    fn piecewise_trend_is_continuous() {
        let spec = SynthSpec {
            length: 30,
            channels: 1,
            trend: TrendKind::Piecewise {
                breaks: vec![10, 20],
                slopes: vec![1.0, -0.5, 2.0],
            },
            seasonal: vec![],
            noise_std: 0.0,
            seed: 0,
        };
        let series = generate(&spec).unwrap();
        assert_eq!(series.values()[(10, 0)], 10.0);
        assert_eq!(series.values()[(20, 0)], 10.0 - 5.0);
        assert_eq!(series.values()[(25, 0)], 5.0 + 10.0);
        // No jumps larger than the largest slope.
        for t in 1..30 {
            let d = series.values()[(t, 0)] - series.values()[(t - 1, 0)];
            assert!(d.abs() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn same_spec_same_series() {
        let spec = SynthSpec {
            length: 64,
            channels: 3,
            trend: TrendKind::Linear { slope: 0.1 },
            seasonal: vec![SeasonalComponent {
                amplitude: 2.0,
                period: 12.0,
                phase: 0.0,
            }],
            noise_std: 0.5,
            seed: 1234,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.values(), b.values());
        // Channels draw from distinct noise streams.
        assert_ne!(a.values().column(0).to_vec(), a.values().column(1).to_vec());
    }

    #[test]
    fn period_shift_cancels_seasonal_part() {
        let spec = SynthSpec {
            length: 120,
            channels: 1,
            trend: TrendKind::Linear { slope: 0.03 },
            seasonal: vec![SeasonalComponent {
                amplitude: 1.5,
                period: 24.0,
                phase: 0.2,
            }],
            noise_std: 0.0,
            seed: 0,
        };
        let series = generate(&spec).unwrap();
        for t in 0..(120 - 24) {
            let diff = series.values()[(t + 24, 0)] - series.values()[(t, 0)];
            assert!((diff - 0.03 * 24.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SynthSpec {
            length: 10,
            channels: 1,
            trend: TrendKind::None,
            seasonal: vec![SeasonalComponent {
                amplitude: 1.0,
                period: 1.0,
                phase: 0.0,
            }],
            noise_std: 0.0,
            seed: 0,
        };
        assert!(generate(&spec).is_err());
        spec.seasonal.clear();
        spec.noise_std = -1.0;
        assert!(generate(&spec).is_err());
        spec.noise_std = 0.0;
        spec.trend = TrendKind::Piecewise {
            breaks: vec![5],
            slopes: vec![1.0],
        };
        assert!(generate(&spec).is_err());
    }

    proptest::proptest! {
        // kernel >= period: the seasonal stream tracks the sinusoid away
        // from the boundaries.
        #[test]
        fn decomposition_recovers_the_sinusoid_interior(
            period in 8usize..40,
            amplitude in 0.5f64..3.0,
            phase in 0.0f64..6.28,
            slope in -0.1f64..0.1,
        ) {
            let spec = SynthSpec {
                length: 10 * period,
                channels: 1,
                trend: TrendKind::Linear { slope },
                seasonal: vec![SeasonalComponent {
                    amplitude,
                    period: period as f64,
                    phase,
                }],
                noise_std: 0.0,
                seed: 0,
            };
            let series = generate(&spec).unwrap();
            // Smallest odd kernel >= period.
            let kernel = if period % 2 == 0 { period + 1 } else { period };
            let pair = moving_average_decompose(&series, kernel).unwrap();
            let lo = period;
            let hi = spec.length - period;
            let truth: Vec<f64> = (lo..hi)
                .map(|t| {
                    amplitude
                        * (2.0 * std::f64::consts::PI * t as f64 / period as f64 + phase).sin()
                })
                .collect();
            let got: Vec<f64> = (lo..hi).map(|t| pair.seasonal()[(t, 0)]).collect();
            let mean_t: f64 = truth.iter().sum::<f64>() / truth.len() as f64;
            let mean_g: f64 = got.iter().sum::<f64>() / got.len() as f64;
            let mut cov = 0.0;
            let mut var_t = 0.0;
            let mut var_g = 0.0;
            for (a, b) in truth.iter().zip(got.iter()) {
                cov += (a - mean_t) * (b - mean_g);
                var_t += (a - mean_t) * (a - mean_t);
                var_g += (b - mean_g) * (b - mean_g);
            }
            let corr = cov / (var_t.sqrt() * var_g.sqrt());
            proptest::prop_assert!(corr > 0.99, "interior correlation {}", corr);
        }
    }
}
