//! Sliding-window seasonal/trend decomposition basics.
//!
//! Run with: cargo run --example decompose

use subseries::series::{moving_average_decompose, reconstruct};
use subseries::synth::{generate, SeasonalComponent, SynthSpec, TrendKind};

fn main() {
    // A ramp plus a daily-period sinusoid plus mild noise.
    let spec = SynthSpec {
        length: 96,
        channels: 1,
        trend: TrendKind::Linear { slope: 0.05 },
        seasonal: vec![SeasonalComponent {
            amplitude: 1.0,
            period: 24.0,
            phase: 0.0,
        }],
        noise_std: 0.05,
        seed: 7,
    };
    let series = generate(&spec).unwrap();

    let kernel = 25;
    let pair = moving_average_decompose(&series, kernel).unwrap();

    println!("kernel {kernel} moving-average decomposition, first 32 rows:\n");
    println!(
        "{:>4} {:>10} {:>10} {:>10}",
        "t", "value", "trend", "seasonal"
    );
    for t in 0..32 {
        println!(
            "{t:>4} {:>10.4} {:>10.4} {:>10.4}",
            series.values()[(t, 0)],
            pair.trend()[(t, 0)],
            pair.seasonal()[(t, 0)]
        );
    }

    // The split is exact: seasonal + trend gives back the input.
    let rec = reconstruct(&pair).unwrap();
    let max_err = rec
        .values()
        .iter()
        .zip(series.values().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("\nmax reconstruction error: {max_err:.2e}");

    // kernel 1 is the identity window: the whole series is trend.
    let identity = moving_average_decompose(&series, 1).unwrap();
    let seasonal_energy: f64 = identity.seasonal().iter().map(|v| v * v).sum();
    println!("kernel 1 seasonal energy (exactly zero): {seasonal_energy}");
}
