//! The long-horizon benchmark protocol on ETTh1: input length 96,
//! horizons {96, 192, 336, 720}, metrics averaged across horizons,
//! hybrid loss against the overall-only baseline.
//!
//! Needs the public ETTh1.csv; place it under ./data or point
//! SUBSERIES_DATA_DIR at its directory. Expect roughly 10-20 CPU minutes.
//!
//! Run with: cargo run --release --example ett_benchmark

use std::path::PathBuf;
use subseries::data::{SplitMode, TargetDecomposition};
use subseries::harness::{
    run_training, DatasetBlock, ExperimentConfig, LossBlock, ModelBlock, TrainBlock,
};

fn find_etth1() -> Option<PathBuf> {
    if let Ok(dir) = std::env::var("SUBSERIES_DATA_DIR") {
        let p = PathBuf::from(dir).join("ETTh1.csv");
        if p.exists() {
            return Some(p);
        }
    }
    for base in ["data", "../data", "../../data"] {
        let p = PathBuf::from(base).join("ETTh1.csv");
        if p.exists() {
            return Some(p);
        }
    }
    None
}

fn main() {
    let Some(path) = find_etth1() else {
        eprintln!(
            "ETTh1.csv not found. Download the ETT-small files and either \
             place ETTh1.csv under ./data or set SUBSERIES_DATA_DIR."
        );
        std::process::exit(2);
    };
    let out_dir = std::env::temp_dir().join("subseries_ett_benchmark");
    let make_config = |loss: LossBlock, sub: &str| ExperimentConfig {
        schema_version: 1,
        dataset: DatasetBlock {
            path: path.display().to_string(),
            date_column: Some("date".into()),
            split_mode: SplitMode::EttHourly,
            ratios: [0.7, 0.1, 0.2],
            target_decomposition: TargetDecomposition::PerWindow,
        },
        model: ModelBlock::default(),
        train: TrainBlock::default(),
        loss,
        horizons: vec![96, 192, 336, 720],
        output_dir: out_dir.join(sub).display().to_string(),
    };

    println!("original loss (overall MSE only):");
    let original = run_training(&make_config(LossBlock::original(), "original")).unwrap();
    for r in &original.per_horizon {
        println!(
            "  h={:<4} mse {:.4} mae {:.4}",
            r.horizon, r.test_metrics.overall_mse, r.test_metrics.overall_mae
        );
    }
    println!(
        "  averaged: mse {:.4} mae {:.4}",
        original.aggregate.overall_mse, original.aggregate.overall_mae
    );

    println!("\nhybrid loss (lambda1 0.9, lambda2 0.1, weights from 0.5):");
    let hybrid = run_training(&make_config(LossBlock::default(), "hybrid")).unwrap();
    for r in &hybrid.per_horizon {
        println!(
            "  h={:<4} mse {:.4} mae {:.4} | seasonal mse {:.4} trend mse {:.4}",
            r.horizon,
            r.test_metrics.overall_mse,
            r.test_metrics.overall_mae,
            r.test_metrics.seasonal_mse,
            r.test_metrics.trend_mse
        );
    }
    println!(
        "  averaged: mse {:.4} mae {:.4}",
        hybrid.aggregate.overall_mse, hybrid.aggregate.overall_mae
    );

    println!(
        "\nhybrid / original overall MSE: {:.4}",
        hybrid.aggregate.overall_mse / original.aggregate.overall_mse
    );
    println!(
        "reports and weight trajectories under {}",
        out_dir.display()
    );
}
