//! How the loss weights react to loss gaps: mass moves toward whichever
//! loss is currently larger, multiplicatively, step by step.
//!
//! Run with: cargo run --example weight_dynamics

use subseries::loss::{update_weights, LossWeights};

fn main() {
    let mut w = LossWeights::balanced(0.9, 0.1).unwrap();
    println!(
        "start: w1 = {}, w2 = {}, alpha = {}, beta = {}",
        w.w1, w.w2, w.alpha, w.beta
    );

    // Phase 1: the trend loss dominates the seasonal loss, and the
    // component loss dominates the overall loss.
    println!("\nphase 1 — loss_g = 0.4, loss_s = 0.2, loss_t = 1.0:");
    println!(
        "{:>4} {:>9} {:>9} {:>9} {:>9}",
        "step", "w1", "w2", "alpha", "beta"
    );
    for step in 1..=10 {
        w = update_weights(&w, 0.4, 0.2, 1.0).unwrap();
        println!(
            "{step:>4} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            w.w1, w.w2, w.alpha, w.beta
        );
    }
    println!("-> beta (trend weight) climbs; w2 (component side) climbs");

    // Phase 2: the seasonal loss takes over.
    println!("\nphase 2 — loss_g = 0.4, loss_s = 1.5, loss_t = 0.1:");
    for step in 1..=10 {
        w = update_weights(&w, 0.4, 1.5, 0.1).unwrap();
        if step % 2 == 0 {
            println!(
                "{step:>4} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
                w.w1, w.w2, w.alpha, w.beta
            );
        }
    }
    println!("-> alpha recovers as the seasonal loss becomes the bottleneck");

    // Equal losses are a fixed point.
    let before = w;
    w = update_weights(&w, 0.7, 0.3, 0.3).unwrap();
    println!(
        "\nequal component losses leave (alpha, beta) untouched: {} -> {}",
        before.alpha, w.alpha
    );

    // The update only sees loss differences: shifting every loss by a
    // constant cancels in the exponent ratio.
    let a = update_weights(&before, 0.4, 0.2, 1.0).unwrap();
    let b = update_weights(&before, 100.4, 100.2, 101.0).unwrap();
    println!(
        "shift invariance: |w1 - w1_shifted| = {:.2e}",
        (a.w1 - b.w1).abs()
    );

    // Extreme losses ride the shifted-exponent path instead of overflowing.
    let extreme = update_weights(&before, 1e6, 5e5, 9e5).unwrap();
    println!(
        "losses at 1e6 stay finite: w1 = {:.6}, alpha = {:.6}",
        extreme.w1, extreme.alpha
    );
}
