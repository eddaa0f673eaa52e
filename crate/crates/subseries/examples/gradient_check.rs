//! Verify the analytic gradients against central finite differences.
//!
//! The model has exactly four parameter blocks with closed-form
//! derivatives; this check is what stands in for an autodiff engine.
//!
//! Run with: cargo run --example gradient_check

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subseries::data::WindowBatch;
use subseries::loss::{component_losses, make_variant, LossVariant, LossWeights};
use subseries::model::{InitScheme, LinearForecaster, ModelConfig};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (n, l, h, c) = (3, 8, 6, 2);

    let mut model = LinearForecaster::new(ModelConfig {
        input_length: l,
        horizon: h,
        num_channels: c,
        share_channels: true,
        kernel: 3,
        init: InitScheme::ScaledRandom,
        seed: 1,
    })
    .unwrap();

    // A feasible batch: component targets sum to the combined target.
    let inputs = Array3::from_shape_fn((n, l, c), |_| rng.random_range(-2.0..2.0));
    let ts = Array3::from_shape_fn((n, h, c), |_| rng.random_range(-1.0..1.0));
    let tt = Array3::from_shape_fn((n, h, c), |_| rng.random_range(-1.0..1.0));
    let targets = &ts + &tt;
    let batch = WindowBatch::new(inputs.clone(), targets, ts, tt).unwrap();

    let weights = LossWeights::balanced(0.9, 0.1).unwrap();
    let policy = make_variant(LossVariant::Hybrid);

    // Analytic: loss gradients per stream, chained through the model.
    let output = model.forward(&inputs).unwrap();
    let stream_grads = policy.gradients(&weights, &output, &batch).unwrap();
    let analytic = model.backward(&inputs, &stream_grads).unwrap().flat();

    // Finite differences of the scalar hybrid loss at fixed weights.
    let loss_at = |m: &LinearForecaster| -> f64 {
        let out = m.forward(&inputs).unwrap();
        let (lg, ls, lt) = component_losses(&out, &batch).unwrap();
        policy.breakdown(&weights, lg, ls, lt).unwrap().combined
    };
    let step = 1e-6;
    let mut params = model.params_flat();
    let mut worst = 0.0f64;
    let mut shown = 0;
    println!(
        "{:>6} {:>14} {:>14} {:>10}",
        "param", "analytic", "finite diff", "rel err"
    );
    for k in 0..params.len() {
        let orig = params[k];
        params[k] = orig + step;
        model.set_params_flat(&params).unwrap();
        let up = loss_at(&model);
        params[k] = orig - step;
        model.set_params_flat(&params).unwrap();
        let down = loss_at(&model);
        params[k] = orig;
        model.set_params_flat(&params).unwrap();
        let fd = (up - down) / (2.0 * step);
        let a = analytic[k];
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
        if shown < 8 {
            println!("{k:>6} {a:>14.8} {fd:>14.8} {rel:>10.2e}");
            shown += 1;
        }
    }
    println!("... ({} parameters total)", params.len());
    println!("\nworst relative error: {worst:.2e}");
    assert!(worst < 1e-4);
    println!("analytic gradients agree with central differences");
}
