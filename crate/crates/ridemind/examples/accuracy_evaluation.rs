//! Repeated cross-validated accuracy of inferring well-being, trust, and
//! intention from held-out events.
//!
//! Run with: cargo run --example accuracy_evaluation

use ridemind::data::{generate_synthetic, SynthConfig};
use ridemind::learning::{evaluate_accuracy, EvalOptions};
use ridemind::models::reference_model;
use ridemind::structure::default_structure;

fn main() -> ridemind::Result<()> {
    let generator = reference_model(6)?;
    let data = generate_synthetic(
        &generator,
        &SynthConfig {
            n_participants: 100,
            events_per_participant: 4,
            seed: 3,
            intention_everywhere: false,
            fixed_actions: None,
        },
    )?;

    let opts = EvalOptions {
        folds: 5,
        iterations: 10,
        seed: 81,
        alpha: 1.0,
        workers: 0,
    };
    let report = evaluate_accuracy(&data, &default_structure(), &opts)?;

    println!(
        "{}-fold cross-validation, {} iterations, seed {}:",
        report.folds, report.iterations, report.seed
    );
    for (target, acc) in &report.per_target_accuracy {
        println!(
            "  {target:<10} accuracy {:.3} over {} predictions",
            acc, report.per_target_predictions[target]
        );
    }
    println!("held-out log-likelihood per fold: {:?}", report.per_fold_loglik);
    Ok(())
}
