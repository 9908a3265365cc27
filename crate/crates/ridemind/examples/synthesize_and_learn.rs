//! Sample an event log from the reference model, re-estimate the CPDs with
//! a Dirichlet prior, and compare a few learned columns against the
//! generator.
//!
//! Run with: cargo run --example synthesize_and_learn

use ridemind::data::{generate_synthetic, SynthConfig};
use ridemind::learning::estimate_cpds;
use ridemind::models::reference_model;
use ridemind::structure::names;
use ridemind::Contributor;

fn main() -> ridemind::Result<()> {
    let generator = reference_model(6)?;
    let data = generate_synthetic(
        &generator,
        &SynthConfig {
            n_participants: 2000,
            events_per_participant: 8,
            seed: 7,
            intention_everywhere: true,
            fixed_actions: None,
        },
    )?;
    println!(
        "sampled {} records from {} participants",
        data.n_records(),
        data.sequences.len()
    );

    let learned = estimate_cpds(&data, &generator.structure(), 1.0)?;

    // Compare P(w | w_prev = 2, ...) under the O regime for both robot
    // actions, averaging the generator's extra parents is unnecessary: the
    // structures match, so columns line up one-to-one.
    let truth = generator.regime(Contributor::O).cpd_for(names::W).unwrap();
    let estimate = learned.regime(Contributor::O).cpd_for(names::W).unwrap();
    println!("\nP(w | w_prev=2, t_prev=3, a_o) under the O regime:");
    for (label, a_o) in [("other yields", 0usize), ("other unyields", 1)] {
        let true_col: Vec<f64> = (0..6).map(|w| truth.prob(w, &[2, 3, a_o])).collect();
        let learned_col: Vec<f64> = (0..6).map(|w| estimate.prob(w, &[2, 3, a_o])).collect();
        println!("  {label}:");
        println!("    generator: {}", fmt(&true_col));
        println!("    learned:   {}", fmt(&learned_col));
    }
    Ok(())
}

fn fmt(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}
