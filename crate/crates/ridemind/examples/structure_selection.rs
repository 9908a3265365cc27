//! Pick among candidate network structures by k-fold cross-validated
//! held-out log-likelihood.
//!
//! Run with: cargo run --example structure_selection

use ridemind::data::{generate_synthetic, SynthConfig};
use ridemind::learning::select_structure;
use ridemind::models::reference_model;
use ridemind::structure::{compact_structure, default_structure, persistence_structure};

fn main() -> ridemind::Result<()> {
    let generator = reference_model(4)?;
    let data = generate_synthetic(
        &generator,
        &SynthConfig {
            n_participants: 120,
            events_per_participant: 6,
            seed: 13,
            intention_everywhere: false,
            fixed_actions: None,
        },
    )?;

    let candidates = [default_structure(), persistence_structure(), compact_structure()];
    let selection = select_structure(&candidates, &data, 5, 1.0)?;

    println!("5-fold held-out log-likelihood per candidate:");
    for (candidate, score) in candidates.iter().zip(&selection.mean_held_out_loglik) {
        let marker = if candidate.structure_id == selection.winner_id {
            " <- selected"
        } else {
            ""
        };
        println!("  {:<22} {score:.2}{marker}", candidate.structure_id);
    }
    Ok(())
}
