//! How the trade-off policy flips from yielding to unyielding as the
//! yielding cost grows, per previous-well-being bin.
//!
//! Run with: cargo run --example cost_sweep

use ridemind::decision::{cost_sensitivity_sweep, Evidence, EvidenceVariable, InfluenceDiagram, UtilitySpec};
use ridemind::models::reference_model;
use ridemind::AvAction;

fn main() -> ridemind::Result<()> {
    let model = reference_model(6)?;
    let cim = InfluenceDiagram::new(model, UtilitySpec::Tradeoff { cost: 0.0 });
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let rows = cost_sensitivity_sweep(&cim, &grid, Some(EvidenceVariable::WPrev), &Evidence::none())?;

    // Decision map: one row per cost, one column per w_prev bin.
    println!("cost   w_prev bin ->  0  1  2  3  4  5");
    for &cost in &grid {
        let mut line = format!("{cost:<6.2}              ");
        for bin in 0..6 {
            let row = rows
                .iter()
                .find(|r| r.cost == cost && r.evidence_value == bin.to_string())
                .expect("row exists");
            line.push_str(if row.optimal_action == AvAction::Yield.token() {
                " Y "
            } else {
                " n "
            });
        }
        println!("{line}");
    }

    // Switch point with no evidence at all.
    let plain = cost_sensitivity_sweep(&cim, &grid, None, &Evidence::none())?;
    let switch = plain
        .iter()
        .find(|r| r.optimal_action == AvAction::Unyield.token())
        .map(|r| r.cost);
    match switch {
        Some(c) => println!("\nwithout evidence the policy flips to unyielding at cost {c:.2}"),
        None => println!("\nyielding stays optimal over the whole grid"),
    }
    Ok(())
}
