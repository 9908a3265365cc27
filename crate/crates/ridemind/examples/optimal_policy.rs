//! Choose the accommodative action that maximizes expected utility, with
//! and without evidence about the rider.
//!
//! Run with: cargo run --example optimal_policy

use ridemind::decision::{
    optimal_policy, policy_table, Evidence, EvidenceVariable, InfluenceDiagram, UtilitySpec,
};
use ridemind::models::reference_model;
use ridemind::Bin;

fn main() -> ridemind::Result<()> {
    let model = reference_model(6)?;

    for (label, utility) in [
        ("maximize rider well-being", UtilitySpec::UserWellbeing),
        ("maximize rider trust", UtilitySpec::UserTrust),
    ] {
        let cim = InfluenceDiagram::new(model.clone(), utility);
        let d = optimal_policy(&cim, &Evidence::none())?;
        println!(
            "{label}: no evidence -> {} (EU yield {:.4}, unyield {:.4})",
            d.action, d.eu_yield, d.eu_unyield
        );

        let table = policy_table(&cim, EvidenceVariable::Intention, &Evidence::none())?;
        for e in &table.entries {
            println!(
                "  intention {:<8} -> {}",
                e.value_label, e.decision.action
            );
        }
    }

    // Conditioning on the previous well-being bin.
    let cim = InfluenceDiagram::new(model, UtilitySpec::UserWellbeing);
    let table = policy_table(&cim, EvidenceVariable::WPrev, &Evidence::none())?;
    println!("\npolicy by previous well-being bin (utility = well-being):");
    for e in &table.entries {
        println!(
            "  w_prev = {} -> {} (EU yield {:.4}, unyield {:.4})",
            e.value_label, e.decision.action, e.decision.eu_yield, e.decision.eu_unyield
        );
    }
    if let Some(ranges) = &table.bin_ranges {
        for r in ranges {
            println!("  bins {}..={} -> {}", r.from_bin, r.to_bin, r.action);
        }
    }

    // A concrete mixed-evidence query.
    let ev = Evidence {
        w_prev: Some(Bin::new(1, 6)?),
        t_prev: Some(Bin::new(4, 6)?),
        ..Evidence::none()
    };
    let cim = InfluenceDiagram::new(reference_model(6)?, UtilitySpec::UserWellbeing);
    let d = optimal_policy(&cim, &ev)?;
    println!(
        "\nlow well-being, high trust -> {} (EU yield {:.4}, unyield {:.4})",
        d.action, d.eu_yield, d.eu_unyield
    );
    Ok(())
}
