//! How much is it worth to observe a node before deciding? Value of
//! information per observable chance node, for each utility.
//!
//! Run with: cargo run --example value_of_information

use ridemind::decision::{
    value_of_information, Evidence, EvidenceVariable, InfluenceDiagram, UtilitySpec,
};
use ridemind::models::reference_model;

fn main() -> ridemind::Result<()> {
    let model = reference_model(6)?;
    let utilities = [
        ("well-being", UtilitySpec::UserWellbeing),
        ("trust", UtilitySpec::UserTrust),
        ("trade-off (cost 0.15)", UtilitySpec::Tradeoff { cost: 0.15 }),
    ];

    println!("{:<22} {:>10} {:>10} {:>10} {:>10}", "utility", "w_prev", "t_prev", "i", "w_o_prev");
    for (label, utility) in utilities {
        let cim = InfluenceDiagram::new(model.clone(), utility);
        let mut row = format!("{label:<22}");
        for node in EvidenceVariable::ALL {
            let voi = value_of_information(&cim, node, &Evidence::none())?;
            row.push_str(&format!(" {voi:>10.6}"));
        }
        println!("{row}");
    }
    println!("\nA zero means observing that node cannot change the decision.");
    Ok(())
}
