//! Forward-simulate expected states over ten AV-contributor events under
//! aligned and misaligned action patterns.
//!
//! Run with: cargo run --example simulate_trajectories

use ridemind::dbn::{forward_simulate, BeliefState, EventInput};
use ridemind::models::reference_model;
use ridemind::{Alignment, AvAction};

fn main() -> ridemind::Result<()> {
    let model = reference_model(6)?;
    let init = BeliefState::initial(&model)?;

    let scenario = |action: AvAction, alignment: Alignment| -> Vec<EventInput> {
        (0..10)
            .map(|_| EventInput::r_event(action, Some(alignment)))
            .collect()
    };

    for (label, action, alignment) in [
        ("aligned + yielding", AvAction::Yield, Alignment::Aligned),
        ("aligned + unyielding", AvAction::Unyield, Alignment::Aligned),
        ("misaligned + yielding", AvAction::Yield, Alignment::NotAligned),
        ("misaligned + unyielding", AvAction::Unyield, Alignment::NotAligned),
    ] {
        let trajectory = forward_simulate(&init, &scenario(action, alignment), &model)?;
        println!("--- {label}");
        println!("event  E[w]    E[t]    P(I+)   E[wO]");
        for p in &trajectory {
            println!(
                "{:>5}  {:.4}  {:.4}  {:.4}  {:.4}",
                p.event_index, p.e_w, p.e_t, p.p_i_plus, p.e_w_o
            );
        }
    }
    Ok(())
}
