//! Build a small interaction model by hand and track the rider's state
//! across a few events with exact Bayesian filtering.
//!
//! Run with: cargo run --example build_and_filter

use std::collections::BTreeMap;

use ridemind::dbn::{filter_step, BeliefState, EventInput, TransitionRegime};
use ridemind::models::cpd_from_fn;
use ridemind::structure::{names, RegimeKind, VarTable};
use ridemind::{
    Alignment, AvAction, CpdTable, DbnModel, Factor, Intention, OtherAction, StateEvidence,
};

fn main() -> ridemind::Result<()> {
    // Two bins per latent scale keeps the tables readable.
    let n_bins = 2;
    let table = VarTable::new(n_bins)?;

    // Trust rises after the AV yields, falls otherwise.
    let trust = cpd_from_fn(
        table.var(names::T)?,
        vec![table.var(names::T_PREV)?, table.var(names::A_R)?],
        |pa| match (pa[0], pa[1]) {
            (1, 0) => vec![0.05, 0.95], // high trust, AV yielded
            (0, 0) => vec![0.60, 0.40],
            (1, 1) => vec![0.40, 0.60],
            _ => vec![0.90, 0.10],
        },
    )?;
    // Well-being follows the other's action.
    let wellbeing = cpd_from_fn(
        table.var(names::W)?,
        vec![table.var(names::W_PREV)?, table.var(names::A_O)?],
        |pa| match (pa[0], pa[1]) {
            (1, 0) => vec![0.10, 0.90],
            (0, 0) => vec![0.50, 0.50],
            (1, 1) => vec![0.45, 0.55],
            _ => vec![0.85, 0.15],
        },
    )?;
    let intention = CpdTable::new(
        table.var(names::I)?,
        vec![table.var(names::I_PREV)?],
        vec![0.8, 0.2, 0.3, 0.7],
    )?;
    let other = cpd_from_fn(
        table.var(names::W_O)?,
        vec![table.var(names::W_O_PREV)?, table.var(names::A_R)?],
        |pa| match (pa[0], pa[1]) {
            (1, 0) => vec![0.05, 0.95],
            (0, 0) => vec![0.40, 0.60],
            (1, 1) => vec![0.50, 0.50],
            _ => vec![0.90, 0.10],
        },
    )?;

    // The O regime reuses the same shapes with the other as contributor.
    let wellbeing_o = cpd_from_fn(
        table.var(names::W)?,
        vec![table.var(names::W_PREV)?, table.var(names::A_O)?],
        |pa| match (pa[0], pa[1]) {
            (1, 0) => vec![0.05, 0.95],
            (0, 0) => vec![0.35, 0.65],
            (1, 1) => vec![0.55, 0.45],
            _ => vec![0.90, 0.10],
        },
    )?;
    let trust_o = cpd_from_fn(
        table.var(names::T)?,
        vec![table.var(names::T_PREV)?],
        |pa| {
            if pa[0] == 1 {
                vec![0.1, 0.9]
            } else {
                vec![0.9, 0.1]
            }
        },
    )?;
    let other_o = cpd_from_fn(
        table.var(names::W_O)?,
        vec![table.var(names::W_O_PREV)?, table.var(names::A_O)?],
        |pa| {
            if pa[0] == 1 {
                vec![0.2, 0.8]
            } else {
                vec![0.7, 0.3]
            }
        },
    )?;

    let mut priors = BTreeMap::new();
    for name in [names::W, names::T, names::I, names::W_O] {
        priors.insert(name.to_string(), Factor::uniform(vec![table.var(name)?])?);
    }
    let model = DbnModel::new(
        "hand-built",
        n_bins,
        priors,
        TransitionRegime::new(
            RegimeKind::RContributor,
            vec![intention.clone(), wellbeing, trust, other],
        )?,
        TransitionRegime::new(
            RegimeKind::OContributor,
            vec![intention, wellbeing_o, trust_o, other_o],
        )?,
    )?;

    // A short ride: the delivery robot yields, then the AV yields while the
    // rider had stated a yielding intention.
    let script = vec![
        EventInput::o_event(OtherAction::Yield),
        EventInput::r_event(AvAction::Yield, Some(Alignment::Aligned))
            .with_recent_other_action(OtherAction::Yield)
            .with_observed(StateEvidence {
                intention: Some(Intention::Yield),
                ..StateEvidence::none()
            }),
        EventInput::o_event(OtherAction::Unyield),
    ];

    let mut belief = BeliefState::initial(&model)?;
    println!("event  E[w]    E[t]    P(I+)   E[wO]");
    for event in &script {
        belief = filter_step(&belief, event, &model)?;
        println!(
            "{:>5}  {:.4}  {:.4}  {:.4}  {:.4}",
            belief.event_index(),
            belief.expected_wellbeing(),
            belief.expected_trust(),
            belief.prob_intention_yield(),
            belief.expected_other_wellbeing(),
        );
    }
    Ok(())
}
