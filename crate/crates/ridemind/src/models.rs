//! Ready-made model constructors.
//!
//! [`reference_model`] encodes the qualitative interaction dependencies
//! with hand-authored drift kernels whose effect directions follow the
//! observed relations: the other's yielding raises the user's well-being,
//! the AV's yielding raises trust, alignment raises both, a yielding
//! intention nudges well-being up, and higher previous trust pulls
//! well-being up. It is the default model for simulation and decision
//! workflows when no learned model is supplied.

use std::collections::BTreeMap;

use rand::Rng;

use crate::cpd::CpdTable;
use crate::dbn::{DbnModel, TransitionRegime};
use crate::error::Result;
use crate::factor::{joint_assignments, Factor};
use crate::structure::{
    default_structure, names, CpdSpec, RegimeKind, StructureCandidate, VarTable, ALL_LATENTS,
};
use crate::vars::{Alignment, AvAction, Intention, OtherAction, Variable};

/// Build a CPD by asking `dist` for the child distribution of every parent
/// assignment (parent values arrive in declared parent order).
pub fn cpd_from_fn(
    child: Variable,
    parents: Vec<Variable>,
    dist: impl Fn(&[usize]) -> Vec<f64>,
) -> Result<CpdTable> {
    let parent_cards: Vec<usize> = parents.iter().map(|p| p.cardinality).collect();
    let mut values = Vec::new();
    for assignment in joint_assignments(&parent_cards) {
        values.extend(dist(&assignment));
    }
    CpdTable::new(child, parents, values)
}

/// One-step random walk on bins: stay with the leftover mass, move one bin
/// up or down with the given probabilities. Moves past an edge stay put,
/// so an up-only kernel can never lower the expected bin.
fn drift_distribution(n: usize, from: usize, up: f64, down: f64) -> Vec<f64> {
    assert!(up >= 0.0 && down >= 0.0 && up + down <= 1.0);
    let mut d = vec![0.0; n];
    d[from] = 1.0 - up - down;
    if from + 1 < n {
        d[from + 1] += up;
    } else {
        d[from] += up;
    }
    if from > 0 {
        d[from - 1] += down;
    } else {
        d[from] += down;
    }
    d
}

fn sticky_intention() -> Vec<f64> {
    // P(i | i_prev): intentions persist, with an overall lean toward
    // yielding.
    vec![0.85, 0.15, 0.45, 0.55]
}

/// Deterministic persistence model: every latent copies its previous
/// value. Useful as a fixed point for testing and as a do-nothing
/// baseline.
pub fn identity_model(n_bins: usize) -> Result<DbnModel> {
    use names::*;
    let structure = StructureCandidate {
        structure_id: "identity".to_string(),
        r_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV]),
            CpdSpec::new(T, &[T_PREV]),
            CpdSpec::new(W_O, &[W_O_PREV]),
        ],
        o_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV]),
            CpdSpec::new(T, &[T_PREV]),
            CpdSpec::new(W_O, &[W_O_PREV]),
        ],
    };
    let table = structure.validate(n_bins)?;
    let identity = |child: &str, prev: &str| -> Result<CpdTable> {
        let c = table.var(child)?;
        let card = c.cardinality;
        cpd_from_fn(c, vec![table.var(prev)?], move |pa| {
            let mut d = vec![0.0; card];
            d[pa[0]] = 1.0;
            d
        })
    };
    let regime = |kind: RegimeKind| -> Result<TransitionRegime> {
        TransitionRegime::new(
            kind,
            vec![
                identity(I, I_PREV)?,
                identity(W, W_PREV)?,
                identity(T, T_PREV)?,
                identity(W_O, W_O_PREV)?,
            ],
        )
    };
    DbnModel::new(
        "identity",
        n_bins,
        uniform_priors(&table)?,
        regime(RegimeKind::RContributor)?,
        regime(RegimeKind::OContributor)?,
    )
}

/// The hand-authored qualitative model over [`default_structure`].
pub fn reference_model(n_bins: usize) -> Result<DbnModel> {
    use names::*;
    let structure = default_structure();
    let table = structure.validate(n_bins)?;
    let n = n_bins;
    let high = n / 2; // bins >= high count as "high" previous trust

    // R regime: w | w_prev, t_prev, i, al, a_o
    let w_r = cpd_from_fn(
        table.var(W)?,
        vec![
            table.var(W_PREV)?,
            table.var(T_PREV)?,
            table.var(I)?,
            table.var(AL)?,
            table.var(A_O)?,
        ],
        |pa| {
            let (w_prev, t_prev, i, al, a_o) = (pa[0], pa[1], pa[2], pa[3], pa[4]);
            if al == Alignment::Aligned.index() {
                let up = 0.30
                    + 0.08 * f64::from(a_o == OtherAction::Yield.index())
                    + 0.05 * f64::from(i == Intention::Yield.index())
                    + 0.04 * f64::from(t_prev >= high);
                drift_distribution(n, w_prev, up, 0.0)
            } else {
                let down = 0.25
                    + 0.08 * f64::from(a_o == OtherAction::Unyield.index())
                    + 0.04 * f64::from(t_prev < high);
                drift_distribution(n, w_prev, 0.0, down)
            }
        },
    )?;

    // R regime: t | t_prev, a_r, al. Alignment moves trust more than the
    // action itself does, so an intention-matching policy dominates.
    let t_r = cpd_from_fn(
        table.var(T)?,
        vec![table.var(T_PREV)?, table.var(A_R)?, table.var(AL)?],
        |pa| {
            let (t_prev, a_r, al) = (pa[0], pa[1], pa[2]);
            let mut up = 0.0;
            let mut down = 0.0;
            if a_r == AvAction::Yield.index() {
                up += 0.10;
            } else {
                down += 0.08;
            }
            if al == Alignment::Aligned.index() {
                up += 0.25;
            } else {
                down += 0.25;
            }
            drift_distribution(n, t_prev, up, down)
        },
    )?;

    let i_r = CpdTable::new(
        table.var(I)?,
        vec![table.var(I_PREV)?],
        sticky_intention(),
    )?;

    // R regime: w_o | w_o_prev, a_r
    let wo_r = cpd_from_fn(
        table.var(W_O)?,
        vec![table.var(W_O_PREV)?, table.var(A_R)?],
        |pa| {
            let (wo_prev, a_r) = (pa[0], pa[1]);
            if a_r == AvAction::Yield.index() {
                drift_distribution(n, wo_prev, 0.30, 0.0)
            } else {
                drift_distribution(n, wo_prev, 0.0, 0.30)
            }
        },
    )?;

    // O regime: w | w_prev, t_prev, a_o
    let w_o_regime = cpd_from_fn(
        table.var(W)?,
        vec![table.var(W_PREV)?, table.var(T_PREV)?, table.var(A_O)?],
        |pa| {
            let (w_prev, t_prev, a_o) = (pa[0], pa[1], pa[2]);
            if a_o == OtherAction::Yield.index() {
                drift_distribution(n, w_prev, 0.32 + 0.05 * f64::from(t_prev >= high), 0.0)
            } else {
                drift_distribution(n, w_prev, 0.0, 0.32 + 0.04 * f64::from(t_prev < high))
            }
        },
    )?;

    // O regime: t | t_prev (mild diffusion)
    let t_o = cpd_from_fn(table.var(T)?, vec![table.var(T_PREV)?], |pa| {
        drift_distribution(n, pa[0], 0.05, 0.05)
    })?;

    let i_o = CpdTable::new(
        table.var(I)?,
        vec![table.var(I_PREV)?],
        sticky_intention(),
    )?;

    // O regime: w_o | w_o_prev, a_o (the other's own action barely moves
    // its own state)
    let wo_o = cpd_from_fn(
        table.var(W_O)?,
        vec![table.var(W_O_PREV)?, table.var(A_O)?],
        |pa| drift_distribution(n, pa[0], 0.08, 0.08),
    )?;

    DbnModel::new(
        structure.structure_id,
        n_bins,
        uniform_priors(&table)?,
        TransitionRegime::new(RegimeKind::RContributor, vec![i_r, w_r, t_r, wo_r])?,
        TransitionRegime::new(RegimeKind::OContributor, vec![i_o, w_o_regime, t_o, wo_o])?,
    )
}

/// Random CPDs (columns drawn uniformly from the probability simplex) and
/// random priors over an arbitrary structure. Intended for oracle tests.
pub fn random_model(
    structure: &StructureCandidate,
    n_bins: usize,
    rng: &mut impl Rng,
) -> Result<DbnModel> {
    let table = structure.validate(n_bins)?;
    let mut build = |specs: &[CpdSpec]| -> Result<Vec<CpdTable>> {
        specs
            .iter()
            .map(|s| {
                let child = table.var(&s.child)?;
                let parents = s
                    .parents
                    .iter()
                    .map(|p| table.var(p))
                    .collect::<Result<Vec<_>>>()?;
                let card = child.cardinality;
                let n_cols: usize = parents.iter().map(|p| p.cardinality).product();
                let mut values = Vec::with_capacity(n_cols * card);
                for _ in 0..n_cols {
                    values.extend(random_simplex(card, rng));
                }
                CpdTable::new(child, parents, values)
            })
            .collect()
    };
    let r = TransitionRegime::new(RegimeKind::RContributor, build(&structure.r_contributor)?)?;
    let o = TransitionRegime::new(RegimeKind::OContributor, build(&structure.o_contributor)?)?;

    let mut priors = BTreeMap::new();
    for name in ALL_LATENTS {
        let var = table.var(name)?;
        let card = var.cardinality;
        priors.insert(
            name.to_string(),
            Factor::new(vec![var], random_simplex(card, rng))?,
        );
    }
    DbnModel::new(structure.structure_id.clone(), n_bins, priors, r, o)
}

fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    // Exponential spacings normalized to sum exactly to one.
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-6)
        .collect();
    let sum: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let correction: f64 = 1.0 - p.iter().sum::<f64>();
    p[0] += correction;
    p
}

fn uniform_priors(table: &VarTable) -> Result<BTreeMap<String, Factor>> {
    let mut priors = BTreeMap::new();
    for name in ALL_LATENTS {
        priors.insert(name.to_string(), Factor::uniform(vec![table.var(name)?])?);
    }
    Ok(priors)
}
