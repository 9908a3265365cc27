//! Network structures: which parents feed each latent state, per regime.
//!
//! A slice of the network uses fixed variable names: current-slice latents
//! `w`, `t`, `i`, `w_o`, their previous-slice copies `*_prev`, and the
//! event inputs `a_r`, `a_o`, `al`. In the R-contributor regime the `a_o`
//! input denotes the other road user's most recent action (from the
//! previous event); in the O-contributor regime it is the current action.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vars::Variable;

pub mod names {
    pub const W: &str = "w";
    pub const T: &str = "t";
    pub const I: &str = "i";
    pub const W_O: &str = "w_o";
    pub const W_PREV: &str = "w_prev";
    pub const T_PREV: &str = "t_prev";
    pub const I_PREV: &str = "i_prev";
    pub const W_O_PREV: &str = "w_o_prev";
    pub const A_R: &str = "a_r";
    pub const A_O: &str = "a_o";
    pub const AL: &str = "al";
}

/// User-side latents of one slice, in canonical declaration order.
pub const USER_LATENTS: [&str; 3] = [names::W, names::T, names::I];
/// All latents of one slice.
pub const ALL_LATENTS: [&str; 4] = [names::W, names::T, names::I, names::W_O];

/// Resolves variable names to typed variables for a given bin count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarTable {
    pub n_bins: usize,
}

impl VarTable {
    pub fn new(n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::model(format!("n_bins must be >= 2, got {n_bins}")));
        }
        Ok(VarTable { n_bins })
    }

    pub fn cardinality_of(&self, name: &str) -> Option<usize> {
        use names::*;
        match name {
            W | T | W_O | W_PREV | T_PREV | W_O_PREV => Some(self.n_bins),
            I | I_PREV | A_R | A_O | AL => Some(2),
            _ => None,
        }
    }

    pub fn var(&self, name: &str) -> Result<Variable> {
        let card = self
            .cardinality_of(name)
            .ok_or_else(|| Error::model(format!("unknown model variable {name:?}")))?;
        Variable::new(name, card)
    }

    pub fn prev_name(name: &str) -> Option<&'static str> {
        use names::*;
        match name {
            W => Some(W_PREV),
            T => Some(T_PREV),
            I => Some(I_PREV),
            W_O => Some(W_O_PREV),
            _ => None,
        }
    }
}

/// Transition regime discriminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// The AV contributes the accommodative action (R-DBN).
    RContributor,
    /// The other road user contributes (O-DBN).
    OContributor,
}

impl RegimeKind {
    /// Event inputs a CPD in this regime may condition on.
    pub fn allowed_inputs(self) -> &'static [&'static str] {
        match self {
            RegimeKind::RContributor => &[names::A_R, names::AL, names::A_O],
            RegimeKind::OContributor => &[names::A_O],
        }
    }
}

/// Parent list for one latent child.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpdSpec {
    pub child: String,
    pub parents: Vec<String>,
}

impl CpdSpec {
    pub fn new(child: &str, parents: &[&str]) -> Self {
        CpdSpec {
            child: child.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// A candidate edge set: one parent list per latent, per regime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureCandidate {
    pub structure_id: String,
    pub r_contributor: Vec<CpdSpec>,
    pub o_contributor: Vec<CpdSpec>,
}

impl StructureCandidate {
    pub fn regime(&self, kind: RegimeKind) -> &[CpdSpec] {
        match kind {
            RegimeKind::RContributor => &self.r_contributor,
            RegimeKind::OContributor => &self.o_contributor,
        }
    }

    /// Check every structural invariant; returns the table used for
    /// resolution so callers can build variables consistently.
    pub fn validate(&self, n_bins: usize) -> Result<VarTable> {
        let table = VarTable::new(n_bins)?;
        for kind in [RegimeKind::RContributor, RegimeKind::OContributor] {
            self.validate_regime(kind, &table)?;
        }
        Ok(table)
    }

    fn validate_regime(&self, kind: RegimeKind, table: &VarTable) -> Result<()> {
        let specs = self.regime(kind);
        let mut children: Vec<&str> = specs.iter().map(|s| s.child.as_str()).collect();
        children.sort_unstable();
        let mut expected: Vec<&str> = ALL_LATENTS.to_vec();
        expected.sort_unstable();
        if children != expected {
            return Err(Error::model(format!(
                "{kind:?} regime of {:?} must declare exactly one CPD per latent {ALL_LATENTS:?}, got {children:?}",
                self.structure_id
            )));
        }
        for spec in specs {
            table.var(&spec.child)?;
            for p in &spec.parents {
                table.var(p)?;
                if p == &spec.child {
                    return Err(Error::model(format!(
                        "{:?} cannot be its own parent",
                        spec.child
                    )));
                }
            }
            let is_other = spec.child == names::W_O;
            for p in &spec.parents {
                let allowed = if is_other {
                    // The other road user's chain stays separate from the
                    // user chain: its well-being is never observed, so its
                    // parameters are only estimable from mirrored user
                    // transitions over (previous state, action).
                    p == names::W_O_PREV || kind.allowed_inputs().contains(&p.as_str())
                } else {
                    let prev = [names::W_PREV, names::T_PREV, names::I_PREV];
                    let intra = [names::W, names::T, names::I];
                    prev.contains(&p.as_str())
                        || intra.contains(&p.as_str())
                        || kind.allowed_inputs().contains(&p.as_str())
                };
                if !allowed {
                    return Err(Error::model(format!(
                        "{kind:?} regime: parent {p:?} not allowed for child {:?}",
                        spec.child
                    )));
                }
            }
        }
        // Within-slice edges must be acyclic.
        topological_child_order(specs)?;
        Ok(())
    }
}

/// Order CPD specs so that every intra-slice parent precedes its child.
pub fn topological_child_order(specs: &[CpdSpec]) -> Result<Vec<usize>> {
    let n = specs.len();
    let child_pos = |name: &str| specs.iter().position(|s| s.child == name);
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, spec) in specs.iter().enumerate() {
        for p in &spec.parents {
            if let Some(j) = child_pos(p) {
                deps[i].push(j);
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    while order.len() < n {
        let before = order.len();
        for i in 0..n {
            if !done[i] && deps[i].iter().all(|j| done[*j]) {
                done[i] = true;
                order.push(i);
            }
        }
        if order.len() == before {
            return Err(Error::model(
                "cycle among intra-slice edges in structure".to_string(),
            ));
        }
    }
    Ok(order)
}

/// The refined default structure: every statistically supported dependency
/// (other's action on well-being, the AV action on trust, intention and
/// alignment on well-being, alignment on trust, trust on well-being) plus
/// self-persistence for each latent.
pub fn default_structure() -> StructureCandidate {
    use names::*;
    StructureCandidate {
        structure_id: "refined-default".to_string(),
        r_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV, T_PREV, I, AL, A_O]),
            CpdSpec::new(T, &[T_PREV, A_R, AL]),
            CpdSpec::new(W_O, &[W_O_PREV, A_R]),
        ],
        o_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV, T_PREV, A_O]),
            CpdSpec::new(T, &[T_PREV]),
            CpdSpec::new(W_O, &[W_O_PREV, A_O]),
        ],
    }
}

/// Self-persistence only: each latent depends on its previous value and
/// the contributor's action where one applies. A useful baseline candidate.
pub fn persistence_structure() -> StructureCandidate {
    use names::*;
    StructureCandidate {
        structure_id: "persistence-baseline".to_string(),
        r_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV]),
            CpdSpec::new(T, &[T_PREV, A_R]),
            CpdSpec::new(W_O, &[W_O_PREV, A_R]),
        ],
        o_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV, A_O]),
            CpdSpec::new(T, &[T_PREV]),
            CpdSpec::new(W_O, &[W_O_PREV, A_O]),
        ],
    }
}

/// Action-only structure with minimal parent sets; every CPD is directly
/// estimable and mirror-recoverable, which makes it the right shape for
/// generate-then-recover checks.
pub fn compact_structure() -> StructureCandidate {
    use names::*;
    StructureCandidate {
        structure_id: "compact-actions".to_string(),
        r_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV, A_R]),
            CpdSpec::new(T, &[T_PREV, A_R]),
            CpdSpec::new(W_O, &[W_O_PREV, A_R]),
        ],
        o_contributor: vec![
            CpdSpec::new(I, &[I_PREV]),
            CpdSpec::new(W, &[W_PREV, A_O]),
            CpdSpec::new(T, &[T_PREV, A_O]),
            CpdSpec::new(W_O, &[W_O_PREV, A_O]),
        ],
    }
}
