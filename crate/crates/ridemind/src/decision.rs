//! Influence-diagram decision layer over one AV-contributor slice.
//!
//! The chance layer is the R-contributor regime of a model conditioned on
//! the previous belief (the per-latent priors, optionally pinned by
//! evidence); the decision is the AV's accommodative action; alignment is
//! derived from the current intention and the chosen action. Expected
//! utilities are computed by exact enumeration of the slice joint.

use serde::{Deserialize, Serialize};

use crate::bins::Bin;
use crate::dbn::DbnModel;
use crate::error::{Error, Result};
use crate::factor::{joint_assignments, Factor};
use crate::structure::names;
use crate::vars::{alignment_of, AvAction, Contributor, Intention, Variable};

/// What the AV optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UtilitySpec {
    /// U = w_k.
    UserWellbeing,
    /// U = t_k.
    UserTrust,
    /// U = w_k + w_o_k, minus `cost` when the AV yields: yielding burns
    /// energy, so the cost enters the yielding branch as a penalty.
    Tradeoff { cost: f64 },
}

impl UtilitySpec {
    fn base_value(&self, outcome: &Outcome) -> f64 {
        match self {
            UtilitySpec::UserWellbeing => outcome.wellbeing.midpoint(),
            UtilitySpec::UserTrust => outcome.trust.midpoint(),
            UtilitySpec::Tradeoff { cost } => {
                let yield_penalty = match outcome.action {
                    AvAction::Yield => *cost,
                    AvAction::Unyield => 0.0,
                };
                outcome.wellbeing.midpoint() + outcome.other_wellbeing.midpoint() - yield_penalty
            }
        }
    }
}

/// One fully resolved slice outcome, as seen by a utility function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub wellbeing: Bin,
    pub trust: Bin,
    pub intention: Intention,
    pub other_wellbeing: Bin,
    pub action: AvAction,
}

/// Evidence assignable before the decision: the previous user state, the
/// current intention, and the other's previous well-being.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub w_prev: Option<Bin>,
    pub t_prev: Option<Bin>,
    pub intention: Option<Intention>,
    pub w_o_prev: Option<Bin>,
}

impl Evidence {
    pub fn none() -> Self {
        Evidence::default()
    }

    pub fn is_empty(&self) -> bool {
        self.w_prev.is_none()
            && self.t_prev.is_none()
            && self.intention.is_none()
            && self.w_o_prev.is_none()
    }
}

/// The chance nodes evidence can pin, and the nodes VOI ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceVariable {
    WPrev,
    TPrev,
    Intention,
    WOPrev,
}

impl EvidenceVariable {
    pub const ALL: [EvidenceVariable; 4] = [
        EvidenceVariable::WPrev,
        EvidenceVariable::TPrev,
        EvidenceVariable::Intention,
        EvidenceVariable::WOPrev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvidenceVariable::WPrev => names::W_PREV,
            EvidenceVariable::TPrev => names::T_PREV,
            EvidenceVariable::Intention => names::I,
            EvidenceVariable::WOPrev => names::W_O_PREV,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            names::W_PREV => Ok(EvidenceVariable::WPrev),
            names::T_PREV => Ok(EvidenceVariable::TPrev),
            names::I | "intention" => Ok(EvidenceVariable::Intention),
            names::W_O_PREV => Ok(EvidenceVariable::WOPrev),
            _ => Err(Error::usage(format!(
                "unknown evidence variable {s:?} (expected w_prev, t_prev, i, or w_o_prev)"
            ))),
        }
    }

    pub fn cardinality(self, n_bins: usize) -> usize {
        match self {
            EvidenceVariable::Intention => 2,
            _ => n_bins,
        }
    }

    pub fn is_assigned(self, ev: &Evidence) -> bool {
        match self {
            EvidenceVariable::WPrev => ev.w_prev.is_some(),
            EvidenceVariable::TPrev => ev.t_prev.is_some(),
            EvidenceVariable::Intention => ev.intention.is_some(),
            EvidenceVariable::WOPrev => ev.w_o_prev.is_some(),
        }
    }

    pub fn assign(self, mut ev: Evidence, value: usize, n_bins: usize) -> Result<Evidence> {
        match self {
            EvidenceVariable::WPrev => ev.w_prev = Some(Bin::new(value, n_bins)?),
            EvidenceVariable::TPrev => ev.t_prev = Some(Bin::new(value, n_bins)?),
            EvidenceVariable::Intention => ev.intention = Some(Intention::from_index(value)?),
            EvidenceVariable::WOPrev => ev.w_o_prev = Some(Bin::new(value, n_bins)?),
        }
        Ok(ev)
    }

    pub fn value_label(self, value: usize) -> String {
        match self {
            EvidenceVariable::Intention => Intention::from_index(value)
                .map(|i| i.token().to_string())
                .unwrap_or_else(|_| value.to_string()),
            _ => value.to_string(),
        }
    }
}

/// A one-slice decision problem: chance layer, binary decision, utility.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceDiagram {
    model: DbnModel,
    utility: UtilitySpec,
    /// Positive affine transform applied on top of the base utility.
    scale: f64,
    offset: f64,
}

impl InfluenceDiagram {
    pub fn new(model: DbnModel, utility: UtilitySpec) -> Self {
        InfluenceDiagram {
            model,
            utility,
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// Replace the utility, keeping the chance layer.
    pub fn with_utility(mut self, utility: UtilitySpec) -> Self {
        self.utility = utility;
        self
    }

    /// Apply `u -> scale * u + offset` on top of the base utility.
    pub fn with_affine(mut self, scale: f64, offset: f64) -> Self {
        self.scale = scale;
        self.offset = offset;
        self
    }

    pub fn model(&self) -> &DbnModel {
        &self.model
    }

    pub fn utility(&self) -> UtilitySpec {
        self.utility
    }

    fn n_bins(&self) -> usize {
        self.model.n_bins()
    }

    fn var(&self, name: &str) -> Result<Variable> {
        self.model.var_table().var(name)
    }

    /// Indicator over {i, al} encoding al = alignment_of(i, action).
    fn alignment_link(&self, action: AvAction) -> Result<Factor> {
        let i = self.var(names::I)?;
        let al = self.var(names::AL)?;
        let mut values = vec![0.0; 4];
        for (ii, intention) in Intention::VALUES.into_iter().enumerate() {
            let a = alignment_of(intention, action);
            values[ii * 2 + a.index()] = 1.0;
        }
        Factor::new(vec![i, al], values)
    }

    /// The user-side slice joint (unnormalized) given an action and
    /// evidence: scope covers previous and current user latents.
    fn user_side(&self, action: AvAction, ev: &Evidence) -> Result<Factor> {
        let priors = self.model.priors();
        let mut f = priors[names::W]
            .rename(&[(names::W, names::W_PREV)])?
            .product(&priors[names::T].rename(&[(names::T, names::T_PREV)])?)?
            .product(&priors[names::I].rename(&[(names::I, names::I_PREV)])?)?;

        let regime = self.model.regime(Contributor::R);
        let mut has_alignment_parent = false;
        for child in [names::I, names::W, names::T] {
            let cpd = regime
                .cpd_for(child)
                .ok_or_else(|| Error::model(format!("regime lacks a CPD for {child:?}")))?;
            let mut t = cpd.table().clone();
            if t.has_variable(names::A_R) {
                t = t.reduce(names::A_R, action.index())?;
            }
            has_alignment_parent |= t.has_variable(names::AL);
            f = f.product(&t)?;
        }
        if has_alignment_parent {
            f = f.product(&self.alignment_link(action)?)?;
            f = f.marginalize(names::AL)?;
        }
        // The other's recent action is unknown at decision time.
        if f.has_variable(names::A_O) {
            f = f.average_out(names::A_O)?;
        }

        if let Some(b) = ev.w_prev {
            self.check_bin(b)?;
            f = f.product(&Factor::indicator(self.var(names::W_PREV)?, b.index)?)?;
        }
        if let Some(b) = ev.t_prev {
            self.check_bin(b)?;
            f = f.product(&Factor::indicator(self.var(names::T_PREV)?, b.index)?)?;
        }
        if let Some(i) = ev.intention {
            f = f.product(&Factor::indicator(self.var(names::I)?, i.index())?)?;
        }
        Ok(f)
    }

    /// The other-side slice joint (unnormalized) given an action and
    /// evidence.
    fn other_side(&self, action: AvAction, ev: &Evidence) -> Result<Factor> {
        let priors = self.model.priors();
        let mut g = priors[names::W_O].rename(&[(names::W_O, names::W_O_PREV)])?;
        let cpd = self
            .model
            .regime(Contributor::R)
            .cpd_for(names::W_O)
            .ok_or_else(|| Error::model("regime lacks a CPD for \"w_o\"".to_string()))?;
        let mut t = cpd.table().clone();
        if t.has_variable(names::A_R) {
            t = t.reduce(names::A_R, action.index())?;
        }
        g = g.product(&t)?;
        if g.has_variable(names::A_O) {
            g = g.average_out(names::A_O)?;
        }
        if let Some(b) = ev.w_o_prev {
            self.check_bin(b)?;
            g = g.product(&Factor::indicator(self.var(names::W_O_PREV)?, b.index)?)?;
        }
        Ok(g)
    }

    fn check_bin(&self, b: Bin) -> Result<()> {
        if b.n_bins != self.n_bins() {
            return Err(Error::usage(format!(
                "evidence bin uses {} bins but the model uses {}",
                b.n_bins,
                self.n_bins()
            )));
        }
        Ok(())
    }

    /// P(current-slice outcome | ev, action) as two independent
    /// normalized factors (user side over {w, t, i}, other side over
    /// {w_o}).
    fn outcome_distribution(&self, action: AvAction, ev: &Evidence) -> Result<(Factor, Factor)> {
        let user = self
            .user_side(action, ev)?
            .marginal(&[names::W, names::T, names::I])?
            .normalize()
            .map_err(|_| Error::degenerate("evidence has zero probability".to_string()))?;
        let other = self
            .other_side(action, ev)?
            .marginal(&[names::W_O])?
            .normalize()
            .map_err(|_| Error::degenerate("evidence has zero probability".to_string()))?;
        Ok((user, other))
    }

    /// Distribution of a pre-decision node given evidence; rejects nodes
    /// whose distribution would depend on the decision.
    fn predecision_marginal(&self, node: EvidenceVariable, ev: &Evidence) -> Result<Vec<f64>> {
        if node == EvidenceVariable::Intention {
            let cpd = self
                .model
                .regime(Contributor::R)
                .cpd_for(names::I)
                .expect("validated model");
            let action_dependent = cpd
                .parents()
                .iter()
                .any(|p| p.name == names::A_R || p.name == names::AL);
            if action_dependent {
                return Err(Error::usage(
                    "intention depends on the decision in this structure; its \
                     pre-decision distribution is undefined"
                        .to_string(),
                ));
            }
        }
        match node {
            EvidenceVariable::WOPrev => {
                let priors = self.model.priors();
                let mut g = priors[names::W_O].rename(&[(names::W_O, names::W_O_PREV)])?;
                if let Some(b) = ev.w_o_prev {
                    g = g.product(&Factor::indicator(self.var(names::W_O_PREV)?, b.index)?)?;
                }
                Ok(g.normalize()
                    .map_err(|_| Error::degenerate("evidence has zero probability".to_string()))?
                    .values()
                    .to_vec())
            }
            _ => {
                // User side without the action-dependent pieces: priors,
                // the intention CPD (action-independence checked above),
                // and the user-state evidence.
                let priors = self.model.priors();
                let mut f = priors[names::W]
                    .rename(&[(names::W, names::W_PREV)])?
                    .product(&priors[names::T].rename(&[(names::T, names::T_PREV)])?)?
                    .product(&priors[names::I].rename(&[(names::I, names::I_PREV)])?)?;
                let cpd = self
                    .model
                    .regime(Contributor::R)
                    .cpd_for(names::I)
                    .expect("validated model");
                let mut t = cpd.table().clone();
                if t.has_variable(names::A_O) {
                    t = t.average_out(names::A_O)?;
                }
                f = f.product(&t)?;
                if let Some(b) = ev.w_prev {
                    f = f.product(&Factor::indicator(self.var(names::W_PREV)?, b.index)?)?;
                }
                if let Some(b) = ev.t_prev {
                    f = f.product(&Factor::indicator(self.var(names::T_PREV)?, b.index)?)?;
                }
                if let Some(i) = ev.intention {
                    f = f.product(&Factor::indicator(self.var(names::I)?, i.index())?)?;
                }
                let marginal = f
                    .marginal(&[node.name()])?
                    .normalize()
                    .map_err(|_| Error::degenerate("evidence has zero probability".to_string()))?;
                Ok(marginal.values().to_vec())
            }
        }
    }
}

/// Expected utility of an action under an arbitrary outcome-valued
/// function, by exact enumeration of the slice joint.
pub fn expected_utility_with(
    cim: &InfluenceDiagram,
    action: AvAction,
    ev: &Evidence,
    utility: impl Fn(&Outcome) -> f64,
) -> Result<f64> {
    let (user, other) = cim.outcome_distribution(action, ev)?;
    let n_bins = cim.n_bins();
    // Canonical user scope is (i, t, w); iterate explicitly.
    let mut eu = 0.0;
    for digits in joint_assignments(&[2, n_bins, n_bins]) {
        let (i, t, w) = (digits[0], digits[1], digits[2]);
        let p_user = user.value_at(&[i, t, w]);
        if p_user == 0.0 {
            continue;
        }
        for (wo, p_other) in other.values().iter().enumerate() {
            let p = p_user * p_other;
            if p == 0.0 {
                continue;
            }
            let outcome = Outcome {
                wellbeing: Bin { index: w, n_bins },
                trust: Bin { index: t, n_bins },
                intention: Intention::from_index(i)?,
                other_wellbeing: Bin {
                    index: wo,
                    n_bins,
                },
                action,
            };
            eu += p * utility(&outcome);
        }
    }
    Ok(eu)
}

/// Expected utility of taking `action` given the evidence, under the
/// diagram's configured utility.
pub fn expected_utility(cim: &InfluenceDiagram, action: AvAction, ev: &Evidence) -> Result<f64> {
    expected_utility_with(cim, action, ev, |o| {
        cim.scale * cim.utility.base_value(o) + cim.offset
    })
}

/// The optimal action and both expected utilities. Exact ties break toward
/// yielding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action: AvAction,
    pub eu_yield: f64,
    pub eu_unyield: f64,
}

impl PolicyDecision {
    pub fn best_eu(&self) -> f64 {
        match self.action {
            AvAction::Yield => self.eu_yield,
            AvAction::Unyield => self.eu_unyield,
        }
    }
}

/// Maximize expected utility over the two accommodative actions.
pub fn optimal_policy(cim: &InfluenceDiagram, ev: &Evidence) -> Result<PolicyDecision> {
    let eu_yield = expected_utility(cim, AvAction::Yield, ev)?;
    let eu_unyield = expected_utility(cim, AvAction::Unyield, ev)?;
    let action = if eu_unyield > eu_yield {
        AvAction::Unyield
    } else {
        AvAction::Yield
    };
    Ok(PolicyDecision {
        action,
        eu_yield,
        eu_unyield,
    })
}

/// The optimal decision per value of one evidence variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub value_index: usize,
    pub value_label: String,
    pub decision: PolicyDecision,
}

/// A contiguous run of bins sharing the same optimal action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyRange {
    pub from_bin: usize,
    pub to_bin: usize,
    pub action: AvAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub variable: EvidenceVariable,
    pub entries: Vec<PolicyEntry>,
    /// Threshold summary for bin-valued variables.
    pub bin_ranges: Option<Vec<PolicyRange>>,
}

/// Evaluate the optimal policy for every value of `ev_var`, holding the
/// rest of the evidence fixed.
pub fn policy_table(
    cim: &InfluenceDiagram,
    ev_var: EvidenceVariable,
    base_ev: &Evidence,
) -> Result<PolicyTable> {
    let n_bins = cim.n_bins();
    let mut entries = Vec::new();
    for v in 0..ev_var.cardinality(n_bins) {
        let ev = ev_var.assign(*base_ev, v, n_bins)?;
        let decision = optimal_policy(cim, &ev)?;
        entries.push(PolicyEntry {
            value_index: v,
            value_label: ev_var.value_label(v),
            decision,
        });
    }
    let bin_ranges = if ev_var == EvidenceVariable::Intention {
        None
    } else {
        let mut ranges: Vec<PolicyRange> = Vec::new();
        for e in &entries {
            match ranges.last_mut() {
                Some(r) if r.action == e.decision.action && r.to_bin + 1 == e.value_index => {
                    r.to_bin = e.value_index;
                }
                _ => ranges.push(PolicyRange {
                    from_bin: e.value_index,
                    to_bin: e.value_index,
                    action: e.decision.action,
                }),
            }
        }
        Some(ranges)
    };
    Ok(PolicyTable {
        variable: ev_var,
        entries,
        bin_ranges,
    })
}

/// Expected gain in optimal expected utility from observing `node` before
/// deciding: sum_v P(node = v | ev) EU*(ev + v) - EU*(ev).
pub fn value_of_information(
    cim: &InfluenceDiagram,
    node: EvidenceVariable,
    ev: &Evidence,
) -> Result<f64> {
    if node.is_assigned(ev) {
        return Err(Error::usage(format!(
            "{} is already observed in the evidence",
            node.name()
        )));
    }
    let dist = cim.predecision_marginal(node, ev)?;
    let baseline = optimal_policy(cim, ev)?.best_eu();
    let mut informed = 0.0;
    for (v, p) in dist.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let ev_v = node.assign(*ev, v, cim.n_bins())?;
        informed += p * optimal_policy(cim, &ev_v)?.best_eu();
    }
    Ok(informed - baseline)
}

/// One row of a cost-sensitivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cost: f64,
    pub evidence_var: String,
    pub evidence_value: String,
    pub optimal_action: String,
    pub eu_yield: f64,
    pub eu_unyield: f64,
}

/// Evaluate the trade-off policy over a cost grid, optionally per value of
/// one evidence variable. The diagram must carry a `Tradeoff` utility.
pub fn cost_sensitivity_sweep(
    cim: &InfluenceDiagram,
    cost_grid: &[f64],
    ev_var: Option<EvidenceVariable>,
    base_ev: &Evidence,
) -> Result<Vec<SweepRow>> {
    if !matches!(cim.utility(), UtilitySpec::Tradeoff { .. }) {
        return Err(Error::usage(
            "cost sweeps need a trade-off utility".to_string(),
        ));
    }
    for c in cost_grid {
        if *c < 0.0 {
            return Err(Error::usage(format!("costs must be >= 0, got {c}")));
        }
    }
    let mut rows = Vec::new();
    for &cost in cost_grid {
        let at_cost = cim.clone().with_utility(UtilitySpec::Tradeoff { cost });
        match ev_var {
            None => {
                let d = optimal_policy(&at_cost, base_ev)?;
                rows.push(SweepRow {
                    cost,
                    evidence_var: String::new(),
                    evidence_value: String::new(),
                    optimal_action: d.action.token().to_string(),
                    eu_yield: d.eu_yield,
                    eu_unyield: d.eu_unyield,
                });
            }
            Some(var) => {
                let table = policy_table(&at_cost, var, base_ev)?;
                for e in table.entries {
                    rows.push(SweepRow {
                        cost,
                        evidence_var: var.name().to_string(),
                        evidence_value: e.value_label,
                        optimal_action: e.decision.action.token().to_string(),
                        eu_yield: e.decision.eu_yield,
                        eu_unyield: e.decision.eu_unyield,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpd::CpdTable;
    use crate::models::{identity_model, random_model, reference_model};
    use crate::structure::default_structure;
    
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    /// Exhaustive-enumeration oracle for the expected utility, written
    /// against the raw CPD tables with nested loops (no factor algebra).
    fn brute_force_eu(
        model: &DbnModel,
        utility: &UtilitySpec,
        action: AvAction,
        ev: &Evidence,
    ) -> f64 {
        let n = model.n_bins();
        let regime = model.regime(Contributor::R);
        let priors = model.priors();
        let p_prior = |name: &str, v: usize| priors[name].values()[v];
        let cpd = |child: &str| regime.cpd_for(child).unwrap();

        let resolve = |cpd: &CpdTable,
                       child_v: usize,
                       w_prev: usize,
                       t_prev: usize,
                       i_prev: usize,
                       wo_prev: usize,
                       i_cur: usize,
                       w_cur: usize,
                       t_cur: usize,
                       a_o: usize|
         -> f64 {
            let parents: Vec<usize> = cpd
                .parents()
                .iter()
                .map(|p| match p.name.as_str() {
                    names::W_PREV => w_prev,
                    names::T_PREV => t_prev,
                    names::I_PREV => i_prev,
                    names::W_O_PREV => wo_prev,
                    names::I => i_cur,
                    names::W => w_cur,
                    names::T => t_cur,
                    names::A_R => action.index(),
                    names::A_O => a_o,
                    names::AL => {
                        alignment_of(Intention::from_index(i_cur).unwrap(), action).index()
                    }
                    other => panic!("unexpected parent {other}"),
                })
                .collect();
            cpd.prob(child_v, &parents)
        };

        let matches_ev = |w_prev: usize, t_prev: usize, i_cur: usize, wo_prev: usize| -> bool {
            ev.w_prev.is_none_or(|b| b.index == w_prev)
                && ev.t_prev.is_none_or(|b| b.index == t_prev)
                && ev.intention.is_none_or(|i| i.index() == i_cur)
                && ev.w_o_prev.is_none_or(|b| b.index == wo_prev)
        };

        let mut mass = 0.0;
        let mut acc = 0.0;
        for w_prev in 0..n {
            for t_prev in 0..n {
                for i_prev in 0..2 {
                    for wo_prev in 0..n {
                        for a_o in 0..2usize {
                            let base = p_prior(names::W, w_prev)
                                * p_prior(names::T, t_prev)
                                * p_prior(names::I, i_prev)
                                * p_prior(names::W_O, wo_prev)
                                * 0.5; // uniform over the unknown recent a_o
                            for i_cur in 0..2 {
                                if !matches_ev(w_prev, t_prev, i_cur, wo_prev) {
                                    continue;
                                }
                                let pi = resolve(
                                    cpd(names::I),
                                    i_cur,
                                    w_prev,
                                    t_prev,
                                    i_prev,
                                    wo_prev,
                                    i_cur,
                                    0,
                                    0,
                                    a_o,
                                );
                                for w_cur in 0..n {
                                    let pw = resolve(
                                        cpd(names::W),
                                        w_cur,
                                        w_prev,
                                        t_prev,
                                        i_prev,
                                        wo_prev,
                                        i_cur,
                                        w_cur,
                                        0,
                                        a_o,
                                    );
                                    for t_cur in 0..n {
                                        let pt = resolve(
                                            cpd(names::T),
                                            t_cur,
                                            w_prev,
                                            t_prev,
                                            i_prev,
                                            wo_prev,
                                            i_cur,
                                            w_cur,
                                            t_cur,
                                            a_o,
                                        );
                                        for wo_cur in 0..n {
                                            let pwo = resolve(
                                                cpd(names::W_O),
                                                wo_cur,
                                                w_prev,
                                                t_prev,
                                                i_prev,
                                                wo_prev,
                                                i_cur,
                                                w_cur,
                                                t_cur,
                                                a_o,
                                            );
                                            let p = base * pi * pw * pt * pwo;
                                            if p == 0.0 {
                                                continue;
                                            }
                                            let outcome = Outcome {
                                                wellbeing: Bin { index: w_cur, n_bins: n },
                                                trust: Bin { index: t_cur, n_bins: n },
                                                intention: Intention::from_index(i_cur).unwrap(),
                                                other_wellbeing: Bin {
                                                    index: wo_cur,
                                                    n_bins: n,
                                                },
                                                action,
                                            };
                                            mass += p;
                                            acc += p * utility.base_value(&outcome);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        acc / mass
    }

    #[test]
    fn constant_utility_ties_toward_yield() {
        let cim = InfluenceDiagram::new(reference_model(4).unwrap(), UtilitySpec::UserWellbeing);
        let ev = Evidence::none();
        let u0 = 2.75;
        let ey = expected_utility_with(&cim, AvAction::Yield, &ev, |_| u0).unwrap();
        let eu = expected_utility_with(&cim, AvAction::Unyield, &ev, |_| u0).unwrap();
        assert!((ey - u0).abs() < 1e-12);
        assert!((eu - u0).abs() < 1e-12);

        // A utility blind to every outcome forces the yield tie-break.
        let flat = InfluenceDiagram::new(identity_model(4).unwrap(), UtilitySpec::UserWellbeing);
        let d = optimal_policy(&flat, &ev).unwrap();
        assert!((d.eu_yield - d.eu_unyield).abs() < 1e-12);
        assert_eq!(d.action, AvAction::Yield);
    }

    #[test]
    fn deterministic_chance_layer_returns_single_outcome_utility() {
        // Identity transitions and point priors pin the outcome exactly.
        let base = identity_model(4).unwrap();
        let table = base.var_table();
        let mut priors = BTreeMap::new();
        for (name, v) in [(names::W, 3usize), (names::T, 1), (names::I, 0), (names::W_O, 2)] {
            priors.insert(
                name.to_string(),
                Factor::indicator(table.var(name).unwrap(), v).unwrap(),
            );
        }
        let model = DbnModel::new(
            "identity",
            4,
            priors,
            base.regime(Contributor::R).clone(),
            base.regime(Contributor::O).clone(),
        )
        .unwrap();
        let cim = InfluenceDiagram::new(model, UtilitySpec::UserWellbeing);
        let eu = expected_utility(&cim, AvAction::Unyield, &Evidence::none()).unwrap();
        assert!((eu - Bin::new(3, 4).unwrap().midpoint()).abs() < 1e-12);

        let trust = cim.clone().with_utility(UtilitySpec::UserTrust);
        let eu = expected_utility(&trust, AvAction::Yield, &Evidence::none()).unwrap();
        assert!((eu - Bin::new(1, 4).unwrap().midpoint()).abs() < 1e-12);
    }

    #[test]
    fn expected_utility_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..10 {
            let model = random_model(&default_structure(), 3, &mut rng).unwrap();
            let utility = match trial % 3 {
                0 => UtilitySpec::UserWellbeing,
                1 => UtilitySpec::UserTrust,
                _ => UtilitySpec::Tradeoff { cost: 0.3 },
            };
            let ev = match trial % 4 {
                0 => Evidence::none(),
                1 => Evidence {
                    w_prev: Some(Bin::new(1, 3).unwrap()),
                    ..Evidence::none()
                },
                2 => Evidence {
                    intention: Some(Intention::Unyield),
                    w_o_prev: Some(Bin::new(2, 3).unwrap()),
                    ..Evidence::none()
                },
                _ => Evidence {
                    w_prev: Some(Bin::new(0, 3).unwrap()),
                    t_prev: Some(Bin::new(2, 3).unwrap()),
                    ..Evidence::none()
                },
            };
            let cim = InfluenceDiagram::new(model.clone(), utility);
            for action in AvAction::VALUES {
                let fast = expected_utility(&cim, action, &ev).unwrap();
                let slow = brute_force_eu(&model, &utility, action, &ev);
                assert!(
                    (fast - slow).abs() <= 1e-9,
                    "trial {trial} action {action}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn optimal_policy_is_affine_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let model = random_model(&default_structure(), 3, &mut rng).unwrap();
            let cim = InfluenceDiagram::new(model, UtilitySpec::UserWellbeing);
            let base = optimal_policy(&cim, &Evidence::none()).unwrap();
            let transformed = optimal_policy(
                &cim.clone().with_affine(3.0, 7.0),
                &Evidence::none(),
            )
            .unwrap();
            assert_eq!(base.action, transformed.action);
            assert!((transformed.eu_yield - (3.0 * base.eu_yield + 7.0)).abs() < 1e-9);
            assert!((transformed.eu_unyield - (3.0 * base.eu_unyield + 7.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_utility_is_linear_in_the_utility_table() {
        let model = reference_model(4).unwrap();
        let cim = InfluenceDiagram::new(model, UtilitySpec::UserWellbeing);
        let ev = Evidence {
            t_prev: Some(Bin::new(3, 4).unwrap()),
            ..Evidence::none()
        };
        let u1 = |o: &Outcome| o.wellbeing.midpoint() * 1.3 + f64::from(o.intention.index() as u32);
        let u2 = |o: &Outcome| o.other_wellbeing.midpoint() - 0.4 * o.trust.midpoint();
        for action in AvAction::VALUES {
            let e1 = expected_utility_with(&cim, action, &ev, u1).unwrap();
            let e2 = expected_utility_with(&cim, action, &ev, u2).unwrap();
            let sum = expected_utility_with(&cim, action, &ev, |o| u1(o) + u2(o)).unwrap();
            assert!((sum - (e1 + e2)).abs() <= 1e-9);
        }
    }

    #[test]
    fn reference_policies_favor_yielding_and_alignment() {
        let model = reference_model(6).unwrap();
        for utility in [UtilitySpec::UserWellbeing, UtilitySpec::UserTrust] {
            let cim = InfluenceDiagram::new(model.clone(), utility);
            let d = optimal_policy(&cim, &Evidence::none()).unwrap();
            assert_eq!(d.action, AvAction::Yield, "{utility:?}");
            assert!(d.eu_yield > d.eu_unyield);

            // Knowing the intention, the optimal action matches it.
            let table = policy_table(&cim, EvidenceVariable::Intention, &Evidence::none()).unwrap();
            assert_eq!(table.entries[Intention::Yield.index()].decision.action, AvAction::Yield);
            assert_eq!(
                table.entries[Intention::Unyield.index()].decision.action,
                AvAction::Unyield
            );
        }
    }

    #[test]
    fn policy_table_constant_when_utility_ignores_variable() {
        // Trust utility is blind to the other's previous well-being.
        let cim = InfluenceDiagram::new(reference_model(6).unwrap(), UtilitySpec::UserTrust);
        let table = policy_table(&cim, EvidenceVariable::WOPrev, &Evidence::none()).unwrap();
        let first = table.entries[0].decision;
        for e in &table.entries {
            assert_eq!(e.decision.action, first.action);
            assert!((e.decision.eu_yield - first.eu_yield).abs() < 1e-12);
        }
        let ranges = table.bin_ranges.unwrap();
        assert_eq!(ranges.len(), 1);
        assert_eq!((ranges[0].from_bin, ranges[0].to_bin), (0, 5));
    }

    #[test]
    fn voi_nonnegative_and_zero_for_disconnected_nodes() {
        let model = reference_model(6).unwrap();
        for utility in [
            UtilitySpec::UserWellbeing,
            UtilitySpec::UserTrust,
            UtilitySpec::Tradeoff { cost: 0.1 },
        ] {
            let cim = InfluenceDiagram::new(model.clone(), utility);
            for node in EvidenceVariable::ALL {
                let voi = value_of_information(&cim, node, &Evidence::none()).unwrap();
                assert!(voi >= -1e-9, "{utility:?} {node:?}: {voi}");
            }
        }
        // Trust ignores the other's chain entirely.
        let trust = InfluenceDiagram::new(model.clone(), UtilitySpec::UserTrust);
        let voi = value_of_information(&trust, EvidenceVariable::WOPrev, &Evidence::none()).unwrap();
        assert!(voi.abs() <= 1e-9);

        // Knowing the intention lets the policy align, so it carries real
        // value under both user-state utilities.
        for utility in [UtilitySpec::UserWellbeing, UtilitySpec::UserTrust] {
            let cim = InfluenceDiagram::new(model.clone(), utility);
            let voi =
                value_of_information(&cim, EvidenceVariable::Intention, &Evidence::none()).unwrap();
            assert!(voi > 1e-4, "{utility:?}: VOI(intention) = {voi}");
        }

        // A deterministic node is worthless to observe.
        let table = model.var_table();
        let mut priors = model.priors().clone();
        priors.insert(
            names::W.to_string(),
            Factor::indicator(table.var(names::W).unwrap(), 2).unwrap(),
        );
        let pinned = DbnModel::new(
            model.structure_id(),
            model.n_bins(),
            priors,
            model.regime(Contributor::R).clone(),
            model.regime(Contributor::O).clone(),
        )
        .unwrap();
        let cim = InfluenceDiagram::new(pinned, UtilitySpec::UserWellbeing);
        let voi = value_of_information(&cim, EvidenceVariable::WPrev, &Evidence::none()).unwrap();
        assert!(voi.abs() <= 1e-9);
    }

    #[test]
    fn voi_rejects_observed_node() {
        let cim = InfluenceDiagram::new(reference_model(4).unwrap(), UtilitySpec::UserWellbeing);
        let ev = Evidence {
            intention: Some(Intention::Yield),
            ..Evidence::none()
        };
        assert!(matches!(
            value_of_information(&cim, EvidenceVariable::Intention, &ev),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn sweep_rows_and_monotonicity() {
        let model = reference_model(6).unwrap();
        let cim = InfluenceDiagram::new(model, UtilitySpec::Tradeoff { cost: 0.0 });
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let rows = cost_sensitivity_sweep(&cim, &grid, Some(EvidenceVariable::WPrev), &Evidence::none())
            .unwrap();
        assert_eq!(rows.len(), grid.len() * 6);

        // For each evidence value, the yield region is downward closed.
        for value in 0..6 {
            let label = value.to_string();
            let mut seen_unyield = false;
            for row in rows.iter().filter(|r| r.evidence_value == label) {
                if row.optimal_action == AvAction::Unyield.token() {
                    seen_unyield = true;
                } else {
                    assert!(
                        !seen_unyield,
                        "yield reappeared at cost {} for w_prev={label}",
                        row.cost
                    );
                }
            }
        }

        // Huge cost forces unyielding everywhere.
        let rows = cost_sensitivity_sweep(&cim, &[10.0], None, &Evidence::none()).unwrap();
        assert_eq!(rows[0].optimal_action, AvAction::Unyield.token());

        // Zero cost reduces to the pure well-being trade-off.
        let rows = cost_sensitivity_sweep(&cim, &[0.0], None, &Evidence::none()).unwrap();
        let direct = optimal_policy(&cim, &Evidence::none()).unwrap();
        assert_eq!(rows[0].optimal_action, direct.action.token());
        assert!((rows[0].eu_yield - direct.eu_yield).abs() < 1e-12);

        assert!(matches!(
            cost_sensitivity_sweep(&cim, &[-0.1], None, &Evidence::none()),
            Err(Error::Usage(_))
        ));
        let not_tradeoff = InfluenceDiagram::new(reference_model(6).unwrap(), UtilitySpec::UserTrust);
        assert!(matches!(
            cost_sensitivity_sweep(&not_tradeoff, &[0.1], None, &Evidence::none()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn degenerate_evidence_is_reported() {
        let base = identity_model(4).unwrap();
        let table = base.var_table();
        let mut priors = base.priors().clone();
        priors.insert(
            names::W.to_string(),
            Factor::indicator(table.var(names::W).unwrap(), 0).unwrap(),
        );
        let model = DbnModel::new(
            "identity",
            4,
            priors,
            base.regime(Contributor::R).clone(),
            base.regime(Contributor::O).clone(),
        )
        .unwrap();
        let cim = InfluenceDiagram::new(model, UtilitySpec::UserWellbeing);
        let ev = Evidence {
            w_prev: Some(Bin::new(3, 4).unwrap()),
            ..Evidence::none()
        };
        assert!(matches!(
            expected_utility(&cim, AvAction::Yield, &ev),
            Err(Error::DegenerateEvidence(_))
        ));
    }

}
