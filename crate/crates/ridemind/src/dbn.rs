//! The two-regime interaction network: exact Bayesian filtering,
//! prediction, and forward simulation.
//!
//! Each interaction event advances the belief one slice. The regime picked
//! by the event's contributor supplies the transition CPDs; event inputs
//! (actions, alignment) instantiate the matching CPD parents, observed
//! latents enter as likelihood indicators, and the previous slice is summed
//! out exactly. Unobserved inputs are averaged over uniformly rather than
//! imputed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bins::Bin;
use crate::cpd::CpdTable;
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::structure::{
    names, CpdSpec, RegimeKind, StructureCandidate, VarTable, ALL_LATENTS, USER_LATENTS,
};
use crate::vars::{Alignment, AvAction, Contributor, Intention, OtherAction};

/// Latent-state observations attached to one event.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateEvidence {
    pub wellbeing: Option<Bin>,
    pub trust: Option<Bin>,
    pub intention: Option<Intention>,
}

impl StateEvidence {
    pub fn none() -> Self {
        StateEvidence::default()
    }

    pub fn is_empty(&self) -> bool {
        self.wellbeing.is_none() && self.trust.is_none() && self.intention.is_none()
    }
}

/// One interaction event as seen by the filter.
///
/// For R-contributor events `a_o` carries the other road user's most
/// recent action (the `a_o` input of the R regime); for O-contributor
/// events it is the current action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventInput {
    pub contributor: Contributor,
    pub a_r: Option<AvAction>,
    pub a_o: Option<OtherAction>,
    pub alignment: Option<Alignment>,
    #[serde(default)]
    pub observed: StateEvidence,
}

impl EventInput {
    /// An AV-contributor event.
    pub fn r_event(a_r: AvAction, alignment: Option<Alignment>) -> Self {
        EventInput {
            contributor: Contributor::R,
            a_r: Some(a_r),
            a_o: None,
            alignment,
            observed: StateEvidence::none(),
        }
    }

    /// An other-contributor event.
    pub fn o_event(a_o: OtherAction) -> Self {
        EventInput {
            contributor: Contributor::O,
            a_r: None,
            a_o: Some(a_o),
            alignment: None,
            observed: StateEvidence::none(),
        }
    }

    pub fn with_recent_other_action(mut self, a_o: OtherAction) -> Self {
        self.a_o = Some(a_o);
        self
    }

    pub fn with_observed(mut self, observed: StateEvidence) -> Self {
        self.observed = observed;
        self
    }

    /// Copy of this event with all latent observations removed.
    pub fn without_observations(&self) -> Self {
        let mut e = self.clone();
        e.observed = StateEvidence::none();
        e
    }
}

/// The transition CPDs of one contributor regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRegime {
    pub kind: RegimeKind,
    cpds: Vec<CpdTable>,
}

impl TransitionRegime {
    pub fn new(kind: RegimeKind, cpds: Vec<CpdTable>) -> Result<Self> {
        for (i, cpd) in cpds.iter().enumerate() {
            if cpds[..i].iter().any(|c| c.child().name == cpd.child().name) {
                return Err(Error::model(format!(
                    "{kind:?}: duplicate CPD for {:?}",
                    cpd.child().name
                )));
            }
        }
        Ok(TransitionRegime { kind, cpds })
    }

    pub fn cpds(&self) -> &[CpdTable] {
        &self.cpds
    }

    pub fn cpd_for(&self, child: &str) -> Option<&CpdTable> {
        self.cpds.iter().find(|c| c.child().name == child)
    }

    fn specs(&self) -> Vec<CpdSpec> {
        self.cpds
            .iter()
            .map(|c| CpdSpec {
                child: c.child().name.clone(),
                parents: c.parents().iter().map(|p| p.name.clone()).collect(),
            })
            .collect()
    }
}

/// A full interaction model: both regimes, per-latent initial priors, and
/// the bin resolution of the latent scales.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnModel {
    structure_id: String,
    n_bins: usize,
    priors: BTreeMap<String, Factor>,
    r_regime: TransitionRegime,
    o_regime: TransitionRegime,
}

impl DbnModel {
    pub fn new(
        structure_id: impl Into<String>,
        n_bins: usize,
        priors: BTreeMap<String, Factor>,
        r_regime: TransitionRegime,
        o_regime: TransitionRegime,
    ) -> Result<Self> {
        let structure_id = structure_id.into();
        let candidate = StructureCandidate {
            structure_id: structure_id.clone(),
            r_contributor: r_regime.specs(),
            o_contributor: o_regime.specs(),
        };
        let table = candidate.validate(n_bins)?;

        for regime in [&r_regime, &o_regime] {
            for cpd in regime.cpds() {
                for v in cpd.table().scope() {
                    let expected = table.cardinality_of(&v.name).expect("validated name");
                    if v.cardinality != expected {
                        return Err(Error::model(format!(
                            "variable {:?} has cardinality {} but the model uses {}",
                            v.name, v.cardinality, expected
                        )));
                    }
                }
            }
        }

        let prior_names: Vec<&str> = priors.keys().map(|k| k.as_str()).collect();
        let mut expected: Vec<&str> = ALL_LATENTS.to_vec();
        expected.sort_unstable();
        if prior_names != expected {
            return Err(Error::model(format!(
                "priors must cover exactly {ALL_LATENTS:?}, got {prior_names:?}"
            )));
        }
        for (name, f) in &priors {
            let var = table.var(name)?;
            if f.scope() != [var.clone()] {
                return Err(Error::model(format!(
                    "prior for {name:?} must be a single-variable factor over {var}"
                )));
            }
            if !f.is_normalized() {
                return Err(Error::model(format!("prior for {name:?} is not normalized")));
            }
        }

        Ok(DbnModel {
            structure_id,
            n_bins,
            priors,
            r_regime,
            o_regime,
        })
    }

    /// Model with uniform CPDs and uniform priors over the given structure.
    pub fn uniform(structure: &StructureCandidate, n_bins: usize) -> Result<Self> {
        let table = structure.validate(n_bins)?;
        let build = |specs: &[CpdSpec]| -> Result<Vec<CpdTable>> {
            specs
                .iter()
                .map(|s| {
                    let child = table.var(&s.child)?;
                    let parents = s
                        .parents
                        .iter()
                        .map(|p| table.var(p))
                        .collect::<Result<Vec<_>>>()?;
                    CpdTable::uniform(child, parents)
                })
                .collect()
        };
        let r_regime = TransitionRegime::new(RegimeKind::RContributor, build(&structure.r_contributor)?)?;
        let o_regime = TransitionRegime::new(RegimeKind::OContributor, build(&structure.o_contributor)?)?;
        DbnModel::new(
            structure.structure_id.clone(),
            n_bins,
            uniform_priors(&table)?,
            r_regime,
            o_regime,
        )
    }

    pub fn structure_id(&self) -> &str {
        &self.structure_id
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn var_table(&self) -> VarTable {
        VarTable {
            n_bins: self.n_bins,
        }
    }

    pub fn priors(&self) -> &BTreeMap<String, Factor> {
        &self.priors
    }

    pub fn regime(&self, contributor: Contributor) -> &TransitionRegime {
        match contributor {
            Contributor::R => &self.r_regime,
            Contributor::O => &self.o_regime,
        }
    }

    pub fn regime_by_kind(&self, kind: RegimeKind) -> &TransitionRegime {
        match kind {
            RegimeKind::RContributor => &self.r_regime,
            RegimeKind::OContributor => &self.o_regime,
        }
    }

    /// The edge set this model instantiates.
    pub fn structure(&self) -> StructureCandidate {
        StructureCandidate {
            structure_id: self.structure_id.clone(),
            r_contributor: self.r_regime.specs(),
            o_contributor: self.o_regime.specs(),
        }
    }

    /// Reject events whose fields contradict their regime.
    fn validate_event(&self, event: &EventInput) -> Result<()> {
        match event.contributor {
            Contributor::R => {
                if event.a_r.is_none() {
                    return Err(Error::usage(
                        "R-contributor event must carry the AV action a_R".to_string(),
                    ));
                }
            }
            Contributor::O => {
                if event.a_o.is_none() {
                    return Err(Error::usage(
                        "O-contributor event must carry the other action a_O".to_string(),
                    ));
                }
                if event.a_r.is_some() {
                    return Err(Error::usage(
                        "O-contributor event cannot carry an AV action".to_string(),
                    ));
                }
                if event.alignment.is_some() {
                    return Err(Error::usage(
                        "alignment is only defined for R-contributor events".to_string(),
                    ));
                }
            }
        }
        for bin in [event.observed.wellbeing, event.observed.trust]
            .into_iter()
            .flatten()
        {
            if bin.n_bins != self.n_bins {
                return Err(Error::usage(format!(
                    "evidence bin uses {} bins but the model uses {}",
                    bin.n_bins, self.n_bins
                )));
            }
        }
        Ok(())
    }

    /// Fix a CPD's event-input parents from the event. Inputs the event
    /// does not carry stay in scope; the caller averages them out once
    /// after the full product, so an input shared by several CPDs is
    /// treated as a single uniform unknown rather than independent copies.
    fn instantiate(&self, cpd: &CpdTable, event: &EventInput) -> Result<Factor> {
        let mut f = cpd.table().clone();
        for parent in cpd.parents() {
            match parent.name.as_str() {
                names::A_R => {
                    if let Some(a) = event.a_r {
                        f = f.reduce(names::A_R, a.index())?;
                    }
                }
                names::A_O => {
                    if let Some(a) = event.a_o {
                        f = f.reduce(names::A_O, a.index())?;
                    }
                }
                names::AL => {
                    if let Some(a) = event.alignment {
                        f = f.reduce(names::AL, a.index())?;
                    }
                }
                _ => {}
            }
        }
        Ok(f)
    }

    fn average_leftover_inputs(f: Factor) -> Result<Factor> {
        let mut f = f;
        for input in [names::A_R, names::A_O, names::AL] {
            if f.has_variable(input) {
                f = f.average_out(input)?;
            }
        }
        Ok(f)
    }

    /// One exact filtering step. Returns the next belief and the log
    /// probability of this event's latent observations given the past.
    fn step(
        &self,
        belief: &BeliefState,
        event: &EventInput,
        use_evidence: bool,
    ) -> Result<(BeliefState, f64)> {
        self.validate_event(event)?;
        let regime = self.regime(event.contributor);
        let table = self.var_table();

        // User chain: joint over {w, t, i}.
        let mut f = belief.user_joint.rename(&[
            (names::W, names::W_PREV),
            (names::T, names::T_PREV),
            (names::I, names::I_PREV),
        ])?;
        for child in USER_LATENTS {
            let cpd = regime
                .cpd_for(child)
                .ok_or_else(|| Error::model(format!("regime lacks a CPD for {child:?}")))?;
            f = f.product(&self.instantiate(cpd, event)?)?;
        }
        f = Self::average_leftover_inputs(f)?;
        if use_evidence {
            if let Some(b) = event.observed.wellbeing {
                f = f.product(&Factor::indicator(table.var(names::W)?, b.index)?)?;
            }
            if let Some(b) = event.observed.trust {
                f = f.product(&Factor::indicator(table.var(names::T)?, b.index)?)?;
            }
            if let Some(i) = event.observed.intention {
                f = f.product(&Factor::indicator(table.var(names::I)?, i.index())?)?;
            }
        }
        for prev in [names::W_PREV, names::T_PREV, names::I_PREV] {
            f = f.marginalize(prev)?;
        }
        let mass = f.total_mass();
        let user_joint = f.normalize().map_err(|_| {
            Error::degenerate(format!(
                "event {} observations have zero probability under the model",
                belief.event_index + 1
            ))
        })?;

        // Other road user's chain: marginal over {w_o}.
        let cpd = regime
            .cpd_for(names::W_O)
            .ok_or_else(|| Error::model("regime lacks a CPD for \"w_o\"".to_string()))?;
        let mut g = belief
            .other_marginal
            .rename(&[(names::W_O, names::W_O_PREV)])?;
        g = g.product(&self.instantiate(cpd, event)?)?;
        g = Self::average_leftover_inputs(g)?;
        g = g.marginalize(names::W_O_PREV)?;
        let other_marginal = g.normalize()?;

        let next = BeliefState {
            user_joint,
            other_marginal,
            event_index: belief.event_index + 1,
        };
        Ok((next, mass.ln()))
    }
}

fn uniform_priors(table: &VarTable) -> Result<BTreeMap<String, Factor>> {
    let mut priors = BTreeMap::new();
    for name in ALL_LATENTS {
        priors.insert(name.to_string(), Factor::uniform(vec![table.var(name)?])?);
    }
    Ok(priors)
}

/// Belief over the user's latent state and the other road user's
/// well-being after some number of events.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    user_joint: Factor,
    other_marginal: Factor,
    event_index: usize,
}

impl BeliefState {
    pub fn new(user_joint: Factor, other_marginal: Factor, event_index: usize) -> Result<Self> {
        let mut user_names: Vec<&str> = user_joint.scope().iter().map(|v| v.name.as_str()).collect();
        user_names.sort_unstable();
        let mut expected: Vec<&str> = USER_LATENTS.to_vec();
        expected.sort_unstable();
        if user_names != expected {
            return Err(Error::usage(format!(
                "user joint must range over {USER_LATENTS:?}, got {user_names:?}"
            )));
        }
        let other_names: Vec<&str> = other_marginal.scope().iter().map(|v| v.name.as_str()).collect();
        if other_names != [names::W_O] {
            return Err(Error::usage(format!(
                "other marginal must range over [\"w_o\"], got {other_names:?}"
            )));
        }
        if !user_joint.is_normalized() || !other_marginal.is_normalized() {
            return Err(Error::usage("belief factors must be normalized".to_string()));
        }
        Ok(BeliefState {
            user_joint,
            other_marginal,
            event_index,
        })
    }

    /// The model's initial belief: independent per-latent priors.
    pub fn initial(model: &DbnModel) -> Result<Self> {
        let p = model.priors();
        let user_joint = p[names::W]
            .product(&p[names::T])?
            .product(&p[names::I])?;
        Ok(BeliefState {
            user_joint,
            other_marginal: p[names::W_O].clone(),
            event_index: 0,
        })
    }

    pub fn user_joint(&self) -> &Factor {
        &self.user_joint
    }

    pub fn other_marginal(&self) -> &Factor {
        &self.other_marginal
    }

    pub fn event_index(&self) -> usize {
        self.event_index
    }

    pub fn marginal(&self, latent: &str) -> Result<Factor> {
        match latent {
            names::W_O => Ok(self.other_marginal.clone()),
            _ => self.user_joint.marginal(&[latent]),
        }
    }

    pub fn expected_wellbeing(&self) -> f64 {
        self.marginal(names::W).unwrap().expected_midpoint().unwrap()
    }

    pub fn expected_trust(&self) -> f64 {
        self.marginal(names::T).unwrap().expected_midpoint().unwrap()
    }

    pub fn prob_intention_yield(&self) -> f64 {
        self.marginal(names::I).unwrap().values()[Intention::Yield.index()]
    }

    pub fn expected_other_wellbeing(&self) -> f64 {
        self.other_marginal.expected_midpoint().unwrap()
    }
}

/// Posterior update: propagate through the event's regime, condition on the
/// event's observed latents, renormalize.
pub fn filter_step(
    belief: &BeliefState,
    event: &EventInput,
    model: &DbnModel,
) -> Result<BeliefState> {
    model.step(belief, event, true).map(|(b, _)| b)
}

/// One-step-ahead prediction: the same propagation as [`filter_step`] with
/// no evidence conditioning.
pub fn predict(belief: &BeliefState, planned: &EventInput, model: &DbnModel) -> Result<BeliefState> {
    model.step(belief, planned, false).map(|(b, _)| b)
}

/// Expected latent readouts after one event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub event_index: usize,
    #[serde(rename = "E_w")]
    pub e_w: f64,
    #[serde(rename = "E_t")]
    pub e_t: f64,
    #[serde(rename = "P_I_plus")]
    pub p_i_plus: f64,
    #[serde(rename = "E_wO")]
    pub e_w_o: f64,
}

impl TrajectoryPoint {
    pub fn of(belief: &BeliefState) -> Self {
        TrajectoryPoint {
            event_index: belief.event_index(),
            e_w: belief.expected_wellbeing(),
            e_t: belief.expected_trust(),
            p_i_plus: belief.prob_intention_yield(),
            e_w_o: belief.expected_other_wellbeing(),
        }
    }
}

/// Filter a scripted event sequence and report the expected states after
/// each event.
pub fn forward_simulate(
    init: &BeliefState,
    script: &[EventInput],
    model: &DbnModel,
) -> Result<Vec<TrajectoryPoint>> {
    if script.is_empty() {
        return Err(Error::usage("simulation script must be non-empty".to_string()));
    }
    let mut belief = init.clone();
    let mut out = Vec::with_capacity(script.len());
    for event in script {
        belief = filter_step(&belief, event, model)?;
        out.push(TrajectoryPoint::of(&belief));
    }
    Ok(out)
}

/// Log-likelihood of event sequences under a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    /// Sum over sequences; negative infinity when any record was flagged.
    pub total: f64,
    pub per_sequence: Vec<f64>,
    /// (sequence index, event index) pairs whose observations had zero
    /// probability.
    pub flagged: Vec<(usize, usize)>,
}

/// Exact log P(observed latents | inputs) summed over independent
/// sequences. A zero-probability observation flags the record, sets the
/// sequence score to negative infinity, and stops that sequence.
pub fn log_likelihood(model: &DbnModel, sequences: &[Vec<EventInput>]) -> Result<LogLikelihood> {
    let mut per_sequence = Vec::with_capacity(sequences.len());
    let mut flagged = Vec::new();
    for (s, events) in sequences.iter().enumerate() {
        let mut belief = BeliefState::initial(model)?;
        let mut ll = 0.0;
        for (k, event) in events.iter().enumerate() {
            match model.step(&belief, event, true) {
                Ok((next, log_mass)) => {
                    belief = next;
                    ll += log_mass;
                }
                Err(Error::DegenerateEvidence(_)) => {
                    flagged.push((s, k));
                    ll = f64::NEG_INFINITY;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        per_sequence.push(ll);
    }
    let total = per_sequence.iter().sum();
    Ok(LogLikelihood {
        total,
        per_sequence,
        flagged,
    })
}
