//! Event-log schema, questionnaire scoring, CSV ingestion, and a seeded
//! synthetic-data generator.
//!
//! The canonical log is a CSV with the exact header
//! `participant_id,ride,event,contributor,a_R,a_O,alignment,intention,q1..q8`.
//! Categorical cells use the literal tokens `R_PLUS`/`R_MINUS`,
//! `O_PLUS`/`O_MINUS`, `AL0`/`AL1`, `I_PLUS`/`I_MINUS`; an empty cell means
//! unobserved. Questionnaire items are 7-point Likert responses already
//! oriented so that higher is more positive (the semantic-differential
//! items q3–q5 must be flipped upstream if recorded the other way around).

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bins::{Bin, BinConfig};
use crate::dbn::{DbnModel, EventInput, StateEvidence};
use crate::error::{Error, Result};
use crate::structure::{names, topological_child_order};
use crate::vars::{alignment_of, Alignment, AvAction, Contributor, Intention, OtherAction};

/// Exact column order of the event-log CSV.
pub const CSV_HEADER: [&str; 16] = [
    "participant_id",
    "ride",
    "event",
    "contributor",
    "a_R",
    "a_O",
    "alignment",
    "intention",
    "q1",
    "q2",
    "q3",
    "q4",
    "q5",
    "q6",
    "q7",
    "q8",
];

/// Map a 7-point Likert response onto [0, 1].
pub fn likert_to_unit(v: u8) -> Result<f64> {
    if !(1..=7).contains(&v) {
        return Err(Error::domain(format!(
            "Likert response must be in 1..=7, got {v}"
        )));
    }
    Ok(f64::from(v - 1) / 6.0)
}

/// The eight questionnaire items answered after every event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub items: [u8; 8],
}

impl QuestionnaireResponse {
    pub fn new(items: [u8; 8]) -> Result<Self> {
        for (i, v) in items.iter().enumerate() {
            if !(1..=7).contains(v) {
                return Err(Error::domain(format!(
                    "q{} must be in 1..=7, got {v}",
                    i + 1
                )));
            }
        }
        Ok(QuestionnaireResponse { items })
    }
}

/// Well-being score: the mean of q1–q7 mapped onto [0, 1].
pub fn score_wellbeing(r: &QuestionnaireResponse) -> f64 {
    let sum: f64 = r.items[..7]
        .iter()
        .map(|v| likert_to_unit(*v).expect("validated response"))
        .sum();
    sum / 7.0
}

/// Trust score: q8 mapped onto [0, 1].
pub fn score_trust(r: &QuestionnaireResponse) -> f64 {
    likert_to_unit(r.items[7]).expect("validated response")
}

/// One logged interaction event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub participant_id: String,
    pub ride_index: u32,
    pub event_index: u32,
    pub contributor: Contributor,
    pub a_r: Option<AvAction>,
    pub a_o: Option<OtherAction>,
    pub alignment: Option<Alignment>,
    pub intention: Option<Intention>,
    pub responses: QuestionnaireResponse,
}

impl EventRecord {
    /// Regime/field consistency issues, if any.
    fn consistency_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        match self.contributor {
            Contributor::R => {
                if self.a_r.is_none() {
                    issues.push("R-contributor event requires a_R".to_string());
                }
                if self.a_o.is_some() {
                    issues.push(
                        "R-contributor event cannot carry a_O (the filter derives the \
                         other's recent action from the preceding event)"
                            .to_string(),
                    );
                }
                if self.intention.is_none() {
                    issues.push("R-contributor event requires intention".to_string());
                }
            }
            Contributor::O => {
                if self.a_o.is_none() {
                    issues.push("O-contributor event requires a_O".to_string());
                }
                if self.a_r.is_some() {
                    issues.push("O-contributor event cannot carry a_R".to_string());
                }
                if self.alignment.is_some() {
                    issues.push("alignment is only defined for R-contributor events".to_string());
                }
            }
        }
        issues
    }

    pub fn wellbeing_bin(&self, bins: BinConfig) -> Bin {
        bins.discretize(score_wellbeing(&self.responses))
            .expect("score in [0, 1]")
    }

    pub fn trust_bin(&self, bins: BinConfig) -> Bin {
        bins.discretize(score_trust(&self.responses))
            .expect("score in [0, 1]")
    }
}

/// All events of one participant, ordered by (ride, event).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub participant_id: String,
    pub records: Vec<EventRecord>,
}

/// A validated event log grouped into per-participant sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub sequences: Vec<Sequence>,
    pub bins: BinConfig,
}

/// Which observed latents to expose as filtering evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    pub wellbeing: bool,
    pub trust: bool,
    pub intention: bool,
}

impl TargetSet {
    pub fn all() -> Self {
        TargetSet {
            wellbeing: true,
            trust: true,
            intention: true,
        }
    }

    pub fn none() -> Self {
        TargetSet {
            wellbeing: false,
            trust: false,
            intention: false,
        }
    }

    pub fn without(mut self, target: Target) -> Self {
        match target {
            Target::Wellbeing => self.wellbeing = false,
            Target::Trust => self.trust = false,
            Target::Intention => self.intention = false,
        }
        self
    }
}

/// A latent whose inference accuracy can be scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Wellbeing,
    Trust,
    Intention,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Wellbeing, Target::Trust, Target::Intention];

    pub fn label(self) -> &'static str {
        match self {
            Target::Wellbeing => "wellbeing",
            Target::Trust => "trust",
            Target::Intention => "intention",
        }
    }
}

impl Dataset {
    pub fn new(sequences: Vec<Sequence>, bins: BinConfig) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::Validation(vec![
                "dataset must contain at least one sequence".to_string(),
            ]));
        }
        let mut issues = Vec::new();
        for seq in &sequences {
            if seq.records.is_empty() {
                issues.push(format!("participant {}: empty sequence", seq.participant_id));
            }
            for r in &seq.records {
                if r.participant_id != seq.participant_id {
                    issues.push(format!(
                        "participant {}: record belongs to {}",
                        seq.participant_id, r.participant_id
                    ));
                }
                for issue in r.consistency_issues() {
                    issues.push(format!(
                        "participant {} ride {} event {}: {issue}",
                        r.participant_id, r.ride_index, r.event_index
                    ));
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        Ok(Dataset { sequences, bins })
    }

    pub fn n_records(&self) -> usize {
        self.sequences.iter().map(|s| s.records.len()).sum()
    }

    /// Convert each sequence into filter inputs, exposing only the
    /// requested latent observations as evidence. R events receive the
    /// other road user's most recent action from the preceding events.
    pub fn to_event_inputs(&self, targets: TargetSet) -> Vec<Vec<EventInput>> {
        self.sequences
            .iter()
            .map(|seq| sequence_event_inputs(&seq.records, self.bins, targets))
            .collect()
    }
}

/// Filter inputs for one record sequence; see [`Dataset::to_event_inputs`].
pub fn sequence_event_inputs(
    records: &[EventRecord],
    bins: BinConfig,
    targets: TargetSet,
) -> Vec<EventInput> {
    let mut last_a_o: Option<OtherAction> = None;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let a_o = match r.contributor {
            Contributor::R => last_a_o,
            Contributor::O => r.a_o,
        };
        let observed = StateEvidence {
            wellbeing: targets.wellbeing.then(|| r.wellbeing_bin(bins)),
            trust: targets.trust.then(|| r.trust_bin(bins)),
            intention: if targets.intention { r.intention } else { None },
        };
        out.push(EventInput {
            contributor: r.contributor,
            a_r: r.a_r,
            a_o,
            alignment: r.alignment,
            observed,
        });
        if r.contributor == Contributor::O {
            last_a_o = r.a_o;
        }
    }
    out
}

fn parse_optional<T>(
    cell: &str,
    parse: impl Fn(&str) -> Result<T>,
    issues: &mut Vec<String>,
    line: usize,
    column: &str,
) -> Option<T> {
    if cell.is_empty() {
        return None;
    }
    match parse(cell) {
        Ok(v) => Some(v),
        Err(e) => {
            issues.push(format!("line {line}, column {column}: {e}"));
            None
        }
    }
}

/// Parse and validate an event-log CSV. Every validation failure is
/// collected with its line number and reported in a single pass.
pub fn parse_event_log<R: Read>(reader: R, bins: BinConfig) -> Result<Dataset> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = csv_reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Validation(vec![format!(
            "header mismatch: expected {:?}, got {:?}",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )]));
    }

    let mut issues: Vec<String> = Vec::new();
    let mut rows: Vec<EventRecord> = Vec::new();
    let mut keys: BTreeSet<(String, u32, u32)> = BTreeSet::new();

    for (i, row) in csv_reader.records().enumerate() {
        let line = i + 2; // line 1 is the header
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(format!("line {line}: {e}"));
                continue;
            }
        };
        if row.len() != CSV_HEADER.len() {
            issues.push(format!(
                "line {line}: expected {} fields, got {}",
                CSV_HEADER.len(),
                row.len()
            ));
            continue;
        }
        let cell = |idx: usize| row.get(idx).unwrap_or("").trim().to_string();

        let participant_id = cell(0);
        if participant_id.is_empty() {
            issues.push(format!("line {line}, column participant_id: empty"));
        }
        let ride_index = match cell(1).parse::<u32>() {
            Ok(v) => v,
            Err(_) => {
                issues.push(format!("line {line}, column ride: {:?} is not an integer", cell(1)));
                0
            }
        };
        let event_index = match cell(2).parse::<u32>() {
            Ok(v) => v,
            Err(_) => {
                issues.push(format!(
                    "line {line}, column event: {:?} is not an integer",
                    cell(2)
                ));
                0
            }
        };
        let contributor = match Contributor::parse_token(&cell(3)) {
            Ok(c) => c,
            Err(e) => {
                issues.push(format!("line {line}, column contributor: {e}"));
                continue;
            }
        };
        let a_r = parse_optional(&cell(4), AvAction::parse_token, &mut issues, line, "a_R");
        let a_o = parse_optional(&cell(5), OtherAction::parse_token, &mut issues, line, "a_O");
        let alignment = parse_optional(
            &cell(6),
            Alignment::parse_token,
            &mut issues,
            line,
            "alignment",
        );
        let intention = parse_optional(
            &cell(7),
            Intention::parse_token,
            &mut issues,
            line,
            "intention",
        );

        let mut items = [0u8; 8];
        let mut items_ok = true;
        for (q, item) in items.iter_mut().enumerate() {
            let raw = cell(8 + q);
            match raw.parse::<u8>() {
                Ok(v) if (1..=7).contains(&v) => *item = v,
                _ => {
                    issues.push(format!(
                        "line {line}, column q{}: {:?} is not a Likert response in 1..=7",
                        q + 1,
                        raw
                    ));
                    items_ok = false;
                }
            }
        }
        if !items_ok {
            continue;
        }

        let record = EventRecord {
            participant_id: participant_id.clone(),
            ride_index,
            event_index,
            contributor,
            a_r,
            a_o,
            alignment,
            intention,
            responses: QuestionnaireResponse { items },
        };
        for issue in record.consistency_issues() {
            issues.push(format!("line {line}: {issue}"));
        }
        if !keys.insert((participant_id, ride_index, event_index)) {
            issues.push(format!(
                "line {line}: duplicate (participant, ride, event) key"
            ));
        }
        rows.push(record);
    }

    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }

    // Group by participant in order of first appearance; order each
    // sequence by (ride, event).
    let mut order: Vec<String> = Vec::new();
    for r in &rows {
        if !order.contains(&r.participant_id) {
            order.push(r.participant_id.clone());
        }
    }
    let sequences: Vec<Sequence> = order
        .into_iter()
        .map(|pid| {
            let mut records: Vec<EventRecord> = rows
                .iter()
                .filter(|r| r.participant_id == pid)
                .cloned()
                .collect();
            records.sort_by_key(|r| (r.ride_index, r.event_index));
            Sequence {
                participant_id: pid,
                records,
            }
        })
        .collect();

    if sequences.is_empty() {
        // An empty body with a valid header is a valid, empty dataset.
        return Ok(Dataset {
            sequences: Vec::new(),
            bins,
        });
    }
    Dataset::new(sequences, bins)
}

/// Parse an event-log CSV from a file path.
pub fn parse_event_log_path(path: impl AsRef<Path>, bins: BinConfig) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_event_log(file, bins)
}

/// Write a dataset back to the canonical CSV schema.
pub fn write_event_log<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for seq in &dataset.sequences {
        for r in &seq.records {
            let mut row: Vec<String> = vec![
                r.participant_id.clone(),
                r.ride_index.to_string(),
                r.event_index.to_string(),
                r.contributor.token().to_string(),
                r.a_r.map(|a| a.token().to_string()).unwrap_or_default(),
                r.a_o.map(|a| a.token().to_string()).unwrap_or_default(),
                r.alignment.map(|a| a.token().to_string()).unwrap_or_default(),
                r.intention.map(|a| a.token().to_string()).unwrap_or_default(),
            ];
            row.extend(r.responses.items.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_event_log_path(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_event_log(dataset, file)
}

/// Configuration for the synthetic-data generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_participants: usize,
    pub events_per_participant: usize,
    pub seed: u64,
    /// Record the sampled intention on every event instead of only on
    /// R-contributor events. The study protocol elicits intention only
    /// when the AV contributes; turning this on makes intention
    /// transitions directly countable for parameter recovery.
    #[serde(default)]
    pub intention_everywhere: bool,
    /// Fix the contributors' actions instead of sampling them uniformly.
    #[serde(default)]
    pub fixed_actions: Option<(OtherAction, AvAction)>,
}

/// Sample a dataset from a model: contributors alternate O-then-R, actions
/// are uniform (or fixed), latents follow the regime CPDs, and
/// questionnaire responses are synthesized to land in the sampled bins.
/// Bit-reproducible for a fixed seed.
pub fn generate_synthetic(model: &DbnModel, config: &SynthConfig) -> Result<Dataset> {
    if config.n_participants < 1 || config.events_per_participant < 1 {
        return Err(Error::usage(
            "generator needs at least one participant and one event".to_string(),
        ));
    }
    let n_bins = model.n_bins();
    let bins = BinConfig::new(n_bins)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sequences = Vec::with_capacity(config.n_participants);

    for p in 0..config.n_participants {
        let participant_id = format!("P{:04}", p + 1);
        let mut latents = sample_prior(model, &mut rng);
        let mut last_a_o: Option<OtherAction> = None;
        let mut records = Vec::with_capacity(config.events_per_participant);

        for k in 0..config.events_per_participant {
            let contributor = if k % 2 == 0 {
                Contributor::O
            } else {
                Contributor::R
            };
            let (a_r, a_o_current) = match contributor {
                Contributor::O => {
                    let a = match config.fixed_actions {
                        Some((o, _)) => o,
                        None => OtherAction::VALUES[rng.random_range(0..2)],
                    };
                    (None, Some(a))
                }
                Contributor::R => {
                    let a = match config.fixed_actions {
                        Some((_, r)) => r,
                        None => AvAction::VALUES[rng.random_range(0..2)],
                    };
                    (Some(a), None)
                }
            };
            let regime_a_o = match contributor {
                Contributor::O => a_o_current,
                Contributor::R => last_a_o,
            };
            let (next, alignment) = sample_slice(
                model,
                contributor,
                &latents,
                a_r,
                regime_a_o,
                &mut rng,
            )?;

            let intention = if contributor == Contributor::R || config.intention_everywhere {
                Some(Intention::from_index(next.i)?)
            } else {
                None
            };
            records.push(EventRecord {
                participant_id: participant_id.clone(),
                ride_index: (k / 2) as u32 + 1,
                event_index: (k % 2) as u32 + 1,
                contributor,
                a_r,
                a_o: a_o_current,
                alignment,
                intention,
                responses: responses_for_bins(next.w, next.t, n_bins)?,
            });
            if let Some(a) = a_o_current {
                last_a_o = Some(a);
            }
            latents = next;
        }
        sequences.push(Sequence {
            participant_id,
            records,
        });
    }
    Dataset::new(sequences, bins)
}

/// Convenience wrapper around [`generate_synthetic`] with the study-style
/// defaults: intention recorded only on AV-contributor events, actions
/// sampled uniformly.
pub fn generate_synthetic_simple(
    model: &DbnModel,
    n_participants: usize,
    events_per_participant: usize,
    seed: u64,
) -> Result<Dataset> {
    generate_synthetic(
        model,
        &SynthConfig {
            n_participants,
            events_per_participant,
            seed,
            intention_everywhere: false,
            fixed_actions: None,
        },
    )
}

#[derive(Debug, Clone, Copy)]
struct LatentSample {
    w: usize,
    t: usize,
    i: usize,
    w_o: usize,
}

fn sample_prior(model: &DbnModel, rng: &mut impl Rng) -> LatentSample {
    let draw = |name: &str, rng: &mut dyn rand::RngCore| -> usize {
        sample_index(model.priors()[name].values(), rng)
    };
    LatentSample {
        w: draw(names::W, rng),
        t: draw(names::T, rng),
        i: draw(names::I, rng),
        w_o: draw(names::W_O, rng),
    }
}

/// Sample the next slice by ancestral sampling in intra-slice topological
/// order. Alignment is derived from the sampled intention and the AV
/// action as soon as the intention is available.
fn sample_slice(
    model: &DbnModel,
    contributor: Contributor,
    prev: &LatentSample,
    a_r: Option<AvAction>,
    a_o: Option<OtherAction>,
    rng: &mut impl Rng,
) -> Result<(LatentSample, Option<Alignment>)> {
    let regime = model.regime(contributor);
    let specs: Vec<_> = regime
        .cpds()
        .iter()
        .map(|c| crate::structure::CpdSpec {
            child: c.child().name.clone(),
            parents: c.parents().iter().map(|p| p.name.clone()).collect(),
        })
        .collect();
    // Alignment derives from the sampled intention, so a CPD conditioning
    // on alignment implicitly depends on intention. Encode that for the
    // ordering pass.
    let mut order_specs = specs.clone();
    for spec in &mut order_specs {
        if spec.parents.iter().any(|p| p == names::AL)
            && !spec.parents.iter().any(|p| p == names::I)
        {
            spec.parents.push(names::I.to_string());
        }
    }
    let order = topological_child_order(&order_specs)?;

    let mut alignment: Option<Alignment> = None;
    let mut current = LatentSample {
        w: 0,
        t: 0,
        i: 0,
        w_o: 0,
    };
    let mut sampled = [false; 4]; // w, t, i, w_o

    for k in order {
        let cpd = &regime.cpds()[k];
        let mut parent_values = Vec::with_capacity(cpd.parents().len());
        for parent in cpd.parents() {
            let v = match parent.name.as_str() {
                names::W_PREV => prev.w,
                names::T_PREV => prev.t,
                names::I_PREV => prev.i,
                names::W_O_PREV => prev.w_o,
                names::W => current.w,
                names::T => current.t,
                names::I => current.i,
                names::A_R => match a_r {
                    Some(a) => a.index(),
                    None => rng.random_range(0..2),
                },
                names::A_O => match a_o {
                    Some(a) => a.index(),
                    None => rng.random_range(0..2),
                },
                names::AL => match alignment {
                    Some(a) => a.index(),
                    None => {
                        return Err(Error::model(
                            "CPD conditions on alignment before intention is sampled"
                                .to_string(),
                        ))
                    }
                },
                other => {
                    return Err(Error::model(format!(
                        "unsupported parent {other:?} during sampling"
                    )))
                }
            };
            parent_values.push(v);
        }
        let card = cpd.child().cardinality;
        let dist: Vec<f64> = (0..card).map(|c| cpd.prob(c, &parent_values)).collect();
        let value = sample_index(&dist, rng);
        match cpd.child().name.as_str() {
            names::W => {
                current.w = value;
                sampled[0] = true;
            }
            names::T => {
                current.t = value;
                sampled[1] = true;
            }
            names::I => {
                current.i = value;
                sampled[2] = true;
                if let (Contributor::R, Some(a)) = (contributor, a_r) {
                    alignment = Some(alignment_of(
                        Intention::from_index(value)?,
                        a,
                    ));
                }
            }
            names::W_O => {
                current.w_o = value;
                sampled[3] = true;
            }
            _ => unreachable!("validated latent children"),
        }
    }
    debug_assert!(sampled.iter().all(|s| *s));
    Ok((current, alignment))
}

/// Inverse-CDF draw with a single uniform; iteration order is fixed, so
/// results are identical across platforms.
fn sample_index(dist: &[f64], rng: &mut (impl Rng + ?Sized)) -> usize {
    let u: f64 = rng.random::<f64>() * dist.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    dist.len() - 1
}

/// Deterministically synthesize questionnaire responses whose scores
/// discretize into the given bins.
fn responses_for_bins(w_bin: usize, t_bin: usize, n_bins: usize) -> Result<QuestionnaireResponse> {
    // Well-being: the q1..q7 mean in Likert units is s/42 for an item sum
    // offset s in 0..=42. The smallest s at or above the bin's lower edge
    // lands inside the bin for every n_bins <= 42.
    let s = (42 * w_bin).div_ceil(n_bins);
    let mut items = [1u8; 8];
    let base = (s / 7) as u8;
    let extra = s % 7;
    for (q, item) in items[..7].iter_mut().enumerate() {
        *item = 1 + base + u8::from(q < extra);
    }
    // Trust: a single item; search for a response landing in the bin.
    let q8 = (1..=7u8).find(|v| {
        let unit = f64::from(v - 1) / 6.0;
        ((unit * n_bins as f64).floor() as usize).min(n_bins - 1) == t_bin
    });
    match q8 {
        Some(v) => {
            items[7] = v;
            QuestionnaireResponse::new(items)
        }
        None => Err(Error::domain(format!(
            "trust bin {t_bin}/{n_bins} unreachable from a 7-point item; \
             use a bin count the Likert scale can express"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bins::discretize;
    use crate::models::{identity_model, reference_model};
    use crate::factor::Factor;

    #[test]
    fn likert_mapping() {
        assert_eq!(likert_to_unit(1).unwrap(), 0.0);
        assert_eq!(likert_to_unit(7).unwrap(), 1.0);
        assert_eq!(likert_to_unit(4).unwrap(), 0.5);
        assert!(likert_to_unit(0).is_err());
        assert!(likert_to_unit(8).is_err());
    }

    #[test]
    fn scoring() {
        let all7 = QuestionnaireResponse::new([7; 8]).unwrap();
        assert_eq!(score_wellbeing(&all7), 1.0);
        assert_eq!(score_trust(&all7), 1.0);

        let all1 = QuestionnaireResponse::new([1; 8]).unwrap();
        assert_eq!(score_wellbeing(&all1), 0.0);
        assert_eq!(score_trust(&all1), 0.0);

        let mixed = QuestionnaireResponse::new([7, 7, 7, 1, 1, 1, 4, 5]).unwrap();
        assert!((score_wellbeing(&mixed) - 0.5).abs() < 1e-12);
        assert!((score_trust(&mixed) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn wellbeing_score_permutation_invariant() {
        let a = QuestionnaireResponse::new([2, 5, 7, 1, 3, 6, 4, 2]).unwrap();
        let b = QuestionnaireResponse::new([4, 6, 3, 1, 7, 5, 2, 2]).unwrap();
        assert!((score_wellbeing(&a) - score_wellbeing(&b)).abs() < 1e-12);
    }

    fn sample_csv() -> String {
        let mut s = String::from(
            "participant_id,ride,event,contributor,a_R,a_O,alignment,intention,q1,q2,q3,q4,q5,q6,q7,q8\n",
        );
        s.push_str("P1,1,1,O,,O_PLUS,,,5,5,5,5,5,5,5,6\n");
        s.push_str("P1,1,2,R,R_PLUS,,AL1,I_PLUS,6,6,6,6,6,6,6,7\n");
        s
    }

    #[test]
    fn parse_valid_log() {
        let ds = parse_event_log(sample_csv().as_bytes(), BinConfig::default()).unwrap();
        assert_eq!(ds.sequences.len(), 1);
        assert_eq!(ds.sequences[0].records.len(), 2);
        let r = &ds.sequences[0].records[1];
        assert_eq!(r.contributor, Contributor::R);
        assert_eq!(r.a_r, Some(AvAction::Yield));
        assert_eq!(r.intention, Some(Intention::Yield));
    }

    #[test]
    fn parse_empty_body() {
        let csv = "participant_id,ride,event,contributor,a_R,a_O,alignment,intention,q1,q2,q3,q4,q5,q6,q7,q8\n";
        let ds = parse_event_log(csv.as_bytes(), BinConfig::default()).unwrap();
        assert!(ds.sequences.is_empty());
        assert_eq!(ds.n_records(), 0);
    }

    #[test]
    fn parse_reports_row_and_column() {
        let mut csv = sample_csv();
        csv.push_str("P1,2,1,O,,O_MINUS,,,5,9,5,5,5,5,5,6\n");
        let err = parse_event_log(csv.as_bytes(), BinConfig::default()).unwrap_err();
        match err {
            Error::Validation(issues) => {
                assert_eq!(issues.len(), 1);
                assert!(issues[0].contains("line 4"));
                assert!(issues[0].contains("q2"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_collects_multiple_issues() {
        let mut csv = sample_csv();
        csv.push_str("P1,1,2,R,R_PLUS,,AL1,I_PLUS,6,6,6,6,6,6,6,7\n"); // duplicate key
        csv.push_str("P2,1,1,O,R_PLUS,O_PLUS,,,5,5,5,5,5,5,5,6\n"); // a_R on O event
        let err = parse_event_log(csv.as_bytes(), BinConfig::default()).unwrap_err();
        match err {
            Error::Validation(issues) => assert_eq!(issues.len(), 2),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_rejected() {
        let csv = "pid,ride,event\nP1,1,1\n";
        assert!(matches!(
            parse_event_log(csv.as_bytes(), BinConfig::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn csv_round_trip_identity() {
        let model = reference_model(6).unwrap();
        let ds = generate_synthetic_simple(&model, 7, 4, 99).unwrap();
        let mut buf = Vec::new();
        write_event_log(&ds, &mut buf).unwrap();
        let parsed = parse_event_log(buf.as_slice(), ds.bins).unwrap();
        assert_eq!(parsed, ds);
    }

    #[test]
    fn generator_is_deterministic() {
        let model = reference_model(6).unwrap();
        let a = generate_synthetic_simple(&model, 5, 4, 1234).unwrap();
        let b = generate_synthetic_simple(&model, 5, 4, 1234).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_simple(&model, 5, 4, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn point_mass_model_yields_identical_payloads() {
        // Identity transitions with point-mass priors and fixed actions:
        // every record carries the same payload.
        let mut model = identity_model(6).unwrap();
        let table = model.var_table();
        let mut priors = std::collections::BTreeMap::new();
        for (name, value) in [
            (names::W, 3usize),
            (names::T, 2),
            (names::I, 0),
            (names::W_O, 4),
        ] {
            priors.insert(
                name.to_string(),
                Factor::indicator(table.var(name).unwrap(), value).unwrap(),
            );
        }
        model = DbnModel::new(
            "identity",
            6,
            priors,
            model.regime(Contributor::R).clone(),
            model.regime(Contributor::O).clone(),
        )
        .unwrap();

        let ds = generate_synthetic(
            &model,
            &SynthConfig {
                n_participants: 3,
                events_per_participant: 4,
                seed: 5,
                intention_everywhere: false,
                fixed_actions: Some((OtherAction::Yield, AvAction::Yield)),
            },
        )
        .unwrap();
        let mut unique: Vec<_> = Vec::new();
        for s in &ds.sequences {
            for r in &s.records {
                let payload = (r.contributor, r.a_r, r.a_o, r.alignment, r.responses);
                if !unique.contains(&payload) {
                    unique.push(payload);
                }
            }
        }
        // One O-event payload and one R-event payload.
        assert_eq!(unique.len(), 2);
        for s in &ds.sequences {
            for r in &s.records {
                assert_eq!(r.wellbeing_bin(ds.bins).index, 3);
                assert_eq!(r.trust_bin(ds.bins).index, 2);
            }
        }
    }

    #[test]
    fn synthesized_responses_hit_requested_bins() {
        for n_bins in [2, 3, 4, 6, 7] {
            for w in 0..n_bins {
                for t in 0..n_bins {
                    let r = responses_for_bins(w, t, n_bins).unwrap();
                    let wb = discretize(score_wellbeing(&r), n_bins).unwrap();
                    let tb = discretize(score_trust(&r), n_bins).unwrap();
                    assert_eq!((wb.index, tb.index), (w, t), "n_bins={n_bins}");
                }
            }
        }
    }

    #[test]
    fn generated_data_is_schema_consistent() {
        let model = reference_model(6).unwrap();
        let ds = generate_synthetic_simple(&model, 10, 4, 7).unwrap();
        for seq in &ds.sequences {
            assert_eq!(seq.records.len(), 4);
            for (k, r) in seq.records.iter().enumerate() {
                let expect = if k % 2 == 0 {
                    Contributor::O
                } else {
                    Contributor::R
                };
                assert_eq!(r.contributor, expect);
                assert!(r.consistency_issues().is_empty());
            }
        }
    }
}
