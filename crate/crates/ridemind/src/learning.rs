//! Parameter estimation, structure statistics, and cross-validated
//! evaluation.
//!
//! CPDs are estimated by transition counting with a symmetric Dirichlet
//! prior: every table entry is `(N + α) / (ΣN + α·k)` where `N` counts
//! observed child/parent-assignment transitions and `k` is the child
//! cardinality. The other road user's well-being is never observed, so its
//! CPDs are estimated from mirrored user transitions: the effect of the
//! AV's action on the other is taken to equal the effect of the other's
//! action on the user, with yield mapped to yield.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cpd::CpdTable;
use crate::data::{
    score_trust, score_wellbeing, sequence_event_inputs, Dataset, EventRecord, Sequence, Target,
    TargetSet,
};
use crate::dbn::{filter_step, log_likelihood, BeliefState, DbnModel, LogLikelihood, TransitionRegime};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::stats::{pearson_r, welch_t_test, CorrelationResult, Tail};
use crate::structure::{names, RegimeKind, StructureCandidate, VarTable, ALL_LATENTS};
use crate::vars::{AvAction, Contributor, Intention, OtherAction};

/// Eq.-7 style smoothing of one count column.
fn dirichlet_column(counts: &[f64], alpha: f64) -> Vec<f64> {
    let k = counts.len() as f64;
    let total: f64 = counts.iter().sum();
    counts
        .iter()
        .map(|n| (n + alpha) / (total + alpha * k))
        .collect()
}

/// Resolve the value a CPD variable takes on a concrete transition, if
/// observed. `last_a_o` is the other's most recent action strictly before
/// the current record.
fn resolve_value(
    name: &str,
    prev: &EventRecord,
    current: &EventRecord,
    last_a_o: Option<OtherAction>,
    bins: crate::bins::BinConfig,
) -> Option<usize> {
    match name {
        names::W_PREV => Some(prev.wellbeing_bin(bins).index),
        names::T_PREV => Some(prev.trust_bin(bins).index),
        names::I_PREV => prev.intention.map(Intention::index),
        names::W => Some(current.wellbeing_bin(bins).index),
        names::T => Some(current.trust_bin(bins).index),
        names::I => current.intention.map(Intention::index),
        names::A_R => current.a_r.map(AvAction::index),
        names::AL => current.alignment.map(crate::vars::Alignment::index),
        names::A_O => match current.contributor {
            Contributor::O => current.a_o.map(OtherAction::index),
            Contributor::R => last_a_o.map(OtherAction::index),
        },
        _ => None,
    }
}

/// Mirrored resolution for the other road user's well-being CPDs: user
/// well-being transitions stand in for the other's, with the contributor's
/// action mapped across roles (yield to yield).
fn resolve_mirrored(
    name: &str,
    prev: &EventRecord,
    current: &EventRecord,
    bins: crate::bins::BinConfig,
) -> Option<usize> {
    match name {
        names::W_O => Some(current.wellbeing_bin(bins).index),
        names::W_O_PREV => Some(prev.wellbeing_bin(bins).index),
        // In the R regime the other receives the AV's action, mirroring
        // the user receiving the other's action in an O event; and vice
        // versa. Yield indices coincide, so the mapping is positional.
        names::A_R => current.a_o.map(OtherAction::index),
        names::A_O => current.a_r.map(AvAction::index),
        _ => None,
    }
}

struct CountTable {
    child_card: usize,
    parent_cards: Vec<usize>,
    counts: Vec<f64>,
}

impl CountTable {
    fn new(child_card: usize, parent_cards: Vec<usize>) -> Self {
        let cols: usize = parent_cards.iter().product();
        CountTable {
            child_card,
            parent_cards,
            counts: vec![0.0; cols * child_card],
        }
    }

    fn add(&mut self, child: usize, parents: &[usize]) {
        let mut col = 0usize;
        for (v, c) in parents.iter().zip(&self.parent_cards) {
            col = col * c + v;
        }
        self.counts[col * self.child_card + child] += 1.0;
    }

    fn smoothed(&self, alpha: f64) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.counts.len());
        for col in self.counts.chunks(self.child_card) {
            values.extend(dirichlet_column(col, alpha));
        }
        values
    }
}

/// Estimate every CPD of `structure` from the dataset with Dirichlet
/// smoothing `alpha`. Priors stay uniform.
pub fn estimate_cpds(
    data: &Dataset,
    structure: &StructureCandidate,
    alpha: f64,
) -> Result<DbnModel> {
    if alpha <= 0.0 || alpha.is_nan() {
        return Err(Error::usage(format!("alpha must be positive, got {alpha}")));
    }
    let n_bins = data.bins.n_bins;
    let table = structure.validate(n_bins)?;

    let mut regimes = Vec::with_capacity(2);
    for kind in [RegimeKind::RContributor, RegimeKind::OContributor] {
        let specs = structure.regime(kind);
        let mut counters: Vec<CountTable> = specs
            .iter()
            .map(|s| {
                let child_card = table.cardinality_of(&s.child).expect("validated");
                let parent_cards = s
                    .parents
                    .iter()
                    .map(|p| table.cardinality_of(p).expect("validated"))
                    .collect();
                CountTable::new(child_card, parent_cards)
            })
            .collect();

        let counted_contributor = match kind {
            RegimeKind::RContributor => Contributor::R,
            RegimeKind::OContributor => Contributor::O,
        };
        // The mirror flips contributor roles, so w_o counts come from
        // events of the opposite regime.
        let mirror_contributor = match kind {
            RegimeKind::RContributor => Contributor::O,
            RegimeKind::OContributor => Contributor::R,
        };

        for seq in &data.sequences {
            let mut last_a_o: Option<OtherAction> = None;
            for pair in seq.records.windows(2) {
                let (prev, current) = (&pair[0], &pair[1]);
                if prev.contributor == Contributor::O {
                    last_a_o = prev.a_o;
                }
                for (spec, counter) in specs.iter().zip(&mut counters) {
                    if spec.child == names::W_O {
                        if current.contributor != mirror_contributor {
                            continue;
                        }
                        let child = resolve_mirrored(names::W_O, prev, current, data.bins);
                        let parents: Option<Vec<usize>> = spec
                            .parents
                            .iter()
                            .map(|p| resolve_mirrored(p, prev, current, data.bins))
                            .collect();
                        if let (Some(c), Some(ps)) = (child, parents) {
                            counter.add(c, &ps);
                        }
                    } else {
                        if current.contributor != counted_contributor {
                            continue;
                        }
                        let child = resolve_value(&spec.child, prev, current, last_a_o, data.bins);
                        let parents: Option<Vec<usize>> = spec
                            .parents
                            .iter()
                            .map(|p| resolve_value(p, prev, current, last_a_o, data.bins))
                            .collect();
                        if let (Some(c), Some(ps)) = (child, parents) {
                            counter.add(c, &ps);
                        }
                    }
                }
            }
        }

        let cpds: Vec<CpdTable> = specs
            .iter()
            .zip(&counters)
            .map(|(s, counter)| {
                let child = table.var(&s.child)?;
                let parents = s
                    .parents
                    .iter()
                    .map(|p| table.var(p))
                    .collect::<Result<Vec<_>>>()?;
                CpdTable::new(child, parents, counter.smoothed(alpha))
            })
            .collect::<Result<Vec<_>>>()?;
        regimes.push(TransitionRegime::new(kind, cpds)?);
    }

    let o_regime = regimes.pop().expect("two regimes");
    let r_regime = regimes.pop().expect("two regimes");
    DbnModel::new(
        structure.structure_id.clone(),
        n_bins,
        uniform_priors(&table)?,
        r_regime,
        o_regime,
    )
}

fn uniform_priors(table: &VarTable) -> Result<BTreeMap<String, Factor>> {
    let mut priors = BTreeMap::new();
    for name in ALL_LATENTS {
        priors.insert(name.to_string(), Factor::uniform(vec![table.var(name)?])?);
    }
    Ok(priors)
}

/// Exact log-likelihood of a dataset's observed latents under a model.
pub fn dataset_log_likelihood(
    model: &DbnModel,
    data: &Dataset,
    targets: TargetSet,
) -> Result<LogLikelihood> {
    log_likelihood(model, &data.to_event_inputs(targets))
}

/// Outcome of cross-validated structure selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSelection {
    pub winner_index: usize,
    pub winner_id: String,
    /// Mean held-out log-likelihood per candidate, in candidate order.
    pub mean_held_out_loglik: Vec<f64>,
}

/// k-fold cross-validated model selection by held-out log-likelihood.
/// Sequences are assigned to folds round-robin by index; ties break toward
/// the earliest candidate.
pub fn select_structure(
    candidates: &[StructureCandidate],
    data: &Dataset,
    folds: usize,
    alpha: f64,
) -> Result<StructureSelection> {
    if candidates.is_empty() {
        return Err(Error::usage("no structure candidates supplied".to_string()));
    }
    if folds < 2 {
        return Err(Error::usage(format!("folds must be >= 2, got {folds}")));
    }
    if data.sequences.len() < folds {
        return Err(Error::usage(format!(
            "{} sequences cannot fill {folds} folds",
            data.sequences.len()
        )));
    }

    let assignment: Vec<usize> = (0..data.sequences.len()).map(|i| i % folds).collect();
    let mut mean_scores = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let mut fold_scores = Vec::with_capacity(folds);
        for fold in 0..folds {
            let train: Vec<Sequence> = data
                .sequences
                .iter()
                .zip(&assignment)
                .filter(|(_, f)| **f != fold)
                .map(|(s, _)| s.clone())
                .collect();
            let test: Vec<Sequence> = data
                .sequences
                .iter()
                .zip(&assignment)
                .filter(|(_, f)| **f == fold)
                .map(|(s, _)| s.clone())
                .collect();
            let train_data = Dataset {
                sequences: train,
                bins: data.bins,
            };
            let test_data = Dataset {
                sequences: test,
                bins: data.bins,
            };
            let model = estimate_cpds(&train_data, candidate, alpha)?;
            let ll = dataset_log_likelihood(&model, &test_data, TargetSet::all())?;
            fold_scores.push(ll.total);
        }
        mean_scores.push(fold_scores.iter().sum::<f64>() / folds as f64);
    }

    let mut winner = 0;
    for (i, s) in mean_scores.iter().enumerate() {
        if *s > mean_scores[winner] {
            winner = i;
        }
    }
    Ok(StructureSelection {
        winner_index: winner,
        winner_id: candidates[winner].structure_id.clone(),
        mean_held_out_loglik: mean_scores,
    })
}

/// Options for [`evaluate_accuracy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub folds: usize,
    pub iterations: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Worker-count hint; 0 means one worker per available core. Results
    /// are identical for any worker count.
    #[serde(default)]
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            folds: 5,
            iterations: 100,
            seed: 0,
            alpha: 1.0,
            workers: 0,
        }
    }
}

/// Cross-validated inference accuracy per target latent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Mean exact-match accuracy over (iteration, fold) cells.
    pub per_target_accuracy: BTreeMap<String, f64>,
    /// Predictions scored per target, summed over cells.
    pub per_target_predictions: BTreeMap<String, usize>,
    /// Held-out log-likelihood per fold index, averaged over iterations.
    pub per_fold_loglik: Vec<f64>,
    pub seed: u64,
    pub folds: usize,
    pub iterations: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default)]
struct CellOutcome {
    correct: [usize; 3],
    total: [usize; 3],
    loglik: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Shuffled sequence order for one iteration, derived only from the seed
/// and iteration index so work items can run in any order.
fn iteration_order(n: usize, seed: u64, iteration: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ (iteration as u64).wrapping_mul(0xa076_1d64_78bd_642f)));
    let mut order: Vec<usize> = (0..n).collect();
    // Fisher-Yates.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order
}

/// MAP-prediction tallies for one model over held-out sequences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccuracyCounts {
    /// Correct predictions per target, indexed like [`Target::ALL`].
    pub correct: [usize; 3],
    /// Scored predictions per target.
    pub total: [usize; 3],
}

/// Score each observed latent of each record by filtering with that latent
/// hidden (all other evidence kept), predicting its MAP value, and
/// comparing exactly against the discretized label. MAP ties break toward
/// the lowest index.
pub fn score_map_accuracy(model: &DbnModel, sequences: &[&Sequence], bins: crate::bins::BinConfig) -> Result<AccuracyCounts> {
    let mut counts = AccuracyCounts::default();
    for seq in sequences {
        let full = sequence_event_inputs(&seq.records, bins, TargetSet::all());
        let mut belief = BeliefState::initial(model)?;
        for (k, record) in seq.records.iter().enumerate() {
            for (ti, target) in Target::ALL.into_iter().enumerate() {
                let actual = match target {
                    Target::Wellbeing => Some(record.wellbeing_bin(bins).index),
                    Target::Trust => Some(record.trust_bin(bins).index),
                    Target::Intention => record.intention.map(Intention::index),
                };
                let Some(actual) = actual else { continue };
                let mut hidden = full[k].clone();
                match target {
                    Target::Wellbeing => hidden.observed.wellbeing = None,
                    Target::Trust => hidden.observed.trust = None,
                    Target::Intention => hidden.observed.intention = None,
                }
                let side = filter_step(&belief, &hidden, model)?;
                let predicted = side.marginal(target_latent(target))?.map_index()?;
                counts.total[ti] += 1;
                if predicted == actual {
                    counts.correct[ti] += 1;
                }
            }
            belief = filter_step(&belief, &full[k], model)?;
        }
    }
    Ok(counts)
}

fn evaluate_cell(
    data: &Dataset,
    structure: &StructureCandidate,
    opts: &EvalOptions,
    iteration: usize,
    fold: usize,
) -> Result<CellOutcome> {
    let n = data.sequences.len();
    let order = iteration_order(n, opts.seed, iteration);
    let lo = fold * n / opts.folds;
    let hi = (fold + 1) * n / opts.folds;
    let test_idx = &order[lo..hi];

    let train: Vec<Sequence> = order[..lo]
        .iter()
        .chain(&order[hi..])
        .map(|&i| data.sequences[i].clone())
        .collect();
    let train_data = Dataset {
        sequences: train,
        bins: data.bins,
    };
    let model = estimate_cpds(&train_data, structure, opts.alpha)?;

    let test: Vec<&Sequence> = test_idx.iter().map(|&i| &data.sequences[i]).collect();
    let tallies = score_map_accuracy(&model, &test, data.bins)?;
    let mut outcome = CellOutcome {
        correct: tallies.correct,
        total: tallies.total,
        loglik: 0.0,
    };
    for seq in &test {
        let full = sequence_event_inputs(&seq.records, data.bins, TargetSet::all());
        let ll = log_likelihood(&model, &[full])?;
        outcome.loglik += ll.total;
    }
    Ok(outcome)
}

fn target_latent(target: Target) -> &'static str {
    match target {
        Target::Wellbeing => names::W,
        Target::Trust => names::T,
        Target::Intention => names::I,
    }
}

/// Repeated k-fold cross-validation of inference accuracy. Each held-out
/// record is predicted by filtering with the target latent hidden (all
/// other evidence kept) and taking the MAP value; correctness is exact
/// bin/label match. Deterministic for a fixed seed regardless of the
/// worker count.
pub fn evaluate_accuracy(
    data: &Dataset,
    structure: &StructureCandidate,
    opts: &EvalOptions,
) -> Result<AccuracyReport> {
    if opts.folds < 2 {
        return Err(Error::usage(format!("folds must be >= 2, got {}", opts.folds)));
    }
    if opts.iterations < 1 {
        return Err(Error::usage("iterations must be >= 1".to_string()));
    }
    if data.sequences.len() < opts.folds {
        return Err(Error::usage(format!(
            "{} sequences cannot fill {} folds",
            data.sequences.len(),
            opts.folds
        )));
    }

    let cells: Vec<(usize, usize)> = (0..opts.iterations)
        .flat_map(|it| (0..opts.folds).map(move |f| (it, f)))
        .collect();

    let outcomes: Vec<Result<CellOutcome>> = if opts.workers == 1 {
        cells
            .iter()
            .map(|&(it, f)| evaluate_cell(data, structure, opts, it, f))
            .collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if opts.workers > 0 {
            builder = builder.num_threads(opts.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::usage(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(it, f)| evaluate_cell(data, structure, opts, it, f))
                .collect()
        })
    };

    // Aggregate strictly in cell-index order.
    let mut cell_accs: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut totals = [0usize; 3];
    let mut fold_logliks = vec![0.0; opts.folds];
    for (outcome, &(_, fold)) in outcomes.into_iter().zip(&cells) {
        let outcome = outcome?;
        for ti in 0..3 {
            if outcome.total[ti] > 0 {
                cell_accs[ti].push(outcome.correct[ti] as f64 / outcome.total[ti] as f64);
                totals[ti] += outcome.total[ti];
            }
        }
        fold_logliks[fold] += outcome.loglik;
    }
    for v in &mut fold_logliks {
        *v /= opts.iterations as f64;
    }

    let mut per_target_accuracy = BTreeMap::new();
    let mut per_target_predictions = BTreeMap::new();
    for (ti, target) in Target::ALL.into_iter().enumerate() {
        let acc = if cell_accs[ti].is_empty() {
            f64::NAN
        } else {
            cell_accs[ti].iter().sum::<f64>() / cell_accs[ti].len() as f64
        };
        per_target_accuracy.insert(target.label().to_string(), acc);
        per_target_predictions.insert(target.label().to_string(), totals[ti]);
    }

    Ok(AccuracyReport {
        per_target_accuracy,
        per_target_predictions,
        per_fold_loglik: fold_logliks,
        seed: opts.seed,
        folds: opts.folds,
        iterations: opts.iterations,
        alpha: opts.alpha,
    })
}

/// One Welch comparison between a positively and a negatively labeled
/// group of scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub label: String,
    pub n_positive: usize,
    pub n_negative: usize,
    pub t: f64,
    pub df: f64,
    pub p_two_tail: f64,
    pub p_one_tail: f64,
}

/// The dependency-screening statistics report: Welch t-tests over the
/// study's groupings plus the well-being/trust correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub comparisons: Vec<GroupComparison>,
    pub skipped: Vec<String>,
    pub wellbeing_trust_correlation: Option<CorrelationResult>,
}

/// Compute the grouping statistics used to refine the model structure:
/// well-being split by the other's action, trust by the AV action,
/// well-being by intention, well-being and trust by alignment, plus the
/// well-being/trust correlation.
pub fn structure_statistics(data: &Dataset) -> Result<StatsReport> {
    let records: Vec<&EventRecord> = data
        .sequences
        .iter()
        .flat_map(|s| s.records.iter())
        .collect();

    let mut comparisons = Vec::new();
    let mut skipped = Vec::new();
    let mut compare = |label: &str, pos: Vec<f64>, neg: Vec<f64>| {
        match welch_t_test(&pos, &neg, Tail::Two) {
            Ok(two) => {
                let one = welch_t_test(&pos, &neg, Tail::One).expect("same preconditions");
                comparisons.push(GroupComparison {
                    label: label.to_string(),
                    n_positive: pos.len(),
                    n_negative: neg.len(),
                    t: two.t,
                    df: two.df,
                    p_two_tail: two.p,
                    p_one_tail: one.p,
                });
            }
            Err(e) => skipped.push(format!("{label}: {e}")),
        }
    };

    let split = |filter: &dyn Fn(&EventRecord) -> Option<bool>,
                 score: &dyn Fn(&EventRecord) -> f64| {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in &records {
            match filter(r) {
                Some(true) => pos.push(score(r)),
                Some(false) => neg.push(score(r)),
                None => {}
            }
        }
        (pos, neg)
    };

    let wellbeing = |r: &EventRecord| score_wellbeing(&r.responses);
    let trust = |r: &EventRecord| score_trust(&r.responses);

    let (pos, neg) = split(
        &|r| (r.contributor == Contributor::O)
            .then(|| r.a_o == Some(OtherAction::Yield))
            .filter(|_| r.a_o.is_some()),
        &wellbeing,
    );
    compare("wellbeing by other's action (O events)", pos, neg);

    let (pos, neg) = split(
        &|r| (r.contributor == Contributor::R)
            .then(|| r.a_r == Some(AvAction::Yield))
            .filter(|_| r.a_r.is_some()),
        &trust,
    );
    compare("trust by AV action (R events)", pos, neg);

    let (pos, neg) = split(
        &|r| r.intention.map(|i| i == Intention::Yield),
        &wellbeing,
    );
    compare("wellbeing by intention", pos, neg);

    let (pos, neg) = split(
        &|r| r.alignment.map(|a| a == crate::vars::Alignment::Aligned),
        &wellbeing,
    );
    compare("wellbeing by alignment (R events)", pos, neg);

    let (pos, neg) = split(
        &|r| r.alignment.map(|a| a == crate::vars::Alignment::Aligned),
        &trust,
    );
    compare("trust by alignment (R events)", pos, neg);

    let w_scores: Vec<f64> = records.iter().map(|r| score_wellbeing(&r.responses)).collect();
    let t_scores: Vec<f64> = records.iter().map(|r| score_trust(&r.responses)).collect();
    let wellbeing_trust_correlation = match pearson_r(&w_scores, &t_scores) {
        Ok(c) => Some(c),
        Err(e) => {
            skipped.push(format!("wellbeing/trust correlation: {e}"));
            None
        }
    };

    Ok(StatsReport {
        comparisons,
        skipped,
        wellbeing_trust_correlation,
    })
}
