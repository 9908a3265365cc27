//! Inference of an AV user's well-being, trust, and intention — plus an
//! interacting road user's well-being — from interaction-event logs, with
//! a decision layer that picks accommodative actions under uncertainty.
//!
//! The crate is organized around six pieces:
//!
//! - [`factor`], [`bins`], [`cpd`]: discrete variables, unit-interval
//!   discretization, and exact dense factor algebra.
//! - [`dbn`]: the two-regime interaction network (AV-contributor and
//!   other-contributor), Bayesian filtering, prediction, forward
//!   simulation, and exact log-likelihood.
//! - [`learning`]: Dirichlet-smoothed CPD estimation from event logs,
//!   structure statistics, cross-validated structure selection, and
//!   accuracy evaluation.
//! - [`decision`]: influence-diagram expected utility, optimal
//!   accommodative policies, value of information, and cost-sensitivity
//!   sweeps.
//! - [`data`]: the event-log schema, questionnaire scoring, CSV ingestion,
//!   and a seeded synthetic-data generator.
//! - [`cli`]: reproducible command-line workflows over all of the above.
//!
//! Every capability has a runnable demonstration under `examples/`.

pub mod bins;
pub mod cli;
pub mod cpd;
pub mod dbn;
pub mod decision;
pub mod error;
pub mod factor;
pub mod learning;
pub mod model_io;
pub mod models;
pub mod data;
pub mod stats;
pub mod structure;
pub mod vars;

pub use bins::{bin_midpoint, discretize, Bin, BinConfig, DEFAULT_N_BINS};
pub use cpd::CpdTable;
pub use dbn::{
    filter_step, forward_simulate, log_likelihood, predict, BeliefState, DbnModel, EventInput,
    LogLikelihood, StateEvidence, TrajectoryPoint, TransitionRegime,
};
pub use error::{Error, Result};
pub use factor::{factor_product, marginalize, normalize, Factor};
pub use structure::{
    compact_structure, default_structure, persistence_structure, CpdSpec, RegimeKind,
    StructureCandidate, VarTable,
};
pub use vars::{
    alignment_of, Alignment, AvAction, Contributor, Intention, OtherAction, Variable,
};
