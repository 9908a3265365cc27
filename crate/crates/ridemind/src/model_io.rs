//! The model JSON document shared by every workflow.
//!
//! Layout: variable declarations, per-latent priors, and one CPD list per
//! regime. CPD values are flattened parent-major/child-minor over the
//! declared parent order. Numbers round-trip bit-identically because JSON
//! serialization uses the shortest representation that parses back to the
//! same double.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cpd::CpdTable;
use crate::dbn::{DbnModel, TransitionRegime};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::structure::{RegimeKind, StructureCandidate};
use crate::vars::Variable;

pub const MODEL_FORMAT: &str = "ridemind-model/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub format: String,
    pub structure_id: String,
    pub n_bins: usize,
    pub variables: Vec<Variable>,
    /// Initial distribution per latent, over the current-slice variable.
    pub prior: BTreeMap<String, Vec<f64>>,
    pub regimes: RegimesDoc,
    /// How the model was produced; ignored when loading.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimesDoc {
    pub r_contributor: Vec<CpdDoc>,
    pub o_contributor: Vec<CpdDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CpdDoc {
    pub child: String,
    pub parents: Vec<String>,
    /// Parent-major, child-minor, parents iterated in declared order.
    pub values: Vec<f64>,
}

fn regime_doc(regime: &TransitionRegime) -> Vec<CpdDoc> {
    regime
        .cpds()
        .iter()
        .map(|cpd| CpdDoc {
            child: cpd.child().name.clone(),
            parents: cpd.parents().iter().map(|p| p.name.clone()).collect(),
            values: cpd.values_parent_major(),
        })
        .collect()
}

pub fn model_to_doc(model: &DbnModel) -> ModelDoc {
    let table = model.var_table();
    let r = regime_doc(model.regime(crate::vars::Contributor::R));
    let o = regime_doc(model.regime(crate::vars::Contributor::O));

    let mut seen: Vec<String> = Vec::new();
    for c in r.iter().chain(&o) {
        for n in std::iter::once(&c.child).chain(&c.parents) {
            if !seen.contains(n) {
                seen.push(n.clone());
            }
        }
    }
    seen.sort();
    let variables = seen
        .iter()
        .map(|n| table.var(n).expect("validated model variable"))
        .collect();

    let prior = model
        .priors()
        .iter()
        .map(|(k, f)| (k.clone(), f.values().to_vec()))
        .collect();

    ModelDoc {
        format: MODEL_FORMAT.to_string(),
        structure_id: model.structure_id().to_string(),
        n_bins: model.n_bins(),
        variables,
        prior,
        regimes: RegimesDoc {
            r_contributor: r,
            o_contributor: o,
        },
        provenance: None,
    }
}

pub fn model_from_doc(doc: &ModelDoc) -> Result<DbnModel> {
    if doc.format != MODEL_FORMAT {
        return Err(Error::model(format!(
            "unsupported model format {:?} (expected {MODEL_FORMAT:?})",
            doc.format
        )));
    }
    let table = crate::structure::VarTable::new(doc.n_bins)?;
    for v in &doc.variables {
        let expected = table.cardinality_of(&v.name).ok_or_else(|| {
            Error::model(format!("unknown variable {:?} in model document", v.name))
        })?;
        if v.cardinality != expected {
            return Err(Error::model(format!(
                "variable {:?} declares cardinality {} but n_bins {} implies {}",
                v.name, v.cardinality, doc.n_bins, expected
            )));
        }
    }
    let build = |docs: &[CpdDoc]| -> Result<Vec<CpdTable>> {
        docs.iter()
            .map(|d| {
                let child = table.var(&d.child)?;
                let parents = d
                    .parents
                    .iter()
                    .map(|p| table.var(p))
                    .collect::<Result<Vec<_>>>()?;
                CpdTable::new(child, parents, d.values.clone())
            })
            .collect()
    };
    let r_regime = TransitionRegime::new(RegimeKind::RContributor, build(&doc.regimes.r_contributor)?)?;
    let o_regime = TransitionRegime::new(RegimeKind::OContributor, build(&doc.regimes.o_contributor)?)?;

    let mut priors = BTreeMap::new();
    for (name, values) in &doc.prior {
        priors.insert(
            name.clone(),
            Factor::new(vec![table.var(name)?], values.clone())?,
        );
    }
    DbnModel::new(
        doc.structure_id.clone(),
        doc.n_bins,
        priors,
        r_regime,
        o_regime,
    )
}

pub fn model_to_json(model: &DbnModel, provenance: Option<serde_json::Value>) -> Result<String> {
    let mut doc = model_to_doc(model);
    doc.provenance = provenance;
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn model_from_json(json: &str) -> Result<DbnModel> {
    let doc: ModelDoc = serde_json::from_str(json)?;
    model_from_doc(&doc)
}

pub fn save_model(
    model: &DbnModel,
    path: impl AsRef<Path>,
    provenance: Option<serde_json::Value>,
) -> Result<()> {
    std::fs::write(path, model_to_json(model, provenance)? + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DbnModel> {
    let json = std::fs::read_to_string(path)?;
    model_from_json(&json)
}

pub fn save_structure(structure: &StructureCandidate, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(structure)? + "\n")?;
    Ok(())
}

pub fn load_structure(path: impl AsRef<Path>) -> Result<StructureCandidate> {
    let json = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&json)?)
}
