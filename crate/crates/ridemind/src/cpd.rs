//! Tabular conditional probability distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{joint_assignments, Factor, NORM_TOLERANCE};
use crate::vars::Variable;

/// P(child | parents) stored as a factor over `{child} ∪ parents`.
///
/// The wire layout (`values` in [`CpdTable::new`] and in the model JSON) is
/// parent-major, child-minor: one child distribution per parent assignment,
/// parent assignments iterated row-major in declared parent order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpdTable {
    child: Variable,
    parents: Vec<Variable>,
    table: Factor,
}

impl CpdTable {
    pub fn new(child: Variable, parents: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        if parents.iter().any(|p| p.name == child.name) {
            return Err(Error::model(format!(
                "variable {:?} cannot be its own parent",
                child.name
            )));
        }
        let n_cols: usize = parents.iter().map(|p| p.cardinality).product();
        let expected = n_cols * child.cardinality;
        if values.len() != expected {
            return Err(Error::model(format!(
                "cpd for {:?} needs {} values ({} parent columns x {} child states), got {}",
                child.name,
                expected,
                n_cols,
                child.cardinality,
                values.len()
            )));
        }
        for (col, chunk) in values.chunks(child.cardinality).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::model(format!(
                    "cpd for {:?}: parent column {col} sums to {sum}, not 1",
                    child.name
                )));
            }
        }
        // Factor scope order (parents..., child) matches the wire layout.
        let mut scope = parents.clone();
        scope.push(child.clone());
        let table = Factor::new(scope, values)?;
        Ok(CpdTable {
            child,
            parents,
            table,
        })
    }

    /// Uniform distribution for every parent assignment.
    pub fn uniform(child: Variable, parents: Vec<Variable>) -> Result<Self> {
        let n_cols: usize = parents.iter().map(|p| p.cardinality).product();
        let p = 1.0 / child.cardinality as f64;
        let len = n_cols * child.cardinality;
        CpdTable::new(child, parents, vec![p; len])
    }

    pub fn child(&self) -> &Variable {
        &self.child
    }

    pub fn parents(&self) -> &[Variable] {
        &self.parents
    }

    pub fn table(&self) -> &Factor {
        &self.table
    }

    /// P(child = `child_value` | parents = `parent_values`), with parent
    /// values in declared parent order.
    pub fn prob(&self, child_value: usize, parent_values: &[usize]) -> f64 {
        assert_eq!(parent_values.len(), self.parents.len());
        let assignment: Vec<usize> = self
            .table
            .scope()
            .iter()
            .map(|v| {
                if v.name == self.child.name {
                    child_value
                } else {
                    let i = self
                        .parents
                        .iter()
                        .position(|p| p.name == v.name)
                        .expect("scope variable is child or parent");
                    parent_values[i]
                }
            })
            .collect();
        self.table.value_at(&assignment)
    }

    /// Values in the wire layout (parent-major, child-minor).
    pub fn values_parent_major(&self) -> Vec<f64> {
        let parent_cards: Vec<usize> = self.parents.iter().map(|p| p.cardinality).collect();
        let mut out = Vec::with_capacity(self.table.values().len());
        for parent_digits in joint_assignments(&parent_cards) {
            for c in 0..self.child.cardinality {
                out.push(self.prob(c, &parent_digits));
            }
        }
        out
    }
}
