//! Dense factors over small discrete scopes.
//!
//! A factor holds a non-negative table indexed by the joint assignment of
//! its scope. Storage is row-major over the canonical scope (variables
//! sorted by name), so two factors over the same variables always agree on
//! layout and equality is plain value equality. The joint state spaces in
//! this crate stay tiny (dozens of states), which makes dense exact
//! arithmetic the right trade-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vars::Variable;

/// Normalization tolerance for probability tables.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    /// Canonical scope: sorted by variable name, no duplicates.
    scope: Vec<Variable>,
    /// Row-major values; the first scope variable is the most significant
    /// index digit.
    values: Vec<f64>,
}

impl Factor {
    /// Build a factor from a scope and values laid out row-major in the
    /// order `scope` was given. The scope is canonicalized internally.
    pub fn new(scope: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = scope.iter().map(|v| v.cardinality).product();
        if values.len() != expected {
            return Err(Error::model(format!(
                "factor over {:?} needs {} values, got {}",
                names(&scope),
                expected,
                values.len()
            )));
        }
        for (i, w) in scope.iter().enumerate() {
            if scope[..i].iter().any(|u| u.name == w.name) {
                return Err(Error::model(format!(
                    "duplicate variable {:?} in factor scope",
                    w.name
                )));
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::model(format!(
                "factor values must be finite and non-negative, found {bad}"
            )));
        }

        let mut order: Vec<usize> = (0..scope.len()).collect();
        order.sort_by(|&a, &b| scope[a].name.cmp(&scope[b].name));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return Ok(Factor { scope, values });
        }

        let canon_scope: Vec<Variable> = order.iter().map(|&j| scope[j].clone()).collect();
        let old_strides = strides(&scope);
        let canon_cards: Vec<usize> = canon_scope.iter().map(|v| v.cardinality).collect();
        let permuted_strides: Vec<usize> = order.iter().map(|&j| old_strides[j]).collect();
        let mut canon_values = Vec::with_capacity(values.len());
        let mut walk = StrideWalk::new(&canon_cards, &permuted_strides);
        for _ in 0..values.len() {
            canon_values.push(values[walk.pos()]);
            walk.advance();
        }
        Ok(Factor {
            scope: canon_scope,
            values: canon_values,
        })
    }

    /// Factor with every entry equal to `value`.
    pub fn constant(scope: Vec<Variable>, value: f64) -> Result<Self> {
        let len: usize = scope.iter().map(|v| v.cardinality).product();
        Factor::new(scope, vec![value; len])
    }

    /// Uniform distribution over the scope.
    pub fn uniform(scope: Vec<Variable>) -> Result<Self> {
        let len: usize = scope.iter().map(|v| v.cardinality).product();
        Factor::new(scope, vec![1.0 / len as f64; len])
    }

    /// Scope-free factor holding a single value.
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            values: vec![value],
        }
    }

    /// Indicator of `var = value`: 1.0 at the value, 0.0 elsewhere.
    pub fn indicator(var: Variable, value: usize) -> Result<Self> {
        if value >= var.cardinality {
            return Err(Error::usage(format!(
                "value {value} out of range for {var}"
            )));
        }
        let mut values = vec![0.0; var.cardinality];
        values[value] = 1.0;
        Factor::new(vec![var], values)
    }

    pub fn scope(&self) -> &[Variable] {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.scope.iter().any(|v| v.name == name)
    }

    fn variable_axis(&self, name: &str) -> Result<usize> {
        self.scope
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::usage(format!("variable {name:?} not in factor scope")))
    }

    /// Value at a full assignment given in canonical scope order.
    pub fn value_at(&self, assignment: &[usize]) -> f64 {
        let st = strides(&self.scope);
        let pos: usize = assignment.iter().zip(&st).map(|(a, s)| a * s).sum();
        self.values[pos]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entrywise product; the result scope is the union of both scopes.
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        for v in &self.scope {
            if let Some(u) = other.scope.iter().find(|u| u.name == v.name) {
                if u.cardinality != v.cardinality {
                    return Err(Error::model(format!(
                        "shared variable {:?} has cardinality {} vs {}",
                        v.name, v.cardinality, u.cardinality
                    )));
                }
            }
        }
        let mut union = self.scope.clone();
        for u in &other.scope {
            if !union.iter().any(|v| v.name == u.name) {
                union.push(u.clone());
            }
        }
        union.sort_by(|a, b| a.name.cmp(&b.name));

        let cards: Vec<usize> = union.iter().map(|v| v.cardinality).collect();
        let self_strides = embedded_strides(&union, &self.scope);
        let other_strides = embedded_strides(&union, &other.scope);
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut a = StrideWalk::new(&cards, &self_strides);
        let mut b = StrideWalk::new(&cards, &other_strides);
        for _ in 0..total {
            values.push(self.values[a.pos()] * other.values[b.pos()]);
            a.advance();
            b.advance();
        }
        Ok(Factor {
            scope: union,
            values,
        })
    }

    /// Sum out one variable.
    pub fn marginalize(&self, name: &str) -> Result<Factor> {
        let axis = self.variable_axis(name)?;
        let out_scope: Vec<Variable> = self
            .scope
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, v)| v.clone())
            .collect();
        let out_len: usize = out_scope.iter().map(|v| v.cardinality).product();
        let mut out_values = vec![0.0; out_len];

        let cards: Vec<usize> = self.scope.iter().map(|v| v.cardinality).collect();
        let out_strides_full = {
            // stride of each input axis in the output layout (0 for the
            // summed axis)
            let st = strides(&out_scope);
            let mut full = vec![0usize; self.scope.len()];
            let mut k = 0;
            for (i, s) in full.iter_mut().enumerate() {
                if i != axis {
                    *s = st[k];
                    k += 1;
                }
            }
            full
        };
        let mut out = StrideWalk::new(&cards, &out_strides_full);
        for v in &self.values {
            out_values[out.pos()] += v;
            out.advance();
        }
        Ok(Factor {
            scope: out_scope,
            values: out_values,
        })
    }

    /// Sum out every variable except `keep`, in any order.
    pub fn marginal(&self, keep: &[&str]) -> Result<Factor> {
        let mut f = self.clone();
        let drop: Vec<String> = self
            .scope
            .iter()
            .filter(|v| !keep.contains(&v.name.as_str()))
            .map(|v| v.name.clone())
            .collect();
        for name in drop {
            f = f.marginalize(&name)?;
        }
        Ok(f)
    }

    /// Fix `var = value` and drop it from the scope.
    pub fn reduce(&self, name: &str, value: usize) -> Result<Factor> {
        let axis = self.variable_axis(name)?;
        if value >= self.scope[axis].cardinality {
            return Err(Error::usage(format!(
                "value {value} out of range for {}",
                self.scope[axis]
            )));
        }
        let out_scope: Vec<Variable> = self
            .scope
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, v)| v.clone())
            .collect();
        let out_cards: Vec<usize> = out_scope.iter().map(|v| v.cardinality).collect();
        let in_strides = strides(&self.scope);
        let kept_strides: Vec<usize> = in_strides
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, s)| *s)
            .collect();
        let total: usize = out_cards.iter().product();
        let mut out_values = Vec::with_capacity(total);
        let base = value * in_strides[axis];
        let mut walk = StrideWalk::new(&out_cards, &kept_strides);
        for _ in 0..total {
            out_values.push(self.values[base + walk.pos()]);
            walk.advance();
        }
        Ok(Factor {
            scope: out_scope,
            values: out_values,
        })
    }

    /// Average over a variable as if it were uniformly distributed; used
    /// for unobserved event inputs.
    pub fn average_out(&self, name: &str) -> Result<Factor> {
        let axis = self.variable_axis(name)?;
        let card = self.scope[axis].cardinality as f64;
        let mut f = self.marginalize(name)?;
        for v in &mut f.values {
            *v /= card;
        }
        Ok(f)
    }

    /// Scale every entry so the factor sums to one. Zero (or non-finite)
    /// total mass means the conditioning evidence was impossible.
    pub fn normalize(&self) -> Result<Factor> {
        let mass = self.total_mass();
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::degenerate(format!(
                "cannot normalize factor over {:?} with total mass {mass}",
                names(&self.scope)
            )));
        }
        let values = self.values.iter().map(|v| v / mass).collect();
        Ok(Factor {
            scope: self.scope.clone(),
            values,
        })
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Rename variables via `(old, new)` pairs, re-canonicalizing the
    /// layout.
    pub fn rename(&self, renames: &[(&str, &str)]) -> Result<Factor> {
        let mut scope = self.scope.clone();
        for v in &mut scope {
            if let Some((_, new)) = renames.iter().find(|(old, _)| *old == v.name) {
                v.name = (*new).to_string();
            }
        }
        Factor::new(scope, self.values.clone())
    }

    /// Expected bin midpoint of a single-variable factor over bins.
    pub fn expected_midpoint(&self) -> Result<f64> {
        if self.scope.len() != 1 {
            return Err(Error::usage(format!(
                "expected_midpoint needs a single-variable factor, scope is {:?}",
                names(&self.scope)
            )));
        }
        let n = self.scope[0].cardinality as f64;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(i, p)| p * (i as f64 + 0.5) / n)
            .sum())
    }

    /// Index of the largest entry of a single-variable factor; ties break
    /// toward the lowest index.
    pub fn map_index(&self) -> Result<usize> {
        if self.scope.len() != 1 {
            return Err(Error::usage(
                "map_index needs a single-variable factor".to_string(),
            ));
        }
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        Ok(best)
    }
}

/// Entrywise product of two factors (free-function form).
pub fn factor_product(f: &Factor, g: &Factor) -> Result<Factor> {
    f.product(g)
}

/// Sum a variable out of a factor (free-function form).
pub fn marginalize(f: &Factor, var: &str) -> Result<Factor> {
    f.marginalize(var)
}

/// Normalize a factor to unit mass (free-function form).
pub fn normalize(f: &Factor) -> Result<Factor> {
    f.normalize()
}

/// Walks every joint assignment of `cards` in row-major order while
/// tracking the linear position induced by an arbitrary stride vector.
/// Advancing is O(1) amortized and allocation-free: the digit odometer
/// adds a stride on increment and subtracts `stride * card` on carry.
struct StrideWalk {
    cards: Vec<usize>,
    strides: Vec<usize>,
    digits: Vec<usize>,
    pos: usize,
}

impl StrideWalk {
    fn new(cards: &[usize], strides: &[usize]) -> Self {
        debug_assert_eq!(cards.len(), strides.len());
        StrideWalk {
            cards: cards.to_vec(),
            strides: strides.to_vec(),
            digits: vec![0; cards.len()],
            pos: 0,
        }
    }

    #[inline]
    fn pos(&self) -> usize {
        self.pos
    }

    #[inline]
    fn advance(&mut self) {
        let mut d = self.cards.len();
        while d > 0 {
            d -= 1;
            self.digits[d] += 1;
            self.pos += self.strides[d];
            if self.digits[d] < self.cards[d] {
                return;
            }
            self.digits[d] = 0;
            self.pos -= self.strides[d] * self.cards[d];
        }
    }
}

/// Row-major strides for a scope.
fn strides(scope: &[Variable]) -> Vec<usize> {
    let mut st = vec![1usize; scope.len()];
    for i in (0..scope.len().saturating_sub(1)).rev() {
        st[i] = st[i + 1] * scope[i + 1].cardinality;
    }
    st
}

/// For each variable of `union`, its stride in `inner` (0 if absent).
fn embedded_strides(union: &[Variable], inner: &[Variable]) -> Vec<usize> {
    let inner_strides = strides(inner);
    union
        .iter()
        .map(|v| {
            inner
                .iter()
                .position(|u| u.name == v.name)
                .map_or(0, |i| inner_strides[i])
        })
        .collect()
}

fn names(scope: &[Variable]) -> Vec<&str> {
    scope.iter().map(|v| v.name.as_str()).collect()
}

/// Iterate every joint assignment of the given cardinalities in row-major
/// order (last axis fastest).
pub fn joint_assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    let n = cards.len();
    (0..total).map(move |mut pos| {
        let mut digits = vec![0usize; n];
        for i in (0..n).rev() {
            digits[i] = pos % cards[i];
            pos /= cards[i];
        }
        digits
    })
}
