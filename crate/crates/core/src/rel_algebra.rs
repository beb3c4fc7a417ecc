//! Multilinear polynomials over reliability variables.
//!
//! Every variable is a probability of an independent event, so `r * r = r`
//! and exponents are collapsed as soon as a product is formed. Coefficients
//! are exact integers which keeps equality syntactic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::short_name;

/// Reliability variable of operating mode `mode` (1-based) of a component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub component: Arc<str>,
    pub mode: u32,
}

impl VarId {
    pub fn new(component: impl Into<Arc<str>>, mode: u32) -> Self {
        Self {
            component: component.into(),
            mode,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r_{{{},{}}}", short_name(&self.component), self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no value assigned to variable {0}")]
pub struct MissingVariable(pub VarId);

/// Polynomial with exact integer coefficients. Keys are sorted, duplicate
/// free variable lists; the empty key is the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RelExpr {
    terms: BTreeMap<Vec<VarId>, i64>,
}

impl RelExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(Vec::new(), c);
        }
        Self { terms }
    }

    pub fn var(v: VarId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![v], 1);
        Self { terms }
    }

    /// `1 - v`
    pub fn complement(v: VarId) -> Self {
        Self::one().sub(&Self::var(v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the expression has no variables.
    pub fn as_constant(&self) -> Option<i64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[VarId], i64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    /// Distinct variables in sorted order.
    pub fn variables(&self) -> Vec<VarId> {
        let mut vars: Vec<VarId> = self.terms.keys().flatten().cloned().collect();
        vars.sort();
        vars.dedup();
        vars
    }

    fn accumulate(terms: &mut BTreeMap<Vec<VarId>, i64>, key: Vec<VarId>, c: i64) {
        use std::collections::btree_map::Entry;
        match terms.entry(key) {
            Entry::Vacant(e) => {
                if c != 0 {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &RelExpr) -> RelExpr {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            Self::accumulate(&mut terms, k.clone(), *c);
        }
        RelExpr { terms }
    }

    pub fn sub(&self, other: &RelExpr) -> RelExpr {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, s: i64) -> RelExpr {
        if s == 0 {
            return RelExpr::zero();
        }
        RelExpr {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// Expanded product with idempotent exponents.
    pub fn mul(&self, other: &RelExpr) -> RelExpr {
        let mut terms: BTreeMap<Vec<VarId>, i64> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = merge_sorted(ka, kb);
                *terms.entry(key).or_insert(0) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != 0);
        RelExpr { terms }
    }

    /// Substitutes `v := 1` (`true`) or `v := 0` (`false`).
    pub fn restrict(&self, v: &VarId, value: bool) -> RelExpr {
        let mut terms: BTreeMap<Vec<VarId>, i64> = BTreeMap::new();
        for (k, c) in &self.terms {
            match k.binary_search(v) {
                Ok(i) => {
                    if value {
                        let mut key = k.clone();
                        key.remove(i);
                        *terms.entry(key).or_insert(0) += c;
                    }
                }
                Err(_) => *terms.entry(k.clone()).or_insert(0) += c,
            }
        }
        terms.retain(|_, c| *c != 0);
        RelExpr { terms }
    }

    /// Evaluates with `value(v)` for each variable.
    pub fn eval_with<F>(&self, mut value: F) -> Result<f64, MissingVariable>
    where
        F: FnMut(&VarId) -> Option<f64>,
    {
        let mut total = 0.0;
        for (k, c) in &self.terms {
            let mut prod = *c as f64;
            for v in k {
                prod *= value(v).ok_or_else(|| MissingVariable(v.clone()))?;
            }
            total += prod;
        }
        Ok(total)
    }

    pub fn eval(&self, assignment: &HashMap<VarId, f64>) -> Result<f64, MissingVariable> {
        self.eval_with(|v| assignment.get(v).copied())
    }

    /// Sum-of-monomials rendering, e.g. `r_{1,1} + r_{2,1} - r_{1,1}.r_{2,1}`.
    pub fn render_expanded(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        // constant first, then by degree, then lexicographically
        let mut terms: Vec<(&Vec<VarId>, i64)> = self.terms.iter().map(|(k, c)| (k, *c)).collect();
        terms.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        let mut out = String::new();
        for (i, (k, c)) in terms.iter().enumerate() {
            let mag = c.unsigned_abs();
            let body = if k.is_empty() {
                mag.to_string()
            } else {
                let vars: Vec<String> = k.iter().map(ToString::to_string).collect();
                if mag == 1 {
                    vars.join(".")
                } else {
                    format!("{mag}.{}", vars.join("."))
                }
            };
            match (i, *c < 0) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    /// Product-form rendering such as `(1-r_{1,1}).r_{1,2}`, peeling
    /// variables in `order`. Falls back to the expanded form when the
    /// expression is not a product of `r` and `(1-r)` factors.
    pub fn render_factored(&self, order: &[VarId]) -> String {
        self.factor(order)
            .unwrap_or_else(|| self.render_expanded())
    }

    fn factor(&self, order: &[VarId]) -> Option<String> {
        let present = self.variables();
        let mut rest = self.clone();
        let mut factors = Vec::new();
        let mut seen = 0;
        for v in order {
            if present.binary_search(v).is_err() {
                continue;
            }
            seen += 1;
            let low = rest.restrict(v, false);
            let high = rest.restrict(v, true);
            let slope = high.sub(&low);
            if low.is_zero() {
                factors.push(v.to_string());
                rest = slope;
            } else if slope == low.scale(-1) {
                factors.push(format!("(1-{v})"));
                rest = low;
            } else {
                return None;
            }
        }
        if seen != present.len() || rest.as_constant() != Some(1) {
            return None;
        }
        if factors.is_empty() {
            Some("1".to_string())
        } else {
            Some(factors.join("."))
        }
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_factored(&self.variables()))
    }
}

fn merge_sorted(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn poly_mul(a: &RelExpr, b: &RelExpr) -> RelExpr {
    a.mul(b)
}

pub fn poly_eval(e: &RelExpr, assignment: &HashMap<VarId, f64>) -> Result<f64, MissingVariable> {
    e.eval(assignment)
}

/// `1 - prod_paths (1 - prod_{v in path} v)`, expanded. No paths gives 0.
pub fn path_success_expr(paths: &[Vec<VarId>]) -> RelExpr {
    if paths.is_empty() {
        return RelExpr::zero();
    }
    let mut all_fail = RelExpr::one();
    for path in paths {
        let success = path
            .iter()
            .fold(RelExpr::one(), |acc, v| acc.mul(&RelExpr::var(v.clone())));
        all_fail = all_fail.mul(&RelExpr::one().sub(&success));
    }
    RelExpr::one().sub(&all_fail)
}
