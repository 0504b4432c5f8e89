use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IlpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    /// Bounded integer. Used for counters that are fully determined by binaries.
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        })
    }
}

/// Sparse linear expression. Terms are kept sorted by variable with
/// duplicates merged and zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    terms: Vec<(VarId, f64)>,
}

impl LinearExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, var: VarId, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn add(&mut self, var: VarId, coef: f64) {
        match self.terms.binary_search_by_key(&var, |t| t.0) {
            Ok(pos) => {
                self.terms[pos].1 += coef;
                if self.terms[pos].1 == 0.0 {
                    self.terms.remove(pos);
                }
            }
            Err(pos) if coef != 0.0 => self.terms.insert(pos, (var, coef)),
            Err(_) => {}
        }
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

impl FromIterator<(VarId, f64)> for LinearExpr {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        let mut e = LinearExpr::new();
        for (v, c) in iter {
            e.add(v, c);
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: LinearExpr,
    pub cmp: Comparator,
    pub rhs: f64,
}

impl Constraint {
    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.expr.eval(values);
        match self.cmp {
            Comparator::Le => (lhs - self.rhs).max(0.0),
            Comparator::Ge => (self.rhs - lhs).max(0.0),
            Comparator::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization objective with an optional constant offset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub expr: LinearExpr,
    pub constant: f64,
}

/// Linear model over binary, bounded-integer, and continuous variables.
/// Always a minimization.
#[derive(Debug, Clone, Default)]
pub struct LinearModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    by_name: HashMap<String, VarId>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Declare a variable. Panics on duplicate names or inverted bounds,
    /// which are construction bugs rather than data errors.
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        assert!(lower <= upper, "variable {name}: lower bound above upper bound");
        let id = VarId(self.variables.len());
        let prev = self.by_name.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinearExpr,
        cmp: Comparator,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            expr,
            cmp,
            rhs,
        });
    }

    pub fn set_objective(&mut self, expr: LinearExpr, constant: f64) {
        self.objective = Objective { expr, constant };
    }

    /// Fix a variable by collapsing its bounds.
    pub fn fix(&mut self, var: VarId, value: f64) {
        let v = &mut self.variables[var.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Check that every coefficient references a declared variable and that
    /// bounds are consistent.
    pub fn validate(&self) -> Result<(), IlpError> {
        let n = self.variables.len();
        for v in &self.variables {
            if !(v.lower <= v.upper) {
                return Err(IlpError::IllFormed(format!("variable {} has lower > upper", v.name)));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(IlpError::IllFormed(format!("binary {} bounds outside [0,1]", v.name)));
            }
        }
        let dangling = |e: &LinearExpr| e.terms().iter().any(|t| t.0 .0 >= n);
        for c in &self.constraints {
            if dangling(&c.expr) {
                return Err(IlpError::IllFormed(format!(
                    "constraint {} references an undeclared variable",
                    c.name
                )));
            }
            if !c.rhs.is_finite() || c.expr.terms().iter().any(|t| !t.1.is_finite()) {
                return Err(IlpError::IllFormed(format!("constraint {} is not finite", c.name)));
            }
        }
        if dangling(&self.objective.expr) {
            return Err(IlpError::IllFormed(
                "objective references an undeclared variable".into(),
            ));
        }
        Ok(())
    }

    /// Objective value of a dense value vector.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.constant + self.objective.expr.eval(values)
    }

    pub fn assignment_from_values(&self, values: &[f64]) -> Assignment {
        Assignment {
            values: self
                .variables
                .iter()
                .zip(values)
                .map(|(v, &x)| (v.name.clone(), x))
                .collect(),
        }
    }

    /// Dense value vector in declaration order.
    pub fn dense_values(&self, a: &Assignment) -> Result<Vec<f64>, IlpError> {
        self.variables
            .iter()
            .map(|v| {
                a.get(&v.name)
                    .ok_or_else(|| IlpError::MissingValue(v.name.clone()))
            })
            .collect()
    }
}

/// A value for every variable, keyed by variable name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    values: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Value rounded to the nearest integer, treating absent names as 0.
    pub fn int(&self, name: &str) -> i64 {
        self.get(name).map_or(0, |v| v.round() as i64)
    }

    pub fn is_one(&self, name: &str) -> bool {
        self.int(name) == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
