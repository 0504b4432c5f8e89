//! Depth-first branch-and-bound over bounded integer domains.
//!
//! Nodes are pruned by bound propagation on the sparse rows and by an
//! objective bound made of the per-variable minimum plus a packing of
//! row-wise fractional-knapsack repair costs over variable-disjoint rows.
//! Branching always takes the first unfixed variable in declaration order and
//! explores its smallest value first, so the first optimum reached is the
//! lexicographically smallest one. Incumbents found by the greedy dive may be
//! lexicographically larger; ties are only pruned against incumbents that
//! precede the current node in that order.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use super::model::{Comparator, LinearModel, VarKind};
use super::{Assignment, IlpError, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_nodes: u64,
    pub max_seconds: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 50_000_000,
            max_seconds: 3600.0,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), IlpError> {
        if self.max_nodes == 0 {
            return Err(IlpError::InvalidLimit("max_nodes must be positive".into()));
        }
        if !(self.max_seconds > 0.0) {
            return Err(IlpError::InvalidLimit("max_seconds must be positive".into()));
        }
        Ok(())
    }

    /// Start the clock. A budget can be shared by several consecutive solves.
    pub fn start(&self) -> Result<Budget, IlpError> {
        self.validate()?;
        let secs = self.max_seconds.min(1e9);
        Ok(Budget {
            max_nodes: self.max_nodes,
            deadline: Instant::now() + Duration::from_secs_f64(secs),
        })
    }
}

/// Limits anchored to a wall-clock deadline.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_nodes: u64,
    pub deadline: Instant,
}

impl Budget {
    pub fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self, SolveStatus::NodeLimit | SolveStatus::TimeLimit)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Present iff `status` is `Optimal`.
    pub assignment: Option<Assignment>,
    /// Best solution found before a limit was hit.
    pub incumbent: Option<Assignment>,
    pub objective: Option<f64>,
    pub nodes: u64,
    pub wall_time: Duration,
}

pub fn solve(m: &LinearModel, limits: Limits) -> Result<SolveReport, IlpError> {
    solve_within(m, &limits.start()?)
}

pub fn solve_within(m: &LinearModel, budget: &Budget) -> Result<SolveReport, IlpError> {
    let started = Instant::now();
    m.validate()?;
    let problem = Compiled::new(m)?;
    let mut search = Search {
        p: &problem,
        budget,
        nodes: 0,
        incumbent: None,
        stamp: vec![0; problem.n],
        epoch: 0,
    };
    let status = search.run();
    let values = search
        .incumbent
        .as_ref()
        .map(|(vals, _)| vals.iter().map(|&v| v as f64).collect::<Vec<_>>());
    let objective = values.as_ref().map(|v| m.objective_value(v));
    let as_assignment = values.map(|v| m.assignment_from_values(&v));
    let (assignment, incumbent) = match status {
        SolveStatus::Optimal => (as_assignment, None),
        _ => (None, as_assignment),
    };
    Ok(SolveReport {
        status,
        assignment,
        incumbent,
        objective,
        nodes: search.nodes,
        wall_time: started.elapsed(),
    })
}

/// Ranged row `lo <= sum(c * x) <= hi`.
struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

struct Compiled {
    n: usize,
    rows: Vec<Row>,
    var_rows: Vec<Vec<usize>>,
    obj: Vec<f64>,
    obj_const: f64,
    integral_obj: bool,
    root_lo: Vec<i64>,
    root_hi: Vec<i64>,
}

impl Compiled {
    fn new(m: &LinearModel) -> Result<Self, IlpError> {
        let n = m.num_vars();
        let mut root_lo = Vec::with_capacity(n);
        let mut root_hi = Vec::with_capacity(n);
        for v in m.variables() {
            if v.kind == VarKind::Continuous {
                return Err(IlpError::ContinuousUnsupported(v.name.clone()));
            }
            if !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(IlpError::UnboundedInteger(v.name.clone()));
            }
            root_lo.push((v.lower - FEAS_TOL).ceil() as i64);
            root_hi.push((v.upper + FEAS_TOL).floor() as i64);
        }
        let mut var_rows = vec![Vec::new(); n];
        let rows: Vec<Row> = m
            .constraints()
            .iter()
            .enumerate()
            .map(|(r, c)| {
                for &(v, _) in c.expr.terms() {
                    var_rows[v.0].push(r);
                }
                let (lo, hi) = match c.cmp {
                    Comparator::Le => (f64::NEG_INFINITY, c.rhs),
                    Comparator::Ge => (c.rhs, f64::INFINITY),
                    Comparator::Eq => (c.rhs, c.rhs),
                };
                Row {
                    terms: c.expr.terms().iter().map(|&(v, c)| (v.0, c)).collect(),
                    lo,
                    hi,
                }
            })
            .collect();
        let mut obj = vec![0.0; n];
        for &(v, c) in m.objective().expr.terms() {
            obj[v.0] = c;
        }
        let integral_obj = obj.iter().all(|c| c.fract() == 0.0);
        Ok(Compiled {
            n,
            rows,
            var_rows,
            obj,
            obj_const: m.objective().constant,
            integral_obj,
            root_lo,
            root_hi,
        })
    }
}

#[derive(Clone)]
struct Domain {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Domain {
    fn first_unfixed(&self) -> Option<usize> {
        (0..self.lo.len()).find(|&i| self.lo[i] < self.hi[i])
    }
}

struct Search<'a> {
    p: &'a Compiled,
    budget: &'a Budget,
    nodes: u64,
    incumbent: Option<(Vec<i64>, f64)>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Search<'_> {
    fn run(&mut self) -> SolveStatus {
        let mut root = Domain {
            lo: self.p.root_lo.clone(),
            hi: self.p.root_hi.clone(),
        };
        if root.lo.iter().zip(&root.hi).any(|(l, h)| l > h) {
            return SolveStatus::Infeasible;
        }
        if !self.propagate(&mut root, (0..self.p.rows.len()).collect()) {
            return SolveStatus::Infeasible;
        }
        if let Some(vals) = self.dive(&root) {
            let obj = self.value_of(&vals);
            self.incumbent = Some((vals, obj));
        }

        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if self.nodes >= self.budget.max_nodes {
                return SolveStatus::NodeLimit;
            }
            if self.budget.expired() {
                return SolveStatus::TimeLimit;
            }
            self.nodes += 1;

            let Some(bound) = self.bound(&node) else {
                continue;
            };
            let branch = node.first_unfixed();
            if let Some((inc, inc_obj)) = &self.incumbent {
                if bound > inc_obj + FEAS_TOL {
                    continue;
                }
                if bound >= inc_obj - FEAS_TOL {
                    let prefix = branch.unwrap_or(self.p.n);
                    let earlier = match inc[..prefix].cmp(&node.lo[..prefix]) {
                        Ordering::Less => true,
                        Ordering::Equal => prefix == self.p.n,
                        Ordering::Greater => false,
                    };
                    if earlier {
                        continue;
                    }
                }
            }
            let Some(k) = branch else {
                self.offer(node.lo);
                continue;
            };

            let mut up = node.clone();
            up.lo[k] += 1;
            let mut down = node;
            down.hi[k] = down.lo[k];
            if self.propagate(&mut up, self.p.var_rows[k].clone()) {
                stack.push(up);
            }
            if self.propagate(&mut down, self.p.var_rows[k].clone()) {
                stack.push(down);
            }
        }
        if self.incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        }
    }

    fn value_of(&self, vals: &[i64]) -> f64 {
        self.p.obj_const
            + vals
                .iter()
                .zip(&self.p.obj)
                .map(|(&v, &c)| v as f64 * c)
                .sum::<f64>()
    }

    fn offer(&mut self, vals: Vec<i64>) {
        debug_assert!(self.p.rows.iter().all(|r| {
            let act: f64 = r.terms.iter().map(|&(v, c)| c * vals[v] as f64).sum();
            act >= r.lo - FEAS_TOL && act <= r.hi + FEAS_TOL
        }));
        let obj = self.value_of(&vals);
        let better = match &self.incumbent {
            None => true,
            Some((inc, inc_obj)) => {
                obj < inc_obj - FEAS_TOL || (obj <= inc_obj + FEAS_TOL && vals < *inc)
            }
        };
        if better {
            self.incumbent = Some((vals, obj));
        }
    }

    /// Greedy dive: fix variables in order to their objective-preferred value,
    /// falling back to the other end once. No backtracking.
    fn dive(&mut self, root: &Domain) -> Option<Vec<i64>> {
        let mut d = root.clone();
        while let Some(k) = d.first_unfixed() {
            let prefer_high = self.p.obj[k] < 0.0;
            let mut fixed = false;
            for high in [prefer_high, !prefer_high] {
                let mut trial = d.clone();
                let v = if high { trial.hi[k] } else { trial.lo[k] };
                trial.lo[k] = v;
                trial.hi[k] = v;
                if self.propagate(&mut trial, self.p.var_rows[k].clone()) {
                    d = trial;
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                return None;
            }
        }
        Some(d.lo)
    }

    /// Tighten bounds until fixpoint. Returns false on infeasibility.
    fn propagate(&mut self, d: &mut Domain, mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.p.rows.len()];
        for &r in &queue {
            queued[r] = true;
        }
        while let Some(r) = queue.pop() {
            queued[r] = false;
            let row = &self.p.rows[r];
            let (mut min_act, mut max_act) = (0.0, 0.0);
            for &(v, c) in &row.terms {
                let (a, b) = (c * d.lo[v] as f64, c * d.hi[v] as f64);
                min_act += a.min(b);
                max_act += a.max(b);
            }
            if min_act > row.hi + FEAS_TOL || max_act < row.lo - FEAS_TOL {
                return false;
            }
            for &(v, c) in &row.terms {
                let (lo_v, hi_v) = (d.lo[v], d.hi[v]);
                let contrib_min = (c * lo_v as f64).min(c * hi_v as f64);
                let contrib_max = (c * lo_v as f64).max(c * hi_v as f64);
                let (mut new_lo, mut new_hi) = (lo_v, hi_v);
                if row.hi.is_finite() {
                    let slack = row.hi - (min_act - contrib_min);
                    if c > 0.0 {
                        new_hi = new_hi.min((slack / c + FEAS_TOL).floor() as i64);
                    } else {
                        new_lo = new_lo.max((slack / c - FEAS_TOL).ceil() as i64);
                    }
                }
                if row.lo.is_finite() {
                    let need = row.lo - (max_act - contrib_max);
                    if c > 0.0 {
                        new_lo = new_lo.max((need / c - FEAS_TOL).ceil() as i64);
                    } else {
                        new_hi = new_hi.min((need / c + FEAS_TOL).floor() as i64);
                    }
                }
                if new_lo > new_hi {
                    return false;
                }
                if new_lo != lo_v || new_hi != hi_v {
                    d.lo[v] = new_lo;
                    d.hi[v] = new_hi;
                    let (a, b) = (c * new_lo as f64, c * new_hi as f64);
                    min_act += a.min(b) - contrib_min;
                    max_act += a.max(b) - contrib_max;
                    for &r2 in &self.p.var_rows[v] {
                        if !queued[r2] {
                            queued[r2] = true;
                            queue.push(r2);
                        }
                    }
                }
            }
        }
        true
    }

    /// Lower bound on the objective within `d`, or `None` if some row cannot
    /// be satisfied at all.
    fn bound(&mut self, d: &Domain) -> Option<f64> {
        let p = self.p;
        let cheap = |v: usize| -> i64 {
            if p.obj[v] < 0.0 {
                d.hi[v]
            } else {
                d.lo[v]
            }
        };
        let mut bound = p.obj_const;
        for v in 0..p.n {
            bound += p.obj[v] * cheap(v) as f64;
        }

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let mut helpful: Vec<(f64, f64, usize)> = Vec::new();
        for row in &p.rows {
            for (sign, target) in [(1.0, row.lo), (-1.0, -row.hi)] {
                if !target.is_finite() {
                    continue;
                }
                // sign * row >= target, with free-cost variables at their best.
                let mut act = 0.0;
                helpful.clear();
                for &(v, c) in &row.terms {
                    let a = sign * c;
                    if p.obj[v] == 0.0 {
                        act += (a * d.lo[v] as f64).max(a * d.hi[v] as f64);
                        continue;
                    }
                    let base = cheap(v);
                    act += a * base as f64;
                    let range = (d.hi[v] - d.lo[v]) as f64;
                    let improves = (a > 0.0 && base == d.lo[v]) || (a < 0.0 && base == d.hi[v]);
                    if range > 0.0 && improves {
                        helpful.push((p.obj[v].abs() / a.abs(), a.abs() * range, v));
                    }
                }
                let mut deficit = target - act;
                if deficit <= FEAS_TOL {
                    continue;
                }
                if helpful.iter().any(|&(_, _, v)| self.stamp[v] == self.epoch) {
                    // Overlaps an already-charged row; only feasibility matters.
                    let gain: f64 = helpful.iter().map(|h| h.1).sum();
                    if gain < deficit - FEAS_TOL {
                        return None;
                    }
                    continue;
                }
                helpful.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
                let mut extra = 0.0;
                for &(ratio, gain, _) in &helpful {
                    let used = gain.min(deficit);
                    extra += ratio * used;
                    deficit -= used;
                    if deficit <= FEAS_TOL {
                        break;
                    }
                }
                if deficit > FEAS_TOL {
                    return None;
                }
                for &(_, _, v) in &helpful {
                    self.stamp[v] = self.epoch;
                }
                bound += extra;
            }
        }
        if p.integral_obj {
            let frac = p.obj_const - p.obj_const.floor();
            bound = (bound - frac - FEAS_TOL).ceil() + frac;
        }
        Some(bound)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{check, LinearExpr};
    use super::*;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn single_binary_lower_bound() {
        let mut m = LinearModel::new();
        let x = m.add_binary("x");
        m.add_constraint("c", LinearExpr::new().term(x, 1.0), Comparator::Ge, 1.0);
        m.set_objective(LinearExpr::new().term(x, 1.0), 0.0);
        let r = solve(&m, limits()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(1.0));
        assert_eq!(r.assignment.unwrap().get("x"), Some(1.0));
    }

    #[test]
    fn detects_infeasible() {
        let mut m = LinearModel::new();
        let x0 = m.add_binary("x0");
        let x1 = m.add_binary("x1");
        m.add_constraint(
            "c",
            LinearExpr::new().term(x0, 1.0).term(x1, 1.0),
            Comparator::Ge,
            3.0,
        );
        m.set_objective(LinearExpr::new().term(x0, 1.0).term(x1, 1.0), 0.0);
        let r = solve(&m, limits()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.assignment.is_none());
    }

    #[test]
    fn rejects_bad_limits_and_continuous() {
        let m = LinearModel::new();
        let bad = Limits {
            max_nodes: 0,
            max_seconds: 1.0,
        };
        assert!(matches!(solve(&m, bad), Err(IlpError::InvalidLimit(_))));
        let bad = Limits {
            max_nodes: 10,
            max_seconds: 0.0,
        };
        assert!(matches!(solve(&m, bad), Err(IlpError::InvalidLimit(_))));

        let mut m = LinearModel::new();
        m.add_var("g", VarKind::Continuous, 0.0, 1.0);
        assert!(matches!(
            solve(&m, limits()),
            Err(IlpError::ContinuousUnsupported(_))
        ));
    }

    #[test]
    fn ties_break_lexicographically() {
        // Any single x_i = 1 is optimal; the smallest vector is (0, 0, 1).
        let mut m = LinearModel::new();
        let xs: Vec<_> = (0..3).map(|i| m.add_binary(format!("x{i}"))).collect();
        let all: LinearExpr = xs.iter().map(|&x| (x, 1.0)).collect();
        m.add_constraint("c", all.clone(), Comparator::Ge, 1.0);
        m.set_objective(all, 0.0);
        let a = solve(&m, limits()).unwrap().assignment.unwrap();
        assert_eq!(
            (a.int("x0"), a.int("x1"), a.int("x2")),
            (0, 0, 1)
        );
    }

    #[test]
    fn integer_variables_and_negative_costs() {
        // max 3a + 2b  s.t. a + b <= 4, a <= 3, b integer in [0, 5]
        let mut m = LinearModel::new();
        let a = m.add_var("a", VarKind::Integer, 0.0, 3.0);
        let b = m.add_var("b", VarKind::Integer, 0.0, 5.0);
        m.add_constraint(
            "cap",
            LinearExpr::new().term(a, 1.0).term(b, 1.0),
            Comparator::Le,
            4.0,
        );
        m.set_objective(LinearExpr::new().term(a, -3.0).term(b, -2.0), 0.0);
        let r = solve(&m, limits()).unwrap();
        assert_eq!(r.objective, Some(-11.0));
        let asg = r.assignment.unwrap();
        assert!(check(&m, &asg, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let mut m = LinearModel::new();
        let xs: Vec<_> = (0..12).map(|i| m.add_binary(format!("x{i}"))).collect();
        for w in xs.windows(2) {
            m.add_constraint(
                "e",
                LinearExpr::new().term(w[0], 1.0).term(w[1], 1.0),
                Comparator::Ge,
                1.0,
            );
        }
        m.set_objective(xs.iter().map(|&x| (x, 1.0)).collect(), 0.0);
        let r = solve(
            &m,
            Limits {
                max_nodes: 1,
                max_seconds: 10.0,
            },
        )
        .unwrap();
        assert_eq!(r.status, SolveStatus::NodeLimit);
        assert!(r.assignment.is_none());
        assert!(r.incumbent.is_some());
    }
}
