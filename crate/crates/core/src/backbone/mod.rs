//! Multi-hop backbone among the installed FFDs: which FFDs become gateways,
//! the parent of every router, ancestry, gateway management, hop counts,
//! and traffic capacity.
//!
//! Hop counts include the node itself: a gateway has `h = 1`, its direct
//! children `h = 2`, and so on.
//!
//! Two exact solution routes are provided. [`BackboneMethod::Ilp`] solves the
//! linear model with the generic branch-and-bound, adding the cubic
//! transitivity rows lazily. [`BackboneMethod::Search`] enumerates gateway
//! sets with a distance-based bound and builds shortest-path forests, falling
//! back to the linear model (with the gateways fixed) only when capacity
//! binds. Both produce assignments of the same model.

mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::SensorCounts;
use crate::family::Family;
use crate::ilp::{
    self, Assignment, Budget, Comparator, IlpError, LinearExpr, LinearModel, SolveStatus,
    VarId, VarKind,
};
use crate::streetgraph::{connected_components, StreetGraph, WirelessLinkSet};

pub const DEFAULT_MAX_HOPS: u32 = 10;
pub const DEFAULT_ROUTER_CAPACITY: f64 = 100.0;
pub const DEFAULT_GATEWAY_CAPACITY: f64 = 1000.0;
pub const DEFAULT_PER_SENSOR_RATE: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum BackboneError {
    #[error("FFD set is empty")]
    EmptyFfd,
    #[error("unknown intersection {0}")]
    UnknownNode(usize),
    #[error("no packet rate for FFD {0}")]
    MissingRate(usize),
    #[error("invalid backbone parameters: {0}")]
    InvalidParams(String),
    #[error("{budget} gateways cannot serve {components} disconnected FFD clusters")]
    TooFewGateways { budget: usize, components: usize },
    #[error("gateway budget {budget} exceeds the {ffd} installed FFDs")]
    BudgetAboveFfd { budget: usize, ffd: usize },
    #[error("objective needs a gateway budget")]
    MissingBudget,
    #[error("link set covers {links} intersections, graph has {graph}")]
    LinkSetMismatch { links: usize, graph: usize },
    #[error(transparent)]
    Ilp(#[from] IlpError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A decoded assignment that is not a valid backbone.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{family}: {detail}")]
pub struct TopologyError {
    pub family: Family,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackboneParams {
    /// Maximum hop count, self included.
    pub max_hops: u32,
    /// Packets/s a router can carry, its own traffic included.
    pub router_capacity: f64,
    /// Packets/s a gateway can carry.
    pub gateway_capacity: f64,
    /// Fixes the number of gateways when set.
    pub gw_budget: Option<usize>,
    /// Packets/s generated by one sensor.
    pub per_sensor_rate: f64,
}

impl Default for BackboneParams {
    fn default() -> Self {
        BackboneParams {
            max_hops: DEFAULT_MAX_HOPS,
            router_capacity: DEFAULT_ROUTER_CAPACITY,
            gateway_capacity: DEFAULT_GATEWAY_CAPACITY,
            gw_budget: None,
            per_sensor_rate: DEFAULT_PER_SENSOR_RATE,
        }
    }
}

impl BackboneParams {
    pub fn with_budget(self, gateways: usize) -> Self {
        BackboneParams {
            gw_budget: Some(gateways),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), BackboneError> {
        if self.max_hops < 1 {
            return Err(BackboneError::InvalidParams("M_hop must be at least 1".into()));
        }
        if !(self.router_capacity > 0.0) || !(self.gateway_capacity >= self.router_capacity) {
            return Err(BackboneError::InvalidParams(
                "capacities must satisfy M_gw >= M_rt > 0".into(),
            ));
        }
        if !(self.per_sensor_rate >= 0.0) || !self.per_sensor_rate.is_finite() {
            return Err(BackboneError::InvalidParams(
                "per-sensor rate must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn capacity(&self, gateway: bool) -> f64 {
        if gateway {
            self.gateway_capacity
        } else {
            self.router_capacity
        }
    }
}

/// Packets/s generated at each FFD.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrafficVector {
    pub f: BTreeMap<usize, f64>,
}

impl TrafficVector {
    pub fn uniform(nodes: impl IntoIterator<Item = usize>, rate: f64) -> Self {
        TrafficVector {
            f: nodes.into_iter().map(|i| (i, rate)).collect(),
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.f.get(&i).copied().unwrap_or(0.0)
    }
}

/// `f_i = per_sensor_rate * sum_j k_ij` for every node with a segment end.
pub fn packet_rates(k: &SensorCounts, per_sensor_rate: f64) -> TrafficVector {
    let mut f = BTreeMap::new();
    for (&(i, _), &count) in &k.k {
        *f.entry(i).or_insert(0.0) += per_sensor_rate * count as f64;
    }
    TrafficVector { f }
}

/// Mean packet rate of a renewal process with the given mean inter-packet
/// interval (for instance a fitted Weibull interval distribution).
pub fn mean_rate_from_interval(mean_interval_s: f64) -> f64 {
    1.0 / mean_interval_s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneObjective {
    /// Fewest gateways.
    MinGateways,
    /// Smallest total hop count with a free number of gateways.
    MinTotalHops,
    /// Smallest total hop count with exactly `gw_budget` gateways.
    FixedGwMinHops,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackboneMethod {
    #[default]
    Search,
    Ilp,
}

/// Whether the cubic transitivity families are materialized up front.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitivityRows {
    Eager,
    Lazy,
}

/// The backbone linear model together with its variable layout.
#[derive(Debug, Clone)]
pub struct BackboneModel {
    pub model: LinearModel,
    ffd: Vec<usize>,
    b: BTreeMap<(usize, usize), VarId>,
    a: BTreeMap<(usize, usize), VarId>,
    g: BTreeMap<(usize, usize), VarId>,
    y: BTreeMap<usize, VarId>,
}

fn name(var: &str, idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(usize::to_string).collect();
    format!("{var}[{}]", parts.join(","))
}

impl BackboneModel {
    pub fn ffd(&self) -> &[usize] {
        &self.ffd
    }

    /// Rows of the cubic families: ancestry propagates up and down parent
    /// links, and management propagates along ancestry.
    fn transitivity_rows(&self) -> Vec<(String, LinearExpr)> {
        let mut rows = Vec::new();
        for (&(i, j), &b_ij) in &self.b {
            for &k in &self.ffd {
                if k == i {
                    continue;
                }
                // child i of j with ancestor k => k is an ancestor of j
                rows.push((
                    Family::AncestorsUp.row(&[i, j, k]),
                    LinearExpr::new()
                        .term(b_ij, 1.0)
                        .term(self.a[&(i, k)], 1.0)
                        .term(self.a[&(j, k)], -1.0),
                ));
                if k != j {
                    // ancestor k of parent j => k is an ancestor of i
                    rows.push((
                        Family::AncestorsDown.row(&[i, j, k]),
                        LinearExpr::new()
                            .term(b_ij, 1.0)
                            .term(self.a[&(j, k)], 1.0)
                            .term(self.a[&(i, k)], -1.0),
                    ));
                }
            }
        }
        for &i in &self.ffd {
            for &j in &self.ffd {
                if i == j {
                    continue;
                }
                for &k in &self.ffd {
                    rows.push((
                        Family::GatewayInherited.row(&[i, j, k]),
                        LinearExpr::new()
                            .term(self.a[&(i, j)], 1.0)
                            .term(self.g[&(i, k)], 1.0)
                            .term(self.g[&(j, k)], -1.0),
                    ));
                }
            }
        }
        rows
    }

    fn add_violated_transitivity(&mut self, values: &[f64]) -> usize {
        let mut added = 0;
        for (name, expr) in self.transitivity_rows() {
            if expr.eval(values) > 1.0 + ilp::FEAS_TOL {
                self.model.add_constraint(name, expr, Comparator::Le, 1.0);
                added += 1;
            }
        }
        added
    }

    fn add_all_transitivity(&mut self) {
        for (name, expr) in self.transitivity_rows() {
            self.model.add_constraint(name, expr, Comparator::Le, 1.0);
        }
    }

    /// Fix the gateway variables to exactly `gateways`.
    pub fn fix_gateways(&mut self, gateways: &BTreeSet<usize>) {
        for (&i, &v) in &self.y {
            self.model.fix(v, if gateways.contains(&i) { 1.0 } else { 0.0 });
        }
    }

    /// Encode a topology as an assignment of this model.
    pub fn assignment_for(&self, t: &BackboneTopology) -> Assignment {
        let mut a = Assignment::new();
        let bit = |b: bool| if b { 1.0 } else { 0.0 };
        for &i in &self.ffd {
            a.set(name("x", &[i]), 1.0);
            a.set(name("y", &[i]), bit(t.is_gateway(i)));
            a.set(name("h", &[i]), t.hop.get(&i).copied().unwrap_or(0) as f64);
        }
        for &(i, j) in self.b.keys() {
            a.set(name("b", &[i, j]), bit(t.parents.get(&i) == Some(&j)));
        }
        for &(i, j) in self.a.keys() {
            let anc = t.ancestors.get(&i).is_some_and(|s| s.contains(&j));
            a.set(name("a", &[i, j]), bit(anc));
            a.set(name("g", &[i, j]), bit(t.gateway_of.get(&i) == Some(&j)));
        }
        a
    }
}

fn validate_inputs(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    f: &TrafficVector,
    p: &BackboneParams,
) -> Result<(), BackboneError> {
    p.validate()?;
    if ffd.is_empty() {
        return Err(BackboneError::EmptyFfd);
    }
    if w.node_count() != g.node_count() {
        return Err(BackboneError::LinkSetMismatch {
            links: w.node_count(),
            graph: g.node_count(),
        });
    }
    for &i in ffd {
        if i >= g.node_count() {
            return Err(BackboneError::UnknownNode(i));
        }
        match f.f.get(&i) {
            Some(v) if v.is_finite() && *v >= 0.0 => {}
            _ => return Err(BackboneError::MissingRate(i)),
        }
    }
    Ok(())
}

fn check_budget(
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    p: &BackboneParams,
    objective: BackboneObjective,
) -> Result<(), BackboneError> {
    let Some(budget) = p.gw_budget else {
        return match objective {
            BackboneObjective::FixedGwMinHops => Err(BackboneError::MissingBudget),
            _ => Ok(()),
        };
    };
    if budget > ffd.len() {
        return Err(BackboneError::BudgetAboveFfd {
            budget,
            ffd: ffd.len(),
        });
    }
    let components = connected_components(w, ffd).len();
    if budget < components {
        return Err(BackboneError::TooFewGateways { budget, components });
    }
    Ok(())
}

/// The complete backbone model with every transitivity row materialized.
pub fn build_backbone_model(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    f: &TrafficVector,
    p: &BackboneParams,
    objective: BackboneObjective,
) -> Result<BackboneModel, BackboneError> {
    build_backbone_model_with(g, w, ffd, f, p, objective, TransitivityRows::Eager)
}

pub fn build_backbone_model_with(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    f: &TrafficVector,
    p: &BackboneParams,
    objective: BackboneObjective,
    rows: TransitivityRows,
) -> Result<BackboneModel, BackboneError> {
    validate_inputs(g, w, ffd, f, p)?;
    check_budget(w, ffd, p, objective)?;
    let nodes: Vec<usize> = ffd.iter().copied().collect();
    let m_count = nodes.len() as f64;
    let mut m = LinearModel::new();

    let mut x = BTreeMap::new();
    for &i in &nodes {
        let v = m.add_binary(name("x", &[i]));
        m.fix(v, 1.0);
        x.insert(i, v);
    }
    let y: BTreeMap<usize, VarId> = nodes
        .iter()
        .map(|&i| (i, m.add_binary(name("y", &[i]))))
        .collect();
    let mut b = BTreeMap::new();
    for &i in &nodes {
        for &j in &nodes {
            if i != j && w.linked(i, j) {
                b.insert((i, j), m.add_binary(name("b", &[i, j])));
            }
        }
    }
    let mut a = BTreeMap::new();
    for &i in &nodes {
        for &j in &nodes {
            a.insert((i, j), m.add_binary(name("a", &[i, j])));
        }
    }
    let mut gv = BTreeMap::new();
    for &i in &nodes {
        for &j in &nodes {
            gv.insert((i, j), m.add_binary(name("g", &[i, j])));
        }
    }
    let h: BTreeMap<usize, VarId> = nodes
        .iter()
        .map(|&i| (i, m.add_var(name("h", &[i]), VarKind::Integer, 1.0, m_count)))
        .collect();

    use Comparator::{Eq, Le};
    let e = LinearExpr::new;
    for &i in &nodes {
        m.add_constraint(
            Family::GatewayIsFfd.row(&[i]),
            e().term(y[&i], 1.0).term(x[&i], -1.0),
            Le,
            0.0,
        );
        let mut parents = e().term(x[&i], -1.0).term(y[&i], 1.0);
        for &j in &nodes {
            if let Some(&bij) = b.get(&(i, j)) {
                parents.add(bij, 1.0);
            }
        }
        m.add_constraint(Family::ParentCount.row(&[i]), parents, Eq, 0.0);
        m.add_constraint(
            Family::SelfAncestor.row(&[i]),
            e().term(a[&(i, i)], 1.0).term(x[&i], -1.0),
            Eq,
            0.0,
        );
        m.add_constraint(
            Family::GatewaySelf.row(&[i]),
            e().term(gv[&(i, i)], 1.0).term(y[&i], -1.0),
            Eq,
            0.0,
        );
        let mut managed = e().term(x[&i], -1.0);
        let mut hops = e().term(h[&i], -1.0);
        for &j in &nodes {
            managed.add(gv[&(i, j)], 1.0);
            hops.add(a[&(i, j)], 1.0);
        }
        m.add_constraint(Family::GatewayCount.row(&[i]), managed, Eq, 0.0);
        m.add_constraint(Family::HopCount.row(&[i]), hops, Eq, 0.0);
        m.add_constraint(
            Family::HopMax.row(&[i]),
            e().term(h[&i], 1.0),
            Le,
            p.max_hops as f64,
        );
        let mut load = e().term(y[&i], -(p.gateway_capacity - p.router_capacity));
        for &k in &nodes {
            load.add(a[&(k, i)], f.get(k));
        }
        m.add_constraint(Family::TrafficLoad.row(&[i]), load, Le, p.router_capacity);
    }
    for (&(i, j), &bij) in &b {
        m.add_constraint(
            Family::ParentIsAncestor.row(&[i, j]),
            e().term(bij, 1.0).term(a[&(i, j)], -1.0),
            Le,
            0.0,
        );
        if i < j {
            m.add_constraint(
                Family::ParentOneWay.row(&[i, j]),
                e().term(bij, 1.0).term(b[&(j, i)], 1.0),
                Le,
                1.0,
            );
        }
    }
    for &i in &nodes {
        for &j in &nodes {
            if i == j {
                continue;
            }
            m.add_constraint(
                Family::AncestorsAreFfds.row(&[i, j, 0]),
                e().term(a[&(i, j)], 1.0).term(x[&i], -1.0),
                Le,
                0.0,
            );
            m.add_constraint(
                Family::AncestorsAreFfds.row(&[i, j, 1]),
                e().term(a[&(i, j)], 1.0).term(x[&j], -1.0),
                Le,
                0.0,
            );
            if i < j {
                m.add_constraint(
                    Family::AncestorOneWay.row(&[i, j]),
                    e().term(a[&(i, j)], 1.0).term(a[&(j, i)], 1.0),
                    Le,
                    1.0,
                );
                m.add_constraint(
                    Family::GatewayOneWay.row(&[i, j]),
                    e().term(gv[&(i, j)], 1.0).term(gv[&(j, i)], 1.0),
                    Le,
                    1.0,
                );
            }
            m.add_constraint(
                Family::GatewayInstalled.row(&[i, j]),
                e().term(gv[&(i, j)], 1.0).term(y[&j], -1.0),
                Le,
                0.0,
            );
            m.add_constraint(
                Family::GatewayIsAncestor.row(&[i, j]),
                e().term(gv[&(i, j)], 1.0).term(a[&(i, j)], -1.0),
                Le,
                0.0,
            );
            m.add_constraint(
                Family::RootAncestors.row(&[i, j]),
                e().term(a[&(i, j)], 1.0).term(y[&i], 1.0),
                Le,
                1.0,
            );
        }
    }

    let gateways: LinearExpr = y.values().map(|&v| (v, 1.0)).collect();
    let total_hops: LinearExpr = h.values().map(|&v| (v, 1.0)).collect();
    if let Some(budget) = p.gw_budget {
        m.add_constraint("gw_budget", gateways.clone(), Eq, budget as f64);
    }
    match objective {
        BackboneObjective::MinGateways => m.set_objective(gateways, 0.0),
        BackboneObjective::MinTotalHops | BackboneObjective::FixedGwMinHops => {
            m.set_objective(total_hops, 0.0)
        }
    }

    let mut bm = BackboneModel {
        model: m,
        ffd: nodes,
        b,
        a,
        g: gv,
        y,
    };
    if rows == TransitivityRows::Eager {
        bm.add_all_transitivity();
    }
    Ok(bm)
}

/// Decoded backbone: a forest of routers rooted at gateways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneTopology {
    /// Router -> parent.
    pub parents: BTreeMap<usize, usize>,
    /// FFD -> ancestors, itself included.
    pub ancestors: BTreeMap<usize, BTreeSet<usize>>,
    /// FFD -> managing gateway.
    pub gateway_of: BTreeMap<usize, usize>,
    /// FFD -> hop count (number of ancestors).
    pub hop: BTreeMap<usize, usize>,
    /// FFDs grouped by gateway, ordered by gateway id.
    pub clusters: Vec<Vec<usize>>,
}

impl BackboneTopology {
    pub fn is_gateway(&self, i: usize) -> bool {
        self.gateway_of.get(&i) == Some(&i)
    }

    pub fn gateways(&self) -> BTreeSet<usize> {
        self.gateway_of
            .iter()
            .filter(|(i, g)| i == g)
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn total_hops(&self) -> usize {
        self.hop.values().sum()
    }

    /// Build from gateways and a parent map; ancestry, management, and hops
    /// are derived by walking up the forest.
    pub fn from_forest(
        ffd: &BTreeSet<usize>,
        parents: BTreeMap<usize, usize>,
    ) -> Result<Self, TopologyError> {
        let mut ancestors = BTreeMap::new();
        let mut gateway_of = BTreeMap::new();
        let mut hop = BTreeMap::new();
        for &i in ffd {
            let mut chain = BTreeSet::from([i]);
            let mut at = i;
            while let Some(&p) = parents.get(&at) {
                if !ffd.contains(&p) {
                    return Err(TopologyError {
                        family: Family::AncestorsAreFfds,
                        detail: format!("parent {p} of {at} is not an FFD"),
                    });
                }
                if !chain.insert(p) {
                    return Err(TopologyError {
                        family: Family::AncestorOneWay,
                        detail: format!("parent links through {i} form a cycle"),
                    });
                }
                at = p;
            }
            hop.insert(i, chain.len());
            ancestors.insert(i, chain);
            gateway_of.insert(i, at);
        }
        let mut by_gw: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&i, &gw) in &gateway_of {
            by_gw.entry(gw).or_default().push(i);
        }
        Ok(BackboneTopology {
            parents,
            ancestors,
            gateway_of,
            hop,
            clusters: by_gw.into_values().collect(),
        })
    }
}

/// Decode and verify a backbone assignment over `ffd`.
pub fn extract_topology(
    a: &Assignment,
    ffd: &BTreeSet<usize>,
) -> Result<BackboneTopology, TopologyError> {
    let err = |family: Family, detail: String| TopologyError { family, detail };
    let is = |var: &str, idx: &[usize]| a.is_one(&name(var, idx));
    let mut parents = BTreeMap::new();
    for &i in ffd {
        let ps: Vec<usize> = ffd.iter().copied().filter(|&j| is("b", &[i, j])).collect();
        if let Some(&j) = ps.iter().find(|&&j| is("b", &[j, i])) {
            return Err(err(
                Family::ParentOneWay,
                format!("{i} and {j} are each other's parent"),
            ));
        }
        if ps.contains(&i) {
            return Err(err(Family::NoSelfParent, format!("{i} is its own parent")));
        }
        let gateway = is("y", &[i]);
        match (gateway, ps.as_slice()) {
            (true, []) => {}
            (false, [p]) => {
                parents.insert(i, *p);
            }
            _ => {
                return Err(err(
                    Family::ParentCount,
                    format!("{i} has {} parents (gateway: {gateway})", ps.len()),
                ))
            }
        }
    }
    let topo = BackboneTopology::from_forest(ffd, parents)?;
    for &i in ffd {
        for &j in ffd {
            let expect = topo.ancestors[&i].contains(&j);
            if is("a", &[i, j]) != expect {
                return Err(err(
                    Family::AncestorsDown,
                    format!("a[{i},{j}] disagrees with the parent forest"),
                ));
            }
            if is("g", &[i, j]) != (topo.gateway_of[&i] == j) {
                return Err(err(
                    Family::GatewayIsAncestor,
                    format!("g[{i},{j}] disagrees with the forest root"),
                ));
            }
        }
        if a.int(&name("h", &[i])) != topo.hop[&i] as i64 {
            return Err(err(
                Family::HopCount,
                format!("h[{i}] is not the number of ancestors"),
            ));
        }
    }
    Ok(topo)
}

/// Mean hop count over the FFDs.
pub fn avg_hop(t: &BackboneTopology) -> Result<f64, BackboneError> {
    if t.hop.is_empty() {
        return Err(BackboneError::EmptyFfd);
    }
    Ok(t.total_hops() as f64 / t.hop.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneSolution {
    pub topology: BackboneTopology,
    pub assignment: Assignment,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackboneOutcome {
    Solved(BackboneSolution),
    Infeasible,
    Limit(SolveStatus),
}

impl BackboneOutcome {
    pub fn status(&self) -> SolveStatus {
        match self {
            BackboneOutcome::Solved(_) => SolveStatus::Optimal,
            BackboneOutcome::Infeasible => SolveStatus::Infeasible,
            BackboneOutcome::Limit(s) => *s,
        }
    }

    pub fn solution(&self) -> Option<&BackboneSolution> {
        match self {
            BackboneOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

/// Solve the backbone for the FFD set `ffd`.
pub fn solve_backbone(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    f: &TrafficVector,
    p: &BackboneParams,
    objective: BackboneObjective,
    method: BackboneMethod,
    budget: &Budget,
) -> Result<BackboneOutcome, BackboneError> {
    validate_inputs(g, w, ffd, f, p)?;
    check_budget(w, ffd, p, objective)?;
    match method {
        BackboneMethod::Ilp => {
            let bm = build_backbone_model_with(g, w, ffd, f, p, objective, TransitivityRows::Lazy)?;
            solve_lazy(bm, budget)
        }
        BackboneMethod::Search => search::solve(g, w, ffd, f, p, objective, budget),
    }
}

/// Branch-and-bound on `bm`, adding violated transitivity rows and
/// re-solving until none is violated.
pub(crate) fn solve_lazy(
    mut bm: BackboneModel,
    budget: &Budget,
) -> Result<BackboneOutcome, BackboneError> {
    let ffd: BTreeSet<usize> = bm.ffd.iter().copied().collect();
    loop {
        let report = ilp::solve_within(&bm.model, budget)?;
        match report.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Ok(BackboneOutcome::Infeasible),
            s => return Ok(BackboneOutcome::Limit(s)),
        }
        let assignment = report.assignment.expect("optimal");
        let values = bm.model.dense_values(&assignment)?;
        if bm.add_violated_transitivity(&values) > 0 {
            continue;
        }
        let topology = extract_topology(&assignment, &ffd)?;
        return Ok(BackboneOutcome::Solved(BackboneSolution {
            topology,
            assignment,
            objective: report.objective.expect("optimal"),
        }));
    }
}
