//! Deployment plan documents and their independent validation.
//!
//! A plan stores every relation of the model explicitly: FFDs, gateways,
//! parent links, ancestry and management pairs, hop counts, managed lengths,
//! sensor counts, and packet rates. [`validate`] re-checks each constraint
//! family directly on those sets, without going through the solver's model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbone::{BackboneParams, BackboneSolution, BackboneTopology, TrafficVector};
use crate::coverage::{self, CoverPlan, CoverSelection, CoverageParams};
use crate::family::Family;
use crate::ilp::{Assignment, SolveStatus};
use crate::streetgraph::{GraphError, LinkMode, StreetGraph};

pub const PLAN_FORMAT: &str = "parkmesh-plan/1";

const TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported plan format {0:?}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub max_sensors: u64,
    pub max_hops: u32,
    pub router_capacity: f64,
    pub gateway_capacity: f64,
    pub per_sensor_rate: f64,
    pub links: LinkMode,
}

impl PlanParams {
    pub fn new(c: &CoverageParams, b: &BackboneParams, links: LinkMode) -> Self {
        PlanParams {
            max_sensors: c.max_sensors,
            max_hops: b.max_hops,
            router_capacity: b.router_capacity,
            gateway_capacity: b.gateway_capacity,
            per_sensor_rate: b.per_sensor_rate,
            links,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub from: usize,
    pub to: usize,
    pub managed_len_m: f64,
    pub sensors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanObjectives {
    pub ffd_count: usize,
    pub energy: f64,
    pub gateway_count: usize,
    pub total_hops: usize,
    pub avg_hop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub format: String,
    pub status: String,
    pub cover_selection: CoverSelection,
    pub params: PlanParams,
    pub ffd: Vec<usize>,
    pub gateways: Vec<usize>,
    pub gamma: Vec<GammaEntry>,
    /// `[i, j]`: j is the parent of i.
    pub parent_links: Vec<[usize; 2]>,
    /// `[i, j]`: j is an ancestor of i (i itself included).
    pub ancestry: Vec<[usize; 2]>,
    /// `[i, j]`: gateway j manages i.
    pub management: Vec<[usize; 2]>,
    pub hops: BTreeMap<usize, usize>,
    pub rates: BTreeMap<usize, f64>,
    pub objectives: PlanObjectives,
}

impl DeploymentPlan {
    pub fn assemble(
        params: PlanParams,
        cover: &CoverPlan,
        rates: &TrafficVector,
        topology: &BackboneTopology,
    ) -> Self {
        let gamma = cover
            .gamma
            .managed_len_m
            .iter()
            .map(|(&(from, to), &len)| GammaEntry {
                from,
                to,
                managed_len_m: len,
                sensors: cover.counts.k.get(&(from, to)).copied().unwrap_or(0),
            })
            .collect();
        let ancestry = topology
            .ancestors
            .iter()
            .flat_map(|(&i, s)| s.iter().map(move |&j| [i, j]))
            .collect();
        let total_hops = topology.total_hops();
        DeploymentPlan {
            format: PLAN_FORMAT.into(),
            status: SolveStatus::Optimal.as_str().into(),
            cover_selection: cover.selection,
            params,
            ffd: cover.ffd.iter().copied().collect(),
            gateways: topology.gateways().into_iter().collect(),
            gamma,
            parent_links: topology.parents.iter().map(|(&i, &j)| [i, j]).collect(),
            ancestry,
            management: topology.gateway_of.iter().map(|(&i, &j)| [i, j]).collect(),
            hops: topology.hop.clone(),
            rates: cover.ffd.iter().map(|&i| (i, rates.get(i))).collect(),
            objectives: PlanObjectives {
                ffd_count: cover.ffd.len(),
                energy: cover.energy,
                gateway_count: topology.gateways().len(),
                total_hops,
                avg_hop: if cover.ffd.is_empty() {
                    0.0
                } else {
                    total_hops as f64 / cover.ffd.len() as f64
                },
            },
        }
    }

    pub fn from_solution(
        params: PlanParams,
        cover: &CoverPlan,
        rates: &TrafficVector,
        backbone: &BackboneSolution,
    ) -> Self {
        Self::assemble(params, cover, rates, &backbone.topology)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Values of `x[i]` and `gamma[i,j]` for the managed-length model.
    pub fn cover_assignment(&self, node_count: usize) -> Assignment {
        let mut a = Assignment::new();
        let ffd: BTreeSet<usize> = self.ffd.iter().copied().collect();
        for i in 0..node_count {
            a.set(format!("x[{i}]"), if ffd.contains(&i) { 1.0 } else { 0.0 });
        }
        for e in &self.gamma {
            a.set(format!("gamma[{},{}]", e.from, e.to), e.managed_len_m);
        }
        a
    }
}

pub fn parse_plan(text: &str) -> Result<DeploymentPlan, PlanError> {
    let plan: DeploymentPlan = serde_json::from_str(text)?;
    if plan.format != PLAN_FORMAT {
        return Err(PlanError::Format(plan.format));
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanViolation {
    pub family: Family,
    pub detail: String,
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.family.label(), self.detail)
    }
}

struct Relations {
    n: usize,
    x: Vec<bool>,
    y: Vec<bool>,
    b: BTreeSet<(usize, usize)>,
    a: BTreeSet<(usize, usize)>,
    g: BTreeSet<(usize, usize)>,
}

impl Relations {
    fn a(&self, i: usize, j: usize) -> i32 {
        self.a.contains(&(i, j)) as i32
    }

    fn g(&self, i: usize, j: usize) -> i32 {
        self.g.contains(&(i, j)) as i32
    }
}

struct Report(Vec<PlanViolation>);

impl Report {
    fn add(&mut self, family: Family, detail: String) {
        self.0.push(PlanViolation { family, detail });
    }
}

/// Every violated constraint of `plan` on the street graph `g`, tagged with
/// its family. Empty iff the plan is valid.
pub fn validate(plan: &DeploymentPlan, g: &StreetGraph) -> Result<Vec<PlanViolation>, PlanError> {
    let n = g.node_count();
    let w = plan.params.links.derive(g)?;
    let mut r = Report(Vec::new());
    let in_range = |i: usize| i < n;

    let mut x = vec![false; n];
    for &i in &plan.ffd {
        if in_range(i) {
            x[i] = true;
        } else {
            r.add(Family::AncestorsAreFfds, format!("FFD {i} is not an intersection"));
        }
    }
    let mut y = vec![false; n];
    for &i in &plan.gateways {
        if in_range(i) {
            y[i] = true;
        } else {
            r.add(Family::GatewayIsFfd, format!("gateway {i} is not an intersection"));
        }
    }
    let pairs = |list: &[[usize; 2]], fam: Family, what: &str, r: &mut Report| {
        let mut set = BTreeSet::new();
        for &[i, j] in list {
            if in_range(i) && in_range(j) {
                set.insert((i, j));
            } else {
                r.add(fam, format!("{what} [{i},{j}] names an unknown intersection"));
            }
        }
        set
    };
    let rel = Relations {
        n,
        b: pairs(&plan.parent_links, Family::ParentIsAncestor, "parent link", &mut r),
        a: pairs(&plan.ancestry, Family::AncestorsAreFfds, "ancestry", &mut r),
        g: pairs(&plan.management, Family::GatewayCount, "management", &mut r),
        x,
        y,
    };

    let counts = check_coverage(plan, g, &rel, &mut r);
    check_backbone(plan, &w, &rel, &mut r);
    check_traffic(plan, &rel, &counts, &mut r);
    Ok(r.0)
}

fn check_coverage(
    plan: &DeploymentPlan,
    g: &StreetGraph,
    rel: &Relations,
    r: &mut Report,
) -> Vec<u64> {
    let mut gamma: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut per_node = vec![0u64; rel.n];
    for e in &plan.gamma {
        let Some(s) = g.segment_between(e.from, e.to) else {
            r.add(
                Family::GammaWithinSegment,
                format!("gamma[{},{}] is not on a road segment", e.from, e.to),
            );
            continue;
        };
        let seg = &g.segments()[s];
        if gamma.insert((e.from, e.to), e.managed_len_m).is_some() {
            r.add(
                Family::GammaWithinSegment,
                format!("gamma[{},{}] listed twice", e.from, e.to),
            );
        }
        if !(e.managed_len_m >= -TOL && e.managed_len_m <= seg.length_m + TOL) {
            r.add(
                Family::GammaWithinSegment,
                format!(
                    "gamma[{},{}] = {} outside [0, {}]",
                    e.from, e.to, e.managed_len_m, seg.length_m
                ),
            );
        }
        if e.managed_len_m > TOL && !rel.x[e.from] {
            r.add(
                Family::FfdManagesGamma,
                format!("gamma[{},{}] > 0 without an FFD at {}", e.from, e.to, e.from),
            );
        }
        let expect = coverage::sensor_count(e.managed_len_m, seg.sensor_density_per_m);
        if e.sensors != expect {
            r.add(
                Family::SensorCount,
                format!(
                    "k[{},{}] = {} but the managed length holds {}",
                    e.from, e.to, e.sensors, expect
                ),
            );
        }
        per_node[e.from] += e.sensors;
    }
    for (_, s) in g.parking_segments() {
        let (u, v) = s.endpoints;
        let total = gamma.get(&(u, v)).unwrap_or(&0.0) + gamma.get(&(v, u)).unwrap_or(&0.0);
        if (total - s.length_m).abs() > TOL {
            r.add(
                Family::SumOfGamma,
                format!("segment {u}-{v}: managed {total} of {} m", s.length_m),
            );
        }
    }
    for (i, &k) in per_node.iter().enumerate() {
        if k > plan.params.max_sensors {
            r.add(
                Family::MaxSensors,
                format!("FFD {i} manages {k} sensors, limit {}", plan.params.max_sensors),
            );
        }
    }
    let energy: u64 = plan.gamma.iter().map(|e| coverage::end_energy(e.sensors)).sum();
    let o = &plan.objectives;
    if (o.energy - energy as f64).abs() > TOL {
        r.add(
            Family::Objective,
            format!("energy {} but the sensor counts give {energy}", o.energy),
        );
    }
    if o.ffd_count != plan.ffd.len() || rel.x.iter().filter(|&&b| b).count() != plan.ffd.len() {
        r.add(
            Family::Objective,
            format!("ffd_count {} for {} listed FFDs", o.ffd_count, plan.ffd.len()),
        );
    }
    per_node
}

fn check_backbone(
    plan: &DeploymentPlan,
    w: &crate::streetgraph::WirelessLinkSet,
    rel: &Relations,
    r: &mut Report,
) {
    let n = rel.n;
    let (x, y) = (&rel.x, &rel.y);
    let xi = |i: usize| x[i] as i32;
    let yi = |i: usize| y[i] as i32;
    for i in 0..n {
        if y[i] && !x[i] {
            r.add(Family::GatewayIsFfd, format!("gateway {i} has no FFD"));
        }
        if rel.b.contains(&(i, i)) {
            r.add(Family::NoSelfParent, format!("{i} is its own parent"));
        }
        let parents = rel.b.range((i, 0)..=(i, usize::MAX)).count() as i32;
        if parents != xi(i) - yi(i) {
            r.add(
                Family::ParentCount,
                format!("{i} has {parents} parents, expected {}", xi(i) - yi(i)),
            );
        }
        if rel.a(i, i) != xi(i) {
            r.add(Family::SelfAncestor, format!("a[{i},{i}] != x[{i}]"));
        }
        if rel.g(i, i) != yi(i) {
            r.add(Family::GatewaySelf, format!("g[{i},{i}] != y[{i}]"));
        }
        let managed = rel.g.range((i, 0)..=(i, usize::MAX)).count() as i32;
        if managed != xi(i) {
            r.add(
                Family::GatewayCount,
                format!("{i} is managed by {managed} gateways, expected {}", xi(i)),
            );
        }
        let ancestors = rel.a.range((i, 0)..=(i, usize::MAX)).count();
        match plan.hops.get(&i) {
            Some(&h) if x[i] && h == ancestors => {}
            None if !x[i] => {}
            h => r.add(
                Family::HopCount,
                format!("h[{i}] = {h:?} but {i} has {ancestors} ancestors"),
            ),
        }
        if let Some(&h) = plan.hops.get(&i) {
            if h > plan.params.max_hops as usize {
                r.add(
                    Family::HopMax,
                    format!("h[{i}] = {h} exceeds {}", plan.params.max_hops),
                );
            }
        }
    }
    for &(i, j) in &rel.b {
        if i != j && !w.linked(i, j) {
            r.add(
                Family::ParentIsAncestor,
                format!("parent link {i}->{j} has no wireless link"),
            );
        }
        if !rel.a.contains(&(i, j)) {
            r.add(Family::ParentIsAncestor, format!("parent {j} of {i} is not an ancestor"));
        }
        if i < j && rel.b.contains(&(j, i)) {
            r.add(Family::ParentOneWay, format!("{i} and {j} are each other's parent"));
        }
    }
    for &(i, j) in &rel.a {
        if i == j {
            continue;
        }
        if !x[i] || !x[j] {
            r.add(
                Family::AncestorsAreFfds,
                format!("ancestry {i}->{j} involves a node without FFD"),
            );
        }
        if i < j && rel.a.contains(&(j, i)) {
            r.add(Family::AncestorOneWay, format!("{i} and {j} are each other's ancestor"));
        }
        if y[i] {
            r.add(Family::RootAncestors, format!("gateway {i} has ancestor {j}"));
        }
    }
    for &(i, j) in &rel.g {
        if i == j {
            continue;
        }
        if !y[j] {
            r.add(Family::GatewayInstalled, format!("{i} is managed by non-gateway {j}"));
        }
        if i < j && rel.g.contains(&(j, i)) {
            r.add(Family::GatewayOneWay, format!("{i} and {j} manage each other"));
        }
        if !rel.a.contains(&(i, j)) {
            r.add(
                Family::GatewayIsAncestor,
                format!("gateway {j} of {i} is not an ancestor"),
            );
        }
    }
    for &(i, j) in &rel.b {
        for k in 0..n {
            if k != i && rel.a(i, k) - rel.a(j, k) > 0 {
                r.add(
                    Family::AncestorsUp,
                    format!("ancestor {k} of {i} is not an ancestor of its parent {j}"),
                );
            }
            if k != i && k != j && rel.a(j, k) - rel.a(i, k) > 0 {
                r.add(
                    Family::AncestorsDown,
                    format!("ancestor {k} of parent {j} is not an ancestor of {i}"),
                );
            }
        }
    }
    for &(i, j) in &rel.a {
        if i == j {
            continue;
        }
        for k in 0..n {
            if rel.g(i, k) - rel.g(j, k) > 0 {
                r.add(
                    Family::GatewayInherited,
                    format!("{i} is managed by {k} but its ancestor {j} is not"),
                );
            }
        }
    }
    let o = &plan.objectives;
    let gateways = y.iter().filter(|&&b| b).count();
    if o.gateway_count != gateways || plan.gateways.len() != gateways {
        r.add(
            Family::Objective,
            format!("gateway_count {} for {gateways} gateways", o.gateway_count),
        );
    }
    let total: usize = plan.hops.values().sum();
    let avg = if plan.ffd.is_empty() {
        0.0
    } else {
        total as f64 / plan.ffd.len() as f64
    };
    if o.total_hops != total || (o.avg_hop - avg).abs() > TOL {
        r.add(
            Family::Objective,
            format!("hop objectives ({}, {}) but hops sum to {total}", o.total_hops, o.avg_hop),
        );
    }
}

fn check_traffic(plan: &DeploymentPlan, rel: &Relations, counts: &[u64], r: &mut Report) {
    let p = &plan.params;
    for i in 0..rel.n {
        let stored = plan.rates.get(&i).copied();
        let expect = p.per_sensor_rate * counts[i] as f64;
        match stored {
            Some(f) if rel.x[i] && (f - expect).abs() <= TOL * expect.abs().max(1.0) => {}
            None if !rel.x[i] => {}
            _ => r.add(
                Family::PacketRate,
                format!("f[{i}] = {stored:?}, expected {expect}"),
            ),
        }
    }
    let mut load = vec![0.0; rel.n];
    for &(k, j) in &rel.a {
        load[j] += plan.rates.get(&k).copied().unwrap_or(0.0);
    }
    for (j, &l) in load.iter().enumerate() {
        let cap = if rel.y[j] {
            p.gateway_capacity
        } else {
            p.router_capacity
        };
        if l > cap + TOL {
            r.add(
                Family::TrafficLoad,
                format!("FFD {j} carries {l} packets/s, capacity {cap}"),
            );
        }
    }
}
