//! FFD placement and managed-length allocation.
//!
//! The binary side is a vertex-cover style model over the intersections:
//! every parking segment needs an FFD at one of its ends, plus necessary
//! per-node sensor-capacity cuts. Managed lengths are not part of that model;
//! given a placement they are computed exactly by [`allocate_gamma`], and
//! any capacity conflict found there is fed back as a cut.
//!
//! Sensor semantics: a parking segment of length `d` and density `rho`
//! carries `floor(d * rho)` sensors. Each sensor reports to exactly one FFD
//! end, and the managed length of an end is snapped to its sensor boundary,
//! so the two ends of a segment together manage exactly its length.

mod alloc;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ilp::{
    self, Budget, Comparator, IlpError, LinearExpr, LinearModel, SolveStatus, VarKind,
};
use crate::family::Family;
use crate::streetgraph::StreetGraph;
use alloc::{Demand, FlowResult};

/// Default per-FFD sensor limit.
pub const DEFAULT_MAX_SENSORS: u64 = 256;

/// Instances with at most this many intersections are solved by enumerating
/// every cover when picking the minimum-energy cover of a given size.
pub const ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum CoverageError {
    #[error(
        "segment {u}-{v} carries {sensors} sensors, more than twice the per-FFD limit of {limit} (2*M_ns = {})",
        2 * limit
    )]
    Uncoverable {
        u: usize,
        v: usize,
        sensors: u64,
        limit: u64,
    },
    #[error("parking segment {u}-{v} has no FFD at either end")]
    NotACover { u: usize, v: usize },
    #[error("per-FFD sensor limit {limit} cannot be met by this placement")]
    CapacityExceeded { limit: u64 },
    #[error("unknown intersection {0} in FFD set")]
    UnknownNode(usize),
    #[error("invalid coverage parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Ilp(#[from] IlpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageParams {
    /// Maximum sensors managed by one FFD.
    pub max_sensors: u64,
    /// Fixes the number of FFDs when set.
    pub ffd_budget: Option<usize>,
}

impl Default for CoverageParams {
    fn default() -> Self {
        CoverageParams {
            max_sensors: DEFAULT_MAX_SENSORS,
            ffd_budget: None,
        }
    }
}

impl CoverageParams {
    pub fn with_budget(self, budget: usize) -> Self {
        CoverageParams {
            ffd_budget: Some(budget),
            ..self
        }
    }

    fn validate(&self) -> Result<(), CoverageError> {
        if self.max_sensors == 0 {
            return Err(CoverageError::InvalidParams("M_ns must be at least 1".into()));
        }
        Ok(())
    }
}

/// Managed length per directed segment end `(i, j)`: the part of segment
/// `{i, j}` whose sensors report to the FFD at `i`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaAssignment {
    pub managed_len_m: BTreeMap<(usize, usize), f64>,
}

/// Sensors per directed segment end.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorCounts {
    pub k: BTreeMap<(usize, usize), u64>,
}

impl SensorCounts {
    /// Sensors managed by node `i` across all its segment ends.
    pub fn node_total(&self, i: usize) -> u64 {
        self.k
            .range((i, 0)..=(i, usize::MAX))
            .map(|(_, &k)| k)
            .sum()
    }
}

/// `floor(gamma * density)`, tolerant of representation error just below an
/// integer.
pub fn sensor_count(gamma_m: f64, density_per_m: f64) -> u64 {
    let v = gamma_m * density_per_m;
    if v <= 0.0 {
        0
    } else {
        (v + 1e-9).floor() as u64
    }
}

/// Energy of one segment end managing `k` sensors: `k(k+1)/2`.
pub fn end_energy(k: u64) -> u64 {
    k * (k + 1) / 2
}

/// Total sensor energy over all directed ends.
pub fn total_energy(k: &SensorCounts) -> f64 {
    k.k.values().map(|&k| end_energy(k)).sum::<u64>() as f64
}

/// Cheapest split of `sensors` between two FFD ends.
pub fn balanced_energy(sensors: u64) -> u64 {
    end_energy(sensors / 2) + end_energy(sensors - sensors / 2)
}

fn check_coverable(g: &StreetGraph, p: &CoverageParams) -> Result<(), CoverageError> {
    for (_, s) in g.parking_segments() {
        let sensors = s.sensor_count();
        if sensors > 2 * p.max_sensors {
            return Err(CoverageError::Uncoverable {
                u: s.endpoints.0,
                v: s.endpoints.1,
                sensors,
                limit: p.max_sensors,
            });
        }
    }
    Ok(())
}

fn add_cover_rows(g: &StreetGraph, p: &CoverageParams, m: &mut LinearModel) -> Vec<ilp::VarId> {
    let x: Vec<_> = (0..g.node_count())
        .map(|i| m.add_binary(format!("x[{i}]")))
        .collect();
    for (_, s) in g.parking_segments() {
        let (u, v) = s.endpoints;
        m.add_constraint(
            format!("cover[{u},{v}]"),
            LinearExpr::new().term(x[u], 1.0).term(x[v], 1.0),
            Comparator::Ge,
            1.0,
        );
    }
    // If x_i = 1, every segment whose other end has no FFD lands on i alone.
    for i in 0..g.node_count() {
        let incident: Vec<_> = g
            .incident(i)
            .iter()
            .map(|&s| &g.segments()[s])
            .filter(|s| s.has_parking)
            .map(|s| (s.other(i), s.sensor_count()))
            .collect();
        let total: u64 = incident.iter().map(|t| t.1).sum();
        if total > p.max_sensors {
            let expr = incident.iter().map(|&(j, k)| (x[j], k as f64)).collect();
            m.add_constraint(
                format!("maxsensor_cut[{i}]"),
                expr,
                Comparator::Ge,
                (total - p.max_sensors) as f64,
            );
        }
    }
    x
}

/// Binary placement model over `x[i]`: cover rows, capacity cuts, and
/// `min sum x` (or a fixed count with a constant objective).
pub fn build_cover_model(g: &StreetGraph, p: &CoverageParams) -> Result<LinearModel, CoverageError> {
    p.validate()?;
    check_coverable(g, p)?;
    let mut m = LinearModel::new();
    let x = add_cover_rows(g, p, &mut m);
    let count: LinearExpr = x.iter().map(|&v| (v, 1.0)).collect();
    match p.ffd_budget {
        Some(t) => {
            m.add_constraint("ffd_budget", count, Comparator::Eq, t as f64);
            m.set_objective(LinearExpr::new(), 0.0);
        }
        None => m.set_objective(count, 0.0),
    }
    Ok(m)
}

/// Placement model with the managed lengths as continuous variables
/// `gamma[i,j]`. Not solvable by the branch-and-bound core; used to export
/// the full coverage system and to check complete plans.
pub fn build_gamma_model(g: &StreetGraph, p: &CoverageParams) -> Result<LinearModel, CoverageError> {
    p.validate()?;
    let mut m = LinearModel::new();
    let x: Vec<_> = (0..g.node_count())
        .map(|i| m.add_binary(format!("x[{i}]")))
        .collect();
    let mut load: Vec<LinearExpr> = vec![LinearExpr::new(); g.node_count()];
    for (_, s) in g.parking_segments() {
        let (u, v) = s.endpoints;
        let gu = m.add_var(format!("gamma[{u},{v}]"), VarKind::Continuous, 0.0, s.length_m);
        let gv = m.add_var(format!("gamma[{v},{u}]"), VarKind::Continuous, 0.0, s.length_m);
        m.add_constraint(
            Family::SumOfGamma.row(&[u, v]),
            LinearExpr::new().term(gu, 1.0).term(gv, 1.0),
            Comparator::Ge,
            s.length_m,
        );
        for (i, gi, j) in [(u, gu, v), (v, gv, u)] {
            m.add_constraint(
                Family::GammaWithinSegment.row(&[i, j]),
                LinearExpr::new().term(gi, 1.0),
                Comparator::Le,
                s.length_m,
            );
            m.add_constraint(
                Family::FfdManagesGamma.row(&[i, j]),
                LinearExpr::new().term(x[i], 1.0).term(gi, -1.0 / g.d_max()),
                Comparator::Ge,
                0.0,
            );
            load[i].add(gi, s.sensor_density_per_m);
        }
    }
    for (i, expr) in load.into_iter().enumerate() {
        if !expr.is_empty() {
            m.add_constraint(
                Family::MaxSensors.row(&[i]),
                expr,
                Comparator::Le,
                p.max_sensors as f64,
            );
        }
    }
    let count: LinearExpr = x.iter().map(|&v| (v, 1.0)).collect();
    match p.ffd_budget {
        Some(t) => {
            m.add_constraint("ffd_budget", count, Comparator::Eq, t as f64);
            m.set_objective(LinearExpr::new(), 0.0);
        }
        None => m.set_objective(count, 0.0),
    }
    Ok(m)
}

/// Minimum-energy managed lengths for the placement `ffd`.
///
/// Exact: sensors are routed by a convex-cost flow, then each end's managed
/// length is snapped to its sensor boundary. The sub-sensor remainder of a
/// segment goes to the FFD end with the most spare capacity.
pub fn allocate_gamma(
    g: &StreetGraph,
    ffd: &BTreeSet<usize>,
    p: &CoverageParams,
) -> Result<(GammaAssignment, SensorCounts), CoverageError> {
    match try_allocate(g, ffd, p)? {
        Allocation::Done(gamma, counts) => Ok((gamma, counts)),
        Allocation::Overloaded(_) => Err(CoverageError::CapacityExceeded {
            limit: p.max_sensors,
        }),
    }
}

enum Allocation {
    Done(GammaAssignment, SensorCounts),
    /// Parking segments (by index) whose sensors exceed the capacity of all
    /// their endpoints combined.
    Overloaded(Vec<usize>),
}

fn try_allocate(
    g: &StreetGraph,
    ffd: &BTreeSet<usize>,
    p: &CoverageParams,
) -> Result<Allocation, CoverageError> {
    p.validate()?;
    if let Some(&bad) = ffd.iter().find(|&&i| i >= g.node_count()) {
        return Err(CoverageError::UnknownNode(bad));
    }
    let mut seg_ids = Vec::new();
    let mut demands = Vec::new();
    for (s_idx, s) in g.parking_segments() {
        let (u, v) = s.endpoints;
        let ends: Vec<usize> = [u, v].into_iter().filter(|e| ffd.contains(e)).collect();
        if ends.is_empty() {
            return Err(CoverageError::NotACover { u, v });
        }
        seg_ids.push(s_idx);
        demands.push(Demand {
            sensors: s.sensor_count(),
            ends,
        });
    }
    let split = match alloc::allocate(&demands, g.node_count(), p.max_sensors) {
        FlowResult::Split(split) => split,
        FlowResult::Overloaded(ds) => {
            return Ok(Allocation::Overloaded(
                ds.into_iter().map(|d| seg_ids[d]).collect(),
            ))
        }
    };

    let mut gamma = GammaAssignment::default();
    let mut counts = SensorCounts::default();
    let mut load = vec![0.0_f64; g.node_count()];
    let mut pending = Vec::new();
    for ((&s_idx, dem), ks) in seg_ids.iter().zip(&demands).zip(&split) {
        let s = &g.segments()[s_idx];
        let (u, v) = s.endpoints;
        for (i, j) in [(u, v), (v, u)] {
            gamma.managed_len_m.insert((i, j), 0.0);
            counts.k.insert((i, j), 0);
        }
        let rho = s.sensor_density_per_m;
        for (&end, &k) in dem.ends.iter().zip(ks) {
            let other = s.other(end);
            let len = if rho > 0.0 { k as f64 / rho } else { 0.0 };
            gamma.managed_len_m.insert((end, other), len.min(s.length_m));
            counts.k.insert((end, other), k);
            load[end] += k as f64;
        }
        pending.push(s_idx);
    }
    // Remainder below one sensor: give it to the end with the most room.
    for s_idx in pending {
        let s = &g.segments()[s_idx];
        let (u, v) = s.endpoints;
        let assigned = gamma.managed_len_m[&(u, v)] + gamma.managed_len_m[&(v, u)];
        let rest = s.length_m - assigned;
        if rest <= 0.0 {
            continue;
        }
        let room = |i: usize| p.max_sensors as f64 - load[i];
        let end = [u, v]
            .into_iter()
            .filter(|e| ffd.contains(e))
            .max_by(|&a, &b| room(a).total_cmp(&room(b)).then(b.cmp(&a)))
            .expect("segment has an FFD end");
        let other = s.other(end);
        let new_len = s.length_m - gamma.managed_len_m[&(other, end)];
        gamma.managed_len_m.insert((end, other), new_len);
        // sub-sensor length: counts, and so the limit, are unaffected
        load[end] += rest * s.sensor_density_per_m;
        debug_assert_eq!(
            sensor_count(new_len, s.sensor_density_per_m),
            counts.k[&(end, other)]
        );
    }
    Ok(Allocation::Done(gamma, counts))
}

/// True when no intersection touches more sensors than one FFD may manage,
/// so the capacity constraint can never bind.
pub fn capacity_non_binding(g: &StreetGraph, p: &CoverageParams) -> bool {
    (0..g.node_count()).all(|i| {
        g.incident(i)
            .iter()
            .map(|&s| g.segments()[s].sensor_count())
            .sum::<u64>()
            <= p.max_sensors
    })
}

/// How a placement was chosen among those with the same FFD count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverSelection {
    /// Every cover of the given size was evaluated.
    Enumerated,
    /// Exact: energy written as a linear function of the placement, valid
    /// because the capacity limit cannot bind.
    Linearized,
    /// Minimum energy not guaranteed: the solver's tie-broken cover.
    TieBroken,
}

/// A placement with its exact allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverPlan {
    pub ffd: BTreeSet<usize>,
    pub gamma: GammaAssignment,
    pub counts: SensorCounts,
    pub energy: f64,
    pub selection: CoverSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverOutcome {
    Solved(CoverPlan),
    Infeasible,
    Limit {
        status: SolveStatus,
        incumbent: Option<BTreeSet<usize>>,
    },
}

impl CoverOutcome {
    pub fn status(&self) -> SolveStatus {
        match self {
            CoverOutcome::Solved(_) => SolveStatus::Optimal,
            CoverOutcome::Infeasible => SolveStatus::Infeasible,
            CoverOutcome::Limit { status, .. } => *status,
        }
    }

    pub fn plan(&self) -> Option<&CoverPlan> {
        match self {
            CoverOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

fn ffd_from(m: &LinearModel, a: &ilp::Assignment, n: usize) -> BTreeSet<usize> {
    debug_assert!(m.var("x[0]").is_some() || n == 0);
    (0..n).filter(|i| a.is_one(&format!("x[{i}]"))).collect()
}

fn hall_cut(g: &StreetGraph, p: &CoverageParams, m: &mut LinearModel, segs: &[usize], round: usize) {
    let mut nodes = BTreeSet::new();
    let mut sensors = 0;
    for &s in segs {
        let seg = &g.segments()[s];
        nodes.insert(seg.endpoints.0);
        nodes.insert(seg.endpoints.1);
        sensors += seg.sensor_count();
    }
    let expr = nodes
        .iter()
        .map(|&i| (m.var(&format!("x[{i}]")).expect("x declared"), p.max_sensors as f64))
        .collect();
    m.add_constraint(format!("capacity_cut[{round}]"), expr, Comparator::Ge, sensors as f64);
}

/// Solve `model` (built by [`build_cover_model`] or a variant with the same
/// `x[i]` variables) and repair capacity conflicts found by the allocation
/// with cuts until the placement is allocatable.
fn solve_with_capacity_cuts(
    g: &StreetGraph,
    p: &CoverageParams,
    mut model: LinearModel,
    budget: &Budget,
    selection: CoverSelection,
) -> Result<CoverOutcome, CoverageError> {
    for round in 0.. {
        let report = ilp::solve_within(&model, budget)?;
        match report.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Ok(CoverOutcome::Infeasible),
            status => {
                let incumbent = report
                    .incumbent
                    .as_ref()
                    .map(|a| ffd_from(&model, a, g.node_count()));
                return Ok(CoverOutcome::Limit { status, incumbent });
            }
        }
        let a = report.assignment.expect("optimal has assignment");
        let ffd = ffd_from(&model, &a, g.node_count());
        match try_allocate(g, &ffd, p)? {
            Allocation::Done(gamma, counts) => {
                let energy = total_energy(&counts);
                return Ok(CoverOutcome::Solved(CoverPlan {
                    ffd,
                    gamma,
                    counts,
                    energy,
                    selection,
                }));
            }
            Allocation::Overloaded(segs) => hall_cut(g, p, &mut model, &segs, round),
        }
    }
    unreachable!()
}

/// Minimum number of FFDs (or any placement of exactly `ffd_budget` FFDs)
/// with an allocatable sensor assignment.
pub fn solve_cover(
    g: &StreetGraph,
    p: &CoverageParams,
    budget: &Budget,
) -> Result<CoverOutcome, CoverageError> {
    let model = build_cover_model(g, p)?;
    solve_with_capacity_cuts(g, p, model, budget, CoverSelection::TieBroken)
}

/// The minimum-energy placement with exactly `ffd_count` FFDs.
///
/// Exact by enumeration on small graphs and by the linearized energy model
/// whenever capacity cannot bind; otherwise falls back to the solver's
/// tie-broken placement and says so in [`CoverPlan::selection`].
pub fn min_energy_cover(
    g: &StreetGraph,
    p: &CoverageParams,
    ffd_count: usize,
    budget: &Budget,
) -> Result<CoverOutcome, CoverageError> {
    p.validate()?;
    check_coverable(g, p)?;
    let n = g.node_count();
    if ffd_count > n {
        return Ok(CoverOutcome::Infeasible);
    }
    let p = p.with_budget(ffd_count);
    if n <= ENUMERATION_LIMIT {
        return enumerate_covers(g, &p, ffd_count, budget);
    }
    if capacity_non_binding(g, &p) {
        let model = build_energy_cover_model(g, &p, ffd_count);
        let outcome =
            solve_with_capacity_cuts(g, &p, model, budget, CoverSelection::Linearized)?;
        return Ok(outcome);
    }
    let model = build_cover_model(g, &p)?;
    solve_with_capacity_cuts(g, &p, model, budget, CoverSelection::TieBroken)
}

/// Cover model whose objective is the sensor energy of the placement,
/// assuming capacity never binds. With an FFD at both ends a segment costs
/// its balanced split, with one it costs the full `S(S+1)/2`; since the
/// uncovered ends form an independent set, the energy is
/// `sum_e balanced(e) + sum_{i not FFD} w_i` with
/// `w_i = sum_{e at i} (full(e) - balanced(e))`.
fn build_energy_cover_model(g: &StreetGraph, p: &CoverageParams, ffd_count: usize) -> LinearModel {
    let mut m = LinearModel::new();
    let x = add_cover_rows(g, p, &mut m);
    let mut base = 0.0;
    let mut w = vec![0.0; g.node_count()];
    for (_, s) in g.parking_segments() {
        let k = s.sensor_count();
        let (full, bal) = (end_energy(k) as f64, balanced_energy(k) as f64);
        base += bal;
        w[s.endpoints.0] += full - bal;
        w[s.endpoints.1] += full - bal;
    }
    let count: LinearExpr = x.iter().map(|&v| (v, 1.0)).collect();
    m.add_constraint("ffd_budget", count, Comparator::Eq, ffd_count as f64);
    let constant = base + w.iter().sum::<f64>();
    m.set_objective(x.iter().zip(&w).map(|(&v, &wi)| (v, -wi)).collect(), constant);
    m
}

fn enumerate_covers(
    g: &StreetGraph,
    p: &CoverageParams,
    ffd_count: usize,
    budget: &Budget,
) -> Result<CoverOutcome, CoverageError> {
    let n = g.node_count();
    let mut best: Option<(f64, Vec<bool>, CoverPlan)> = None;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != ffd_count {
            continue;
        }
        if budget.expired() {
            return Ok(CoverOutcome::Limit {
                status: SolveStatus::TimeLimit,
                incumbent: best.map(|b| b.2.ffd),
            });
        }
        let ffd: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let covers = g
            .parking_segments()
            .all(|(_, s)| ffd.contains(&s.endpoints.0) || ffd.contains(&s.endpoints.1));
        if !covers {
            continue;
        }
        let Allocation::Done(gamma, counts) = try_allocate(g, &ffd, p)? else {
            continue;
        };
        let energy = total_energy(&counts);
        let xvec: Vec<bool> = (0..n).map(|i| ffd.contains(&i)).collect();
        let better = match &best {
            None => true,
            Some((e, xv, _)) => energy < *e || (energy == *e && xvec < *xv),
        };
        if better {
            best = Some((
                energy,
                xvec,
                CoverPlan {
                    ffd,
                    gamma,
                    counts,
                    energy,
                    selection: CoverSelection::Enumerated,
                },
            ));
        }
    }
    Ok(best.map_or(CoverOutcome::Infeasible, |b| CoverOutcome::Solved(b.2)))
}
