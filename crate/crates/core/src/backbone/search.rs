//! Exact backbone search over gateway sets.
//!
//! Gateways are decided one FFD at a time in id order, excluding before
//! including. A node's hop count is at least one plus its link distance to
//! the nearest gateway, which gives the bound. At a leaf the shortest-path
//! forest attains that bound unless capacity binds; then a load-balanced
//! forest is tried, and failing that the linear model with the gateways
//! fixed decides the leaf exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{
    build_backbone_model_with, solve_lazy, BackboneError, BackboneModel, BackboneObjective,
    BackboneOutcome, BackboneParams, BackboneSolution, BackboneTopology, TrafficVector,
    TransitivityRows,
};
use crate::ilp::{Budget, SolveStatus};
use crate::streetgraph::{connected_components, StreetGraph, WirelessLinkSet};

const UNREACHABLE: usize = usize::MAX / 4;

struct Instance<'a> {
    g: &'a StreetGraph,
    w: &'a WirelessLinkSet,
    ffd: &'a BTreeSet<usize>,
    f: &'a TrafficVector,
    p: BackboneParams,
    nodes: Vec<usize>,
    rate: Vec<f64>,
    adj: Vec<Vec<usize>>,
    /// Link distance between local indices.
    dist: Vec<Vec<usize>>,
    component: Vec<usize>,
    components: usize,
}

impl<'a> Instance<'a> {
    fn new(
        g: &'a StreetGraph,
        w: &'a WirelessLinkSet,
        ffd: &'a BTreeSet<usize>,
        f: &'a TrafficVector,
        p: &BackboneParams,
    ) -> Self {
        let nodes: Vec<usize> = ffd.iter().copied().collect();
        let local: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(l, &i)| (i, l)).collect();
        let adj: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&i| {
                let mut a: Vec<usize> = w
                    .neighbors(i)
                    .iter()
                    .filter_map(|j| local.get(j).copied())
                    .collect();
                a.sort_unstable();
                a
            })
            .collect();
        let n = nodes.len();
        let mut dist = vec![vec![UNREACHABLE; n]; n];
        for s in 0..n {
            dist[s][s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if dist[s][v] == UNREACHABLE {
                        dist[s][v] = dist[s][u] + 1;
                        q.push_back(v);
                    }
                }
            }
        }
        let blocks = connected_components(w, ffd);
        let mut component = vec![0; n];
        for (c, block) in blocks.iter().enumerate() {
            for i in block {
                component[local[i]] = c;
            }
        }
        Instance {
            g,
            w,
            ffd,
            f,
            p: *p,
            rate: nodes.iter().map(|&i| f.get(i)).collect(),
            nodes,
            adj,
            dist,
            component,
            components: blocks.len(),
        }
    }

    fn n(&self) -> usize {
        self.nodes.len()
    }

    fn nearest(&self, i: usize, pool: &[usize]) -> usize {
        pool.iter().map(|&s| self.dist[i][s]).min().unwrap_or(UNREACHABLE)
    }
}

pub(super) fn solve(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    ffd: &BTreeSet<usize>,
    f: &TrafficVector,
    p: &BackboneParams,
    objective: BackboneObjective,
    budget: &Budget,
) -> Result<BackboneOutcome, BackboneError> {
    let inst = Instance::new(g, w, ffd, f, p);
    // Nobody can carry its own traffic.
    if inst.rate.iter().any(|&r| r > p.gateway_capacity + 1e-9) {
        return Ok(BackboneOutcome::Infeasible);
    }
    let budgets: Vec<usize> = match (objective, p.gw_budget) {
        (_, Some(k)) => vec![k],
        (BackboneObjective::MinTotalHops, None) => vec![inst.n()],
        (_, None) => (inst.components..=inst.n()).collect(),
    };
    for k in budgets {
        let mut s = GatewaySearch::new(&inst, k, budget);
        let status = s.run()?;
        if let Some(status) = status {
            return Ok(BackboneOutcome::Limit(status));
        }
        if let Some((value, topology)) = s.best {
            let objective_value = match objective {
                BackboneObjective::MinGateways => k as f64,
                _ => value as f64,
            };
            let model = model_for(&inst, objective, k)?;
            return Ok(BackboneOutcome::Solved(BackboneSolution {
                assignment: model.assignment_for(&topology),
                topology,
                objective: objective_value,
            }));
        }
    }
    Ok(BackboneOutcome::Infeasible)
}

fn model_for(
    inst: &Instance,
    objective: BackboneObjective,
    k: usize,
) -> Result<BackboneModel, BackboneError> {
    build_backbone_model_with(
        inst.g,
        inst.w,
        inst.ffd,
        inst.f,
        &inst.p.with_budget(k),
        objective,
        TransitivityRows::Lazy,
    )
}

struct GatewaySearch<'a, 'b> {
    inst: &'b Instance<'a>,
    k: usize,
    budget: &'b Budget,
    nodes_visited: u64,
    best: Option<(usize, BackboneTopology)>,
    /// Must be a gateway: its traffic exceeds router capacity.
    forced: Vec<bool>,
}

impl<'a, 'b> GatewaySearch<'a, 'b> {
    fn new(inst: &'b Instance<'a>, k: usize, budget: &'b Budget) -> Self {
        let forced = inst
            .rate
            .iter()
            .map(|&r| r > inst.p.router_capacity + 1e-9)
            .collect();
        GatewaySearch {
            inst,
            k,
            budget,
            nodes_visited: 0,
            best: None,
            forced,
        }
    }

    /// `Some(status)` when a limit stopped the search.
    fn run(&mut self) -> Result<Option<SolveStatus>, BackboneError> {
        let mut chosen = Vec::new();
        self.branch(0, &mut chosen)
    }

    fn bound(&self, depth: usize, chosen: &[usize]) -> Option<usize> {
        let inst = self.inst;
        let n = inst.n();
        let r = self.k - chosen.len();
        if n - depth < r {
            return None;
        }
        let mut avail: Vec<usize> = chosen.to_vec();
        avail.extend(depth..n);
        let mut has_gw = vec![false; inst.components];
        for &s in &avail {
            has_gw[inst.component[s]] = true;
        }
        if has_gw.iter().any(|&c| !c) {
            return None;
        }
        if r == 0 && (depth..n).any(|i| self.forced[i]) {
            return None;
        }
        let max_hops = inst.p.max_hops as usize;
        let mut total = 0;
        for i in 0..depth {
            let d = inst.nearest(i, &avail);
            if d + 1 > max_hops {
                return None;
            }
            total += 1 + d;
        }
        let mut savings = Vec::with_capacity(n - depth);
        let mut forced_left = 0;
        for u in depth..n {
            let others: Vec<usize> = avail.iter().copied().filter(|&s| s != u).collect();
            let d = inst.nearest(u, &others).min(UNREACHABLE);
            total += 1 + d.min(n);
            if self.forced[u] {
                forced_left += 1;
                total -= d.min(n);
            } else {
                savings.push(d.min(n));
            }
        }
        if forced_left > r {
            return None;
        }
        savings.sort_unstable_by(|a, b| b.cmp(a));
        total -= savings.iter().take(r - forced_left).sum::<usize>();
        Some(total)
    }

    fn branch(
        &mut self,
        depth: usize,
        chosen: &mut Vec<usize>,
    ) -> Result<Option<SolveStatus>, BackboneError> {
        self.nodes_visited += 1;
        if self.nodes_visited > self.budget.max_nodes {
            return Ok(Some(SolveStatus::NodeLimit));
        }
        if self.nodes_visited % 256 == 0 && self.budget.expired() {
            return Ok(Some(SolveStatus::TimeLimit));
        }
        let Some(bound) = self.bound(depth, chosen) else {
            return Ok(None);
        };
        if self.best.as_ref().is_some_and(|(v, _)| bound >= *v) {
            return Ok(None);
        }
        if depth == self.inst.n() {
            return self.leaf(chosen, bound);
        }
        if !self.forced[depth] {
            if let Some(s) = self.branch(depth + 1, chosen)? {
                return Ok(Some(s));
            }
        }
        if chosen.len() < self.k {
            chosen.push(depth);
            let out = self.branch(depth + 1, chosen);
            chosen.pop();
            if let Some(s) = out? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    fn leaf(
        &mut self,
        chosen: &[usize],
        bound: usize,
    ) -> Result<Option<SolveStatus>, BackboneError> {
        let inst = self.inst;
        let depth: Vec<usize> = (0..inst.n()).map(|i| inst.nearest(i, chosen)).collect();
        for balanced in [false, true] {
            let parents = shortest_path_forest(inst, &depth, balanced);
            if self.fits(chosen, &parents) {
                let t = self.topology(&parents);
                self.best = Some((bound, t));
                return Ok(None);
            }
        }
        // Capacity binds: let the linear model route around it.
        let gateways: BTreeSet<usize> = chosen.iter().map(|&l| inst.nodes[l]).collect();
        let mut model = model_for(inst, BackboneObjective::FixedGwMinHops, self.k)?;
        model.fix_gateways(&gateways);
        match solve_lazy(model, self.budget)? {
            BackboneOutcome::Solved(s) => {
                let value = s.topology.total_hops();
                if self.best.as_ref().map_or(true, |(v, _)| value < *v) {
                    self.best = Some((value, s.topology));
                }
                Ok(None)
            }
            BackboneOutcome::Infeasible => Ok(None),
            BackboneOutcome::Limit(s) => Ok(Some(s)),
        }
    }

    fn fits(&self, chosen: &[usize], parents: &[Option<usize>]) -> bool {
        let inst = self.inst;
        let load = subtree_loads(inst, parents);
        (0..inst.n()).all(|i| {
            let cap = inst.p.capacity(chosen.contains(&i));
            load[i] <= cap + 1e-9
        })
    }

    fn topology(&self, parents: &[Option<usize>]) -> BackboneTopology {
        let inst = self.inst;
        let map = parents
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (inst.nodes[i], inst.nodes[p])))
            .collect();
        BackboneTopology::from_forest(inst.ffd, map).expect("forest from distances is acyclic")
    }
}

/// Parent of every non-gateway: a neighbor one step closer to the gateways.
/// Plain mode takes the smallest id; balanced mode the lightest subtree so far.
fn shortest_path_forest(inst: &Instance, depth: &[usize], balanced: bool) -> Vec<Option<usize>> {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(depth[i]), i));
    let mut load = inst.rate.clone();
    let mut parents = vec![None; n];
    for i in order {
        if depth[i] == 0 {
            continue;
        }
        let candidates = inst.adj[i].iter().copied().filter(|&j| depth[j] + 1 == depth[i]);
        let p = if balanced {
            candidates.min_by(|&a, &b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
        } else {
            candidates.min()
        }
        .expect("a closer neighbor exists");
        load[p] += load[i];
        parents[i] = Some(p);
    }
    parents
}

fn subtree_loads(inst: &Instance, parents: &[Option<usize>]) -> Vec<f64> {
    let mut load = vec![0.0; inst.n()];
    for i in 0..inst.n() {
        let mut at = Some(i);
        while let Some(u) = at {
            load[u] += inst.rate[i];
            at = parents[u];
        }
    }
    load
}
