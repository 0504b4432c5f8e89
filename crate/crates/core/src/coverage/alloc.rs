//! Exact sensor allocation as a convex-cost flow.
//!
//! Source -> segment (capacity = sensors on the segment) -> FFD endpoint ->
//! sink (capacity = per-FFD sensor limit). The arc into an endpoint carries
//! the per-end cost `k(k+1)/2`, i.e. marginal cost `k` for the k-th sensor.
//! Successive shortest paths with unit augmentation keeps the residual graph
//! free of negative cycles, so the result is optimal.

use std::collections::BTreeSet;

const SOURCE: usize = 0;
const SINK: usize = 1;

#[derive(Debug, Clone, Copy)]
enum ArcKind {
    Supply { cap: u64 },
    Assign,
    Drain { cap: u64 },
}

#[derive(Debug, Clone)]
struct Arc {
    from: usize,
    to: usize,
    kind: ArcKind,
    flow: u64,
}

impl Arc {
    fn forward(&self) -> Option<i64> {
        match self.kind {
            ArcKind::Supply { cap } | ArcKind::Drain { cap } => (self.flow < cap).then_some(0),
            ArcKind::Assign => Some(self.flow as i64 + 1),
        }
    }

    fn backward(&self) -> Option<i64> {
        if self.flow == 0 {
            return None;
        }
        match self.kind {
            ArcKind::Assign => Some(-(self.flow as i64)),
            _ => Some(0),
        }
    }
}

/// One segment to split between its FFD endpoints.
#[derive(Debug, Clone)]
pub(crate) struct Demand {
    pub sensors: u64,
    /// FFD endpoints able to take sensors (one or two).
    pub ends: Vec<usize>,
}

#[derive(Debug)]
pub(crate) enum FlowResult {
    /// Sensors per (demand index, end position).
    Split(Vec<Vec<u64>>),
    /// Demands that cannot all be served by their endpoints' capacity.
    Overloaded(BTreeSet<usize>),
}

pub(crate) fn allocate(demands: &[Demand], node_count: usize, capacity: u64) -> FlowResult {
    let demand_node = |d: usize| 2 + d;
    let node_node = |i: usize| 2 + demands.len() + i;
    let total_nodes = 2 + demands.len() + node_count;

    let mut arcs = Vec::new();
    let mut assign_arcs = Vec::with_capacity(demands.len());
    let mut used_nodes = BTreeSet::new();
    for (d, dem) in demands.iter().enumerate() {
        arcs.push(Arc {
            from: SOURCE,
            to: demand_node(d),
            kind: ArcKind::Supply { cap: dem.sensors },
            flow: 0,
        });
        let mut ids = Vec::new();
        for &end in &dem.ends {
            ids.push(arcs.len());
            arcs.push(Arc {
                from: demand_node(d),
                to: node_node(end),
                kind: ArcKind::Assign,
                flow: 0,
            });
            used_nodes.insert(end);
        }
        assign_arcs.push(ids);
    }
    for &i in &used_nodes {
        arcs.push(Arc {
            from: node_node(i),
            to: SINK,
            kind: ArcKind::Drain { cap: capacity },
            flow: 0,
        });
    }

    let total: u64 = demands.iter().map(|d| d.sensors).sum();
    let mut dist = vec![i64::MAX; total_nodes];
    let mut pred: Vec<Option<(usize, bool)>> = vec![None; total_nodes];
    for _ in 0..total {
        dist.iter_mut().for_each(|d| *d = i64::MAX);
        pred.iter_mut().for_each(|p| *p = None);
        dist[SOURCE] = 0;
        // Bellman-Ford; the graph is small and the costs are tiny integers.
        for _ in 0..total_nodes {
            let mut changed = false;
            for (a, arc) in arcs.iter().enumerate() {
                if dist[arc.from] != i64::MAX {
                    if let Some(c) = arc.forward() {
                        if dist[arc.from] + c < dist[arc.to] {
                            dist[arc.to] = dist[arc.from] + c;
                            pred[arc.to] = Some((a, true));
                            changed = true;
                        }
                    }
                }
                if dist[arc.to] != i64::MAX {
                    if let Some(c) = arc.backward() {
                        if dist[arc.to] + c < dist[arc.from] {
                            dist[arc.from] = dist[arc.to] + c;
                            pred[arc.from] = Some((a, false));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[SINK] == i64::MAX {
            let overloaded = (0..demands.len())
                .filter(|&d| dist[demand_node(d)] != i64::MAX)
                .collect();
            return FlowResult::Overloaded(overloaded);
        }
        let mut at = SINK;
        while at != SOURCE {
            let (a, fwd) = pred[at].expect("path to sink");
            if fwd {
                arcs[a].flow += 1;
                at = arcs[a].from;
            } else {
                arcs[a].flow -= 1;
                at = arcs[a].to;
            }
        }
    }

    FlowResult::Split(
        assign_arcs
            .iter()
            .map(|ids| ids.iter().map(|&a| arcs[a].flow).collect())
            .collect(),
    )
}
