//! Epsilon-constraint sweeps and Pareto dominance.
//!
//! Two fronts are traced: sensor energy against the number of FFDs, and
//! average hop count against the number of gateways at fixed FFD levels.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbone::{
    self, solve_backbone, BackboneError, BackboneMethod, BackboneObjective, BackboneOutcome,
    BackboneParams, BackboneSolution, TrafficVector,
};
use crate::coverage::{
    min_energy_cover, solve_cover, CoverOutcome, CoverPlan, CoverageError, CoverageParams,
};
use crate::ilp::{Budget, SolveStatus};
use crate::streetgraph::{connected_components, StreetGraph, WirelessLinkSet};

#[derive(Debug, Error, PartialEq)]
pub enum ParetoError {
    #[error("point {index} has {found} objectives, expected {expected}")]
    Arity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("objective {0} is not finite")]
    NonFinite(f64),
    #[error("FFD level {level} is below the minimum cover size {min}")]
    LevelBelowCover { level: usize, min: usize },
    #[error("FFD level {level} exceeds the {nodes} intersections")]
    LevelAboveNodes { level: usize, nodes: usize },
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Backbone(#[from] BackboneError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint<P> {
    pub objectives: Vec<f64>,
    pub plan: P,
}

/// Mutually non-dominated points, sorted by first objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Front<P> {
    pub points: Vec<ParetoPoint<P>>,
}

impl<P> Front<P> {
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.objectives.clone()).collect()
    }
}

/// `a` dominates `b` when it is no worse everywhere and better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Keep exactly the non-dominated points (all objectives minimized). Equal
/// tuples keep their first occurrence.
pub fn dominance_filter<P>(points: Vec<ParetoPoint<P>>) -> Result<Front<P>, ParetoError> {
    if let Some(first) = points.first() {
        let expected = first.objectives.len();
        for (index, p) in points.iter().enumerate() {
            if p.objectives.len() != expected {
                return Err(ParetoError::Arity {
                    index,
                    expected,
                    found: p.objectives.len(),
                });
            }
            if let Some(&v) = p.objectives.iter().find(|v| !v.is_finite()) {
                return Err(ParetoError::NonFinite(v));
            }
        }
    }
    let mut points = points;
    points.sort_by(|a, b| lex(&a.objectives, &b.objectives));
    let mut kept: Vec<ParetoPoint<P>> = Vec::new();
    for p in points {
        let beaten = kept
            .iter()
            .any(|k| k.objectives == p.objectives || dominates(&k.objectives, &p.objectives));
        if !beaten {
            kept.push(p);
        }
    }
    Ok(Front { points: kept })
}

/// A sweep result: the front over the points solved, and `Optimal` unless a
/// limit interrupted the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<P> {
    pub front: Front<P>,
    pub status: SolveStatus,
}

/// Energy front: for every FFD count from the minimum cover to `|N|`, the
/// minimum-energy placement of that size. Objectives are `(t, energy)`.
pub fn front_energy_vs_ffd(
    g: &StreetGraph,
    p: &CoverageParams,
    budget: &Budget,
) -> Result<Sweep<CoverPlan>, ParetoError> {
    let min = match solve_cover(g, p, budget)? {
        CoverOutcome::Solved(plan) => plan.ffd.len(),
        CoverOutcome::Infeasible => {
            return Ok(Sweep {
                front: Front { points: vec![] },
                status: SolveStatus::Infeasible,
            })
        }
        CoverOutcome::Limit { status, .. } => {
            return Ok(Sweep {
                front: Front { points: vec![] },
                status,
            })
        }
    };
    let mut points = Vec::new();
    let mut status = SolveStatus::Optimal;
    for t in min..=g.node_count() {
        match min_energy_cover(g, p, t, budget)? {
            CoverOutcome::Solved(plan) => points.push(ParetoPoint {
                objectives: vec![t as f64, plan.energy],
                plan,
            }),
            CoverOutcome::Infeasible => {}
            CoverOutcome::Limit { status: s, .. } => {
                status = s;
                break;
            }
        }
    }
    Ok(Sweep {
        front: dominance_filter(points)?,
        status,
    })
}

/// Named FFD levels for the hop study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FfdLevel {
    /// The minimum cover size.
    Worst,
    /// 80% of the intersections, rounded to nearest.
    Mediocre,
    /// Every intersection.
    Best,
    Count(usize),
}

impl FfdLevel {
    pub fn resolve(self, min_cover: usize, nodes: usize) -> usize {
        match self {
            FfdLevel::Worst => min_cover,
            FfdLevel::Mediocre => ((nodes as f64 * 0.8).round() as usize).max(min_cover),
            FfdLevel::Best => nodes,
            FfdLevel::Count(c) => c,
        }
    }
}

/// Packet rates of the FFDs in `cover`; FFDs with no sensors send nothing.
pub fn cover_traffic(cover: &CoverPlan, per_sensor_rate: f64) -> TrafficVector {
    let mut f = backbone::packet_rates(&cover.counts, per_sensor_rate);
    f.f.retain(|i, _| cover.ffd.contains(i));
    for &i in &cover.ffd {
        f.f.entry(i).or_insert(0.0);
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopPlan {
    pub cover: CoverPlan,
    pub traffic: TrafficVector,
    pub backbone: BackboneSolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSweep {
    /// Number of FFDs at this level.
    pub level: usize,
    /// W-components of the chosen cover: the fewest gateways possible.
    pub clusters: usize,
    pub sweep: Sweep<HopPlan>,
}

/// Hop fronts: at each FFD level take the minimum-energy cover of that size,
/// then for every gateway budget from its cluster count to the level solve
/// for the fewest total hops. Objectives are `(gateways, avg_hop)`.
/// Levels resolving to the same count are swept once.
pub fn front_hop_vs_gateways(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    levels: &[FfdLevel],
    cp: &CoverageParams,
    bp: &BackboneParams,
    budget: &Budget,
) -> Result<Vec<LevelSweep>, ParetoError> {
    let min = match solve_cover(g, cp, budget)? {
        CoverOutcome::Solved(plan) => plan.ffd.len(),
        CoverOutcome::Infeasible => return Ok(vec![]),
        CoverOutcome::Limit { status, .. } => {
            return Ok(vec![LevelSweep {
                level: 0,
                clusters: 0,
                sweep: Sweep {
                    front: Front { points: vec![] },
                    status,
                },
            }])
        }
    };
    let n = g.node_count();
    let mut counts = BTreeSet::new();
    let mut order = Vec::new();
    for l in levels {
        let c = l.resolve(min, n);
        if c < min {
            return Err(ParetoError::LevelBelowCover { level: c, min });
        }
        if c > n {
            return Err(ParetoError::LevelAboveNodes { level: c, nodes: n });
        }
        if counts.insert(c) {
            order.push(c);
        }
    }
    let mut out = Vec::new();
    for level in order {
        let result = sweep_level(g, w, level, cp, bp, budget)?;
        let stop = result.sweep.status.is_limit();
        out.push(result);
        if stop {
            break;
        }
    }
    Ok(out)
}

fn sweep_level(
    g: &StreetGraph,
    w: &WirelessLinkSet,
    level: usize,
    cp: &CoverageParams,
    bp: &BackboneParams,
    budget: &Budget,
) -> Result<LevelSweep, ParetoError> {
    let empty = |status| LevelSweep {
        level,
        clusters: 0,
        sweep: Sweep {
            front: Front { points: vec![] },
            status,
        },
    };
    let cover = match min_energy_cover(g, cp, level, budget)? {
        CoverOutcome::Solved(plan) => plan,
        CoverOutcome::Infeasible => return Ok(empty(SolveStatus::Infeasible)),
        CoverOutcome::Limit { status, .. } => return Ok(empty(status)),
    };
    let traffic = cover_traffic(&cover, bp.per_sensor_rate);
    let clusters = connected_components(w, &cover.ffd).len();
    let mut points = Vec::new();
    let mut status = SolveStatus::Optimal;
    for k in clusters..=level {
        let out = solve_backbone(
            g,
            w,
            &cover.ffd,
            &traffic,
            &bp.with_budget(k),
            BackboneObjective::FixedGwMinHops,
            BackboneMethod::Search,
            budget,
        )?;
        match out {
            BackboneOutcome::Solved(s) => {
                let avg = backbone::avg_hop(&s.topology)?;
                points.push(ParetoPoint {
                    objectives: vec![k as f64, avg],
                    plan: HopPlan {
                        cover: cover.clone(),
                        traffic: traffic.clone(),
                        backbone: s,
                    },
                });
            }
            BackboneOutcome::Infeasible => {}
            BackboneOutcome::Limit(s) => {
                status = s;
                break;
            }
        }
    }
    if points.is_empty() && status == SolveStatus::Optimal {
        status = SolveStatus::Infeasible;
    }
    Ok(LevelSweep {
        level,
        clusters,
        sweep: Sweep {
            front: dominance_filter(points)?,
            status,
        },
    })
}
