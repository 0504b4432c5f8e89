//! Acceptance suite: one PASS/FAIL line per criterion.

mod support;

use std::collections::BTreeSet;
use std::time::Instant;

use parkmesh::backbone::{
    build_backbone_model, solve_backbone, BackboneError, BackboneMethod, BackboneObjective,
    BackboneParams, TrafficVector,
};
use parkmesh::coverage::{
    allocate_gamma, capacity_non_binding, min_energy_cover, solve_cover, total_energy, CoverOutcome, CoverSelection,
    CoverageError, CoverageParams,
};
use parkmesh::family::Family;
use parkmesh::ilp::{check, Budget, Limits, SolveStatus};
use parkmesh::pareto::{
    cover_traffic, front_energy_vs_ffd, front_hop_vs_gateways, FfdLevel,
};
use parkmesh::plan::{validate, DeploymentPlan, PlanParams};
use parkmesh::streetgraph::{
    connected_components, gen_grid, LinkMode, StreetGraph, WirelessLinkSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;

fn budget() -> Budget {
    Limits::default().start().unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Small graphs used by the coverage criteria: every connected graph on 2 to
/// 6 vertices, each with a non-binding and a tight sensor limit.
fn coverage_instances() -> Vec<(StreetGraph, u64, &'static str)> {
    let mut out = Vec::new();
    for n in 2..=6 {
        for edges in connected_graphs(n) {
            let g = street_graph(n, &edges, 4);
            let max_s = segment_sensors(&g).iter().map(|s| s.2).max().unwrap();
            out.push((g.clone(), 1000, "loose"));
            out.push((g, max_s, "tight"));
        }
    }
    out
}

fn criterion_1(instances: &[(StreetGraph, u64, &str)]) -> Outcome {
    let started = Instant::now();
    let mut infeasible = 0;
    let mut binding = 0;
    for (g, cap, kind) in instances {
        let n = g.node_count();
        let segs = segment_sensors(g);
        let expect = brute_min_cover(n, &segs, *cap);
        let p = CoverageParams {
            max_sensors: *cap,
            ffd_budget: None,
        };
        if !capacity_non_binding(g, &p) {
            binding += 1;
        }
        let got = match solve_cover(g, &p, &budget()) {
            Ok(CoverOutcome::Solved(plan)) => Some(plan.ffd.len()),
            Ok(CoverOutcome::Infeasible) => None,
            other => return Err(format!("{kind} n={n}: unexpected {other:?}")),
        };
        if got.is_none() {
            infeasible += 1;
        }
        ensure(got == expect, || {
            format!("{kind} n={n} edges={:?}: solver {got:?}, brute force {expect:?}", segs)
        })?;
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} instances ({} graphs), {binding} with a binding limit, {infeasible} infeasible, {secs:.1} s",
        instances.len(),
        instances.len() / 2
    ))
}

fn criterion_2(instances: &[(StreetGraph, u64, &str)]) -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for (g, cap, kind) in instances {
        let n = g.node_count();
        let segs = segment_sensors(g);
        let p = CoverageParams {
            max_sensors: *cap,
            ffd_budget: None,
        };
        for mask in 0u32..(1 << n) {
            let ffd: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let covers = segs
                .iter()
                .all(|&(u, v, _)| ffd.contains(&u) || ffd.contains(&v));
            if !covers {
                continue;
            }
            let expect = brute_energy(n, &segs, &ffd, *cap);
            let got = match allocate_gamma(g, &ffd, &p) {
                Ok((_, counts)) => Some(total_energy(&counts) as u64),
                Err(CoverageError::CapacityExceeded { .. }) => None,
                Err(e) => return Err(format!("{kind} n={n} {ffd:?}: {e}")),
            };
            ensure(got == expect, || {
                format!("{kind} n={n} {ffd:?}: allocation {got:?}, brute force {expect:?}")
            })?;
            checked += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{checked} covers, {secs:.1} s"))
}

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let mut cases = 0;
    let mut graphs = 0;
    for n in 1..=5 {
        for edges in connected_graphs(n) {
            graphs += 1;
            // The street graph only fixes the node count; links come from W.
            let g = gen_grid(1, n + 1, 100.0, 0.1).unwrap();
            let w = WirelessLinkSet::from_pairs(n + 1, edges.iter().copied());
            let ffd: BTreeSet<usize> = (0..n).collect();
            let settings = [
                (vec![0.1; n], 10, 100.0, 1000.0),
                (vec![1.0; n], 3, 2.0, 4.0),
            ];
            for (rate, max_hops, rt, gw) in &settings {
                let f = TrafficVector {
                    f: (0..n).map(|i| (i, rate[i])).collect(),
                };
                let case = BackboneCase {
                    n,
                    edges: &edges,
                    rate,
                    max_hops: *max_hops,
                    router_cap: *rt,
                    gateway_cap: *gw,
                };
                for k in 1..=n {
                    let expect = brute_backbone(&case, k);
                    let p = BackboneParams {
                        max_hops: *max_hops as u32,
                        router_capacity: *rt,
                        gateway_capacity: *gw,
                        gw_budget: Some(k),
                        per_sensor_rate: 0.01,
                    };
                    for method in [BackboneMethod::Ilp, BackboneMethod::Search] {
                        let out = solve_backbone(
                            &g,
                            &w,
                            &ffd,
                            &f,
                            &p,
                            BackboneObjective::FixedGwMinHops,
                            method,
                            &budget(),
                        )
                        .map_err(|e| format!("n={n} k={k} {method:?}: {e}"))?;
                        let got = out.solution().map(|s| s.topology.total_hops());
                        ensure(got == expect, || {
                            format!(
                                "n={n} edges={edges:?} k={k} {method:?}: solver {got:?}, brute force {expect:?}"
                            )
                        })?;
                        if let Some(s) = out.solution() {
                            let full = build_backbone_model(
                                &g,
                                &w,
                                &ffd,
                                &f,
                                &p,
                                BackboneObjective::FixedGwMinHops,
                            )
                            .unwrap();
                            let v = check(&full.model, &s.assignment, 1e-6).unwrap();
                            ensure(v.is_empty(), || format!("n={n} k={k}: {v:?}"))?;
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{graphs} graphs, {cases} budgets, both solvers, {secs:.1} s"))
}

fn criterion_4() -> Outcome {
    let g = gen_grid(5, 5, 100.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = Vec::new();
    for (mode, w) in [
        ("street", LinkMode::Street.derive(&g).unwrap()),
        (
            "radio",
            LinkMode::Distance { radio_range_m: 150.0 }.derive(&g).unwrap(),
        ),
    ] {
        for trial in 0..20 {
            let size = rng.gen_range(4..=14);
            let mut ids: Vec<usize> = (0..25).collect();
            ids.shuffle(&mut rng);
            let ffd: BTreeSet<usize> = ids[..size].iter().copied().collect();
            let clusters = connected_components(&w, &ffd).len();
            let f = TrafficVector::uniform(ffd.iter().copied(), 0.1);
            let out = solve_backbone(
                &g,
                &w,
                &ffd,
                &f,
                &BackboneParams::default(),
                BackboneObjective::MinGateways,
                BackboneMethod::Search,
                &budget(),
            )
            .map_err(|e| format!("{mode} trial {trial}: {e}"))?;
            let s = out.solution().ok_or(format!("{mode} trial {trial}: {out:?}"))?;
            let gws = s.topology.gateways().len();
            ensure(gws == clusters, || {
                format!("{mode} trial {trial}: {gws} gateways for {clusters} clusters")
            })?;
            let below = BackboneParams::default().with_budget(clusters - 1);
            if clusters > 1 {
                let err = solve_backbone(
                    &g,
                    &w,
                    &ffd,
                    &f,
                    &below,
                    BackboneObjective::FixedGwMinHops,
                    BackboneMethod::Search,
                    &budget(),
                )
                .unwrap_err();
                ensure(matches!(err, BackboneError::TooFewGateways { .. }), || {
                    format!("{mode} trial {trial}: {err}")
                })?;
            }
            seen.push(clusters);
        }
    }
    Ok(format!("40 FFD sets, cluster counts {seen:?}"))
}

fn monotone_fixtures() -> Vec<(&'static str, StreetGraph)> {
    vec![
        ("2x2", gen_grid(2, 2, 100.0, 0.1).unwrap()),
        ("3x3", gen_grid(3, 3, 100.0, 0.1).unwrap()),
        ("5x5", gen_grid(5, 5, 100.0, 0.1).unwrap()),
        ("3-spine", three_spine()),
    ]
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (name, g) in monotone_fixtures() {
        let cp = CoverageParams::default();
        let e = front_energy_vs_ffd(&g, &cp, &budget()).map_err(|e| e.to_string())?;
        ensure(e.status == SolveStatus::Optimal, || format!("{name}: {:?}", e.status))?;
        let energies: Vec<f64> = e.front.points.iter().map(|p| p.objectives[1]).collect();
        ensure(energies.windows(2).all(|w| w[1] <= w[0]), || {
            format!("{name}: energy front {energies:?}")
        })?;
        // Unfiltered sweep: every budget, not just the front.
        let mut last = f64::INFINITY;
        let min = e.front.points[0].objectives[0] as usize;
        for t in min..=g.node_count() {
            let out = min_energy_cover(&g, &cp, t, &budget()).map_err(|e| e.to_string())?;
            let energy = out.plan().ok_or(format!("{name} t={t}: no cover"))?.energy;
            ensure(energy <= last, || format!("{name}: energy rises at t={t}"))?;
            last = energy;
        }
        for links in [
            LinkMode::Street,
            LinkMode::Distance { radio_range_m: 150.0 },
        ] {
            let w = links.derive(&g).unwrap();
            let sweeps = front_hop_vs_gateways(
                &g,
                &w,
                &[FfdLevel::Worst, FfdLevel::Mediocre, FfdLevel::Best],
                &cp,
                &BackboneParams::default(),
                &budget(),
            )
            .map_err(|e| e.to_string())?;
            for s in &sweeps {
                ensure(s.sweep.status == SolveStatus::Optimal, || {
                    format!("{name} level {}: {:?}", s.level, s.sweep.status)
                })?;
                let pts = &s.sweep.front.points;
                let hops: Vec<f64> = pts.iter().map(|p| p.objectives[1]).collect();
                ensure(hops.windows(2).all(|w| w[1] <= w[0]), || {
                    format!("{name} level {}: hop front {hops:?}", s.level)
                })?;
                ensure(pts[0].objectives[0] as usize == s.clusters, || {
                    format!("{name} level {}: front starts at {}", s.level, pts[0].objectives[0])
                })?;
            }
        }
        notes.push(format!("{name}: {} energy points", energies.len()));
    }
    Ok(notes.join(", "))
}

/// A valid plan for each fixture, at a mid-size gateway budget.
fn plan_fixtures() -> Vec<(String, StreetGraph, DeploymentPlan)> {
    let mut fixtures = Vec::new();
    let graphs = [
        ("path", gen_grid(1, 4, 100.0, 0.1).unwrap(), LinkMode::Street),
        ("2x2", gen_grid(2, 2, 100.0, 0.1).unwrap(), LinkMode::Street),
        (
            "3x3",
            gen_grid(3, 3, 100.0, 0.1).unwrap(),
            LinkMode::Distance { radio_range_m: 150.0 },
        ),
        ("3-spine", three_spine(), LinkMode::Street),
        ("5x5", gen_grid(5, 5, 100.0, 0.1).unwrap(), LinkMode::Street),
    ];
    for (name, g, links) in graphs {
        let cp = CoverageParams::default();
        let w = links.derive(&g).unwrap();
        let n = g.node_count();
        let t = (n * 3).div_ceil(4);
        let cover = min_energy_cover(&g, &cp, t, &budget()).unwrap();
        let cover = cover.plan().unwrap().clone();
        let clusters = connected_components(&w, &cover.ffd).len();
        let bp = BackboneParams::default().with_budget(clusters.max(2).min(cover.ffd.len()));
        let traffic = cover_traffic(&cover, bp.per_sensor_rate);
        let out = solve_backbone(
            &g,
            &w,
            &cover.ffd,
            &traffic,
            &bp,
            BackboneObjective::FixedGwMinHops,
            BackboneMethod::Search,
            &budget(),
        )
        .unwrap();
        let topo = &out.solution().unwrap().topology;
        let plan = DeploymentPlan::assemble(PlanParams::new(&cp, &bp, links), &cover, &traffic, topo);
        fixtures.push((name.to_string(), g, plan));
    }
    fixtures
}

fn toggle(list: &mut Vec<[usize; 2]>, pair: [usize; 2]) {
    match list.iter().position(|&p| p == pair) {
        Some(pos) => {
            list.remove(pos);
        }
        None => list.push(pair),
    }
}

fn toggle_one(list: &mut Vec<usize>, i: usize) {
    match list.iter().position(|&p| p == i) {
        Some(pos) => {
            list.remove(pos);
        }
        None => list.push(i),
    }
}

fn criterion_6() -> Outcome {
    use Family::*;
    let b_fams = [
        NoSelfParent,
        ParentIsAncestor,
        ParentOneWay,
        ParentCount,
        AncestorsUp,
        AncestorsDown,
    ];
    let a_fams = [
        SelfAncestor,
        AncestorsAreFfds,
        AncestorOneWay,
        ParentIsAncestor,
        GatewayIsAncestor,
        AncestorsUp,
        AncestorsDown,
        GatewayInherited,
        RootAncestors,
        HopCount,
        TrafficLoad,
    ];
    let g_fams = [
        GatewaySelf,
        GatewayInstalled,
        GatewayOneWay,
        GatewayIsAncestor,
        GatewayCount,
        GatewayInherited,
    ];
    let x_fams = [
        FfdManagesGamma,
        GatewayIsFfd,
        ParentCount,
        SelfAncestor,
        AncestorsAreFfds,
        GatewayCount,
        PacketRate,
    ];
    let y_fams = [
        GatewayIsFfd,
        ParentCount,
        GatewaySelf,
        GatewayInstalled,
        RootAncestors,
        TrafficLoad,
    ];
    let gamma_fams = [SumOfGamma, GammaWithinSegment, FfdManagesGamma, SensorCount];
    let h_fams = [HopCount, HopMax];

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut total = 0;
    let fixtures = plan_fixtures();
    for (name, g, plan) in &fixtures {
        let base = validate(plan, g).map_err(|e| e.to_string())?;
        ensure(base.is_empty(), || format!("{name}: base plan invalid {base:?}"))?;
        let n = g.node_count();
        for m in 0..100 {
            let mut p = plan.clone();
            let (what, expected): (String, &[Family]) = match m % 7 {
                0 => {
                    let pair = [rng.gen_range(0..n), rng.gen_range(0..n)];
                    toggle(&mut p.parent_links, pair);
                    (format!("b{pair:?}"), &b_fams)
                }
                1 => {
                    let pair = [rng.gen_range(0..n), rng.gen_range(0..n)];
                    toggle(&mut p.ancestry, pair);
                    (format!("a{pair:?}"), &a_fams)
                }
                2 => {
                    let pair = [rng.gen_range(0..n), rng.gen_range(0..n)];
                    toggle(&mut p.management, pair);
                    (format!("g{pair:?}"), &g_fams)
                }
                3 => {
                    let i = rng.gen_range(0..n);
                    toggle_one(&mut p.ffd, i);
                    (format!("x[{i}]"), &x_fams)
                }
                4 => {
                    let i = rng.gen_range(0..n);
                    toggle_one(&mut p.gateways, i);
                    (format!("y[{i}]"), &y_fams)
                }
                5 => {
                    let idx = rng.gen_range(0..p.gamma.len());
                    let delta = rng.gen_range(0.5..20.0) * if rng.gen() { 1.0 } else { -1.0 };
                    p.gamma[idx].managed_len_m += delta;
                    (format!("gamma #{idx} by {delta:.2}"), &gamma_fams)
                }
                _ => {
                    let keys: Vec<usize> = p.hops.keys().copied().collect();
                    let i = *keys.choose(&mut rng).unwrap();
                    *p.hops.get_mut(&i).unwrap() += 1;
                    (format!("h[{i}]"), &h_fams)
                }
            };
            let v = validate(&p, g).map_err(|e| e.to_string())?;
            ensure(v.iter().any(|x| expected.contains(&x.family)), || {
                format!("{name}: mutation {what} gave {v:?}")
            })?;
            total += 1;
        }
    }
    Ok(format!("{total} mutations over {} fixtures", fixtures.len()))
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let g = gen_grid(5, 5, 100.0, 0.1).unwrap();
    ensure(g.node_count() == 25 && g.segments().len() == 40, || "fixture".into())?;
    let cp = CoverageParams::default();
    let limits = Limits {
        max_nodes: 50_000_000,
        max_seconds: 600.0,
    };
    let b = limits.start().unwrap();
    let e = front_energy_vs_ffd(&g, &cp, &b).map_err(|e| e.to_string())?;
    ensure(e.status == SolveStatus::Optimal, || format!("energy: {:?}", e.status))?;
    for p in &e.front.points {
        ensure(p.plan.selection != CoverSelection::TieBroken, || {
            format!("budget {} not exact", p.objectives[0])
        })?;
    }
    let mut points = e.front.points.len();
    for links in [
        LinkMode::Street,
        LinkMode::Distance { radio_range_m: 150.0 },
    ] {
        let w = links.derive(&g).unwrap();
        let sweeps = front_hop_vs_gateways(
            &g,
            &w,
            &[FfdLevel::Worst, FfdLevel::Mediocre, FfdLevel::Best],
            &cp,
            &BackboneParams::default(),
            &b,
        )
        .map_err(|e| e.to_string())?;
        for s in &sweeps {
            ensure(s.sweep.status == SolveStatus::Optimal, || {
                format!("hops level {}: {:?}", s.level, s.sweep.status)
            })?;
            points += s.sweep.front.points.len();
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 600.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{points} front points, all optimal, {secs:.2} s"))
}

fn criterion_8() -> Outcome {
    let g = gen_grid(2, 2, 100.0, 0.1).unwrap();
    let segs = segment_sensors(&g);
    let oracle: Vec<(usize, u64)> = (2..=4)
        .map(|t| (t, brute_energy_at(4, &segs, 256, t).unwrap()))
        .collect();
    ensure(oracle == vec![(2, 220), (3, 170), (4, 120)], || {
        format!("oracle energy front {oracle:?}")
    })?;
    let e = front_energy_vs_ffd(&g, &CoverageParams::default(), &budget()).unwrap();
    let got: Vec<(usize, u64)> = e
        .front
        .points
        .iter()
        .map(|p| (p.objectives[0] as usize, p.objectives[1] as u64))
        .collect();
    ensure(got == oracle, || format!("energy front {got:?}"))?;

    let path = gen_grid(1, 3, 100.0, 0.1).unwrap();
    let w = LinkMode::Street.derive(&path).unwrap();
    let case = BackboneCase {
        n: 3,
        edges: &[(0, 1), (1, 2)],
        rate: &[0.1; 3],
        max_hops: 10,
        router_cap: 100.0,
        gateway_cap: 1000.0,
    };
    let oracle: Vec<(usize, f64)> = (1..=3)
        .map(|k| (k, brute_backbone(&case, k).unwrap() as f64 / 3.0))
        .collect();
    let expect = vec![(1, 5.0 / 3.0), (2, 4.0 / 3.0), (3, 1.0)];
    ensure(oracle == expect, || format!("oracle hop front {oracle:?}"))?;
    let sweeps = front_hop_vs_gateways(
        &path,
        &w,
        &[FfdLevel::Best],
        &CoverageParams::default(),
        &BackboneParams::default(),
        &budget(),
    )
    .unwrap();
    let got: Vec<(usize, f64)> = sweeps[0]
        .sweep
        .front
        .points
        .iter()
        .map(|p| (p.objectives[0] as usize, p.objectives[1]))
        .collect();
    ensure(got == expect, || format!("hop front {got:?}"))?;
    Ok("2x2 energy {(2,220),(3,170),(4,120)}, path hops {(1,5/3),(2,4/3),(3,1)}".into())
}

fn main() {
    let instances = coverage_instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 cover oracle", Box::new(|| criterion_1(&instances))),
        ("2 energy oracle", Box::new(|| criterion_2(&instances))),
        ("3 backbone oracle", Box::new(criterion_3)),
        ("4 cluster lower bound", Box::new(criterion_4)),
        ("5 monotone fronts", Box::new(criterion_5)),
        ("6 validator completeness", Box::new(criterion_6)),
        ("7 5x5 two-front run", Box::new(criterion_7)),
        ("8 fixed front values", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
