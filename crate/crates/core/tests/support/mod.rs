//! Brute-force oracles and fixtures shared by the integration tests.
//!
//! Nothing here calls the solver: covers, sensor splits, and backbone
//! forests are enumerated directly.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use parkmesh::streetgraph::{Intersection, RoadSegment, StreetGraph};

/// Every connected simple graph on `n` vertices, one per isomorphism class,
/// as sorted edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(u, v)| {
                        let (a, b) = (p[u], p[v]);
                        (a.min(b), a.max(b))
                    })
                    .collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// A street graph with nodes on a circle, edge lengths chosen so segments
/// carry between 1 and `max_sensors_per_edge` sensors at density 0.1.
pub fn street_graph(n: usize, edges: &[(usize, usize)], max_sensors_per_edge: u64) -> StreetGraph {
    let nodes = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            Intersection {
                id: i,
                x: 100.0 * t.cos(),
                y: 100.0 * t.sin(),
                label: None,
            }
        })
        .collect();
    let segs = edges
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let s = 1 + (e as u64 * 7 + n as u64) % max_sensors_per_edge;
            RoadSegment {
                endpoints: (u, v),
                length_m: 10.0 * s as f64 + 5.0,
                sensor_density_per_m: 0.1,
                has_parking: true,
            }
        })
        .collect();
    StreetGraph::new(nodes, segs).unwrap()
}

/// `(u, v, sensors)` for each parking segment.
pub fn segment_sensors(g: &StreetGraph) -> Vec<(usize, usize, u64)> {
    g.segments()
        .iter()
        .filter(|s| s.has_parking)
        .map(|s| {
            let k = (s.length_m * s.sensor_density_per_m + 1e-9).floor() as u64;
            (s.endpoints.0, s.endpoints.1, k)
        })
        .collect()
}

fn tri(k: u64) -> u64 {
    k * (k + 1) / 2
}

/// Minimum energy over every integer split of every segment's sensors
/// between its FFD ends with at most `cap` sensors per FFD, or `None` when
/// no split fits.
pub fn brute_energy(
    n: usize,
    segs: &[(usize, usize, u64)],
    ffd: &BTreeSet<usize>,
    cap: u64,
) -> Option<u64> {
    if segs
        .iter()
        .any(|&(u, v, _)| !ffd.contains(&u) && !ffd.contains(&v))
    {
        return None;
    }
    let mut load = vec![0u64; n];
    let mut best = None;
    split(segs, ffd, cap, 0, &mut load, 0, &mut best);
    best
}

fn split(
    segs: &[(usize, usize, u64)],
    ffd: &BTreeSet<usize>,
    cap: u64,
    idx: usize,
    load: &mut [u64],
    cost: u64,
    best: &mut Option<u64>,
) {
    let rest: u64 = segs[idx..]
        .iter()
        .map(|&(_, _, s)| tri(s / 2) + tri(s - s / 2))
        .sum();
    if best.is_some_and(|b| cost + rest >= b) {
        return;
    }
    let Some(&(u, v, s)) = segs.get(idx) else {
        *best = Some(cost);
        return;
    };
    for ku in 0..=s {
        let kv = s - ku;
        if (ku > 0 && !ffd.contains(&u)) || (kv > 0 && !ffd.contains(&v)) {
            continue;
        }
        if load[u] + ku > cap || load[v] + kv > cap {
            continue;
        }
        load[u] += ku;
        load[v] += kv;
        split(segs, ffd, cap, idx + 1, load, cost + tri(ku) + tri(kv), best);
        load[u] -= ku;
        load[v] -= kv;
    }
}

/// Smallest FFD count with a feasible split, by enumerating all subsets.
pub fn brute_min_cover(n: usize, segs: &[(usize, usize, u64)], cap: u64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let ffd = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if brute_energy(n, segs, &ffd, cap).is_some() {
            best = Some(size);
        }
    }
    best
}

/// Minimum energy over all FFD sets of exactly `t` nodes.
pub fn brute_energy_at(n: usize, segs: &[(usize, usize, u64)], cap: u64, t: usize) -> Option<u64> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == t)
        .filter_map(|mask| {
            let ffd = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            brute_energy(n, segs, &ffd, cap)
        })
        .min()
}

pub struct BackboneCase<'a> {
    pub n: usize,
    pub edges: &'a [(usize, usize)],
    pub rate: &'a [f64],
    pub max_hops: usize,
    pub router_cap: f64,
    pub gateway_cap: f64,
}

/// Minimum total hop count over every gateway set of size `k` and every
/// parent choice, or `None` if nothing is feasible. Hops include the node.
pub fn brute_backbone(c: &BackboneCase, k: usize) -> Option<usize> {
    let n = c.n;
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in c.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut best = None;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let gw: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let routers: Vec<usize> = (0..n).filter(|&i| !gw[i]).collect();
        let mut choice = vec![0usize; routers.len()];
        'forests: loop {
            if routers.iter().all(|&r| !adj[r].is_empty()) {
                let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
                for (idx, &r) in routers.iter().enumerate() {
                    parent.insert(r, adj[r][choice[idx]]);
                }
                if let Some(total) = evaluate(c, &gw, &parent) {
                    if best.map_or(true, |b| total < b) {
                        best = Some(total);
                    }
                }
            }
            // next parent choice, odometer style
            let mut pos = 0;
            loop {
                if pos == routers.len() {
                    break 'forests;
                }
                let r = routers[pos];
                choice[pos] += 1;
                if choice[pos] < adj[r].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
    best
}

fn evaluate(c: &BackboneCase, gw: &[bool], parent: &BTreeMap<usize, usize>) -> Option<usize> {
    let n = c.n;
    let mut load = vec![0.0; n];
    let mut total = 0;
    for i in 0..n {
        let mut at = i;
        let mut hops = 1;
        load[i] += c.rate[i];
        while !gw[at] {
            at = parent[&at];
            hops += 1;
            if hops > n {
                return None;
            }
            load[at] += c.rate[i];
        }
        if hops > c.max_hops {
            return None;
        }
        total += hops;
    }
    for i in 0..n {
        let cap = if gw[i] { c.gateway_cap } else { c.router_cap };
        if load[i] > cap + 1e-9 {
            return None;
        }
    }
    Some(total)
}

/// Three parallel streets of uneven lengths with four cross streets, one of
/// them without parking.
pub fn three_spine() -> StreetGraph {
    let xs = [0.0, 90.0, 210.0, 300.0];
    let ys = [0.0, 120.0, 200.0];
    let mut nodes = Vec::new();
    for (r, &y) in ys.iter().enumerate() {
        for (c, &x) in xs.iter().enumerate() {
            nodes.push(Intersection {
                id: r * xs.len() + c,
                x: x + (r as f64) * 7.0,
                y,
                label: Some(format!("s{r}-{c}")),
            });
        }
    }
    let id = |r: usize, c: usize| r * xs.len() + c;
    let mut segs = Vec::new();
    let mut add = |u: usize, v: usize, len: f64, rho: f64, parking: bool| {
        segs.push(RoadSegment {
            endpoints: (u.min(v), u.max(v)),
            length_m: len,
            sensor_density_per_m: if parking { rho } else { 0.0 },
            has_parking: parking,
        })
    };
    for r in 0..ys.len() {
        for c in 0..xs.len() - 1 {
            add(id(r, c), id(r, c + 1), xs[c + 1] - xs[c] + 3.0 * r as f64, 0.12, true);
        }
    }
    for c in 0..xs.len() {
        for r in 0..ys.len() - 1 {
            let parking = !(c == 2 && r == 0);
            add(id(r, c), id(r + 1, c), ys[r + 1] - ys[r], 0.08, parking);
        }
    }
    StreetGraph::new(nodes, segs).unwrap()
}

/// Read LP text back into `(row name, terms, sense, rhs)` and the variable
/// sections, independently of the exporter.
pub struct ParsedLp {
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<(String, Vec<(f64, String)>, String, f64)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
}

pub fn parse_lp(text: &str) -> ParsedLp {
    let mut section = "";
    let mut objective = Vec::new();
    let mut rows: Vec<(String, Vec<(f64, String)>, String, f64)> = Vec::new();
    let mut generals = Vec::new();
    let mut binaries = Vec::new();
    let mut pending = String::new();
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('\\') || t.is_empty() {
            continue;
        }
        match t {
            "Minimize" | "Subject To" | "Bounds" | "Generals" | "Binary" | "End" => {
                section = match t {
                    "Minimize" => "min",
                    "Subject To" => "st",
                    "Bounds" => "bounds",
                    "Generals" => "gen",
                    "Binary" => "bin",
                    _ => "end",
                };
                continue;
            }
            _ => {}
        }
        match section {
            "min" => {
                let body = t.strip_prefix("obj:").unwrap_or(t);
                objective.extend(terms(body));
            }
            "st" => {
                pending.push(' ');
                pending.push_str(t);
                if let Some(pos) = ["<=", ">=", "="].iter().find_map(|op| pending.find(op)) {
                    let (lhs, rest) = pending.split_at(pos);
                    let op = if rest.starts_with("<=") {
                        "<="
                    } else if rest.starts_with(">=") {
                        ">="
                    } else {
                        "="
                    };
                    let rhs: f64 = rest[op.len()..].trim().parse().unwrap();
                    let (name, body) = lhs.split_once(':').unwrap();
                    rows.push((name.trim().to_string(), terms(body), op.to_string(), rhs));
                    pending.clear();
                }
            }
            "gen" => generals.extend(t.split_whitespace().map(String::from)),
            "bin" => binaries.extend(t.split_whitespace().map(String::from)),
            _ => {}
        }
    }
    ParsedLp {
        objective,
        rows,
        generals,
        binaries,
    }
}

fn terms(body: &str) -> Vec<(f64, String)> {
    let toks: Vec<&str> = body.split_whitespace().collect();
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in toks {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t => {
                if let Ok(v) = t.parse::<f64>() {
                    coef = Some(v);
                } else {
                    out.push((sign * coef.unwrap_or(1.0), t.to_string()));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    out
}
