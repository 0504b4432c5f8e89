//! Scattered FFDs split into radio clusters; each needs its own gateway.

use std::collections::BTreeSet;

use parkmesh::backbone::{
    solve_backbone, BackboneMethod, BackboneObjective, BackboneParams, TrafficVector,
};
use parkmesh::ilp::Limits;
use parkmesh::streetgraph::{connected_components, gen_grid, LinkMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(5, 5, 100.0, 0.1)?;
    let w = LinkMode::Street.derive(&g)?;
    let ffd: BTreeSet<usize> = [0, 1, 5, 3, 4, 9, 20, 21, 23, 24, 12].into();
    let clusters = connected_components(&w, &ffd);
    println!("{} clusters: {clusters:?}", clusters.len());

    let f = TrafficVector::uniform(ffd.iter().copied(), 0.2);
    let out = solve_backbone(
        &g,
        &w,
        &ffd,
        &f,
        &BackboneParams::default(),
        BackboneObjective::MinGateways,
        BackboneMethod::Search,
        &Limits::default().start()?,
    )?;
    let s = out.solution().ok_or("no backbone")?;
    println!("gateways {:?}", s.topology.gateways());
    for (i, p) in &s.topology.parents {
        println!("  {i} -> {p}");
    }
    Ok(())
}
