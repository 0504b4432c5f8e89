//! Average hop count against gateway count on a 5x5 grid, at the worst,
//! mediocre and best FFD levels.

use parkmesh::backbone::BackboneParams;
use parkmesh::coverage::CoverageParams;
use parkmesh::ilp::Limits;
use parkmesh::pareto::{front_hop_vs_gateways, FfdLevel};
use parkmesh::streetgraph::{gen_grid, LinkMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(5, 5, 100.0, 0.1)?;
    let w = LinkMode::Distance { radio_range_m: 150.0 }.derive(&g)?;
    let budget = Limits::default().start()?;
    let levels = [FfdLevel::Worst, FfdLevel::Mediocre, FfdLevel::Best];
    let started = std::time::Instant::now();
    let sweeps = front_hop_vs_gateways(
        &g,
        &w,
        &levels,
        &CoverageParams::default(),
        &BackboneParams::default(),
        &budget,
    )?;
    for s in &sweeps {
        println!("{} FFDs, {} clusters, {}", s.level, s.clusters, s.sweep.status.as_str());
        for p in &s.sweep.front.points {
            println!("  {:>2} gateways  avg hop {:.4}", p.objectives[0], p.objectives[1]);
        }
    }
    eprintln!("{:.2?}", started.elapsed());
    Ok(())
}
