//! The whole pipeline on a 4x4 grid: minimum FFDs, minimum-energy sensor
//! split, minimum gateways, then the plan document.

use parkmesh::backbone::{
    solve_backbone, BackboneMethod, BackboneObjective, BackboneParams,
};
use parkmesh::coverage::{min_energy_cover, solve_cover, CoverageParams};
use parkmesh::ilp::Limits;
use parkmesh::pareto::cover_traffic;
use parkmesh::plan::{validate, DeploymentPlan, PlanParams};
use parkmesh::streetgraph::{gen_grid, LinkMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(4, 4, 100.0, 0.1)?;
    let links = LinkMode::Distance { radio_range_m: 150.0 };
    let w = links.derive(&g)?;
    let cp = CoverageParams::default();
    let bp = BackboneParams::default();
    let budget = Limits::default().start()?;

    let min = solve_cover(&g, &cp, &budget)?.plan().ok_or("no cover")?.ffd.len();
    let cover = min_energy_cover(&g, &cp, min, &budget)?;
    let cover = cover.plan().ok_or("no cover")?;
    let traffic = cover_traffic(cover, bp.per_sensor_rate);
    let out = solve_backbone(
        &g,
        &w,
        &cover.ffd,
        &traffic,
        &bp,
        BackboneObjective::MinGateways,
        BackboneMethod::Search,
        &budget,
    )?;
    let backbone = out.solution().ok_or("no backbone")?;

    let plan = DeploymentPlan::assemble(PlanParams::new(&cp, &bp, links), cover, &traffic, &backbone.topology);
    assert!(validate(&plan, &g)?.is_empty());
    println!("{}", plan.to_json());
    Ok(())
}
