//! Break a valid plan in two ways and list what the validator reports.

use parkmesh::backbone::{solve_backbone, BackboneMethod, BackboneObjective, BackboneParams};
use parkmesh::coverage::{min_energy_cover, CoverageParams};
use parkmesh::ilp::Limits;
use parkmesh::pareto::cover_traffic;
use parkmesh::plan::{validate, DeploymentPlan, PlanParams};
use parkmesh::streetgraph::{gen_grid, LinkMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(1, 4, 100.0, 0.1)?;
    let links = LinkMode::Street;
    let w = links.derive(&g)?;
    let cp = CoverageParams::default();
    let bp = BackboneParams::default().with_budget(1);
    let budget = Limits::default().start()?;
    let cover = min_energy_cover(&g, &cp, 4, &budget)?;
    let cover = cover.plan().ok_or("no cover")?;
    let traffic = cover_traffic(cover, bp.per_sensor_rate);
    let out = solve_backbone(
        &g,
        &w,
        &cover.ffd,
        &traffic,
        &bp,
        BackboneObjective::FixedGwMinHops,
        BackboneMethod::Search,
        &budget,
    )?;
    let topo = &out.solution().ok_or("no backbone")?.topology;
    let plan = DeploymentPlan::assemble(PlanParams::new(&cp, &bp, links), cover, &traffic, topo);
    println!("valid plan: {} violations", validate(&plan, &g)?.len());

    let mut reversed = plan.clone();
    let [i, j] = reversed.parent_links[0];
    reversed.parent_links.push([j, i]);
    println!("with parent link {j}->{i} added:");
    for v in validate(&reversed, &g)? {
        println!("  {v}");
    }

    let mut deep = plan.clone();
    *deep.hops.values_mut().next().unwrap() = bp.max_hops as usize + 1;
    println!("with a hop count above the limit:");
    for v in validate(&deep, &g)? {
        println!("  {v}");
    }
    Ok(())
}
