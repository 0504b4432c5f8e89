//! Sensor energy against the number of FFDs on a 3x3 grid.

use parkmesh::coverage::CoverageParams;
use parkmesh::ilp::Limits;
use parkmesh::pareto::front_energy_vs_ffd;
use parkmesh::streetgraph::gen_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(3, 3, 100.0, 0.1)?;
    let budget = Limits::default().start()?;
    let sweep = front_energy_vs_ffd(&g, &CoverageParams::default(), &budget)?;
    println!("status {}", sweep.status.as_str());
    for p in &sweep.front.points {
        let ffd: Vec<_> = p.plan.ffd.iter().collect();
        println!("{:>2} FFDs  energy {:>6}  at {ffd:?}", p.objectives[0], p.objectives[1]);
    }
    Ok(())
}
