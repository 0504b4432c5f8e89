//! LP text for the placement model of a 2x3 grid.

use parkmesh::coverage::{build_cover_model, CoverageParams};
use parkmesh::ilp::export_lp;
use parkmesh::streetgraph::gen_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_grid(2, 3, 100.0, 0.1)?;
    let m = build_cover_model(&g, &CoverageParams::default())?;
    print!("{}", export_lp(&m)?);
    Ok(())
}
