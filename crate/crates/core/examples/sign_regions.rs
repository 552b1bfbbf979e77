//! Topology of the sign regions of a potential and the multiplicity count it
//! implies for a given `lambda`.

use std::f64::consts::PI;

use liouville_torus::morse::{band_index, closed_betti, multiplicity_general};
use liouville_torus::singular::{classify_sign_regions, Formula, Potential};
use liouville_torus::surface::{Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let grid = Grid::square(Torus::unit(), 128)?;
    for src in [
        "cos(2*pi*x1)",
        "cos(2*pi*x1) + cos(2*pi*x2) - 1",
        "cos(2*pi*x1) + cos(2*pi*x2) + 1",
        "cos(4*pi*x1) + cos(2*pi*x2) - 1.2",
        "cos(2*pi*x1) + cos(2*pi*x2)",
    ] {
        let k = match Potential::from_formula(Formula::parse(src)?, &grid) {
            Ok(k) => k,
            Err(e) => {
                println!("K = {src}\n  rejected: {e}");
                continue;
            }
        };
        let regions = classify_sign_regions(&k)?;
        let topo = &regions.topology;
        let lambda = 12.0 * PI;
        let kk = band_index(lambda);
        println!("K = {src}");
        for c in &regions.positive {
            println!("  positive component: cells {}, genus {}, boundaries {}, g = {}", c.cells, c.genus, c.boundaries, c.g);
        }
        println!(
            "  N = {}, M = {}, k = {kk}: d = {:?}, lower bound {}",
            topo.n(),
            topo.m(),
            closed_betti(kk, topo)?.as_slice(),
            multiplicity_general(kk, topo)?
        );
    }
    Ok(())
}
