//! Continuation of the minimizer toward `lambda = 8 pi` on a coarse grid,
//! with the Kato statistics and the concentrated mass along the branch.

use std::f64::consts::PI;

use liouville_torus::functional::EnergyContext;
use liouville_torus::singular::{ConicalConfig, ConicalPoint, Formula, Potential};
use liouville_torus::solver::{branch_rows, continue_along, SolverOptions, BRANCH_CSV_HEADER};
use liouville_torus::surface::{Field, GreenFunction, Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let grid = Grid::square(Torus::unit(), 128)?;
    let k = Potential::from_formula(Formula::parse("cos(2*pi*x1)")?, &grid)?;
    let cones = ConicalConfig::attach(vec![ConicalPoint::new([0.0, 0.5], 0.5)?], &k)?;
    let green = GreenFunction::new(*grid.torus())?;
    let ctx = EnergyContext::new(4.0 * PI, cones.tilde_k_on_grid(&green, k.field())?)?;
    let opts = SolverOptions { tolerance: 1e-8, ..Default::default() };

    let mut lambdas: Vec<f64> = (0..=6).map(|i| 4.0 * PI + 0.5 * PI * i as f64).collect();
    lambdas.extend((1..=12).map(|j| 8.0 * PI - PI * 0.6f64.powi(j)));
    let seed = Field::from_fn(&grid, |p| 2.0 * (2.0 * PI * p[0]).cos());
    let branch = continue_along(&ctx, &seed, &lambdas, &opts)?;
    println!("{BRANCH_CSV_HEADER}");
    for row in branch_rows(&ctx, &branch, &cones.positive_orders())? {
        println!("{}", row.to_csv());
    }
    println!("termination: {:?}", branch.termination);
    Ok(())
}
