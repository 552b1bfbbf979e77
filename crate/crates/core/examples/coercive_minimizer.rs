//! Minimizer for `lambda = 4 pi` with a sign-changing potential and a cone
//! point of order 1/2: gradient flow and Newton reach the same solution.

use std::f64::consts::PI;

use liouville_torus::functional::EnergyContext;
use liouville_torus::singular::{ConicalConfig, ConicalPoint, Formula, Potential};
use liouville_torus::solver::{minimize, newton_solve, SolverOptions};
use liouville_torus::surface::{Field, GreenFunction, Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let grid = Grid::square(Torus::unit(), 256)?;
    let k = Potential::from_formula(Formula::parse("cos(2*pi*x1)")?, &grid)?;
    let cones = ConicalConfig::attach(vec![ConicalPoint::new([0.0, 0.5], 0.5)?], &k)?;
    let green = GreenFunction::new(*grid.torus())?;
    let ctx = EnergyContext::new(4.0 * PI, cones.tilde_k_on_grid(&green, k.field())?)?;

    let u0 = Field::from_fn(&grid, |p| 2.0 * (2.0 * PI * p[0]).cos());
    let opts = SolverOptions::default();
    let flow = minimize(&ctx, &opts, &u0)?;
    let newton = newton_solve(&ctx, &opts, &u0)?;
    println!("I(u0)            {:.10}", ctx.energy(&u0)?.total);
    for (name, r) in [("flow", &flow), ("newton", &newton)] {
        println!(
            "{name:<7} steps {:>4}  residual {:.2e}  I {:.10}  index {}",
            r.iterations, r.residual, r.energy.total, r.morse.index
        );
    }
    println!("max |u_flow - u_newton| {:.2e}", flow.solution.sub(&newton.solution)?.max_abs());
    println!("Newton merit history {:?}", newton.history);
    Ok(())
}
