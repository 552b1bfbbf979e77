//! Saddle points for `lambda = 10 pi`: Newton from a bubble at the cone
//! point, then deflation to find the mirror-image solution.

use std::f64::consts::PI;

use liouville_torus::functional::{bubble_singular_raw, EnergyContext};
use liouville_torus::singular::{ConicalConfig, ConicalPoint, Formula, Potential};
use liouville_torus::solver::{deflated_newton, newton_solve, SolverOptions};
use liouville_torus::surface::{Field, GreenFunction, Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let grid = Grid::square(Torus::unit(), 128)?;
    let k = Potential::from_formula(Formula::parse("cos(2*pi*x1)")?, &grid)?;
    let cones = ConicalConfig::attach(vec![ConicalPoint::new([0.0, 0.5], 0.5)?], &k)?;
    let green = GreenFunction::new(*grid.torus())?;
    let ctx = EnergyContext::new(10.0 * PI, cones.tilde_k_on_grid(&green, k.field())?)?;
    let opts = SolverOptions::default();

    let tilt = Field::from_fn(&grid, |p| -0.3 * (2.0 * PI * p[0]).sin());
    let u0 = bubble_singular_raw(&grid, [0.0, 0.5], 0.5, 20.0, 1.0 / 16.0)?
        .project_zero_mean()
        .add(&tilt)?;
    let a = newton_solve(&ctx, &opts, &u0)?;
    let b = deflated_newton(&ctx, &opts, &u0, &[a.solution.clone()], 2.0, 1.0)?;
    for (name, r) in [("newton", &a), ("deflated", &b)] {
        println!(
            "{name:<9} residual {:.2e}  I {:.8}  index {} {:?}  max u {:.3} at {:?}",
            r.residual,
            r.energy.total,
            r.morse.index,
            r.morse.negative_eigenvalues,
            r.solution.max(),
            grid.node_at(r.solution.argmax())
        );
    }
    println!("max |a - b| {:.3}", a.solution.sub(&b.solution)?.max_abs());
    Ok(())
}
