//! Energy of a concentrating bubble for `lambda = 10 pi`: the radial
//! evaluator against the grid energy, and the mass captured near the center.

use std::f64::consts::PI;

use liouville_torus::functional::{
    bubble_raw, is_under_resolved, Barycenter, EnergyContext, PotentialTotals, RadialBubble,
};
use liouville_torus::surface::{Field, Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let torus = Torus::unit();
    let grid = Grid::square(torus, 256)?;
    let k = |p: [f64; 2]| (2.0 * PI * p[0]).cos();
    let lambda = 10.0 * PI;
    let ctx = EnergyContext::new(lambda, Field::from_fn(&grid, k))?;
    let totals = PotentialTotals { k: 0.0, k_plus: 1.0 / PI };
    let (x, gamma) = ([0.0, 0.5], 1.0 / 16.0);

    println!("{:>8} {:>14} {:>14} {:>10}", "mu", "I radial", "I grid", "mass");
    for mu in [1e1, 1e2, 1e3, 1e4, 1e6, 1e10] {
        let b = RadialBubble { center: x, alpha: 0.0, mu, gamma };
        let rep = b.evaluate(&torus, lambda, &k, totals, 3.0 * gamma)?;
        let on_grid = if is_under_resolved(&grid, mu, gamma) {
            "-".to_string()
        } else {
            let phi = bubble_raw(&grid, &Barycenter::dirac(x), mu, gamma)?.project_zero_mean();
            format!("{:.6}", ctx.energy(&phi)?.total)
        };
        println!("{mu:>8.0e} {:>14.6} {on_grid:>14} {:>10.7}", rep.energy.total, rep.mass_in_ball);
    }
    Ok(())
}
