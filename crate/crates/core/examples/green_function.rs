//! Green function of the flat torus: zero mean, symmetry, and the Poisson
//! solve that inverts `-Lap` on zero-mean fields.

use std::f64::consts::PI;

use liouville_torus::surface::{Field, GreenFunction, Grid, Torus};

fn main() -> liouville_torus::Result<()> {
    let torus = Torus::new(1.0, 1.5)?;
    let green = GreenFunction::new(torus)?;
    let grid = Grid::new(torus, 128, 192)?;

    let y = [0.3, 0.7];
    let g = green.green_on_grid(&grid, y)?;
    println!("mean of G(., y)        {:.3e}", g.mean());
    let (a, b) = ([0.1, 0.2], [0.8, 1.1]);
    println!("G(a, b) - G(b, a)      {:.3e}", green.green(a, b)? - green.green(b, a)?);
    println!("Robin constant H(y, y) {:.12}", green.robin_constant());

    let f = Field::from_fn(&grid, |p| (2.0 * PI * p[0]).cos() * (4.0 * PI * p[1] / 1.5).sin());
    let u = f.solve_poisson()?;
    let back = u.laplacian()?.scale(-1.0);
    println!("Poisson round trip     {:.3e}", back.sub(&f)?.max_abs());
    Ok(())
}
