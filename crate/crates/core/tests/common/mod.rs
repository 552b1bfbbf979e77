use std::f64::consts::PI;

use liouville_torus::surface::{Grid, GreenFunction, Point};

/// Integral of G(., y) by a partition of unity: a smooth bump `psi` around y
/// is integrated in polar coordinates (Gauss-Legendre in s = sqrt(r)), the
/// remainder G (1 - psi) is smooth and periodic and uses the grid rule.
pub fn integral_by_partition(green: &GreenFunction, grid: &Grid, y: Point) -> f64 {
    let rho = 0.1;
    let psi = |r: f64| -> f64 {
        if r >= rho {
            return 0.0;
        }
        let t = r / rho;
        if t <= 0.5 {
            return 1.0;
        }
        let s = 2.0 * (t - 0.5);
        let f = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
        f(1.0 - s) / (f(1.0 - s) + f(s))
    };
    let torus = *grid.torus();
    let g = green.green_on_grid(grid, y).unwrap();
    let outer: f64 = g
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| v * (1.0 - psi(torus.distance(grid.node_at(k), y))))
        .sum::<f64>()
        * grid.weight();

    // Gauss-Legendre nodes on [0, 1], 32 points per panel, 8 panels
    let (nodes, weights) = gauss_legendre_unit(32);
    let panels = 8;
    let n_theta = 128;
    let mut inner = 0.0;
    for p in 0..panels {
        for (x, w) in nodes.iter().zip(&weights) {
            let s = (p as f64 + x) / panels as f64 * rho.sqrt();
            let r = s * s;
            let jac = 2.0 * s * rho.sqrt() / panels as f64;
            let mut ring = 0.0;
            for t in 0..n_theta {
                let th = 2.0 * PI * t as f64 / n_theta as f64;
                let x = [y[0] + r * th.cos(), y[1] + r * th.sin()];
                ring += green.green(x, y).unwrap();
            }
            ring *= 2.0 * PI / n_theta as f64;
            inner += w * jac * r * psi(r) * ring;
        }
    }
    outer + inner
}

fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on Legendre polynomials
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(0.5 * (1.0 - x));
        ws.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}
