//! Green function of the Laplacian on the flat torus.
//!
//! `G(x, y) = G0(x - y)` solves `-Lap G = delta_y - 1/|Sigma|` with zero mean.
//! `G0` is evaluated by Ewald splitting with parameter `xi`:
//!
//! `G0(z) = (1/|Sigma|) sum_{k != 0} e^{-|k|^2/4xi^2} cos(k.z) / |k|^2
//!        + (1/4pi) sum_n E1(xi^2 |z + n|^2) - 1/(4 xi^2 |Sigma|)`
//!
//! with `k` over the dual lattice and `n` over the period lattice. Both sums
//! converge like Gaussians, so a few dozen terms give full double precision.
//! The `n = 0` term carries the logarithm: `E1(x) + ln x` is entire, which
//! makes the regular part `H = G + (1/2pi) log d` cancellation-free at `d = 0`.

use std::f64::consts::PI;

use super::field::Field;
use super::grid::Grid;
use super::torus::{Point, Torus};
use crate::error::{Error, Result};

/// Gaussian exponent beyond which terms are dropped (`e^-40 ~ 4e-18`).
const CUTOFF: f64 = 40.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone)]
pub struct GreenFunction {
    torus: Torus,
    xi: f64,
    /// dual-lattice terms `(k1, k2, e^{-|k|^2/4xi^2} / (|k|^2 |Sigma|))`
    modes: Vec<(f64, f64, f64)>,
    /// nonzero period-lattice translates
    lattice: Vec<[f64; 2]>,
    constant: f64,
}

impl GreenFunction {
    pub fn new(torus: Torus) -> Result<Self> {
        Self::with_splitting(torus, (PI / torus.area()).sqrt())
    }

    /// Ewald splitting parameter `xi`; the result is independent of it up to
    /// rounding.
    pub fn with_splitting(torus: Torus, xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidOption(format!("Ewald parameter {xi}")));
        }
        let (l1, l2) = (torus.l1(), torus.l2());
        let area = torus.area();

        let kmax = 2.0 * xi * CUTOFF.sqrt();
        let (m1, m2) = (
            (kmax * l1 / (2.0 * PI)).ceil() as i64,
            (kmax * l2 / (2.0 * PI)).ceil() as i64,
        );
        let mut modes = Vec::new();
        for a in -m1..=m1 {
            for b in -m2..=m2 {
                if a == 0 && b == 0 {
                    continue;
                }
                let (k1, k2) = (2.0 * PI * a as f64 / l1, 2.0 * PI * b as f64 / l2);
                let k2n = k1 * k1 + k2 * k2;
                if k2n <= kmax * kmax {
                    modes.push((k1, k2, (-k2n / (4.0 * xi * xi)).exp() / (k2n * area)));
                }
            }
        }

        // |z| is at most half the cell diagonal for a minimal-image displacement
        let reach = CUTOFF.sqrt() / xi + 0.5 * l1.hypot(l2);
        let (n1, n2) = ((reach / l1).ceil() as i64, (reach / l2).ceil() as i64);
        let mut lattice = Vec::new();
        for a in -n1..=n1 {
            for b in -n2..=n2 {
                let t = [a as f64 * l1, b as f64 * l2];
                if (a, b) != (0, 0) && t[0].hypot(t[1]) <= reach {
                    lattice.push(t);
                }
            }
        }

        Ok(Self {
            torus,
            xi,
            modes,
            lattice,
            constant: -1.0 / (4.0 * xi * xi * area),
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// `H(z) = G0(z) + (1/2pi) log |z|` for a minimal-image displacement.
    fn regular(&self, z: [f64; 2]) -> f64 {
        let xi2 = self.xi * self.xi;
        let mut spectral = 0.0;
        for &(k1, k2, w) in &self.modes {
            spectral += w * (k1 * z[0] + k2 * z[1]).cos();
        }
        let mut images = 0.0;
        for t in &self.lattice {
            let (a, b) = (z[0] + t[0], z[1] + t[1]);
            let x = xi2 * (a * a + b * b);
            if x <= CUTOFF {
                images += e1(x);
            }
        }
        let r2 = z[0] * z[0] + z[1] * z[1];
        let near = e1_plus_log(xi2 * r2) - 2.0 * self.xi.ln();
        spectral + (images + near) / (4.0 * PI) + self.constant
    }

    /// `G(x, y)`; fails for `d(x, y) < 1e-12`.
    pub fn green(&self, x: Point, y: Point) -> Result<f64> {
        let z = self.torus.displacement(x, y);
        let r = z[0].hypot(z[1]);
        if r < 1e-12 {
            return Err(Error::CoincidentPoints(r));
        }
        Ok(self.regular(z) - r.ln() / (2.0 * PI))
    }

    /// `H(x, y) = G(x, y) + (1/2pi) log d(x, y)`, finite for all `x`,
    /// including `x = y`.
    pub fn regular_part(&self, x: Point, y: Point) -> f64 {
        self.regular(self.torus.displacement(x, y))
    }

    /// `H(x, y)` at `x = y`.
    pub fn robin_constant(&self) -> f64 {
        self.regular([0.0, 0.0])
    }

    /// `H(., y)` on the nodes of `grid`.
    pub fn regular_part_on_grid(&self, grid: &Grid, y: Point) -> Result<Field> {
        if grid.torus() != &self.torus {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_fn(grid, |x| self.regular_part(x, y)))
    }

    /// `G(., y)` on the nodes of `grid`; fails when a node coincides with `y`.
    pub fn green_on_grid(&self, grid: &Grid, y: Point) -> Result<Field> {
        if grid.torus() != &self.torus {
            return Err(Error::GridMismatch);
        }
        let vals = (0..grid.len())
            .map(|k| self.green(grid.node_at(k), y))
            .collect::<Result<Vec<_>>>()?;
        Field::from_values(grid, vals)
    }
}

/// `E1(x) + ln x = -gamma + sum_{j>=1} (-1)^{j+1} x^j / (j j!)`, entire.
fn e1_plus_log(x: f64) -> f64 {
    if x > 2.0 {
        return e1_continued_fraction(x) + x.ln();
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 1..60 {
        term *= -x / j as f64;
        let add = -term / j as f64;
        sum += add;
        if add.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum - EULER_GAMMA
}

/// Exponential integral `E1(x)` for `x > 0`.
fn e1(x: f64) -> f64 {
    if x > 2.0 {
        e1_continued_fraction(x)
    } else {
        e1_plus_log(x) - x.ln()
    }
}

/// Modified Lentz evaluation of the continued fraction for `E1`, `x > 1`.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}
