//! Conical singularities, the weight `h_m`, the effective potential
//! `K~ = K e^{-h_m}`, the critical set `Lambda`, `J_lambda`, and sign-region
//! topology of the potential.

mod formula;
mod potential;
mod regions;

use std::f64::consts::PI;

use serde::Serialize;

pub use formula::Formula;
pub use potential::Potential;
pub use regions::{classify_sign_regions, ComponentInfo, SignRegions};

pub use crate::morse::SurfaceTopology;
use crate::error::{Error, Result};
use crate::surface::{Field, Grid, GreenFunction, Point};

/// Tolerance for identifying elements of the critical set.
pub const LAMBDA_DEDUP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConicalPoint {
    pub p: Point,
    pub alpha: f64,
}

impl ConicalPoint {
    pub fn new(p: Point, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha.is_finite()) || !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::InvalidConePoint(format!(
                "order must be finite and > -1, got {alpha} at {p:?}"
            )));
        }
        Ok(Self { p, alpha })
    }
}

/// Cone points, with the first `split` of them in the positive region.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ConicalConfig {
    points: Vec<ConicalPoint>,
    split: usize,
}

impl ConicalConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(points: Vec<ConicalPoint>, split: usize) -> Result<Self> {
        if split > points.len() {
            return Err(Error::InvalidConePoint(format!(
                "split index {split} exceeds the number of points {}",
                points.len()
            )));
        }
        for (i, a) in points.iter().enumerate() {
            ConicalPoint::new(a.p, a.alpha)?;
            for b in &points[..i] {
                if (a.p[0] - b.p[0]).abs() < 1e-12 && (a.p[1] - b.p[1]).abs() < 1e-12 {
                    return Err(Error::InvalidConePoint(format!("duplicate point {:?}", a.p)));
                }
            }
        }
        Ok(Self { points, split })
    }

    /// Order the points so that those in the positive region come first, and
    /// check that none lies on the nodal band.
    pub fn attach(points: Vec<ConicalPoint>, potential: &Potential) -> Result<Self> {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (j, c) in points.into_iter().enumerate() {
            let k = potential.value_at(c.p);
            if k.abs() <= potential.tau() {
                return Err(Error::ConeOnNodalLine(j));
            }
            if k > 0.0 {
                plus.push(c);
            } else {
                minus.push(c);
            }
        }
        let split = plus.len();
        plus.extend(minus);
        Self::new(plus, split)
    }

    pub fn points(&self) -> &[ConicalPoint] {
        &self.points
    }

    /// `l`: number of points in the positive region.
    pub fn split(&self) -> usize {
        self.split
    }

    pub fn positive(&self) -> &[ConicalPoint] {
        &self.points[..self.split]
    }

    pub fn positive_orders(&self) -> Vec<f64> {
        self.positive().iter().map(|c| c.alpha).collect()
    }

    pub fn orders(&self) -> Vec<f64> {
        self.points.iter().map(|c| c.alpha).collect()
    }

    /// `h_m(x) = 4 pi sum_j alpha_j G(x, p_j)`.
    pub fn h_m(&self, green: &GreenFunction, x: Point) -> Result<f64> {
        let mut h = 0.0;
        for c in &self.points {
            h += 4.0 * PI * c.alpha * green.green(x, c.p)?;
        }
        Ok(h)
    }

    pub fn h_m_on_grid(&self, green: &GreenFunction, grid: &Grid) -> Result<Field> {
        let mut h = Field::zeros(grid);
        for c in &self.points {
            h = h.axpy(4.0 * PI * c.alpha, &green.green_on_grid(grid, c.p)?)?;
        }
        Ok(h)
    }

    /// `e^{-h_m(x)} = prod_j d(x, p_j)^{2 alpha_j} e^{-4 pi alpha_j H(x, p_j)}`,
    /// extended by 0 at cone points of positive order.
    pub fn weight(&self, green: &GreenFunction, x: Point) -> Result<f64> {
        let torus = green.torus();
        let mut w = 1.0;
        for c in &self.points {
            if c.alpha == 0.0 {
                continue;
            }
            let d = torus.distance(x, c.p);
            if d < 1e-12 {
                if c.alpha > 0.0 {
                    return Ok(0.0);
                }
                return Err(Error::Overflow(format!(
                    "K~ at cone point {:?} of negative order {}",
                    c.p, c.alpha
                )));
            }
            w *= d.powf(2.0 * c.alpha) * (-4.0 * PI * c.alpha * green.regular_part(x, c.p)).exp();
        }
        Ok(w)
    }

    /// `K~(x) = K(x) e^{-h_m(x)}`.
    pub fn tilde_k(&self, green: &GreenFunction, k: f64, x: Point) -> Result<f64> {
        Ok(k * self.weight(green, x)?)
    }

    /// `K~` on the nodes of the potential's grid.
    pub fn tilde_k_on_grid(&self, green: &GreenFunction, k: &Field) -> Result<Field> {
        let grid = k.grid();
        let vals = k
            .values()
            .iter()
            .enumerate()
            .map(|(i, &kv)| self.tilde_k(green, kv, grid.node_at(i)))
            .collect::<Result<Vec<_>>>()?;
        let f = Field::from_values(grid, vals)?;
        f.check_finite()?;
        Ok(f)
    }

    /// Indices `j < l` with `lambda < 8 pi (1 + alpha_j)`.
    pub fn j_lambda(&self, lambda: f64) -> Vec<usize> {
        j_lambda(&self.positive_orders(), lambda)
    }
}

/// Indices of orders with `lambda < 8 pi (1 + alpha_j)`.
pub fn j_lambda(positive_orders: &[f64], lambda: f64) -> Vec<usize> {
    positive_orders
        .iter()
        .enumerate()
        .filter(|(_, &a)| lambda < 8.0 * PI * (1.0 + a))
        .map(|(j, _)| j)
        .collect()
}

/// `Lambda cap (0, lambda_max]`: all `8 pi r + sum_j 8 pi (1 + alpha_j) n_j`,
/// `r >= 0`, `n_j in {0, 1}`, sorted and deduplicated.
pub fn critical_set(positive_orders: &[f64], lambda_max: f64) -> Vec<f64> {
    let cap = lambda_max + LAMBDA_DEDUP;
    let mut sums = vec![0.0];
    for &a in positive_orders {
        let step = 8.0 * PI * (1.0 + a);
        let extra: Vec<f64> = sums.iter().map(|s| s + step).filter(|&s| s <= cap).collect();
        sums.extend(extra);
        sums = dedup_sorted(sums);
    }
    let mut all = Vec::new();
    for s in sums {
        let mut v = s;
        while v <= cap {
            if v > LAMBDA_DEDUP {
                all.push(v);
            }
            v += 8.0 * PI;
        }
    }
    dedup_sorted(all)
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l| x - l > LAMBDA_DEDUP) {
            out.push(x);
        }
    }
    out
}

/// Element of `Lambda` nearest to `lambda` (searching up to `2 lambda`).
pub fn nearest_critical(positive_orders: &[f64], lambda: f64) -> f64 {
    critical_set(positive_orders, 2.0 * lambda.max(8.0 * PI))
        .into_iter()
        .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
        .unwrap_or(8.0 * PI)
}

/// Gauss-Bonnet value `4 pi (chi + sum alpha_j)`.
pub fn geometric_lambda(chi: i64, orders: &[f64]) -> f64 {
    4.0 * PI * (chi as f64 + orders.iter().sum::<f64>())
}
