use crate::error::{Error, Result};
use crate::surface::{Field, Grid, Point};

use super::Formula;

/// Sign-changing potential `K` sampled on a grid, validated against (H1):
/// `|grad K|` stays above `1e-3 max |grad K|` on the discrete nodal band.
#[derive(Debug, Clone)]
pub struct Potential {
    field: Field,
    formula: Option<Formula>,
    tau: f64,
    beta: f64,
    grad_max: f64,
}

impl Potential {
    /// Validate with the default nodal tolerance `1e-3 max |K|`.
    pub fn new(field: Field) -> Result<Self> {
        let tau = 1e-3 * field.max_abs();
        Self::with_tolerance(field, tau)
    }

    pub fn with_tolerance(field: Field, tau: f64) -> Result<Self> {
        field.check_finite()?;
        let v = field.values();
        if !v.iter().any(|&k| k > 0.0) || !v.iter().any(|&k| k < 0.0) {
            return Err(Error::NoSignChange);
        }
        let grad = gradient_norm(&field);
        let grad_max = grad.iter().cloned().fold(0.0, f64::max);
        let band = nodal_band(&field, tau);
        let beta = band
            .iter()
            .map(|&i| grad[i])
            .fold(f64::INFINITY, f64::min);
        let floor = 1e-3 * grad_max;
        if beta < floor {
            return Err(Error::NodalGradient { beta, floor });
        }
        Ok(Self {
            field,
            formula: None,
            tau,
            beta,
            grad_max,
        })
    }

    pub fn from_formula(formula: Formula, grid: &Grid) -> Result<Self> {
        let torus = *grid.torus();
        let field = Field::from_fn(grid, |x| formula.eval(&torus, x));
        let mut p = Self::new(field)?;
        p.formula = Some(formula);
        Ok(p)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn formula(&self) -> Option<&Formula> {
        self.formula.as_ref()
    }

    /// Nodal tolerance `tau_Gamma`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `min |grad K|` on the nodal band.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn max_gradient(&self) -> f64 {
        self.grad_max
    }

    /// `K(x)`: exact for formula potentials, trigonometric interpolation
    /// otherwise.
    pub fn value_at(&self, x: Point) -> f64 {
        match &self.formula {
            Some(f) => f.eval(self.field.torus(), x),
            None => self.field.evaluate_at(x),
        }
    }

    /// Node indices of the discrete nodal band.
    pub fn nodal_band(&self) -> Vec<usize> {
        nodal_band(&self.field, self.tau)
    }

    /// Resample onto another grid (re-evaluating the formula when known).
    pub fn on_grid(&self, grid: &Grid) -> Result<Self> {
        match &self.formula {
            Some(f) => Self::from_formula(f.clone(), grid),
            None => Self::with_tolerance(self.field.resample(grid)?, self.tau),
        }
    }
}

/// Central-difference `|grad K|` at every node.
fn gradient_norm(k: &Field) -> Vec<f64> {
    let grid = k.grid();
    let v = k.values();
    let (h1, h2) = (grid.h1(), grid.h2());
    (0..grid.len())
        .map(|i| {
            let gx = (v[grid.shifted(i, 1, 0)] - v[grid.shifted(i, -1, 0)]) / (2.0 * h1);
            let gy = (v[grid.shifted(i, 0, 1)] - v[grid.shifted(i, 0, -1)]) / (2.0 * h2);
            gx.hypot(gy)
        })
        .collect()
}

/// Nodes with `|K| <= tau` or with a 4-neighbour of opposite sign.
pub(crate) fn nodal_band(k: &Field, tau: f64) -> Vec<usize> {
    let grid = k.grid();
    let v = k.values();
    (0..grid.len())
        .filter(|&i| {
            v[i].abs() <= tau
                || [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(a, b)| (v[grid.shifted(i, a, b)] > 0.0) != (v[i] > 0.0))
        })
        .collect()
}
