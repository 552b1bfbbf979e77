//! The energy `I(u) = 1/2 int |grad u|^2 + (lambda/|Sigma|) int u - lambda log int K~ e^u`,
//! its first and second variations, bubble test functions, and concentration
//! measures.

mod bubble;
mod radial;

use serde::Serialize;

pub use bubble::{
    alpha_tilde, bubble, bubble_raw, bubble_singular, bubble_singular_raw, cutoff_chi,
    cutoff_chi_derivative, default_gamma, is_under_resolved, Barycenter,
};
pub use radial::{PotentialTotals, RadialBubble, RadialReport};

use crate::error::{Error, Result};
use crate::surface::{Field, Grid, Point};

/// Fixed `lambda` and effective potential `K~`.
#[derive(Debug, Clone)]
pub struct EnergyContext {
    lambda: f64,
    k_tilde: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyValue {
    pub total: f64,
    pub dirichlet: f64,
    pub linear: f64,
    pub log_term: f64,
}

/// `K~ e^u` in overflow-safe form: `e^{shift} * scaled`, `mass = int K~ e^u`.
#[derive(Debug, Clone)]
struct Exponential {
    shift: f64,
    scaled: Field,
    scaled_mass: f64,
}

impl Exponential {
    fn log_mass(&self) -> f64 {
        self.shift + self.scaled_mass.ln()
    }

    /// `K~ e^u / int K~ e^u`.
    fn density(&self) -> Field {
        self.scaled.scale(1.0 / self.scaled_mass)
    }
}

impl EnergyContext {
    pub fn new(lambda: f64, k_tilde: Field) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidOption(format!("lambda must be positive, got {lambda}")));
        }
        k_tilde.check_finite()?;
        Ok(Self { lambda, k_tilde })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same potential, different `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.k_tilde.clone())
    }

    pub fn k_tilde(&self) -> &Field {
        &self.k_tilde
    }

    pub fn grid(&self) -> &Grid {
        self.k_tilde.grid()
    }

    fn exponential(&self, u: &Field, k: &Field) -> Result<Exponential> {
        if u.grid() != k.grid() {
            return Err(Error::GridMismatch);
        }
        u.check_finite()?;
        let shift = u.max();
        let scaled = k.zip_map(u, |kv, uv| kv * (uv - shift).exp())?;
        let scaled_mass = scaled.integrate_unchecked();
        if !(scaled_mass > 0.0) {
            return Err(Error::DomainViolation {
                mass: scaled_mass * shift.exp(),
            });
        }
        Ok(Exponential {
            shift,
            scaled,
            scaled_mass,
        })
    }

    /// `int K~ e^u`, or `DomainViolation` outside `X`.
    pub fn mass(&self, u: &Field) -> Result<f64> {
        let e = self.exponential(u, &self.k_tilde)?;
        Ok(e.scaled_mass * e.shift.exp())
    }

    /// Whether `u` lies in `X = {int K~ e^u > 0}`.
    pub fn in_domain(&self, u: &Field) -> bool {
        self.exponential(u, &self.k_tilde).is_ok()
    }

    pub fn energy(&self, u: &Field) -> Result<EnergyValue> {
        let e = self.exponential(u, &self.k_tilde)?;
        let area = u.torus().area();
        let dirichlet = u.dirichlet_energy();
        let linear = self.lambda / area * u.integrate_unchecked();
        let log_term = -self.lambda * e.log_mass();
        Ok(EnergyValue {
            total: dirichlet + linear + log_term,
            dirichlet,
            linear,
            log_term,
        })
    }

    /// `I(u + t d) - I(u)` without cancellation between the two energies.
    pub fn energy_change(&self, u: &Field, d: &Field, t: f64) -> Result<f64> {
        let e = self.exponential(u, &self.k_tilde)?;
        let rho = e.density();
        let area = u.torus().area();
        let lap_d = d.laplacian()?;
        let cross = -u.inner(&lap_d)?;
        let dirichlet = t * cross + t * t * d.dirichlet_energy();
        let linear = self.lambda / area * t * d.integrate_unchecked();
        let growth = rho
            .zip_map(d, |r, dv| r * (t * dv).exp_m1())?
            .integrate_unchecked();
        if !(growth > -1.0) {
            return Err(Error::DomainViolation {
                mass: (1.0 + growth) * self.mass(u)?,
            });
        }
        Ok(dirichlet + linear - self.lambda * growth.ln_1p())
    }

    /// L2 gradient `-Lap u + lambda/|Sigma| - lambda K~ e^u / int K~ e^u`.
    pub fn gradient(&self, u: &Field) -> Result<Field> {
        let e = self.exponential(u, &self.k_tilde)?;
        let rho = e.density();
        let area = u.torus().area();
        let lap = u.laplacian()?;
        let g = lap.zip_map(&rho, |l, r| -l + self.lambda / area - self.lambda * r)?;
        Ok(g.project_zero_mean())
    }

    /// Second variation at `u`.
    pub fn linearize(&self, u: &Field) -> Result<Linearization> {
        let e = self.exponential(u, &self.k_tilde)?;
        Ok(Linearization {
            lambda: self.lambda,
            rho: e.density(),
        })
    }

    pub fn hessian_apply(&self, u: &Field, v: &Field) -> Result<Field> {
        self.linearize(u)?.apply(v)
    }

    /// `K~+ e^u / int K~+ e^u`.
    pub fn concentration_measure(&self, u: &Field) -> Result<Field> {
        let plus = self.k_tilde.map(|k| k.max(0.0));
        Ok(self.exponential(u, &plus)?.density())
    }

    /// Integral of the concentration measure over the periodic ball `B_r(center)`.
    pub fn mass_in_ball(&self, u: &Field, center: Point, r: f64) -> Result<f64> {
        let density = self.concentration_measure(u)?;
        Ok(ball_integral(&density, center, r))
    }
}

/// `int_{B_r(center)} f` by the grid rule.
pub fn ball_integral(f: &Field, center: Point, r: f64) -> f64 {
    let grid = f.grid();
    let torus = grid.torus();
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| torus.distance(grid.node_at(*i), center) <= r)
        .map(|(_, v)| v)
        .sum::<f64>()
        * grid.weight()
}

/// `v -> -Lap v - lambda (rho v - rho int rho v)`, `rho = K~ e^u / int K~ e^u`,
/// projected to zero mean.
#[derive(Debug, Clone)]
pub struct Linearization {
    lambda: f64,
    rho: Field,
}

impl Linearization {
    pub fn apply(&self, v: &Field) -> Result<Field> {
        let lap = v.laplacian()?;
        let rv = self.rho.inner(v)?;
        let vals: Vec<f64> = lap
            .values()
            .iter()
            .zip(self.rho.values())
            .zip(v.values())
            .map(|((l, r), x)| -l - self.lambda * (r * x - r * rv))
            .collect();
        Ok(Field::from_values(v.grid(), vals)?.project_zero_mean())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn density(&self) -> &Field {
        &self.rho
    }
}
