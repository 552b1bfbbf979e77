//! Resolution-independent evaluation of `I(phi)` for a single (possibly
//! singular) bubble, using the radial structure of `phi` around its center.
//!
//! `phi` is radial inside `B_{2 gamma}` and constant outside, so the Dirichlet
//! energy and the mean are one-dimensional integrals, and `int K~ e^phi`
//! splits into a polar integral near the center plus `e^{phi_far}` times the
//! remaining integral of `K~`.

use std::f64::consts::PI;

use super::bubble::{cutoff_chi, cutoff_chi_derivative};
use super::EnergyValue;
use crate::error::{Error, Result};
use crate::surface::{Point, Torus};

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre on `[a, b]`.
fn gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            s += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
        }
    }
    0.5 * h * s
}

/// `int_a^b f(r) dr` with Gauss-Legendre in `s = ln r`.
fn gauss_log<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    gauss(|s| {
        let r = s.exp();
        f(r) * r
    }, a.ln(), b.ln(), panels)
}

/// Single bubble `2 log(mu^{1+alpha} / (1 + (mu chi_gamma(d(x, p)))^{2(1+alpha)}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBubble {
    pub center: Point,
    pub alpha: f64,
    pub mu: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialReport {
    pub energy: EnergyValue,
    /// mean of the raw profile
    pub mean: f64,
    /// fraction of `int K~+ e^phi` inside `B_{mass_radius}(center)`
    pub mass_in_ball: f64,
}

/// Integrals of `K~` and `K~+` over the whole torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialTotals {
    pub k: f64,
    pub k_plus: f64,
}

impl RadialBubble {
    fn a1(&self) -> f64 {
        1.0 + self.alpha
    }

    /// Raw profile at distance `r`.
    pub fn profile(&self, r: f64) -> f64 {
        let c = self.mu * cutoff_chi(self.gamma, r);
        2.0 * (self.a1() * self.mu.ln() - (2.0 * self.a1() * c.ln()).exp().ln_1p())
    }

    fn slope(&self, r: f64) -> f64 {
        let chi = cutoff_chi(self.gamma, r);
        let q = (2.0 * self.a1() * (self.mu * chi).ln()).exp();
        -4.0 * self.a1() * q / ((1.0 + q) * chi) * cutoff_chi_derivative(self.gamma, r)
    }

    /// Log-spaced radial panels starting well inside the core `1/mu`.
    fn inner_radius(&self) -> f64 {
        1e-7 / self.mu
    }

    /// `I(phi - mean phi)` and the ball mass.
    ///
    /// `k_tilde` must be accurate pointwise inside `B_{max(2 gamma, mass_radius)}`;
    /// `totals` holds its integrals over the torus.
    pub fn evaluate(
        &self,
        torus: &Torus,
        lambda: f64,
        k_tilde: &dyn Fn(Point) -> f64,
        totals: PotentialTotals,
        mass_radius: f64,
    ) -> Result<RadialReport> {
        let g2 = 2.0 * self.gamma;
        let outer = g2.max(mass_radius);
        if outer >= 0.5 * torus.min_period() {
            return Err(Error::InvalidOption(format!(
                "bubble radius {outer} does not fit in the torus"
            )));
        }
        let r0 = self.inner_radius();
        let panels = 400;
        let far = self.profile(g2);

        let dirichlet = 0.5
            * (gauss_log(|r| self.slope(r).powi(2) * 2.0 * PI * r, r0, self.gamma, panels)
                + gauss(|r| self.slope(r).powi(2) * 2.0 * PI * r, self.gamma, g2, 50));
        let excess = gauss_log(|r| (self.profile(r) - far) * 2.0 * PI * r, r0, self.gamma, panels)
            + gauss(|r| (self.profile(r) - far) * 2.0 * PI * r, self.gamma, g2, 50);
        let mean = far + excess / torus.area();

        // polar integrals of K~ (e^{phi - far} - 1) and of K~+ over the balls
        let n_theta = 64;
        let ring = |r: f64, f: &dyn Fn(f64) -> f64| -> f64 {
            let mut s = 0.0;
            for t in 0..n_theta {
                let th = 2.0 * PI * (t as f64 + 0.5) / n_theta as f64;
                let x = [self.center[0] + r * th.cos(), self.center[1] + r * th.sin()];
                s += f(k_tilde(x));
            }
            s * 2.0 * PI * r / n_theta as f64
        };
        let bump = |r: f64| (self.profile(r) - far).exp_m1();
        let local = |f: &dyn Fn(f64) -> f64, pos: bool| -> f64 {
            let w = |r: f64| ring(r, &|k| if pos { k.max(0.0) } else { k }) * f(r);
            gauss_log(w, r0, self.gamma, panels) + gauss(w, self.gamma, g2, 50)
        };
        let k_bump = local(&bump, false);
        let kp_bump = local(&bump, true);
        let kp_ball = {
            let w = |r: f64| ring(r, &|k| k.max(0.0));
            gauss_log(w, r0, mass_radius, panels)
        };

        // int K~ e^{phi} = e^{far} (int K~ + int K~ (e^{phi - far} - 1))
        let scaled = totals.k + k_bump;
        if !(scaled > 0.0) {
            return Err(Error::DomainViolation {
                mass: scaled * far.exp(),
            });
        }
        let log_mass = far - mean + scaled.ln();
        let log_term = -lambda * log_mass;

        let plus_total = totals.k_plus + kp_bump;
        let plus_ball = if mass_radius >= g2 {
            kp_ball + kp_bump
        } else {
            let w = |r: f64| ring(r, &|k| k.max(0.0)) * (1.0 + bump(r));
            gauss_log(w, r0, mass_radius, panels)
        };

        Ok(RadialReport {
            energy: EnergyValue {
                total: dirichlet + log_term,
                dirichlet,
                linear: 0.0,
                log_term,
            },
            mean,
            mass_in_ball: plus_ball / plus_total,
        })
    }
}
