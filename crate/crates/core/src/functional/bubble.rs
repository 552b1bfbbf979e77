use crate::error::{Error, Result};
use crate::singular::ConicalConfig;
use crate::surface::{Field, Grid, Point, Torus};

/// Cutoff `chi_gamma`: `t` on `[0, gamma]`, `2 gamma` on `[2 gamma, inf)`,
/// and the cubic `gamma (1 + s + s^2 - s^3)`, `s = t/gamma - 1`, in between.
pub fn cutoff_chi(gamma: f64, t: f64) -> f64 {
    if t <= gamma {
        t
    } else if t >= 2.0 * gamma {
        2.0 * gamma
    } else {
        let s = t / gamma - 1.0;
        gamma * (1.0 + s + s * s - s * s * s)
    }
}

/// `d chi_gamma / dt`; takes values in `[0, 4/3]`.
pub fn cutoff_chi_derivative(gamma: f64, t: f64) -> f64 {
    if t <= gamma {
        1.0
    } else if t >= 2.0 * gamma {
        0.0
    } else {
        let s = t / gamma - 1.0;
        1.0 + 2.0 * s - 3.0 * s * s
    }
}

/// `min(L1, L2) / 16`.
pub fn default_gamma(torus: &Torus) -> f64 {
    torus.min_period() / 16.0
}

/// Bubbles with `mu > n / (2 pi gamma)` are sharper than the grid.
pub fn is_under_resolved(grid: &Grid, mu: f64, gamma: f64) -> bool {
    let n = grid.n1().min(grid.n2()) as f64;
    mu > n / (2.0 * std::f64::consts::PI * gamma)
}

/// Formal barycenter `sum t_i delta_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Barycenter {
    entries: Vec<(f64, Point)>,
}

impl Barycenter {
    pub fn new(entries: Vec<(f64, Point)>, torus: &Torus) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidBarycenter("no support points".into()));
        }
        if entries.iter().any(|&(t, _)| !(0.0..=1.0).contains(&t)) {
            return Err(Error::InvalidBarycenter("weights must lie in [0, 1]".into()));
        }
        let sum: f64 = entries.iter().map(|&(t, _)| t).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidBarycenter(format!("weights sum to {sum}")));
        }
        for (i, &(_, x)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|&(_, y)| torus.distance(x, y) < 1e-12) {
                return Err(Error::InvalidBarycenter(format!("repeated point {x:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn dirac(x: Point) -> Self {
        Self {
            entries: vec![(1.0, x)],
        }
    }

    pub fn entries(&self) -> &[(f64, Point)] {
        &self.entries
    }

    /// Number of support points.
    pub fn k(&self) -> usize {
        self.entries.len()
    }
}

/// `log sum_i t_i (mu / (1 + (mu chi_gamma(d(x, x_i)))^2))^2`.
pub fn bubble_raw(grid: &Grid, sigma: &Barycenter, mu: f64, gamma: f64) -> Result<Field> {
    if !(mu > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidOption(format!("bubble needs mu, gamma > 0 ({mu}, {gamma})")));
    }
    let torus = *grid.torus();
    let log_mu = mu.ln();
    Ok(Field::from_fn(grid, |x| {
        let terms: Vec<f64> = sigma
            .entries()
            .iter()
            .filter(|&&(t, _)| t > 0.0)
            .map(|&(t, xi)| {
                let c = mu * cutoff_chi(gamma, torus.distance(x, xi));
                t.ln() + 2.0 * log_mu - 2.0 * (c * c).ln_1p()
            })
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }))
}

/// Mean-normalized bubble `phi_{mu, sigma}`; support points must keep `4 gamma`
/// away from the cone points in the positive region.
pub fn bubble(
    grid: &Grid,
    sigma: &Barycenter,
    mu: f64,
    gamma: f64,
    cones: &ConicalConfig,
) -> Result<Field> {
    let torus = grid.torus();
    for &(_, x) in sigma.entries() {
        if let Some(j) = cones
            .positive()
            .iter()
            .position(|c| torus.distance(x, c.p) < 4.0 * gamma)
        {
            return Err(Error::SingularOverlap { point: x, cone: j });
        }
    }
    if is_under_resolved(grid, mu, gamma) {
        log::warn!("bubble with mu = {mu} is sharper than the {}x{} grid", grid.n1(), grid.n2());
    }
    Ok(bubble_raw(grid, sigma, mu, gamma)?.project_zero_mean())
}

/// `2 log(mu^{1+alpha} / (1 + (mu chi_gamma(d(x, p)))^{2(1+alpha)}))`.
pub fn bubble_singular_raw(grid: &Grid, p: Point, alpha: f64, mu: f64, gamma: f64) -> Result<Field> {
    if !(mu > 0.0 && gamma > 0.0 && alpha > -1.0) {
        return Err(Error::InvalidOption(format!(
            "singular bubble needs mu, gamma > 0 and alpha > -1 ({mu}, {gamma}, {alpha})"
        )));
    }
    let torus = *grid.torus();
    let a1 = 1.0 + alpha;
    let log_mu = mu.ln();
    Ok(Field::from_fn(grid, |x| {
        let c = mu * cutoff_chi(gamma, torus.distance(x, p));
        2.0 * (a1 * log_mu - (a1 * 2.0 * c.ln()).exp().ln_1p())
    }))
}

/// Largest order among positive-region cone points outside `J_lambda`, or 0.
pub fn alpha_tilde(cones: &ConicalConfig, lambda: f64) -> f64 {
    let j = cones.j_lambda(lambda);
    cones
        .positive()
        .iter()
        .enumerate()
        .filter(|(i, _)| !j.contains(i))
        .map(|(_, c)| c.alpha)
        .fold(0.0, f64::max)
}

/// Mean-normalized singular bubble `phi_{mu, p, alpha}` with
/// `alpha in (alpha~, lambda/(8 pi) - 1)`.
pub fn bubble_singular(
    grid: &Grid,
    p: Point,
    alpha: f64,
    mu: f64,
    gamma: f64,
    cones: &ConicalConfig,
    lambda: f64,
) -> Result<Field> {
    let lower = alpha_tilde(cones, lambda);
    let upper = lambda / (8.0 * std::f64::consts::PI) - 1.0;
    if !(alpha > lower && alpha < upper) {
        return Err(Error::BadOrder { alpha, lower, upper });
    }
    if is_under_resolved(grid, mu, gamma) {
        log::warn!("bubble with mu = {mu} is sharper than the {}x{} grid", grid.n1(), grid.n2());
    }
    Ok(bubble_singular_raw(grid, p, alpha, mu, gamma)?.project_zero_mean())
}
