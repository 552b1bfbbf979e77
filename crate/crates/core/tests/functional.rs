use std::f64::consts::PI;

use liouville_torus::functional::{
    bubble, bubble_raw, bubble_singular, bubble_singular_raw, cutoff_chi, cutoff_chi_derivative,
    Barycenter, EnergyContext,
};
use liouville_torus::singular::{ConicalConfig, ConicalPoint};
use liouville_torus::surface::{Field, Grid, Torus};
use liouville_torus::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Grid {
    Grid::square(Torus::unit(), n).unwrap()
}

/// A smooth, sign-changing potential with positive mean.
fn smooth_k(g: &Grid) -> Field {
    Field::from_fn(g, |p| (2.0 * PI * p[0]).cos() + 0.3 + 0.2 * (2.0 * PI * p[1]).sin())
}

fn random(g: &Grid, band: i32, seed: u64, scale: f64) -> Field {
    Field::random_band_limited(g, band, &mut ChaCha8Rng::seed_from_u64(seed)).scale(scale)
}

#[test]
fn energy_at_zero_and_constant_invariance() {
    let g = grid(64);
    let ctx = EnergyContext::new(5.0, smooth_k(&g)).unwrap();
    let zero = Field::zeros(&g);
    let e0 = ctx.energy(&zero).unwrap();
    let k_int = smooth_k(&g).integrate().unwrap();
    assert!((e0.total + 5.0 * k_int.ln()).abs() < 1e-13);
    let u = random(&g, 4, 1, 0.5);
    let a = ctx.energy(&u).unwrap();
    for c in [-3.0, 0.7, 11.0] {
        let b = ctx.energy(&u.shift(c)).unwrap();
        assert!((a.total - b.total).abs() < 1e-12, "{} vs {}", a.total, b.total);
    }
    assert!((a.total - (a.dirichlet + a.linear + a.log_term)).abs() < 1e-14);
}

#[test]
fn energy_refines_consistently() {
    let (g, g2) = (grid(64), grid(128));
    let u = random(&g, 3, 2, 0.2);
    let a = EnergyContext::new(7.0, smooth_k(&g)).unwrap().energy(&u).unwrap();
    let b = EnergyContext::new(7.0, smooth_k(&g2))
        .unwrap()
        .energy(&u.resample(&g2).unwrap())
        .unwrap();
    for (x, y) in [
        (a.total, b.total),
        (a.dirichlet, b.dirichlet),
        (a.linear, b.linear),
        (a.log_term, b.log_term),
    ] {
        assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-3), "{x} vs {y}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    let g = grid(64);
    let ctx = EnergyContext::new(3.0 * PI, smooth_k(&g)).unwrap();
    let eps = 1e-5;
    for seed in 0..20 {
        let u = random(&g, 4, 100 + seed, 0.5);
        let h = random(&g, 6, 200 + seed, 1.0);
        let fd = (ctx.energy(&u.axpy(eps, &h).unwrap()).unwrap().total
            - ctx.energy(&u.axpy(-eps, &h).unwrap()).unwrap().total)
            / (2.0 * eps);
        let an = ctx.gradient(&u).unwrap().inner(&h).unwrap();
        assert!((fd - an).abs() <= 1e-5 * an.abs(), "seed {seed}: {fd} vs {an}");
    }
}

#[test]
fn gradient_at_zero() {
    let g = grid(32);
    let k = smooth_k(&g);
    let lambda = 4.0;
    let ctx = EnergyContext::new(lambda, k.clone()).unwrap();
    let grad = ctx.gradient(&Field::zeros(&g)).unwrap();
    let z = k.integrate().unwrap();
    let expected = k.map(|v| -lambda * (v / z - 1.0));
    assert!(grad.sub(&expected).unwrap().max_abs() < 1e-13);
    assert!(grad.is_zero_mean());
}

#[test]
fn energy_change_matches_direct_difference() {
    let g = grid(64);
    let ctx = EnergyContext::new(6.0, smooth_k(&g)).unwrap();
    let u = random(&g, 4, 3, 0.4);
    let d = random(&g, 4, 4, 1.0);
    for t in [1e-6, 1e-3, 0.1, 0.5] {
        let direct = ctx.energy(&u.axpy(t, &d).unwrap()).unwrap().total - ctx.energy(&u).unwrap().total;
        let change = ctx.energy_change(&u, &d, t).unwrap();
        assert!((direct - change).abs() < 1e-12 * (1.0 + direct.abs()) + 1e-13, "{t}: {direct} vs {change}");
    }
}

#[test]
fn hessian_is_symmetric_and_differentiates_gradient() {
    let g = grid(64);
    let ctx = EnergyContext::new(5.0 * PI, smooth_k(&g)).unwrap();
    let u = random(&g, 4, 5, 0.5);
    let lin = ctx.linearize(&u).unwrap();
    for seed in 0..5 {
        let v = random(&g, 6, 300 + seed, 1.0).project_zero_mean();
        let w = random(&g, 6, 400 + seed, 1.0).project_zero_mean();
        let a = lin.apply(&v).unwrap().inner(&w).unwrap();
        let b = v.inner(&lin.apply(&w).unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }
    let v = random(&g, 5, 6, 1.0);
    let hv = lin.apply(&v).unwrap();
    let g0 = ctx.gradient(&u).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let fd = ctx.gradient(&u.axpy(eps, &v).unwrap()).unwrap().sub(&g0).unwrap().scale(1.0 / eps);
        let err = fd.sub(&hv).unwrap().max_abs();
        assert!(err < 0.2 * last, "error {err} did not shrink linearly");
        last = err;
    }
    assert!(last < 1e-3 * hv.max_abs());
}

#[test]
fn hessian_at_zero_with_constant_potential_is_diagonal() {
    let g = grid(32);
    let lambda = 30.0;
    let ctx = EnergyContext::new(lambda, Field::constant(&g, 2.0)).unwrap();
    for (m1, m2) in [(1, 0), (0, 2), (1, 1), (3, -2)] {
        let mode = Field::from_fn(&g, |p| (2.0 * PI * (m1 as f64 * p[0] + m2 as f64 * p[1])).cos());
        let hv = ctx.hessian_apply(&Field::zeros(&g), &mode).unwrap();
        let eig = 4.0 * PI * PI * (m1 * m1 + m2 * m2) as f64 - lambda;
        assert!(hv.sub(&mode.scale(eig)).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn domain_violation_exactly_when_mass_nonpositive() {
    let g = grid(32);
    let k = Field::from_fn(&g, |p| (2.0 * PI * p[0]).cos() - 0.2);
    let ctx = EnergyContext::new(4.0, k.clone()).unwrap();
    let zero = Field::zeros(&g);
    assert!(matches!(ctx.energy(&zero), Err(Error::DomainViolation { .. })));
    assert!(matches!(ctx.gradient(&zero), Err(Error::DomainViolation { .. })));
    let u = Field::from_fn(&g, |p| 3.0 * (2.0 * PI * p[0]).cos());
    let mass = k.zip_map(&u, |a, b| a * b.exp()).unwrap().integrate().unwrap();
    assert!(mass > 0.0);
    assert!(ctx.energy(&u).is_ok());
}

#[test]
fn cutoff_profile() {
    let gamma = 0.1;
    assert_eq!(cutoff_chi(gamma, gamma / 2.0), gamma / 2.0);
    assert_eq!(cutoff_chi(gamma, 3.0 * gamma), 2.0 * gamma);
    let mut prev = 0.0;
    for i in 0..=3000 {
        let t = 3.0 * gamma * i as f64 / 3000.0;
        let v = cutoff_chi(gamma, t);
        assert!(v >= prev);
        prev = v;
        let d = cutoff_chi_derivative(gamma, t);
        assert!((0.0..=4.0 / 3.0 + 1e-12).contains(&d));
    }
    // C1 at the junctions
    for t in [gamma, 2.0 * gamma] {
        let h = 1e-9;
        let left = (cutoff_chi(gamma, t) - cutoff_chi(gamma, t - h)) / h;
        let right = (cutoff_chi(gamma, t + h) - cutoff_chi(gamma, t)) / h;
        assert!((left - right).abs() < 1e-6);
    }
}

#[test]
fn bubble_point_values() {
    let g = grid(128);
    let x = [0.25, 0.5];
    let gamma = 1.0 / 16.0;
    let mu = 100.0;
    let raw = bubble_raw(&g, &Barycenter::dirac(x), mu, gamma).unwrap();
    let k = g.nearest_node(x);
    assert!((raw.values()[k] - 2.0 * mu.ln()).abs() < 1e-12);
    assert_eq!(raw.argmax(), k);
    let far = g.nearest_node([0.75, 0.0]);
    let expected = -2.0 * (1.0 + 4.0 * mu * mu * gamma * gamma).ln() + 2.0 * mu.ln();
    assert!((raw.values()[far] - expected).abs() < 1e-12);

    let sigma = Barycenter::new(vec![(0.25, [0.25, 0.25]), (0.75, [0.75, 0.75])], g.torus()).unwrap();
    let raw2 = bubble_raw(&g, &sigma, mu, gamma).unwrap();
    let far = g.nearest_node([0.25, 0.75]);
    let sat = 2.0 * mu.ln() - 2.0 * (1.0 + 4.0 * mu * mu * gamma * gamma).ln();
    assert!((raw2.values()[far] - sat).abs() < 1e-12);

    let phi = bubble(&g, &sigma, mu, gamma, &ConicalConfig::empty()).unwrap();
    assert!(phi.is_zero_mean());
}

#[test]
fn singular_bubble_values() {
    let g = grid(128);
    let p = [0.5, 0.5];
    let (mu, gamma) = (50.0, 1.0 / 16.0);
    let raw = bubble_singular_raw(&g, p, 0.5, mu, gamma).unwrap();
    assert!((raw.values()[g.nearest_node(p)] - 3.0 * mu.ln()).abs() < 1e-12);
    let a = bubble_singular_raw(&g, p, 0.0, mu, gamma).unwrap();
    let b = bubble_raw(&g, &Barycenter::dirac(p), mu, gamma).unwrap();
    assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
}

#[test]
fn bubble_preconditions() {
    let g = grid(64);
    let cones = ConicalConfig::new(vec![ConicalPoint::new([0.5, 0.5], 0.5).unwrap()], 1).unwrap();
    let gamma = 1.0 / 16.0;
    let res = bubble(&g, &Barycenter::dirac([0.6, 0.5]), 10.0, gamma, &cones);
    assert!(matches!(res, Err(Error::SingularOverlap { cone: 0, .. })));
    assert!(bubble(&g, &Barycenter::dirac([0.0, 0.5]), 10.0, gamma, &cones).is_ok());
    // lambda = 10 pi: admissible orders lie in (0, 1/4)
    let lambda = 10.0 * PI;
    let res = bubble_singular(&g, [0.5, 0.5], 0.3, 10.0, gamma, &cones, lambda);
    assert!(matches!(res, Err(Error::BadOrder { .. })));
    assert!(bubble_singular(&g, [0.5, 0.5], 0.2, 10.0, gamma, &cones, lambda).is_ok());
    assert!(Barycenter::new(vec![(0.5, [0.1, 0.1]), (0.4, [0.2, 0.2])], g.torus()).is_err());
    assert!(Barycenter::new(vec![(0.5, [0.1, 0.1]), (0.5, [1.1, 0.1])], g.torus()).is_err());
}

#[test]
fn concentration_measure_normalized_and_localizes() {
    let g = grid(256);
    let k = Field::from_fn(&g, |p| (2.0 * PI * p[0]).cos());
    let ctx = EnergyContext::new(10.0 * PI, k).unwrap();
    let zero = Field::zeros(&g);
    let m = ctx.concentration_measure(&zero).unwrap();
    assert!((m.integrate().unwrap() - 1.0).abs() < 1e-12);
    assert!(m.values().iter().all(|&v| v >= 0.0));

    let x = [0.0, 0.5];
    let gamma = 1.0 / 16.0;
    let mut last = 0.0;
    for mu in [1e2, 1e3, 1e4] {
        let phi = bubble(&g, &Barycenter::dirac(x), mu, gamma, &ConicalConfig::empty()).unwrap();
        let mass = ctx.mass_in_ball(&phi, x, 3.0 * gamma).unwrap();
        assert!(mass > last, "mass {mass} at mu = {mu}");
        last = mass;
    }
    assert!(last > 0.99);
}

#[test]
fn two_point_bubble_masses_follow_weights() {
    let g = grid(256);
    let k = Field::from_fn(&g, |p| (2.0 * PI * p[0]).cos());
    let ctx = EnergyContext::new(20.0 * PI, k).unwrap();
    let gamma = 1.0 / 16.0;
    // equal K at both points, so the limit weights are exactly t_i
    let (x1, x2) = ([0.0, 0.25], [0.0, 0.75]);
    let sigma = Barycenter::new(vec![(0.3, x1), (0.7, x2)], g.torus()).unwrap();
    let mut gaps = Vec::new();
    for mu in [1e2, 1e3, 1e4] {
        let phi = bubble(&g, &sigma, mu, gamma, &ConicalConfig::empty()).unwrap();
        let m1 = ctx.mass_in_ball(&phi, x1, 3.0 * gamma).unwrap();
        let m2 = ctx.mass_in_ball(&phi, x2, 3.0 * gamma).unwrap();
        gaps.push((m1 - 0.3).abs() + (m2 - 0.7).abs());
    }
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}
