use std::f64::consts::PI;

use liouville_torus::functional::{bubble_singular_raw, EnergyContext};
use liouville_torus::singular::{ConicalConfig, ConicalPoint, Formula, Potential};
use liouville_torus::solver::{
    continue_along, continue_branch, deflated_newton, gmres, kato_diagnostics, minimize,
    morse_index, newton_solve, normalizing_shift, quantization_check, subdomain_integral,
    SolverOptions, Termination,
};
use liouville_torus::surface::{Field, Grid, GreenFunction, Torus};
use liouville_torus::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Grid {
    Grid::square(Torus::unit(), n).unwrap()
}

fn random(g: &Grid, band: i32, seed: u64, scale: f64) -> Field {
    Field::random_band_limited(g, band, &mut ChaCha8Rng::seed_from_u64(seed)).scale(scale)
}

/// `K = cos(2 pi x1)` with one cone point of order 1/2 at `(0, 1/2)`.
fn cone_context(n: usize, lambda: f64) -> EnergyContext {
    let g = grid(n);
    let pot = Potential::from_formula(Formula::parse("cos(2*pi*x1)").unwrap(), &g).unwrap();
    let cones =
        ConicalConfig::attach(vec![ConicalPoint::new([0.0, 0.5], 0.5).unwrap()], &pot).unwrap();
    let green = GreenFunction::new(*g.torus()).unwrap();
    let kt = cones.tilde_k_on_grid(&green, pot.field()).unwrap();
    EnergyContext::new(lambda, kt).unwrap()
}

fn cone_start(g: &Grid) -> Field {
    Field::from_fn(g, |p| 2.0 * (2.0 * PI * p[0]).cos())
}

#[test]
fn constant_potential_minimizer_is_zero() {
    let g = grid(32);
    let ctx = EnergyContext::new(5.0 * PI, Field::constant(&g, 2.0)).unwrap();
    let rec = minimize(&ctx, &SolverOptions::default(), &random(&g, 3, 4, 0.3)).unwrap();
    assert!(rec.solution.max_abs() < 1e-9);
    assert!(rec.residual <= 1e-9);
    assert_eq!(rec.morse.index, 0);
    assert!(rec.solution.is_zero_mean());
}

#[test]
fn flow_energy_never_increases() {
    let ctx = cone_context(64, 4.0 * PI);
    let rec = minimize(&ctx, &SolverOptions::default(), &cone_start(ctx.grid())).unwrap();
    for w in rec.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()), "{} -> {}", w[0], w[1]);
    }
    assert!(rec.energy_trace.last().unwrap() < &rec.energy_trace[0]);
}

#[test]
fn minimize_rejects_supercritical_lambda() {
    let g = grid(16);
    let ctx = EnergyContext::new(9.0 * PI, Field::constant(&g, 1.0)).unwrap();
    let res = minimize(&ctx, &SolverOptions::default(), &Field::zeros(&g));
    assert!(matches!(res, Err(Error::InvalidOption(_))));
}

#[test]
fn flow_and_newton_agree_on_cone_problem() {
    let ctx = cone_context(128, 4.0 * PI);
    let opts = SolverOptions::default();
    let u0 = cone_start(ctx.grid());
    let a = minimize(&ctx, &opts, &u0).unwrap();
    let b = newton_solve(&ctx, &opts, &u0).unwrap();
    assert!(a.residual <= 1e-9 && b.residual <= 1e-9);
    assert!(a.solution.sub(&b.solution).unwrap().max_abs() < 1e-8);
    assert_eq!((a.morse.index, b.morse.index), (0, 0));
    assert!(!a.morse.near_degenerate);
}

#[test]
fn newton_tail_is_superlinear() {
    let ctx = cone_context(128, 4.0 * PI);
    let rec = newton_solve(&ctx, &SolverOptions::default(), &cone_start(ctx.grid())).unwrap();
    let h = &rec.history;
    assert!(h.len() >= 4, "{h:?}");
    let tail: Vec<_> = h.windows(2).filter(|w| w[0] < 1e-1 && w[1] > 1e-12).collect();
    assert!(tail.len() >= 2, "{h:?}");
    for w in tail {
        assert!(w[1] <= w[0].powf(1.5), "{h:?}");
    }
}

#[test]
fn newton_output_is_a_fixed_point() {
    let ctx = cone_context(64, 4.0 * PI);
    let opts = SolverOptions::default();
    let rec = newton_solve(&ctx, &opts, &cone_start(ctx.grid())).unwrap();
    let again = newton_solve(&ctx, &opts, &rec.solution).unwrap();
    assert!(again.iterations <= 1);
    assert!(again.solution.sub(&rec.solution).unwrap().max_abs() < 1e-10);
}

#[test]
fn newton_reports_domain_violation_at_start() {
    let ctx = cone_context(64, 4.0 * PI);
    let res = newton_solve(&ctx, &SolverOptions::default(), &Field::zeros(ctx.grid()));
    assert!(matches!(res, Err(Error::DomainViolation { .. })), "{res:?}");
}

#[test]
fn morse_index_of_constant_state_counts_low_modes() {
    let g = grid(32);
    for (lambda, expected) in [(30.0, 0), (50.0, 4), (100.0, 8), (170.0, 12)] {
        let ctx = EnergyContext::new(lambda, Field::constant(&g, 1.0)).unwrap();
        let m = morse_index(&ctx, &Field::zeros(&g), &SolverOptions::default()).unwrap();
        assert_eq!(m.index, expected, "lambda {lambda}: {m:?}");
        for (e, k2) in m.negative_eigenvalues.iter().zip([1.0, 1.0, 1.0, 1.0]) {
            let exact = 1.0 - lambda / (4.0 * PI * PI * k2);
            if expected == 4 {
                assert!((e - exact).abs() < 1e-8, "{e} vs {exact}");
            }
        }
    }
}

#[test]
fn morse_index_on_rectangular_torus() {
    // modes (m1, m2) with (2 pi m1 / 2)^2 + (2 pi m2)^2 < lambda / 2
    let g = Grid::new(Torus::new(2.0, 1.0).unwrap(), 32, 16).unwrap();
    let lambda = 2.0 * 45.0;
    let ctx = EnergyContext::new(lambda, Field::constant(&g, 1.0)).unwrap();
    let m = morse_index(&ctx, &Field::zeros(&g), &SolverOptions::default()).unwrap();
    let mut count = 0;
    for m1 in -8i32..=8 {
        for m2 in -8i32..=8 {
            let k2 = (PI * m1 as f64).powi(2) + (2.0 * PI * m2 as f64).powi(2);
            if (m1, m2) != (0, 0) && k2 < lambda / 2.0 {
                count += 1;
            }
        }
    }
    assert_eq!(m.index, count);
}

#[test]
fn gmres_inverts_shifted_laplacian() {
    let g = grid(32);
    let b = random(&g, 6, 9, 1.0).project_zero_mean();
    let apply = |v: &Field| -> liouville_torus::Result<Field> {
        Ok(v.laplacian()?.scale(-1.0).axpy(3.0, v)?.project_zero_mean())
    };
    let out = gmres(apply, |v| Ok(v.clone()), &b, 1e-12, 40, 2000).unwrap();
    let r = b.sub(&apply(&out.solution).unwrap()).unwrap();
    assert!(r.l2_norm() <= 1e-10 * b.l2_norm(), "{}", out.relative_residual);
    let pre = |v: &Field| Ok(v.project_zero_mean().solve_poisson().unwrap());
    let fast = gmres(apply, pre, &b, 1e-12, 40, 2000).unwrap();
    assert!(fast.iterations < out.iterations);
    assert!(fast.solution.sub(&out.solution).unwrap().max_abs() < 1e-9);
}

#[test]
fn kato_statistics_examples() {
    let g = grid(16);
    let positive = Field::from_fn(&g, |p| 1.0 + (2.0 * PI * p[0]).cos());
    let k = kato_diagnostics(&positive);
    assert_eq!((k.min_v, k.l1, k.l3), (0.0, 0.0, 0.0));
    let k = kato_diagnostics(&Field::constant(&g, -2.5));
    assert!(k.min_v.abs() < 1e-15 && k.l1 < 1e-15 && k.l3 < 1e-15);
}

#[test]
fn normalization_reaches_lambda() {
    let ctx = cone_context(64, 4.0 * PI);
    let rec = newton_solve(&ctx, &SolverOptions::default(), &cone_start(ctx.grid())).unwrap();
    let c = normalizing_shift(&ctx, &rec.solution).unwrap();
    let mass = ctx.mass(&rec.solution.shift(c)).unwrap();
    assert!((mass - ctx.lambda()).abs() <= 1e-10 * ctx.lambda());
}

#[test]
fn subdomain_integrals() {
    let g = grid(64);
    let pot = Potential::from_formula(Formula::parse("cos(2*pi*x1)").unwrap(), &g).unwrap();
    let ctx = EnergyContext::new(4.0 * PI, pot.field().clone()).unwrap();
    let u = Field::zeros(&g);
    let inner_negative: Vec<bool> = (0..g.len())
        .map(|i| (g.node_at(i)[0] - 0.5).abs() < 0.15)
        .collect();
    assert!(subdomain_integral(&ctx, &pot, &u, &inner_negative).unwrap() < 0.0);
    let whole_negative: Vec<bool> = pot.field().values().iter().map(|&k| k < 0.0).collect();
    assert!(matches!(
        subdomain_integral(&ctx, &pot, &u, &whole_negative),
        Err(Error::MaskTouchesNodalBand)
    ));
    let mixed: Vec<bool> = (0..g.len()).map(|i| g.node_at(i)[1] < 0.1).collect();
    assert!(subdomain_integral(&ctx, &pot, &u, &mixed).is_err());
}

#[test]
fn constant_branch_stays_at_zero() {
    let g = grid(32);
    let ctx = EnergyContext::new(PI, Field::constant(&g, 1.0)).unwrap();
    let opts = SolverOptions::default();
    let br = continue_branch(&ctx, &Field::zeros(&g), PI, 7.0 * PI, 6, &opts).unwrap();
    assert_eq!(br.termination, Termination::Completed);
    assert_eq!(br.records.len(), 7);
    for r in &br.records {
        assert!(r.solution.max_abs() < 1e-12);
    }
    for w in br.records.windows(2) {
        assert!(w[1].lambda > w[0].lambda);
    }
    assert!(matches!(
        quantization_check(&ctx, &br, &[], &[0.1], 2),
        Err(Error::NoBlowUp)
    ));
}

#[test]
fn continuation_round_trip_returns_to_seed() {
    let ctx = cone_context(64, 4.0 * PI);
    let opts = SolverOptions::default();
    let seed = newton_solve(&ctx, &opts, &cone_start(ctx.grid())).unwrap().solution;
    let out = continue_branch(&ctx, &seed, 4.0 * PI, 6.0 * PI, 4, &opts).unwrap();
    assert_eq!(out.termination, Termination::Completed);
    let back = continue_along(
        &ctx,
        &out.records.last().unwrap().solution,
        &[6.0 * PI, 5.0 * PI, 4.0 * PI],
        &opts,
    )
    .unwrap();
    let end = &back.records.last().unwrap().solution;
    assert!(end.sub(&seed).unwrap().max_abs() < 1e-6);
}

#[test]
fn continuation_rejects_non_monotone_lambdas() {
    let g = grid(16);
    let ctx = EnergyContext::new(PI, Field::constant(&g, 1.0)).unwrap();
    let res = continue_along(&ctx, &Field::zeros(&g), &[PI, 2.0 * PI, 1.5 * PI], &SolverOptions::default());
    assert!(matches!(res, Err(Error::InvalidOption(_))));
}

#[test]
fn deflation_finds_the_mirror_saddle() {
    let ctx = cone_context(128, 10.0 * PI);
    let g = ctx.grid().clone();
    let opts = SolverOptions::default();
    let bubble = bubble_singular_raw(&g, [0.0, 0.5], 0.5, 20.0, 1.0 / 16.0)
        .unwrap()
        .project_zero_mean();
    let u0 = bubble
        .add(&Field::from_fn(&g, |p| -0.3 * (2.0 * PI * p[0]).sin()))
        .unwrap();
    let first = newton_solve(&ctx, &opts, &u0).unwrap();
    assert_eq!(first.morse.index, 2);
    let mirror = Field::from_fn(&g, |p| first.solution.evaluate_at([-p[0], p[1]]));
    assert!(mirror.sub(&first.solution).unwrap().max_abs() > 1.0);
    let second = deflated_newton(&ctx, &opts, &u0, &[first.solution.clone()], 2.0, 1.0).unwrap();
    assert!(second.residual <= 1e-9);
    assert!(second.solution.sub(&mirror).unwrap().max_abs() < 1e-8);
    assert_eq!(second.morse.index, 2);
    assert!((second.energy.total - first.energy.total).abs() < 1e-9);
}

#[test]
fn options_validation() {
    let bad = [
        SolverOptions { tolerance: 0.0, ..Default::default() },
        SolverOptions { backtrack: 1.0, ..Default::default() },
        SolverOptions { armijo_c: 1.5, ..Default::default() },
        SolverOptions { max_step: -1.0, ..Default::default() },
    ];
    for o in bad {
        assert!(matches!(o.validate(), Err(Error::InvalidOption(_))), "{o:?}");
    }
    assert!(SolverOptions::default().validate().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn returned_records_satisfy_tolerance(seed in 0u64..1000, amp in 0.1f64..0.6) {
        let g = grid(32);
        let k = random(&g, 2, seed, amp).shift(1.0);
        let ctx = EnergyContext::new(3.0 * PI, k).unwrap();
        let opts = SolverOptions::default();
        let rec = minimize(&ctx, &opts, &Field::zeros(&g)).unwrap();
        let check = ctx.gradient(&rec.solution).unwrap().max_abs();
        prop_assert!(check <= opts.tolerance);
        prop_assert!(rec.solution.is_zero_mean());
        prop_assert_eq!(rec.morse.index, 0);
        for w in rec.energy_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn kato_statistics_are_consistent(seed in 0u64..1000, amp in 0.1f64..5.0) {
        let g = grid(16);
        let u = random(&g, 3, seed, amp);
        let k = kato_diagnostics(&u);
        prop_assert!(k.min_v <= 1e-15);
        prop_assert!(k.l1 >= 0.0 && k.l3 >= 0.0);
        // on the unit torus the L3 norm dominates the L1 norm
        prop_assert!(k.l1 <= k.l3 + 1e-12);
    }
}
