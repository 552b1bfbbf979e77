//! Critical points of the energy: Armijo gradient flow below `8 pi`,
//! Newton-Krylov on the residual at any `lambda`, deflation, continuation in
//! `lambda`, Morse indices and blow-up diagnostics.

mod diagnostics;
mod krylov;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use diagnostics::{
    concentration, kato_diagnostics, normalizing_shift, quantization_check, subdomain_integral,
    Concentration, KatoStats, QuantizationReport,
};
pub use krylov::{gmres, negative_eigenvalues, GmresOutcome, NegativeSpectrum};

use crate::error::{Error, Result};
use crate::functional::{EnergyContext, EnergyValue};
use crate::surface::Field;

/// Ball radius, relative to `min(L1, L2)`, for concentration reports.
pub const CONCENTRATION_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// grid max norm of the residual
    pub tolerance: f64,
    pub max_newton: usize,
    /// relative Krylov tolerance cap
    pub krylov_tolerance: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_flow_steps: usize,
    pub max_backtracks: usize,
    pub gmres_restart: usize,
    pub gmres_max: usize,
    /// cap on the grid max norm of a Newton step
    pub max_step: f64,
    /// blow-up detection threshold on `max u`
    pub blowup_threshold: f64,
    /// Lanczos steps per restart in the index computation
    pub index_steps: usize,
    /// relative threshold for counting an eigenvalue as negative
    pub index_threshold: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_newton: 50,
            krylov_tolerance: 1e-4,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_flow_steps: 50_000,
            max_backtracks: 60,
            gmres_restart: 60,
            gmres_max: 600,
            max_step: 1.0,
            blowup_threshold: 25.0,
            index_steps: 120,
            index_threshold: 1e-8,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("krylov_tolerance", self.krylov_tolerance),
            ("armijo_c", self.armijo_c),
            ("max_step", self.max_step),
            ("blowup_threshold", self.blowup_threshold),
            ("index_threshold", self.index_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidOption(format!(
                "backtrack factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if self.armijo_c >= 1.0 {
            return Err(Error::InvalidOption("armijo_c must be below 1".into()));
        }
        if self.gmres_restart == 0 || self.index_steps < 2 {
            return Err(Error::InvalidOption("Krylov dimensions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    pub index: usize,
    /// some eigenvalue has magnitude below the threshold
    pub near_degenerate: bool,
    pub negative_eigenvalues: Vec<f64>,
    pub smallest_magnitude: f64,
}

/// A converged critical point.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub lambda: f64,
    /// zero-mean representative
    pub solution: Field,
    /// grid max norm of the gradient, recomputed after convergence
    pub residual: f64,
    pub energy: EnergyValue,
    pub morse: MorseReport,
    pub kato: KatoStats,
    pub iterations: usize,
    /// max-norm residual (flow) or `H^{-1}` residual norm (Newton) per iteration
    pub history: Vec<f64>,
    /// accepted energies of the gradient flow; empty for Newton
    pub energy_trace: Vec<f64>,
}

/// Serializable view of a record without the field values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub lambda: f64,
    pub residual: f64,
    pub energy: EnergyValue,
    pub morse: MorseReport,
    pub kato: KatoStats,
    pub iterations: usize,
    pub max_u: f64,
    pub min_u: f64,
}

impl SolutionRecord {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            lambda: self.lambda,
            residual: self.residual,
            energy: self.energy,
            morse: self.morse.clone(),
            kato: self.kato,
            iterations: self.iterations,
            max_u: self.solution.max(),
            min_u: self.solution.min(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Termination {
    Completed,
    BlowUp(String),
    DomainExit,
    SolverFailure(String),
}

#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub records: Vec<SolutionRecord>,
    pub termination: Termination,
}

/// Zero-mean residual `-Lap u - lambda (K~ e^u / int K~ e^u - 1/|Sigma|)`.
pub fn residual(ctx: &EnergyContext, u: &Field) -> Result<Field> {
    ctx.gradient(u)
}

/// Record for an already zero-mean `u`.
fn finish(
    ctx: &EnergyContext,
    options: &SolverOptions,
    u: Field,
    iterations: usize,
    history: Vec<f64>,
    energy_trace: Vec<f64>,
) -> Result<SolutionRecord> {
    let residual = residual(ctx, &u)?.max_abs();
    let energy = ctx.energy(&u)?;
    let morse = morse_index(ctx, &u, options)?;
    Ok(SolutionRecord {
        lambda: ctx.lambda(),
        kato: kato_diagnostics(&u),
        solution: u,
        residual,
        energy,
        morse,
        iterations,
        history,
        energy_trace,
    })
}

/// `H^{-1}` norm of a residual, the merit function of the Newton line search.
pub fn residual_merit(r: &Field) -> f64 {
    r.project_zero_mean().inverse_sqrt_laplacian().l2_norm()
}

/// `(-Lap)^{-1}` on zero-mean fields.
fn precondition(v: &Field) -> Result<Field> {
    Ok(v.project_zero_mean().inverse_laplacian_unchecked())
}

/// Gradient flow preconditioned by `(-Lap)^{-1}` with Armijo backtracking.
pub fn minimize(ctx: &EnergyContext, options: &SolverOptions, u0: &Field) -> Result<SolutionRecord> {
    options.validate()?;
    if ctx.lambda() >= 8.0 * PI {
        return Err(Error::InvalidOption(format!(
            "minimization needs lambda < 8 pi, got {}",
            ctx.lambda()
        )));
    }
    let mut u = u0.project_zero_mean();
    let mut trace = vec![ctx.energy(&u)?.total];
    let mut history = Vec::new();
    let mut t: f64 = 1.0;
    for step in 0..options.max_flow_steps {
        let g = ctx.gradient(&u)?;
        let r = g.max_abs();
        history.push(r);
        if r <= options.tolerance {
            return finish(ctx, options, u, step, history, trace);
        }
        let d = precondition(&g)?.scale(-1.0);
        let slope = g.inner(&d)?;
        t = (2.0 * t).min(1.0);
        let mut accepted = false;
        let mut inside = false;
        for _ in 0..options.max_backtracks {
            match ctx.energy_change(&u, &d, t) {
                Ok(change) => {
                    inside = true;
                    if change <= options.armijo_c * t * slope {
                        accepted = true;
                        break;
                    }
                    t *= options.backtrack;
                }
                Err(Error::DomainViolation { .. }) => t *= options.backtrack,
                Err(e) => return Err(e),
            }
        }
        if !accepted {
            return Err(if inside {
                Error::Stagnation { residual: r }
            } else {
                Error::DomainExit
            });
        }
        u = u.axpy(t, &d)?.project_zero_mean();
        trace.push(ctx.energy(&u)?.total);
    }
    Err(Error::MaxIterations {
        iterations: options.max_flow_steps,
        residual: ctx.gradient(&u)?.max_abs(),
    })
}

/// One inexact Newton direction: `H d = -r` by right-preconditioned GMRES.
fn newton_direction(
    ctx: &EnergyContext,
    options: &SolverOptions,
    u: &Field,
    r: &Field,
) -> Result<Field> {
    let lin = ctx.linearize(u)?;
    let rtol = options.krylov_tolerance.min(r.l2_norm()).max(1e-14);
    let out = gmres(
        |v| lin.apply(v),
        precondition,
        &r.scale(-1.0),
        rtol,
        options.gmres_restart,
        options.gmres_max,
    )?;
    Ok(out.solution.project_zero_mean())
}

fn cap_step(options: &SolverOptions, d: Field) -> Field {
    let size = d.max_abs();
    if size > options.max_step {
        d.scale(options.max_step / size)
    } else {
        d
    }
}

/// Residual-norm line search along `d`; `None` when every trial leaves `X`.
fn line_search(
    ctx: &EnergyContext,
    options: &SolverOptions,
    u: &Field,
    d: &Field,
    norm: f64,
) -> Result<Option<(Field, Field)>> {
    let mut t = 1.0;
    let mut best: Option<(f64, Field, Field)> = None;
    for _ in 0..options.max_backtracks.min(30) {
        let trial = u.axpy(t, d)?.project_zero_mean();
        match ctx.gradient(&trial) {
            Ok(rt) => {
                let n = residual_merit(&rt);
                if n <= (1.0 - options.armijo_c * t) * norm {
                    return Ok(Some((trial, rt)));
                }
                if best.as_ref().is_none_or(|b| n < b.0) {
                    best = Some((n, trial, rt));
                }
            }
            Err(Error::DomainViolation { .. }) => {}
            Err(e) => return Err(e),
        }
        t *= options.backtrack;
    }
    Ok(best.map(|(_, u, r)| (u, r)))
}

/// Inexact Newton on the residual map with a residual-norm line search.
pub fn newton_solve(ctx: &EnergyContext, options: &SolverOptions, u0: &Field) -> Result<SolutionRecord> {
    options.validate()?;
    let mut u = u0.project_zero_mean();
    let mut r = residual(ctx, &u)?;
    let mut history = vec![residual_merit(&r)];
    for it in 0..options.max_newton {
        if r.max_abs() <= options.tolerance {
            return finish(ctx, options, u, it, history, Vec::new());
        }
        let norm = residual_merit(&r);
        let d = cap_step(options, newton_direction(ctx, options, &u, &r)?);
        let (nu, nr) = line_search(ctx, options, &u, &d, norm)?.ok_or(Error::DomainExit)?;
        u = nu;
        r = nr;
        history.push(residual_merit(&r));
        let k = history.len();
        if k > 5 && history[k - 1] > 0.99 * history[k - 6] {
            return Err(Error::Stagnation {
                residual: r.max_abs(),
            });
        }
    }
    if r.max_abs() <= options.tolerance {
        return finish(ctx, options, u, options.max_newton, history, Vec::new());
    }
    Err(Error::MaxIterations {
        iterations: options.max_newton,
        residual: r.max_abs(),
    })
}

/// Newton on `M(u) r(u)`, `M(u) = prod_i (|u - u_i|^{-power} + shift)`, so
/// that the known solutions `u_i` repel the iteration; finishes with plain
/// Newton from the deflated iterate.
pub fn deflated_newton(
    ctx: &EnergyContext,
    options: &SolverOptions,
    u0: &Field,
    known: &[Field],
    power: f64,
    shift: f64,
) -> Result<SolutionRecord> {
    options.validate()?;
    let mut u = u0.project_zero_mean();
    let deflation = |u: &Field| -> Result<(f64, Field)> {
        let mut log_m = 0.0;
        let mut grad = Field::zeros(u.grid());
        for k in known {
            let diff = u.sub(k)?;
            let n = diff.l2_norm();
            if n == 0.0 {
                return Err(Error::Stagnation { residual: 0.0 });
            }
            let m = n.powf(-power) + shift;
            log_m += m.ln();
            grad = grad.axpy(-power * n.powf(-power - 2.0) / m, &diff)?;
        }
        Ok((log_m, grad))
    };
    let mut r = residual(ctx, &u)?;
    let mut history = vec![residual_merit(&r)];
    for it in 0..options.max_newton {
        if r.max_abs() <= options.tolerance.max(1e-6) {
            let mut rec = newton_solve(ctx, options, &u)?;
            rec.iterations += it;
            history.extend(rec.history);
            rec.history = history;
            return Ok(rec);
        }
        let d0 = newton_direction(ctx, options, &u, &r)?;
        let (log_m, grad) = deflation(&u)?;
        let tau = 1.0 - grad.inner(&d0)?;
        let d = cap_step(options, if tau.abs() > 1e-12 { d0.scale(1.0 / tau) } else { d0 });
        let merit = log_m.exp() * residual_merit(&r);
        let mut t = 1.0;
        let mut best: Option<(f64, Field, Field)> = None;
        for _ in 0..options.max_backtracks.min(30) {
            let trial = u.axpy(t, &d)?.project_zero_mean();
            match residual(ctx, &trial) {
                Ok(rt) => {
                    let m = deflation(&trial)?.0.exp() * residual_merit(&rt);
                    if m <= (1.0 - options.armijo_c * t) * merit {
                        best = Some((m, trial, rt));
                        break;
                    }
                    if best.as_ref().is_none_or(|b| m < b.0) {
                        best = Some((m, trial, rt));
                    }
                }
                Err(Error::DomainViolation { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= options.backtrack;
        }
        let (_, nu, nr) = best.ok_or(Error::DomainExit)?;
        u = nu;
        r = nr;
        history.push(residual_merit(&r));
    }
    Err(Error::MaxIterations {
        iterations: options.max_newton,
        residual: r.max_abs(),
    })
}

/// Negative eigenvalues of the second variation on zero-mean fields, counted
/// through the congruent operator `S H S`, `S = (-Lap)^{-1/2}`.
pub fn morse_index(ctx: &EnergyContext, u: &Field, options: &SolverOptions) -> Result<MorseReport> {
    let lin = ctx.linearize(u)?;
    let spectrum = negative_eigenvalues(
        |v| {
            let s = v.project_zero_mean().inverse_sqrt_laplacian();
            Ok(lin.apply(&s)?.inverse_sqrt_laplacian())
        },
        u,
        options.index_threshold,
        options.index_steps,
        options.seed,
    )?;
    Ok(MorseReport {
        index: spectrum.negative.len(),
        near_degenerate: spectrum.smallest_magnitude < options.index_threshold * spectrum.norm,
        negative_eigenvalues: spectrum.negative,
        smallest_magnitude: spectrum.smallest_magnitude,
    })
}

/// Continuation over `lambda_from .. lambda_to` in `steps` equal steps.
pub fn continue_branch(
    ctx_template: &EnergyContext,
    seed: &Field,
    lambda_from: f64,
    lambda_to: f64,
    steps: usize,
    options: &SolverOptions,
) -> Result<BranchRecord> {
    if steps == 0 {
        return Err(Error::InvalidOption("continuation needs at least one step".into()));
    }
    let lambdas: Vec<f64> = (0..=steps)
        .map(|i| lambda_from + (lambda_to - lambda_from) * i as f64 / steps as f64)
        .collect();
    continue_along(ctx_template, seed, &lambdas, options)
}

/// Continuation through a strictly monotone list of `lambda` values,
/// warm-starting Newton from the previous solution. A failed step is
/// bisected up to six times before the branch terminates.
pub fn continue_along(
    ctx_template: &EnergyContext,
    seed: &Field,
    lambdas: &[f64],
    options: &SolverOptions,
) -> Result<BranchRecord> {
    options.validate()?;
    let increasing = lambdas.windows(2).all(|w| w[1] > w[0]);
    let decreasing = lambdas.windows(2).all(|w| w[1] < w[0]);
    if lambdas.is_empty() || !(increasing || decreasing) {
        return Err(Error::InvalidOption("lambda values must be strictly monotone".into()));
    }
    let mut records: Vec<SolutionRecord> = Vec::new();
    let mut u = seed.project_zero_mean();
    let mut last_lambda: Option<f64> = None;
    for &target in lambdas {
        let mut goal = target;
        let mut halvings = 0;
        loop {
            let ctx = ctx_template.with_lambda(goal)?;
            match newton_solve(&ctx, options, &u) {
                Ok(rec) => {
                    u = rec.solution.clone();
                    let blown = rec.solution.max() > options.blowup_threshold;
                    records.push(rec);
                    last_lambda = Some(goal);
                    if blown {
                        let reason = format!("max u exceeds {}", options.blowup_threshold);
                        return Ok(BranchRecord {
                            records,
                            termination: Termination::BlowUp(reason),
                        });
                    }
                    if goal == target {
                        break;
                    }
                    goal = target;
                    halvings = 0;
                }
                Err(e) => {
                    let Some(prev) = last_lambda.filter(|_| halvings < 6) else {
                        let termination = classify_failure(ctx_template, &records, e);
                        return Ok(BranchRecord {
                            records,
                            termination,
                        });
                    };
                    goal = 0.5 * (prev + goal);
                    halvings += 1;
                }
            }
        }
    }
    Ok(BranchRecord {
        records,
        termination: Termination::Completed,
    })
}

/// Newton failures after mass has gathered in a small ball count as blow-up.
fn classify_failure(
    ctx_template: &EnergyContext,
    records: &[SolutionRecord],
    e: Error,
) -> Termination {
    match e {
        Error::DomainExit | Error::DomainViolation { .. } => Termination::DomainExit,
        Error::Stagnation { .. } | Error::MaxIterations { .. } => {
            let concentrating = records.last().is_some_and(|r| {
                let u = &r.solution;
                let radius = CONCENTRATION_RADIUS * u.torus().min_period();
                let centre = u.grid().node_at(u.argmax());
                ctx_template
                    .with_lambda(r.lambda)
                    .and_then(|c| c.mass_in_ball(u, centre, radius))
                    .is_ok_and(|m| m >= 0.5)
            });
            if concentrating {
                Termination::BlowUp(format!("Newton failed with concentrating mass: {e}"))
            } else {
                Termination::SolverFailure(e.to_string())
            }
        }
        other => Termination::SolverFailure(other.to_string()),
    }
}

/// One CSV row per record of a branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRow {
    pub lambda: f64,
    pub energy: f64,
    pub residual: f64,
    pub max_u: f64,
    pub min_u: f64,
    pub morse_index: usize,
    pub kato_min_v: f64,
    pub kato_l3: f64,
    pub nearest_critical: f64,
    pub mass_in_ball: f64,
}

pub const BRANCH_CSV_HEADER: &str =
    "lambda,energy,residual,max_u,min_u,morse_index,kato_min_v,kato_l3,nearest_critical,mass_in_ball";

impl BranchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e}",
            self.lambda,
            self.energy,
            self.residual,
            self.max_u,
            self.min_u,
            self.morse_index,
            self.kato_min_v,
            self.kato_l3,
            self.nearest_critical,
            self.mass_in_ball
        )
    }
}

/// Rows with the mass `m(r)` at `r = 0.05 min(L1, L2)` around the maximum.
pub fn branch_rows(
    ctx_template: &EnergyContext,
    branch: &BranchRecord,
    positive_orders: &[f64],
) -> Result<Vec<BranchRow>> {
    branch
        .records
        .iter()
        .map(|rec| {
            let ctx = ctx_template.with_lambda(rec.lambda)?;
            let r = CONCENTRATION_RADIUS * rec.solution.torus().min_period();
            let c = concentration(&ctx, &rec.solution, positive_orders, &[r])?;
            Ok(BranchRow {
                lambda: rec.lambda,
                energy: rec.energy.total,
                residual: rec.residual,
                max_u: rec.solution.max(),
                min_u: rec.solution.min(),
                morse_index: rec.morse.index,
                kato_min_v: rec.kato.min_v,
                kato_l3: rec.kato.l3,
                nearest_critical: c.nearest,
                mass_in_ball: c.masses[0].1,
            })
        })
        .collect()
}
