//! Batch front end: configuration, command dispatch and result files.
//!
//! Every command writes `report.json` (the [`ReportEnvelope`]) into the output
//! directory, plus CSV tables and field dumps. Only the envelope's
//! `wall_clock_seconds` varies between identical runs.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{
    BubbleSection, ConesSection, CountsSection, Initial, Method, PotentialSection, Real, RunConfig,
    SolveSection, SweepSection, TopologySection, TorusSection, VerifySection,
};

use crate::error::{Error, Result};
use crate::functional::{
    bubble_raw, bubble_singular_raw, default_gamma, is_under_resolved, Barycenter, EnergyContext,
    PotentialTotals, RadialBubble,
};
use crate::morse::{
    band_index, bar_betti_oracle, closed_betti, existence_gate, multiplicity_8pi16pi,
    multiplicity_general, BettiVector, SurfaceTopology, LAMBDA_TOLERANCE,
};
use crate::singular::{
    classify_sign_regions, critical_set, j_lambda, ConicalConfig, ConicalPoint, Formula, Potential,
};
use crate::solver::{
    branch_rows, continue_along, deflated_newton, minimize, newton_solve, quantization_check,
    BranchRecord, SolutionRecord, Termination, BRANCH_CSV_HEADER, CONCENTRATION_RADIUS,
};
use crate::surface::{Field, GreenFunction, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Counts,
    Solve,
    Sweep,
    Bubble,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Counts => "counts",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Bubble => "bubble",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub wall_clock_seconds: f64,
    pub results: Value,
}

/// Read the config, apply the flag overrides, run and write `report.json`.
pub fn run(inv: &Invocation) -> Result<ReportEnvelope> {
    let source = fs::read_to_string(&inv.config)
        .map_err(|e| Error::Io(format!("{}: {e}", inv.config.display())))?;
    let mut cfg = RunConfig::parse(&source)?;
    if let Some(n) = inv.resolution {
        cfg.torus.n1 = n;
        cfg.torus.n2 = n;
    }
    if let Some(s) = inv.seed {
        cfg.solver.seed = s;
    }
    fs::create_dir_all(&inv.out)?;
    let start = Instant::now();
    let results = execute(inv.command, &cfg, &inv.out)?;
    let envelope = ReportEnvelope {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: inv.command,
        config: cfg,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        results,
    };
    let text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::Io(format!("report serialization: {e}")))?;
    fs::write(inv.out.join("report.json"), text + "\n")?;
    Ok(envelope)
}

/// Run one command on a parsed config, writing its artifacts into `out`.
pub fn execute(command: Command, cfg: &RunConfig, out: &Path) -> Result<Value> {
    match command {
        Command::Counts => cmd_counts(cfg, out),
        Command::Solve => cmd_solve(cfg, out),
        Command::Sweep => cmd_sweep(cfg, out),
        Command::Bubble => cmd_bubble(cfg, out),
        Command::Verify => cmd_verify(cfg, out),
    }
}

fn missing(section: &str) -> Error {
    Error::Config {
        line: 0,
        message: format!("missing [{section}] section"),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn write(out: &Path, name: &str, text: &str) -> Result<()> {
    let path = out.join(name);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn dump(out: &Path, name: &str, f: &Field) -> Result<()> {
    let mut buf = Vec::new();
    f.write_dump(&mut buf)?;
    write(out, name, &String::from_utf8_lossy(&buf))
}

/// Grid, validated potential, attached cones and the Green function.
struct Problem {
    grid: Grid,
    potential: Potential,
    cones: ConicalConfig,
    green: GreenFunction,
}

impl Problem {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let section = cfg.potential.as_ref().ok_or_else(|| missing("potential"))?;
        let torus = cfg.torus_value()?;
        let grid = Grid::new(torus, cfg.torus.n1, cfg.torus.n2)?;
        let potential = Potential::from_formula(Formula::parse(&section.formula)?, &grid)?;
        let points = cfg
            .cone_points()
            .into_iter()
            .map(|(p, a)| ConicalPoint::new(p, a))
            .collect::<Result<Vec<_>>>()?;
        let cones = ConicalConfig::attach(points, &potential)?;
        let green = GreenFunction::new(torus)?;
        Ok(Self {
            grid,
            potential,
            cones,
            green,
        })
    }

    fn k_tilde(&self) -> Result<Field> {
        self.cones.tilde_k_on_grid(&self.green, self.potential.field())
    }

    fn context(&self, lambda: f64) -> Result<EnergyContext> {
        EnergyContext::new(lambda, self.k_tilde()?)
    }

    /// `LambdaCritical` when `lambda` is within the gate tolerance of `Lambda`.
    fn check_lambda(&self, lambda: f64) -> Result<()> {
        let orders = self.cones.positive_orders();
        match critical_set(&orders, lambda + 1.0)
            .into_iter()
            .find(|c| (c - lambda).abs() < LAMBDA_TOLERANCE)
        {
            Some(critical) => Err(Error::LambdaCritical { lambda, critical }),
            None => Ok(()),
        }
    }

    fn initial(&self, init: &Initial) -> Result<Field> {
        let torus = *self.grid.torus();
        match init {
            Initial::Zero {} => Ok(Field::zeros(&self.grid)),
            Initial::Formula { formula } => {
                let f = Formula::parse(formula)?;
                Ok(Field::from_fn(&self.grid, |x| f.eval(&torus, x)).project_zero_mean())
            }
            Initial::Bubble {
                point,
                alpha,
                mu,
                gamma,
            } => {
                let g = gamma.map_or(default_gamma(&torus), |g| g.0);
                let p = [point[0].0, point[1].0];
                Ok(bubble_singular_raw(&self.grid, p, alpha.0, mu.0, g)?.project_zero_mean())
            }
        }
    }
}

fn rows_csv(ctx: &EnergyContext, records: Vec<SolutionRecord>, orders: &[f64]) -> Result<String> {
    let branch = BranchRecord {
        records,
        termination: Termination::Completed,
    };
    let mut s = String::from(BRANCH_CSV_HEADER);
    s.push('\n');
    for row in branch_rows(ctx, &branch, orders)? {
        s.push_str(&row.to_csv());
        s.push('\n');
    }
    Ok(s)
}

fn betti_text(b: &BettiVector) -> String {
    let parts: Vec<String> = b.nonzero().map(|(q, v)| format!("{q}:{v}")).collect();
    parts.join(";")
}

/// `d_q` table, multiplicity bounds and existence gates.
pub fn cmd_counts(cfg: &RunConfig, out: &Path) -> Result<Value> {
    let counts = cfg.counts.as_ref().ok_or_else(|| missing("counts"))?;
    let (topology, orders, derived) = match (&cfg.topology, &cfg.potential) {
        (Some(t), _) => (
            SurfaceTopology::new(t.bouquets.clone(), t.points)?,
            t.positive_orders.iter().map(|r| r.0).collect::<Vec<_>>(),
            false,
        ),
        (None, Some(_)) => {
            let problem = Problem::new(cfg)?;
            let regions = classify_sign_regions(&problem.potential)?;
            (regions.topology, problem.cones.positive_orders(), true)
        }
        (None, None) => return Err(missing("topology")),
    };
    let lambda = counts.lambda.map(|l| l.0);
    let k = match (counts.k, lambda) {
        (Some(k), _) => k,
        (None, Some(l)) => band_index(l),
        (None, None) => {
            return Err(Error::Config {
                line: 0,
                message: "[counts] needs lambda or k".into(),
            })
        }
    };
    if k == 0 {
        return Err(Error::InvalidOption("counts need k >= 1 (lambda > 8 pi)".into()));
    }
    let table = closed_betti(k, &topology)?;
    let sum = table.total()?;
    let mut results = json!({
        "topology": {
            "bouquets": topology.bouquets(),
            "points": topology.m(),
            "derived": derived,
        },
        "k": k,
        "table": table.nonzero().collect::<Vec<_>>(),
        "sum": sum,
        "multiplicity_general": multiplicity_general(k, &topology)?,
    });
    if let Some(l) = lambda {
        let critical = critical_set(&orders, l + 1.0);
        let j = j_lambda(&orders, l);
        let gate = existence_gate(l, k, &topology, &orders, j.len(), &critical)?;
        results["lambda"] = json!(l);
        results["critical_set"] = json!(critical);
        results["j_lambda"] = json!(j);
        results["gate"] = to_json(&gate);
        if gate.eight_sixteen {
            results["multiplicity_8pi16pi"] = json!(multiplicity_8pi16pi(&topology, j.len())?);
        }
    }
    let mut csv = String::from("q,d_q\n");
    for (q, v) in table.nonzero() {
        let _ = writeln!(csv, "{q},{v}");
    }
    write(out, "counts.csv", &csv)?;
    Ok(results)
}

/// One critical point (and optionally more by deflation).
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<Value> {
    let section = cfg.solve.as_ref().ok_or_else(|| missing("solve"))?;
    let problem = Problem::new(cfg)?;
    let lambda = section.lambda.0;
    problem.check_lambda(lambda)?;
    let ctx = problem.context(lambda)?;
    let u0 = problem.initial(&section.initial)?;
    let first = match section.method {
        Method::Newton => newton_solve(&ctx, &cfg.solver, &u0)?,
        Method::Flow => minimize(&ctx, &cfg.solver, &u0)?,
    };
    let mut records = vec![first];
    if section.deflate > 0 {
        let l1 = problem.grid.torus().l1();
        let tilt = section.deflation_tilt.0;
        let start = u0
            .add(&Field::from_fn(&problem.grid, |x| {
                -tilt * (2.0 * std::f64::consts::PI * x[0] / l1).sin()
            }))?
            .project_zero_mean();
        for _ in 0..section.deflate {
            let known: Vec<Field> = records.iter().map(|r| r.solution.clone()).collect();
            records.push(deflated_newton(&ctx, &cfg.solver, &start, &known, 2.0, 1.0)?);
        }
    }
    for (i, r) in records.iter().enumerate() {
        let name = if i == 0 {
            "solution.dump".to_string()
        } else {
            format!("solution_{i}.dump")
        };
        dump(out, &name, &r.solution)?;
    }
    let summaries: Vec<Value> = records.iter().map(|r| to_json(&r.summary())).collect();
    let orders = problem.cones.positive_orders();
    write(out, "solution.csv", &rows_csv(&ctx, records, &orders)?)?;
    Ok(json!({ "solutions": summaries }))
}

/// Continuation over the configured lambdas with blow-up classification.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Value> {
    let section = cfg.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
    let problem = Problem::new(cfg)?;
    let lambdas = section.lambdas()?;
    for &l in &lambdas {
        problem.check_lambda(l)?;
    }
    let ctx = problem.context(lambdas[0])?;
    let seed = problem.initial(&section.initial)?;
    let branch = continue_along(&ctx, &seed, &lambdas, &cfg.solver)?;
    let orders = problem.cones.positive_orders();
    let mut csv = String::from(BRANCH_CSV_HEADER);
    csv.push('\n');
    for row in branch_rows(&ctx, &branch, &orders)? {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    write(out, "branch.csv", &csv)?;
    for (i, r) in branch.records.iter().enumerate() {
        dump(out, &format!("fields/record_{i:03}.dump"), &r.solution)?;
    }
    let mut results = json!({
        "termination": to_json(&branch.termination),
        "records": branch.records.len(),
        "last": branch.records.last().map(|r| to_json(&r.summary())),
    });
    if let Termination::BlowUp(_) = branch.termination {
        let radii = if section.radii.is_empty() {
            vec![CONCENTRATION_RADIUS * problem.grid.torus().min_period()]
        } else {
            section.radii()
        };
        results["quantization"] = to_json(&quantization_check(&ctx, &branch, &orders, &radii, 3)?);
    }
    if let Termination::SolverFailure(msg) = &branch.termination {
        return Err(Error::Verification(format!("sweep failed: {msg}")));
    }
    Ok(results)
}

/// Energy and ball mass of single bubbles over a list of concentrations.
pub fn cmd_bubble(cfg: &RunConfig, out: &Path) -> Result<Value> {
    let section = cfg.bubble.as_ref().ok_or_else(|| missing("bubble"))?;
    let problem = Problem::new(cfg)?;
    let torus = *problem.grid.torus();
    let lambda = section.lambda.0;
    let gamma = section.gamma.map_or(default_gamma(&torus), |g| g.0);
    let mass_radius = section.mass_radius.map_or(3.0 * gamma, |r| r.0);
    let p = section.point();
    let alpha = section.alpha.0;
    let ctx = problem.context(lambda)?;
    let kt = ctx.k_tilde();
    let totals = PotentialTotals {
        k: kt.integrate()?,
        k_plus: kt.map(|v| v.max(0.0)).integrate()?,
    };
    let k_tilde = |x| {
        problem
            .cones
            .tilde_k(&problem.green, problem.potential.value_at(x), x)
            .unwrap_or(f64::NAN)
    };
    let mut csv = String::from("mu,energy,dirichlet,log_term,mass_in_ball,grid_energy\n");
    let mut rows = Vec::new();
    for mu in section.mus() {
        let b = RadialBubble {
            center: p,
            alpha,
            mu,
            gamma,
        };
        let rep = b.evaluate(&torus, lambda, &k_tilde, totals, mass_radius)?;
        if !rep.energy.total.is_finite() || !rep.mass_in_ball.is_finite() {
            return Err(Error::Overflow(format!("bubble energy at mu = {mu}")));
        }
        let grid_energy = if is_under_resolved(&problem.grid, mu, gamma) {
            None
        } else {
            let phi = if alpha == 0.0 {
                bubble_raw(&problem.grid, &Barycenter::dirac(p), mu, gamma)?
            } else {
                bubble_singular_raw(&problem.grid, p, alpha, mu, gamma)?
            };
            Some(ctx.energy(&phi.project_zero_mean())?.total)
        };
        let _ = writeln!(
            csv,
            "{mu:e},{:e},{:e},{:e},{:e},{}",
            rep.energy.total,
            rep.energy.dirichlet,
            rep.energy.log_term,
            rep.mass_in_ball,
            grid_energy.map_or(String::new(), |e| format!("{e:e}"))
        );
        rows.push(json!({
            "mu": mu,
            "energy": rep.energy.total,
            "mass_in_ball": rep.mass_in_ball,
            "grid_energy": grid_energy,
        }));
    }
    write(out, "bubble.csv", &csv)?;
    let energies: Vec<f64> = rows.iter().filter_map(|r| r["energy"].as_f64()).collect();
    Ok(json!({
        "gamma": gamma,
        "mass_radius": mass_radius,
        "rows": rows,
        "strictly_decreasing": energies.windows(2).all(|w| w[1] < w[0]),
    }))
}

/// Nondecreasing bouquet lists of length `n` with entries in `1..=g_max`.
fn bouquet_lists(n: u32, g_max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let lo = v.last().copied().unwrap_or(1);
                (lo..=g_max).map(move |g| {
                    let mut w = v.clone();
                    w.push(g);
                    w
                })
            })
            .collect();
    }
    out
}

/// Closed formula against the homology oracle over a parameter box.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Value> {
    let v = cfg.verify.clone().unwrap_or_default();
    let mut csv = String::from("k,bouquets,points,closed,oracle,match\n");
    let (mut checked, mut mismatches) = (0usize, Vec::new());
    for k in 1..=v.k_max {
        for n in 0..=v.n_max {
            for bouquets in bouquet_lists(n, v.g_max) {
                for m in 0..=v.m_max {
                    if n == 0 && m == 0 {
                        continue;
                    }
                    let topo = SurfaceTopology::new(bouquets.clone(), m)?;
                    let closed = closed_betti(k, &topo)?;
                    let oracle = bar_betti_oracle(&topo, k)?;
                    let ok = closed == oracle;
                    let g: Vec<String> = bouquets.iter().map(u32::to_string).collect();
                    let _ = writeln!(
                        csv,
                        "{k},{},{m},{},{},{ok}",
                        g.join(";"),
                        betti_text(&closed),
                        betti_text(&oracle)
                    );
                    checked += 1;
                    if !ok {
                        mismatches.push(format!("k={k} g={bouquets:?} M={m}"));
                    }
                }
            }
        }
    }
    write(out, "verify.csv", &csv)?;
    if !mismatches.is_empty() {
        return Err(Error::Verification(format!(
            "{} of {checked} cases differ: {}",
            mismatches.len(),
            mismatches.join(", ")
        )));
    }
    Ok(json!({ "checked": checked, "mismatches": 0 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bouquet_lists_are_multisets() {
        assert_eq!(bouquet_lists(0, 3), vec![Vec::<u32>::new()]);
        assert_eq!(bouquet_lists(2, 2), vec![vec![1, 1], vec![1, 2], vec![2, 2]]);
        assert_eq!(bouquet_lists(3, 3).len(), 10);
    }
}
