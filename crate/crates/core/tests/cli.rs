use std::fs;
use std::path::Path;
use std::process::Command as Process;

use liouville_torus::cli::{execute, run, Command, Invocation, RunConfig};
use liouville_torus::functional::EnergyContext;
use liouville_torus::singular::{ConicalConfig, ConicalPoint, Formula, Potential};
use liouville_torus::surface::{Field, GreenFunction};
use liouville_torus::Error;
use tempfile::tempdir;

const COERCIVE: &str = r#"
[torus]
n1 = 64
n2 = 64

[potential]
formula = "cos(2*pi*x1)"

[cones]
points = [[0.0, 0.5, 0.5]]

[solve]
lambda = "4*pi"

[solve.initial]
kind = "formula"
formula = "2*cos(2*pi*x1)"
"#;

fn config(text: &str) -> RunConfig {
    RunConfig::parse(text).unwrap()
}

fn invocation(command: Command, dir: &Path, text: &str) -> Invocation {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    Invocation {
        command,
        config: path,
        out: dir.join("out"),
        resolution: None,
        seed: None,
    }
}

#[test]
fn counts_from_topology() {
    let dir = tempdir().unwrap();
    let cfg = config("[topology]\nbouquets = [1]\n[counts]\nk = 1\n");
    let r = execute(Command::Counts, &cfg, dir.path()).unwrap();
    assert_eq!(r["table"], serde_json::json!([[1, 1]]));
    assert_eq!(r["sum"], 1);
    assert_eq!(fs::read_to_string(dir.path().join("counts.csv")).unwrap(), "q,d_q\n1,1\n");
}

#[test]
fn counts_derive_topology_from_potential() {
    let dir = tempdir().unwrap();
    let cfg = config("[potential]\nformula = \"cos(2*pi*x1)\"\n[counts]\nlambda = \"12*pi\"\n");
    let r = execute(Command::Counts, &cfg, dir.path()).unwrap();
    assert_eq!(r["topology"]["bouquets"], serde_json::json!([1]));
    assert_eq!(r["topology"]["derived"], true);
    assert_eq!(r["k"], 1);
    assert_eq!(r["gate"]["general"], true);
}

#[test]
fn counts_reject_critical_lambda() {
    let dir = tempdir().unwrap();
    let cfg = config("[potential]\nformula = \"cos(2*pi*x1)\"\n[counts]\nlambda = \"16*pi\"\n");
    let err = execute(Command::Counts, &cfg, dir.path()).unwrap_err();
    assert!(matches!(err, Error::LambdaCritical { .. }));
}

#[test]
fn verify_box_passes() {
    let dir = tempdir().unwrap();
    let r = execute(Command::Verify, &config("[verify]\n"), dir.path()).unwrap();
    assert_eq!(r["mismatches"], 0);
    assert_eq!(r["checked"], 68);
}

#[test]
fn bubble_energy_decreases() {
    let dir = tempdir().unwrap();
    let cfg = config(
        "[torus]\nn1 = 64\nn2 = 64\n[potential]\nformula = \"cos(2*pi*x1)\"\n\
         [bubble]\nlambda = \"10*pi\"\npoint = [0, 0.5]\nmu = [10, 100, 1000]\n",
    );
    let r = execute(Command::Bubble, &cfg, dir.path()).unwrap();
    assert_eq!(r["strictly_decreasing"], true);
    let csv = fs::read_to_string(dir.path().join("bubble.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn solve_outside_domain_fails() {
    let dir = tempdir().unwrap();
    let text = COERCIVE.replace("kind = \"formula\"\nformula = \"2*cos(2*pi*x1)\"", "kind = \"zero\"");
    let err = execute(Command::Solve, &config(&text), dir.path()).unwrap_err();
    assert!(matches!(err, Error::DomainViolation { .. }), "{err:?}");
}

#[test]
fn solve_rows_revalidate_from_dumps() {
    let dir = tempdir().unwrap();
    let cfg = config(COERCIVE);
    execute(Command::Solve, &cfg, dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    let file = fs::File::open(dir.path().join("solution.dump")).unwrap();
    let u = Field::read_dump(std::io::BufReader::new(file)).unwrap();

    let pot = Potential::from_formula(Formula::parse("cos(2*pi*x1)").unwrap(), u.grid()).unwrap();
    let cones =
        ConicalConfig::attach(vec![ConicalPoint::new([0.0, 0.5], 0.5).unwrap()], &pot).unwrap();
    let green = GreenFunction::new(*u.torus()).unwrap();
    let kt = cones.tilde_k_on_grid(&green, pot.field()).unwrap();
    let ctx = EnergyContext::new(row[0], kt).unwrap();
    let residual = ctx.gradient(&u).unwrap().max_abs();
    assert!((residual - row[2]).abs() <= 1e-12, "{residual} vs {}", row[2]);
    assert!(residual <= 1e-9);
    assert!((ctx.energy(&u).unwrap().total - row[1]).abs() <= 1e-12 * row[1].abs());
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempdir().unwrap();
    let cases = [
        (Command::Verify, "[verify]\nk_max = 3\n"),
        (Command::Counts, "[topology]\nbouquets = [1, 2]\npoints = 1\n[counts]\nlambda = \"20*pi\"\n"),
        (Command::Solve, COERCIVE),
    ];
    for (cmd, text) in cases {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let mut inv = invocation(cmd, dir.path(), text);
        inv.out = a.clone();
        let ra = run(&inv).unwrap();
        inv.out = b.clone();
        let rb = run(&inv).unwrap();
        assert_eq!(ra.results, rb.results);
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            if name != "report.json" {
                assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
            }
        }
        fs::remove_dir_all(&a).unwrap();
        fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn flags_override_resolution_and_seed() {
    let dir = tempdir().unwrap();
    let mut inv = invocation(Command::Solve, dir.path(), COERCIVE);
    inv.resolution = Some(32);
    inv.seed = Some(7);
    let report = run(&inv).unwrap();
    assert_eq!(report.config.torus.n1, 32);
    assert_eq!(report.config.solver.seed, 7);
    let dump = fs::read_to_string(dir.path().join("out/solution.dump")).unwrap();
    assert!(dump.starts_with("TORUS 1 1 32 32"));
}

#[test]
fn binary_exit_status() {
    let dir = tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_ltorus");
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let ok = write("ok.toml", "[topology]\nbouquets = [1]\n[counts]\nk = 1\n");
    let status = |cmd: &str, cfg: &Path| {
        Process::new(bin)
            .args([cmd, "--config"])
            .arg(cfg)
            .arg("--out")
            .arg(dir.path().join("out"))
            .output()
            .unwrap()
            .status
    };
    assert!(status("counts", &ok).success());
    let typo = write("typo.toml", "[topology]\nbouquet = [1]\n[counts]\nk = 1\n");
    assert!(!status("counts", &typo).success());
    let critical = write("crit.toml", "[potential]\nformula = \"cos(2*pi*x1)\"\n[counts]\nlambda = \"16*pi\"\n");
    assert!(!status("counts", &critical).success());
    assert!(!status("counts", &dir.path().join("missing.toml")).success());
    assert!(!status("solve", &ok).success());
    assert!(!status("frobnicate", &ok).success());
}
