//! Run configuration: TOML text with one `[section]` per concern.
//!
//! Real-valued entries accept either a number or a constant expression in the
//! formula language, so `lambda = "10*pi"` is allowed.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::singular::Formula;
use crate::solver::SolverOptions;
use crate::surface::{Point, Torus};

/// A real given as a number or as a constant expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Real(i as f64)),
            Raw::Float(x) => Ok(Real(x)),
            Raw::Text(s) => {
                let f = Formula::parse(&s).map_err(serde::de::Error::custom)?;
                let v = f.eval(&Torus::unit(), [0.0, 0.0]);
                if v.is_finite() {
                    Ok(Real(v))
                } else {
                    Err(serde::de::Error::custom(format!("{s:?} is not a finite constant")))
                }
            }
        }
    }
}

fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusSection {
    pub l1: Real,
    pub l2: Real,
    pub n1: usize,
    pub n2: usize,
}

impl Default for TorusSection {
    fn default() -> Self {
        Self {
            l1: Real(1.0),
            l2: Real(1.0),
            n1: 128,
            n2: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub formula: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConesSection {
    /// `[x1, x2, alpha]` per cone point
    pub points: Vec<[Real; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(default)]
    pub bouquets: Vec<u32>,
    #[serde(default)]
    pub points: u32,
    /// orders of the cone points inside the positive region
    #[serde(default)]
    pub positive_orders: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsSection {
    pub lambda: Option<Real>,
    pub k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    Zero {},
    Formula {
        formula: String,
    },
    Bubble {
        point: [Real; 2],
        #[serde(default = "zero")]
        alpha: Real,
        mu: Real,
        gamma: Option<Real>,
    },
}

fn zero() -> Real {
    Real(0.0)
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Zero {}
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Newton,
    Flow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub lambda: Real,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub initial: Initial,
    /// further solutions sought by deflation from the same initial guess
    #[serde(default)]
    pub deflate: usize,
    /// tilt `-amp sin(2 pi x1 / L1)` added to the initial guess of deflation
    #[serde(default = "zero")]
    pub deflation_tilt: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub from: Real,
    pub to: Real,
    pub steps: usize,
    /// appended values `target - (target - to) ratio^j`, `j = 1..=count`
    pub approach_target: Option<Real>,
    #[serde(default = "default_ratio")]
    pub approach_ratio: Real,
    #[serde(default)]
    pub approach_count: usize,
    #[serde(default)]
    pub initial: Initial,
    /// radii of the concentration profile in the quantization report
    #[serde(default)]
    pub radii: Vec<Real>,
}

fn default_ratio() -> Real {
    Real(0.5)
}

impl SweepSection {
    pub fn lambdas(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return Err(Error::InvalidOption("sweep.steps must be >= 1".into()));
        }
        let (a, b) = (self.from.0, self.to.0);
        let mut out: Vec<f64> = (0..=self.steps)
            .map(|i| a + (b - a) * i as f64 / self.steps as f64)
            .collect();
        if let Some(t) = self.approach_target {
            let r = self.approach_ratio.0;
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidOption("sweep.approach_ratio must lie in (0, 1)".into()));
            }
            out.extend((1..=self.approach_count).map(|j| t.0 - (t.0 - b) * r.powi(j as i32)));
        }
        Ok(out)
    }

    pub fn radii(&self) -> Vec<f64> {
        reals(&self.radii)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleSection {
    pub lambda: Real,
    pub mu: Vec<Real>,
    pub point: [Real; 2],
    #[serde(default = "zero")]
    pub alpha: Real,
    pub gamma: Option<Real>,
    /// defaults to `3 gamma`
    pub mass_radius: Option<Real>,
}

impl BubbleSection {
    pub fn mus(&self) -> Vec<f64> {
        reals(&self.mu)
    }

    pub fn point(&self) -> Point {
        [self.point[0].0, self.point[1].0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub k_max: u32,
    pub n_max: u32,
    pub m_max: u32,
    pub g_max: u32,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            k_max: 4,
            n_max: 2,
            m_max: 2,
            g_max: 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub torus: TorusSection,
    pub potential: Option<PotentialSection>,
    #[serde(default)]
    pub cones: ConesSection,
    pub topology: Option<TopologySection>,
    #[serde(default)]
    pub solver: SolverOptions,
    pub counts: Option<CountsSection>,
    pub solve: Option<SolveSection>,
    pub sweep: Option<SweepSection>,
    pub bubble: Option<BubbleSection>,
    pub verify: Option<VerifySection>,
}

/// 1-based line of byte offset `pos`.
fn line_at(source: &str, pos: usize) -> usize {
    source[..pos.min(source.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, or of the section header, or 0.
pub fn locate(source: &str, section: &str, key: &str) -> usize {
    let mut in_section = false;
    let mut header = 0;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            let name = t.trim_matches(|c| c == '[' || c == ']').trim();
            in_section = name == section;
            if in_section && header == 0 {
                header = i + 1;
            }
        } else if in_section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header
}

impl RunConfig {
    pub fn parse(source: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(source).map_err(|e| Error::Config {
            line: e.span().map(|s| line_at(source, s.start)).unwrap_or(0),
            message: e.message().trim().to_string(),
        })?;
        cfg.validate(source)?;
        Ok(cfg)
    }

    fn validate(&self, source: &str) -> Result<()> {
        let at = |section: &str, key: &str, e: Error| Error::Config {
            line: locate(source, section, key),
            message: format!("{section}.{key}: {e}"),
        };
        self.torus_value()
            .map_err(|e| at("torus", "l1", e))?;
        if let Some(p) = &self.potential {
            Formula::parse(&p.formula).map_err(|e| at("potential", "formula", e))?;
        }
        self.solver
            .validate()
            .map_err(|e| at("solver", "tolerance", e))?;
        if let Some(t) = &self.topology {
            crate::morse::SurfaceTopology::new(t.bouquets.clone(), t.points)
                .map_err(|e| at("topology", "bouquets", e))?;
        }
        if let Some(s) = &self.sweep {
            s.lambdas().map_err(|e| at("sweep", "steps", e))?;
        }
        Ok(())
    }

    pub fn torus_value(&self) -> Result<Torus> {
        Torus::new(self.torus.l1.0, self.torus.l2.0)
    }

    pub fn cone_points(&self) -> Vec<(Point, f64)> {
        self.cones
            .points
            .iter()
            .map(|p| ([p[0].0, p[1].0], p[2].0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_expressions_and_defaults() {
        let cfg = RunConfig::parse(
            "[potential]\nformula = \"cos(2*pi*x1)\"\n[solve]\nlambda = \"4*pi\"\n",
        )
        .unwrap();
        assert_eq!(cfg.torus.n1, 128);
        let s = cfg.solve.unwrap();
        assert!((s.lambda.0 - 4.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(s.initial, Initial::Zero {});
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("[torus]\nn1 = 64\nnn2 = 64\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
        let err = RunConfig::parse("[solver]\ntolerance = 1e-9\n\n[bogus]\nx = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn semantic_errors_point_at_the_field() {
        let err = RunConfig::parse("[potential]\nformula = \"cos(\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
        let err = RunConfig::parse("[torus]\nl1 = -1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn initial_guess_variants() {
        let cfg = RunConfig::parse(
            "[solve]\nlambda = 1\n[solve.initial]\nkind = \"bubble\"\npoint = [0, 0.5]\nmu = 20\nalpha = 0.5\n",
        )
        .unwrap();
        assert!(matches!(cfg.solve.unwrap().initial, Initial::Bubble { .. }));
        let err = RunConfig::parse("[solve]\nlambda = 1\n[solve.initial]\nkind = \"zero\"\nmu = 3\n");
        assert!(err.is_err());
    }

    #[test]
    fn sweep_lambdas() {
        let cfg = RunConfig::parse(
            "[sweep]\nfrom = 1\nto = 3\nsteps = 2\napproach_target = 4\napproach_count = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep.unwrap().lambdas().unwrap(), vec![1.0, 2.0, 3.0, 3.5, 3.75]);
    }
}
