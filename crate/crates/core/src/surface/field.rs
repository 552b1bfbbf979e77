use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::grid::Grid;
use super::torus::{Point, Torus};
use crate::error::{Error, Result};

/// Scalar function sampled on the nodes of a periodic grid.
///
/// Fields are immutable; the Fourier coefficients are computed lazily on
/// first use and always equal the DFT of the stored values.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs: OnceLock::new(),
        })
    }

    pub fn from_fn<F: Fn(Point) -> f64>(grid: &Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        Self {
            grid: grid.clone(),
            values,
            coeffs: OnceLock::new(),
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn torus(&self) -> &Torus {
        self.grid.torus()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Unnormalized DFT of the values (cached).
    pub fn coefficients(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| self.grid.forward(&self.values))
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFiniteValue(k)),
            None => Ok(()),
        }
    }

    fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            coeffs: OnceLock::new(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self + t * other`
    pub fn axpy(&self, t: f64, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + t * b)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    pub fn shift(&self, c: f64) -> Field {
        self.map(|v| v + c)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        best
    }

    /// Trapezoidal quadrature `w * sum(values)`; exact for resolved
    /// trigonometric polynomials.
    pub fn integrate(&self) -> Result<f64> {
        self.check_finite()?;
        Ok(self.integrate_unchecked())
    }

    pub(crate) fn integrate_unchecked(&self) -> f64 {
        self.grid.weight() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.integrate_unchecked() / self.torus().area()
    }

    /// L2 inner product by quadrature.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.grid.weight()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.weight() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn project_zero_mean(&self) -> Field {
        let m = self.mean();
        self.shift(-m)
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean().abs() <= 1e-13 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Spectral Laplacian: coefficient `(m1, m2)` times `-|k|^2`.
    pub fn laplacian(&self) -> Result<Field> {
        self.check_finite()?;
        Ok(self.spectral_map(|k1, k2| -(k1 * k1 + k2 * k2)))
    }

    pub(crate) fn spectral_map<F: Fn(f64, f64) -> f64>(&self, symbol: F) -> Field {
        let mut c = self.coefficients().to_vec();
        self.grid.scale_by_symbol(&mut c, symbol);
        Field {
            grid: self.grid.clone(),
            values: self.grid.inverse_real(c),
            coeffs: OnceLock::new(),
        }
    }

    /// Unique zero-mean `u` with `-Laplacian u = self`.
    pub fn solve_poisson(&self) -> Result<Field> {
        self.check_finite()?;
        let scale = self.max_abs();
        let mean = self.mean();
        if mean.abs() > 1e-10 * scale {
            return Err(Error::NonZeroMean { mean });
        }
        Ok(self.inverse_laplacian_unchecked())
    }

    /// `(-Laplacian)^{-1}` on the zero-mean part, ignoring the mean.
    pub(crate) fn inverse_laplacian_unchecked(&self) -> Field {
        self.spectral_map(|k1, k2| {
            let k2s = k1 * k1 + k2 * k2;
            if k2s == 0.0 {
                0.0
            } else {
                1.0 / k2s
            }
        })
    }

    /// `(-Laplacian)^{-1/2}` on the zero-mean part.
    pub(crate) fn inverse_sqrt_laplacian(&self) -> Field {
        self.spectral_map(|k1, k2| {
            let k2s = k1 * k1 + k2 * k2;
            if k2s == 0.0 {
                0.0
            } else {
                1.0 / k2s.sqrt()
            }
        })
    }

    /// Dirichlet energy `(1/2) int |grad u|^2`, evaluated in coefficient space.
    pub fn dirichlet_energy(&self) -> f64 {
        let c = self.coefficients();
        let g = &self.grid;
        let mut s = 0.0;
        for a in 0..g.n1() {
            for b in 0..g.n2() {
                s += g.wavenumber_sq(a, b) * c[g.index(a, b)].norm_sqr();
            }
        }
        let n = g.len() as f64;
        0.5 * g.torus().area() * s / (n * n)
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn evaluate_at(&self, p: Point) -> f64 {
        let g = &self.grid;
        let c = self.coefficients();
        let e1 = axis_phases(g.n1(), g.torus().l1(), p[0]);
        let e2 = axis_phases(g.n2(), g.torus().l2(), p[1]);
        let mut s = Complex64::new(0.0, 0.0);
        for a in 0..g.n1() {
            let mut row = Complex64::new(0.0, 0.0);
            for b in 0..g.n2() {
                row += c[g.index(a, b)] * e2[b];
            }
            s += row * e1[a];
        }
        s.re / g.len() as f64
    }

    /// Spectral resampling onto another grid over the same torus.
    pub fn resample(&self, target: &Grid) -> Result<Field> {
        if target.torus() != self.torus() {
            return Err(Error::GridMismatch);
        }
        if target == &self.grid {
            return Ok(self.clone());
        }
        let src = &self.grid;
        let c = self.coefficients();
        let map1 = axis_map(src.n1(), target.n1());
        let map2 = axis_map(src.n2(), target.n2());
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        for &(sa, ta, fa) in &map1 {
            for &(sb, tb, fb) in &map2 {
                out[target.index(ta, tb)] += c[src.index(sa, sb)] * (fa * fb);
            }
        }
        let ratio = target.len() as f64 / src.len() as f64;
        for v in &mut out {
            *v *= ratio;
        }
        Field::from_values(target, target.inverse_real(out))
    }

    /// Random real trigonometric polynomial with modes `|m_i| <= band`,
    /// amplitudes uniform in `[-1, 1] / (1 + band)`.
    pub fn random_band_limited<R: Rng>(grid: &Grid, band: i32, rng: &mut R) -> Field {
        let mut terms = Vec::new();
        for m1 in -band..=band {
            for m2 in -band..=band {
                terms.push((m1, m2, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)));
            }
        }
        let (l1, l2) = (grid.torus().l1(), grid.torus().l2());
        Field::from_fn(grid, |p| {
            terms
                .iter()
                .map(|&(m1, m2, a, ph)| {
                    a * (2.0 * PI * (m1 as f64 * p[0] / l1 + m2 as f64 * p[1] / l2) + ph).cos()
                })
                .sum::<f64>()
                / (1.0 + band as f64)
        })
    }

    /// Write the text dump: `TORUS L1 L2 n1 n2` then one value per line.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let t = self.torus();
        writeln!(
            w,
            "TORUS {} {} {} {}",
            t.l1(),
            t.l2(),
            self.grid.n1(),
            self.grid.n2()
        )?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Field> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field dump".into()))??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "TORUS" {
            return Err(Error::Parse(format!("bad dump header: {header:?}")));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?} in dump header")))
        };
        let size = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad resolution {s:?} in dump header")))
        };
        let torus = Torus::new(num(parts[1])?, num(parts[2])?)?;
        let grid = Grid::new(torus, size(parts[3])?, size(parts[4])?)?;
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            values.push(
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {s:?} in dump")))?,
            );
        }
        if values.len() != grid.len() {
            return Err(Error::Parse(format!(
                "dump has {} values, expected {}",
                values.len(),
                grid.len()
            )));
        }
        Field::from_values(&grid, values)
    }
}

/// Per-axis factors `exp(i k x)`; the Nyquist mode uses `cos(k x)` so the
/// interpolant stays real.
fn axis_phases(n: usize, l: f64, x: f64) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let sm = Grid::signed_mode(m, n);
            let theta = 2.0 * std::f64::consts::PI * sm as f64 * x / l;
            if m == n / 2 {
                Complex64::new(theta.cos(), 0.0)
            } else {
                Complex64::new(theta.cos(), theta.sin())
            }
        })
        .collect()
}

/// Coefficient transfer `(source index, target index, factor)` along one axis.
fn axis_map(ns: usize, nt: usize) -> Vec<(usize, usize, f64)> {
    let mut map = Vec::new();
    let half = ns.min(nt) / 2;
    for m in 0..half {
        map.push((m, m, 1.0));
        if m > 0 {
            map.push((ns - m, nt - m, 1.0));
        }
    }
    if ns < nt {
        // split the source Nyquist mode symmetrically
        map.push((ns / 2, ns / 2, 0.5));
        map.push((ns / 2, nt - ns / 2, 0.5));
    } else if ns > nt {
        // fold both source modes onto the target Nyquist slot
        map.push((nt / 2, nt / 2, 1.0));
        map.push((ns - nt / 2, nt / 2, 1.0));
    } else {
        map.push((ns / 2, nt / 2, 1.0));
    }
    map
}
