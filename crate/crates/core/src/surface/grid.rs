use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::torus::{Point, Torus};
use crate::error::{Error, Result};

struct Plans {
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on a torus.
///
/// Node `(i, j)` sits at `(i L1/n1, j L2/n2)` and is stored at flat index
/// `i * n2 + j`. Fourier coefficients use the same layout, with mode index
/// `m` mapped to the signed frequency `m` for `m < n/2` and `m - n` otherwise
/// (the Nyquist index carries frequency `-n/2`).
#[derive(Clone)]
pub struct Grid {
    torus: Torus,
    n1: usize,
    n2: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("torus", &self.torus)
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.torus == other.torus && self.n1 == other.n1 && self.n2 == other.n2
    }
}

impl Grid {
    pub fn new(torus: Torus, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 || n1 % 2 != 0 || n2 % 2 != 0 {
            return Err(Error::InvalidGrid(n1, n2));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fwd1: planner.plan_fft_forward(n1),
            inv1: planner.plan_fft_inverse(n1),
            fwd2: planner.plan_fft_forward(n2),
            inv2: planner.plan_fft_inverse(n2),
        };
        Ok(Self {
            torus,
            n1,
            n2,
            plans: Arc::new(plans),
        })
    }

    pub fn square(torus: Torus, n: usize) -> Result<Self> {
        Self::new(torus, n, n)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h1(&self) -> f64 {
        self.torus.l1() / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        self.torus.l2() / self.n2 as f64
    }

    /// Quadrature weight `|Sigma| / (n1 n2)`, the same at every node.
    pub fn weight(&self) -> f64 {
        self.torus.area() / self.len() as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        [i as f64 * self.h1(), j as f64 * self.h2()]
    }

    pub fn node_at(&self, idx: usize) -> Point {
        self.node(idx / self.n2, idx % self.n2)
    }

    /// Index of the node nearest to `p`.
    pub fn nearest_node(&self, p: Point) -> usize {
        let p = self.torus.wrap(p);
        let i = (p[0] / self.h1()).round() as usize % self.n1;
        let j = (p[1] / self.h2()).round() as usize % self.n2;
        self.index(i, j)
    }

    /// Index of the neighbor shifted by `(di, dj)` with periodic wrap.
    pub fn shifted(&self, idx: usize, di: isize, dj: isize) -> usize {
        let i = (idx / self.n2) as isize;
        let j = (idx % self.n2) as isize;
        let i = (i + di).rem_euclid(self.n1 as isize) as usize;
        let j = (j + dj).rem_euclid(self.n2 as isize) as usize;
        self.index(i, j)
    }

    pub fn signed_mode(m: usize, n: usize) -> i64 {
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    /// Angular wavenumbers `(2 pi m1 / L1, 2 pi m2 / L2)` of coefficient `(a, b)`.
    pub fn wavenumber(&self, a: usize, b: usize) -> (f64, f64) {
        let m1 = Self::signed_mode(a, self.n1) as f64;
        let m2 = Self::signed_mode(b, self.n2) as f64;
        (
            2.0 * PI * m1 / self.torus.l1(),
            2.0 * PI * m2 / self.torus.l2(),
        )
    }

    pub fn wavenumber_sq(&self, a: usize, b: usize) -> f64 {
        let (k1, k2) = self.wavenumber(a, b);
        k1 * k1 + k2 * k2
    }

    /// Unnormalized forward DFT.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    /// Inverse DFT normalized by `1/(n1 n2)`, returning the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, false);
        let scale = 1.0 / self.len() as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let (p1, p2) = if forward {
            (&self.plans.fwd1, &self.plans.fwd2)
        } else {
            (&self.plans.inv1, &self.plans.inv2)
        };
        // rows (x2 direction) are contiguous
        p2.process(buf);
        let mut t = transpose(buf, self.n1, self.n2);
        p1.process(&mut t);
        let back = transpose(&t, self.n2, self.n1);
        buf.copy_from_slice(&back);
    }

    /// Multiply the spectrum of `values` by a real symbol of the wavenumber.
    pub fn apply_symbol<F>(&self, values: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut c = self.forward(values);
        self.scale_by_symbol(&mut c, symbol);
        self.inverse_real(c)
    }

    pub(crate) fn scale_by_symbol<F>(&self, coeffs: &mut [Complex64], symbol: F)
    where
        F: Fn(f64, f64) -> f64,
    {
        for a in 0..self.n1 {
            for b in 0..self.n2 {
                let (k1, k2) = self.wavenumber(a, b);
                coeffs[a * self.n2 + b] *= symbol(k1, k2);
            }
        }
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}
