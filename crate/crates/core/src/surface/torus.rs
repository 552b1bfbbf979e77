use crate::error::{Error, Result};

/// A point of the torus in periodic coordinates `(x1, x2)`.
pub type Point = [f64; 2];

/// Flat rectangular torus `[0, L1) x [0, L2)` with periodic identification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    l1: f64,
    l2: f64,
}

impl Torus {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(l1.is_finite() && l2.is_finite() && l1 > 0.0 && l2 > 0.0) {
            return Err(Error::InvalidTorus(l1, l2));
        }
        Ok(Self { l1, l2 })
    }

    pub fn unit() -> Self {
        Self { l1: 1.0, l2: 1.0 }
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn area(&self) -> f64 {
        self.l1 * self.l2
    }

    pub fn min_period(&self) -> f64 {
        self.l1.min(self.l2)
    }

    /// Reduce a point to the fundamental cell `[0, L1) x [0, L2)`.
    pub fn wrap(&self, p: Point) -> Point {
        [p[0].rem_euclid(self.l1), p[1].rem_euclid(self.l2)]
    }

    /// Minimal-image displacement `x - y`, each component in `[-L/2, L/2]`.
    pub fn displacement(&self, x: Point, y: Point) -> [f64; 2] {
        [
            minimal_image(x[0] - y[0], self.l1),
            minimal_image(x[1] - y[1], self.l2),
        ]
    }

    /// Periodic Euclidean distance: minimum over lattice translates.
    pub fn distance(&self, x: Point, y: Point) -> f64 {
        let [d1, d2] = self.displacement(x, y);
        d1.hypot(d2)
    }
}

fn minimal_image(d: f64, period: f64) -> f64 {
    let r = d - period * (d / period).round();
    // round() ties away from zero; keep the result in [-L/2, L/2]
    if r > 0.5 * period {
        r - period
    } else if r < -0.5 * period {
        r + period
    } else {
        r
    }
}
