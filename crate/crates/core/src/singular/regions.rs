//! Topology of the sign regions of a sampled potential.
//!
//! A region is the 4-connected set of nodes of one sign. Its homotopy type is
//! that of the complex with the nodes as vertices, 4-adjacent pairs as edges
//! and full 2x2 blocks as faces. Boundary loops are traced along the pixel
//! boundary with the positive side on the left; at a corner where two
//! positive cells touch diagonally the trace turns left, which keeps the
//! cells apart as 4-connectivity requires.

use serde::Serialize;

use super::{Potential, SurfaceTopology};
use crate::error::{Error, Result};
use crate::surface::Grid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentInfo {
    /// +1 for a component of `{K > 0}`, -1 for `{K <= 0}`
    pub sign: i8,
    pub cells: usize,
    pub euler: i64,
    pub boundaries: usize,
    pub genus: i64,
    /// bouquet size `2 genus + b - 1`
    pub g: i64,
}

impl ComponentInfo {
    pub fn contractible(&self) -> bool {
        self.genus == 0 && self.boundaries == 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignRegions {
    pub topology: SurfaceTopology,
    /// per node: `c + 1` for positive component `c`, `-(c + 1)` for negative
    /// component `c`
    pub labels: Vec<i32>,
    pub positive: Vec<ComponentInfo>,
    pub negative_count: usize,
}

impl SignRegions {
    /// Node mask of positive component `c`.
    pub fn positive_mask(&self, c: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == c as i32 + 1).collect()
    }

    /// Node mask of negative component `c`.
    pub fn negative_mask(&self, c: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == -(c as i32 + 1)).collect()
    }
}

const NEIGHBOURS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Label 4-connected components of equal sign: `+c` / `-c`, `c >= 1`.
fn label_components(grid: &Grid, positive: &[bool]) -> (Vec<i32>, usize, usize) {
    let mut labels = vec![0i32; grid.len()];
    let (mut np, mut nn) = (0i32, 0i32);
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        if labels[start] != 0 {
            continue;
        }
        let sign = positive[start];
        let label = if sign {
            np += 1;
            np
        } else {
            nn += 1;
            -nn
        };
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for &(a, b) in &NEIGHBOURS {
                let j = grid.shifted(i, a, b);
                if labels[j] == 0 && positive[j] == sign {
                    labels[j] = label;
                    stack.push(j);
                }
            }
        }
    }
    (labels, np as usize, nn as usize)
}

fn check_thickness(grid: &Grid, labels: &[i32], np: usize, nn: usize) -> Result<()> {
    let mut thick_pos = vec![false; np];
    let mut thick_neg = vec![false; nn];
    for i in 0..grid.len() {
        let l = labels[i];
        let full = (0..4).all(|a| (0..4).all(|b| labels[grid.shifted(i, a, b)] == l));
        if full {
            if l > 0 {
                thick_pos[l as usize - 1] = true;
            } else {
                thick_neg[(-l) as usize - 1] = true;
            }
        }
    }
    if let Some(c) = thick_pos.iter().position(|&t| !t) {
        return Err(Error::ResolutionTooCoarse(format!(
            "positive component {c} is thinner than 4 cells"
        )));
    }
    if let Some(c) = thick_neg.iter().position(|&t| !t) {
        return Err(Error::ResolutionTooCoarse(format!(
            "negative component {c} is thinner than 4 cells"
        )));
    }
    Ok(())
}

/// Euler characteristic `V - E + F` of each positive component's complex.
fn euler_characteristics(grid: &Grid, labels: &[i32], np: usize) -> Vec<i64> {
    let mut chi = vec![0i64; np];
    for i in 0..grid.len() {
        let l = labels[i];
        if l <= 0 {
            continue;
        }
        let c = l as usize - 1;
        chi[c] += 1;
        let east = labels[grid.shifted(i, 1, 0)] == l;
        let north = labels[grid.shifted(i, 0, 1)] == l;
        chi[c] -= east as i64 + north as i64;
        if east && north && labels[grid.shifted(i, 1, 1)] == l {
            chi[c] += 1;
        }
    }
    chi
}

/// Boundary loop count of each positive component.
fn boundary_loops(grid: &Grid, labels: &[i32], np: usize) -> Vec<usize> {
    // corner (i, j) is the upper-right corner of cell (i, j); directions
    // E, N, W, S are 0..4 counterclockwise
    let step = |corner: usize, dir: usize| -> usize {
        let (a, b) = NEIGHBOURS[dir];
        grid.shifted(corner, a, b)
    };
    let mut edges = vec![0i32; 4 * grid.len()];
    for i in 0..grid.len() {
        let l = labels[i];
        if l <= 0 {
            continue;
        }
        for (dir, &(a, b)) in NEIGHBOURS.iter().enumerate() {
            if labels[grid.shifted(i, a, b)] > 0 {
                continue;
            }
            // side of cell i facing `dir`, traversed with the cell on the left
            let (start, travel) = match dir {
                0 => (grid.shifted(i, 0, -1), 1),
                1 => (i, 2),
                2 => (grid.shifted(i, -1, 0), 3),
                _ => (grid.shifted(i, -1, -1), 0),
            };
            edges[4 * start + travel] = l;
        }
    }
    let mut loops = vec![0usize; np];
    let mut visited = vec![false; edges.len()];
    for e0 in 0..edges.len() {
        if edges[e0] == 0 || visited[e0] {
            continue;
        }
        loops[edges[e0] as usize - 1] += 1;
        let mut e = e0;
        while !visited[e] {
            visited[e] = true;
            let (corner, dir) = (e / 4, e % 4);
            let next_corner = step(corner, dir);
            e = [(dir + 1) % 4, dir, (dir + 3) % 4]
                .iter()
                .map(|&d| 4 * next_corner + d)
                .find(|&c| edges[c] != 0)
                .expect("pixel boundary is a union of closed loops");
        }
    }
    loops
}

/// Components of `{K > 0}` with their topology, and the homotopy model
/// `(N, M, g_i)`.
pub fn classify_sign_regions(potential: &Potential) -> Result<SignRegions> {
    let grid = potential.grid();
    if grid.n1() < 8 || grid.n2() < 8 {
        return Err(Error::ResolutionTooCoarse("grid needs at least 8 nodes per axis".into()));
    }
    let positive: Vec<bool> = potential.field().values().iter().map(|&k| k > 0.0).collect();
    let (labels, np, nn) = label_components(grid, &positive);
    check_thickness(grid, &labels, np, nn)?;
    let chi = euler_characteristics(grid, &labels, np);
    let b = boundary_loops(grid, &labels, np);

    let mut comps = Vec::with_capacity(np);
    let mut cells = vec![0usize; np];
    for &l in &labels {
        if l > 0 {
            cells[l as usize - 1] += 1;
        }
    }
    for c in 0..np {
        let twice_genus = 2 - b[c] as i64 - chi[c];
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return Err(Error::ResolutionTooCoarse(format!(
                "inconsistent pixel topology for component {c} (chi {}, b {})",
                chi[c], b[c]
            )));
        }
        let genus = twice_genus / 2;
        comps.push(ComponentInfo {
            sign: 1,
            cells: cells[c],
            euler: chi[c],
            boundaries: b[c],
            genus,
            g: 2 * genus + b[c] as i64 - 1,
        });
    }
    let bouquets = comps
        .iter()
        .filter(|c| !c.contractible())
        .map(|c| c.g as u32)
        .collect();
    let points = comps.iter().filter(|c| c.contractible()).count() as u32;
    Ok(SignRegions {
        topology: SurfaceTopology::new(bouquets, points)?,
        labels,
        positive: comps,
        negative_count: nn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singular::Formula;
    use crate::surface::Torus;

    fn classify(src: &str, n: usize) -> Result<SignRegions> {
        let grid = Grid::square(Torus::unit(), n).unwrap();
        let p = Potential::from_formula(Formula::parse(src).unwrap(), &grid)?;
        classify_sign_regions(&p)
    }

    #[test]
    fn band() {
        let r = classify("cos(2*pi*x1)", 64).unwrap();
        assert_eq!(r.topology, SurfaceTopology::new(vec![1], 0).unwrap());
        assert_eq!((r.positive[0].euler, r.positive[0].boundaries), (0, 2));
        assert_eq!(r.negative_count, 1);
    }

    #[test]
    fn disk() {
        let r = classify("exp(-50*d(x, 0.5, 0.5)^2) - 0.5", 64).unwrap();
        assert_eq!(r.topology, SurfaceTopology::new(vec![], 1).unwrap());
        assert!(r.positive[0].contractible());
    }

    #[test]
    fn torus_minus_two_disks() {
        let r = classify("cos(2*pi*x1)*cos(2*pi*x2) + 0.1", 64).unwrap();
        assert_eq!(r.topology, SurfaceTopology::new(vec![3], 0).unwrap());
        assert_eq!(r.positive[0].genus, 1);
        assert_eq!(r.negative_count, 2);
    }

    #[test]
    fn complement_of_disk_has_genus_one() {
        let r = classify("0.5 - exp(-50*d(x, 0.5, 0.5)^2)", 64).unwrap();
        assert_eq!(r.topology, SurfaceTopology::new(vec![2], 0).unwrap());
    }

    #[test]
    fn diagonal_checkerboard_cells_stay_apart() {
        // two positive disks and two negative disks on a checkerboard
        let r = classify("cos(2*pi*x1)*cos(2*pi*x2) - 0.1", 64).unwrap();
        assert_eq!(r.topology, SurfaceTopology::new(vec![], 2).unwrap());
    }

    #[test]
    fn thin_component_rejected() {
        let res = classify("exp(-200*d(x, 0.51, 0.5)^2) - 0.5", 32);
        assert!(matches!(res, Err(Error::ResolutionTooCoarse(_))), "{res:?}");
    }

    #[test]
    fn stable_under_refinement() {
        for src in [
            "cos(2*pi*x1)",
            "cos(2*pi*x1)*cos(2*pi*x2) + 0.1",
            "exp(-50*d(x, 0.5, 0.5)^2) - 0.5",
            "sin(2*pi*x1) + 0.5*cos(4*pi*x2)",
        ] {
            let a = classify(src, 64).unwrap().topology;
            let b = classify(src, 128).unwrap().topology;
            assert_eq!(a, b, "{src}");
        }
    }
}
