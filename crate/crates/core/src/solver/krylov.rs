//! Krylov methods on zero-mean fields with the grid `L2` inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::surface::Field;

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Field,
    /// final relative residual of the preconditioned system
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Restarted GMRES for `A x = b`, right-preconditioned by `M`: solves
/// `A M y = b`, `x = M y`, so the monitored residual is the true one.
pub fn gmres<A, M>(
    apply: A,
    precondition: M,
    b: &Field,
    rtol: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<GmresOutcome>
where
    A: Fn(&Field) -> Result<Field>,
    M: Fn(&Field) -> Result<Field>,
{
    let b_norm = b.l2_norm();
    let mut x = Field::zeros(b.grid());
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            solution: x,
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    let mut total = 0;
    let mut r = b.clone();
    let mut rel = 1.0;
    while total < max_iterations {
        let beta = r.l2_norm();
        rel = beta / b_norm;
        if rel <= rtol {
            break;
        }
        let m = restart.min(max_iterations - total);
        let mut basis = vec![r.scale(1.0 / beta)];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = apply(&precondition(&basis[j])?)?;
            for (i, v) in basis.iter().enumerate() {
                let hij = w.inner(v)?;
                h[i][j] = hij;
                w = w.axpy(-hij, v)?;
            }
            let hn = w.l2_norm();
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            rel = g[j + 1].abs() / b_norm;
            if rel <= rtol || hn == 0.0 {
                break;
            }
            basis.push(w.scale(1.0 / hn));
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = Field::zeros(b.grid());
        for (yi, v) in y.iter().zip(&basis) {
            z = z.axpy(*yi, v)?;
        }
        x = x.add(&precondition(&z)?)?;
        r = b.sub(&apply(&x)?)?;
        if rel <= rtol {
            rel = r.l2_norm() / b_norm;
            if rel <= rtol {
                break;
            }
        }
    }
    Ok(GmresOutcome {
        solution: x,
        relative_residual: rel,
        iterations: total,
    })
}

/// Spectrum summary of a symmetric operator restricted to zero-mean fields.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSpectrum {
    /// converged eigenvalues below `-threshold * norm`, ascending
    pub negative: Vec<f64>,
    /// smallest converged `|eigenvalue|`
    pub smallest_magnitude: f64,
    /// largest Ritz value magnitude seen
    pub norm: f64,
}

/// Counts eigenvalues below `-threshold * norm` of a symmetric operator of the
/// form identity plus compact. Lanczos with full reorthogonalization; converged
/// negative pairs are locked and the iteration restarts orthogonally to them,
/// so repeated eigenvalues are all found.
pub fn negative_eigenvalues<A>(
    apply: A,
    template: &Field,
    threshold: f64,
    steps: usize,
    seed: u64,
) -> Result<NegativeSpectrum>
where
    A: Fn(&Field) -> Result<Field>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = template.grid();
    let mut locked: Vec<Field> = Vec::new();
    let mut negative = Vec::new();
    let mut norm = 0.0f64;
    let mut smallest = f64::INFINITY;
    let orthogonalize = |mut v: Field, against: &[Field]| -> Result<Field> {
        for _ in 0..2 {
            for q in against {
                let c = v.inner(q)?;
                v = v.axpy(-c, q)?;
            }
        }
        Ok(v)
    };
    loop {
        let noise = (0..grid.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let start = Field::from_values(grid, noise)?.project_zero_mean();
        let start = orthogonalize(start, &locked)?;
        let mut q = vec![start.scale(1.0 / start.l2_norm())];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut new_pairs: Vec<(f64, Field)> = Vec::new();
        let mut run_smallest = f64::INFINITY;
        for j in 0..steps {
            let w = apply(&q[j])?;
            let a = w.inner(&q[j])?;
            alpha.push(a);
            let w = orthogonalize(w, &q)?;
            let w = orthogonalize(w, &locked)?.project_zero_mean();
            let b = w.l2_norm();
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
            norm = norm.max(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let converged = |i: usize| (b * vecs[(j, i)]).abs() <= 1e-10 * norm.max(1.0);
            let done = b <= 1e-12 * norm.max(1.0) || j + 1 == steps;
            let all_negative_converged = (0..vals.len())
                .filter(|&i| vals[i] < 0.5 * (vals[vals.len() - 1].min(1.0)))
                .all(converged);
            if done || (j >= 8 && all_negative_converged) {
                run_smallest = (0..vals.len())
                    .filter(|&i| converged(i))
                    .map(|i| vals[i].abs())
                    .fold(f64::INFINITY, f64::min);
                for i in 0..vals.len() {
                    if vals[i] < -threshold * norm && converged(i) {
                        let mut v = Field::zeros(grid);
                        for (k, qk) in q.iter().enumerate() {
                            v = v.axpy(vecs[(k, i)], qk)?;
                        }
                        new_pairs.push((vals[i], v));
                    }
                }
                break;
            }
            beta.push(b);
            q.push(w.scale(1.0 / b));
        }
        smallest = smallest.min(run_smallest);
        if new_pairs.is_empty() {
            break;
        }
        for (val, v) in new_pairs {
            let v = orthogonalize(v, &locked)?;
            let n = v.l2_norm();
            if n > 1e-6 {
                negative.push(val);
                locked.push(v.scale(1.0 / n));
            }
        }
    }
    negative.sort_by(|a, b| a.total_cmp(b));
    Ok(NegativeSpectrum {
        negative,
        smallest_magnitude: smallest,
        norm,
    })
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`; eigenvalues ascending, eigenvectors as
/// columns in the same order.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = alpha.len();
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}
