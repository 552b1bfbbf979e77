//! Exact Z2 Betti numbers of formal barycenter spaces over a disjoint union
//! of bouquets and points, the closed multiplicity formulas, and the
//! independent splitting recursion used to check them.
//!
//! The positive region of the potential retracts onto `N` bouquets
//! `B^{g_1} .. B^{g_N}` and `M` points. `d_q(k)` is the rank of
//! `H~_q(Bar_k(Z); Z2)`, and the number of solutions in the range
//! `lambda in (8k pi, 8(k+1) pi)` is bounded below by `sum_q d_q(k)`.

mod betti;
mod model;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

pub use betti::BettiVector;
pub use model::SpaceModel;

use crate::error::{Error, Result};
use betti::overflow;

/// Homotopy model of the positive region: bouquet sizes `g_i >= 1` for the
/// non-contractible components and a count of contractible ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SurfaceTopology {
    bouquets: Vec<u32>,
    points: u32,
}

impl SurfaceTopology {
    pub fn new(mut bouquets: Vec<u32>, points: u32) -> Result<Self> {
        if bouquets.iter().any(|&g| g == 0) {
            return Err(Error::InvalidOption("bouquet sizes must be >= 1".into()));
        }
        if bouquets.is_empty() && points == 0 {
            return Err(Error::InvalidOption(
                "topology needs at least one component (N + M >= 1)".into(),
            ));
        }
        bouquets.sort_unstable();
        Ok(Self { bouquets, points })
    }

    /// `N`: number of non-contractible components.
    pub fn n(&self) -> usize {
        self.bouquets.len()
    }

    /// `M`: number of contractible components.
    pub fn m(&self) -> usize {
        self.points as usize
    }

    pub fn components(&self) -> usize {
        self.n() + self.m()
    }

    pub fn bouquets(&self) -> &[u32] {
        &self.bouquets
    }

    pub fn genus_sum(&self) -> u64 {
        self.bouquets.iter().map(|&g| g as u64).sum()
    }
}

/// Exact binomial coefficient with `binom(a, b) = 0` for `b > a` or `b < 0`.
pub fn binomial(a: i64, b: i64) -> Result<u64> {
    if b < 0 || a < 0 || b > a {
        return Ok(0);
    }
    let b = b.min(a - b) as u64;
    let a = a as u64;
    let mut r: u128 = 1;
    for i in 0..b {
        r = r * (a - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return Err(overflow("binomial coefficient"));
        }
    }
    Ok(r as u64)
}

/// `s_{a,g} = binom(a + g - 1, g - 1)`: the rank of the top homology of
/// `Bar_a` of a bouquet of `g` circles.
pub fn s(a: u64, g: u64) -> Result<u64> {
    assert!(g >= 1, "bouquet size must be positive");
    binomial((a + g - 1) as i64, (g - 1) as i64)
}

/// `sum over a_1 + .. + a_N = h, a_i >= 0` of `s_{a_1,g_1} .. s_{a_N,g_N}`,
/// by truncated series multiplication. Equals `[h == 0]` when `N = 0`.
pub fn composition_sum(bouquets: &[u32], h: i64) -> Result<u64> {
    if h < 0 {
        return Ok(0);
    }
    let h = h as usize;
    let mut series = vec![0u64; h + 1];
    series[0] = 1;
    for &g in bouquets {
        let factor = (0..=h)
            .map(|a| s(a as u64, g as u64))
            .collect::<Result<Vec<_>>>()?;
        let mut next = vec![0u64; h + 1];
        for (i, &x) in series.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in factor.iter().enumerate().take(h + 1 - i) {
                let p = x.checked_mul(y).ok_or_else(|| overflow("composition sum"))?;
                next[i + j] = next[i + j]
                    .checked_add(p)
                    .ok_or_else(|| overflow("composition sum"))?;
            }
        }
        series = next;
    }
    Ok(series[h])
}

fn checked_product(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or_else(|| overflow("d_q"))
}

/// Closed formula, low branch (valid when `k + 1 - M <= N`):
/// `d_q = binom(N+M-1, N+M-p) * S(k-p+1)` for `q = 2k - p`, `1 <= p <= k+1`.
pub fn d_q_low_branch(k: u32, topology: &SurfaceTopology, q: usize) -> Result<u64> {
    let (k, nm) = (k as i64, topology.components() as i64);
    let p = 2 * k - q as i64;
    if !(1..=k + 1).contains(&p) {
        return Ok(0);
    }
    let c = binomial(nm - 1, nm - p)?;
    if c == 0 {
        return Ok(0);
    }
    checked_product(c, composition_sum(topology.bouquets(), k - p + 1)?)
}

/// Closed formula, high branch (valid when `k + 1 - M >= N`): the low
/// branch restricted to `p <= N`, plus the band `q = 2k - N - s`,
/// `1 <= s <= M`, with coefficient `binom(N+M-1, M-s) * S(k-N-s+1)`.
pub fn d_q_high_branch(k: u32, topology: &SurfaceTopology, q: usize) -> Result<u64> {
    let (k, n, m) = (k as i64, topology.n() as i64, topology.m() as i64);
    let q = q as i64;
    let p = 2 * k - q;
    if (1..=n).contains(&p) {
        let c = binomial(n + m - 1, n + m - p)?;
        return checked_product(c, composition_sum(topology.bouquets(), k - p + 1)?);
    }
    let sv = 2 * k - n - q;
    if (1..=m).contains(&sv) {
        let c = binomial(n + m - 1, m - sv)?;
        if c == 0 {
            return Ok(0);
        }
        return checked_product(c, composition_sum(topology.bouquets(), k - n - sv + 1)?);
    }
    Ok(0)
}

/// `d_q(k, N, M)` from the closed formula, choosing the branch by `k+1-M`
/// versus `N`.
pub fn d_q_closed(k: u32, topology: &SurfaceTopology, q: usize) -> Result<u64> {
    assert!(k >= 1, "barycenter order must be >= 1");
    if k as i64 + 1 - topology.m() as i64 <= topology.n() as i64 {
        d_q_low_branch(k, topology, q)
    } else {
        d_q_high_branch(k, topology, q)
    }
}

/// All nonzero `d_q` as a Betti vector. `d_q` vanishes for `q > 2k - 1`.
pub fn closed_betti(k: u32, topology: &SurfaceTopology) -> Result<BettiVector> {
    let v = (0..2 * k as usize)
        .map(|q| d_q_closed(k, topology, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(BettiVector::from_dense(v))
}

/// Atoms of the homotopy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Point,
    Bouquet(u32),
    /// `M` disjoint points
    Points(u32),
}

/// Reduced Betti numbers of `Bar_k(atom)`.
pub fn bar_betti_base(atom: Atom, k: u32) -> Result<BettiVector> {
    assert!(k >= 1, "barycenter order must be >= 1");
    match atom {
        Atom::Point => Ok(BettiVector::zero()),
        Atom::Bouquet(g) => {
            assert!(g >= 1, "bouquet size must be positive");
            Ok(BettiVector::single(2 * k as usize - 1, s(k as u64, g as u64)?))
        }
        // (k-1)-skeleton of the (M-1)-simplex
        Atom::Points(m) => Ok(BettiVector::single(
            k as usize - 1,
            binomial(m as i64 - 1, k as i64)?,
        )),
    }
}

type OracleKey = (Vec<u32>, u32, u32);

fn oracle_cache() -> &'static Mutex<HashMap<OracleKey, BettiVector>> {
    static CACHE: OnceLock<Mutex<HashMap<OracleKey, BettiVector>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Reduced Betti numbers of `Bar_k(Z)` by splitting off one component at a
/// time with the disjoint-union decomposition
///
/// `Bar_k(C u D) ~ Bar_k C v S Bar_{k-1} C v Bar_k D v S Bar_{k-1} D
///   v V_{l=1}^{k-1} Bar_{k-l} C * Bar_l D v V_{l=2}^{k-1} (S Bar_{k-l} C) * Bar_{l-1} D`
///
/// (homology level). Points are split first, then bouquets; single
/// components use [`bar_betti_base`]. Memoized on the sorted topology.
pub fn bar_betti_oracle(topology: &SurfaceTopology, k: u32) -> Result<BettiVector> {
    assert!(k >= 1, "barycenter order must be >= 1");
    oracle(topology.bouquets(), topology.points, k)
}

fn oracle(bouquets: &[u32], points: u32, k: u32) -> Result<BettiVector> {
    let key = (bouquets.to_vec(), points, k);
    if let Some(v) = oracle_cache().lock().expect("oracle cache poisoned").get(&key) {
        return Ok(v.clone());
    }
    let value = oracle_uncached(bouquets, points, k)?;
    oracle_cache()
        .lock()
        .expect("oracle cache poisoned")
        .insert(key, value.clone());
    Ok(value)
}

fn oracle_uncached(bouquets: &[u32], points: u32, k: u32) -> Result<BettiVector> {
    let n = bouquets.len();
    match (n, points) {
        (0, 0) => unreachable!("empty space"),
        (0, 1) => return bar_betti_base(Atom::Point, k),
        (1, 0) => return bar_betti_base(Atom::Bouquet(bouquets[0]), k),
        _ => {}
    }
    // C = rest, D = the split-off component
    let (rest_b, rest_p, d_atom) = if points > 0 {
        (bouquets, points - 1, Atom::Point)
    } else {
        (&bouquets[..n - 1], 0, Atom::Bouquet(bouquets[n - 1]))
    };
    let bar_c = |j: u32| oracle(rest_b, rest_p, j);
    let bar_d = |j: u32| bar_betti_base(d_atom, j);

    if k == 1 {
        // Bar_1(C u D) = C u D: one extra reduced class in degree 0
        return bar_c(1)?.wedge(&bar_d(1)?)?.add_at(0, 1);
    }
    let mut acc = bar_c(k)?
        .wedge(&bar_c(k - 1)?.suspension())?
        .wedge(&bar_d(k)?)?
        .wedge(&bar_d(k - 1)?.suspension())?;
    for l in 1..k {
        acc = acc.wedge(&bar_c(k - l)?.smash_join(&bar_d(l)?)?)?;
    }
    for l in 2..k {
        acc = acc.wedge(&bar_c(k - l)?.suspension().smash_join(&bar_d(l - 1)?)?)?;
    }
    Ok(acc)
}

/// Lower bound `sum_q d_q(k)` on the number of solutions for
/// `lambda in (8k pi, 8(k+1) pi)`.
pub fn multiplicity_general(k: u32, topology: &SurfaceTopology) -> Result<u64> {
    closed_betti(k, topology)?.total()
}

/// Lower bound `(N + M - 1) + sum g_i + |J_lambda|` for `lambda in (8 pi, 16 pi)`.
pub fn multiplicity_8pi16pi(topology: &SurfaceTopology, j_count: usize) -> Result<u64> {
    (topology.components() as u64 - 1)
        .checked_add(topology.genus_sum())
        .and_then(|v| v.checked_add(j_count as u64))
        .ok_or_else(|| overflow("multiplicity"))
}

/// Reduced Betti numbers of `Bar_1(W)` where the `J_lambda` cone points add
/// circles to the bouquets.
pub fn betti_8pi16pi(topology: &SurfaceTopology, j_count: usize) -> Result<BettiVector> {
    Ok(BettiVector::from_pairs(&[
        (0, topology.components() as u64 - 1),
        (1, topology.genus_sum() + j_count as u64),
    ]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateVerdict {
    /// hypotheses of the general existence theorem hold
    pub general: bool,
    /// hypotheses of the `(8 pi, 16 pi)` existence theorem hold
    pub eight_sixteen: bool,
}

/// Absolute tolerance for membership of `lambda` in the critical set.
pub const LAMBDA_TOLERANCE: f64 = 1e-9;

/// Check the existence hypotheses for `lambda > 8 pi`.
///
/// `positive_orders` are the orders of the cone points inside the positive
/// region; `critical` is the critical set (at least up to `lambda`).
pub fn existence_gate(
    lambda: f64,
    k: u32,
    topology: &SurfaceTopology,
    positive_orders: &[f64],
    j_count: usize,
    critical: &[f64],
) -> Result<GateVerdict> {
    if lambda <= 8.0 * PI {
        return Err(Error::InvalidOption(format!(
            "existence gate needs lambda > 8 pi, got {lambda}"
        )));
    }
    if let Some(&c) = critical.iter().find(|&&c| (c - lambda).abs() < LAMBDA_TOLERANCE) {
        return Err(Error::LambdaCritical {
            lambda,
            critical: c,
        });
    }
    let kf = k as f64;
    let in_band = lambda > 8.0 * kf * PI && lambda < 8.0 * (kf + 1.0) * PI;
    let general =
        in_band && (topology.components() > k as usize || topology.n() >= 1);
    let eight_sixteen = lambda > 8.0 * PI
        && lambda < 16.0 * PI
        && positive_orders.iter().all(|&a| a > 0.0 && a <= 1.0)
        && j_count >= 1;
    Ok(GateVerdict {
        general,
        eight_sixteen,
    })
}

/// The `k` with `lambda in (8k pi, 8(k+1) pi)`.
pub fn band_index(lambda: f64) -> u32 {
    (lambda / (8.0 * PI)).floor() as u32
}
