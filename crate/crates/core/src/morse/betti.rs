use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Reduced Betti numbers over Z2, indexed by degree `q >= 0`.
///
/// Stored densely with trailing zeros trimmed, so equality is structural.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct BettiVector(Vec<u64>);

impl BettiVector {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// Single nonzero entry `value` in degree `q`.
    pub fn single(q: usize, value: u64) -> Self {
        let mut v = vec![0; q + 1];
        v[q] = value;
        Self::from_dense(v)
    }

    pub fn from_dense(mut v: Vec<u64>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Self(v)
    }

    pub fn from_pairs(pairs: &[(usize, u64)]) -> Self {
        let len = pairs.iter().map(|&(q, _)| q + 1).max().unwrap_or(0);
        let mut v = vec![0; len];
        for &(q, b) in pairs {
            v[q] += b;
        }
        Self::from_dense(v)
    }

    pub fn get(&self, q: usize) -> u64 {
        self.0.get(q).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// One past the highest nonzero degree.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Nonzero `(q, b_q)` pairs in increasing degree.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(q, &b)| (q, b))
    }

    pub fn total(&self) -> Result<u64> {
        self.0
            .iter()
            .try_fold(0u64, |acc, &b| acc.checked_add(b))
            .ok_or_else(|| overflow("Betti sum"))
    }

    /// Add `value` in degree `q`.
    pub fn add_at(&self, q: usize, value: u64) -> Result<Self> {
        self.wedge(&Self::single(q, value))
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (q, b)) in self.nonzero().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{q}: {b}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} exceeds 64-bit range"))
}

impl BettiVector {
    /// Wedge sum: degreewise addition.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let n = self.len().max(other.len());
        let v = (0..n)
            .map(|q| {
                self.get(q)
                    .checked_add(other.get(q))
                    .ok_or_else(|| overflow("wedge"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_dense(v))
    }

    /// Unreduced suspension: shift up one degree.
    pub fn suspension(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(0);
        v.extend_from_slice(&self.0);
        Self(v)
    }

    fn convolve(&self, other: &Self, shift: usize) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut v = vec![0u64; self.len() + other.len() + shift];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                let p = a.checked_mul(b).ok_or_else(|| overflow("tensor product"))?;
                let slot = &mut v[i + j + shift];
                *slot = slot.checked_add(p).ok_or_else(|| overflow("convolution"))?;
            }
        }
        Ok(Self::from_dense(v))
    }

    /// Join homology: `c_q = sum_{i+j=q-1} a_i b_j`. This is the operation the
    /// barycenter recursion uses for the `*` terms.
    pub fn smash_join(&self, other: &Self) -> Result<Self> {
        self.convolve(other, 1)
    }

    /// Smash product homology over a field: `c_q = sum_{i+j=q} a_i b_j`.
    pub fn smash(&self, other: &Self) -> Result<Self> {
        self.convolve(other, 0)
    }
}
