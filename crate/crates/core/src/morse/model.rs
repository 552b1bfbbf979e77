use super::{bar_betti_oracle, BettiVector, SurfaceTopology};
use crate::error::{Error, Result};

/// Formal homotopy expression whose reduced Z2 homology is computable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceModel {
    Point,
    Bouquet(u32),
    DisjointUnion(Vec<SpaceModel>),
    Bar(u32, Box<SpaceModel>),
    Wedge(Box<SpaceModel>, Box<SpaceModel>),
    Smash(Box<SpaceModel>, Box<SpaceModel>),
    Suspension(Box<SpaceModel>),
    Join(Box<SpaceModel>, Box<SpaceModel>),
}

impl SpaceModel {
    /// `Z_{N,M}`: the bouquets and points of a topology as a disjoint union.
    pub fn from_topology(topology: &SurfaceTopology) -> Self {
        let mut parts: Vec<_> = topology.bouquets().iter().map(|&g| Self::Bouquet(g)).collect();
        parts.extend((0..topology.m()).map(|_| Self::Point));
        Self::DisjointUnion(parts)
    }

    pub fn bar(k: u32, inner: SpaceModel) -> Self {
        Self::Bar(k, Box::new(inner))
    }

    pub fn wedge(a: SpaceModel, b: SpaceModel) -> Self {
        Self::Wedge(Box::new(a), Box::new(b))
    }

    pub fn smash(a: SpaceModel, b: SpaceModel) -> Self {
        Self::Smash(Box::new(a), Box::new(b))
    }

    pub fn suspension(a: SpaceModel) -> Self {
        Self::Suspension(Box::new(a))
    }

    pub fn join(a: SpaceModel, b: SpaceModel) -> Self {
        Self::Join(Box::new(a), Box::new(b))
    }

    /// Flatten into a topology if this is a disjoint union of atoms.
    fn as_topology(&self) -> Option<SurfaceTopology> {
        let atoms: Vec<&SpaceModel> = match self {
            Self::DisjointUnion(parts) => parts.iter().collect(),
            atom => vec![atom],
        };
        let mut bouquets = Vec::new();
        let mut points = 0;
        for a in atoms {
            match a {
                Self::Point => points += 1,
                Self::Bouquet(g) => bouquets.push(*g),
                Self::DisjointUnion(inner) => {
                    let t = Self::DisjointUnion(inner.clone()).as_topology()?;
                    bouquets.extend_from_slice(t.bouquets());
                    points += t.m() as u32;
                }
                _ => return None,
            }
        }
        SurfaceTopology::new(bouquets, points).ok()
    }

    /// Reduced Z2 Betti numbers.
    pub fn betti(&self) -> Result<BettiVector> {
        match self {
            Self::Point => Ok(BettiVector::zero()),
            Self::Bouquet(g) => {
                if *g == 0 {
                    return Err(Error::UnsupportedModel("bouquet of zero circles".into()));
                }
                Ok(BettiVector::single(1, *g as u64))
            }
            Self::DisjointUnion(parts) => {
                if parts.is_empty() {
                    return Err(Error::UnsupportedModel("empty disjoint union".into()));
                }
                let mut acc = BettiVector::zero();
                for p in parts {
                    acc = acc.wedge(&p.betti()?)?;
                }
                acc.add_at(0, parts.len() as u64 - 1)
            }
            Self::Bar(k, inner) => {
                if *k == 0 {
                    return Err(Error::UnsupportedModel("Bar_0".into()));
                }
                let topology = inner.as_topology().ok_or_else(|| {
                    Error::UnsupportedModel("Bar_k of a space that is not a union of points and bouquets".into())
                })?;
                bar_betti_oracle(&topology, *k)
            }
            Self::Wedge(a, b) => a.betti()?.wedge(&b.betti()?),
            Self::Smash(a, b) => a.betti()?.smash(&b.betti()?),
            Self::Suspension(a) => Ok(a.betti()?.suspension()),
            Self::Join(a, b) => a.betti()?.smash_join(&b.betti()?),
        }
    }
}
