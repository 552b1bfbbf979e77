use serde::Serialize;

use super::{BranchRecord, Termination};
use crate::error::{Error, Result};
use crate::functional::{ball_integral, EnergyContext};
use crate::singular::{nearest_critical, Potential};
use crate::surface::{Field, Point};

/// Statistics of `v = u^- - mean(u^-)`, `u^- = min(u, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoStats {
    pub min_v: f64,
    pub l1: f64,
    pub l3: f64,
}

pub fn kato_diagnostics(u: &Field) -> KatoStats {
    let neg = u.map(|x| x.min(0.0));
    let v = neg.shift(-neg.mean());
    let w = u.grid().weight();
    let (l1, l3) = v
        .values()
        .iter()
        .fold((0.0, 0.0), |(a, b), x| (a + x.abs(), b + x.abs().powi(3)));
    KatoStats {
        min_v: v.min(),
        l1: l1 * w,
        l3: (l3 * w).cbrt(),
    }
}

/// `int_mask K~ e^u`; the mask must keep two cells away from the nodal band.
pub fn subdomain_integral(
    ctx: &EnergyContext,
    potential: &Potential,
    u: &Field,
    mask: &[bool],
) -> Result<f64> {
    let grid = u.grid();
    if mask.len() != grid.len() || potential.grid() != grid || ctx.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let k = potential.field().values();
    let signs = mask.iter().zip(k).filter(|(&m, _)| m).map(|(_, &v)| v > 0.0);
    if signs.clone().any(|s| s) && signs.clone().any(|s| !s) {
        return Err(Error::MaskTouchesNodalBand);
    }
    let band = potential.nodal_band();
    for &b in &band {
        for di in -2..=2 {
            for dj in -2..=2 {
                if mask[grid.shifted(b, di, dj)] {
                    return Err(Error::MaskTouchesNodalBand);
                }
            }
        }
    }
    Ok(ctx
        .k_tilde()
        .values()
        .iter()
        .zip(u.values())
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((k, x), _)| k * x.exp())
        .sum::<f64>()
        * grid.weight())
}

/// `c` with `int K~ e^{u + c} = lambda`.
pub fn normalizing_shift(ctx: &EnergyContext, u: &Field) -> Result<f64> {
    let shift = u.max();
    let mass = ctx.mass(&u.shift(-shift))?;
    Ok((ctx.lambda() / mass).ln() - shift)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub lambda: f64,
    pub max_point: Point,
    pub max_u: f64,
    pub shift: f64,
    /// `(r, m(r))` with `m(r) = int_{B_q(r)} K~ e^w`
    pub masses: Vec<(f64, f64)>,
    /// element of `Lambda` nearest to `m` at the largest radius
    pub nearest: f64,
    pub relative_gap: f64,
}

/// Mass profile of `w = u + c`, `int K~ e^w = lambda`, around the maximum of `u`.
pub fn concentration(
    ctx: &EnergyContext,
    u: &Field,
    positive_orders: &[f64],
    radii: &[f64],
) -> Result<Concentration> {
    let c = normalizing_shift(ctx, u)?;
    let grid = u.grid();
    let q = grid.node_at(u.argmax());
    let density = ctx.k_tilde().zip_map(u, |k, x| k * (x + c).exp())?;
    let masses: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| (r, ball_integral(&density, q, r)))
        .collect();
    let m = masses.last().map(|p| p.1).unwrap_or(ctx.lambda());
    let nearest = nearest_critical(positive_orders, m);
    Ok(Concentration {
        lambda: ctx.lambda(),
        max_point: q,
        max_u: u.max(),
        shift: c,
        masses,
        nearest,
        relative_gap: (m - nearest).abs() / nearest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizationReport {
    pub entries: Vec<Concentration>,
}

/// Concentration profiles of the last `tail` records of a blown-up branch.
pub fn quantization_check(
    ctx: &EnergyContext,
    branch: &BranchRecord,
    positive_orders: &[f64],
    radii: &[f64],
    tail: usize,
) -> Result<QuantizationReport> {
    if !matches!(branch.termination, Termination::BlowUp(_)) {
        return Err(Error::NoBlowUp);
    }
    let start = branch.records.len().saturating_sub(tail);
    let entries = branch.records[start..]
        .iter()
        .map(|r| {
            let c = ctx.with_lambda(r.lambda)?;
            concentration(&c, &r.solution, positive_orders, radii)
        })
        .collect::<Result<_>>()?;
    Ok(QuantizationReport { entries })
}
