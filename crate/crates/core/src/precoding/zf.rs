use super::{Projector, MAX_CONDITION};
use crate::{CMatrix, CVector, Error, Result};

/// Dual basis `Y(YᴴY)⁻¹` of the columns of `Y`, via a thin QR factorisation
/// `Y = QR` so that the result is `Q·R⁻ᴴ`.
///
/// Fails when the columns are (numerically) linearly dependent, i.e. when the
/// condition estimate of the Gram matrix `YᴴY = RᴴR` exceeds
/// [`MAX_CONDITION`]. `scale` is a floor for the largest singular value, so
/// columns that were projected down to rounding residue still count as
/// degenerate.
fn dual_basis(columns: &[CVector], scale: f64) -> Result<CMatrix> {
    let dim = columns[0].len();
    let n = columns.len();
    if n > dim {
        return Err(Error::Infeasible {
            condition: f64::INFINITY,
        });
    }
    let y = CMatrix::from_columns(columns);
    let qr = y.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((scale, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::Infeasible { condition });
    }
    let r_inv = r
        .solve_upper_triangular(&CMatrix::identity(n, n))
        .ok_or(Error::Infeasible {
            condition: f64::INFINITY,
        })?;
    Ok(qr.q() * r_inv.adjoint())
}

/// Projected zero-forcing precoders `ΠAᴴ(AΠAᴴ)⁻¹` for a common leakage
/// projector, where the rows of `A` are `a_kᴴ`.
///
/// Column `k` of the result satisfies `a_jᴴω_k = δ_jk` over the given channels
/// and is orthogonal to everything `proj` projects out. The vectors are not
/// normalised.
pub fn tc_zf_precoders(channels: &[&CVector], proj: &Projector) -> Result<Vec<CVector>> {
    if channels.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(a) = channels.iter().find(|a| a.len() != proj.dim()) {
        return Err(Error::DimensionMismatch {
            expected: proj.dim(),
            got: a.len(),
        });
    }
    // Π Hermitian and idempotent: AΠAᴴ = (ΠAᴴ)ᴴ(ΠAᴴ)
    let projected: Vec<CVector> = channels.iter().map(|a| proj.apply(a)).collect();
    let scale = channels.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let dual = dual_basis(&projected, scale)?;
    Ok(dual.column_iter().map(|c| c.into_owned()).collect())
}

/// Per-user zero-forcing precoder: first column of `Bᴴ(BBᴴ)⁻¹` where the rows
/// of `B` are the user, its co-scheduled users and its own Eve cluster.
pub fn pc_zf_precoder(user: &CVector, co_scheduled: &[&CVector], cluster: &[&CVector]) -> Result<CVector> {
    let mut columns = Vec::with_capacity(1 + co_scheduled.len() + cluster.len());
    columns.push(user.clone());
    for v in co_scheduled.iter().chain(cluster) {
        if v.len() != user.len() {
            return Err(Error::DimensionMismatch {
                expected: user.len(),
                got: v.len(),
            });
        }
        columns.push((*v).clone());
    }
    let dual = dual_basis(&columns, 0.0)?;
    Ok(dual.column(0).into_owned())
}

/// `ω / ‖ω‖`.
pub fn normalize(omega: &CVector) -> Result<CVector> {
    let n = omega.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(omega.unscale(n))
}
