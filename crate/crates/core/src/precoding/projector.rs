use crate::{CMatrix, CVector, Error, Result, C64};

/// A generator whose residual after orthogonalisation drops below this
/// fraction of its own norm is treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-12;

/// Orthogonal projector `Π = I − QQᴴ` onto the complement of a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    basis: CMatrix,
}

impl Projector {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            basis: CMatrix::zeros(dim, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Orthonormal basis `Q` of the projected-out subspace.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Dimension of the projected-out subspace.
    pub fn rank_deficit(&self) -> usize {
        self.basis.ncols()
    }

    /// `Π v`, computed as `v − Q(Qᴴv)`.
    pub fn apply(&self, v: &CVector) -> CVector {
        if self.basis.ncols() == 0 {
            return v.clone();
        }
        v - &self.basis * self.basis.ad_mul(v)
    }
}

/// Projector onto the orthogonal complement of `span(generators)`.
///
/// The basis comes from modified Gram-Schmidt with column pivoting and a
/// second orthogonalisation pass, so the numerical rank of the generator set
/// is revealed along the way.
pub fn orthogonal_projector(dim: usize, generators: &[&CVector]) -> Result<Projector> {
    if let Some(g) = generators.iter().find(|g| g.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: g.len(),
        });
    }
    let norms: Vec<f64> = generators.iter().map(|g| g.norm()).collect();
    let mut residuals: Vec<CVector> = generators.iter().map(|&g| g.clone()).collect();
    let mut used = vec![false; generators.len()];
    let mut basis: Vec<CVector> = Vec::new();

    while basis.len() < dim {
        // pivot on the largest relative residual
        let pick = (0..residuals.len())
            .filter(|&j| !used[j] && norms[j] > 0.0)
            .map(|j| (j, residuals[j].norm() / norms[j]))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((j, rel)) = pick else { break };
        if rel <= RANK_TOLERANCE {
            break;
        }
        used[j] = true;
        let mut q = residuals[j].clone();
        for b in &basis {
            let c = b.dotc(&q);
            q.axpy(-c, b, C64::new(1.0, 0.0));
        }
        let n = q.norm();
        if n <= RANK_TOLERANCE * norms[j] {
            continue;
        }
        q.unscale_mut(n);
        for (i, r) in residuals.iter_mut().enumerate() {
            if !used[i] {
                let c = q.dotc(r);
                r.axpy(-c, &q, C64::new(1.0, 0.0));
            }
        }
        basis.push(q);
    }

    if basis.is_empty() {
        return Ok(Projector::identity(dim));
    }
    let q = CMatrix::from_columns(&basis);
    let mut matrix = CMatrix::identity(dim, dim);
    matrix -= &q * q.adjoint();
    // exact Hermitian symmetry
    let matrix = (&matrix + matrix.adjoint()).unscale(2.0);
    Ok(Projector { matrix, basis: q })
}
