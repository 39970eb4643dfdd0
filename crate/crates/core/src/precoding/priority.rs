use super::{orthogonal_projector, ChannelSet, Projector};
use crate::scenario::Collusion;
use crate::{CVector, Result};

/// Leakage projectors for a drop: one shared projector under total collusion,
/// one per Bob under partial collusion.
#[derive(Debug, Clone)]
pub enum LeakageProjection {
    Common(Projector),
    PerUser(Vec<Projector>),
}

impl LeakageProjection {
    pub fn build(channels: &ChannelSet, collusion: Collusion) -> Result<Self> {
        let dim = channels.dim();
        match collusion {
            Collusion::Total => {
                let eves: Vec<&CVector> = channels.eves().iter().collect();
                Ok(Self::Common(orthogonal_projector(dim, &eves)?))
            }
            Collusion::Partial => (0..channels.num_bobs())
                .map(|k| orthogonal_projector(dim, &channels.leakage_set(k, collusion)))
                .collect::<Result<Vec<_>>>()
                .map(Self::PerUser),
        }
    }

    /// Projector that applies to Bob `k`.
    pub fn for_user(&self, k: usize) -> &Projector {
        match self {
            Self::Common(p) => p,
            Self::PerUser(ps) => &ps[k],
        }
    }
}

/// `q_k = ‖Π_k a_k‖`.
pub fn initial_priorities(bobs: &[CVector], projection: &LeakageProjection) -> Vec<f64> {
    update_priorities(bobs, projection, &[])
}

/// `q_k = ‖(Π_k − Σ_j w_j w_jᴴ) a_k‖` over the precoders accepted so far.
pub fn update_priorities(bobs: &[CVector], projection: &LeakageProjection, accepted: &[CVector]) -> Vec<f64> {
    bobs.iter()
        .enumerate()
        .map(|(k, a)| {
            let mut v = projection.for_user(k).apply(a);
            for w in accepted {
                let c = w.dotc(a);
                v.axpy(-c, w, crate::C64::new(1.0, 0.0));
            }
            v.norm()
        })
        .collect()
}
