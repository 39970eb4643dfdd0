//! Leakage-subspace precoding with greedy user scheduling, and the plain
//! zero-forcing baseline it is compared against.
//!
//! Channel vectors are the column vectors `a_k` built by
//! [`crate::arraychannel`]. Constraint matrices stack their conjugate
//! transposes as rows, so a zero-forcing precoder `w_k` satisfies
//! `a_jᴴ w_k = 0` for every constrained `j`.

mod priority;
mod projector;
mod schedule;
mod waterfill;
mod zf;

pub use priority::{initial_priorities, update_priorities, LeakageProjection};
pub use projector::{orthogonal_projector, Projector};
pub use schedule::{lsp_schedule, serve_set, zf_baseline, CandidateOutcome, IterationRecord, ScheduleResult};
pub use waterfill::{waterfilling, PowerAllocation};
pub use zf::{normalize, pc_zf_precoder, tc_zf_precoders};

use crate::scenario::Collusion;
use crate::{CVector, Error, Result};

/// Relative nulling residual every zero-forcing precoder must meet.
pub const NULLING_TOLERANCE: f64 = 1e-8;
/// Largest acceptable condition estimate of a constraint Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Users whose priority falls below this fraction of `‖a_k‖` are never
/// proposed as candidates.
pub const ZERO_PRIORITY: f64 = 1e-10;

/// Channel vectors of one drop: Bobs, Eves and each Bob's Eve cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    bobs: Vec<CVector>,
    eves: Vec<CVector>,
    clusters: Vec<Vec<usize>>,
}

impl ChannelSet {
    pub fn new(bobs: Vec<CVector>, eves: Vec<CVector>, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let dim = bobs.first().or(eves.first()).map_or(0, |v| v.len());
        if let Some(v) = bobs.iter().chain(&eves).find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        if clusters.len() != bobs.len() {
            return Err(Error::DimensionMismatch {
                expected: bobs.len(),
                got: clusters.len(),
            });
        }
        if let Some(&e) = clusters.iter().flatten().find(|&&e| e >= eves.len()) {
            return Err(Error::Config(format!("cluster refers to missing eavesdropper {e}")));
        }
        Ok(Self { bobs, eves, clusters })
    }

    /// Bobs only, no eavesdroppers.
    pub fn without_eves(bobs: Vec<CVector>) -> Result<Self> {
        let clusters = vec![Vec::new(); bobs.len()];
        Self::new(bobs, Vec::new(), clusters)
    }

    pub fn dim(&self) -> usize {
        self.bobs.first().or(self.eves.first()).map_or(0, |v| v.len())
    }

    pub fn bobs(&self) -> &[CVector] {
        &self.bobs
    }

    pub fn eves(&self) -> &[CVector] {
        &self.eves
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn num_bobs(&self) -> usize {
        self.bobs.len()
    }

    /// Eavesdroppers whose observations of Bob `k`'s message combine.
    pub fn leakage_set(&self, k: usize, collusion: Collusion) -> Vec<&CVector> {
        match collusion {
            Collusion::Total => self.eves.iter().collect(),
            Collusion::Partial => self.clusters[k].iter().map(|&e| &self.eves[e]).collect(),
        }
    }

    /// Same drop with every channel multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |vs: &[CVector]| vs.iter().map(|v| v * crate::C64::from(c)).collect();
        Self {
            bobs: s(&self.bobs),
            eves: s(&self.eves),
            clusters: self.clusters.clone(),
        }
    }
}
