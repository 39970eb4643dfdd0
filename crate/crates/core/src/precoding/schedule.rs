use super::{
    initial_priorities, normalize, pc_zf_precoder, tc_zf_precoders, update_priorities, waterfilling, ChannelSet,
    LeakageProjection, ZERO_PRIORITY,
};
use crate::metrics::{self, LinkMetrics};
use crate::scenario::Collusion;
use crate::{CVector, Error, Result};

/// What happened to a candidate proposed by the greedy scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOutcome {
    Accepted,
    /// The secrecy sum-rate did not strictly improve.
    NoImprovement,
    /// The constraint Gram matrix could not be inverted.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub candidate: usize,
    pub outcome: CandidateOutcome,
    /// Secrecy sum-rate with the candidate included (0 when infeasible).
    pub rate: f64,
}

/// Scheduled users with their precoders, powers and resulting metrics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScheduleResult {
    /// Bob indices, in scheduling order.
    pub selected: Vec<usize>,
    /// Unit-norm precoders aligned with `selected`.
    pub precoders: Vec<CVector>,
    /// Powers aligned with `selected`; they sum to the budget.
    pub powers: Vec<f64>,
    pub metrics: LinkMetrics,
    /// Bobs left without a precoder because their constraints were infeasible
    /// (baseline fallback only).
    pub excluded: Vec<usize>,
    pub iterations: Vec<IterationRecord>,
}

impl ScheduleResult {
    pub fn secrecy_sum_rate(&self) -> f64 {
        self.metrics.sum_rate
    }

    pub fn per_user_secrecy_rate(&self) -> &[f64] {
        &self.metrics.secrecy_rate
    }

    pub fn served(&self) -> usize {
        self.metrics.served
    }
}

fn check_budget(total_power: f64, noise: f64) -> Result<()> {
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::Config(format!("transmit power must be positive, got {total_power}")));
    }
    if !(noise.is_finite() && noise > 0.0) {
        return Err(Error::Config(format!("noise power must be positive, got {noise}")));
    }
    Ok(())
}

/// Builds precoders for `set`, waterfills and evaluates the result.
///
/// Under partial collusion each user nulls its own cluster and the users in
/// `nulled` (every other member of `set` when `nulled` is `None`).
fn serve(
    channels: &ChannelSet,
    collusion: Collusion,
    projection: &LeakageProjection,
    set: &[usize],
    nulled: Option<&[usize]>,
    total_power: f64,
    noise: f64,
) -> Result<ScheduleResult> {
    let bobs = channels.bobs();
    let omegas = match collusion {
        Collusion::Total => {
            let chans: Vec<&CVector> = set.iter().map(|&k| &bobs[k]).collect();
            tc_zf_precoders(&chans, projection.for_user(0))?
        }
        Collusion::Partial => set
            .iter()
            .map(|&k| {
                let others: Vec<&CVector> = nulled
                    .unwrap_or(set)
                    .iter()
                    .filter(|&&j| j != k)
                    .map(|&j| &bobs[j])
                    .collect();
                pc_zf_precoder(&bobs[k], &others, &channels.leakage_set(k, collusion))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let precoders = omegas.iter().map(normalize).collect::<Result<Vec<_>>>()?;

    let gains: Vec<f64> = set
        .iter()
        .zip(&precoders)
        .map(|(&k, w)| w.dotc(&bobs[k]).norm_sqr() / noise)
        .collect();
    let active: Vec<usize> = (0..gains.len()).filter(|&i| gains[i].is_finite() && gains[i] > 0.0).collect();
    let mut powers = vec![0.0; set.len()];
    if !active.is_empty() {
        let g: Vec<f64> = active.iter().map(|&i| gains[i]).collect();
        let alloc = waterfilling(&g, total_power)?;
        for (&i, p) in active.iter().zip(alloc.powers) {
            powers[i] = p;
        }
    }
    let metrics = metrics::evaluate(channels, collusion, set, &precoders, &powers, noise, total_power);
    Ok(ScheduleResult {
        selected: set.to_vec(),
        precoders,
        powers,
        metrics,
        excluded: Vec::new(),
        iterations: Vec::new(),
    })
}

/// Precoders, waterfilled powers and metrics for a fixed user set, exactly as
/// the greedy scheduler evaluates each tentative set.
pub fn serve_set(
    channels: &ChannelSet,
    collusion: Collusion,
    set: &[usize],
    total_power: f64,
    noise: f64,
) -> Result<ScheduleResult> {
    check_budget(total_power, noise)?;
    let projection = LeakageProjection::build(channels, collusion)?;
    serve(channels, collusion, &projection, set, None, total_power, noise)
}

/// Greedy leakage-subspace scheduling.
///
/// Starting from an empty set, the Bob with the highest priority is proposed,
/// precoders for the enlarged set are rebuilt and powers waterfilled. The
/// candidate is kept only if the secrecy sum-rate strictly improves; the first
/// rejection or infeasible candidate ends the search. Ties in priority go to
/// the lowest index, and Bobs whose priority is numerically zero are never
/// proposed.
pub fn lsp_schedule(channels: &ChannelSet, collusion: Collusion, total_power: f64, noise: f64) -> Result<ScheduleResult> {
    check_budget(total_power, noise)?;
    let projection = LeakageProjection::build(channels, collusion)?;
    let bobs = channels.bobs();
    let mut remaining = vec![true; bobs.len()];
    let mut priorities = initial_priorities(bobs, &projection);
    // precoder of each accepted user as computed in the iteration that accepted it
    let mut trail: Vec<CVector> = Vec::new();
    let mut best = ScheduleResult::default();
    let mut iterations = Vec::new();

    loop {
        let candidate = (0..bobs.len())
            .filter(|&k| remaining[k] && priorities[k] > ZERO_PRIORITY * bobs[k].norm())
            .max_by(|&a, &b| priorities[a].total_cmp(&priorities[b]).then(b.cmp(&a)));
        let Some(candidate) = candidate else { break };
        remaining[candidate] = false;

        let mut trial = best.selected.clone();
        trial.push(candidate);
        match serve(channels, collusion, &projection, &trial, None, total_power, noise) {
            Ok(state) if state.metrics.sum_rate > best.metrics.sum_rate => {
                iterations.push(IterationRecord {
                    candidate,
                    outcome: CandidateOutcome::Accepted,
                    rate: state.metrics.sum_rate,
                });
                trail.push(state.precoders.last().expect("candidate precoder").clone());
                best = state;
                priorities = update_priorities(bobs, &projection, &trail);
            }
            Ok(state) => {
                iterations.push(IterationRecord {
                    candidate,
                    outcome: CandidateOutcome::NoImprovement,
                    rate: state.metrics.sum_rate,
                });
                break;
            }
            Err(Error::Infeasible { .. } | Error::ZeroNorm) => {
                iterations.push(IterationRecord {
                    candidate,
                    outcome: CandidateOutcome::Infeasible,
                    rate: 0.0,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    best.iterations = iterations;
    Ok(best)
}

/// Conventional zero-forcing: every Bob is precoded, nulling all other Bobs
/// and its leakage set, and waterfilling decides who gets power.
///
/// If the constraints cannot all be met, users are dropped instead of
/// failing: under total collusion Bobs are admitted in index order while the
/// stacked system stays invertible; under partial collusion each Bob whose own
/// constraint stack is singular is dropped. Dropped Bobs end up in
/// `excluded`.
pub fn zf_baseline(channels: &ChannelSet, collusion: Collusion, total_power: f64, noise: f64) -> Result<ScheduleResult> {
    check_budget(total_power, noise)?;
    let projection = LeakageProjection::build(channels, collusion)?;
    let bobs = channels.bobs();
    let everyone: Vec<usize> = (0..bobs.len()).collect();
    let zf_err = |e: &Error| matches!(e, Error::Infeasible { .. } | Error::ZeroNorm);

    let (feasible, excluded) = match collusion {
        Collusion::Total => match tc_zf_precoders(&bobs.iter().collect::<Vec<_>>(), projection.for_user(0)) {
            Ok(_) => (everyone.clone(), Vec::new()),
            Err(e) if zf_err(&e) => {
                let mut ok: Vec<usize> = Vec::new();
                let mut dropped = Vec::new();
                for k in 0..bobs.len() {
                    let mut trial: Vec<&CVector> = ok.iter().map(|&j| &bobs[j]).collect();
                    trial.push(&bobs[k]);
                    match tc_zf_precoders(&trial, projection.for_user(0)) {
                        Ok(_) => ok.push(k),
                        Err(e) if zf_err(&e) => dropped.push(k),
                        Err(e) => return Err(e),
                    }
                }
                (ok, dropped)
            }
            Err(e) => return Err(e),
        },
        Collusion::Partial => {
            let mut ok = Vec::new();
            let mut dropped = Vec::new();
            for k in 0..bobs.len() {
                let others: Vec<&CVector> = (0..bobs.len()).filter(|&j| j != k).map(|j| &bobs[j]).collect();
                match pc_zf_precoder(&bobs[k], &others, &channels.leakage_set(k, collusion)) {
                    Ok(_) => ok.push(k),
                    Err(e) if zf_err(&e) => dropped.push(k),
                    Err(e) => return Err(e),
                }
            }
            (ok, dropped)
        }
    };

    let mut result = serve(channels, collusion, &projection, &feasible, Some(&everyone), total_power, noise)?;
    result.excluded = excluded;
    Ok(result)
}
