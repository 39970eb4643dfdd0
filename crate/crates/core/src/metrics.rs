//! Link-level figures of merit for a scheduled set of users.
//!
//! All ratios are linear (not dB) and rates are in bits/s/Hz. Precoders are
//! unit-norm and `powers[i]` is the power of the `i`-th scheduled user.

use crate::precoding::ChannelSet;
use crate::scenario::Collusion;
use crate::CVector;

/// Fraction of the power budget above which a user counts as served.
pub const SERVED_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkMetrics {
    pub sinr: Vec<f64>,
    pub linr: Vec<f64>,
    pub secrecy_rate: Vec<f64>,
    pub sum_rate: f64,
    pub served: usize,
}

/// SINR of scheduled user `k` whose channel is `channel`:
/// `p_k|w_kᴴa_k|² / (σ² + Σ_{j≠k} p_j|w_jᴴa_k|²)`.
pub fn sinr(k: usize, precoders: &[CVector], powers: &[f64], channel: &CVector, noise: f64) -> f64 {
    let mut interference = noise;
    for (j, (w, p)) in precoders.iter().zip(powers).enumerate() {
        if j != k {
            interference += p * w.dotc(channel).norm_sqr();
        }
    }
    powers[k] * precoders[k].dotc(channel).norm_sqr() / interference
}

/// Colluding leakage-to-noise ratio `Σ_v p|wᴴa_v|² / σ²`.
pub fn linr<'a>(precoder: &CVector, power: f64, eves: impl IntoIterator<Item = &'a CVector>, noise: f64) -> f64 {
    eves.into_iter()
        .map(|a| power * precoder.dotc(a).norm_sqr() / noise)
        .sum()
}

/// `[log2((1 + SINR) / (1 + LINR))]⁺`.
pub fn secrecy_rate(sinr: f64, linr: f64) -> f64 {
    ((1.0 + sinr) / (1.0 + linr)).log2().max(0.0)
}

/// Per-user clamped secrecy rates, summed.
pub fn secrecy_sum_rate(sinr: &[f64], linr: &[f64]) -> f64 {
    sinr.iter().zip(linr).map(|(&s, &l)| secrecy_rate(s, l)).sum()
}

pub fn served_count(powers: &[f64], total_power: f64) -> usize {
    powers.iter().filter(|&&p| p > SERVED_THRESHOLD * total_power).count()
}

/// Evaluates every metric for the users in `selected` (indices into the Bobs
/// of `channels`) served with `precoders` and `powers`.
pub fn evaluate(
    channels: &ChannelSet,
    collusion: Collusion,
    selected: &[usize],
    precoders: &[CVector],
    powers: &[f64],
    noise: f64,
    total_power: f64,
) -> LinkMetrics {
    let bobs = channels.bobs();
    let sinr_v: Vec<f64> = selected
        .iter()
        .enumerate()
        .map(|(i, &k)| sinr(i, precoders, powers, &bobs[k], noise))
        .collect();
    let linr_v: Vec<f64> = selected
        .iter()
        .enumerate()
        .map(|(i, &k)| linr(&precoders[i], powers[i], channels.leakage_set(k, collusion), noise))
        .collect();
    let rates: Vec<f64> = sinr_v.iter().zip(&linr_v).map(|(&s, &l)| secrecy_rate(s, l)).collect();
    LinkMetrics {
        sum_rate: rates.iter().sum(),
        served: served_count(powers, total_power),
        sinr: sinr_v,
        linr: linr_v,
        secrecy_rate: rates,
    }
}
