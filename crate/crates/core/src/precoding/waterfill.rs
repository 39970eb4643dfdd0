use crate::{Error, Result};

/// Result of a waterfilling run.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Water level `1/μ`; active users get `p_k = 1/μ − 1/g_k`.
    pub water_level: f64,
}

impl PowerAllocation {
    /// Threshold `μ`: users with `g_k ≤ μ` receive no power.
    pub fn threshold(&self) -> f64 {
        1.0 / self.water_level
    }
}

/// Allocates `total_power` over parallel channels with gains `g_k` to
/// maximise `Σ log2(1 + g_k p_k)`.
///
/// Users are sorted by decreasing gain and the active set grows while the next
/// user's inverse gain stays below the water level.
pub fn waterfilling(gains: &[f64], total_power: f64) -> Result<PowerAllocation> {
    if gains.is_empty() {
        return Err(Error::EmptyGains);
    }
    if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::Config(format!("waterfilling gains must be finite and positive, got {g}")));
    }
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(Error::Config(format!("total power must be positive, got {total_power}")));
    }

    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));

    let mut inv_sum = 0.0;
    let mut level = 0.0;
    for (n, &k) in order.iter().enumerate() {
        inv_sum += 1.0 / gains[k];
        level = (total_power + inv_sum) / (n + 1) as f64;
        match order.get(n + 1) {
            Some(&next) if level > 1.0 / gains[next] => continue,
            _ => break,
        }
    }
    let mut powers: Vec<f64> = gains.iter().map(|g| (level - 1.0 / g).max(0.0)).collect();
    // `level − 1/g` cancels badly when 1/g ≫ P; raise the level by the
    // leftover budget so the powers sum to P.
    let active = powers.iter().filter(|&&p| p > 0.0).count();
    let deficit = total_power - powers.iter().sum::<f64>();
    let shift = deficit / active as f64;
    for p in powers.iter_mut().filter(|p| **p > 0.0) {
        *p += shift;
    }
    level += shift;
    Ok(PowerAllocation {
        powers,
        water_level: level,
    })
}
