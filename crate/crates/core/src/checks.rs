//! Randomised invariant suites, runnable from the command line.
//!
//! Each suite draws its instances from a fixed seed and reports the worst
//! observed residual next to the tolerance it was held to.

use std::fmt;

use rand::Rng;

use crate::arraychannel::{ArrayGeometry, Propagation, REFERENCE_WAVELENGTH};
use crate::metrics::linr;
use crate::precoding::{
    lsp_schedule, normalize, orthogonal_projector, pc_zf_precoder, tc_zf_precoders, waterfilling, zf_baseline,
    CandidateOutcome, ChannelSet, ScheduleResult, NULLING_TOLERANCE,
};
use crate::scenario::{derive_seed, generate, substream, Collusion, RngStream, ScenarioConfig};
use crate::{CVector, Result, C64};

pub const PROJECTOR_TOLERANCE: f64 = 1e-10;
pub const BUDGET_TOLERANCE: f64 = 1e-12;
pub const KKT_TOLERANCE: f64 = 1e-9;
/// Scheduled users must see leakage at most this fraction of their signal.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    pub violations: usize,
    /// Largest residual relative to its tolerance (≤ 1 means pass).
    pub worst_ratio: f64,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            instances: 0,
            violations: 0,
            worst_ratio: 0.0,
        }
    }

    fn record(&mut self, residual: f64, tolerance: f64) {
        let ratio = if residual.is_finite() { residual / tolerance } else { f64::INFINITY };
        self.worst_ratio = self.worst_ratio.max(ratio);
        if !(ratio <= 1.0) {
            self.violations += 1;
        }
    }

    fn require(&mut self, ok: bool) {
        if !ok {
            self.violations += 1;
            self.worst_ratio = f64::INFINITY;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<18} {:>4} instances, {} violations, worst residual/tolerance {:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.violations,
            self.worst_ratio
        )
    }
}

fn random_vector(rng: &mut RngStream, dim: usize) -> CVector {
    CVector::from_iterator(
        dim,
        (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
    )
}

fn desk_geometry() -> ArrayGeometry {
    ArrayGeometry::half_wavelength(64, REFERENCE_WAVELENGTH).expect("valid geometry")
}

fn drop_channels(
    geometry: &ArrayGeometry,
    collusion: Collusion,
    eves_per_bob: usize,
    num_bobs: usize,
    model: Propagation,
    seed: u64,
) -> Result<ChannelSet> {
    let mut cfg = ScenarioConfig::reference(geometry, collusion, num_bobs).with_seed(seed);
    cfg.eves_per_bob = eves_per_bob;
    generate(&cfg)?.channels(geometry, model)
}

/// Hermitian, idempotent and annihilating the generators.
pub fn projector_suite(trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("projector");
    let mut rng = substream(seed, 0);
    for t in 0..trials {
        let dim = rng.gen_range(4..=48);
        let n = rng.gen_range(0..=dim + 4);
        let mut gens: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, dim)).collect();
        if n >= 2 && t % 3 == 0 {
            // force a dependent generator
            let dup = gens[0].scale(1.7) + gens[1].scale(-0.4);
            gens.push(dup);
        }
        let p = match orthogonal_projector(dim, &gens.iter().collect::<Vec<_>>()) {
            Ok(p) => p,
            Err(_) => {
                rep.require(false);
                continue;
            }
        };
        let m = p.matrix();
        let scale = m.norm().max(f64::MIN_POSITIVE);
        rep.record((m - m.adjoint()).norm(), PROJECTOR_TOLERANCE * scale.max(1.0));
        rep.record((m * m - m).norm(), PROJECTOR_TOLERANCE * scale.max(1.0));
        for g in &gens {
            rep.record((m * g).norm(), PROJECTOR_TOLERANCE * g.norm());
        }
        rep.instances += 1;
    }
    rep
}

/// `a_jᴴw_k = 0` for co-scheduled Bobs and nulled Eves, on random
/// near-field drops.
pub fn zero_forcing_suite(trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("zero-forcing");
    let geometry = desk_geometry();
    for t in 0..trials {
        let collusion = if t % 2 == 0 { Collusion::Total } else { Collusion::Partial };
        let cs = match drop_channels(&geometry, collusion, 2, 3 + t % 6, Propagation::Spherical, derive_seed(seed, t as u64)) {
            Ok(cs) => cs,
            Err(_) => {
                rep.require(false);
                continue;
            }
        };
        let bobs = cs.bobs();
        let all: Vec<&CVector> = bobs.iter().collect();
        let precoders: Vec<CVector> = match collusion {
            Collusion::Total => {
                let proj = orthogonal_projector(cs.dim(), &cs.eves().iter().collect::<Vec<_>>()).expect("dims");
                match tc_zf_precoders(&all, &proj) {
                    Ok(w) => w,
                    Err(_) => continue,
                }
            }
            Collusion::Partial => {
                let mut ws = Vec::new();
                for k in 0..bobs.len() {
                    let others: Vec<&CVector> = (0..bobs.len()).filter(|&j| j != k).map(|j| &bobs[j]).collect();
                    match pc_zf_precoder(&bobs[k], &others, &cs.leakage_set(k, collusion)) {
                        Ok(w) => ws.push(w),
                        Err(_) => break,
                    }
                }
                if ws.len() != bobs.len() {
                    continue;
                }
                ws
            }
        };
        for (k, om) in precoders.iter().enumerate() {
            let Ok(w) = normalize(om) else {
                rep.require(false);
                continue;
            };
            for (_, a) in bobs.iter().enumerate().filter(|(j, _)| *j != k) {
                rep.record(w.dotc(a).norm(), NULLING_TOLERANCE * a.norm());
            }
            for v in cs.leakage_set(k, collusion) {
                rep.record(w.dotc(v).norm(), NULLING_TOLERANCE * v.norm());
            }
        }
        rep.instances += 1;
    }
    rep
}

/// Budget met exactly and KKT conditions hold.
pub fn waterfilling_suite(trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("waterfilling");
    let mut rng = substream(seed, 1);
    for _ in 0..trials {
        let n = rng.gen_range(1..=24);
        let gains: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-4.0..3.0))).collect();
        let p = 10f64.powf(rng.gen_range(-2.0..3.0));
        let Ok(alloc) = waterfilling(&gains, p) else {
            rep.require(false);
            continue;
        };
        let total: f64 = alloc.powers.iter().sum();
        rep.record((total - p).abs(), BUDGET_TOLERANCE * p);
        let mu = alloc.threshold();
        for (g, pk) in gains.iter().zip(&alloc.powers) {
            rep.require(*pk >= 0.0);
            if *pk > 0.0 {
                rep.record((alloc.water_level - 1.0 / g - pk).abs(), KKT_TOLERANCE * alloc.water_level);
            } else {
                rep.record((g - mu).max(0.0), KKT_TOLERANCE * mu);
            }
        }
        rep.instances += 1;
    }
    rep
}

/// Worst leakage-to-signal ratio over the scheduled users of `res`.
pub fn leakage_ratio(cs: &ChannelSet, collusion: Collusion, res: &ScheduleResult, noise: f64) -> f64 {
    res.selected
        .iter()
        .enumerate()
        .filter(|(i, _)| res.powers[*i] > 0.0)
        .map(|(i, &k)| {
            let w = &res.precoders[i];
            let signal = res.powers[i] * w.dotc(&cs.bobs()[k]).norm_sqr() / noise;
            linr(w, res.powers[i], cs.leakage_set(k, collusion), noise) / signal
        })
        .fold(0.0, f64::max)
}

/// Greedy scheduler on 64-element drops with up to 10 Bobs and 2 Eves each:
/// zero leakage, strictly increasing accepted rates and unit-norm precoders.
pub fn scheduler_suite(trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("lsp-scheduler");
    let geometry = desk_geometry();
    for t in 0..trials {
        let collusion = if t % 2 == 0 { Collusion::Total } else { Collusion::Partial };
        let model = if t % 4 < 2 { Propagation::Spherical } else { Propagation::Planar };
        let num_bobs = 1 + t % 10;
        let Ok(cs) = drop_channels(&geometry, collusion, 2, num_bobs, model, derive_seed(seed, 1000 + t as u64)) else {
            rep.require(false);
            continue;
        };
        let p_tx = 10f64.powf(2.5);
        let Ok(res) = lsp_schedule(&cs, collusion, p_tx, 1.0) else {
            rep.require(false);
            continue;
        };
        rep.record(leakage_ratio(&cs, collusion, &res, 1.0), LEAKAGE_TOLERANCE);
        for w in &res.precoders {
            rep.record((w.norm() - 1.0).abs(), 1e-12);
        }
        let accepted: Vec<f64> = res
            .iterations
            .iter()
            .filter(|i| i.outcome == CandidateOutcome::Accepted)
            .map(|i| i.rate)
            .collect();
        rep.require(accepted.windows(2).all(|w| w[1] > w[0]));
        if !res.powers.is_empty() {
            rep.record((res.powers.iter().sum::<f64>() - p_tx).abs(), BUDGET_TOLERANCE * p_tx);
        }
        rep.instances += 1;
    }
    rep
}

/// Scaling every channel by `c` and the noise by `c²` leaves the schedule
/// unchanged.
pub fn scale_invariance_suite(trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("scale-invariance");
    let geometry = desk_geometry();
    for t in 0..trials {
        let collusion = if t % 2 == 0 { Collusion::Total } else { Collusion::Partial };
        let Ok(cs) = drop_channels(&geometry, collusion, 2, 8, Propagation::Spherical, derive_seed(seed, 2000 + t as u64))
        else {
            rep.require(false);
            continue;
        };
        let c = 10f64.powf((t % 7) as f64 - 3.0);
        let p_tx = 100.0;
        for scheme in [lsp_schedule, zf_baseline] {
            let (Ok(a), Ok(b)) = (scheme(&cs, collusion, p_tx, 1.0), scheme(&cs.scaled(c), collusion, p_tx, c * c)) else {
                rep.require(false);
                continue;
            };
            rep.require(a.selected == b.selected);
            for (w0, w1) in a.precoders.iter().zip(&b.precoders) {
                rep.record((w0.dotc(w1).norm() - 1.0).abs(), 1e-9);
            }
            for (p0, p1) in a.powers.iter().zip(&b.powers) {
                rep.record((p0 - p1).abs(), 1e-9 * p_tx);
            }
        }
        rep.instances += 1;
    }
    rep
}

/// Every suite with `trials` instances each.
pub fn run_all(trials: usize, seed: u64) -> Vec<CheckReport> {
    vec![
        projector_suite(trials, seed),
        zero_forcing_suite(trials, seed),
        waterfilling_suite(trials, seed),
        scheduler_suite(trials, seed),
        scale_invariance_suite(trials, seed),
    ]
}
