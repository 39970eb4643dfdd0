//! Seeded random drops of legitimate users (Bobs) and their eavesdropper
//! clusters (Eves).
//!
//! Every Bob gets one Eve in (almost) the same angular direction but closer to
//! the base station, plus `k_e − 1` Eves on a ring centred on the Bob. The ring
//! radius defines the protected zone around the Bob.
//!
//! Random numbers come from ChaCha8 sub-streams derived from a single seed:
//! stream 0 draws the Bob positions in sequence and stream `1 + k` draws the
//! Eves of Bob `k`. Growing `num_bobs` therefore keeps every earlier Bob and its
//! cluster unchanged.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arraychannel::{steering, ArrayGeometry, PolarPosition, Propagation};
use crate::precoding::ChannelSet;
use crate::{Error, Result};

/// Random stream type used for every draw in a drop.
pub type RngStream = ChaCha8Rng;

/// Which eavesdroppers pool their observations of user `k`'s message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Collusion {
    /// All eavesdroppers collude.
    Total,
    /// Only the cluster around user `k` colludes.
    Partial,
}

impl Collusion {
    pub fn label(&self) -> &'static str {
        match self {
            Collusion::Total => "TC",
            Collusion::Partial => "PC",
        }
    }

    /// Default cluster size: 2 Eves per Bob for TC, 6 for PC.
    pub fn default_eves_per_bob(&self) -> usize {
        match self {
            Collusion::Total => 2,
            Collusion::Partial => 6,
        }
    }
}

impl fmt::Display for Collusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Collusion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TC" | "TOTAL" => Ok(Collusion::Total),
            "PC" | "PARTIAL" => Ok(Collusion::Partial),
            other => Err(Error::Config(format!("unknown collusion mode `{other}`"))),
        }
    }
}

/// Mixes `index` into `parent` to give an independent 64-bit seed
/// (SplitMix64 finaliser).
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, index: u64) -> RngStream {
    RngStream::seed_from_u64(derive_seed(seed, index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_bobs: usize,
    pub eves_per_bob: usize,
    pub collusion: Collusion,
    /// Bob azimuth interval, radians.
    pub angle_range: (f64, f64),
    /// Bob range interval, meters.
    pub range_bounds: (f64, f64),
    /// Protected-zone radius `r_q`.
    pub protected_radius: f64,
    /// How much closer to the array the aligned Eve is than its Bob (`r_p`).
    pub radial_offset: f64,
    /// Half-width of the uniform angular offset of the aligned Eve, radians.
    pub angular_jitter: f64,
    /// Radius of the ring carrying the remaining Eves.
    pub ring_radius: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Reference deployment for `geometry`: Bobs in `[3·r_Crit, r_Rayl]` and
    /// `[−π/4, π/4]`, `r_q = r_Crit`, `r_p = 2·r_q`, ±0.1° jitter, ring at
    /// `r_q` (TC) or `r_q / 2` (PC).
    pub fn reference(geometry: &ArrayGeometry, collusion: Collusion, num_bobs: usize) -> Self {
        let r_crit = geometry.critical_distance();
        let r_q = r_crit;
        Self {
            num_bobs,
            eves_per_bob: collusion.default_eves_per_bob(),
            collusion,
            angle_range: (-FRAC_PI_4, FRAC_PI_4),
            range_bounds: (3.0 * r_crit, geometry.rayleigh_distance()),
            protected_radius: r_q,
            radial_offset: 2.0 * r_q,
            angular_jitter: 0.1_f64.to_radians(),
            ring_radius: default_ring_radius(collusion, r_q),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.num_bobs == 0 {
            return bad("num_bobs must be at least 1".into());
        }
        if self.eves_per_bob == 0 {
            return bad("eves_per_bob must be at least 1".into());
        }
        let (lo, hi) = self.angle_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo > -FRAC_PI_2 && hi < FRAC_PI_2) {
            return bad(format!("angle_range ({lo}, {hi}) must lie inside (−π/2, π/2)"));
        }
        let (rlo, rhi) = self.range_bounds;
        if !(rlo.is_finite() && rhi.is_finite() && rlo > 0.0 && rlo <= rhi) {
            return bad(format!("range_bounds ({rlo}, {rhi}) must be positive and ordered"));
        }
        for (name, v) in [
            ("protected_radius", self.protected_radius),
            ("radial_offset", self.radial_offset),
            ("ring_radius", self.ring_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !(self.angular_jitter.is_finite() && self.angular_jitter >= 0.0) {
            return bad(format!("angular_jitter must be non-negative, got {}", self.angular_jitter));
        }
        if rlo <= self.radial_offset {
            return bad(format!(
                "range_bounds low ({rlo}) must exceed radial_offset ({})",
                self.radial_offset
            ));
        }
        if rlo <= self.ring_radius {
            return bad(format!("range_bounds low ({rlo}) must exceed ring_radius ({})", self.ring_radius));
        }
        Ok(())
    }
}

pub fn default_ring_radius(collusion: Collusion, protected_radius: f64) -> f64 {
    match collusion {
        Collusion::Total => protected_radius,
        Collusion::Partial => protected_radius / 2.0,
    }
}

/// One random drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInstance {
    pub bobs: Vec<PolarPosition>,
    pub eves: Vec<PolarPosition>,
    /// `clusters[k]` holds the indices into `eves` of Bob `k`'s cluster.
    pub clusters: Vec<Vec<usize>>,
}

impl ScenarioInstance {
    pub fn num_bobs(&self) -> usize {
        self.bobs.len()
    }

    pub fn num_eves(&self) -> usize {
        self.eves.len()
    }

    /// Channel vectors of every user under `model`.
    pub fn channels(&self, geometry: &ArrayGeometry, model: Propagation) -> Result<ChannelSet> {
        let build = |ps: &[PolarPosition]| {
            ps.iter()
                .map(|p| steering(p, geometry, model).map(|s| s.into_entries()))
                .collect::<Result<Vec<_>>>()
        };
        ChannelSet::new(build(&self.bobs)?, build(&self.eves)?, self.clusters.clone())
    }

    /// Plain-text fixture: one entity per line, `role bob_index range azimuth`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# role bob_index range_m azimuth_rad\n");
        for (k, b) in self.bobs.iter().enumerate() {
            writeln!(out, "bob {k} {} {}", b.range_m, b.azimuth_rad).unwrap();
        }
        for (k, cluster) in self.clusters.iter().enumerate() {
            for &e in cluster {
                let p = &self.eves[e];
                writeln!(out, "eve {k} {} {}", p.range_m, p.azimuth_rad).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut bobs: Vec<(usize, PolarPosition)> = Vec::new();
        let mut eves: Vec<(usize, PolarPosition)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, got {}", fields.len())));
            }
            let idx: usize = fields[1].parse().map_err(|e| err(format!("bob index: {e}")))?;
            let r: f64 = fields[2].parse().map_err(|e| err(format!("range: {e}")))?;
            let t: f64 = fields[3].parse().map_err(|e| err(format!("azimuth: {e}")))?;
            let pos = PolarPosition::new(r, t).map_err(|e| err(e.to_string()))?;
            match fields[0] {
                "bob" => {
                    if idx != bobs.len() {
                        return Err(err(format!("bob index {idx} out of order")));
                    }
                    bobs.push((idx, pos));
                }
                "eve" => eves.push((idx, pos)),
                other => return Err(err(format!("unknown role `{other}`"))),
            }
        }
        let mut clusters = vec![Vec::new(); bobs.len()];
        for (e, (k, _)) in eves.iter().enumerate() {
            clusters
                .get_mut(*k)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("eve refers to missing bob {k}"),
                })?
                .push(e);
        }
        Ok(Self {
            bobs: bobs.into_iter().map(|(_, p)| p).collect(),
            eves: eves.into_iter().map(|(_, p)| p).collect(),
            clusters,
        })
    }
}

/// `config.num_bobs` independent uniform draws over the configured sector.
pub fn sample_bobs(config: &ScenarioConfig, rng: &mut RngStream) -> Vec<PolarPosition> {
    let (tlo, thi) = config.angle_range;
    let (rlo, rhi) = config.range_bounds;
    (0..config.num_bobs)
        .map(|_| {
            let theta = rng.gen_range(tlo..=thi);
            let r = rng.gen_range(rlo..=rhi);
            PolarPosition {
                range_m: r,
                azimuth_rad: theta,
            }
        })
        .collect()
}

/// Eve at azimuth `θ_k + Δ`, `Δ ~ U[−jitter, jitter]`, and range `r_k − r_p`.
pub fn place_aligned_eve(bob: &PolarPosition, config: &ScenarioConfig, rng: &mut RngStream) -> Result<PolarPosition> {
    if bob.range_m <= config.radial_offset {
        return Err(Error::InvalidGeometry(format!(
            "bob range {} does not exceed radial offset {}",
            bob.range_m, config.radial_offset
        )));
    }
    let j = config.angular_jitter;
    let delta = rng.gen_range(-j..=j);
    PolarPosition::new(bob.range_m - config.radial_offset, bob.azimuth_rad + delta)
}

/// `count` Eves at Euclidean distance `radius` from `bob`, ring angles uniform
/// in `[0, 2π)`.
pub fn place_ring_eves(
    bob: &PolarPosition,
    count: usize,
    radius: f64,
    rng: &mut RngStream,
) -> Result<Vec<PolarPosition>> {
    if !(radius > 0.0) || radius >= bob.range_m {
        return Err(Error::InvalidGeometry(format!(
            "ring radius {radius} must be positive and below the bob range {}",
            bob.range_m
        )));
    }
    let (bx, by) = bob.to_cartesian();
    (0..count)
        .map(|_| {
            let phi = rng.gen_range(0.0..TAU);
            PolarPosition::from_cartesian(bx + radius * phi.cos(), by + radius * phi.sin())
        })
        .collect()
}

/// Draws one complete drop; a pure function of `config`.
pub fn generate(config: &ScenarioConfig) -> Result<ScenarioInstance> {
    config.validate()?;
    let bobs = sample_bobs(config, &mut substream(config.seed, 0));
    let ke = config.eves_per_bob;
    let mut eves = Vec::with_capacity(bobs.len() * ke);
    let mut clusters = Vec::with_capacity(bobs.len());
    for (k, bob) in bobs.iter().enumerate() {
        let mut rng = substream(config.seed, 1 + k as u64);
        let start = eves.len();
        eves.push(place_aligned_eve(bob, config, &mut rng)?);
        eves.extend(place_ring_eves(bob, ke - 1, config.ring_radius, &mut rng)?);
        clusters.push((start..eves.len()).collect());
    }
    Ok(ScenarioInstance { bobs, eves, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraychannel::normalized_correlation;

    fn reference(collusion: Collusion, k: usize) -> ScenarioConfig {
        ScenarioConfig::reference(&ArrayGeometry::reference(), collusion, k)
    }

    #[test]
    fn empty_bob_draw() {
        let mut cfg = reference(Collusion::Total, 1);
        cfg.num_bobs = 0;
        assert!(sample_bobs(&cfg, &mut substream(1, 0)).is_empty());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn bobs_respect_bounds() {
        let g = ArrayGeometry::reference();
        let cfg = reference(Collusion::Total, 500);
        let bobs = sample_bobs(&cfg, &mut substream(42, 0));
        assert_eq!(bobs.len(), 500);
        let (lo, hi) = (3.0 * g.critical_distance(), g.rayleigh_distance());
        for b in &bobs {
            assert!(b.azimuth_rad.abs() <= FRAC_PI_4);
            assert!(b.range_m >= lo && b.range_m <= hi);
        }
    }

    #[test]
    fn aligned_eve_zero_jitter() {
        let mut cfg = reference(Collusion::Total, 1);
        cfg.angular_jitter = 0.0;
        cfg.radial_offset = 112.41;
        let bob = PolarPosition::new(300.0, 0.2).unwrap();
        let eve = place_aligned_eve(&bob, &cfg, &mut substream(3, 0)).unwrap();
        assert!((eve.range_m - 187.59).abs() < 1e-12);
        assert_eq!(eve.azimuth_rad, 0.2);
    }

    #[test]
    fn aligned_eve_offset_is_two_critical_distances() {
        let g = ArrayGeometry::reference();
        let cfg = reference(Collusion::Total, 1);
        let bob = PolarPosition::new(400.0, -0.1).unwrap();
        let eve = place_aligned_eve(&bob, &cfg, &mut substream(9, 0)).unwrap();
        assert!((bob.range_m - eve.range_m - 2.0 * g.critical_distance()).abs() < 1e-12);
    }

    #[test]
    fn aligned_eve_rejects_close_bob() {
        let cfg = reference(Collusion::Total, 1);
        let bob = PolarPosition::new(cfg.radial_offset, 0.0).unwrap();
        assert!(place_aligned_eve(&bob, &cfg, &mut substream(0, 0)).is_err());
    }

    #[test]
    fn jitter_distribution() {
        let cfg = reference(Collusion::Total, 1);
        let bob = PolarPosition::new(300.0, 0.2).unwrap();
        let mut rng = substream(11, 0);
        let limit = 0.1_f64.to_radians();
        let n = 10_000;
        let mut sum_abs = 0.0;
        for _ in 0..n {
            let e = place_aligned_eve(&bob, &cfg, &mut rng).unwrap();
            let d = e.azimuth_rad - bob.azimuth_rad;
            assert!(d.abs() <= limit + 1e-15);
            sum_abs += d.abs();
        }
        let mean = sum_abs / n as f64;
        // E|Δ| = jitter / 2 for Δ ~ U[−jitter, jitter]
        assert!((mean - limit / 2.0).abs() < 0.05 * limit / 2.0, "mean |Δ| = {mean}");
    }

    #[test]
    fn ring_eves_on_ring() {
        let bob = PolarPosition::new(250.0, 0.5).unwrap();
        assert!(place_ring_eves(&bob, 0, 10.0, &mut substream(0, 0)).unwrap().is_empty());
        let r_q = ArrayGeometry::reference().critical_distance();
        let eves = place_ring_eves(&bob, 5, r_q / 2.0, &mut substream(5, 1)).unwrap();
        assert_eq!(eves.len(), 5);
        let (bx, by) = (250.0 * 0.5f64.cos(), 250.0 * 0.5f64.sin());
        for e in &eves {
            let (x, y) = (e.range_m * e.azimuth_rad.cos(), e.range_m * e.azimuth_rad.sin());
            assert!(((x - bx).hypot(y - by) - r_q / 2.0).abs() < 1e-9);
        }
        assert!(place_ring_eves(&bob, 1, 250.0, &mut substream(0, 0)).is_err());
    }

    #[test]
    fn generate_cardinalities() {
        let inst = generate(&reference(Collusion::Total, 10).with_seed(1)).unwrap();
        assert_eq!((inst.bobs.len(), inst.eves.len(), inst.clusters.len()), (10, 20, 10));
        assert!(inst.clusters.iter().all(|c| c.len() == 2));

        let inst = generate(&reference(Collusion::Partial, 20).with_seed(1)).unwrap();
        assert_eq!(inst.eves.len(), 120);
        assert!(inst.clusters.iter().all(|c| c.len() == 6));
    }

    #[test]
    fn generate_is_deterministic() {
        let cfg = reference(Collusion::Partial, 7).with_seed(0xDEADBEEF);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = generate(&cfg.clone().with_seed(1)).unwrap();
        assert_ne!(generate(&cfg).unwrap(), other);
    }

    #[test]
    fn growing_bob_count_keeps_prefix() {
        let small = generate(&reference(Collusion::Total, 10).with_seed(77)).unwrap();
        let large = generate(&reference(Collusion::Total, 20).with_seed(77)).unwrap();
        assert_eq!(small.bobs[..], large.bobs[..10]);
        assert_eq!(small.eves[..], large.eves[..20]);
    }

    #[test]
    fn invariants_over_many_seeds() {
        for collusion in [Collusion::Total, Collusion::Partial] {
            let base = reference(collusion, 5);
            for seed in 0..1000u64 {
                let cfg = base.clone().with_seed(seed);
                let inst = generate(&cfg).unwrap();
                let mut seen = vec![false; inst.num_eves()];
                for (k, cluster) in inst.clusters.iter().enumerate() {
                    for &e in cluster {
                        assert!(!seen[e]);
                        seen[e] = true;
                        let d = inst.eves[e].distance_to(&inst.bobs[k]);
                        assert!(d >= cfg.ring_radius - 1e-9);
                        assert!(inst.eves[e].range_m > 0.0);
                    }
                }
                assert!(seen.iter().all(|&s| s));
                for b in &inst.bobs {
                    assert!(b.azimuth_rad.abs() <= FRAC_PI_4);
                    assert!(b.range_m >= cfg.range_bounds.0 && b.range_m <= cfg.range_bounds.1);
                }
            }
        }
    }

    #[test]
    fn zero_jitter_pw_aligned_eve_is_collinear() {
        let g = ArrayGeometry::reference();
        let mut cfg = reference(Collusion::Total, 4).with_seed(3);
        cfg.angular_jitter = 0.0;
        let inst = generate(&cfg).unwrap();
        for (k, b) in inst.bobs.iter().enumerate() {
            let e = &inst.eves[inst.clusters[k][0]];
            let a = steering(b, &g, Propagation::Planar).unwrap();
            let v = steering(e, &g, Propagation::Planar).unwrap();
            assert!((normalized_correlation(&a, &v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn text_fixture_roundtrip() {
        let inst = generate(&reference(Collusion::Partial, 3).with_seed(5)).unwrap();
        let back = ScenarioInstance::from_text(&inst.to_text()).unwrap();
        assert_eq!(inst, back);
        assert!(ScenarioInstance::from_text("bob 0 1.0").is_err());
        assert!(ScenarioInstance::from_text("eve 3 10.0 0.1").is_err());
        assert!(ScenarioInstance::from_text("cat 0 10.0 0.1").is_err());
    }

    #[test]
    fn collusion_parses() {
        assert_eq!("tc".parse::<Collusion>().unwrap(), Collusion::Total);
        assert_eq!("PC".parse::<Collusion>().unwrap(), Collusion::Partial);
        assert!("xc".parse::<Collusion>().is_err());
    }
}
