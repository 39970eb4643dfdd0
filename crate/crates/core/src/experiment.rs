//! Seeded Monte Carlo sweeps and CSV persistence.
//!
//! Realization `i` of a sweep always uses the scenario seed
//! `derive_seed(master_seed, i)`, whatever scheme, propagation model or SNR is
//! being evaluated, so every curve is computed on the same drops. Realizations
//! may run in parallel; results are merged by index so the output never
//! depends on scheduling order.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::arraychannel::{ArrayGeometry, Propagation};
use crate::precoding::{lsp_schedule, zf_baseline, ScheduleResult};
use crate::scenario::{derive_seed, generate, Collusion, ScenarioConfig};
use crate::{Error, Result};

/// Exact CSV header written by [`write_csv`].
pub const CSV_HEADER: &str = "scheme,model,collusion,K_B,k_e,snr_db,mean_secrecy_rate,stderr_rate,mean_served_users,stderr_served,num_realizations,failures,master_seed";

/// Noise power; the transmit SNR is `P_TX / NOISE_POWER`.
pub const NOISE_POWER: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Greedy leakage-subspace precoding.
    Lsp,
    /// Conventional zero-forcing over all users.
    Zf,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Lsp, Scheme::Zf];

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Lsp => "LSP",
            Scheme::Zf => "ZF",
        }
    }

    pub fn run(&self, channels: &crate::precoding::ChannelSet, collusion: Collusion, p_tx: f64, noise: f64) -> Result<ScheduleResult> {
        match self {
            Scheme::Lsp => lsp_schedule(channels, collusion, p_tx, noise),
            Scheme::Zf => zf_baseline(channels, collusion, p_tx, noise),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LSP" => Ok(Scheme::Lsp),
            "ZF" => Ok(Scheme::Zf),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: ArrayGeometry,
    /// Drop template; `num_bobs` is replaced by each entry of `bob_counts`.
    pub scenario: ScenarioConfig,
    pub bob_counts: Vec<usize>,
    pub snr_grid_db: Vec<f64>,
    pub num_realizations: usize,
    pub schemes: Vec<Scheme>,
    pub models: Vec<Propagation>,
    pub master_seed: u64,
    pub output_path: PathBuf,
    /// Run realizations on the rayon pool.
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Full reference deployment: 100 elements, `K_B ∈ {10, 20}`, 1000
    /// realizations.
    pub fn reference(collusion: Collusion) -> Self {
        let geometry = ArrayGeometry::reference();
        Self {
            geometry,
            scenario: ScenarioConfig::reference(&geometry, collusion, 10),
            bob_counts: vec![10, 20],
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            num_realizations: 1000,
            schemes: Scheme::ALL.to_vec(),
            models: Propagation::ALL.to_vec(),
            master_seed: 1,
            output_path: PathBuf::from("results.csv"),
            parallel: true,
        }
    }

    /// Desk-scale variant: 64 elements, `K_B = 10`, 200 realizations.
    pub fn desk_scale(collusion: Collusion) -> Self {
        let geometry = ArrayGeometry::half_wavelength(64, crate::arraychannel::REFERENCE_WAVELENGTH)
            .expect("valid geometry");
        Self {
            geometry,
            scenario: ScenarioConfig::reference(&geometry, collusion, 10),
            bob_counts: vec![10],
            num_realizations: 200,
            ..Self::reference(collusion)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.bob_counts.is_empty() || self.snr_grid_db.is_empty() || self.schemes.is_empty() || self.models.is_empty() {
            return bad("bob_counts, snr_grid_db, schemes and models must all be non-empty");
        }
        if self.num_realizations == 0 {
            return bad("num_realizations must be at least 1");
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_grid_db entries must be finite");
        }
        for &k in &self.bob_counts {
            self.scenario_for(k).validate()?;
        }
        Ok(())
    }

    pub fn collusion(&self) -> Collusion {
        self.scenario.collusion
    }

    fn scenario_for(&self, num_bobs: usize) -> ScenarioConfig {
        ScenarioConfig {
            num_bobs,
            ..self.scenario.clone()
        }
    }
}

/// Aggregated outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub model: Propagation,
    pub collusion: Collusion,
    pub num_bobs: usize,
    pub eves_per_bob: usize,
    pub snr_db: f64,
    pub mean_secrecy_rate: f64,
    pub stderr_rate: f64,
    pub mean_served_users: f64,
    pub stderr_served: f64,
    pub num_realizations: usize,
    /// Realizations whose scheme errored or had to drop infeasible users.
    pub failures: usize,
    pub master_seed: u64,
}

impl ResultRow {
    fn sort_key(&self) -> (Scheme, Propagation, Collusion, usize, f64) {
        (self.scheme, self.model, self.collusion, self.num_bobs, self.snr_db)
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.model,
            self.collusion,
            self.num_bobs,
            self.eves_per_bob,
            self.snr_db,
            self.mean_secrecy_rate,
            self.stderr_rate,
            self.mean_served_users,
            self.stderr_served,
            self.num_realizations,
            self.failures,
            self.master_seed
        )
    }
}

/// Welford accumulator for the standard error. The reported mean is the plain
/// sum over the count, so means of integer counts are exact quotients and
/// compare equal when the totals do.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: usize,
    sum: f64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum / self.count as f64
    }

    /// Sample standard deviation over `√N`; zero for fewer than two samples.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    rate: f64,
    served: f64,
    failed: bool,
}

type Point = (Scheme, Propagation, f64);

/// Every requested point evaluated on realization `index` of a drop template.
fn simulate_realization(
    geometry: &ArrayGeometry,
    template: &ScenarioConfig,
    master_seed: u64,
    index: usize,
    points: &[Point],
) -> Result<Vec<Outcome>> {
    let cfg = ScenarioConfig {
        seed: derive_seed(master_seed, index as u64),
        ..template.clone()
    };
    let instance = generate(&cfg)?;
    let mut channels = Vec::new();
    let mut out = Vec::with_capacity(points.len());
    for &(scheme, model, snr_db) in points {
        let cs = match channels.iter().find(|(m, _)| *m == model) {
            Some((_, cs)) => cs,
            None => {
                channels.push((model, instance.channels(geometry, model)?));
                &channels.last().unwrap().1
            }
        };
        let p_tx = NOISE_POWER * 10f64.powf(snr_db / 10.0);
        let outcome = match scheme.run(cs, cfg.collusion, p_tx, NOISE_POWER) {
            Ok(res) if res.secrecy_sum_rate().is_finite() => Outcome {
                rate: res.secrecy_sum_rate(),
                served: res.served() as f64,
                failed: !res.excluded.is_empty(),
            },
            Ok(_) => {
                warn!("realization {index}: non-finite rate for {scheme}/{model} at {snr_db} dB");
                Outcome {
                    rate: 0.0,
                    served: 0.0,
                    failed: true,
                }
            }
            Err(e) => {
                warn!("realization {index}: {scheme}/{model} at {snr_db} dB failed: {e}");
                Outcome {
                    rate: 0.0,
                    served: 0.0,
                    failed: true,
                }
            }
        };
        out.push(outcome);
    }
    Ok(out)
}

fn run_points(config: &ExperimentConfig, num_bobs: usize, points: &[Point]) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let template = config.scenario_for(num_bobs);
    let sim = |i: usize| simulate_realization(&config.geometry, &template, config.master_seed, i, points);
    let per_realization: Vec<Vec<Outcome>> = if config.parallel {
        (0..config.num_realizations).into_par_iter().map(sim).collect::<Result<_>>()?
    } else {
        (0..config.num_realizations).map(sim).collect::<Result<_>>()?
    };

    let rows = points
        .iter()
        .enumerate()
        .map(|(j, &(scheme, model, snr_db))| {
            let mut rate = RunningStats::default();
            let mut served = RunningStats::default();
            let mut failures = 0;
            for outcomes in &per_realization {
                let o = outcomes[j];
                rate.push(o.rate);
                served.push(o.served);
                failures += o.failed as usize;
            }
            ResultRow {
                scheme,
                model,
                collusion: template.collusion,
                num_bobs,
                eves_per_bob: template.eves_per_bob,
                snr_db,
                mean_secrecy_rate: rate.mean(),
                stderr_rate: rate.stderr(),
                mean_served_users: served.mean(),
                stderr_served: served.stderr(),
                num_realizations: config.num_realizations,
                failures,
                master_seed: config.master_seed,
            }
        })
        .collect();
    Ok(rows)
}

/// One sweep point, with `K_B` taken from `config.scenario.num_bobs`.
pub fn run_point(config: &ExperimentConfig, scheme: Scheme, model: Propagation, snr_db: f64) -> Result<ResultRow> {
    let rows = run_points(config, config.scenario.num_bobs, &[(scheme, model, snr_db)])?;
    Ok(rows.into_iter().next().expect("one point"))
}

/// Every combination of scheme, model, `K_B` and SNR, sorted by
/// `(scheme, model, collusion, K_B, snr_db)`.
pub fn sweep_rows(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut points = Vec::new();
    for &scheme in &config.schemes {
        for &model in &config.models {
            for &snr in &config.snr_grid_db {
                points.push((scheme, model, snr));
            }
        }
    }
    let mut rows = Vec::new();
    for &k in &config.bob_counts {
        info!("K_B = {k}: {} points x {} realizations", points.len(), config.num_realizations);
        rows.extend(run_points(config, k, &points)?);
    }
    rows.sort_by(|a, b| a.sort_key().partial_cmp(&b.sort_key()).expect("finite SNR"));
    Ok(rows)
}

/// Runs [`sweep_rows`] and writes the CSV to `config.output_path`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rows = sweep_rows(config)?;
    write_csv(&config.output_path, &rows)?;
    Ok(rows)
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.to_csv_line()).unwrap();
    }
    out
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, to_csv(rows))?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    debug!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoding::ChannelSet;

    fn tiny(collusion: Collusion) -> ExperimentConfig {
        let geometry = ArrayGeometry::half_wavelength(32, 0.1249).unwrap();
        ExperimentConfig {
            geometry,
            scenario: ScenarioConfig::reference(&geometry, collusion, 3),
            bob_counts: vec![3],
            snr_grid_db: vec![0.0, 10.0, 20.0],
            num_realizations: 6,
            schemes: Scheme::ALL.to_vec(),
            models: Propagation::ALL.to_vec(),
            master_seed: 99,
            output_path: PathBuf::from("unused.csv"),
            parallel: false,
        }
    }

    #[test]
    fn stats_match_batch_formula() {
        let xs: Vec<f64> = (0..57).map(|i| ((i * 37 % 11) as f64).sqrt() * 1.3 + 0.01 * i as f64).collect();
        let mut s = RunningStats::default();
        xs.iter().for_each(|&x| s.push(x));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((s.mean() - mean).abs() < 1e-12);
        assert!((s.stderr() - (var / n).sqrt()).abs() < 1e-12);

        let mut counts = RunningStats::default();
        let mut same = RunningStats::default();
        for i in 0..200 {
            counts.push([1.0, 2.0, 1.0, 1.0][i % 4]);
            same.push([1.0, 1.0, 2.0, 1.0][i % 4]);
        }
        assert_eq!(counts.mean(), same.mean());
        assert_eq!(counts.mean(), 250.0 / 200.0);

        let mut one = RunningStats::default();
        one.push(4.0);
        assert_eq!((one.mean(), one.stderr()), (4.0, 0.0));
    }

    #[test]
    fn single_user_pipeline_identity() {
        // one Bob at 0 dB: the LSP rate is log2(1 + ‖Πa‖²) with Π removing its Eves
        let mut cfg = tiny(Collusion::Total);
        cfg.scenario.num_bobs = 1;
        cfg.bob_counts = vec![1];
        cfg.num_realizations = 1;
        let row = run_point(&cfg, Scheme::Lsp, Propagation::Spherical, 0.0).unwrap();

        let inst = generate(&ScenarioConfig {
            seed: derive_seed(cfg.master_seed, 0),
            ..cfg.scenario.clone()
        })
        .unwrap();
        let cs = inst.channels(&cfg.geometry, Propagation::Spherical).unwrap();
        let proj = crate::precoding::orthogonal_projector(32, &cs.eves().iter().collect::<Vec<_>>()).unwrap();
        let a = proj.apply(&cs.bobs()[0]);
        assert!((row.mean_secrecy_rate - (1.0 + a.norm_squared()).log2()).abs() < 1e-12);
        assert_eq!(row.mean_served_users, 1.0);

        // and with the Eves removed altogether, plain single-user capacity
        let bob = cs.bobs()[0].clone();
        let alone = ChannelSet::without_eves(vec![bob.clone()]).unwrap();
        let res = lsp_schedule(&alone, Collusion::Total, 1.0, 1.0).unwrap();
        assert!((res.secrecy_sum_rate() - (1.0 + bob.norm_squared()).log2()).abs() < 1e-12);
    }

    #[test]
    fn sweep_cardinality_and_order() {
        let cfg = tiny(Collusion::Total);
        let rows = sweep_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        assert!(rows.windows(2).all(|w| w[0].sort_key() <= w[1].sort_key()));
        assert_eq!(rows[0].scheme, Scheme::Lsp);
        assert_eq!(rows[0].model, Propagation::Spherical);
    }

    #[test]
    fn point_matches_sweep_row() {
        let cfg = tiny(Collusion::Partial);
        let rows = sweep_rows(&cfg).unwrap();
        let row = run_point(&cfg, Scheme::Zf, Propagation::Planar, 10.0).unwrap();
        assert!(rows.contains(&row));
    }

    #[test]
    fn parallel_equals_sequential() {
        let mut cfg = tiny(Collusion::Total);
        let seq = sweep_rows(&cfg).unwrap();
        cfg.parallel = true;
        assert_eq!(seq, sweep_rows(&cfg).unwrap());
    }

    #[test]
    fn csv_layout() {
        let rows = sweep_rows(&tiny(Collusion::Total)).unwrap();
        let text = to_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), CSV_HEADER.split(',').count());
        assert_eq!(&first[..6], &["LSP", "SW", "TC", "3", "2", "0"]);
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn write_csv_fails_on_bad_path() {
        let rows = Vec::new();
        assert!(write_csv(Path::new("/nonexistent-dir/x/y.csv"), &rows).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = tiny(Collusion::Total);
        cfg.num_realizations = 0;
        assert!(sweep_rows(&cfg).is_err());
        let mut cfg = tiny(Collusion::Total);
        cfg.models.clear();
        assert!(sweep_rows(&cfg).is_err());
    }
}
