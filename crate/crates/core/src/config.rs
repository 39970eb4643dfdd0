//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored. Lists
//! are comma separated. Keys not set fall back to the reference deployment,
//! and scenario distances left unset are derived from the array geometry, so
//! a config that only changes `geometry.num_elements` gets consistent
//! Rayleigh/critical-distance based ranges.
//!
//! | key | meaning |
//! |-----|---------|
//! | `geometry.num_elements` | array size `M` |
//! | `geometry.spacing` | element spacing in meters (default `λ/2`) |
//! | `geometry.wavelength` | wavelength in meters |
//! | `geometry.ref_power` | channel power at 1 m |
//! | `scenario.num_bobs` | one or more `K_B` values |
//! | `scenario.eves_per_bob` | `k_e` (default 2 for TC, 6 for PC) |
//! | `scenario.collusion` | `TC` or `PC` |
//! | `scenario.angle_range` | `lo,hi` in radians |
//! | `scenario.range_bounds` | `lo,hi` in meters |
//! | `scenario.protected_radius` | `r_q` in meters |
//! | `scenario.radial_offset` | `r_p` in meters |
//! | `scenario.angular_jitter` | radians |
//! | `scenario.ring_radius` | meters |
//! | `snr_grid_db` | transmit SNR grid |
//! | `num_realizations` | Monte Carlo drops per point |
//! | `schemes` | subset of `LSP,ZF` |
//! | `models` | subset of `SW,PW` |
//! | `master_seed` | 64-bit seed |
//! | `output_path` | CSV file name |
//! | `parallel` | `true` / `false` |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::arraychannel::{ArrayGeometry, Propagation, REFERENCE_ELEMENTS, REFERENCE_WAVELENGTH};
use crate::experiment::{ExperimentConfig, Scheme};
use crate::scenario::{default_ring_radius, Collusion, ScenarioConfig};
use crate::{Error, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "geometry.num_elements",
    "geometry.spacing",
    "geometry.wavelength",
    "geometry.ref_power",
    "scenario.num_bobs",
    "scenario.eves_per_bob",
    "scenario.collusion",
    "scenario.angle_range",
    "scenario.range_bounds",
    "scenario.protected_radius",
    "scenario.radial_offset",
    "scenario.angular_jitter",
    "scenario.ring_radius",
    "snr_grid_db",
    "num_realizations",
    "schemes",
    "models",
    "master_seed",
    "output_path",
    "parallel",
];

/// Raw assignments; later assignments to the same key win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignments {
    values: BTreeMap<String, String>,
}

impl Assignments {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            out.set_line(line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(out)
    }

    /// Applies one `key=value` override.
    pub fn set_line(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.values.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: cannot parse `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn pair(&self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.list::<f64>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(v) => Err(Error::Config(format!("{key}: expected two values, got {}", v.len()))),
        }
    }

    /// Resolves every field, filling defaults and derived distances.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let wavelength = self.get("geometry.wavelength")?.unwrap_or(REFERENCE_WAVELENGTH);
        let geometry = ArrayGeometry::new(
            self.get("geometry.num_elements")?.unwrap_or(REFERENCE_ELEMENTS),
            self.get("geometry.spacing")?.unwrap_or(wavelength / 2.0),
            wavelength,
            self.get("geometry.ref_power")?.unwrap_or(1.0),
        )?;

        let collusion: Collusion = self.get("scenario.collusion")?.unwrap_or(Collusion::Total);
        let bob_counts: Vec<usize> = self.list("scenario.num_bobs")?.unwrap_or_else(|| vec![10]);
        let mut scenario = ScenarioConfig::reference(&geometry, collusion, bob_counts.first().copied().unwrap_or(0));
        if let Some(v) = self.get("scenario.eves_per_bob")? {
            scenario.eves_per_bob = v;
        }
        if let Some(v) = self.pair("scenario.angle_range")? {
            scenario.angle_range = v;
        }
        if let Some(v) = self.pair("scenario.range_bounds")? {
            scenario.range_bounds = v;
        }
        if let Some(rq) = self.get("scenario.protected_radius")? {
            scenario.protected_radius = rq;
            scenario.radial_offset = 2.0 * rq;
            scenario.ring_radius = default_ring_radius(collusion, rq);
        }
        if let Some(v) = self.get("scenario.radial_offset")? {
            scenario.radial_offset = v;
        }
        if let Some(v) = self.get("scenario.angular_jitter")? {
            scenario.angular_jitter = v;
        }
        if let Some(v) = self.get("scenario.ring_radius")? {
            scenario.ring_radius = v;
        }

        let defaults = ExperimentConfig::reference(collusion);
        let config = ExperimentConfig {
            geometry,
            scenario,
            bob_counts,
            snr_grid_db: self.list("snr_grid_db")?.unwrap_or(defaults.snr_grid_db),
            num_realizations: self.get("num_realizations")?.unwrap_or(defaults.num_realizations),
            schemes: self.list::<Scheme>("schemes")?.unwrap_or(defaults.schemes),
            models: self.list::<Propagation>("models")?.unwrap_or(defaults.models),
            master_seed: self.get("master_seed")?.unwrap_or(defaults.master_seed),
            output_path: self.get::<PathBuf>("output_path")?.unwrap_or(defaults.output_path),
            parallel: self.get("parallel")?.unwrap_or(defaults.parallel),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses a config file body into a resolved configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    Assignments::parse(text)?.resolve()
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Every field as `key = value`, in the same syntax [`parse_config`] reads.
pub fn to_key_values(config: &ExperimentConfig) -> Vec<(String, String)> {
    let g = &config.geometry;
    let s = &config.scenario;
    let kv = |k: &str, v: String| (k.to_string(), v);
    vec![
        kv("geometry.num_elements", g.num_elements().to_string()),
        kv("geometry.spacing", g.spacing().to_string()),
        kv("geometry.wavelength", g.wavelength().to_string()),
        kv("geometry.ref_power", g.ref_power().to_string()),
        kv("scenario.num_bobs", join(&config.bob_counts)),
        kv("scenario.eves_per_bob", s.eves_per_bob.to_string()),
        kv("scenario.collusion", s.collusion.to_string()),
        kv("scenario.angle_range", format!("{},{}", s.angle_range.0, s.angle_range.1)),
        kv("scenario.range_bounds", format!("{},{}", s.range_bounds.0, s.range_bounds.1)),
        kv("scenario.protected_radius", s.protected_radius.to_string()),
        kv("scenario.radial_offset", s.radial_offset.to_string()),
        kv("scenario.angular_jitter", s.angular_jitter.to_string()),
        kv("scenario.ring_radius", s.ring_radius.to_string()),
        kv("snr_grid_db", join(&config.snr_grid_db)),
        kv("num_realizations", config.num_realizations.to_string()),
        kv("schemes", join(&config.schemes)),
        kv("models", join(&config.models)),
        kv("master_seed", config.master_seed.to_string()),
        kv("output_path", config.output_path.display().to_string()),
        kv("parallel", config.parallel.to_string()),
    ]
}
