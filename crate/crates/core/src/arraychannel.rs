//! Uniform linear array geometry and line-of-sight channel vectors.
//!
//! The array sits on the y-axis of a 2-D plane, centred at the origin. A user
//! at polar position `(r, θ)` (θ measured from broadside) is at Cartesian
//! `(r cos θ, r sin θ)`, and element `m` is at `(0, m·d)` with `m` drawn from a
//! symmetric grid of `M` half-integer or integer offsets.
//!
//! Two propagation models are provided:
//!
//! - spherical wavefront (`SW`): exact per-element distance, amplitude and
//!   phase;
//! - planar wavefront (`PW`): common amplitude `√β₀ / r` and a linear phase
//!   progression, i.e. the first-order expansion of the spherical model.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::{CVector, Error, Result, C64};

/// Carrier wavelength used by the reference deployment, in meters.
pub const REFERENCE_WAVELENGTH: f64 = 0.1249;
/// Element count of the reference deployment.
pub const REFERENCE_ELEMENTS: usize = 100;

/// Description of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    num_elements: usize,
    spacing: f64,
    wavelength: f64,
    ref_power: f64,
}

impl ArrayGeometry {
    pub fn new(num_elements: usize, spacing: f64, wavelength: f64, ref_power: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        for (name, v) in [("spacing", spacing), ("wavelength", wavelength), ("ref_power", ref_power)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self {
            num_elements,
            spacing,
            wavelength,
            ref_power,
        })
    }

    /// Half-wavelength spaced array with unit reference power.
    pub fn half_wavelength(num_elements: usize, wavelength: f64) -> Result<Self> {
        Self::new(num_elements, wavelength / 2.0, wavelength, 1.0)
    }

    /// The 100-element, λ = 0.1249 m, half-wavelength array used as the
    /// reference deployment.
    pub fn reference() -> Self {
        Self::half_wavelength(REFERENCE_ELEMENTS, REFERENCE_WAVELENGTH).expect("reference geometry is valid")
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn ref_power(&self) -> f64 {
        self.ref_power
    }

    /// Aperture `D = M·d`.
    pub fn aperture(&self) -> f64 {
        self.num_elements as f64 * self.spacing
    }

    /// Conventional far-field boundary `2D²/λ`.
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture();
        2.0 * d * d / self.wavelength
    }

    /// Distance `9D` below which amplitude variation across the aperture is
    /// no longer negligible.
    pub fn critical_distance(&self) -> f64 {
        9.0 * self.aperture()
    }

    /// Centred element offsets `m_i = i − (M−1)/2`, in units of the spacing.
    pub fn element_offsets(&self) -> Vec<f64> {
        let centre = (self.num_elements as f64 - 1.0) / 2.0;
        (0..self.num_elements).map(|i| i as f64 - centre).collect()
    }
}

/// User location relative to the array centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPosition {
    pub range_m: f64,
    pub azimuth_rad: f64,
}

impl PolarPosition {
    pub fn new(range_m: f64, azimuth_rad: f64) -> Result<Self> {
        if !(range_m.is_finite() && range_m > 0.0) {
            return Err(Error::InvalidPosition(format!("range must be finite and positive, got {range_m}")));
        }
        if !azimuth_rad.is_finite() {
            return Err(Error::InvalidPosition(format!("azimuth must be finite, got {azimuth_rad}")));
        }
        Ok(Self { range_m, azimuth_rad })
    }

    /// Cartesian `(x, y)` with the array along the y-axis.
    pub fn to_cartesian(&self) -> (f64, f64) {
        (
            self.range_m * self.azimuth_rad.cos(),
            self.range_m * self.azimuth_rad.sin(),
        )
    }

    pub fn from_cartesian(x: f64, y: f64) -> Result<Self> {
        Self::new(x.hypot(y), y.atan2(x))
    }

    /// Euclidean distance between two positions in the plane.
    pub fn distance_to(&self, other: &PolarPosition) -> f64 {
        let (x0, y0) = self.to_cartesian();
        let (x1, y1) = other.to_cartesian();
        (x1 - x0).hypot(y1 - y0)
    }
}

/// Propagation model used to build a channel vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Propagation {
    /// Spherical wavefront (near field).
    Spherical,
    /// Planar wavefront (far field).
    Planar,
}

impl Propagation {
    pub const ALL: [Propagation; 2] = [Propagation::Spherical, Propagation::Planar];

    pub fn label(&self) -> &'static str {
        match self {
            Propagation::Spherical => "SW",
            Propagation::Planar => "PW",
        }
    }
}

impl fmt::Display for Propagation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Propagation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SW" | "SPHERICAL" => Ok(Propagation::Spherical),
            "PW" | "PLANAR" => Ok(Propagation::Planar),
            other => Err(Error::Config(format!("unknown propagation model `{other}`"))),
        }
    }
}

/// Length-M channel vector tagged with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: CVector,
    pub model: Propagation,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn into_entries(self) -> CVector {
        self.entries
    }
}

/// Distance from the user at `pos` to the element at offset `m`.
pub fn element_distance(pos: &PolarPosition, m: f64, geometry: &ArrayGeometry) -> Result<f64> {
    if !(pos.range_m.is_finite() && pos.range_m > 0.0 && pos.azimuth_rad.is_finite() && m.is_finite()) {
        return Err(Error::InvalidPosition(format!(
            "non-finite input: r={}, θ={}, m={m}",
            pos.range_m, pos.azimuth_rad
        )));
    }
    let r = pos.range_m;
    let dk = geometry.spacing / r;
    let inner = 1.0 - 2.0 * m * dk * pos.azimuth_rad.sin() + dk * dk * m * m;
    // inner = ((x)² + (y − md)²) / r² ≥ 0; clamp the rounding of an on-axis hit.
    Ok(r * inner.max(0.0).sqrt())
}

/// Spherical-wavefront response: entry `m` is `(√β₀ / r_m)·exp(−j2π r_m / λ)`.
pub fn steering_sw(pos: &PolarPosition, geometry: &ArrayGeometry) -> Result<SteeringVector> {
    let amp0 = geometry.ref_power.sqrt();
    let k0 = 2.0 * PI / geometry.wavelength;
    let entries = geometry
        .element_offsets()
        .into_iter()
        .map(|m| {
            let rm = element_distance(pos, m, geometry)?;
            Ok(C64::from_polar(amp0 / rm, -k0 * rm))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SteeringVector {
        entries: CVector::from_vec(entries),
        model: Propagation::Spherical,
    })
}

/// Planar-wavefront response: entry `m` is
/// `(√β₀ / r)·exp(−j2π r / λ)·exp(+j(2π/λ)·m·d·sin θ)`.
pub fn steering_pw(pos: &PolarPosition, geometry: &ArrayGeometry) -> Result<SteeringVector> {
    // validates r and θ
    element_distance(pos, 0.0, geometry)?;
    let k0 = 2.0 * PI / geometry.wavelength;
    let common = C64::from_polar(geometry.ref_power.sqrt() / pos.range_m, -k0 * pos.range_m);
    let progression = k0 * geometry.spacing * pos.azimuth_rad.sin();
    let entries = geometry
        .element_offsets()
        .into_iter()
        .map(|m| common * C64::from_polar(1.0, progression * m))
        .collect::<Vec<_>>();
    Ok(SteeringVector {
        entries: CVector::from_vec(entries),
        model: Propagation::Planar,
    })
}

/// Dispatch on the propagation model.
pub fn steering(pos: &PolarPosition, geometry: &ArrayGeometry, model: Propagation) -> Result<SteeringVector> {
    match model {
        Propagation::Spherical => steering_sw(pos, geometry),
        Propagation::Planar => steering_pw(pos, geometry),
    }
}

/// `|aᴴb| / (‖a‖·‖b‖)`, clamped to `[0, 1]`.
pub fn normalized_correlation(a: &SteeringVector, b: &SteeringVector) -> Result<f64> {
    vector_correlation(&a.entries, &b.entries)
}

pub(crate) fn vector_correlation(a: &CVector, b: &CVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((a.dotc(b).norm() / denom).min(1.0))
}
