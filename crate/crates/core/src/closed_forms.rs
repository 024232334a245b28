//! Weak-field deflection series in closed form.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::GeoError;

/// Orbit sense of a ray relative to the hole's rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitSense {
    Retrograde,
    Prograde,
}

impl OrbitSense {
    /// `+1` for retrograde, `-1` for prograde.
    pub fn value(self) -> f64 {
        match self {
            OrbitSense::Retrograde => 1.0,
            OrbitSense::Prograde => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrbitSense::Retrograde => "retro",
            OrbitSense::Prograde => "pro",
        }
    }
}

impl fmt::Display for OrbitSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrbitSense {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, GeoError> {
        match s.to_ascii_lowercase().as_str() {
            "retro" | "retrograde" => Ok(OrbitSense::Retrograde),
            "pro" | "prograde" => Ok(OrbitSense::Prograde),
            other => Err(GeoError::InvalidInput(format!("unknown orbit sense '{other}'"))),
        }
    }
}

/// Leading-order Schwarzschild deflection `4M/b`.
pub fn schwarzschild_leading(mass: f64, b: f64) -> f64 {
    4.0 * mass / b
}

/// Deflection from the curvature integral of the reduced Kerr optical metric,
/// `4M/b (1 + 2a^2 / (3b^2))`.
pub fn kerr_riemannian_correction(mass: f64, spin: f64, b: f64) -> f64 {
    4.0 * mass / b * (1.0 + 2.0 / 3.0 * spin * spin / (b * b))
}

/// Third-order equatorial Kerr series with signed spin coupling.
pub fn sereno_series(mass: f64, spin: f64, b: f64, sense: OrbitSense) -> f64 {
    let (m, a) = (mass, spin);
    let b2 = b * b;
    let b3 = b2 * b;
    let even = 4.0 * m / b + 15.0 * PI / 4.0 * m * m / b2 + 128.0 / 3.0 * m * m * m / b3;
    let odd = (4.0 * m / b2 + 10.0 * PI * m * m / b3) * a;
    let quadratic = 2.0 * m / b3 * a * a;
    even + sense.value() * odd + quadratic
}

/// Coefficients `c` of the `c M a^2 / b^3` term from the two expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoefficientGap {
    /// From the reduced-metric curvature integral: `8/3`.
    pub riemannian: f64,
    /// From the literature series: `2`.
    pub literature: f64,
}

impl SpinCoefficientGap {
    pub fn ratio(&self) -> f64 {
        self.riemannian / self.literature
    }
}

/// Extracts both `a^2` coefficients by parity separation of the closed forms
/// at a reference point, rather than hard-coding them.
pub fn spin_coefficient_gap() -> SpinCoefficientGap {
    let (m, a, b) = (1.0, 1.0, 1.0);
    let riemannian = (kerr_riemannian_correction(m, a, b) - schwarzschild_leading(m, b)) * b * b * b / (m * a * a);
    let plus = sereno_series(m, a, b, OrbitSense::Retrograde);
    let minus = sereno_series(m, a, b, OrbitSense::Prograde);
    let zero = sereno_series(m, 0.0, b, OrbitSense::Retrograde);
    let literature = (0.5 * (plus + minus) - zero) * b * b * b / (m * a * a);
    SpinCoefficientGap { riemannian, literature }
}
