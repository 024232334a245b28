//! Catalog of two-dimensional optical metrics in polar coordinates `(r, phi)`.
//!
//! Every metric here is diagonal and depends on `r` only, so `F = 0` and all
//! `phi`-partials vanish. Units are geometrized (`c = G = 1`); the mass `M`
//! and spin `a` carry length units.

use std::fmt;
use std::str::FromStr;

use crate::error::{GeoError, Result};

/// Mass and spin of the lens in geometrized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeParams {
    pub mass: f64,
    pub spin: f64,
}

impl SpacetimeParams {
    pub fn new(mass: f64, spin: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(GeoError::InvalidInput(format!(
                "mass must be finite and >= 0, got {mass}"
            )));
        }
        if !(spin.is_finite() && spin >= 0.0) {
            return Err(GeoError::InvalidInput(format!(
                "spin must be finite and >= 0, got {spin}"
            )));
        }
        Ok(Self { mass, spin })
    }

    pub fn schwarzschild(mass: f64) -> Self {
        Self { mass, spin: 0.0 }
    }

    /// Same as `new` without validation. Negative spin is accepted here so the
    /// `a -> -a` symmetry of the reduced metric can be probed directly.
    pub const fn unchecked(mass: f64, spin: f64) -> Self {
        Self { mass, spin }
    }
}

/// A point in polar coordinates on the optical surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub r: f64,
    pub phi: f64,
}

impl Point {
    pub const fn new(r: f64, phi: f64) -> Self {
        Self { r, phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricId {
    Flat,
    SchwarzschildOptical,
    KerrReducedOptical,
}

impl MetricId {
    pub const ALL: [MetricId; 3] = [
        MetricId::Flat,
        MetricId::SchwarzschildOptical,
        MetricId::KerrReducedOptical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::Flat => "flat",
            MetricId::SchwarzschildOptical => "schwarzschild",
            MetricId::KerrReducedOptical => "kerr",
        }
    }

    /// Smallest radius (exclusive) at which the metric components are defined.
    pub fn singular_radius(self, params: SpacetimeParams) -> f64 {
        match self {
            MetricId::Flat => 0.0,
            MetricId::SchwarzschildOptical | MetricId::KerrReducedOptical => 2.0 * params.mass,
        }
    }

    /// Checks the domain conditions for `p` and returns a descriptive error otherwise.
    pub fn check_point(self, params: SpacetimeParams, p: Point) -> Result<()> {
        if !(p.r.is_finite() && p.phi.is_finite()) {
            return Err(GeoError::Domain(format!(
                "non-finite point (r = {}, phi = {})",
                p.r, p.phi
            )));
        }
        let r_sing = self.singular_radius(params);
        if p.r <= r_sing {
            return Err(GeoError::Domain(format!(
                "{} metric requires r > {r_sing}, got r = {}",
                self.name(),
                p.r
            )));
        }
        if self == MetricId::KerrReducedOptical {
            let delta = kerr_delta(params, p.r);
            if delta <= 0.0 {
                return Err(GeoError::Domain(format!(
                    "kerr metric requires Delta > 0, got Delta = {delta} at r = {}",
                    p.r
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(MetricId::Flat),
            "schwarzschild" => Ok(MetricId::SchwarzschildOptical),
            "kerr" => Ok(MetricId::KerrReducedOptical),
            other => Err(GeoError::InvalidInput(format!("unknown metric '{other}'"))),
        }
    }
}

/// Pointwise coefficients of `E dr^2 + 2F dr dphi + G dphi^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricComponents {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl MetricComponents {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Covariant metric as a 2x2 matrix in `(r, phi)` order.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.e, self.f], [self.f, self.g]]
    }

    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let det = self.det();
        [[self.g / det, -self.f / det], [-self.f / det, self.e / det]]
    }
}

/// First and second coordinate partials of the metric components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricDerivatives {
    pub e_r: f64,
    pub e_phi: f64,
    pub f_r: f64,
    pub f_phi: f64,
    pub g_r: f64,
    pub g_phi: f64,
    pub e_rr: f64,
    pub g_rr: f64,
    pub e_phiphi: f64,
    pub g_phiphi: f64,
    pub e_rphi: f64,
    pub g_rphi: f64,
}

impl MetricDerivatives {
    /// `d[k][i][j] = partial_k g_ij` with coordinate order `(r, phi)`.
    pub fn first_partials(&self) -> [[[f64; 2]; 2]; 2] {
        [
            [[self.e_r, self.f_r], [self.f_r, self.g_r]],
            [[self.e_phi, self.f_phi], [self.f_phi, self.g_phi]],
        ]
    }

    pub fn phi_partials_vanish(&self) -> bool {
        self.e_phi == 0.0
            && self.f_phi == 0.0
            && self.g_phi == 0.0
            && self.e_phiphi == 0.0
            && self.g_phiphi == 0.0
            && self.e_rphi == 0.0
            && self.g_rphi == 0.0
    }
}

/// `Delta = r^2 - 2 M r + a^2` of the Kerr metric.
pub fn kerr_delta(params: SpacetimeParams, r: f64) -> f64 {
    r * r - 2.0 * params.mass * r + params.spin * params.spin
}

/// Schwarzschild optical components and their first two r-derivatives,
/// `[(E, E_r, E_rr), (G, G_r, G_rr)]`.
fn schwarzschild_jets(m: f64, r: f64) -> [(f64, f64, f64); 2] {
    let s = r - 2.0 * m;
    let s2 = s * s;
    [
        (
            r * r / s2,
            -4.0 * m * r / (s2 * s),
            8.0 * m * (r + m) / (s2 * s2),
        ),
        (
            r * r * r / s,
            (2.0 * r * r * r - 6.0 * m * r * r) / s2,
            (2.0 * r * r * r - 12.0 * m * r * r + 24.0 * m * m * r) / (s2 * s),
        ),
    ]
}

/// Reduced Kerr components written as spin corrections to Schwarzschild:
/// `G = G_s + a^2 E_s` and `E = E_s / (1 + u)` with `u = a^2 / (r (r - 2M))`.
/// Both corrections vanish identically at `a = 0`, so the spinless case
/// reproduces the Schwarzschild values bit for bit.
fn kerr_jets(params: SpacetimeParams, r: f64) -> [(f64, f64, f64); 2] {
    let [(es, es_r, es_rr), (gs, gs_r, gs_rr)] = schwarzschild_jets(params.mass, r);
    let a2 = params.spin * params.spin;
    let s = r - 2.0 * params.mass;
    let u = a2 / (r * s);
    let k = 1.0 / r + 1.0 / s;
    let u_r = -u * k;
    let u_rr = u * (k * k + 1.0 / (r * r) + 1.0 / (s * s));
    let w = 1.0 / (1.0 + u);
    let w_r = -u_r * w * w;
    let w_rr = -u_rr * w * w + 2.0 * u_r * u_r * w * w * w;
    [
        (
            es * w,
            es_r * w + es * w_r,
            es_rr * w + 2.0 * es_r * w_r + es * w_rr,
        ),
        (gs + a2 * es, gs_r + a2 * es_r, gs_rr + a2 * es_rr),
    ]
}

pub fn eval_metric(id: MetricId, params: SpacetimeParams, p: Point) -> Result<MetricComponents> {
    id.check_point(params, p)?;
    let r = p.r;
    let (e, g) = match id {
        MetricId::Flat => (1.0, r * r),
        MetricId::SchwarzschildOptical => {
            let [e, g] = schwarzschild_jets(params.mass, r);
            (e.0, g.0)
        }
        MetricId::KerrReducedOptical => {
            let [e, g] = kerr_jets(params, r);
            (e.0, g.0)
        }
    };
    Ok(MetricComponents { e, f: 0.0, g })
}

/// Closed-form partial derivatives of the catalog metrics.
pub fn eval_metric_derivatives(
    id: MetricId,
    params: SpacetimeParams,
    p: Point,
) -> Result<MetricDerivatives> {
    id.check_point(params, p)?;
    let r = p.r;
    let mut d = MetricDerivatives::default();
    let [e, g] = match id {
        MetricId::Flat => [(1.0, 0.0, 0.0), (r * r, 2.0 * r, 2.0)],
        MetricId::SchwarzschildOptical => schwarzschild_jets(params.mass, r),
        MetricId::KerrReducedOptical => kerr_jets(params, r),
    };
    (d.e_r, d.e_rr) = (e.1, e.2);
    (d.g_r, d.g_rr) = (g.1, g.2);
    Ok(d)
}

/// Area density `sqrt(E G - F^2)`.
pub fn area_element(c: MetricComponents) -> Result<f64> {
    let det = c.det();
    if !(det > 0.0) || !(c.e > 0.0) || !(c.g > 0.0) {
        return Err(GeoError::Domain(format!(
            "metric is not positive definite (E = {}, F = {}, G = {})",
            c.e, c.f, c.g
        )));
    }
    Ok(det.sqrt())
}

/// Coefficient of the `dphi` one-form in the equatorial Kerr Randers optical
/// metric, `-2 M a / (r - 2M)`. Exposed as data only.
pub fn randers_beta(params: SpacetimeParams, p: Point) -> Result<f64> {
    let s = p.r - 2.0 * params.mass;
    if !(s > 0.0) || !p.r.is_finite() {
        return Err(GeoError::Domain(format!(
            "randers one-form requires r > 2M, got r = {} with M = {}",
            p.r, params.mass
        )));
    }
    Ok(-2.0 * params.mass * params.spin / s)
}
