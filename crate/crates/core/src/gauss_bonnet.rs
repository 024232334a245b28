//! Deflection as the negative curvature integral over the lens region, and a
//! numerical check of the Gauss-Bonnet identity on annular sectors.
//!
//! The lens region is `D = {0 < phi < pi, r >= b / sin(phi)}`: the area
//! outside the straight line of closest approach `b`. Because that boundary
//! is the straight-line approximation of the true ray, the result is accurate
//! to first order in `M / b`.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::curvature::{curvature_sample, CurvatureMethod};
use crate::error::{GeoError, Result};
use crate::geodesics::{geodesic_curvature_circle, DeflectionMethod, DeflectionResult};
use crate::geometry::{area_element, eval_metric, MetricId, Point, SpacetimeParams};
use crate::quadrature::{integrate_adaptive, CompensatedSum};

/// Safety factor on `b > 2M` that keeps the lens region in the weak field.
pub const WEAK_FIELD_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailHandling {
    /// Map `r in [r0, inf)` to `u = 1/r in (0, 1/r0]`.
    USubstitution,
    /// Stop at `r = cutoff_factor * b` and charge `4M/R` per angular slice to
    /// the error estimate.
    TruncateWithBound { cutoff_factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_handling: TailHandling,
    /// Which route supplies `K` inside the integrand.
    pub curvature: CurvatureMethod,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 200,
            tail_handling: TailHandling::USubstitution,
            curvature: CurvatureMethod::ClosedForm,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(GeoError::InvalidInput(format!(
                "rel_tol and abs_tol must be > 0, got {} and {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if let TailHandling::TruncateWithBound { cutoff_factor } = self.tail_handling {
            if !(cutoff_factor > 1.0) {
                return Err(GeoError::InvalidInput(format!(
                    "truncation cutoff factor must be > 1, got {cutoff_factor}"
                )));
            }
        }
        Ok(())
    }
}

/// The unbounded region beyond the line of closest approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensRegion {
    pub b: f64,
}

impl LensRegion {
    pub fn new(id: MetricId, params: SpacetimeParams, b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(GeoError::InvalidInput(format!("impact parameter must be > 0, got {b}")));
        }
        if id != MetricId::Flat && b <= WEAK_FIELD_FACTOR * 2.0 * params.mass {
            return Err(GeoError::Domain(format!(
                "b = {b} is not in the weak field: need b > {} (= {WEAK_FIELD_FACTOR} x 2M)",
                WEAK_FIELD_FACTOR * 2.0 * params.mass
            )));
        }
        Ok(Self { b })
    }

    /// Inner radial boundary at angle `phi`.
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        self.b / phi.sin()
    }
}

/// `-K sqrt(det g)` at radius `r`; the radial integrand of the deflection.
fn lensing_density(id: MetricId, params: SpacetimeParams, r: f64, method: CurvatureMethod) -> Result<f64> {
    let p = Point::new(r, FRAC_PI_2);
    let k = curvature_sample(id, params, p, method)?.k;
    Ok(-k * area_element(eval_metric(id, params, p)?)?)
}

/// Deflection angle `-(double integral of K dA)` over the lens region.
pub fn deflection_gb(
    id: MetricId,
    params: SpacetimeParams,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<DeflectionResult> {
    cfg.validate()?;
    let region = LensRegion::new(id, params, b)?;
    let level_tol = 0.5 * cfg.rel_tol;
    let evaluations = Cell::new(0usize);
    let inner_error = Cell::new(0.0f64);

    let slice = |phi: f64| -> Result<f64> {
        let r0 = region.boundary_radius(phi);
        let (value, error, extra) = match cfg.tail_handling {
            TailHandling::USubstitution => {
                let q = integrate_adaptive(
                    |u: f64| Ok(lensing_density(id, params, 1.0 / u, cfg.curvature)? / (u * u)),
                    0.0,
                    1.0 / r0,
                    level_tol,
                    cfg.abs_tol,
                    cfg.max_subdivisions,
                )?;
                (q.value, q.error, q.evaluations)
            }
            TailHandling::TruncateWithBound { cutoff_factor } => {
                let r_max = cutoff_factor * region.b;
                let tail = 4.0 * params.mass / r_max;
                if r0 >= r_max {
                    (0.0, 4.0 * params.mass / r0, 0)
                } else {
                    let q = integrate_adaptive(
                        |r: f64| lensing_density(id, params, r, cfg.curvature),
                        r0,
                        r_max,
                        level_tol,
                        cfg.abs_tol,
                        cfg.max_subdivisions,
                    )?;
                    (q.value, q.error + tail, q.evaluations)
                }
            }
        };
        evaluations.set(evaluations.get() + extra);
        inner_error.set(inner_error.get().max(error));
        Ok(value)
    };

    let outer = integrate_adaptive(slice, 0.0, PI, level_tol, cfg.abs_tol, cfg.max_subdivisions)?;
    Ok(DeflectionResult {
        angle: outer.value,
        method: DeflectionMethod::GaussBonnet,
        error_estimate: outer.error + PI * inner_error.get(),
        evaluations: evaluations.get(),
    })
}

/// Annular coordinate sector `[r_min, r_max] x [phi_min, phi_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRegion {
    pub r_min: f64,
    pub r_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// Interior angles at the four corners.
    pub corner_angles: [f64; 4],
    pub euler_char: i32,
}

impl SectorRegion {
    pub fn new(r_min: f64, r_max: f64, phi_min: f64, phi_max: f64) -> Result<Self> {
        let finite = [r_min, r_max, phi_min, phi_max].iter().all(|x| x.is_finite());
        if !finite || !(r_min > 0.0 && r_min < r_max) {
            return Err(GeoError::InvalidInput(format!(
                "sector needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if !(phi_min < phi_max && phi_max - phi_min < 2.0 * PI) {
            return Err(GeoError::InvalidInput(format!(
                "sector needs phi_min < phi_max < phi_min + 2 pi, got [{phi_min}, {phi_max}]"
            )));
        }
        Ok(Self {
            r_min,
            r_max,
            phi_min,
            phi_max,
            corner_angles: [FRAC_PI_2; 4],
            euler_char: 1,
        })
    }

    pub fn angular_width(&self) -> f64 {
        self.phi_max - self.phi_min
    }
}

/// The three sides of the Gauss-Bonnet identity for one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBonnetTerms {
    /// Line integral of geodesic curvature around the boundary.
    pub boundary_integral: f64,
    /// Integral of `K dA` over the region.
    pub area_integral: f64,
    /// Sum of exterior angles `pi - i_j` at the corners.
    pub corner_sum: f64,
    pub euler_char: i32,
    pub area_error: f64,
    pub evaluations: usize,
}

impl GaussBonnetTerms {
    /// Left side minus `2 pi chi`.
    pub fn residual(&self) -> f64 {
        let terms = [
            self.corner_sum,
            -2.0 * PI * f64::from(self.euler_char),
            self.boundary_integral,
            self.area_integral,
        ];
        terms.into_iter().collect::<CompensatedSum>().value()
    }
}

pub fn gb_terms(
    id: MetricId,
    params: SpacetimeParams,
    region: &SectorRegion,
    cfg: &QuadratureConfig,
) -> Result<GaussBonnetTerms> {
    cfg.validate()?;
    id.check_point(params, Point::new(region.r_min, region.phi_min))?;
    let width = region.angular_width();

    // Outer arc counterclockwise, inner arc clockwise; the radial sides are
    // geodesics and contribute nothing.
    let arc = |r: f64| -> Result<f64> {
        let g = eval_metric(id, params, Point::new(r, 0.0))?.g;
        Ok(geodesic_curvature_circle(id, params, r)? * g.sqrt() * width)
    };
    let boundary_integral = arc(region.r_max)? - arc(region.r_min)?;

    let level_tol = 0.5 * cfg.rel_tol;
    let evaluations = Cell::new(0usize);
    let inner_error = Cell::new(0.0f64);
    let slice = |phi: f64| -> Result<f64> {
        let q = integrate_adaptive(
            |r: f64| {
                let p = Point::new(r, phi);
                let k = curvature_sample(id, params, p, cfg.curvature)?.k;
                Ok(k * area_element(eval_metric(id, params, p)?)?)
            },
            region.r_min,
            region.r_max,
            level_tol,
            cfg.abs_tol,
            cfg.max_subdivisions,
        )?;
        evaluations.set(evaluations.get() + q.evaluations);
        inner_error.set(inner_error.get().max(q.error));
        Ok(q.value)
    };
    let area = integrate_adaptive(
        slice,
        region.phi_min,
        region.phi_max,
        level_tol,
        cfg.abs_tol,
        cfg.max_subdivisions,
    )?;

    let corner_sum = region.corner_angles.iter().map(|i| PI - i).sum();
    Ok(GaussBonnetTerms {
        boundary_integral,
        area_integral: area.value,
        corner_sum,
        euler_char: region.euler_char,
        area_error: area.error + width * inner_error.get(),
        evaluations: evaluations.get(),
    })
}

/// Signed residual of the Gauss-Bonnet identity on `region`.
pub fn gb_residual(
    id: MetricId,
    params: SpacetimeParams,
    region: &SectorRegion,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(gb_terms(id, params, region, cfg)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::schwarzschild_leading;

    fn sch(m: f64) -> SpacetimeParams {
        SpacetimeParams::schwarzschild(m)
    }

    #[test]
    fn flat_lens_has_no_deflection() {
        for b in [1.0, 1e3] {
            let d = deflection_gb(MetricId::Flat, sch(1.0), b, &QuadratureConfig::default()).unwrap();
            assert_eq!(d.angle, 0.0);
            assert_eq!(d.method, DeflectionMethod::GaussBonnet);
        }
    }

    #[test]
    fn schwarzschild_weak_field() {
        let d = deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), 1e5, &QuadratureConfig::default()).unwrap();
        let lead = schwarzschild_leading(1.0, 1e5);
        assert!(((d.angle - lead) / lead).abs() < 1e-3);
        // second-order term of the straight-line integral is 3 pi M^2 / (4 b^2)
        let second = 3.0 * PI / 4.0 * 1e-10;
        assert!((d.angle - lead - second).abs() < 1e-13, "{}", d.angle - lead);
        assert!(d.error_estimate >= 0.0);
    }

    #[test]
    fn truncation_agrees_with_substitution() {
        let cfg_u = QuadratureConfig::default();
        let cfg_t = QuadratureConfig {
            tail_handling: TailHandling::TruncateWithBound { cutoff_factor: 1e6 },
            max_subdivisions: 2000,
            ..Default::default()
        };
        let b = 100.0;
        let du = deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), b, &cfg_u).unwrap();
        let dt = deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), b, &cfg_t).unwrap();
        assert!(dt.angle < du.angle);
        assert!((du.angle - dt.angle).abs() <= dt.error_estimate, "{} vs {} (est {})", du.angle, dt.angle, dt.error_estimate);
    }

    #[test]
    fn weak_field_guard() {
        let err = deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), 15.0, &QuadratureConfig::default());
        assert!(matches!(err, Err(GeoError::Domain(_))));
        assert!(deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), -1.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn tolerance_exhaustion() {
        let cfg = QuadratureConfig { rel_tol: 1e-16, abs_tol: 1e-300, max_subdivisions: 2, ..Default::default() };
        let err = deflection_gb(MetricId::SchwarzschildOptical, sch(1.0), 100.0, &cfg).unwrap_err();
        assert!(matches!(err, GeoError::ToleranceNotMet { .. }), "{err:?}");
    }

    #[test]
    fn converged_result_is_stable_under_more_subdivisions() {
        let base = QuadratureConfig::default();
        let more = QuadratureConfig { max_subdivisions: 2 * base.max_subdivisions, ..base };
        let a = deflection_gb(MetricId::KerrReducedOptical, SpacetimeParams::new(1.0, 0.5).unwrap(), 300.0, &base).unwrap();
        let b = deflection_gb(MetricId::KerrReducedOptical, SpacetimeParams::new(1.0, 0.5).unwrap(), 300.0, &more).unwrap();
        assert!(((a.angle - b.angle) / a.angle).abs() < base.rel_tol);
    }

    #[test]
    fn spin_enters_squared() {
        let cfg = QuadratureConfig::default();
        let plus = deflection_gb(MetricId::KerrReducedOptical, SpacetimeParams::unchecked(1.0, 0.5), 200.0, &cfg).unwrap();
        let minus = deflection_gb(MetricId::KerrReducedOptical, SpacetimeParams::unchecked(1.0, -0.5), 200.0, &cfg).unwrap();
        assert!((plus.angle - minus.angle).abs() <= 1e-12 * plus.angle);
    }

    #[test]
    fn flat_sector_identity() {
        let region = SectorRegion::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let t = gb_terms(MetricId::Flat, sch(0.0), &region, &QuadratureConfig::default()).unwrap();
        assert_eq!(t.area_integral, 0.0);
        assert!((t.boundary_integral).abs() < 1e-15);
        assert!((t.corner_sum - 2.0 * PI).abs() < 1e-15);
        assert!(t.residual().abs() < 1e-10);
    }

    #[test]
    fn black_hole_sector_identity() {
        let region = SectorRegion::new(5.0, 50.0, 0.0, FRAC_PI_2).unwrap();
        for (id, spin) in [(MetricId::SchwarzschildOptical, 0.0), (MetricId::KerrReducedOptical, 0.5)] {
            let params = SpacetimeParams::new(1.0, spin).unwrap();
            for method in [CurvatureMethod::ClosedForm, CurvatureMethod::RiemannTensor, CurvatureMethod::Liouville] {
                let cfg = QuadratureConfig { curvature: method, rel_tol: 1e-9, ..Default::default() };
                let res = gb_residual(id, params, &region, &cfg).unwrap();
                assert!(res.abs() < 1e-6, "{id} {method:?}: {res}");
            }
        }
    }

    #[test]
    fn sector_validation() {
        assert!(SectorRegion::new(2.0, 1.0, 0.0, 1.0).is_err());
        assert!(SectorRegion::new(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(SectorRegion::new(1.0, 2.0, 0.0, 7.0).is_err());
        let inside = SectorRegion::new(1.5, 10.0, 0.0, 1.0).unwrap();
        assert!(gb_residual(MetricId::SchwarzschildOptical, sch(1.0), &inside, &QuadratureConfig::default()).is_err());
    }
}
