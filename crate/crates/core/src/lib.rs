//! Light deflection in the optical geometries of Schwarzschild and
//! equatorial Kerr black holes.
//!
//! Three independent routes to the deflection angle are provided:
//!
//! - [`gauss_bonnet::deflection_gb`] integrates Gauss curvature over the
//!   region outside the ray,
//! - [`geodesics::shoot_deflection`] integrates the ray itself,
//! - [`closed_forms`] evaluates weak-field series.
//!
//! [`gauss_bonnet::gb_residual`] checks the Gauss-Bonnet identity on
//! coordinate sectors, and [`curvature`] computes `K` by two numerical routes
//! alongside the closed forms.

// `!(x > 0.0)` guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod curvature;
pub mod error;
pub mod gauss_bonnet;
pub mod geodesics;
pub mod geometry;
pub mod ode;
pub mod quadrature;

pub use closed_forms::{
    kerr_riemannian_correction, schwarzschild_leading, sereno_series, spin_coefficient_gap, OrbitSense,
    SpinCoefficientGap,
};
pub use curvature::{
    christoffel, closed_form_k, gauss_curvature, gauss_curvature_liouville, riemann_1212, ChristoffelSymbols,
    CurvatureMethod, CurvatureSample,
};
pub use error::{GeoError, Result};
pub use gauss_bonnet::{
    deflection_gb, gb_residual, gb_terms, GaussBonnetTerms, LensRegion, QuadratureConfig, SectorRegion,
    TailHandling,
};
pub use geodesics::{
    geodesic_curvature_circle, geodesic_curvature_numeric, geodesic_rhs, integrate_geodesic, shoot_deflection,
    DeflectionMethod, DeflectionResult, GeodesicState, Path, ShootConfig, StopCondition,
};
pub use geometry::{
    area_element, eval_metric, eval_metric_derivatives, randers_beta, MetricComponents, MetricDerivatives,
    MetricId, Point, SpacetimeParams,
};
